"""Strategies, product chains, and long-run average analysis.

A finite-memory strategy keeps a memory state, picks actions from the memory
alone, and updates the memory from (memory, next observation, played action).
Playing one on a POMDP yields a finite Markov chain over (state, memory)
pairs; every long-run question is answered on that chain: almost-sure
mean-payoff 1 holds exactly when every reachable recurrent class pays reward
1 on each pair it plays, and quantitative thresholds come from exact
stationary distributions of the recurrent classes.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .model import Distr, ModelError, Pomdp, RewardFn, StrategyError


class FiniteMemoryStrategy:
    """Randomized strategy with a finite memory set.

    ``next_action[m]`` is the action distribution played in memory ``m``;
    ``update[(m, o, a)]`` is the next-memory distribution after playing ``a``
    and then observing ``o``. The update table may be partial: triples that no
    play ever reaches can be omitted, and reaching one is an error. Memory
    labels are arbitrary hashable values used only for display.
    """

    def __init__(
        self,
        memories: Sequence[object],
        next_action: Sequence[Distr],
        update: Mapping[tuple[int, int, int], Distr],
        initial: int,
    ):
        if len(next_action) != len(memories):
            raise StrategyError("one action distribution needed per memory")
        if not 0 <= initial < len(memories):
            raise StrategyError(f"initial memory id {initial} out of range")
        self.memories = list(memories)
        self.next_action = list(next_action)
        self.update = dict(update)
        self.initial = initial

    @property
    def n_memories(self) -> int:
        return len(self.memories)

    def update_row(self, m: int, o: int, a: int) -> Distr:
        try:
            return self.update[(m, o, a)]
        except KeyError:
            raise StrategyError(
                f"no memory update for memory {self.memories[m]!r},"
                f" observation id {o}, action id {a}"
            ) from None


class MemorylessStrategy:
    """Observation-based strategy without memory: one action distribution per
    observation."""

    def __init__(self, choice: Mapping[int, Distr]):
        self.choice = dict(choice)

    def action_distr(self, o: int) -> Distr:
        try:
            return self.choice[o]
        except KeyError:
            raise StrategyError(f"no action choice for observation id {o}") from None

    def as_finite_memory(self, g: Pomdp) -> FiniteMemoryStrategy:
        """Lift to one memory per covered observation, tracking the last one seen."""
        obs_ids = sorted(self.choice)
        mem_of = {o: i for i, o in enumerate(obs_ids)}
        o0 = g.obs(g.initial)
        if o0 not in mem_of:
            raise StrategyError(
                f"no action choice for the initial observation {g.obs_name(o0)!r}"
            )
        update = {}
        for o, m in mem_of.items():
            for o2, m2 in mem_of.items():
                for a in self.choice[o].support():
                    update[(m, o2, a)] = Distr.dirac(m2)
        return FiniteMemoryStrategy(
            memories=[g.obs_name(o) for o in obs_ids],
            next_action=[self.choice[o] for o in obs_ids],
            update=update,
            initial=mem_of[o0],
        )


def constant_strategy(g: Pomdp, a: int) -> FiniteMemoryStrategy:
    """Always play action ``a``, regardless of history."""
    update = {(0, o, a): Distr.dirac(0) for o in range(g.n_observations)}
    return FiniteMemoryStrategy([g.action_name(a)], [Distr.dirac(a)], update, 0)


def uniform_strategy(g: Pomdp) -> MemorylessStrategy:
    """Play uniformly over whatever is available at the current observation."""
    return MemorylessStrategy(
        {o: Distr.uniform(g.avail(o)) for o in range(g.n_observations)}
    )


def alternating_strategy(g: Pomdp, a: int, b: int) -> FiniteMemoryStrategy:
    """Play ``a`` and ``b`` in strict alternation, starting with ``a``."""
    update = {}
    for o in range(g.n_observations):
        update[(0, o, a)] = Distr.dirac(1)
        update[(1, o, b)] = Distr.dirac(0)
    return FiniteMemoryStrategy(
        [g.action_name(a), g.action_name(b)],
        [Distr.dirac(a), Distr.dirac(b)],
        update,
        0,
    )


def _memory_text(g: Pomdp, label: object) -> str:
    if isinstance(label, str):
        return label
    pretty = getattr(label, "pretty", None)
    if callable(pretty):
        return pretty(g)
    return str(label)


class MarkovChain:
    """Finite Markov chain arising from a strategy played on a POMDP.

    Nodes are (state, memory) pairs in discovery order, node 0 the start.
    ``plays[i]`` maps each action played at node i to its play probability and
    reward; it is None when the chain was built without rewards.
    ``edge_actions`` records which actions contribute to each edge, for
    rendering.
    """

    def __init__(
        self,
        labels: list[tuple[int, int]],
        label_texts: list[str],
        rows: list[Distr],
        plays: list[dict[int, tuple[Fraction, Fraction]]] | None,
        edge_actions: dict[tuple[int, int], frozenset[int]],
        action_names: list[str],
        start: int = 0,
    ):
        self.labels = labels
        self.label_texts = label_texts
        self.rows = rows
        self.plays = plays
        self.edge_actions = edge_actions
        self.action_names = action_names
        self.start = start
        self.index = {lab: i for i, lab in enumerate(labels)}

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    def successors(self, i: int) -> tuple[int, ...]:
        return self.rows[i].support()

    def reachable(self, start: int | None = None) -> list[int]:
        seen = {self.start if start is None else start}
        queue = deque(seen)
        while queue:
            i = queue.popleft()
            for j in self.successors(i):
                if j not in seen:
                    seen.add(j)
                    queue.append(j)
        return sorted(seen)


def product_chain(
    g: Pomdp, rewards: RewardFn | None, sigma: FiniteMemoryStrategy
) -> MarkovChain:
    """Build the reachable chain of ``sigma`` played on ``g``.

    Raises StrategyError when the strategy plays an action unavailable at the
    current observation or reaches a missing memory-update row.
    """
    start = (g.initial, sigma.initial)
    labels = [start]
    index = {start: 0}
    rows: list[Distr] = []
    plays: list[dict[int, tuple[Fraction, Fraction]]] = []
    edge_actions: dict[tuple[int, int], set[int]] = {}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        s, m = labels[i]
        # labels grows during the walk, so rows are filled by node id.
        while len(rows) <= i:
            rows.append(Distr.dirac(0))
            plays.append({})
        o = g.obs(s)
        weights: dict[int, Fraction] = {}
        played: dict[int, tuple[Fraction, Fraction]] = {}
        for a, pa in sigma.next_action[m].items():
            if a not in g.avail(o):
                raise StrategyError(
                    f"strategy plays {g.action_name(a)!r} at state"
                    f" {g.state_name(s)!r}, unavailable at"
                    f" observation {g.obs_name(o)!r}"
                )
            r = rewards.get(s, a) if rewards is not None else Fraction(0)
            played[a] = (pa, r)
            for t, pt in g.row(s, a).items():
                urow = sigma.update_row(m, g.obs(t), a)
                for m2, pm in urow.items():
                    node = (t, m2)
                    j = index.get(node)
                    if j is None:
                        j = len(labels)
                        index[node] = j
                        labels.append(node)
                        queue.append(j)
                    weights[j] = weights.get(j, Fraction(0)) + pa * pt * pm
                    edge_actions.setdefault((i, j), set()).add(a)
        rows[i] = Distr(weights)
        plays[i] = played
    texts = [
        f"{g.state_name(s)}·{_memory_text(g, sigma.memories[m])}" for s, m in labels
    ]
    return MarkovChain(
        labels=labels,
        label_texts=texts,
        rows=rows,
        plays=plays if rewards is not None else None,
        edge_actions={e: frozenset(acts) for e, acts in sorted(edge_actions.items())},
        action_names=list(g.actions),
    )


def memoryless_chain(
    g: Pomdp, rewards: RewardFn | None, sigma: "MemorylessStrategy"
) -> MarkovChain:
    """Build the reachable chain of a memoryless strategy played on ``g``.

    Nodes are plain model states; the memory slot of each label carries the
    observation id. Avoids the quadratic update table that lifting to a
    finite-memory strategy would cost on models with many observations.
    """
    start = (g.initial, g.obs(g.initial))
    labels = [start]
    index = {g.initial: 0}
    rows: list[Distr] = []
    plays: list[dict[int, tuple[Fraction, Fraction]]] = []
    edge_actions: dict[tuple[int, int], set[int]] = {}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        s = labels[i][0]
        while len(rows) <= i:
            rows.append(Distr.dirac(0))
            plays.append({})
        o = g.obs(s)
        weights: dict[int, Fraction] = {}
        played: dict[int, tuple[Fraction, Fraction]] = {}
        for a, pa in sigma.action_distr(o).items():
            if a not in g.avail(o):
                raise StrategyError(
                    f"strategy plays {g.action_name(a)!r} at state"
                    f" {g.state_name(s)!r}, unavailable at"
                    f" observation {g.obs_name(o)!r}"
                )
            r = rewards.get(s, a) if rewards is not None else Fraction(0)
            played[a] = (pa, r)
            for t, pt in g.row(s, a).items():
                j = index.get(t)
                if j is None:
                    j = len(labels)
                    index[t] = j
                    labels.append((t, g.obs(t)))
                    queue.append(j)
                weights[j] = weights.get(j, Fraction(0)) + pa * pt
                edge_actions.setdefault((i, j), set()).add(a)
        rows[i] = Distr(weights)
        plays[i] = played
    texts = [g.state_name(s) for s, _ in labels]
    return MarkovChain(
        labels=labels,
        label_texts=texts,
        rows=rows,
        plays=plays if rewards is not None else None,
        edge_actions={e: frozenset(acts) for e, acts in sorted(edge_actions.items())},
        action_names=[g.action_name(a) for a in range(g.n_actions)],
    )


def _sccs(succ: Sequence[Sequence[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative to survive deep chains."""
    n = len(succ)
    UNSEEN = -1
    order = [UNSEEN] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    counter = 0
    out: list[list[int]] = []
    for root in range(n):
        if order[root] != UNSEEN:
            continue
        work = [(root, 0)]
        while work:
            v, edge = work[-1]
            if edge == 0:
                order[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on_stack[v] = True
            descended = False
            for k in range(edge, len(succ[v])):
                w = succ[v][k]
                if order[w] == UNSEEN:
                    work[-1] = (v, k + 1)
                    work.append((w, 0))
                    descended = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], order[w])
            if descended:
                continue
            if low[v] == order[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp.append(w)
                    if w == v:
                        break
                out.append(sorted(comp))
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return out


def recurrent_classes(mc: MarkovChain) -> list[list[int]]:
    """Bottom strongly connected components, sorted by smallest node id."""
    succ = [mc.successors(i) for i in range(mc.n_nodes)]
    bottoms = []
    for comp in _sccs(succ):
        members = set(comp)
        if all(t in members for i in comp for t in succ[i]):
            bottoms.append(comp)
    return sorted(bottoms, key=lambda c: c[0])


def limavg1_diagnosis(
    mc: MarkovChain, start: int | None = None
) -> tuple[list[int], tuple[int, int]] | None:
    """Find a reason the chain's long-run average is not almost surely 1.

    Returns (recurrent class, (node, action)) for the first reachable
    recurrent class containing a played pair with reward below 1, or None
    when no such class exists. With rewards capped at 1, paying 1 on every
    played pair of every reachable recurrent class is exactly almost-sure
    mean-payoff 1, so None certifies the property.
    """
    if mc.plays is None:
        raise ModelError("chain was built without rewards")
    reachable = set(mc.reachable(start))
    for cls in recurrent_classes(mc):
        if cls[0] not in reachable:
            continue
        for i in cls:
            for a, (_, r) in sorted(mc.plays[i].items()):
                if r != 1:
                    return cls, (i, a)
    return None


def almost_sure_limavg1(mc: MarkovChain, start: int | None = None) -> bool:
    return limavg1_diagnosis(mc, start) is None


def _solve_exact(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(a)
    m = [row[:] + [b[i]] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise ModelError("singular stationary system")
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[i][n] for i in range(n)]


def bscc_mean_payoff(mc: MarkovChain, cls: Sequence[int], exact: bool = True):
    """Expected long-run average reward inside one recurrent class.

    Solves the stationary distribution exactly over Fractions by default; with
    ``exact=False`` a float solve is used instead (handy on big classes, off
    the decision paths). ``cls`` must be a recurrent class of the chain.
    """
    if mc.plays is None:
        raise ModelError("chain was built without rewards")
    members = sorted(cls)
    if members not in recurrent_classes(mc):
        raise ModelError(f"{members} is not a recurrent class of this chain")
    local = {i: k for k, i in enumerate(members)}
    n = len(members)
    step_reward = []
    for i in members:
        step_reward.append(sum((p * r for p, r in mc.plays[i].values()), Fraction(0)))
    if exact:
        a = [[Fraction(0)] * n for _ in range(n)]
        for i in members:
            for j, p in mc.rows[i].items():
                a[local[j]][local[i]] += p
        for k in range(n):
            a[k][k] -= 1
        # Stationary equations are rank n-1; swap one for the normalization.
        a[n - 1] = [Fraction(1)] * n
        b = [Fraction(0)] * (n - 1) + [Fraction(1)]
        pi = _solve_exact(a, b)
        return sum((pi[k] * step_reward[k] for k in range(n)), Fraction(0))
    a_np = np.zeros((n, n))
    for i in members:
        for j, p in mc.rows[i].items():
            a_np[local[j], local[i]] += float(p)
    a_np -= np.eye(n)
    a_np[n - 1, :] = 1.0
    b_np = np.zeros(n)
    b_np[n - 1] = 1.0
    pi_np = np.linalg.solve(a_np, b_np)
    return float(pi_np @ np.array([float(r) for r in step_reward]))


def almost_sure_limavg_gt(
    mc: MarkovChain, lam: Fraction, start: int | None = None
) -> bool:
    """Does the long-run average exceed ``lam`` almost surely from the start?

    Inside a recurrent class the average is its stationary mean almost
    surely, so the question reduces to every reachable class beating ``lam``.
    """
    reachable = set(mc.reachable(start))
    for cls in recurrent_classes(mc):
        if cls[0] not in reachable:
            continue
        if bscc_mean_payoff(mc, cls) <= lam:
            return False
    return True


def prefix_probability(
    g: Pomdp, sigma: FiniteMemoryStrategy, prefix: Sequence[int]
) -> Fraction:
    """Probability that a play starts with the given state-action prefix.

    ``prefix`` alternates state and action ids, ``[s0, a1, s1, ..., ak, sk]``.
    The strategy's memory is hidden, so the computation drags along the
    memory posterior given the observable part of the prefix and applies the
    chain rule step by step.
    """
    if len(prefix) % 2 == 0 or not prefix:
        raise ModelError("prefix must alternate states and actions, ending in a state")
    if prefix[0] != g.initial:
        return Fraction(0)
    mem: dict[int, Fraction] = {sigma.initial: Fraction(1)}
    p = Fraction(1)
    s = prefix[0]
    for k in range(1, len(prefix), 2):
        a, t = prefix[k], prefix[k + 1]
        o = g.obs(s)
        if a not in g.avail(o):
            raise ModelError(
                f"prefix plays {g.action_name(a)!r}, unavailable at"
                f" observation {g.obs_name(o)!r}"
            )
        act_prob = sum(
            (w * sigma.next_action[m][a] for m, w in mem.items()), Fraction(0)
        )
        step = act_prob * g.row(s, a)[t]
        if step == 0:
            return Fraction(0)
        p *= step
        o2 = g.obs(t)
        nxt: dict[int, Fraction] = {}
        for m, w in mem.items():
            wa = w * sigma.next_action[m][a]
            if wa == 0:
                continue
            for m2, pm in sigma.update_row(m, o2, a).items():
                nxt[m2] = nxt.get(m2, Fraction(0)) + wa * pm / act_prob
        mem = nxt
        s = t
    return p
