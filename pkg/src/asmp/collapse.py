"""Strategy collapse: quotient a finite-memory strategy by behavioral fingerprints.

Each memory element of a strategy is summarized by three facts about the
product chain: from which states it is almost-surely winning, at which states
it sits inside a recurrent class, and which actions it can play. Memories
with equal summaries are interchangeable, so the quotient strategy tracks
only (belief, summary) pairs. That caps the memory a winning strategy ever
needs at 2^(3n + k) for n states and k actions, and gives the decision
procedure a finite memory space to search.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .bits import bits, mask_of
from .chains import FiniteMemoryStrategy, product_chain, recurrent_classes
from .model import Distr, Pomdp, RewardFn, StrategyError


@dataclass(frozen=True, order=True)
class MemoryFingerprint:
    """Behavioral summary of one memory element, as state/action bitmasks.

    ``win`` bit s: playing on from (s, m) achieves long-run average 1 almost
    surely. ``rec`` bit s: (s, m) lies in a recurrent class. Bits of states
    that never occur with m are 0. ``acts`` is the action support of the
    memory's choice distribution.
    """

    win: int
    rec: int
    acts: int


@dataclass(frozen=True, order=True)
class CollapsedMemory:
    """A quotient memory: belief support paired with a fingerprint."""

    belief: int
    fp: MemoryFingerprint

    def canonical(self) -> "CollapsedMemory":
        """Zero the win/rec bits outside the belief.

        Every predicate downstream reads the maps only at belief states, so
        canonical memories carry the same information with far fewer distinct
        values.
        """
        return CollapsedMemory(
            self.belief,
            MemoryFingerprint(
                self.fp.win & self.belief, self.fp.rec & self.belief, self.fp.acts
            ),
        )

    def pretty(self, g: Pomdp) -> str:
        def names(mask: int) -> str:
            return ",".join(g.state_name(s) for s in bits(mask)) or "-"

        acts = ",".join(g.action_name(a) for a in bits(self.fp.acts)) or "-"
        return (
            f"(Y={names(self.belief)} W={names(self.fp.win)}"
            f" R={names(self.fp.rec)} A={acts})"
        )


def fingerprints(
    g: Pomdp, rewards: RewardFn, sigma: FiniteMemoryStrategy
) -> list[MemoryFingerprint]:
    """Summarize every memory of ``sigma`` from one product-chain analysis.

    A node of the chain is winning exactly when no recurrent class containing
    a reward-below-1 play is reachable from it, so one backward sweep from
    the offending classes settles the win bits of all nodes at once.
    """
    mc = product_chain(g, rewards, sigma)
    rec = [0] * sigma.n_memories
    bad_nodes: list[int] = []
    for cls in recurrent_classes(mc):
        for i in cls:
            s, m = mc.labels[i]
            rec[m] |= 1 << s
        if any(r != 1 for i in cls for _, r in mc.plays[i].values()):
            bad_nodes.extend(cls)
    backward: list[list[int]] = [[] for _ in range(mc.n_nodes)]
    for i in range(mc.n_nodes):
        for j in mc.successors(i):
            backward[j].append(i)
    tainted = set(bad_nodes)
    stack = list(bad_nodes)
    while stack:
        j = stack.pop()
        for i in backward[j]:
            if i not in tainted:
                tainted.add(i)
                stack.append(i)
    win = [0] * sigma.n_memories
    for i in range(mc.n_nodes):
        if i not in tainted:
            s, m = mc.labels[i]
            win[m] |= 1 << s
    return [
        MemoryFingerprint(win[m], rec[m], mask_of(sigma.next_action[m].support()))
        for m in range(sigma.n_memories)
    ]


@dataclass
class ProjectionGraph:
    """Reachable quotient-memory graph.

    ``edges[v]`` lists (action, target vertex id) pairs, sorted. An edge
    v -a-> v' exists when some observation o gives a non-empty belief update
    from v's belief, and some memory pair realizing the two fingerprints is
    linked by the strategy's update on (o, a).
    """

    vertices: list[CollapsedMemory]
    edges: list[list[tuple[int, int]]]
    initial: int

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)


def projection_graph(
    g: Pomdp, sigma: FiniteMemoryStrategy, fps: list[MemoryFingerprint]
) -> ProjectionGraph:
    by_fp: dict[MemoryFingerprint, list[int]] = {}
    for m, fp in enumerate(fps):
        by_fp.setdefault(fp, []).append(m)

    # Successor fingerprints of (fp, o, a) depend on the strategy alone, not
    # on the belief, so they are cached across vertices.
    fp_succ_cache: dict[tuple[MemoryFingerprint, int, int], tuple[MemoryFingerprint, ...]] = {}

    def fp_successors(fp: MemoryFingerprint, o: int, a: int) -> tuple[MemoryFingerprint, ...]:
        key = (fp, o, a)
        got = fp_succ_cache.get(key)
        if got is None:
            out = set()
            for m in by_fp[fp]:
                row = sigma.update.get((m, o, a))
                if row is not None:
                    for m2 in row.support():
                        out.add(fps[m2])
            got = tuple(sorted(out))
            fp_succ_cache[key] = got
        return got

    start = CollapsedMemory(1 << g.initial, fps[sigma.initial])
    vertices = [start]
    index = {start: 0}
    edges: list[list[tuple[int, int]]] = []
    frontier = deque([0])
    while frontier:
        v = frontier.popleft()
        while len(edges) <= v:
            edges.append([])
        cm = vertices[v]
        obs_y = g.obs(next(bits(cm.belief)))
        out: list[tuple[int, int]] = []
        for a in bits(cm.fp.acts):
            if a not in g.avail(obs_y):
                continue
            post: set[int] = set()
            for s in bits(cm.belief):
                post.update(g.support(s, a))
            grouped: dict[int, int] = {}
            for t in post:
                grouped[g.obs(t)] = grouped.get(g.obs(t), 0) | (1 << t)
            for o in sorted(grouped):
                for fp2 in fp_successors(cm.fp, o, a):
                    nxt = CollapsedMemory(grouped[o], fp2)
                    w = index.get(nxt)
                    if w is None:
                        w = len(vertices)
                        index[nxt] = w
                        vertices.append(nxt)
                        frontier.append(w)
                    out.append((a, w))
        edges[v] = sorted(set(out))
    return ProjectionGraph(vertices=vertices, edges=edges, initial=0)


def collapse(
    g: Pomdp, rewards: RewardFn, sigma: FiniteMemoryStrategy
) -> FiniteMemoryStrategy:
    """Build the quotient strategy over projection-graph vertices.

    Plays uniformly over the actions leaving the current vertex; updates
    uniformly over the edge targets whose belief carries the observation just
    seen. Preserves the almost-sure mean-payoff-1 verdict of the input.
    """
    pg = projection_graph(g, sigma, fingerprints(g, rewards, sigma))
    bound = 2 ** (3 * g.n_states + g.n_actions)
    assert pg.n_vertices <= bound, "projection graph exceeded its memory bound"
    next_action: list[Distr] = []
    update: dict[tuple[int, int, int], Distr] = {}
    for v, cm in enumerate(pg.vertices):
        acts = sorted({a for a, _ in pg.edges[v]})
        if not acts:
            raise StrategyError(
                f"no outgoing action at reachable quotient memory {cm.pretty(g)}"
            )
        next_action.append(Distr.uniform(acts))
        grouped: dict[tuple[int, int], set[int]] = {}
        for a, w in pg.edges[v]:
            o = g.obs(next(bits(pg.vertices[w].belief)))
            grouped.setdefault((o, a), set()).add(w)
        for (o, a), targets in sorted(grouped.items()):
            update[(v, o, a)] = Distr.uniform(sorted(targets))
    return FiniteMemoryStrategy(
        memories=list(pg.vertices),
        next_action=next_action,
        update=update,
        initial=pg.initial,
    )
