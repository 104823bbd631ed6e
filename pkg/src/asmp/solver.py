"""Decide almost-sure long-run average 1 and produce checked witnesses.

The pipeline: fold candidate memories into the state space, keep the
almost-surely safe core (never hit the losing sink), then ask for
almost-sure reachability of the states whose own win and recurrence bits
are set. The answer is YES exactly when the initial observation survives
both fixpoints. Every YES comes with a finite-memory strategy for the
original model that has been validated on its own chain before being
reported; a failed validation is an internal error, never a report.

Reports render without wall-clock times so equal inputs give byte-equal
output; timing lives in the stats dict for callers that want it.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

from .chains import (
    FiniteMemoryStrategy,
    MemorylessStrategy,
    limavg1_diagnosis,
    memoryless_chain,
    product_chain,
)
from .collapse import CollapsedMemory
from .fixpoint import almost_reach, almost_safe, restrict_safe
from .model import Distr, ModelError, Pomdp, RewardFn, StrategyError, validate
from .reduction import BeliefObsPomdp, reduce_pomdp

INIT_MEMORY = "init"


@dataclass(frozen=True)
class Diagnosis:
    """Why a strategy is not almost-surely winning."""

    kind: str  # "play" (illegal move) or "recurrent-class" (reward below 1)
    message: str
    class_labels: tuple[str, ...] = ()
    pair: tuple[str, str] | None = None


def validate_strategy(
    g: Pomdp, rewards: RewardFn, sigma
) -> tuple[bool, Diagnosis | None]:
    """Check a strategy by explicit chain analysis.

    Accepts finite-memory and memoryless strategies. Returns (True, None)
    when the long-run average reward is 1 almost surely, otherwise a
    diagnosis naming the offending recurrent class and played pair, or the
    illegal move for strategies that leave the playable region.
    """
    try:
        if isinstance(sigma, MemorylessStrategy):
            mc = memoryless_chain(g, rewards, sigma)
        else:
            mc = product_chain(g, rewards, sigma)
    except StrategyError as err:
        return False, Diagnosis(kind="play", message=str(err))
    bad = limavg1_diagnosis(mc)
    if bad is None:
        return True, None
    cls, (node, action) = bad
    labels = tuple(mc.label_texts[i] for i in sorted(cls))
    pair = (mc.label_texts[node], mc.action_names[action])
    return False, Diagnosis(
        kind="recurrent-class",
        message=(
            f"recurrent class {{{', '.join(labels)}}} plays"
            f" {pair[1]!r} at {pair[0]!r} for reward below 1"
        ),
        class_labels=labels,
        pair=pair,
    )


@dataclass
class SolveReport:
    verdict: str
    reason: str
    model_name: str
    reduction_stats: dict[str, int]
    n_observations: int
    safety_sizes: list[int]
    y_star_size: int
    wcs_size: int | None = None
    z_sizes: list[int] | None = None
    z_star_size: int | None = None
    x_rounds: list[list[int]] | None = None
    witness: FiniteMemoryStrategy | None = None
    validated: bool | None = None
    stats: dict[str, float] = field(default_factory=dict)

    def render(self, trace: bool = False) -> str:
        rs = self.reduction_stats
        lines = [
            f"verdict: {self.verdict}",
            f"model: {self.model_name or '(unnamed)'}",
            (
                f"reduction: states={rs['states']} observations={rs['observations']}"
                f" rows={rs['rows']} memory-actions={rs['memory_actions']}"
            ),
            (
                f"safety: {self.y_star_size} of {self.n_observations} observations"
                f" almost-surely safe ({len(self.safety_sizes)} iterations)"
            ),
        ]
        if self.wcs_size is not None:
            lines.append(f"target: {self.wcs_size} winning-recurrent states")
            lines.append(
                f"reachability: {self.z_star_size} of {self.y_star_size}"
                f" observations almost-surely reach the target"
                f" ({len(self.z_sizes)} rounds)"
            )
        lines.append(f"reason: {self.reason}")
        if self.witness is not None:
            checked = "validated" if self.validated else "NOT validated"
            lines.append(
                f"witness: finite-memory strategy with"
                f" {self.witness.n_memories} memories ({checked})"
            )
        if trace:
            lines.append(
                "trace safety sizes: " + " ".join(str(n) for n in self.safety_sizes)
            )
            if self.z_sizes is not None:
                lines.append(
                    "trace reach Z sizes: " + " ".join(str(n) for n in self.z_sizes)
                )
                for i, xs in enumerate(self.x_rounds or []):
                    lines.append(
                        f"trace reach X growth round {i}: "
                        + " ".join(str(n) for n in xs)
                    )
        return "\n".join(lines) + "\n"


def memoryless_to_finite_memory(
    bg: BeliefObsPomdp, sigma: MemorylessStrategy
) -> FiniteMemoryStrategy:
    """Unfold a memoryless strategy on the reduction into a finite-memory
    strategy for the base model.

    Memories are the collapsed memories the reduction strategy steps
    through, plus a fresh start memory that folds the initial memory choice
    into the first update: the joint law of (memory, first action) is
    preserved by conditioning the memory on the action actually played.
    """
    g = bg.base
    n_base = g.n_actions
    obs_id = {p: i for i, p in enumerate(bg.obs_payloads)}

    def act_choice(cm: CollapsedMemory) -> Distr:
        return sigma.action_distr(obs_id[("act", cm)])

    init_distr = sigma.action_distr(obs_id[("init",)])
    first: dict[CollapsedMemory, "Fraction"] = {}
    for aid, p in init_distr.items():
        if aid == bg.abort_action or aid < n_base:
            raise StrategyError(
                "reduction strategy must open with a memory action"
            )
        first[bg.memory_actions[aid - n_base - 1]] = p

    memories: list[object] = [INIT_MEMORY]
    index: dict[CollapsedMemory, int] = {}
    next_action: list[Distr | None] = [None]
    update: dict[tuple[int, int, int], Distr] = {}
    queue: deque[CollapsedMemory] = deque()

    def intern(cm: CollapsedMemory) -> int:
        got = index.get(cm)
        if got is None:
            got = len(memories)
            index[cm] = got
            memories.append(cm)
            next_action.append(act_choice(cm))
            queue.append(cm)
        return got

    def grouped_posts(belief: int, a: int) -> dict[int, int]:
        out: dict[int, int] = {}
        for s in (i for i in range(g.n_states) if (belief >> i) & 1):
            for t in g.support(s, a):
                o = g.obs(t)
                out[o] = out.get(o, 0) | (1 << t)
        return out

    def mem_choice(cm: CollapsedMemory, ymask2: int, a: int) -> Distr:
        row = sigma.action_distr(obs_id[("mem", ymask2, a, cm)])
        moved: dict[int, "Fraction"] = {}
        for aid, p in row.items():
            cm2 = bg.memory_actions[aid - n_base - 1]
            m2 = intern(cm2)
            moved[m2] = moved.get(m2, 0) + p
        return Distr(moved)

    # Start memory: mix the first action over the initial memory choices,
    # then update by the posterior of that choice given the action.
    mixed: dict[int, "Fraction"] = {}
    for cm, p0 in first.items():
        for a, pa in act_choice(cm).items():
            mixed[a] = mixed.get(a, 0) + p0 * pa
    next_action[0] = Distr(mixed)
    for a in next_action[0].support():
        posterior = {
            cm: p0 * act_choice(cm)[a]
            for cm, p0 in first.items()
            if act_choice(cm)[a] > 0
        }
        total = sum(posterior.values())
        grouped = grouped_posts(1 << g.initial, a)
        for o2, ymask2 in sorted(grouped.items()):
            blended: dict[int, "Fraction"] = {}
            for cm, w in posterior.items():
                for m2, p in mem_choice(cm, ymask2, a).items():
                    blended[m2] = blended.get(m2, 0) + (w / total) * p
            update[(0, o2, a)] = Distr(blended)

    while queue:
        cm = queue.popleft()
        m = index[cm]
        for a in next_action[m].support():
            for o2, ymask2 in sorted(grouped_posts(cm.belief, a).items()):
                update[(m, o2, a)] = mem_choice(cm, ymask2, a)

    return FiniteMemoryStrategy(
        memories=memories,
        next_action=list(next_action),
        update=update,
        initial=0,
    )


def finite_memory_to_memoryless(
    bg: BeliefObsPomdp, collapsed: FiniteMemoryStrategy
) -> MemorylessStrategy:
    """Project a collapsed strategy onto the reduction's observations.

    Memories must be collapsed-memory labels (the output of ``collapse``).
    They are canonicalized first; distinct memories that collide with
    conflicting behavior are rejected. Memory choices the reduction has
    disabled (and update rows the strategy lacks) map to the abort action,
    which runs into the losing sink, so validation rejects exactly the
    strategies whose quotient steps outside the enabled region.
    """
    g = bg.base
    n_base = g.n_actions
    for label in collapsed.memories:
        if not isinstance(label, CollapsedMemory):
            raise StrategyError(
                "strategy memories are not collapsed; collapse it first"
            )

    def norm_updates(m: int) -> dict[tuple[int, int], tuple]:
        out = {}
        for (mm, o, a), row in collapsed.update.items():
            if mm == m:
                moved = {}
                for m2, p in row.items():
                    c2 = collapsed.memories[m2].canonical()
                    moved[c2] = moved.get(c2, 0) + p
                out[(o, a)] = tuple(sorted(moved.items()))
        return out

    behavior: dict[CollapsedMemory, tuple] = {}
    rep: dict[CollapsedMemory, int] = {}
    for m, label in enumerate(collapsed.memories):
        c = label.canonical()
        found = (collapsed.next_action[m], tuple(sorted(norm_updates(m).items())))
        if c in behavior:
            if behavior[c] != found:
                raise StrategyError(
                    f"memories collide at {c.pretty(g)} with conflicting rows"
                )
        else:
            behavior[c] = found
            rep[c] = m

    obs_id = {p: i for i, p in enumerate(bg.obs_payloads)}
    abort = bg.abort_action
    choice: dict[int, Distr] = {}

    c0 = collapsed.memories[collapsed.initial].canonical()
    aid0 = bg.memory_action_id.get(c0)
    init_obs = obs_id[("init",)]
    if aid0 is not None and aid0 in bg.avail(init_obs):
        choice[init_obs] = Distr.dirac(aid0)
    else:
        choice[init_obs] = Distr.dirac(abort)

    def mapped_row(c: CollapsedMemory, o_red: int, key: tuple[int, int]) -> Distr:
        row = collapsed.update.get((rep[c],) + key)
        if row is None:
            return Distr.dirac(abort)
        moved: dict[int, "Fraction"] = {}
        for m2, p in row.items():
            c2 = collapsed.memories[m2].canonical()
            aid = bg.memory_action_id.get(c2)
            if aid is None or aid not in bg.avail(o_red):
                aid = abort
            moved[aid] = moved.get(aid, 0) + p
        return Distr(moved)

    for o_red, payload in enumerate(bg.obs_payloads):
        if payload[0] == "act":
            c = payload[1]
            if c in behavior:
                choice[o_red] = collapsed.next_action[rep[c]]
        elif payload[0] == "mem":
            _, ymask2, a, c = payload
            if c in rep:
                o_base = g.obs(next(i for i in range(g.n_states) if (ymask2 >> i) & 1))
                choice[o_red] = mapped_row(c, o_red, (o_base, a))
        elif payload == ("sink",):
            choice[o_red] = Distr.dirac(abort)

    return MemorylessStrategy(choice)


def decide_limavg1(
    g: Pomdp,
    rewards: RewardFn,
    max_states: int = 250_000,
    trace: bool = False,
) -> SolveReport:
    """Decide whether some finite-memory strategy achieves long-run average
    reward 1 almost surely, and construct one when the answer is YES."""
    validate(g, require_unique_initial_obs=False)
    problems = rewards.check(g)
    if problems:
        raise ModelError("; ".join(problems))

    t0 = time.perf_counter()
    bg = reduce_pomdp(g, rewards, max_states=max_states)
    safety = almost_safe(bg, [s for s in range(bg.n_states) if s != bg.sink])
    report = SolveReport(
        verdict="NO",
        reason="",
        model_name=g.name,
        reduction_stats=bg.stats(),
        n_observations=bg.n_observations,
        safety_sizes=[len(y) for y in safety.iterates],
        y_star_size=len(safety.y_star),
    )
    if bg.obs(bg.initial) not in safety.y_star:
        report.reason = (
            "the initial observation is outside the almost-safe set:"
            " every strategy risks the losing sink"
        )
        report.stats["wall_s"] = time.perf_counter() - t0
        return report

    restricted = restrict_safe(bg, safety.y_star, safety.allow_map)
    wcs = restricted.wcs_state_ids()
    reach = almost_reach(restricted, wcs)
    report.wcs_size = len(wcs)
    report.z_sizes = [len(z) for z in reach.z_iterates]
    report.z_star_size = len(reach.z_star)
    report.x_rounds = reach.x_rounds

    if restricted.obs(restricted.initial) not in reach.z_star:
        report.reason = (
            "the initial observation cannot almost-surely reach the"
            " winning-recurrent core"
        )
        report.stats["wall_s"] = time.perf_counter() - t0
        return report

    choice = {}
    for o in range(restricted.n_observations):
        if o in reach.z_star:
            choice[o] = Distr.uniform(reach.allow_map[o])
        else:
            choice[o] = Distr.uniform(restricted.avail(o))
    witness = memoryless_to_finite_memory(restricted, MemorylessStrategy(choice))
    ok, diag = validate_strategy(g, rewards, witness)
    if not ok:
        raise ModelError(
            f"solver witness failed validation: {diag.message}"
        )
    report.verdict = "YES"
    report.reason = "the initial observation is almost-sure winning"
    report.witness = witness
    report.validated = True
    report.stats["wall_s"] = time.perf_counter() - t0
    return report
