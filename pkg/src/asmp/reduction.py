"""Belief-observation reduction: fold candidate memories into the state space.

The reduced POMDP alternates action-selection states (s, cm) and
memory-selection states (s', Y', a, cm), where cm ranges over collapsed
memories (belief, win map, recurrence map, action support). The hidden part
of a state is only the concrete POMDP state; belief and memory sit in the
observation, so every reachable belief equals its observation class and
memoryless strategies suffice. Actions that a winning quotient strategy
could never take route to an absorbing losing sink instead.

Memories are kept canonical (win/rec masked to the belief). Every predicate
here and in the fixpoint solver reads the maps only at belief states, so
canonicalization quotients the construction by a bisimulation that respects
observations, availability, and rewards. It is what makes the construction
feasible: free map bits outside the belief would square the fan-out twice.
"""

from __future__ import annotations

from collections import deque
from fractions import Fraction
from typing import Iterator

from .bits import bits, mask_of, submasks, supermasks_within
from .collapse import CollapsedMemory, MemoryFingerprint
from .model import CapacityError, Distr, ModelError, Pomdp, RewardFn

StatePayload = tuple
ObsPayload = tuple

INIT = ("init",)
SINK = ("sink",)


def is_winning_memory(cm: CollapsedMemory) -> bool:
    """A memory is winning when its win map covers its whole belief."""
    return cm.fp.win & cm.belief == cm.belief


def enabled_action(cm: CollapsedMemory, a: int, reward1_mask: int) -> bool:
    """Is base action ``a`` playable at a memory without breaking the win?

    Requires ``a`` in the memory's action support and reward 1 at every
    belief state whose win and recurrence bits are both set.
    ``reward1_mask`` is the precomputed mask of states paying 1 under ``a``.
    """
    if not (cm.fp.acts >> a) & 1:
        return False
    critical = cm.belief & cm.fp.win & cm.fp.rec
    return critical & ~reward1_mask == 0


def enabled_memory_action(
    g: Pomdp, cm2: CollapsedMemory, belief2: int, a: int, cm: CollapsedMemory
) -> bool:
    """Literal check of the memory-update enabledness conditions.

    ``cm2`` is a candidate next memory for the context (belief2, a, cm):
    win and recurrence bits must propagate from every flagged state of cm's
    belief to all its successors inside belief2, and the candidate's belief
    must be belief2 itself. Exposed for oracle testing; the construction
    enumerates exactly the passing candidates directly.
    """
    if cm2.belief != belief2:
        return False
    for src_mask, dst_mask in ((cm.fp.win, cm2.fp.win), (cm.fp.rec, cm2.fp.rec)):
        for s in bits(cm.belief & src_mask):
            forced = mask_of(g.support(s, a)) & belief2
            if forced & ~dst_mask:
                return False
    return True


class _ReducedRewards:
    """Reward adapter for the reduced POMDP, payload-driven and table-free."""

    def __init__(self, bg: "BeliefObsPomdp"):
        self._bg = bg

    def get(self, s: int, a: int) -> Fraction:
        return self._bg.reward(s, a)


class BeliefObsPomdp:
    """Reduced POMDP over action-selection and memory-selection states.

    Presents the same read interface as Pomdp (ids, names, availability,
    rows, supports) so chain construction, the belief-observation checker,
    and the fixpoint solver work unchanged. Rows are uniform over stored
    support tuples and built on demand. State 0 is the initial state,
    state 1 the losing sink. Base actions keep their ids from the source
    POMDP, then comes the abort action, then the interned memory actions.
    """

    def __init__(
        self,
        base: Pomdp,
        rewards: RewardFn,
        state_payloads: list[StatePayload],
        obs_payloads: list[ObsPayload],
        obs_of: list[int],
        succ: dict[tuple[int, int], tuple[int, ...]],
        availability: dict[int, tuple[int, ...]],
        memory_actions: list[CollapsedMemory],
    ):
        self.base = base
        self.base_rewards = rewards
        self.state_payloads = state_payloads
        self.obs_payloads = obs_payloads
        self.obs_of = obs_of
        self.succ = succ
        self.availability = availability
        self.memory_actions = memory_actions
        self.memory_action_id = {
            cm: base.n_actions + 1 + i for i, cm in enumerate(memory_actions)
        }
        self.initial = 0
        # Safety restriction prunes the sink together with its observation.
        self.sink = 1 if len(state_payloads) > 1 and state_payloads[1] == SINK else None
        by_obs: dict[int, list[int]] = {o: [] for o in range(len(obs_payloads))}
        for s, o in enumerate(obs_of):
            by_obs[o].append(s)
        self._obs_states = {o: tuple(ss) for o, ss in by_obs.items()}
        self._base_avail_pairs = set(base.available_pairs())

    @property
    def n_states(self) -> int:
        return len(self.state_payloads)

    @property
    def n_actions(self) -> int:
        return self.base.n_actions + 1 + len(self.memory_actions)

    @property
    def n_observations(self) -> int:
        return len(self.obs_payloads)

    @property
    def actions(self) -> list[str]:
        return [self.action_name(a) for a in range(self.n_actions)]

    @property
    def abort_action(self) -> int:
        return self.base.n_actions

    def obs(self, s: int) -> int:
        return self.obs_of[s]

    def obs_states(self, o: int) -> tuple[int, ...]:
        return self._obs_states[o]

    def avail(self, o: int) -> tuple[int, ...]:
        return self.availability[o]

    def support(self, s: int, a: int) -> tuple[int, ...]:
        try:
            return self.succ[(s, a)]
        except KeyError:
            raise ModelError(
                f"no transition row for state {self.state_name(s)!r}"
                f" and action {self.action_name(a)!r}"
            ) from None

    def row(self, s: int, a: int) -> Distr:
        return Distr.uniform(self.support(s, a))

    def state_name(self, s: int) -> str:
        p = self.state_payloads[s]
        if p == INIT:
            return "init"
        if p == SINK:
            return "sink"
        if p[0] == "act":
            return f"{self.base.state_name(p[1])}·{p[2].pretty(self.base)}"
        _, s2, ymask, a, cm = p
        names = ",".join(self.base.state_name(t) for t in bits(ymask))
        return (
            f"{self.base.state_name(s2)}·upd[{names}|{self.base.action_name(a)}"
            f"|{cm.pretty(self.base)}]"
        )

    def action_name(self, a: int) -> str:
        if a < self.base.n_actions:
            return self.base.action_name(a)
        if a == self.abort_action:
            return "abort"
        return f"mem{a - self.base.n_actions - 1}"

    def obs_name(self, o: int) -> str:
        p = self.obs_payloads[o]
        if p == INIT:
            return "init"
        if p == SINK:
            return "sink"
        if p[0] == "act":
            return f"act{p[1].pretty(self.base)}"
        _, ymask, a, cm = p
        names = ",".join(self.base.state_name(t) for t in bits(ymask))
        return f"upd[{names}|{self.base.action_name(a)}|{cm.pretty(self.base)}]"

    def reward(self, s: int, a: int) -> Fraction:
        p = self.state_payloads[s]
        if p[0] == "act":
            if (p[1], a) in self._base_avail_pairs:
                return self.base_rewards.get(p[1], a)
            return Fraction(0)
        if p[0] == "mem" or p == INIT:
            return Fraction(1)
        return Fraction(0)

    def reward_fn(self) -> _ReducedRewards:
        return _ReducedRewards(self)

    def wcs_state_ids(self) -> list[int]:
        """Action-selection states whose own win and recurrence bits are set:
        the reachability target of the top-level decision procedure."""
        out = []
        for s, p in enumerate(self.state_payloads):
            if p[0] == "act":
                bit = 1 << p[1]
                if p[2].fp.win & bit and p[2].fp.rec & bit:
                    out.append(s)
        return out

    def available_pairs(self) -> Iterator[tuple[int, int]]:
        for s in range(self.n_states):
            for a in self.avail(self.obs(s)):
                yield s, a

    def stats(self) -> dict[str, int]:
        return {
            "states": self.n_states,
            "observations": self.n_observations,
            "rows": len(self.succ),
            "memory_actions": len(self.memory_actions),
        }

    def to_pomdp(self, name: str = "") -> tuple[Pomdp, RewardFn]:
        """Materialize as a plain POMDP with synthesized short names.

        States become q0..qN, observations o0..oM, memory actions keep their
        mem<i> names. Mainly for dumping reduced models to files.
        """
        states = [f"q{i}" for i in range(self.n_states)]
        observations = [f"o{i}" for i in range(self.n_observations)]
        actions = [self.action_name(a) for a in range(self.n_actions)]
        rows = {pair: Distr.uniform(ts) for pair, ts in self.succ.items()}
        g = Pomdp(
            states=states,
            actions=actions,
            observations=observations,
            obs_of=list(self.obs_of),
            rows=rows,
            initial=self.initial,
            availability=self.availability,
            name=name,
        )
        table = {(s, a): self.reward(s, a) for s, a in self.available_pairs()}
        return g, RewardFn(table)


def reduce_pomdp(
    g: Pomdp, rewards: RewardFn, max_states: int = 250_000
) -> BeliefObsPomdp:
    """Build the reachable fragment of the belief-observation reduction.

    Breadth-first from the initial state; exceeding ``max_states`` raises
    CapacityError with the partial counters, never a truncated model.
    Enumeration order is fixed (lexicographic on bit patterns), so state
    numbering is reproducible.
    """
    n_base = g.n_actions
    abort = n_base
    reward1 = [0] * n_base
    for s, a in g.available_pairs():
        if rewards.get(s, a) == 1:
            reward1[a] |= 1 << s
    avail_mask = {
        o: mask_of(g.avail(o)) for o in range(g.n_observations)
    }

    state_payloads: list[StatePayload] = [INIT, SINK]
    state_index: dict[StatePayload, int] = {INIT: 0, SINK: 1}
    obs_payloads: list[ObsPayload] = [INIT, SINK]
    obs_index: dict[ObsPayload, int] = {INIT: 0, SINK: 1}
    obs_of: list[int] = [0, 1]
    succ: dict[tuple[int, int], tuple[int, ...]] = {}
    availability: dict[int, tuple[int, ...]] = {}
    memory_actions: list[CollapsedMemory] = []
    memory_action_id: dict[CollapsedMemory, int] = {}

    def stats() -> dict[str, int]:
        return {
            "states": len(state_payloads),
            "observations": len(obs_payloads),
            "rows": len(succ),
            "memory_actions": len(memory_actions),
        }

    def intern_memory_action(cm: CollapsedMemory) -> int:
        got = memory_action_id.get(cm)
        if got is None:
            got = n_base + 1 + len(memory_actions)
            memory_action_id[cm] = got
            memory_actions.append(cm)
        return got

    queue: deque[int] = deque()

    def intern_state(payload: StatePayload, o: int) -> int:
        got = state_index.get(payload)
        if got is None:
            if len(state_payloads) >= max_states:
                raise CapacityError(
                    f"reduction exceeded the cap of {max_states} states", stats()
                )
            got = len(state_payloads)
            state_index[payload] = got
            state_payloads.append(payload)
            obs_of.append(o)
            queue.append(got)
        return got

    def intern_obs(payload: ObsPayload) -> int:
        got = obs_index.get(payload)
        if got is None:
            got = len(obs_payloads)
            obs_index[payload] = got
            obs_payloads.append(payload)
        return got

    def belief_obs(ymask: int) -> int:
        return g.obs(next(bits(ymask)))

    # Candidate next memories per memory-selection observation; keyed by the
    # observation payload since the candidate set depends on nothing else.
    candidate_cache: dict[ObsPayload, list[CollapsedMemory]] = {}

    def memory_candidates(ymask2: int, a: int, cm: CollapsedMemory) -> list[CollapsedMemory]:
        key = ("mem", ymask2, a, cm)
        got = candidate_cache.get(key)
        if got is not None:
            return got
        forced_w = 0
        for s in bits(cm.belief & cm.fp.win):
            forced_w |= mask_of(g.support(s, a))
        forced_w &= ymask2
        forced_r = 0
        for s in bits(cm.belief & cm.fp.rec):
            forced_r |= mask_of(g.support(s, a))
        forced_r &= ymask2
        acts2 = avail_mask[belief_obs(ymask2)]
        out = []
        for w2 in supermasks_within(forced_w, ymask2):
            for r2 in supermasks_within(forced_r, ymask2):
                for a2 in submasks(acts2):
                    if a2:
                        out.append(
                            CollapsedMemory(ymask2, MemoryFingerprint(w2, r2, a2))
                        )
        out.sort()
        candidate_cache[key] = out
        return out

    # Grouped successor beliefs per (belief, action), shared across memories.
    post_cache: dict[tuple[int, int], list[tuple[int, int]]] = {}

    def posts(ymask: int, a: int) -> list[tuple[int, int]]:
        got = post_cache.get((ymask, a))
        if got is None:
            union: dict[int, int] = {}
            for s in bits(ymask):
                for t in g.support(s, a):
                    o = g.obs(t)
                    union[o] = union.get(o, 0) | (1 << t)
            got = sorted(union.items())
            post_cache[(ymask, a)] = got
        return got

    # The losing sink: self-loops under every action; availability is filled
    # in after the walk once all memory actions are known.
    succ[(1, abort)] = (1,)
    for a in range(n_base):
        succ[(1, a)] = (1,)

    y0 = 1 << g.initial
    initial_memories = [
        CollapsedMemory(y0, MemoryFingerprint(y0, r, acts))
        for r in (0, y0)
        for acts in sorted(m for m in submasks(avail_mask[g.obs(g.initial)]) if m)
    ]
    initial_memories.sort()
    init_actions = []
    for cm in initial_memories:
        aid = intern_memory_action(cm)
        obs_act = intern_obs(("act", cm))
        target = intern_state(("act", g.initial, cm), obs_act)
        succ[(0, aid)] = (target,)
        init_actions.append(aid)
    succ[(0, abort)] = (1,)
    availability[0] = tuple(sorted(init_actions + [abort]))

    while queue:
        sid = queue.popleft()
        payload = state_payloads[sid]
        if payload[0] == "act":
            _, s, cm = payload
            o = obs_of[sid]
            if o not in availability:
                availability[o] = tuple(range(n_base))
            for a in range(n_base):
                if not enabled_action(cm, a, reward1[a]):
                    succ[(sid, a)] = (1,)
                    continue
                grouped = dict(posts(cm.belief, a))
                targets = []
                for t in g.support(s, a):
                    ymask2 = grouped[g.obs(t)]
                    obs_mem = intern_obs(("mem", ymask2, a, cm))
                    targets.append(
                        intern_state(("mem", t, ymask2, a, cm), obs_mem)
                    )
                succ[(sid, a)] = tuple(sorted(set(targets)))
        else:
            _, s2, ymask2, a, cm = payload
            o = obs_of[sid]
            if o not in availability:
                acts = [abort]
                for cm2 in memory_candidates(ymask2, a, cm):
                    acts.append(intern_memory_action(cm2))
                availability[o] = tuple(sorted(acts))
            for aid in availability[o]:
                if aid == abort:
                    succ[(sid, abort)] = (1,)
                else:
                    cm2 = memory_actions[aid - n_base - 1]
                    obs_act = intern_obs(("act", cm2))
                    succ[(sid, aid)] = (intern_state(("act", s2, cm2), obs_act),)

    all_actions = tuple(range(n_base + 1 + len(memory_actions)))
    availability[1] = all_actions
    for aid in all_actions:
        succ.setdefault((1, aid), (1,))

    return BeliefObsPomdp(
        base=g,
        rewards=rewards,
        state_payloads=state_payloads,
        obs_payloads=obs_payloads,
        obs_of=obs_of,
        succ=succ,
        availability=availability,
        memory_actions=memory_actions,
    )
