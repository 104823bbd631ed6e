"""Core model types: POMDPs, beliefs, probabilistic finite automata, rewards.

All probabilities are `fractions.Fraction`. Floats are rejected at the door:
the qualitative analyses hinge on exact support and exact reward-1 tests, and
a 0.9999999 leaking in would silently change answers. Weights may be given as
ints, Fractions, or strings like ``"1/3"``.

States, actions, and observations are ids (list indices); names live in
parallel lists and only matter for parsing and rendering.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping


class ModelError(ValueError):
    """A model, strategy, or reward function is malformed or misused."""


class StrategyError(ModelError):
    """A strategy does not fit the model it is played on."""


class CapacityError(RuntimeError):
    """A construction exceeded its state budget.

    ``stats`` carries partial progress counters (states built, edges built)
    so callers can report how far the construction got.
    """

    def __init__(self, message: str, stats: dict[str, int] | None = None):
        super().__init__(message)
        self.stats = dict(stats or {})


def _frac(value) -> Fraction:
    if isinstance(value, float):
        raise ModelError(f"float weight {value!r}; use int, Fraction, or 'p/q' strings")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    raise ModelError(f"cannot interpret {value!r} as an exact probability")


class Distr:
    """Finite distribution over ids, stored sparsely with zero weights dropped.

    Construction never checks that weights sum to 1; `check` reports problems
    instead, so broken input files can be loaded and diagnosed rather than
    crashing the loader. Treat instances as immutable.
    """

    __slots__ = ("p",)

    def __init__(self, weights: Mapping[int, object]):
        items = sorted((k, _frac(v)) for k, v in weights.items())
        self.p: dict[int, Fraction] = {k: v for k, v in items if v != 0}

    @classmethod
    def dirac(cls, k: int) -> "Distr":
        return cls({k: 1})

    @classmethod
    def uniform(cls, ks: Iterable[int]) -> "Distr":
        ks = list(ks)
        if not ks:
            raise ModelError("uniform distribution over empty set")
        w = Fraction(1, len(ks))
        return cls({k: w for k in ks})

    def support(self) -> tuple[int, ...]:
        return tuple(self.p)

    def items(self) -> list[tuple[int, Fraction]]:
        return list(self.p.items())

    def __getitem__(self, k: int) -> Fraction:
        return self.p.get(k, Fraction(0))

    def __eq__(self, other) -> bool:
        return isinstance(other, Distr) and self.p == other.p

    def __hash__(self) -> int:
        return hash(tuple(self.p.items()))

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}: {v}" for k, v in self.p.items())
        return f"Distr({{{inner}}})"

    def check(self) -> list[str]:
        """Return human-readable problems: negative weights, bad total, emptiness."""
        problems = []
        for k, v in self.p.items():
            if v < 0:
                problems.append(f"negative weight {v} at {k}")
        total = sum(self.p.values(), Fraction(0))
        if not self.p:
            problems.append("empty distribution")
        elif total != 1:
            problems.append(f"weights sum to {total}, not 1")
        return problems


class Pomdp:
    """Finite POMDP with deterministic observations and per-observation availability.

    ``rows[(s, a)]`` is the successor distribution for playing action ``a`` in
    state ``s``. ``availability`` maps an observation id to the actions its
    states may play; observations absent from the mapping allow every action.
    Observing is a function of the state alone, so availability is well
    defined per observation.
    """

    def __init__(
        self,
        states: list[str],
        actions: list[str],
        observations: list[str],
        obs_of: list[int],
        rows: Mapping[tuple[int, int], Distr],
        initial: int,
        availability: Mapping[int, Iterable[int]] | None = None,
        name: str = "",
    ):
        if len(obs_of) != len(states):
            raise ModelError(
                f"obs_of has {len(obs_of)} entries for {len(states)} states"
            )
        if not 0 <= initial < len(states):
            raise ModelError(f"initial state id {initial} out of range")
        self.states = list(states)
        self.actions = list(actions)
        self.observations = list(observations)
        self.obs_of = list(obs_of)
        self.rows = dict(rows)
        self.initial = initial
        self.name = name
        all_actions = tuple(range(len(actions)))
        avail = {o: all_actions for o in range(len(observations))}
        if availability is not None:
            for o, acts in availability.items():
                avail[o] = tuple(sorted(set(acts)))
        self.availability = avail
        by_obs: dict[int, list[int]] = {o: [] for o in range(len(observations))}
        for s, o in enumerate(self.obs_of):
            if not 0 <= o < len(observations):
                raise ModelError(f"state {states[s]!r} has observation id {o} out of range")
            by_obs[o].append(s)
        self._obs_states = {o: tuple(ss) for o, ss in by_obs.items()}

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    @property
    def n_observations(self) -> int:
        return len(self.observations)

    def obs(self, s: int) -> int:
        return self.obs_of[s]

    def obs_states(self, o: int) -> tuple[int, ...]:
        return self._obs_states[o]

    def avail(self, o: int) -> tuple[int, ...]:
        return self.availability[o]

    def row(self, s: int, a: int) -> Distr:
        try:
            return self.rows[(s, a)]
        except KeyError:
            raise ModelError(
                f"no transition row for state {self.state_name(s)!r}"
                f" and action {self.action_name(a)!r}"
            ) from None

    def support(self, s: int, a: int) -> tuple[int, ...]:
        return self.row(s, a).support()

    def state_name(self, s: int) -> str:
        return self.states[s]

    def action_name(self, a: int) -> str:
        return self.actions[a]

    def obs_name(self, o: int) -> str:
        return self.observations[o]

    def state_id(self, name: str) -> int:
        try:
            return self.states.index(name)
        except ValueError:
            raise ModelError(f"unknown state {name!r}") from None

    def action_id(self, name: str) -> int:
        try:
            return self.actions.index(name)
        except ValueError:
            raise ModelError(f"unknown action {name!r}") from None

    def obs_id(self, name: str) -> int:
        try:
            return self.observations.index(name)
        except ValueError:
            raise ModelError(f"unknown observation {name!r}") from None

    def available_pairs(self) -> Iterator[tuple[int, int]]:
        """Yield every (state, action) pair the model can actually play, sorted."""
        for s in range(self.n_states):
            for a in self.avail(self.obs(s)):
                yield s, a


def validate(g: Pomdp, require_unique_initial_obs: bool = True) -> list[str]:
    """Check model invariants, returning one message per violation.

    An empty list means the model is well formed: unique names, non-empty
    availability everywhere, exactly one proper distribution per available
    pair and none elsewhere, and (unless disabled) the initial state alone in
    its observation class. Blind single-observation models built by the
    automaton reductions fail only that last point, so consumers that accept
    them validate with ``require_unique_initial_obs=False``.
    """
    problems = []
    for kind, names in (
        ("state", g.states),
        ("action", g.actions),
        ("observation", g.observations),
    ):
        seen: set[str] = set()
        for n in names:
            if n in seen:
                problems.append(f"duplicate {kind} name {n!r}")
            seen.add(n)
    for o in range(g.n_observations):
        acts = g.avail(o)
        if not acts:
            problems.append(f"observation {g.obs_name(o)!r} has no available actions")
        for a in acts:
            if not 0 <= a < g.n_actions:
                problems.append(f"availability of {g.obs_name(o)!r} names bad action id {a}")
    available = set(g.available_pairs())
    for s, a in sorted(available):
        where = f"state {g.state_name(s)!r}, action {g.action_name(a)!r}"
        d = g.rows.get((s, a))
        if d is None:
            problems.append(f"missing transition row for {where}")
            continue
        for p in d.check():
            problems.append(f"{where}: {p}")
        for t in d.support():
            if not 0 <= t < g.n_states:
                problems.append(f"{where}: successor id {t} out of range")
    for s, a in sorted(g.rows):
        if (s, a) not in available:
            problems.append(
                f"transition row for state {g.state_name(s)!r} under"
                f" unavailable action {g.action_name(a)!r}"
            )
    if require_unique_initial_obs:
        cls = g.obs_states(g.obs(g.initial))
        if cls != (g.initial,):
            others = [g.state_name(s) for s in cls if s != g.initial]
            problems.append(
                f"initial state {g.state_name(g.initial)!r} shares its"
                f" observation with {', '.join(repr(n) for n in others)}"
            )
    return problems


@dataclass(frozen=True)
class Belief:
    """A belief support: the states consistent with the history, all sharing
    one observation."""

    support: frozenset[int]
    observation: int


def initial_belief(g: Pomdp) -> Belief:
    return Belief(frozenset((g.initial,)), g.obs(g.initial))


def belief_update(g: Pomdp, b: Belief, a: int, o: int) -> Belief | None:
    """Advance a belief by playing ``a`` and observing ``o``.

    Returns None when ``o`` cannot be observed after ``a`` from ``b``, which
    callers treat as a distinct outcome rather than an error. Playing an
    action unavailable at the belief's observation is an error.
    """
    if a not in g.avail(b.observation):
        raise ModelError(
            f"action {g.action_name(a)!r} unavailable at"
            f" observation {g.obs_name(b.observation)!r}"
        )
    post: set[int] = set()
    for s in b.support:
        post.update(g.support(s, a))
    support = frozenset(t for t in post if g.obs(t) == o)
    if not support:
        return None
    return Belief(support, o)


def successor_beliefs(g: Pomdp, b: Belief, a: int) -> dict[int, frozenset[int]]:
    """All one-step belief supports after playing ``a``, grouped by observation.

    One pass over the union support, so enumerating every observation through
    `belief_update` is never needed.
    """
    if a not in g.avail(b.observation):
        raise ModelError(
            f"action {g.action_name(a)!r} unavailable at"
            f" observation {g.obs_name(b.observation)!r}"
        )
    post: set[int] = set()
    for s in b.support:
        post.update(g.support(s, a))
    grouped: dict[int, set[int]] = {}
    for t in post:
        grouped.setdefault(g.obs(t), set()).add(t)
    return {o: frozenset(grouped[o]) for o in sorted(grouped)}


def is_belief_observation(g: Pomdp) -> tuple[bool, list[str] | None]:
    """Test whether every reachable belief is a full observation class.

    When it fails, returns a shortest witness as an alternating list of
    observation and action names ``[o0, a1, o1, ..., ak, ok]`` whose final
    belief is a strict subset of its observation class.
    """
    b0 = initial_belief(g)
    if b0.support != frozenset(g.obs_states(b0.observation)):
        return False, [g.obs_name(b0.observation)]
    parent: dict[Belief, tuple[Belief, int] | None] = {b0: None}
    queue = deque([b0])
    while queue:
        b = queue.popleft()
        for a in g.avail(b.observation):
            for o, support in successor_beliefs(g, b, a).items():
                nxt = Belief(support, o)
                if nxt in parent:
                    continue
                parent[nxt] = (b, a)
                if support != frozenset(g.obs_states(o)):
                    path: list[str] = [g.obs_name(o)]
                    cur: Belief = nxt
                    while parent[cur] is not None:
                        prev, act = parent[cur]  # type: ignore[misc]
                        path.append(g.action_name(act))
                        path.append(g.obs_name(prev.observation))
                        cur = prev
                    path.reverse()
                    return False, path
                queue.append(nxt)
    return True, None


class RewardFn:
    """Reward per (state, action) pair, exact and total on the playable pairs."""

    def __init__(self, table: Mapping[tuple[int, int], object]):
        self.table: dict[tuple[int, int], Fraction] = {
            k: _frac(v) for k, v in sorted(table.items())
        }

    @classmethod
    def from_state_rewards(cls, g: Pomdp, by_state: Mapping[int, object]) -> "RewardFn":
        """Replicate a per-state reward across every action available there."""
        table: dict[tuple[int, int], object] = {}
        for s, a in g.available_pairs():
            table[(s, a)] = by_state.get(s, 0)
        return cls(table)

    def get(self, s: int, a: int) -> Fraction:
        try:
            return self.table[(s, a)]
        except KeyError:
            raise ModelError(f"no reward for state id {s}, action id {a}") from None

    def check(self, g: Pomdp) -> list[str]:
        """Report missing entries for playable pairs and values outside [0, 1]."""
        problems = []
        for s, a in g.available_pairs():
            where = f"state {g.state_name(s)!r}, action {g.action_name(a)!r}"
            r = self.table.get((s, a))
            if r is None:
                problems.append(f"missing reward for {where}")
            elif not 0 <= r <= 1:
                problems.append(f"{where}: reward {r} outside [0, 1]")
        return problems


class Pfa:
    """Probabilistic finite automaton over a finite alphabet.

    ``rows[(q, x)]`` is the successor distribution on reading letter ``x`` in
    state ``q``; the acceptance probability of a word is the mass on final
    states after reading it from the initial state.
    """

    def __init__(
        self,
        states: list[str],
        alphabet: list[str],
        final: Iterable[int],
        initial: int,
        rows: Mapping[tuple[int, int], Distr],
        name: str = "",
    ):
        if not 0 <= initial < len(states):
            raise ModelError(f"initial state id {initial} out of range")
        self.states = list(states)
        self.alphabet = list(alphabet)
        self.final = frozenset(final)
        self.initial = initial
        self.rows = dict(rows)
        self.name = name

    @property
    def n_states(self) -> int:
        return len(self.states)

    def row(self, q: int, x: int) -> Distr:
        try:
            return self.rows[(q, x)]
        except KeyError:
            raise ModelError(
                f"no transition row for state {self.states[q]!r}"
                f" on letter {self.alphabet[x]!r}"
            ) from None

    def letter_id(self, name: str) -> int:
        try:
            return self.alphabet.index(name)
        except ValueError:
            raise ModelError(f"unknown letter {name!r}") from None


def validate_pfa(p: Pfa) -> list[str]:
    """Check automaton invariants: unique names, total rows, proper distributions."""
    problems = []
    for kind, names in (("state", p.states), ("letter", p.alphabet)):
        seen: set[str] = set()
        for n in names:
            if n in seen:
                problems.append(f"duplicate {kind} name {n!r}")
            seen.add(n)
    for q in p.final:
        if not 0 <= q < p.n_states:
            problems.append(f"final state id {q} out of range")
    for q in range(p.n_states):
        for x in range(len(p.alphabet)):
            where = f"state {p.states[q]!r}, letter {p.alphabet[x]!r}"
            d = p.rows.get((q, x))
            if d is None:
                problems.append(f"missing transition row for {where}")
                continue
            for msg in d.check():
                problems.append(f"{where}: {msg}")
            for t in d.support():
                if not 0 <= t < p.n_states:
                    problems.append(f"{where}: successor id {t} out of range")
    for q, x in sorted(p.rows):
        if not (0 <= q < p.n_states and 0 <= x < len(p.alphabet)):
            problems.append(f"transition row at out-of-range pair ({q}, {x})")
    return problems
