"""Worked instances: the two ring POMDPs, small hardness gadgets, tiny automata.

These are the models the test suite and the demos revolve around. Each
builder returns a fresh (model, rewards) pair; nothing is cached or shared.
"""

from __future__ import annotations

from .model import Distr, Pfa, Pomdp, RewardFn

_RING = ["s0", "X", "X'", "Y", "Y'", "Z", "Z'"]


def _ring_rows(ids: dict[str, int], a: int, b: int) -> dict[tuple[int, int], Distr]:
    s = ids
    u = [s[n] for n in ("X", "X'", "Y", "Y'", "Z", "Z'")]
    rows: dict[tuple[int, int], Distr] = {
        (s["s0"], a): Distr.uniform(u),
        (s["s0"], b): Distr.uniform(u),
        (s["X"], a): Distr.dirac(s["X'"]),
        (s["X"], b): Distr.dirac(s["Y"]),
        (s["X'"], a): Distr.dirac(s["Y'"]),
        (s["X'"], b): Distr.dirac(s["X"]),
        (s["Z"], a): Distr.dirac(s["Y"]),
        (s["Z"], b): Distr.dirac(s["Z'"]),
        (s["Z'"], a): Distr.dirac(s["Z"]),
        (s["Z'"], b): Distr.dirac(s["Y'"]),
    }
    for act in (a, b):
        rows[(s["Y"], act)] = Distr.uniform([s["X"], s["Z"]])
        rows[(s["Y'"], act)] = Distr.uniform([s["X'"], s["Z'"]])
    return rows


def ring_pomdp() -> tuple[Pomdp, RewardFn]:
    """Two interleaved deterministic rings behind one observation.

    The initial state scatters uniformly over the six ring states, which all
    look alike. Reward 1 everywhere except the two crossing states. No
    strategy that looks only at the (constant) belief wins: it must keep all
    six states synchronized, which takes alternation, not observation.
    """
    ids = {n: i for i, n in enumerate(_RING)}
    g = Pomdp(
        states=_RING,
        actions=["a", "b"],
        observations=["start", "u"],
        obs_of=[0] + [1] * 6,
        rows=_ring_rows(ids, 0, 1),
        initial=ids["s0"],
        name="ring",
    )
    by_state = {ids[n]: 1 for n in ("s0", "X", "X'", "Z", "Z'")}
    return g, RewardFn.from_state_rewards(g, by_state)


def ring_pomdp_with_orphan() -> tuple[Pomdp, RewardFn]:
    """The ring plus one unreachable state sharing the ring observation.

    Reachable beliefs never contain the orphan, so the belief after one step
    is a strict subset of its observation class: the belief-observation check
    must fail here with a one-step witness.
    """
    names = _RING + ["Q"]
    ids = {n: i for i, n in enumerate(names)}
    rows = _ring_rows(ids, 0, 1)
    rows[(ids["Q"], 0)] = Distr.dirac(ids["Q"])
    rows[(ids["Q"], 1)] = Distr.dirac(ids["Q"])
    g = Pomdp(
        states=names,
        actions=["a", "b"],
        observations=["start", "u"],
        obs_of=[0] + [1] * 7,
        rows=rows,
        initial=ids["s0"],
        name="ring-orphan",
    )
    by_state = {ids[n]: 1 for n in ("s0", "X", "X'", "Z", "Z'", "Q")}
    return g, RewardFn.from_state_rewards(g, by_state)


def trap_ring_pomdp() -> tuple[Pomdp, RewardFn]:
    """The ring with an observable trap state fed by the crossing states.

    Both crossing states gain a 1/3 branch into the trap, the trap scatters
    back over the ring, and rewards become observation-based: 1 on the whole
    ring observation, 0 on the trap. Belief-based strategies keep the trap
    recurrent; alternation leaves it transient.
    """
    names = _RING + ["B"]
    ids = {n: i for i, n in enumerate(names)}
    rows = _ring_rows(ids, 0, 1)
    u = [ids[n] for n in ("X", "X'", "Y", "Y'", "Z", "Z'")]
    for act in (0, 1):
        rows[(ids["Y"], act)] = Distr.uniform([ids["X"], ids["Z"], ids["B"]])
        rows[(ids["Y'"], act)] = Distr.uniform([ids["X'"], ids["Z'"], ids["B"]])
        rows[(ids["B"], act)] = Distr.uniform(u)
    g = Pomdp(
        states=names,
        actions=["a", "b"],
        observations=["start", "u", "b"],
        obs_of=[0] + [1] * 6 + [2],
        rows=rows,
        initial=ids["s0"],
        name="trap-ring",
    )
    by_state = {ids[n]: 1 for n in ("s0", "X", "X'", "Y", "Y'", "Z", "Z'")}
    return g, RewardFn.from_state_rewards(g, by_state)


def unavoidable_zero_pomdp() -> tuple[Pomdp, RewardFn]:
    """Blind two-state coin flip where one side pays nothing.

    Every action from either hidden state scatters uniformly over both, so
    every strategy's recurrent class plays a reward-0 pair: a NO instance
    with the smallest possible certificate.
    """
    names = ["s0", "p", "q"]
    rows: dict[tuple[int, int], Distr] = {}
    for act in (0, 1):
        for s in range(3):
            rows[(s, act)] = Distr.uniform([1, 2])
    g = Pomdp(
        states=names,
        actions=["a", "b"],
        observations=["start", "pq"],
        obs_of=[0, 1, 1],
        rows=rows,
        initial=0,
        name="unavoidable-zero",
    )
    return g, RewardFn.from_state_rewards(g, {0: 1, 1: 1})


def two_state_pfa() -> Pfa:
    """Automaton accepting exactly the words a·b*: one step to the final
    state, then self-loops. A rejected letter falls into a dead state."""
    rows = {
        (0, 0): Distr.dirac(1),
        (0, 1): Distr.dirac(2),
        (1, 0): Distr.dirac(2),
        (1, 1): Distr.dirac(1),
        (2, 0): Distr.dirac(2),
        (2, 1): Distr.dirac(2),
    }
    return Pfa(
        states=["q0", "q1", "dead"],
        alphabet=["a", "b"],
        final=[1],
        initial=0,
        rows=rows,
        name="a-then-b-star",
    )


def accepting_start_pfa() -> Pfa:
    """One-state automaton whose initial state is final: every word, including
    the empty one, is accepted with probability 1."""
    return Pfa(
        states=["q0"],
        alphabet=["a"],
        final=[0],
        initial=0,
        rows={(0, 0): Distr.dirac(0)},
        name="always-accepting",
    )
