"""Embed probabilistic finite automata into long-run average POMDPs.

Two blind constructions (single observation, rewards on states):

``reduce_quantitative`` splits every automaton state into a rewarded and an
unrewarded copy, so each simulated letter costs exactly one 1 and one 0.
A word accepted with probability above one half yields a periodic strategy
whose long-run average beats one half, and conversely; the check pair of
actions ends a round through ``good``/``bad`` and restarts.

``reduce_value1`` keeps the automaton's states and adds a rewarded check
loop: words accepted with probability arbitrarily close to one let ever
longer check runs push the long-run average to one. Acceptance with
probability exactly one gives a strategy whose average is 1 only in the
limit of growing check runs; any fixed run length yields a rational mean
below one.

The new actions are named ``adv`` (advance a simulation step) and ``chk``
(probe finality); the losing sink that catches every out-of-turn action is
a real state here, since availability is shared observation-wide.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from .chains import FiniteMemoryStrategy
from .model import Distr, ModelError, Pfa, Pomdp, RewardFn

ADVANCE = "adv"
CHECK = "chk"


def acceptance_probability(p: Pfa, word: Sequence[str]) -> Fraction:
    """Mass on final states after reading ``word`` from the initial state."""
    v: dict[int, Fraction] = {p.initial: Fraction(1)}
    for letter in word:
        x = p.letter_id(letter)
        nxt: dict[int, Fraction] = {}
        for q, w in v.items():
            for q2, pr in p.row(q, x).items():
                nxt[q2] = nxt.get(q2, Fraction(0)) + w * pr
        v = nxt
    return sum((w for q, w in v.items() if q in p.final), Fraction(0))


def _fresh_names(p: Pfa) -> None:
    clash = {ADVANCE, CHECK} & set(p.alphabet)
    if clash:
        raise ModelError(
            f"alphabet letters {sorted(clash)} collide with the new actions"
        )


def reduce_quantitative(p: Pfa, name: str = "") -> tuple[Pomdp, RewardFn]:
    """Per-letter split construction: average above 1/2 iff some word is
    accepted with probability above 1/2."""
    _fresh_names(p)
    states: list[str] = []
    for q in p.states:
        states.append(f"{q}_1")
        states.append(f"{q}_0")
    good = len(states)
    bad = good + 1
    sink = good + 2
    states += ["good", "bad", "sink"]
    actions = list(p.alphabet) + [ADVANCE, CHECK]
    adv = len(p.alphabet)
    chk = adv + 1

    def hi(q: int) -> int:
        return 2 * q

    def lo(q: int) -> int:
        return 2 * q + 1

    rows: dict[tuple[int, int], Distr] = {}
    for q in range(p.n_states):
        for a in range(len(actions)):
            rows[(hi(q), a)] = Distr.dirac(lo(q) if a == adv else sink)
        for x in range(len(p.alphabet)):
            rows[(lo(q), x)] = Distr(
                {hi(q2): pr for q2, pr in p.row(q, x).items()}
            )
        rows[(lo(q), adv)] = Distr.dirac(sink)
        rows[(lo(q), chk)] = Distr.dirac(good if q in p.final else bad)
    for extra in (good, bad):
        for a in range(len(actions)):
            rows[(extra, a)] = Distr.dirac(hi(p.initial) if a == chk else sink)
    for a in range(len(actions)):
        rows[(sink, a)] = Distr.dirac(sink)

    g = Pomdp(
        states=states,
        actions=actions,
        observations=["o"],
        obs_of=[0] * len(states),
        rows=rows,
        initial=hi(p.initial),
        availability={0: tuple(range(len(actions)))},
        name=name or (f"{p.name}-halves" if p.name else "halves"),
    )
    by_state = {hi(q): 1 for q in range(p.n_states)}
    by_state[good] = 1
    return g, RewardFn.from_state_rewards(g, by_state)


def reduce_value1(p: Pfa, name: str = "") -> tuple[Pomdp, RewardFn]:
    """Check-loop construction: almost-sure average 1 with enough memory iff
    the automaton's acceptance probabilities have limit 1."""
    _fresh_names(p)
    states = list(p.states) + ["good", "bad", "sink"]
    good = p.n_states
    bad = good + 1
    sink = good + 2
    actions = list(p.alphabet) + [ADVANCE, CHECK]
    adv = len(p.alphabet)
    chk = adv + 1

    rows: dict[tuple[int, int], Distr] = {}
    for q in range(p.n_states):
        for x in range(len(p.alphabet)):
            rows[(q, x)] = p.row(q, x)
        rows[(q, adv)] = Distr.dirac(good if q in p.final else bad)
        rows[(q, chk)] = Distr.dirac(sink)
    for extra in (good, bad):
        for x in range(len(p.alphabet)):
            rows[(extra, x)] = Distr.dirac(sink)
        rows[(extra, adv)] = Distr.dirac(p.initial)
        rows[(extra, chk)] = Distr.dirac(extra)
    for a in range(len(actions)):
        rows[(sink, a)] = Distr.dirac(sink)

    g = Pomdp(
        states=states,
        actions=actions,
        observations=["o"],
        obs_of=[0] * len(states),
        rows=rows,
        initial=p.initial,
        availability={0: tuple(range(len(actions)))},
        name=name or (f"{p.name}-limit" if p.name else "limit"),
    )
    return g, RewardFn.from_state_rewards(g, {good: 1})


def word_strategy(
    g: Pomdp, prefix: Sequence[str], cycle: Sequence[str]
) -> FiniteMemoryStrategy:
    """Play a fixed action sequence then repeat a cycle, blind to
    observations. Memories are positions in the sequence."""
    if not cycle:
        raise ModelError("cycle must be non-empty")
    seq = list(prefix) + list(cycle)
    ids = [g.action_id(a) for a in seq]
    update: dict[tuple[int, int, int], Distr] = {}
    for m, aid in enumerate(ids):
        nxt = m + 1
        if nxt == len(seq):
            nxt = len(prefix)
        for o in range(g.n_observations):
            update[(m, o, aid)] = Distr.dirac(nxt)
    return FiniteMemoryStrategy(
        memories=[f"step{m}:{a}" for m, a in enumerate(seq)],
        next_action=[Distr.dirac(aid) for aid in ids],
        update=update,
        initial=0,
    )


def interleaved_word_strategy(g: Pomdp, word: Sequence[str]) -> FiniteMemoryStrategy:
    """Periodic round for the per-letter split model: advance before every
    letter and once more before the check pair. One round earns one extra 1
    exactly when the word lands in a final state."""
    cycle: list[str] = []
    for letter in word:
        cycle += [ADVANCE, letter]
    cycle += [ADVANCE, CHECK, CHECK]
    return word_strategy(g, [], cycle)


def check_loop_strategy(
    g: Pomdp, word: Sequence[str], checks: int
) -> FiniteMemoryStrategy:
    """Periodic round for the check-loop model: read the word, advance, stay
    ``checks`` steps in the verdict state, advance back."""
    if checks < 1:
        raise ModelError("checks must be positive")
    cycle = list(word) + [ADVANCE] + [CHECK] * checks + [ADVANCE]
    return word_strategy(g, [], cycle)
