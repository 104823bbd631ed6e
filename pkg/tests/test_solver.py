"""End-to-end decision procedure: verdicts, witnesses, diagnoses, bridges.

The pipeline numbers asserted here (reduction sizes, fixpoint iterate
lengths, witness memory counts) were produced once by the implementation,
cross-checked against the fixpoint oracles in test_fixpoint, and frozen.
A change in any of them means the construction changed, not just an
internal detail.
"""

from fractions import Fraction

import pytest

from asmp import (
    Distr,
    FiniteMemoryStrategy,
    MemorylessStrategy,
    ModelError,
    RewardFn,
    StrategyError,
    almost_sure_limavg1,
    alternating_strategy,
    collapse,
    constant_strategy,
    decide_limavg1,
    finite_memory_to_memoryless,
    memoryless_chain,
    memoryless_to_finite_memory,
    product_chain,
    reduce_pomdp,
    uniform_strategy,
    validate_strategy,
)
from asmp.collapse import CollapsedMemory
from asmp.gadgets import ring_pomdp, trap_ring_pomdp, unavoidable_zero_pomdp


class TestVerdicts:
    def test_ring_is_yes_with_frozen_pipeline_numbers(self):
        g, r = ring_pomdp()
        report = decide_limavg1(g, r)
        assert report.verdict == "YES"
        assert report.reason == "the initial observation is almost-sure winning"
        assert report.reduction_stats == {
            "states": 1592,
            "observations": 272,
            "rows": 30964,
            "memory_actions": 198,
        }
        assert report.safety_sizes == [271, 127, 75, 39]
        assert report.y_star_size == 39
        assert report.wcs_size == 16
        assert report.z_star_size == 39
        assert report.witness is not None
        assert report.witness.n_memories == 16
        assert report.validated is True

    def test_trap_ring_is_yes(self):
        g, r = trap_ring_pomdp()
        report = decide_limavg1(g, r)
        assert report.verdict == "YES"
        assert report.reduction_stats == {
            "states": 3030,
            "observations": 730,
            "rows": 56126,
            "memory_actions": 204,
        }
        assert report.y_star_size == 110
        assert report.wcs_size == 16
        assert report.z_star_size == 110
        assert report.witness.n_memories == 19
        assert report.validated is True

    def test_unavoidable_zero_is_no_at_the_reach_stage(self):
        g, r = unavoidable_zero_pomdp()
        report = decide_limavg1(g, r)
        assert report.verdict == "NO"
        assert report.reason == (
            "the initial observation cannot almost-surely reach the"
            " winning-recurrent core"
        )
        # Wandering with empty recurrence commitments always dodges the
        # sink, so the refusal shows up as an empty target, never as an
        # unsafe initial observation.
        assert report.y_star_size == 15
        assert report.n_observations == 36
        assert report.wcs_size == 0
        assert report.z_star_size == 0
        assert report.witness is None
        assert report.validated is None

    def test_yes_witness_survives_independent_validation(self):
        g, r = ring_pomdp()
        report = decide_limavg1(g, r)
        ok, diag = validate_strategy(g, r, report.witness)
        assert ok and diag is None
        assert almost_sure_limavg1(product_chain(g, r, report.witness))
        # Start memory is synthetic; every later memory is a collapsed one.
        assert report.witness.memories[0] == "init"
        assert all(
            isinstance(m, CollapsedMemory) for m in report.witness.memories[1:]
        )

    def test_incomplete_rewards_are_rejected_up_front(self):
        g, _ = ring_pomdp()
        with pytest.raises(ModelError, match="missing reward"):
            decide_limavg1(g, RewardFn({(0, 0): Fraction(1)}))


class TestValidateStrategy:
    def test_accepts_the_alternating_witness(self):
        g, r = ring_pomdp()
        ok, diag = validate_strategy(g, r, alternating_strategy(g, 0, 1))
        assert ok and diag is None

    def test_rejects_constant_play_with_a_recurrent_class_diagnosis(self):
        g, r = ring_pomdp()
        ok, diag = validate_strategy(g, r, constant_strategy(g, 0))
        assert not ok
        assert diag.kind == "recurrent-class"
        labels = {lab.split("·")[0] for lab in diag.class_labels}
        assert labels == {"X", "X'", "Y", "Y'", "Z", "Z'"}
        node, action = diag.pair
        assert action == "a"
        assert node.split("·")[0] in {"Y", "Y'"}
        assert diag.message.startswith("recurrent class {")
        assert diag.message.endswith("for reward below 1")

    def test_rejects_uniform_memoryless_play(self):
        g, r = ring_pomdp()
        ok, diag = validate_strategy(g, r, uniform_strategy(g))
        assert not ok
        assert diag.kind == "recurrent-class"
        # Memoryless chains label nodes by state name alone.
        assert set(diag.class_labels) == {"X", "X'", "Y", "Y'", "Z", "Z'"}

    def test_illegal_moves_come_back_as_play_diagnoses(self):
        g, r = ring_pomdp()
        sigma = alternating_strategy(g, 0, 1)
        u = g.observations.index("u")
        gaps = dict(sigma.update)
        for a in (0, 1):
            gaps.pop((0, u, a), None)
            gaps.pop((1, u, a), None)
        broken = FiniteMemoryStrategy(
            memories=list(sigma.memories),
            next_action=list(sigma.next_action),
            update=gaps,
            initial=sigma.initial,
        )
        ok, diag = validate_strategy(g, r, broken)
        assert not ok
        assert diag.kind == "play"
        assert "update" in diag.message
        assert diag.class_labels == ()
        assert diag.pair is None


class TestReportRendering:
    def test_equal_inputs_render_byte_equal(self):
        g, r = ring_pomdp()
        first = decide_limavg1(g, r).render(trace=True)
        second = decide_limavg1(g, r).render(trace=True)
        assert first == second
        assert first.endswith("\n")

    def test_wall_time_stays_out_of_the_text(self):
        g, r = ring_pomdp()
        report = decide_limavg1(g, r)
        text = report.render(trace=True)
        assert "wall" not in text
        assert report.stats["wall_s"] > 0

    def test_yes_text_carries_the_witness_line(self):
        g, r = ring_pomdp()
        text = decide_limavg1(g, r).render()
        assert text.splitlines()[0] == "verdict: YES"
        assert "witness: finite-memory strategy with 16 memories (validated)" in text

    def test_no_text_has_no_witness_line_and_no_trace_by_default(self):
        g, r = unavoidable_zero_pomdp()
        text = decide_limavg1(g, r).render()
        assert text.splitlines()[0] == "verdict: NO"
        assert "witness" not in text
        assert "trace" not in text


class TestStrategyBridges:
    def test_collapsed_winner_projects_to_a_winning_reduction_strategy(self):
        g, r = ring_pomdp()
        bg = reduce_pomdp(g, r)
        collapsed = collapse(g, r, alternating_strategy(g, 0, 1))
        ml = finite_memory_to_memoryless(bg, collapsed)
        assert almost_sure_limavg1(memoryless_chain(bg, bg.reward_fn(), ml))

    def test_collapsed_loser_projects_to_a_losing_reduction_strategy(self):
        g, r = ring_pomdp()
        bg = reduce_pomdp(g, r)
        collapsed = collapse(g, r, constant_strategy(g, 0))
        ml = finite_memory_to_memoryless(bg, collapsed)
        assert not almost_sure_limavg1(memoryless_chain(bg, bg.reward_fn(), ml))

    def test_projection_and_unfolding_agree_on_the_verdict(self):
        g, r = ring_pomdp()
        bg = reduce_pomdp(g, r)
        collapsed = collapse(g, r, alternating_strategy(g, 0, 1))
        back = memoryless_to_finite_memory(
            bg, finite_memory_to_memoryless(bg, collapsed)
        )
        ok, diag = validate_strategy(g, r, back)
        assert ok, diag

    def test_unfolding_requires_a_memory_opening(self):
        g, r = ring_pomdp()
        bg = reduce_pomdp(g, r)
        init_obs = bg.obs(bg.initial)
        for bad in (bg.abort_action, 0):
            sigma = MemorylessStrategy({init_obs: Distr.dirac(bad)})
            with pytest.raises(StrategyError, match="open with a memory action"):
                memoryless_to_finite_memory(bg, sigma)

    def test_projection_requires_collapsed_memory_labels(self):
        g, r = ring_pomdp()
        bg = reduce_pomdp(g, r)
        with pytest.raises(StrategyError, match="collapse it first"):
            finite_memory_to_memoryless(bg, alternating_strategy(g, 0, 1))

    def test_projection_rejects_colliding_memories_with_different_rows(self):
        g, r = ring_pomdp()
        bg = reduce_pomdp(g, r)
        collapsed = collapse(g, r, alternating_strategy(g, 0, 1))
        label = collapsed.memories[0]
        twins = FiniteMemoryStrategy(
            memories=[label, label],
            next_action=[Distr.dirac(0), Distr.dirac(1)],
            update={},
            initial=0,
        )
        with pytest.raises(StrategyError, match="conflicting rows"):
            finite_memory_to_memoryless(bg, twins)

    def test_projection_tolerates_redundant_copies_with_equal_rows(self):
        g, r = ring_pomdp()
        bg = reduce_pomdp(g, r)
        collapsed = collapse(g, r, alternating_strategy(g, 0, 1))
        copy = len(collapsed.memories)
        update = dict(collapsed.update)
        for (m, o, a), row in collapsed.update.items():
            if m == 0:
                update[(copy, o, a)] = row
        doubled = FiniteMemoryStrategy(
            memories=list(collapsed.memories) + [collapsed.memories[0]],
            next_action=list(collapsed.next_action)
            + [collapsed.next_action[0]],
            update=update,
            initial=collapsed.initial,
        )
        ml_a = finite_memory_to_memoryless(bg, collapsed)
        ml_b = finite_memory_to_memoryless(bg, doubled)
        assert ml_a.choice == ml_b.choice
