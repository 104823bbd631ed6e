"""Command-line front end.

Commands: solve, validate, simulate, collapse, reduce-pfa-quant,
reduce-pfa-value1, check-belief-obs, analyze-chain. Exit codes: 0 for
YES/valid, 1 for NO/invalid, 2 for input errors, 3 when a state cap is
hit. Reports go to stdout and are byte-reproducible for fixed inputs and
seeds; wall-clock time goes to stderr.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction
from pathlib import Path

from .chains import (
    almost_sure_limavg1,
    almost_sure_limavg_gt,
    bscc_mean_payoff,
    product_chain,
    recurrent_classes,
)
from .collapse import collapse, fingerprints, projection_graph
from .dot import chain_dot, projection_dot
from .fileformat import (
    emit_model,
    emit_strategy,
    parse_model,
    parse_pfa,
    parse_rewards,
    parse_strategy,
)
from .model import CapacityError, ModelError, is_belief_observation, validate
from .pfa import reduce_quantitative, reduce_value1
from .simulate import SimConfig, simulate
from .solver import decide_limavg1, validate_strategy


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _write(path: str, text: str) -> None:
    Path(path).write_text(text, encoding="utf-8")


def _load_model(args):
    g, embedded = parse_model(_read(args.model))
    g.name = Path(args.model).stem
    rewards = embedded
    if getattr(args, "rewards", None):
        rewards = parse_rewards(_read(args.rewards), g)
    return g, rewards


def _need_rewards(args):
    g, rewards = _load_model(args)
    if rewards is None:
        raise ModelError(
            "no reward section in the model file and no --rewards file given"
        )
    return g, rewards


def _load_strategy(args, g):
    return parse_strategy(_read(args.strategy), g)


def _fraction_arg(text: str) -> Fraction:
    if "/" in text:
        num, _, den = text.partition("/")
        if num.isdigit() and den.isdigit() and int(den) > 0:
            return Fraction(int(num), int(den))
    elif text.isdigit():
        return Fraction(int(text))
    raise ModelError(f"bad rational {text!r} (write p/q or p)")


def _fmt(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def cmd_solve(args) -> int:
    g, rewards = _need_rewards(args)
    report = decide_limavg1(
        g, rewards, max_states=args.max_states, trace=args.trace_fixpoints
    )
    sys.stdout.write(report.render(trace=args.trace_fixpoints))
    if report.witness is not None:
        if args.strategy_out:
            _write(args.strategy_out, emit_strategy(report.witness, g))
        if args.dot:
            mc = product_chain(g, rewards, report.witness)
            _write(args.dot, chain_dot(mc, title=g.name))
    return 0 if report.verdict == "YES" else 1


def cmd_validate(args) -> int:
    g, rewards = _load_model(args)
    if args.strategy is None:
        problems = validate(g, require_unique_initial_obs=not args.lenient)
        if rewards is not None:
            problems += rewards.check(g)
        if problems:
            for p in problems:
                print(p)
            return 1
        print("valid")
        return 0
    if rewards is None:
        raise ModelError(
            "no reward section in the model file and no --rewards file given"
        )
    sigma = _load_strategy(args, g)
    ok, diagnosis = validate_strategy(g, rewards, sigma)
    if ok:
        print("winning: long-run average reward is 1 almost surely")
        return 0
    print(f"not winning: {diagnosis.message}")
    return 1


def cmd_simulate(args) -> int:
    g, rewards = _need_rewards(args)
    sigma = _load_strategy(args, g)
    cfg = SimConfig(
        steps=args.steps, runs=args.runs, seed=args.seed, burn_in=args.burn_in
    )
    result = simulate(g, rewards, sigma, cfg)
    print(result.render())
    return 0


def cmd_collapse(args) -> int:
    g, rewards = _need_rewards(args)
    sigma = _load_strategy(args, g)
    collapsed = collapse(g, rewards, sigma)
    ok, diagnosis = validate_strategy(g, rewards, collapsed)
    print(f"memories: {sigma.n_memories} -> {collapsed.n_memories}")
    if ok:
        print("collapsed strategy is winning")
    else:
        print(f"collapsed strategy is not winning: {diagnosis.message}")
    if args.strategy_out:
        _write(args.strategy_out, emit_strategy(collapsed, g))
    if args.dot:
        pg = projection_graph(g, sigma, fingerprints(g, rewards, sigma))
        _write(args.dot, projection_dot(pg, g))
    return 0 if ok else 1


def _cmd_reduce_pfa(args, reduce_fn) -> int:
    p = parse_pfa(_read(args.automaton))
    p.name = Path(args.automaton).stem
    g, rewards = reduce_fn(p, name=p.name)
    text = emit_model(g, rewards)
    if args.out:
        _write(args.out, text)
        print(
            f"model: {g.name}\nstates: {g.n_states}\nactions: {g.n_actions}"
            f"\nobservations: {g.n_observations}\nwritten: {args.out}"
        )
    else:
        sys.stdout.write(text)
    return 0


def cmd_check_belief_obs(args) -> int:
    g, _ = _load_model(args)
    ok, witness = is_belief_observation(g)
    if ok:
        print("belief-observation: yes")
        return 0
    print("belief-observation: no")
    if witness:
        print("witness: " + " -> ".join(witness))
    return 1


def cmd_analyze_chain(args) -> int:
    # Reject a malformed threshold before any analysis output.
    lam = None if args.threshold is None else _fraction_arg(args.threshold)
    g, rewards = _need_rewards(args)
    sigma = _load_strategy(args, g)
    mc = product_chain(g, rewards, sigma)
    print(f"nodes: {mc.n_nodes}")
    classes = recurrent_classes(mc)
    reachable = set(mc.reachable())
    for k, cls in enumerate(classes):
        if not set(cls) <= reachable:
            continue
        mean = bscc_mean_payoff(mc, cls)
        members = ", ".join(mc.label_texts[i] for i in cls)
        print(f"recurrent class {k + 1}: mean={_fmt(mean)} {{{members}}}")
    if args.dot:
        _write(args.dot, chain_dot(mc, title=g.name))
    if lam is not None:
        verdict = almost_sure_limavg_gt(mc, lam)
        print(f"almost-sure average > {_fmt(lam)}: {'yes' if verdict else 'no'}")
    else:
        verdict = almost_sure_limavg1(mc)
        print(f"almost-sure average 1: {'yes' if verdict else 'no'}")
    return 0 if verdict else 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--max-states",
        type=int,
        default=250_000,
        metavar="N",
        help="cap on constructed states before giving up (exit 3)",
    )
    common.add_argument(
        "--seed", type=int, default=0, metavar="S", help="master random seed"
    )
    common.add_argument(
        "--dot", metavar="PATH", help="write a Graphviz rendering here"
    )
    common.add_argument(
        "--trace-fixpoints",
        action="store_true",
        help="include per-iteration fixpoint sizes in the report",
    )

    parser = argparse.ArgumentParser(
        prog="asmp",
        description="Almost-sure mean-payoff analysis for partially"
        " observable MDPs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "solve",
        parents=[common],
        help="decide almost-sure long-run average 1 and synthesize a witness",
    )
    p.add_argument("model", help="model file (reward section or --rewards)")
    p.add_argument("--rewards", metavar="PATH", help="standalone reward file")
    p.add_argument(
        "--strategy-out", metavar="PATH", help="write the witness strategy here"
    )
    p.set_defaults(handler=cmd_solve)

    p = sub.add_parser(
        "validate",
        parents=[common],
        help="check a model file, or a strategy against a model",
    )
    p.add_argument("model")
    p.add_argument("--rewards", metavar="PATH")
    p.add_argument("--strategy", metavar="PATH")
    p.add_argument(
        "--lenient",
        action="store_true",
        help="allow the initial state to share its observation",
    )
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser(
        "simulate", parents=[common], help="Monte-Carlo estimate of the average reward"
    )
    p.add_argument("model")
    p.add_argument("--strategy", metavar="PATH", required=True)
    p.add_argument("--rewards", metavar="PATH")
    p.add_argument("--steps", type=int, default=10_000)
    p.add_argument("--runs", type=int, default=100)
    p.add_argument("--burn-in", type=int, default=None)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser(
        "collapse",
        parents=[common],
        help="project a strategy onto belief-supported memories",
    )
    p.add_argument("model")
    p.add_argument("--strategy", metavar="PATH", required=True)
    p.add_argument("--rewards", metavar="PATH")
    p.add_argument(
        "--strategy-out", metavar="PATH", help="write the collapsed strategy here"
    )
    p.set_defaults(handler=cmd_collapse)

    p = sub.add_parser(
        "reduce-pfa-quant",
        parents=[common],
        help="word acceptance above 1/2 as a long-run average above 1/2",
    )
    p.add_argument("automaton")
    p.add_argument("--out", metavar="PATH", help="write the model file here")
    p.set_defaults(handler=lambda a: _cmd_reduce_pfa(a, reduce_quantitative))

    p = sub.add_parser(
        "reduce-pfa-value1",
        parents=[common],
        help="acceptance arbitrarily close to 1 as almost-sure average 1",
    )
    p.add_argument("automaton")
    p.add_argument("--out", metavar="PATH", help="write the model file here")
    p.set_defaults(handler=lambda a: _cmd_reduce_pfa(a, reduce_value1))

    p = sub.add_parser(
        "check-belief-obs",
        parents=[common],
        help="test whether belief supports stay inside observation classes",
    )
    p.add_argument("model")
    p.set_defaults(handler=cmd_check_belief_obs)

    p = sub.add_parser(
        "analyze-chain",
        parents=[common],
        help="recurrent classes and exact mean payoffs of a played strategy",
    )
    p.add_argument("model")
    p.add_argument("--strategy", metavar="PATH", required=True)
    p.add_argument("--rewards", metavar="PATH")
    p.add_argument(
        "--threshold",
        metavar="p/q",
        help="check average > p/q instead of average = 1",
    )
    p.set_defaults(handler=cmd_analyze_chain)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    t0 = time.perf_counter()
    try:
        return args.handler(args)
    except CapacityError as e:
        print(f"capacity: {e}", file=sys.stderr)
        return 3
    except (ModelError, OSError) as e:
        print(f"input error: {e}", file=sys.stderr)
        return 2
    finally:
        print(f"wall {time.perf_counter() - t0:.3f}s", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
