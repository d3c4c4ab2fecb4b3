"""Command-line interface.

Exit codes: 0 success, 1 verification failure (or no plan), 2 usage or input
error, 3 recovery failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .codec import CodewordArray, DataBlock, ErasurePattern, decode, decode_rowwise, encode
from .construct import build_layout, code_to_dict, design_code, load_code
from .errors import ArrayCodeError, DecodeError
from .field import Matrix, PrimeField
from .graph import analyze_graph, find_plan, load_graph
from .netsim import NetworkConfig, readings_from_values, simulate
from .verify import verify_code

EXIT_OK, EXIT_VERIFY, EXIT_USAGE, EXIT_RECOVERY = 0, 1, 2, 3

class UsageError(Exception):
    pass


def _emit(doc: dict, out: str | None):
    text = json.dumps(doc, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _read_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: not valid JSON ({exc})") from exc


def _parse_nodes(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"--failed expects comma-separated node indices, got {text!r}") from exc


def cmd_design(args) -> int:
    a_tilde = None
    if args.a_tilde:
        q = args.field
        if q is None:
            raise UsageError("--a-tilde needs --field")
        a_tilde = Matrix(json.loads(args.a_tilde), PrimeField(q))
    gen = design_code(args.nodes, args.failures, args.field, a_tilde)
    _emit(code_to_dict(gen), args.out)
    if args.figure:
        from .report import plot_generator, plot_layout
        stem = Path(args.figure)
        plot_layout(build_layout(gen.params), stem.with_name(stem.stem + "_layout" + stem.suffix))
        plot_generator(gen, stem)
    return EXIT_OK


def cmd_encode(args) -> int:
    gen = load_code(args.code)
    data = DataBlock.from_dict(_read_json(args.data), gen.params)
    cw = encode(gen, build_layout(gen.params), data)
    _emit(cw.to_dict(), args.out)
    return EXIT_OK


def cmd_decode(args) -> int:
    gen = load_code(args.code)
    cw = CodewordArray.from_dict(_read_json(args.codeword))
    failed = _parse_nodes(args.failed) if args.failed is not None else sorted(cw.erased)
    cw = cw.erase(failed)
    pattern = ErasurePattern.of(gen.params.n, failed)
    layout = build_layout(gen.params)
    if args.rowwise:
        data = decode_rowwise(gen.a_tilde, layout, cw, pattern)
    else:
        data = decode(gen, layout, cw, pattern)
    _emit(data.to_dict(), args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    gen = load_code(args.code)
    report = verify_code(gen, budget=args.budget, sample=args.sample, workers=args.workers, seed=args.seed)
    _emit(report.to_dict(), args.out)
    if args.figure:
        from .report import plot_generator
        plot_generator(gen, args.figure)
    return EXIT_OK if report.ok else EXIT_VERIFY


def _code_choice(args, g):
    """``(a_tilde, q)`` from ``--code`` if given, else the defaults."""
    if not args.code:
        return None, None
    gen = load_code(args.code)
    if gen.params.n != g.n or gen.params.r != args.failures:
        raise UsageError(f"code is [{gen.params.n}, {gen.params.k}] but the graph has {g.n} nodes "
                         f"and --failures is {args.failures}")
    return gen.a_tilde, gen.params.q


def cmd_graph_check(args) -> int:
    g = load_graph(args.graph)
    a_tilde, q = _code_choice(args, g)
    result = analyze_graph(g, args.failures, a_tilde, q, budget=args.budget)
    _emit(result, args.out)
    if args.figure:
        from .report import plot_topology
        plan = find_plan(g, args.failures, a_tilde, q, args.budget) if result["status"] == "plan" else None
        plot_topology(g, args.figure, plan=plan, witness=result.get("witness"))
    return EXIT_OK if result["status"] == "plan" else EXIT_VERIFY


def cmd_simulate(args) -> int:
    g = load_graph(args.graph)
    a_tilde, q = _code_choice(args, g)
    plan = find_plan(g, args.failures, a_tilde, q)
    if plan is None:
        print(f"no lowest-density code plan for this topology with r={args.failures}", file=sys.stderr)
        return EXIT_VERIFY
    config = NetworkConfig(plan.code.params, g, plan, rng_seed=args.seed, rounds=args.rounds,
                           fail_prob=args.fail_prob, max_failures=args.max_failures)
    readings = None
    if args.data_file:
        readings = readings_from_values(plan.code.params, _read_json(args.data_file))
    report = simulate(config, readings)
    _emit(report.to_dict(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ldmds", description="Lowest-density MDS array codes for n-node networks.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("design", help="derive parameters and a generator, print the code spec")
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--failures", type=int, required=True)
    p.add_argument("--field", type=int, help="prime field size (default: smallest prime >= nodes)")
    p.add_argument("--a-tilde", help="JSON k x r matrix to use instead of the Cauchy default")
    p.add_argument("--out")
    p.add_argument("--figure", help="write A's nonzero pattern here (and the layout next to it)")
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("encode", help="encode an m x n data grid into the storage array")
    p.add_argument("--code", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="recover all data from the surviving columns")
    p.add_argument("--code", required=True)
    p.add_argument("--codeword", required=True)
    p.add_argument("--failed", help="comma-separated failed nodes (default: null columns)")
    p.add_argument("--rowwise", action="store_true", help="decode row by row instead of the block system")
    p.add_argument("--out")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("verify", help="check the MDS and lowest-density properties")
    p.add_argument("--code", required=True)
    p.add_argument("--sample", type=int, help="check K random failure sets instead of all of them")
    p.add_argument("--budget", type=int, default=10**6)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--figure")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("graph-check", help="find a code plan for a topology or prove none exists")
    p.add_argument("--graph", required=True)
    p.add_argument("--failures", type=int, required=True)
    p.add_argument("--code", help="use this code spec's a_tilde and field")
    p.add_argument("--budget", type=int, default=2_000_000)
    p.add_argument("--out")
    p.add_argument("--figure")
    p.set_defaults(func=cmd_graph_check)

    p = sub.add_parser("simulate", help="run the smart-meter network simulation")
    p.add_argument("--graph", required=True)
    p.add_argument("--failures", type=int, required=True)
    p.add_argument("--rounds", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--fail-prob", type=float, default=0.0)
    p.add_argument("--max-failures", type=int, help="cap on simultaneous failures per round")
    p.add_argument("--code", help="code spec to deploy (default: canonical construction)")
    p.add_argument("--data-file", help="JSON list of integer readings, reduced mod q")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except DecodeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RECOVERY
    except (UsageError, ArrayCodeError, ValueError, KeyError, TypeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
