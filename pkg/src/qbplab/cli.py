"""Command-line driver: graph tools, protocol checks, experiments and the acceptance suite."""

from __future__ import annotations

import argparse
import csv
import io
import sys
from pathlib import Path

from . import acceptance, experiments
from .bridge import DecompositionError, bridge_check, pair_vars
from .builders import build_disj_obdd, build_mws_qbp, random_regular_qrobp
from .functions import FUNCTIONS
from .graph import StructureError, classify, validate
from .io import ParseError, load_file, save, to_dot
from .protocols import (
    and_information_check,
    build_xor_protocol,
    classical_copy_and,
    random_and_protocol,
    xor_zero_information_check,
)
from .sim import run, verify_function


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def fmt_sci(x: float) -> str:
    mant, exp = f"{float(x):.1e}".split("e")
    return f"{mant}e{int(exp)}"


def _bits(text: str, length: int | None = None) -> tuple[int, ...]:
    if not text or set(text) - {"0", "1"}:
        raise UsageError(f"not a bit string: {text!r}")
    if length is not None and len(text) != length:
        raise UsageError(f"expected {length} bits, got {len(text)}")
    return tuple(int(c) for c in text)


def _emit(args, text: str) -> None:
    if getattr(args, "output", None):
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


# -- subcommands -----------------------------------------------------------------------------------


def cmd_validate(args) -> int:
    rep = validate(load_file(args.graph), args.tol)
    lines = [f"well_formed={str(rep.well_formed).lower()} unidirectional={str(rep.unidirectional).lower()}"]
    lines += [f"violation {v}" for v in rep.violations + rep.unidirectional_violations]
    _emit(args, "\n".join(lines) + "\n")
    return 0 if rep.ok else 1


def cmd_classify(args) -> int:
    info = classify(load_file(args.graph))
    order = "none" if info.obdd_order is None else ",".join(map(str, info.obdd_order))
    _emit(
        args,
        f"leveled={str(info.leveled).lower()} read_once={str(info.read_once).lower()} "
        f"regular_read_once={str(info.regular_read_once).lower()} obdd_order={order} "
        f"reversible_classical={str(info.reversible_classical).lower()} width={info.width}\n",
    )
    return 0


def cmd_run(args) -> int:
    g = load_file(args.graph)
    out = run(g, _bits(args.input, g.num_vars))
    _emit(args, f"p0={fmt(out.p0)} p1={fmt(out.p1)} residual={fmt(out.residual)}\n")
    return 0


def cmd_verify(args) -> int:
    g = load_file(args.graph)
    if args.function not in FUNCTIONS:
        raise UsageError(f"unknown function {args.function!r}; choose from {', '.join(FUNCTIONS)}")
    rep = verify_function(g, FUNCTIONS[args.function], epsilon=args.epsilon, tol=args.tol, jobs=args.jobs)
    status = "PASS" if rep.passed else "FAIL"
    worst = "".join(map(str, rep.worst_input))
    _emit(args, f"{status} worst_error={fmt_sci(rep.worst_error)} worst_input={worst}\n")
    return 0 if rep.passed else 1


def cmd_build(args) -> int:
    if args.family == "mws":
        g = build_mws_qbp(args.n, strict=args.strict)
    elif args.family == "disj":
        g = build_disj_obdd(args.n)
    else:
        g = random_regular_qrobp(args.n, args.width, args.seed)
    data = to_dot(g) if args.format == "dot" else save(g).decode()
    _emit(args, data if data.endswith("\n") else data + "\n")
    return 0


def _protocol(spec: str):
    if spec == "xor":
        return build_xor_protocol()
    if spec == "and-classical":
        return classical_copy_and()
    if spec.startswith("random:"):
        try:
            return random_and_protocol(int(spec.split(":", 1)[1]))
        except ValueError as exc:
            raise UsageError(f"bad seed in {spec!r}") from exc
    raise UsageError(f"unknown protocol {spec!r}")


def cmd_ic(args) -> int:
    proto = _protocol(args.protocol)
    c = xor_zero_information_check(proto, args.tol) if args.protocol == "xor" else and_information_check(proto)
    _emit(args, f"epsilon={fmt(c.epsilon)} delta={fmt(c.delta)} ic={fmt(c.ic)} bound={fmt(c.bound)} ok={str(c.ok).lower()}\n")
    return 0 if c.ok else 1


def _pair(text: str):
    parts = text.split(",")
    try:
        return int(parts[0]) if len(parts) == 1 else tuple(int(p) for p in parts)
    except ValueError as exc:
        raise UsageError(f"bad pair {text!r}") from exc


def cmd_bridge(args) -> int:
    g = load_file(args.graph)
    xy = pair_vars(g.num_vars, _pair(args.pair))
    rest = [v for v in range(1, g.num_vars + 1) if v not in xy]
    bits = _bits(args.background, len(rest)) if rest else ()
    rep, _ = bridge_check(g, xy, dict(zip(rest, bits)), args.tol)
    _emit(
        args,
        f"{'PASS' if rep.passed else 'FAIL'} max_state_deviation={fmt_sci(max(rep.protocol_deviation, rep.dummy_deviation))} "
        f"orthogonality={fmt_sci(rep.orthogonality)} degenerate={rep.degenerate or 'none'}\n",
    )
    return 0 if rep.passed else 1


def cmd_experiment(args) -> int:
    name = args.name
    if name == "equidist":
        rows = experiments.equidist_rows(args.q, args.n)
        rows = [{"b": r["b"], "probability": r["probability"], "deviation": r["deviation"]} for r in rows]
        _emit(args, _csv(rows))
        return 0
    if name == "ind-rect":
        r = experiments.ind_rect_row(args.n, args.eps)
        _emit(args, _csv([{"maxA": r["maxA"], "bound": r["bound"]}]))
        return 0 if r["maxA"] <= r["bound"] + 1e-9 else 1
    if name == "mws-scaling":
        rows = experiments.mws_scaling_rows(tuple(args.ns))
        slope = experiments.loglog_slope(rows) if len(rows) > 1 else float("nan")
        _emit(args, _csv(rows) + f"# slope={slope!r}\n")
        return 0 if all(r["nodes"] <= r["bound"] for r in rows) else 1
    if name == "fact-suite":
        results = experiments.fact_suite(args.trials, args.seed, args.tol)
        rows = [{"fact": r.name, "trials": r.trials, "violations": r.violations, "worst_margin": r.worst} for r in results]
        _emit(args, _csv(rows))
        return 0 if all(r.ok for r in results) else 1
    rows = experiments.and_frontier_rows(args.trials)
    _emit(args, _csv(rows))
    return 0 if all(r["ok"] for r in rows) else 1


def cmd_acceptance(args) -> int:
    results = acceptance.run_acceptance_suite(args.only, jobs=args.jobs)
    if not args.output:
        for r in results:
            print(r.line(), file=sys.stderr)
    _emit(args, acceptance.results_csv(results))
    return 0 if all(r.passed for r in results) else 1


# -- parser ---------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=1e-9)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("-o", "--output", default=None)

    parser = argparse.ArgumentParser(prog="qbplab", description="Quantum branching program laboratory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common])
    p.add_argument("--graph", required=True)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("classify", parents=[common])
    p.add_argument("--graph", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("run", parents=[common])
    p.add_argument("--graph", required=True)
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("verify", parents=[common])
    p.add_argument("--graph", required=True)
    p.add_argument("--function", required=True)
    p.add_argument("--epsilon", type=float, default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("build", parents=[common])
    p.add_argument("family", choices=["mws", "disj", "random"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--width", type=int, default=2)
    p.add_argument("--format", choices=["json", "dot"], default="json")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("ic", parents=[common])
    p.add_argument("--protocol", required=True)
    p.set_defaults(func=cmd_ic)

    p = sub.add_parser("bridge-check", parents=[common])
    p.add_argument("--graph", required=True)
    p.add_argument("--pair", required=True, help="index i (pairs x_i with y_i) or explicit 'u,v'")
    p.add_argument("--background", default="", help="bits for the remaining variables in increasing order")
    p.set_defaults(func=cmd_bridge)

    p = sub.add_parser("experiment", parents=[common])
    p.add_argument("name", choices=["equidist", "ind-rect", "mws-scaling", "fact-suite", "and-frontier"])
    p.add_argument("--q", type=int, default=5)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--ns", type=int, nargs="+", default=[4, 8, 16, 32])
    p.add_argument("--trials", type=int, default=200)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("acceptance", parents=[common])
    p.add_argument("--only", type=int, nargs="+", default=None, choices=sorted(acceptance.CRITERIA))
    p.set_defaults(func=cmd_acceptance)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    if args.tol <= 0:
        print("error: --tol must be positive", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (UsageError, ParseError, StructureError, DecompositionError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
