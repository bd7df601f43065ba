"""Command-line entry point: ``graverfold <command> ...``.

Every report starts with a ``# seed=<seed>`` line. Output depends only on the
arguments and input files, so repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from fractions import Fraction

from . import bounds, fileformat, models, oracle, solver
from .graver import GraverBasis, GraverLimitError, format_graver, graver_basis
from .matrix import DimensionError, MatrixFormatError, read_matrix
from .problem import IPInstance, SolveOutcome, Status

EXIT_OK, EXIT_ERROR, EXIT_INFEASIBLE, EXIT_UNBOUNDED = 0, 1, 2, 3
_EXIT = {Status.OPTIMAL: EXIT_OK, Status.INFEASIBLE: EXIT_INFEASIBLE, Status.UNBOUNDED: EXIT_UNBOUNDED}

log = logging.getLogger("graverfold")


class CliError(Exception):
    pass


def _header(args) -> str:
    return f"# seed={args.seed}\n"


def _read_matrix(path: str):
    try:
        return read_matrix(path)
    except OSError as exc:
        raise CliError(f"{path}:1: cannot read file: {exc.strerror}") from None


def _fmt_value(v: Fraction) -> str:
    return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"


def _vec(v) -> str:
    return " ".join(str(x) for x in v)


# ---------------------------------------------------------------------------
# commands


def cmd_graver_compute(args) -> int:
    M = _read_matrix(args.matrix)
    G = graver_basis(M, ceiling=args.ceiling_graver)
    log.info("graver basis of a %dx%d matrix: %d vectors", M.rows, M.cols, len(G))
    sys.stdout.write(_header(args) + _graver_text(G, args))
    return EXIT_OK


def _graver_text(G: GraverBasis, args) -> str:
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"v{j}" for j in range(G.matrix.cols)])
        w.writerows(G.vectors)
        return buf.getvalue()
    return format_graver(G)


def cmd_bounds_validate(args) -> int:
    config = fileformat.read_bounds_config(args.config)
    reports = bounds.run_config(config, args.seed, args.ceiling_graver)
    buf = io.StringIO()
    if args.format == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["bound_name", "inputs", "formula_value", "observed", "satisfied"])
        for r in reports:
            w.writerow([r.bound_name, _inputs(r), r.formula_value, _observed(r), _satisfied(r)])
    else:
        for r in reports:
            buf.write(f"{r.bound_name:<10} {_inputs(r):<60} formula={r.formula_value} "
                      f"observed={_observed(r)} satisfied={_satisfied(r)}\n")
    sys.stdout.write(_header(args) + buf.getvalue())
    return EXIT_OK if all(r.satisfied is not False for r in reports) else EXIT_ERROR


def _inputs(r: bounds.BoundReport) -> str:
    items = list(r.inputs.items()) + list(r.provenance.items())
    return ";".join(f"{k}={v}".replace(" ", "") for k, v in items)


def _observed(r: bounds.BoundReport) -> str:
    return "unobserved" if r.observed_max_norm is None else str(r.observed_max_norm)


def _satisfied(r: bounds.BoundReport) -> str:
    return {None: "not_checked", True: "true", False: "false"}[r.satisfied]


def _report_outcome(out: SolveOutcome, instance: IPInstance, args) -> int:
    buf = io.StringIO()
    value = (_fmt_value(Fraction(out.value, instance.objective_scale))
             if out.value is not None else "")
    point = out.point if out.status is Status.OPTIMAL else None
    if args.format == "csv":
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["status", "value", "point", "steps"])
        w.writerow([out.status.value, value, _vec(point) if point else "", len(out.trace)])
    else:
        buf.write(f"status {out.status.value}\n")
        if out.status is Status.OPTIMAL:
            buf.write(f"Optimal value {value}\n")
            buf.write(f"point {_vec(out.point)}\n")
        elif out.status is Status.UNBOUNDED and out.trace:
            buf.write(f"ray {_vec(out.trace[-1].direction)}\n")
        if not args.no_trace and out.trace:
            buf.write(f"trace {len(out.trace)} steps\n")
            for k, step in enumerate(out.trace, 1):
                buf.write(f"  {k}: alpha={step.step} delta={step.delta} direction={_vec(step.direction)}\n")
    sys.stdout.write(_header(args) + buf.getvalue())
    return _EXIT[out.status]


def cmd_solve(args) -> int:
    instance = fileformat.read_instance(args.problem)
    method = args.method
    if method == "auto":
        method = "augment"
    log.info("solving %d variables, %d rows with %s", instance.n, instance.matrix.rows, method)
    kw = {"graver_ceiling": args.ceiling_graver, "max_iterations": args.ceiling_iterations}
    if method == "augment":
        out = solver.augment_solve(instance, **kw)
    elif method == "nfold":
        out = solver.nfold_solve(instance, **kw)
    else:
        if args.mode == "bound" and args.norm_bound is None:
            raise CliError("--mode bound needs --norm-bound")
        out = solver.four_block_solve(instance, mode=args.mode, bound=args.norm_bound, **kw)
    return _report_outcome(out, instance, args)


def cmd_build(args) -> int:
    spec = fileformat.read_problem(args.spec)
    if isinstance(spec, models.NetworkSpec):
        if args.equalize:
            spec = models.equalize_M_N(spec)
        instance = models.build_multicommodity(spec)
    elif isinstance(spec, models.SIPSpec):
        instance = models.build_sip_dominance(spec)
    else:
        raise CliError(f"{args.spec}:1: expected a [network] or [sip] document")
    sys.stdout.write(_header(args) + fileformat.format_problem(instance))
    return EXIT_OK


def cmd_transform(args) -> int:
    instance = fileformat.read_instance(args.problem)
    out = models.corollary_transform(instance)
    sys.stdout.write(_header(args) + fileformat.format_problem(out))
    return EXIT_OK


def cmd_oracle_graver(args) -> int:
    M = _read_matrix(args.matrix)
    if args.radius < 0:
        raise CliError("radius must be nonnegative")
    vecs = oracle.graver_oracle(M, oracle.BoxSpec.cube(M.cols, args.radius, args.ceiling_oracle))
    G = GraverBasis(M, tuple(sorted(vecs)))
    sys.stdout.write(_header(args) + _graver_text(G, args))
    return EXIT_OK


def cmd_oracle_solve(args) -> int:
    instance = fileformat.read_instance(args.problem)
    out = oracle.ip_oracle(instance, args.ceiling_oracle)
    return _report_outcome(out, instance, args)


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    """Usage errors exit with 1; exit code 2 means Infeasible here."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="graverfold", description="Graver bases and N-fold four-block IPs.")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled test matrices (default 0)")
    p.add_argument("--ceiling-graver", type=int, default=10**6, metavar="K",
                   help="abort a Graver computation beyond K vectors")
    p.add_argument("--ceiling-oracle", type=int, default=oracle.DEFAULT_POINT_CEILING, metavar="K",
                   help="abort brute-force enumeration beyond K points")
    p.add_argument("--ceiling-iterations", type=int, default=solver.DEFAULT_ITERATION_CEILING,
                   metavar="K", help="abort augmentation after K steps")
    p.add_argument("--format", choices=("text", "csv"), default="text")
    p.add_argument("-v", "--verbose", action="count", default=0, help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("graver", help="Graver basis computation")
    gs = g.add_subparsers(dest="action", required=True, parser_class=_Parser)
    gc = gs.add_parser("compute", help="Graver basis of a matrix file")
    gc.add_argument("matrix")
    gc.set_defaults(func=cmd_graver_compute)

    b = sub.add_parser("bounds", help="degree-bound validation")
    bs = b.add_subparsers(dest="action", required=True, parser_class=_Parser)
    bv = bs.add_parser("validate", help="check bounds listed in a config file")
    bv.add_argument("config")
    bv.set_defaults(func=cmd_bounds_validate)

    s = sub.add_parser("solve", help="solve a problem file")
    s.add_argument("problem")
    s.add_argument("--method", choices=("auto", "augment", "fourblock", "nfold"), default="auto")
    s.add_argument("--mode", choices=("projection", "bound"), default="projection",
                   help="first-stage candidates for --method fourblock")
    s.add_argument("--norm-bound", type=int, default=None, help="1-norm bound for --mode bound")
    s.add_argument("--no-trace", action="store_true", help="omit the augmentation trace")
    s.set_defaults(func=cmd_solve)

    bu = sub.add_parser("build", help="build an instance from a [network] or [sip] spec")
    bu.add_argument("spec")
    bu.add_argument("--equalize", action="store_true",
                    help="pad commodities or scenarios to equal counts first")
    bu.set_defaults(func=cmd_build)

    t = sub.add_parser("transform", help="rewrite a transposed-form problem in four-block form")
    t.add_argument("problem")
    t.set_defaults(func=cmd_transform)

    o = sub.add_parser("oracle", help="brute-force references")
    os_ = o.add_subparsers(dest="action", required=True, parser_class=_Parser)
    og = os_.add_parser("graver", help="Graver basis by enumeration of a cube")
    og.add_argument("matrix")
    og.add_argument("radius", type=int)
    og.set_defaults(func=cmd_oracle_graver)
    osv = os_.add_parser("solve", help="optimum by enumeration of the bound box")
    osv.add_argument("problem")
    osv.add_argument("--no-trace", action="store_true", help=argparse.SUPPRESS)
    osv.set_defaults(func=cmd_oracle_solve)
    return p


_EXPECTED = (CliError, fileformat.ProblemFormatError, MatrixFormatError, DimensionError,
             models.ModelError, GraverLimitError, oracle.OracleLimitError,
             solver.IterationLimitError, solver.InnerSolveError, ValueError)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(stream=sys.stderr, format="%(levelname)s %(message)s",
                        level=logging.WARNING - 10 * min(args.verbose, 2))
    try:
        return args.func(args)
    except _EXPECTED as exc:
        msg = " ".join(str(exc).split())
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
