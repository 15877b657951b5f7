"""Command-line front end.

Subcommands
-----------
infsup       inf-sup constants for a grid of (p, L, n)
run          one benchmark solve: ``report.csv`` and ``solution.csv``
convergence  errors and log2 rates over a dyadic mesh family
condition    spectral condition numbers of the constrained systems

Every CSV starts with a ``#`` line holding the resolved configuration.
Exit codes: 0 success, 1 bad arguments, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import contextlib
import io
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .benchmarks import (BenchmarkReport, condition_sweep, convergence_sweep, get_test,
                         run_case, TESTS)
from .infsup import compute_infsup

EXIT_OK, EXIT_ARGS, EXIT_NUMERIC = 0, 1, 2

METHOD_NAMES = {"galerkin": "galerkin", "supg": "supg", "gls": "gls", "mq": "mq",
                "mq-iso": "mq_isotropic"}
REPORT_COLUMNS = ("test", "method", "p1", "p2", "ne1", "ne2", "L", "cb", "rel_l2",
                  "rel_h1", "min", "diff", "cond", "dofs", "seconds")
NUMERIC_ERRORS = (np.linalg.LinAlgError, FloatingPointError, ArithmeticError)


class ArgumentError(Exception):
    pass


class NumericalFailure(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ARGS, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> tuple:
    try:
        vals = tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return vals


def _positive_int(text: str) -> int:
    vals = _int_list(text)
    if len(vals) != 1:
        raise argparse.ArgumentTypeError(f"expected a single integer, got {text!r}")
    return vals[0]


def _cb(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not math.isfinite(v) or v <= 0:
        raise argparse.ArgumentTypeError(f"cb must be positive, got {text!r}")
    return v


def _method_list(text: str) -> tuple:
    names = tuple(t.strip() for t in text.split(",") if t.strip())
    bad = [n for n in names if n not in METHOD_NAMES]
    if not names or bad:
        raise argparse.ArgumentTypeError(
            f"unknown method(s) {bad or text!r}; choose from {sorted(METHOD_NAMES)}")
    return names


@dataclass
class RunConfig:
    subcommand: str
    test: Optional[int] = None
    method: object = None
    degree: tuple = ()
    elements: tuple = ()
    levels: object = None
    cb: Optional[float] = None
    out: str = "-"
    grid: int = 256
    threads: int = 1
    extra: dict = field(default_factory=dict)

    def meta_line(self) -> str:
        items = []
        for k, v in asdict(self).items():
            if k == "extra":
                items += [f"{kk}={_fmt_meta(vv)}" for kk, vv in sorted(v.items())]
            else:
                items.append(f"{k}={_fmt_meta(v)}")
        return "# " + " ".join(items)


def _fmt_meta(v) -> str:
    if isinstance(v, (tuple, list)):
        return ",".join(str(x) for x in v)
    return "" if v is None else str(v)


# -- formatting ------------------------------------------------------------


def _num(v, fmt="{:.8g}") -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return fmt.format(v)


def _pad2(t):
    t = tuple(t)
    return t + ("",) * (2 - len(t))


def report_row(rep: BenchmarkReport, timing: bool) -> list:
    p1, p2 = _pad2(rep.degrees)
    n1, n2 = _pad2(rep.elements)
    return [str(rep.test), rep.method, str(p1), str(p2), str(n1), str(n2),
            _num(rep.levels), _num(rep.cb), _num(rep.rel_l2), _num(rep.rel_h1),
            _num(rep.min), _num(rep.diff), _num(rep.cond), _num(rep.dofs),
            _num(rep.seconds, "{:.3f}") if timing else ""]


def _write(path: str, meta: str, header: Sequence[str], rows: Sequence[Sequence[str]]):
    text = io.StringIO()
    text.write(meta + "\n")
    text.write(",".join(header) + "\n")
    for r in rows:
        text.write(",".join(r) + "\n")
    if path == "-":
        sys.stdout.write(text.getvalue())
    else:
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text.getvalue())


def _check_report(rep: BenchmarkReport):
    vals = [rep.rel_l2, rep.rel_h1, rep.min, rep.diff]
    if any(v is not None and not math.isfinite(v) for v in vals):
        raise NumericalFailure("non-finite result in report")


# -- subcommands -----------------------------------------------------------


def cmd_infsup(args) -> int:
    ps = args.degree or (2, 3)
    Ls = args.levels or (1, 2, 3)
    ns = args.elements or (8, 16, 32, 64, 128, 256, 512)
    cfg = RunConfig("infsup", degree=ps, levels=Ls, elements=ns, out=args.out,
                    threads=args.threads)
    rows = []
    for p in ps:
        for L in Ls:
            for n in ns:
                try:
                    beta = compute_infsup(p, L, n)
                except NUMERIC_ERRORS as err:
                    print(f"skipping p={p} L={L} n={n}: numerical failure: {err}",
                          file=sys.stderr)
                    continue
                except ValueError as err:
                    print(f"skipping p={p} L={L} n={n}: {err}", file=sys.stderr)
                    continue
                rows.append([str(p), str(L), str(n), f"{beta:.4f}"])
    if not rows:
        print("no valid inf-sup case", file=sys.stderr)
        return EXIT_ARGS
    _write(args.out, cfg.meta_line(), ("p", "L", "n", "beta"), rows)
    return EXIT_OK


def _resolve_run(args):
    tc = get_test(args.test)
    dim = tc.problem().dim
    degrees = args.degree or tc.degrees
    elements = args.elements or tc.elements
    for name, t in (("--degree", degrees), ("--elements", elements)):
        if len(t) not in (1, dim):
            raise ArgumentError(f"{name} needs 1 or {dim} values for test {args.test}")
    if len(degrees) == 1:
        degrees = degrees * dim
    if len(elements) == 1:
        elements = elements * dim
    levels = args.levels[0] if args.levels else tc.levels_for(degrees)
    cb = tc.cb if args.cb is None else args.cb
    return tc, tuple(degrees), tuple(elements), levels, cb


def _sample_solution(sol, grid: int):
    axes = [np.linspace(d.domain[0], d.domain[1], grid) for d in sol.space.directions]
    u = sol(axes)
    mesh = np.meshgrid(*axes, indexing="ij")
    cols = [m.ravel() for m in mesh] + [u.ravel()]
    names = ("x", "y", "z")[:len(axes)] + ("u",)
    rows = [[f"{v:.12g}" for v in r] for r in zip(*cols)]
    return names, rows


def cmd_run(args) -> int:
    tc, degrees, elements, levels, cb = _resolve_run(args)
    method = METHOD_NAMES[args.method[0]]
    cfg = RunConfig("run", args.test, method, degrees, elements, levels, cb, args.out,
                    args.grid, args.threads, {"cond": args.cond, "timing": args.timing})
    rep, sol = run_case(args.test, method, degrees, elements, levels, cb,
                        indicators=(args.test == 4), grid=args.grid, cond=args.cond)
    if not np.all(np.isfinite(sol.coefficients)):
        raise NumericalFailure("solution has non-finite coefficients")
    _check_report(rep)
    meta = cfg.meta_line()
    os.makedirs(args.out, exist_ok=True)
    _write(os.path.join(args.out, "report.csv"), meta, REPORT_COLUMNS,
           [report_row(rep, args.timing)])
    names, rows = _sample_solution(sol, args.grid)
    _write(os.path.join(args.out, "solution.csv"), meta, names, rows)
    return EXIT_OK


def _default_meshes(test: int) -> tuple:
    return (64, 128, 256, 512) if test in (1, 2, 6) else (16, 32, 64)


def _mesh_family(tc, elements, meshes, axis):
    dim = tc.problem().dim
    base = elements or tc.elements
    base = base * dim if len(base) == 1 else base
    if axis is None:
        # the narrow-layer test keeps the coarse x-resolution fixed
        axis = dim - 1 if tc.number == 6 else "all"
    out = []
    for m in meshes:
        if axis == "all":
            out.append((m,) * dim)
        else:
            e = list(base)
            e[int(axis)] = m
            out.append(tuple(e))
    return out


def cmd_convergence(args) -> int:
    tc = get_test(args.test)
    if tc.problem().exact is None:
        raise ArgumentError(f"test {args.test} has no exact solution")
    method = METHOD_NAMES[args.method[0]]
    dim = tc.problem().dim
    degrees = args.degree or tc.degrees
    degrees = tuple(degrees * dim if len(degrees) == 1 else degrees)
    meshes = args.meshes or _default_meshes(args.test)
    axis = None if args.refine_axis == "auto" else args.refine_axis
    if axis not in (None, "all") and int(axis) >= dim:
        raise ArgumentError(f"--refine-axis {axis} exceeds the dimension {dim}")
    family = _mesh_family(tc, args.elements, meshes, axis)
    levels = args.levels[0] if args.levels else tc.levels_for(degrees)
    cb = tc.cb if args.cb is None else args.cb
    cfg = RunConfig("convergence", args.test, method, degrees, tuple(meshes), levels, cb,
                    args.out, args.grid, args.threads,
                    {"refine_axis": args.refine_axis, "timing": args.timing})
    reports = convergence_sweep(args.test, method, degrees, family, levels, cb)
    rows = []
    for rep in reports:
        _check_report(rep)
        rows.append(report_row(rep, args.timing) + [_num(rep.rate_l2, "{:.4f}"),
                                                    _num(rep.rate_h1, "{:.4f}")])
    _write(args.out, cfg.meta_line(), REPORT_COLUMNS + ("rate_l2", "rate_h1"), rows)
    return EXIT_OK


def cmd_condition(args) -> int:
    tc = get_test(args.test)
    dim = tc.problem().dim
    methods = tuple(METHOD_NAMES[m] for m in (args.method or ("galerkin", "mq")))
    degrees = args.degree or tc.degrees
    degrees = tuple(degrees * dim if len(degrees) == 1 else degrees)
    meshes = args.meshes or _default_meshes(args.test)
    family = _mesh_family(tc, args.elements, meshes, "all" if dim == 1 else None)
    levels = args.levels[0] if args.levels else None
    cfg = RunConfig("condition", args.test, methods, degrees, tuple(meshes), levels,
                    args.cb, args.out, args.grid, args.threads,
                    {"max_dim": args.max_dim})
    reports = condition_sweep(args.test, degrees, family, methods, levels, args.cb,
                              max_dim=args.max_dim)
    for rep in reports:
        if rep.cond is not None and not (rep.cond > 0):
            raise NumericalFailure("invalid condition number")
    _write(args.out, cfg.meta_line(), REPORT_COLUMNS, [report_row(r, False) for r in reports])
    return EXIT_OK


# -- parser ----------------------------------------------------------------


def _common(p: argparse.ArgumentParser, test_required=True):
    if test_required:
        p.add_argument("--test", type=int, required=True, choices=sorted(TESTS),
                       metavar="N", help="benchmark id (1-6)")
    p.add_argument("--degree", type=_int_list, metavar="p1[,p2]")
    p.add_argument("--elements", type=_int_list, metavar="n1[,n2]")
    p.add_argument("--cb", type=_cb, metavar="x", help="stabilization scale")
    p.add_argument("--grid", type=_positive_int, default=256, metavar="m",
                   help="uniform sampling points per direction")
    p.add_argument("--threads", type=_positive_int, default=1, metavar="k",
                   help="BLAS/LAPACK thread count")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mqiga", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    p = sub.add_parser("infsup", help="inf-sup constants")
    _common(p, test_required=False)
    p.add_argument("--levels", type=_int_list, metavar="L[,L...]")
    p.add_argument("--out", default="-", metavar="path", help="CSV file ('-' for stdout)")
    p.set_defaults(func=cmd_infsup)

    p = sub.add_parser("run", help="solve one benchmark")
    _common(p)
    p.add_argument("--method", type=_method_list, default=("mq",),
                   metavar="{galerkin|supg|gls|mq|mq-iso}")
    p.add_argument("--levels", type=_int_list, metavar="L")
    p.add_argument("--out", default=".", metavar="path", help="output directory")
    p.add_argument("--cond", action="store_true", help="also compute the condition number")
    p.add_argument("--timing", action="store_true", help="fill the seconds column")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("convergence", help="errors and rates on a mesh family")
    _common(p)
    p.add_argument("--method", type=_method_list, default=("mq",),
                   metavar="{galerkin|supg|gls|mq|mq-iso}")
    p.add_argument("--levels", type=_int_list, metavar="L")
    p.add_argument("--meshes", type=_int_list, metavar="m1,m2,...",
                   help="element counts along the refined direction(s)")
    p.add_argument("--refine-axis", default="auto", choices=("auto", "all", "0", "1"))
    p.add_argument("--out", default="-", metavar="path")
    p.add_argument("--timing", action="store_true")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("condition", help="condition numbers on a mesh family")
    _common(p)
    p.add_argument("--method", type=_method_list, metavar="m1[,m2...]")
    p.add_argument("--levels", type=_int_list, metavar="L")
    p.add_argument("--meshes", type=_int_list, metavar="m1,m2,...")
    p.add_argument("--max-dim", type=_positive_int, default=6000, metavar="N",
                   help="skip systems larger than this")
    p.add_argument("--out", default="-", metavar="path")
    p.set_defaults(func=cmd_condition)
    return parser


def _thread_limit(k: int):
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return contextlib.nullcontext()
    return threadpool_limits(limits=k)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_ARGS
    if args.subcommand == "run" and len(args.method) != 1:
        print("mqiga run: error: run takes a single --method", file=sys.stderr)
        return EXIT_ARGS
    try:
        with _thread_limit(args.threads), np.errstate(all="ignore"):
            return args.func(args)
    # LinAlgError derives from ValueError, so numerical failures are matched first
    except (NumericalFailure, *NUMERIC_ERRORS) as err:
        print(f"mqiga {args.subcommand}: numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ArgumentError, ValueError, KeyError) as err:
        print(f"mqiga {args.subcommand}: error: {err}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
