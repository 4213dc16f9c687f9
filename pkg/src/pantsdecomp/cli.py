"""``pantsdecomp`` command line.

Exit codes: 0 ok, 1 invalid input, 2 verification failure, 3 numerical or
budget failure.  Output files are written to a temporary name and renamed
only once complete.
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
import time

from . import algorithm as al
from . import geodesy as gd
from . import io
from .bounds import BoundError, bavard_bound, bers_bound, r_g, r_g_rough
from .domain import DEFAULT_BUDGET
from .hypcore import GeometryError, HPoint, tolerances
from .kernels import BudgetExceeded
from .surface import HolonomyError, SurfaceError, parse_surface, random_surface

EXIT_OK, EXIT_INPUT, EXIT_VERIFY, EXIT_NUMERIC = 0, 1, 2, 3

log = logging.getLogger("pantsdecomp")


class InputError(Exception):
    pass


# ---------------------------------------------------------------- helpers


def _read(path) -> str:
    try:
        with open(path, encoding="utf-8") as f:
            return f.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _emit(text: str, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        io.atomic_write(path, text)


def _base_point(text):
    if text is None:
        return None
    try:
        x, y = (float(v) for v in text.split(","))
        return HPoint(x, y)
    except (ValueError, GeometryError):
        raise InputError(f"--base-point expects x,y with y > 0, got {text!r}") from None


def _load_group(path):
    spec = parse_surface(_read(path))
    return spec.group()


def _check_letters(group, words):
    n = len(group.generators)
    for w in words:
        if any(abs(x) > n for x in w):
            raise InputError(f"curve word {list(w)} uses a generator beyond {n}")


def _tol_changes(args) -> dict:
    names = {"tol_det": "det", "tol_iso": "iso", "tol_class": "classify", "tol_cross": "cross", "tol_rel": "rel", "tol_len": "length"}
    return {field: getattr(args, a) for a, field in names.items() if getattr(args, a, None) is not None}


# ---------------------------------------------------------------- commands


def cmd_bounds(args) -> int:
    g = args.genus
    rows = [("bavard", bavard_bound(g)), ("r_g", r_g(g)), ("r_g_rough", r_g_rough(g)), ("bers", bers_bound(g))]
    print(f"genus {g}")
    for name, v in rows:
        print(f"{name:<10} {v:.6f}")
    return EXIT_OK


def cmd_random_surface(args) -> int:
    spec = random_surface(args.genus, args.min, args.max, args.seed, args.shape)
    _emit(spec.to_json(), args.out)
    return EXIT_OK


def cmd_systole(args) -> int:
    group = _load_group(args.input)
    gd.geometry(group, args.budget)
    c, length = gd.systole(group)
    print(f"systole {length:.9g} word {list(c.word)}")
    return EXIT_OK


def cmd_decompose(args) -> int:
    group = _load_group(args.input)
    config = al.AlgoConfig(base_point=_base_point(args.base_point), samples=args.samples, seed=args.seed, budget=args.budget)
    t0 = time.perf_counter()
    pd, trace = al.decompose(group, config)
    report = al.verify(group, pd)
    log.info("decomposed in %.2f s", time.perf_counter() - t0)
    _emit(io.decomposition_to_json(pd), args.out)
    trace_path = args.trace
    if trace_path is None and args.out not in (None, "-"):
        trace_path = os.path.splitext(args.out)[0] + ".trace.json"
    if trace_path is not None:
        io.atomic_write(trace_path, io.trace_to_json(trace))
    _print_report(report, pd.conditional)
    return EXIT_OK if report.passed else EXIT_VERIFY


def _print_report(report: al.VerificationReport, conditional=False):
    for key in ("curve_count_ok", "disjoint_ok", "euler_ok", "bound_ok", "admissible_ok", "lengths_ok"):
        print(f"{key:<15} {getattr(report, key)}")
    print(f"{'max_length':<15} {report.max_length:.9g}")
    print(f"{'bers_bound':<15} {report.bers_bound:.9g}")
    if conditional:
        print("certificate     conditional (systole below 2 asinh 1)")
    for m in report.messages:
        print(f"note: {m}")


def cmd_verify(args) -> int:
    group = _load_group(args.input)
    dec = io.parse_decomposition(_read(args.decomposition))
    if dec.genus != group.genus:
        raise InputError(f"decomposition is for genus {dec.genus}, surface has genus {group.genus}")
    _check_letters(group, dec.words)
    gd.geometry(group, args.budget)
    pd = al.decomposition_from_words(group, dec.words, dec.pants, dec.conditional)
    stored = [L if L is not None else c.length for L, c in zip(dec.lengths, pd.curves)]
    report = al.verify(group, pd, stored_lengths=stored)
    _print_report(report, dec.conditional)
    return EXIT_OK if report.passed else EXIT_VERIFY


def cmd_render(args) -> int:
    from .render import render_svg

    group = _load_group(args.input)
    words = []
    if args.decomposition is not None:
        text = _read(args.decomposition)
        if text.strip():
            dec = io.parse_decomposition(text)
            if dec.genus != group.genus:
                raise InputError(f"decomposition is for genus {dec.genus}, surface has genus {group.genus}")
            words = dec.words
    _check_letters(group, words)
    geo = gd.geometry(group, args.budget)
    curves = [geo.curve(w) for w in words]
    _emit(render_svg(group, curves), args.out)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def _genus(text):
    try:
        g = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"genus must be an integer, got {text!r}") from None
    return g


def _positive_float(text):
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerances must be positive")
    return v


def _add_run_flags(p):
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="enumeration cap (>= 10000)")
    for flag, what in (("det", "determinant"), ("iso", "isometry"), ("class", "trace-vs-2 classification"),
                       ("cross", "crossing"), ("rel", "relation residual"), ("len", "length agreement")):
        p.add_argument(f"--tol-{flag}", type=_positive_float, default=None, help=f"{what} tolerance")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pantsdecomp", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("bounds", help="print the length bounds for a genus")
    p.add_argument("--genus", type=_genus, required=True)
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("random-surface", help="write a random Fenchel-Nielsen surface")
    p.add_argument("--genus", type=_genus, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min", type=float, default=1.8, help="smallest edge length")
    p.add_argument("--max", type=float, default=4.0, help="largest edge length")
    p.add_argument("--shape", choices=("linear", "ring"), default="linear")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_random_surface)

    p = sub.add_parser("systole", help="print the systole of a surface")
    p.add_argument("--input", required=True)
    _add_run_flags(p)
    p.set_defaults(func=cmd_systole)

    p = sub.add_parser("decompose", help="build and certify a pants decomposition")
    p.add_argument("--input", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--trace", default=None, help="trace file (default: next to --out)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=4000)
    p.add_argument("--base-point", default=None, metavar="X,Y")
    _add_run_flags(p)
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("verify", help="re-check a decomposition file against a surface")
    p.add_argument("--input", required=True, help="surface file")
    p.add_argument("--decomposition", required=True)
    _add_run_flags(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("render", help="draw the domain and the curves as SVG")
    p.add_argument("--input", required=True, help="surface file")
    p.add_argument("--decomposition", default=None)
    p.add_argument("--out", default=None)
    _add_run_flags(p)
    p.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr, format="%(message)s")
    if getattr(args, "budget", DEFAULT_BUDGET) < 10_000:
        print("error: --budget must be at least 10000", file=sys.stderr)
        return EXIT_INPUT
    try:
        with tolerances(**_tol_changes(args)):
            return args.func(args)
    except HolonomyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, SurfaceError, BoundError, ValueError) as exc:
        if isinstance(exc, GeometryError):
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_NUMERIC
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (GeometryError, BudgetExceeded, al.AlgorithmError, ArithmeticError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
