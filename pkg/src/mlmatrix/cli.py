"""Command-line interface: ``mlmatrix {eval,scalar,grid,bench}``.

Exit status is 0 on success, 2 for malformed input and 3 for numerical
failures.  Errors are reported on stderr as a single line ``Name: detail``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time

import numpy as np

from mlmatrix.bench import COLUMNS, SUITES, run_suite
from mlmatrix.driver import PATHS, MLComputeOptions, ml_matrix
from mlmatrix.errors import MLError
from mlmatrix.matrixio import FORMATS, MatrixFormatError, format_float, read_matrix, write_matrix
from mlmatrix.params import MLParams
from mlmatrix.scalar import ml_scalar, ml_scalar_grid

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3


class UsageError(Exception):
    pass


def _positive(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"must be positive and finite: {text!r}")
    return value


def parse_complex(text: str) -> complex:
    """Parse ``a+bi``, ``a+bj``, ``bi`` or ``a``."""
    s = text.strip().replace(" ", "").replace("i", "j")
    try:
        return complex(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _float_list(text: str, count: int, name: str) -> list[float]:
    parts = text.split(",")
    if len(parts) != count:
        raise UsageError(f"{name} needs {count} comma-separated values, got {text!r}")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise UsageError(f"{name} has a non-numeric entry: {text!r}") from None
    if not all(math.isfinite(v) for v in values):
        raise UsageError(f"{name} must be finite: {text!r}")
    return values


def format_scalar(value: complex) -> str:
    """16 significant digits, always showing a decimal point for real values."""

    def fmt(x: float) -> str:
        s = f"{x:.16g}"
        if s.lstrip("-").isdigit():
            s += ".0"
        return s

    if value.imag == 0.0:
        return fmt(value.real)
    sign = "+" if value.imag >= 0 or math.isnan(value.imag) else "-"
    return f"{fmt(value.real)}{sign}{fmt(abs(value.imag))}i"


def _thread_cap() -> int:
    try:
        return max(1, int(os.environ.get("ML_NUM_THREADS", "1")))
    except ValueError:
        return 1


# {{{ subcommands

def cmd_eval(args) -> int:
    A = read_matrix(args.input, args.input_format)
    params = MLParams(args.alpha, args.beta)
    opts = MLComputeOptions(quad_tol=args.tol, path_override=args.force_path)
    elapsed = []
    for _ in range(max(1, args.repeat)):
        t0 = time.perf_counter()
        report = ml_matrix(A, params, opts)
        elapsed.append(time.perf_counter() - t0)
    write_matrix(args.output, report.result, args.format)
    if args.report:
        payload = report.as_dict()
        payload.update(alpha=params.alpha, beta=params.beta, time_s=float(np.mean(elapsed)))
        with open(args.report, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    return EXIT_OK


def cmd_scalar(args) -> int:
    result = ml_scalar(args.z, MLParams(args.alpha, args.beta), args.tol)
    print(f"{format_scalar(result.value)} {result.method}")
    return EXIT_OK


def cmd_grid(args) -> int:
    re_min, re_max, im_min, im_max = _float_list(args.rect, 4, "--rect")
    if re_min > re_max or im_min > im_max:
        raise UsageError(f"--rect bounds are reversed: {args.rect!r}")
    steps = _float_list(args.steps, 2, "--steps")
    if any(s < 1 or s != int(s) for s in steps):
        raise UsageError(f"--steps must be positive integers: {args.steps!r}")
    n_re, n_im = (int(s) for s in steps)

    params = MLParams(args.alpha, args.beta)
    absE = ml_scalar_grid((re_min, re_max, im_min, im_max), (n_re, n_im), params, args.tol)
    re = np.linspace(re_min, re_max, n_re)
    im = np.linspace(im_min, im_max, n_im)

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["re", "im", "absE"])
    for i in range(n_re):
        for j in range(n_im):
            writer.writerow([format_float(re[i]), format_float(im[j]), format_float(absE[i, j])])
    _emit(args.output, buf.getvalue())
    return EXIT_OK


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def cmd_bench(args) -> int:
    opts = MLComputeOptions(quad_tol=args.tol)
    rows = run_suite(args.suite, args.seed, opts=opts, repeat=args.repeat, workers=_thread_cap())
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(COLUMNS)
    for row in rows:
        writer.writerow([_cell(row.get(c)) for c in COLUMNS])
    _emit(args.output, buf.getvalue())
    return EXIT_OK


def _emit(path: str | None, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


# }}}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mlmatrix", description="Mittag-Leffler function of matrices and scalars."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_params(p, tol_default):
        p.add_argument("--alpha", type=_positive, required=True)
        p.add_argument("--beta", type=_positive, required=True)
        p.add_argument("--tol", type=_positive, default=tol_default)

    p = sub.add_parser("eval", help="evaluate E_{alpha,beta}(A) for a matrix file")
    add_params(p, 1.0e-13)
    p.add_argument("--input", required=True)
    p.add_argument("--input-format", choices=FORMATS, default=None,
                   help="input format (default: from the file extension)")
    p.add_argument("--output", required=True)
    p.add_argument("--format", choices=FORMATS, default=None,
                   help="output format (default: from the file extension)")
    p.add_argument("--force-path", choices=PATHS, default="auto")
    p.add_argument("--report", default=None, help="write per-block JSON diagnostics here")
    p.add_argument("--repeat", type=int, default=1)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("scalar", help="evaluate E_{alpha,beta}(z) for one complex z")
    add_params(p, 1.0e-15)
    p.add_argument("--z", type=parse_complex, required=True)
    p.set_defaults(func=cmd_scalar)

    p = sub.add_parser("grid", help="|E_{alpha,beta}| on a rectangle, as CSV")
    add_params(p, 1.0e-15)
    p.add_argument("--rect", required=True, help="re_min,re_max,im_min,im_max")
    p.add_argument("--steps", required=True, help="n_re,n_im")
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("bench", help="run a benchmark suite, as CSV")
    p.add_argument("--suite", choices=SUITES, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=_positive, default=1.0e-13)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--output", default=None)
    p.set_defaults(func=cmd_bench)

    return parser


def _fail(code: int, name: str, detail: str) -> int:
    detail = " ".join(str(detail).split())
    print(f"{name}: {detail}", file=sys.stderr)
    return code


#: options whose values may legitimately start with "-"
_SIGNED_VALUE_FLAGS = ("--z", "--rect")


def _attach_signed_values(argv: list[str]) -> list[str]:
    """Rewrite ``--rect -1,2,...`` as ``--rect=-1,2,...`` so argparse accepts it."""
    out = []
    i = 0
    while i < len(argv):
        if argv[i] in _SIGNED_VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{argv[i]}={argv[i + 1]}")
            i += 2
        else:
            out.append(argv[i])
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _attach_signed_values(list(sys.argv[1:] if argv is None else argv))
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except MLError as exc:
        return _fail(EXIT_NUMERIC, exc.name, exc)
    except (UsageError, MatrixFormatError) as exc:
        return _fail(EXIT_USAGE, type(exc).__name__, exc)
    except OSError as exc:
        return _fail(EXIT_USAGE, type(exc).__name__, exc)
    except ValueError as exc:
        return _fail(EXIT_USAGE, "ValueError", exc)


if __name__ == "__main__":
    sys.exit(main())
