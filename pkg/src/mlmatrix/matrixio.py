"""Reading and writing dense complex matrices.

Supported formats:

* ``mm-array``: Matrix Market ``array complex general`` (17 significant
  digits, so a write/read round trip is exact);
* ``mm-coordinate``: Matrix Market ``coordinate complex general``;
* ``csv``: one matrix row per line, alternating real and imaginary parts
  ``re_1,im_1,re_2,im_2,...``.

Reading Matrix Market goes through :func:`scipy.io.mmread`, which also
accepts real, integer and pattern fields.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np
import scipy.io as sio
import scipy.sparse as sp

FORMATS = ("mm-array", "mm-coordinate", "csv")


class MatrixFormatError(ValueError):
    pass


def format_float(x: float) -> str:
    """Shortest round-trip representation; infinities as ``inf``/``-inf``."""
    if np.isnan(x):
        return "nan"
    if np.isinf(x):
        return "inf" if x > 0 else "-inf"
    return repr(float(x))


def guess_format(path: str | Path) -> str:
    return "csv" if str(path).lower().endswith(".csv") else "mm-array"


def read_matrix(path: str | Path, fmt: str | None = None) -> np.ndarray:
    fmt = fmt or guess_format(path)
    if fmt not in FORMATS:
        raise MatrixFormatError(f"unknown format {fmt!r}")
    try:
        if fmt == "csv":
            return _read_csv(Path(path).read_text("utf-8"))
        data = sio.mmread(str(path))
    except (OSError, UnicodeDecodeError) as exc:
        raise MatrixFormatError(f"cannot read {path}: {exc}") from exc
    except (ValueError, IndexError, TypeError) as exc:
        raise MatrixFormatError(f"malformed Matrix Market file {path}: {exc}") from exc
    if sp.issparse(data):
        data = data.toarray()
    A = np.asarray(data, dtype=np.complex128)
    if A.ndim != 2:
        raise MatrixFormatError(f"expected a matrix, got shape {A.shape}")
    return A


def _read_csv(text: str) -> np.ndarray:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and any(c.strip() for c in r)]
    if not rows:
        raise MatrixFormatError("empty CSV matrix")
    width = len(rows[0])
    if width % 2 or any(len(r) != width for r in rows):
        raise MatrixFormatError("CSV rows must have equal, even numbers of fields")
    try:
        vals = np.array([[float(c) for c in r] for r in rows])
    except ValueError as exc:
        raise MatrixFormatError(f"non-numeric CSV field: {exc}") from exc
    return vals[:, 0::2] + 1j * vals[:, 1::2]


def write_matrix(path: str | Path, A, fmt: str | None = None) -> None:
    fmt = fmt or guess_format(path)
    A = np.asarray(A, dtype=np.complex128)
    if fmt == "csv":
        lines = []
        for row in A:
            fields = []
            for z in row:
                fields += [format_float(z.real), format_float(z.imag)]
            lines.append(",".join(fields))
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    elif fmt == "mm-array":
        with open(path, "wb") as fh:
            sio.mmwrite(fh, A, field="complex", precision=17, symmetry="general")
    elif fmt == "mm-coordinate":
        with open(path, "wb") as fh:
            sio.mmwrite(fh, sp.coo_matrix(A), field="complex", precision=17, symmetry="general")
    else:
        raise MatrixFormatError(f"unknown format {fmt!r}")
