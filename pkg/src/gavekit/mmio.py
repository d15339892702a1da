"""Matrix Market and plain-text vector files.

Matrices travel as ``matrix coordinate real general`` files with 1-based
indices; vectors as one value per line. Everything is written with 17
significant digits so that float64 values round-trip exactly.
"""

from __future__ import annotations

import numpy as np

from .errors import FormatError, ParameterError
from .sparse import SparseMatrix

__all__ = [
    "read_matrix_market",
    "write_matrix_market",
    "read_vector",
    "write_vector",
]

_HEADER = "%%MatrixMarket matrix coordinate real general"


def write_matrix_market(path, A):
    """Write a SparseMatrix in Matrix Market coordinate format."""
    rows, cols, vals = A.coo_arrays()
    with open(path, "w", encoding="ascii") as fh:
        fh.write(_HEADER + "\n")
        fh.write(f"{A.n_rows} {A.n_cols} {A.nnz}\n")
        for r, c, v in zip(rows, cols, vals):
            fh.write(f"{r + 1} {c + 1} {v:.16e}\n")


def read_matrix_market(path):
    """Read a ``matrix coordinate real general`` file into a SparseMatrix."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline()
        if not header.startswith("%%MatrixMarket"):
            raise FormatError(f"{path}: missing MatrixMarket header")
        fields = header.strip().lower().split()
        if fields[1:] != ["matrix", "coordinate", "real", "general"]:
            raise FormatError(
                f"{path}: unsupported format {' '.join(fields[1:])!r}; "
                "only 'matrix coordinate real general' is supported"
            )
        size_line = fh.readline()
        while size_line.startswith("%"):
            size_line = fh.readline()
        try:
            n_rows, n_cols, nnz = (int(tok) for tok in size_line.split())
        except ValueError as exc:
            raise FormatError(f"{path}: malformed size line {size_line!r}") from exc
        rows = np.empty(nnz, dtype=np.int64)
        cols = np.empty(nnz, dtype=np.int64)
        vals = np.empty(nnz, dtype=np.float64)
        k = 0
        for line in fh:
            line = line.strip()
            if not line or line.startswith("%"):
                continue
            parts = line.split()
            if len(parts) != 3:
                raise FormatError(f"{path}: malformed entry line {line!r}")
            if k >= nnz:
                raise FormatError(f"{path}: more than {nnz} entries")
            rows[k] = int(parts[0]) - 1
            cols[k] = int(parts[1]) - 1
            vals[k] = float(parts[2])
            k += 1
        if k != nnz:
            raise FormatError(f"{path}: expected {nnz} entries, found {k}")
    try:
        return SparseMatrix.from_coo(n_rows, n_cols, rows, cols, vals)
    except ParameterError as exc:
        raise FormatError(f"{path}: {exc}") from exc


def write_vector(path, x):
    """Write a vector as plain text, one value per line."""
    x = np.asarray(x, dtype=float)
    with open(path, "w", encoding="ascii") as fh:
        for v in x:
            fh.write(f"{v:.16e}\n")


def read_vector(path):
    """Read a plain-text vector (one value per line)."""
    values = []
    with open(path, "r", encoding="ascii") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("%"):
                continue
            try:
                values.append(float(line))
            except ValueError as exc:
                raise FormatError(f"{path}: bad value {line!r}") from exc
    return np.array(values, dtype=float)
