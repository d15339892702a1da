"""Matrix splittings A = M - N and the shift matrix specifications.

Each named splitting pins an (M, N) pair; some also pin the shift matrix
used by the outer iteration. N is always constructed as ``M - A`` so the
splitting identity holds entrywise in floating point, while M follows the
defining formula for the method.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DimensionError, ParameterError
from .sparse import (
    SparseMatrix,
    diag_matrix,
    hermitian_split,
    sparse_scale,
    sparse_sub,
    zeros,
)

__all__ = [
    "KINDS",
    "SplittingKind",
    "Splitting",
    "OmegaSpec",
    "triangular_parts",
    "build_splitting",
    "resolve_omega",
]

KINDS = ("picard", "mn", "nj", "ngs", "nsor", "naor", "hss", "nmn", "drs")


@dataclass(frozen=True)
class SplittingKind:
    """A named splitting with its relaxation parameters.

    ``name`` is one of: picard, mn, nj, ngs, nsor, naor, hss, nmn, drs.
    nsor and naor take ``alpha`` (and naor ``beta``); drs takes ``gamma``.
    """

    name: str
    alpha: float | None = None
    beta: float | None = None
    gamma: float | None = None

    def __post_init__(self):
        if self.name not in KINDS:
            raise ParameterError(f"unknown splitting kind {self.name!r}")
        if self.name == "nsor":
            if self.alpha is None or not 0.0 < self.alpha < 2.0:
                raise ParameterError("nsor requires alpha in (0, 2)")
        elif self.name == "naor":
            if self.alpha is None or self.beta is None:
                raise ParameterError("naor requires alpha and beta")
            if self.alpha == 0.0:
                raise ParameterError("naor requires alpha != 0")
        elif self.name == "drs":
            if self.gamma is None or not 0.0 < self.gamma < 2.0:
                raise ParameterError("drs requires gamma in (0, 2)")

    @property
    def wide_parameters(self):
        """True when naor parameters fall outside the conventional ranges."""
        if self.name != "naor":
            return False
        return not (0.0 < self.alpha < 2.0 and 0.0 <= self.beta <= self.alpha)

    def label(self):
        if self.name == "nsor":
            return f"nsor(alpha={self.alpha:g})"
        if self.name == "naor":
            return f"naor(alpha={self.alpha:g}, beta={self.beta:g})"
        if self.name == "drs":
            return f"drs(gamma={self.gamma:g})"
        return self.name


@dataclass(frozen=True)
class Splitting:
    """An (M, N) pair with M - N = A, plus the shift the method implies.

    ``implied_omega`` is set only for the nmn and drs kinds, whose
    definition fixes the shift matrix.
    """

    kind: SplittingKind
    M: SparseMatrix
    N: SparseMatrix
    implied_omega: SparseMatrix | None = None
    warnings: tuple = ()


@dataclass(frozen=True)
class OmegaSpec:
    """Recipe for the shift matrix.

    kind is one of "zero", "scalar" (omega * I), "scaled" (c * base) or
    "explicit" (a given matrix).
    """

    kind: str
    omega: float | None = None
    scale: float | None = None
    base: SparseMatrix | None = None
    matrix: SparseMatrix | None = None

    @classmethod
    def zero(cls):
        return cls("zero")

    @classmethod
    def scalar(cls, omega):
        return cls("scalar", omega=float(omega))

    @classmethod
    def scaled(cls, c, base):
        return cls("scaled", scale=float(c), base=base)

    @classmethod
    def explicit(cls, matrix):
        return cls("explicit", matrix=matrix)

    def label(self):
        if self.kind == "zero":
            return "0"
        if self.kind == "scalar":
            return f"{self.omega:g}*I"
        if self.kind == "scaled":
            return f"{self.scale:g}*base"
        return "explicit"


def resolve_omega(spec, n):
    """Materialize an OmegaSpec as an n-by-n SparseMatrix."""
    if spec is None:
        return zeros(n)
    if isinstance(spec, SparseMatrix):
        spec = OmegaSpec.explicit(spec)
    if spec.kind == "zero":
        return zeros(n)
    if spec.kind == "scalar":
        return diag_matrix(np.full(n, spec.omega))
    if spec.kind == "scaled":
        if spec.base.shape != (n, n):
            raise DimensionError(
                f"omega base has shape {spec.base.shape}, expected {(n, n)}"
            )
        return sparse_scale(spec.scale, spec.base)
    if spec.kind == "explicit":
        if spec.matrix.shape != (n, n):
            raise DimensionError(
                f"omega matrix has shape {spec.matrix.shape}, expected {(n, n)}"
            )
        return spec.matrix
    raise ParameterError(f"unknown omega kind {spec.kind!r}")


def triangular_parts(A):
    """Split A = D - L - U into diagonal and negated strict triangles.

    D holds the stored diagonal entries of A; L and U are the strictly
    lower and upper triangular parts of -A.
    """
    if not A.is_square:
        raise DimensionError("triangular_parts requires a square matrix")
    rows, cols, vals = A.coo_arrays()
    on_diag = rows == cols
    lower = rows > cols
    upper = rows < cols
    n = A.n_rows
    D = SparseMatrix.from_coo(n, n, rows[on_diag], cols[on_diag], vals[on_diag])
    L = SparseMatrix.from_coo(n, n, rows[lower], cols[lower], -vals[lower])
    U = SparseMatrix.from_coo(n, n, rows[upper], cols[upper], -vals[upper])
    return D, L, U


def build_splitting(A, kind, omega=None):
    """Construct the (M, N) pair for a named splitting of A.

    ``omega`` is consulted only where the method definition needs it:
    nmn requires a resolvable shift; picard accepts only a zero shift;
    drs rejects a caller-supplied shift since it pins its own.
    """
    if not A.is_square:
        raise DimensionError("build_splitting requires a square matrix")
    if isinstance(kind, str):
        kind = SplittingKind(kind)
    n = A.n_rows
    name = kind.name
    warnings = ()

    if name in ("picard", "mn"):
        if name == "picard" and omega is not None:
            resolved = resolve_omega(omega, n)
            if resolved.nnz and resolved.max_abs() != 0.0:
                raise ConfigurationError("picard requires a zero shift matrix")
        return Splitting(kind, M=A, N=zeros(n))

    if name == "drs":
        if omega is not None:
            raise ConfigurationError(
                "drs pins its own shift matrix (2/gamma - 1) * A; do not supply one"
            )
        implied = sparse_scale(2.0 / kind.gamma - 1.0, A)
        return Splitting(kind, M=A, N=zeros(n), implied_omega=implied)

    if name == "nmn":
        if omega is None:
            raise ConfigurationError("nmn requires an explicit shift matrix")
        om = resolve_omega(omega, n)
        M = sparse_scale(0.5, sparse_sub(A, om))
        N = sparse_sub(M, A)
        return Splitting(kind, M=M, N=N, implied_omega=om)

    if name == "hss":
        H, S = hermitian_split(A)
        return Splitting(kind, M=H, N=sparse_scale(-1.0, S))

    D, L, U = triangular_parts(A)
    if name == "nj":
        M = D
    elif name == "ngs":
        M = sparse_sub(D, L)
    elif name == "nsor":
        M = sparse_sub(sparse_scale(1.0 / kind.alpha, D), L)
    elif name == "naor":
        # (1/alpha) * (D - beta L) written as (1/alpha) D - (beta/alpha) L so
        # that beta == alpha collapses to the nsor matrices bit for bit
        M = sparse_sub(
            sparse_scale(1.0 / kind.alpha, D),
            sparse_scale(kind.beta / kind.alpha, L),
        )
        if kind.wide_parameters:
            warnings = (
                f"naor parameters alpha={kind.alpha:g}, beta={kind.beta:g} are "
                "outside the conventional ranges alpha in (0,2), beta in [0,alpha]",
            )
    else:  # pragma: no cover - KINDS is exhaustive
        raise ParameterError(f"unhandled splitting kind {name!r}")
    N = sparse_sub(M, A)
    return Splitting(kind, M=M, N=N, warnings=warnings)
