"""Outer iterations for Ax - B|x| - b = 0 over a matrix splitting.

``nms_solve`` runs the exact fixed-point iteration

    x_{k+1} = (Omega + M)^{-1} [ (Omega + N) x_k + B |x_k| + b ]

with a pre-computed LU factorization of Omega + M. ``inms_solve`` replaces
the exact solve by LSQR run to the per-step residual target
``theta_k * norm(F(x_k))``, warm-started at the current iterate.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DivergenceError, ParameterError
from .linalg import lsqr, lu_factorize
from .sparse import abs_vec, as_vector, sparse_add, spmv
from .splittings import resolve_omega

__all__ = [
    "ThetaSchedule",
    "SolverConfig",
    "SolveReport",
    "residual",
    "relative_res",
    "theta_at",
    "nms_solve",
    "inms_solve",
    "verify_inexact_condition",
]

# Solves abort once the relative residual exceeds this.
_DIVERGENCE_GUARD = 1e12


@dataclass(frozen=True)
class ThetaSchedule:
    """Per-step inexactness tolerance.

    Either a constant theta in [0, 1), or the practical schedule
    ``theta_k = min(0.5, 1 / max(1, k - l_max))``.
    """

    kind: str  # "constant" | "paper"
    theta: float = 0.0
    l_max: int = 10

    def __post_init__(self):
        if self.kind == "constant":
            if not 0.0 <= self.theta < 1.0:
                raise ParameterError("constant theta must lie in [0, 1)")
        elif self.kind != "paper":
            raise ParameterError(f"unknown theta schedule {self.kind!r}")

    @classmethod
    def constant(cls, theta):
        return cls("constant", theta=float(theta))

    @classmethod
    def paper(cls, l_max=10):
        return cls("paper", l_max=int(l_max))


def theta_at(schedule, k):
    """Evaluate the schedule at outer step k (k = 0 for the first step)."""
    if k < 0:
        raise ParameterError("step index must be nonnegative")
    if schedule.kind == "constant":
        return schedule.theta
    return min(0.5, 1.0 / max(1, k - schedule.l_max))


@dataclass(frozen=True)
class SolverConfig:
    """Stopping rule, start vector, and inner-solver selection.

    ``x0`` is either a vector or the token "alt10" for (1,0,1,0,...).
    ``max_inner`` of None means ceil(10 * sqrt(n)) for the lsqr inner solver.
    """

    tol: float = 1e-6
    k_max: int = 500
    x0: object = "alt10"
    theta: ThetaSchedule = field(default_factory=ThetaSchedule.paper)
    inner: str = "direct"  # "direct" | "lsqr"
    max_inner: int | None = None
    record_history: bool = True

    def __post_init__(self):
        if self.tol <= 0:
            raise ParameterError("tol must be positive")
        if self.k_max < 1:
            raise ParameterError("k_max must be at least 1")
        if self.inner not in ("direct", "lsqr"):
            raise ParameterError(f"unknown inner solver {self.inner!r}")


@dataclass
class SolveReport:
    """Everything observable about one solve."""

    converged: bool
    iterations: int
    final_res: float
    res_history: np.ndarray
    inner_iters: np.ndarray
    wall_time_s: float
    x: np.ndarray
    warnings: tuple = ()


def residual(problem, x):
    """Nonlinear residual F(x) = A x - B |x| - b."""
    x = as_vector(x, problem.A.n_cols, "x")
    return spmv(problem.A, x) - spmv(problem.B, np.abs(x)) - problem.b


def relative_res(problem, x):
    """RES(x) = norm(F(x)) / norm(b)."""
    nb = float(np.linalg.norm(problem.b))
    if nb == 0.0:
        raise ParameterError(
            "b is zero; the relative residual is undefined, use norm(residual(...))"
        )
    return float(np.linalg.norm(residual(problem, x))) / nb


def expand_x0(x0, n):
    """Turn a start-vector token or array into a concrete vector."""
    if isinstance(x0, str):
        if x0 == "alt10":
            v = np.zeros(n)
            v[0::2] = 1.0
            return v
        raise ConfigurationError(f"unknown start vector token {x0!r}")
    return as_vector(x0, n, "x0").copy()


def _solver_omega(splitting, omega, n):
    """Resolve the shift matrix, honoring splittings that pin their own."""
    if splitting.implied_omega is not None:
        if omega is not None:
            raise ConfigurationError(
                f"splitting {splitting.kind.name!r} pins its own shift matrix; "
                "do not supply one"
            )
        return splitting.implied_omega
    om = resolve_omega(omega, n)
    if splitting.kind.name == "picard" and om.max_abs() != 0.0:
        raise ConfigurationError("picard requires a zero shift matrix")
    return om


def _guard(res, k):
    if res > _DIVERGENCE_GUARD:
        raise DivergenceError(
            f"relative residual {res:.3e} exceeded {_DIVERGENCE_GUARD:.0e} "
            f"at outer step {k}"
        )
    return res


def nms_solve(problem, splitting, omega=None, config=None):
    """Exact Newton-based matrix-splitting iteration.

    Pre-factorizes Omega + M once and iterates until the relative residual
    drops to ``config.tol`` or ``config.k_max`` steps are taken. Requires
    ``config.inner == "direct"``.
    """
    config = config or SolverConfig()
    if config.inner != "direct":
        raise ConfigurationError("nms_solve requires config.inner == 'direct'")
    n = problem.A.n_rows
    om = _solver_omega(splitting, omega, n)
    OM = sparse_add(om, splitting.M)
    ON = sparse_add(om, splitting.N)
    B, b = problem.B, problem.b
    nb = float(np.linalg.norm(b))
    if nb == 0.0:
        raise ParameterError("b is zero; the RES stopping rule is undefined")

    t0 = time.perf_counter()
    factor = lu_factorize(OM)
    x = expand_x0(config.x0, n)
    res = _guard(float(np.linalg.norm(residual(problem, x))) / nb, 0)
    history = [res]
    k = 0
    while res > config.tol and k < config.k_max:
        x = factor.solve(spmv(ON, x) + spmv(B, np.abs(x)) + b)
        k += 1
        res = _guard(float(np.linalg.norm(residual(problem, x))) / nb, k)
        history.append(res)
    elapsed = time.perf_counter() - t0
    return SolveReport(
        converged=res <= config.tol,
        iterations=k,
        final_res=res,
        res_history=np.array(history) if config.record_history else np.empty(0),
        inner_iters=np.empty(0, dtype=int),
        wall_time_s=elapsed,
        x=x,
        warnings=splitting.warnings,
    )


def inms_solve(problem, splitting, omega=None, config=None):
    """Inexact Newton-based matrix-splitting iteration.

    At outer step k the linear system ``(Omega + M) y = c_k`` with
    ``c_k = (Omega + N) x_k + B |x_k| + b`` is solved by LSQR, warm-started
    at ``x_k``, only until its residual drops below
    ``theta_k * norm(F(x_k))``. Requires ``config.inner == "lsqr"``.
    """
    config = config or SolverConfig(inner="lsqr")
    if config.inner != "lsqr":
        raise ConfigurationError("inms_solve requires config.inner == 'lsqr'")
    n = problem.A.n_rows
    om = _solver_omega(splitting, omega, n)
    OM = sparse_add(om, splitting.M)
    ON = sparse_add(om, splitting.N)
    B, b = problem.B, problem.b
    nb = float(np.linalg.norm(b))
    if nb == 0.0:
        raise ParameterError("b is zero; the RES stopping rule is undefined")
    max_inner = config.max_inner
    if max_inner is None:
        max_inner = int(math.ceil(10.0 * math.sqrt(n)))

    t0 = time.perf_counter()
    x = expand_x0(config.x0, n)
    F = residual(problem, x)
    f_norm = float(np.linalg.norm(F))
    res = _guard(f_norm / nb, 0)
    history = [res]
    inner_iters = []
    warnings = list(splitting.warnings)
    k = 0
    while res > config.tol and k < config.k_max:
        if f_norm == 0.0:
            break  # x is an exact solution
        theta_k = theta_at(config.theta, k)
        target = theta_k * f_norm
        c = spmv(ON, x) + spmv(B, np.abs(x)) + b
        out = lsqr(OM, c, target, max_inner, warm_start=x)
        if out.stop_reason == "max_iter":
            warnings.append(
                f"inner lsqr hit max_iter={max_inner} at outer step {k} "
                f"(residual {out.residual_norm:.3e}, target {target:.3e})"
            )
        elif target > 0.0 and out.residual_norm > target:
            warnings.append(
                f"inner lsqr stopped ({out.stop_reason}) above target at outer "
                f"step {k} (residual {out.residual_norm:.3e}, target {target:.3e})"
            )
        x = out.x
        inner_iters.append(out.iterations)
        k += 1
        F = residual(problem, x)
        f_norm = float(np.linalg.norm(F))
        res = _guard(f_norm / nb, k)
        history.append(res)
    elapsed = time.perf_counter() - t0
    return SolveReport(
        converged=res <= config.tol,
        iterations=k,
        final_res=res,
        res_history=np.array(history) if config.record_history else np.empty(0),
        inner_iters=np.array(inner_iters, dtype=int),
        wall_time_s=elapsed,
        x=x,
        warnings=tuple(warnings),
    )


def verify_inexact_condition(problem, splitting, omega, x_prev, x_next, theta_k, f_norm):
    """Recompute the inexact-step inequality from scratch.

    Returns True when
    ``norm((Omega+M) x_next - [(Omega+N) x_prev + B |x_prev| + b])
    <= theta_k * f_norm`` with ``f_norm = norm(F(x_prev))`` supplied by the
    caller.
    """
    n = problem.A.n_rows
    om = _solver_omega(splitting, omega, n)
    OM = sparse_add(om, splitting.M)
    ON = sparse_add(om, splitting.N)
    c = spmv(ON, x_prev) + spmv(problem.B, abs_vec(x_prev)) + problem.b
    lhs = float(np.linalg.norm(spmv(OM, x_next) - c))
    return lhs <= theta_k * f_norm
