"""Fixed-point iteration for the Gramian equation and its convergence theory.

Each step solves one Lyapunov equation,

    A X_{k+1} + X_{k+1} A^T + (G X_k G^T) * (F X_k F^T) + M X_k M^T + D = 0.

From ``X_0 = 0`` the iterates increase in the Loewner order.  From a
dominating start (``X_0 >= Z``, ``Q(X_0) <= 0`` and ``Q(Z) >= 0``) they
decrease and stay above ``Z``.  Near the limit the error contracts like the
spectral radius of the linearized map

    Delta -> L^{-1}( -M Delta M^T - (G X G^T) * (F Delta F^T) - (G Delta G^T) * (F X F^T) ),

where ``L(X) = A X + X A^T``.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .errors import (
    DimensionError,
    DivergenceError,
    NumericalError,
    PreconditionError,
    SymmetryError,
)
from .gramian import qbeh_residual, quadratic_form, relative_residual
from .linalg import (
    as_matrix,
    asymmetry,
    is_symmetric,
    kron,
    min_symmetric_eigenvalue,
    spectral_radius,
    symmetrize,
    vectorize,
)
from .lyapunov import lyap_solve
from .systems import QbshSystem

log = logging.getLogger(__name__)

LOEWNER_TOL = 1e-10
DIVERGENCE_FACTOR = 1e6
RATE_WINDOW = 10
# Largest N for which the N^2 x N^2 derivative matrix is built automatically.
FRECHET_AUTO_MAX_N = 30


class StartMode(enum.Enum):
    ZERO_START = "zero_start"
    SUPPLIED_START = "supplied_start"


@dataclass
class SolveOptions:
    tolerance: float = 1e-10
    max_iterations: int = 10000
    start_mode: StartMode = StartMode.ZERO_START
    x0: Optional[np.ndarray] = None
    check_theorem_preconditions: bool = False
    z_matrix: Optional[np.ndarray] = None
    compute_frechet_rho: bool = True

    def __post_init__(self):
        self.start_mode = StartMode(self.start_mode)
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.start_mode is StartMode.SUPPLIED_START and self.x0 is None:
            raise ValueError("supplied_start requires x0")
        if self.check_theorem_preconditions and self.start_mode is not StartMode.SUPPLIED_START:
            raise ValueError("theorem checks need supplied_start with x0 and z_matrix")


@dataclass(eq=False)
class SolveReport:
    solution: np.ndarray
    iterations: int
    residual_history: List[float]
    converged: bool
    rate_estimate: Optional[float] = None
    frechet_rho: Optional[float] = None
    # per step k: X_k - X_{k+1} >= 0 (theorem mode) / X_{k+1} - X_k >= 0 (zero start)
    monotone_decreasing_psd: List[bool] = field(default_factory=list)
    monotone_increasing_psd: List[bool] = field(default_factory=list)
    above_z_psd: List[bool] = field(default_factory=list)
    step_min_eigs: List[float] = field(default_factory=list)
    z_min_eigs: List[float] = field(default_factory=list)
    step_norms: List[float] = field(default_factory=list)
    preconditions: dict = field(default_factory=dict)


def _symmetric_input(x, n, name):
    x = as_matrix(x, name)
    if x.shape != (n, n):
        raise DimensionError(f"{name} has shape {x.shape}, expected {(n, n)}")
    if not is_symmetric(x):
        raise SymmetryError(f"{name} is not symmetric (max asymmetry {asymmetry(x):.3e})", asymmetry(x))
    return symmetrize(x)


def fixed_point_step(sys: QbshSystem, x) -> np.ndarray:
    """One application of the iteration map."""
    src = quadratic_form(sys, x) + sys.m_mat @ x @ sys.m_mat.T + sys.d_mat
    return lyap_solve(sys.a_mat, symmetrize(src))


def check_preconditions(sys: QbshSystem, x0, z) -> dict:
    """Verify ``Q(Z) >= 0``, ``Q(X_0) <= 0`` and ``X_0 >= Z``; raise on the first failure."""
    checks = {
        "Q(Z) >= 0": min_symmetric_eigenvalue(qbeh_residual(z, sys)),
        "Q(X0) <= 0": min_symmetric_eigenvalue(-qbeh_residual(x0, sys)),
        "X0 >= Z": min_symmetric_eigenvalue(x0 - z),
        "Z >= 0": min_symmetric_eigenvalue(z),
    }
    for name, lam in checks.items():
        if lam < -LOEWNER_TOL:
            raise PreconditionError(
                f"precondition {name} violated: min eigenvalue {lam:.3e}", name, lam
            )
    return checks


def empirical_rate(step_norms, window: int = RATE_WINDOW, floor: Optional[float] = None) -> Optional[float]:
    """Geometric mean of successive step-size ratios over the last ``window`` ratios.

    Steps at or below ``floor`` are roundoff and are excluded.
    """
    d = np.asarray(step_norms, dtype=float)
    if floor is not None:
        d = d[d > floor]
    else:
        d = d[d > 0]
    if d.size < 2:
        return None
    tail = d[-(window + 1):]
    return float((tail[-1] / tail[0]) ** (1.0 / (tail.size - 1)))


def fixed_point_solve(sys: QbshSystem, opts: Optional[SolveOptions] = None) -> SolveReport:
    """Run the fixed-point iteration until the relative residual meets tolerance.

    The residual is ``||Q(X_k)||_F / (1 + ||D||_F)``.  Hitting ``max_iterations``
    returns the last iterate with ``converged=False``.  A residual that grows to
    ``1e6`` times its running minimum raises :class:`DivergenceError`.
    """
    opts = opts or SolveOptions()
    n = sys.n_state
    if opts.start_mode is StartMode.SUPPLIED_START:
        x = _symmetric_input(opts.x0, n, "X0")
    else:
        x = np.zeros((n, n))
    z = None
    report = SolveReport(solution=x, iterations=0, residual_history=[], converged=False)
    theorem_mode = opts.check_theorem_preconditions and opts.z_matrix is not None and opts.x0 is not None
    if opts.check_theorem_preconditions and not theorem_mode:
        raise ValueError("theorem checks need both x0 and z_matrix")
    if theorem_mode:
        z = _symmetric_input(opts.z_matrix, n, "Z")
        report.preconditions = check_preconditions(sys, x, z)
        report.z_min_eigs.append(min_symmetric_eigenvalue(x - z))
        report.above_z_psd.append(report.z_min_eigs[-1] >= -LOEWNER_TOL)

    best = np.inf
    for k in range(1, opts.max_iterations + 1):
        x_new = fixed_point_step(sys, x)
        diff = x - x_new
        report.step_norms.append(float(np.linalg.norm(diff)))
        lam = min_symmetric_eigenvalue(diff)
        if theorem_mode:
            report.step_min_eigs.append(lam)
            report.monotone_decreasing_psd.append(lam >= -LOEWNER_TOL)
            report.z_min_eigs.append(min_symmetric_eigenvalue(x_new - z))
            report.above_z_psd.append(report.z_min_eigs[-1] >= -LOEWNER_TOL)
        elif opts.start_mode is StartMode.ZERO_START:
            lam_up = min_symmetric_eigenvalue(-diff)
            report.step_min_eigs.append(lam_up)
            report.monotone_increasing_psd.append(lam_up >= -LOEWNER_TOL)
        x = x_new
        res = relative_residual(x, sys)
        report.residual_history.append(res)
        report.iterations = k
        best = min(best, res)
        if res <= opts.tolerance:
            report.converged = True
            break
        if not np.isfinite(res) or res > DIVERGENCE_FACTOR * max(best, np.finfo(float).tiny):
            raise DivergenceError(
                f"residual grew from {best:.3e} to {res:.3e} at iteration {k}",
                report.residual_history,
            )
    report.solution = x
    if not report.converged:
        log.warning("fixed point iteration stopped after %d iterations, residual %.3e",
                    report.iterations, report.residual_history[-1])
    floor = 1e3 * np.finfo(float).eps * (1.0 + float(np.linalg.norm(x)))
    report.rate_estimate = empirical_rate(report.step_norms, floor=floor)
    if report.converged and opts.compute_frechet_rho and n <= FRECHET_AUTO_MAX_N:
        report.frechet_rho = convergence_rate_check(sys, report)
    return report


def frechet_operator_matrix(sys: QbshSystem, x) -> np.ndarray:
    """``N^2 x N^2`` matrix of the iteration map's derivative at ``X`` (column stacking).

    ``-(I kron A + A kron I)^{-1} (M kron M + Diag(vec F X F^T)(G kron G)
    + Diag(vec G X G^T)(F kron F))``.  The overall sign does not change the
    spectral radius.
    """
    n = sys.n_state
    x = _symmetric_input(x, n, "X")
    a, m, g, f = sys.a_mat, sys.m_mat, sys.g_mat, sys.f_mat
    eye = np.eye(n)
    l_mat = kron(eye, a) + kron(a, eye)
    m_mat = (
        kron(m, m)
        + vectorize(f @ x @ f.T) * kron(g, g)
        + vectorize(g @ x @ g.T) * kron(f, f)
    )
    try:
        return -np.linalg.solve(l_mat, m_mat)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"Lyapunov operator is singular: {exc}") from exc


def convergence_rate_check(sys: QbshSystem, report: SolveReport) -> float:
    """Spectral radius of the linearized iteration map at the computed solution."""
    if not report.converged:
        raise ValueError("report is not converged")
    return spectral_radius(frechet_operator_matrix(sys, report.solution))
