"""Continuous Lyapunov equation ``A X + X A^T + Q = 0``.

Sign convention: the API takes the *source* ``Q`` on the left-hand side.  The
form ``A X + X A^T = B`` used in ordering statements maps to ``Q = -B``; in
particular ``Q >= 0`` (PSD) with stable ``A`` gives ``X >= 0``.
"""
from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import DimensionError, NumericalError, StabilityError, SymmetryError
from .linalg import as_matrix, asymmetry, is_symmetric, stability_abscissa, symmetrize

RESIDUAL_TOL = 1e-10


def lyap_residual(a, x, q) -> float:
    """``||A X + X A^T + Q||_F / (1 + ||Q||_F)``."""
    a, x, q = (np.asarray(m, dtype=float) for m in (a, x, q))
    n = a.shape[0]
    if a.shape != (n, n) or x.shape != (n, n) or q.shape != (n, n):
        raise DimensionError(
            f"lyap_residual: shapes A{a.shape}, X{x.shape}, Q{q.shape} do not conform"
        )
    r = a @ x + x @ a.T + q
    return float(np.linalg.norm(r) / (1.0 + np.linalg.norm(q)))


def _backward_error(a, x, q):
    # Residual scaled by the size of the terms that produced it; unlike
    # lyap_residual this does not punish large but accurate solutions.
    r = a @ x + x @ a.T + q
    scale = 1.0 + np.linalg.norm(q) + 2.0 * np.linalg.norm(a) * np.linalg.norm(x)
    return float(np.linalg.norm(r) / scale)


def _check_inputs(a, q):
    a = as_matrix(a, "A")
    q = as_matrix(q, "Q")
    n = a.shape[0]
    if a.shape != (n, n):
        raise DimensionError(f"A must be square, got {a.shape}")
    if q.shape != (n, n):
        raise DimensionError(f"Q has shape {q.shape}, expected {(n, n)}")
    if not is_symmetric(q):
        raise SymmetryError(
            f"Q is not symmetric (max |Q - Q^T| = {asymmetry(q):.3e})", asymmetry(q)
        )
    abscissa = stability_abscissa(a)
    if not abscissa < 0.0:
        raise StabilityError(
            f"A is not stable: spectral abscissa {abscissa:.6e} >= 0", abscissa
        )
    return a, q


def lyap_solve_vectorized(a, q) -> np.ndarray:
    """Solve via the ``N^2 x N^2`` system ``(I kron A + A kron I) vec(X) = -vec(Q)``.

    O(N^6) work; kept as an independent reference path for small N.
    """
    a, q = _check_inputs(a, q)
    n = a.shape[0]
    eye = np.eye(n)
    op = np.kron(eye, a) + np.kron(a, eye)
    vec_x = np.linalg.solve(op, -q.reshape(-1, order="F"))
    return symmetrize(vec_x.reshape(n, n, order="F"))


def lyap_solve(a, q, method: str = "schur", tol: float = RESIDUAL_TOL) -> np.ndarray:
    """Solve ``A X + X A^T + Q = 0`` for symmetric ``X``.

    Parameters
    ----------
    a : (N, N) array_like
        Strictly stable state matrix.
    q : (N, N) array_like
        Symmetric source term.
    method : {'schur', 'vectorized'}
        Bartels-Stewart (real Schur form) or the dense Kronecker solve.
    tol : float
        Accepted backward error of the returned solution.

    Returns
    -------
    x : (N, N) ndarray
        Symmetrized solution.

    Raises
    ------
    StabilityError
        If ``A`` has an eigenvalue with non-negative real part.
    SymmetryError
        If ``Q`` is not symmetric within tolerance.
    NumericalError
        If the achieved backward error exceeds ``tol``.
    """
    if method == "vectorized":
        x = lyap_solve_vectorized(a, q)
        a, q = np.asarray(a, dtype=float), np.asarray(q, dtype=float)
    elif method == "schur":
        a, q = _check_inputs(a, q)
        x = symmetrize(scipy.linalg.solve_continuous_lyapunov(a, -q))
    else:
        raise ValueError(f"unknown method {method!r}")
    if not np.all(np.isfinite(x)):
        raise NumericalError("Lyapunov solution is not finite", np.inf)
    err = _backward_error(a, x, q)
    if err > tol:
        raise NumericalError(
            f"Lyapunov residual {err:.3e} exceeds tolerance {tol:.1e}", err
        )
    return x
