"""Reachability Gramian equation: residual maps and the Volterra cascade.

The Gramian ``X`` of a Hadamard system satisfies

    Q(X) = A X + X A^T + D + M X M^T + (G X G^T) * (F X F^T) = 0.

Expanding ``X = X_1 + X_2 + ...`` by Volterra order gives a chain of Lyapunov
equations, each driven by lower-order terms only:

    A X_1 + X_1 A^T + D = 0
    A X_2 + X_2 A^T + M X_1 M^T = 0
    A X_i + X_i A^T + sum_{j=1}^{i-2} (G X_j G^T) * (F X_{i-1-j} F^T)
                    + M X_{i-1} M^T = 0,        i >= 3.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .errors import DimensionError, SymmetryError
from .linalg import as_matrix, asymmetry, is_symmetric, symmetrize
from .lyapunov import lyap_solve
from .systems import QbshSystem

SERIES_STOP_RTOL = 1e-14


def _check_x(x, n):
    x = as_matrix(x, "X")
    if x.shape != (n, n):
        raise DimensionError(f"X has shape {x.shape}, expected {(n, n)}")
    if not is_symmetric(x):
        raise SymmetryError(f"X is not symmetric (max |X - X^T| = {asymmetry(x):.3e})", asymmetry(x))
    return x


def quadratic_form(sys: QbshSystem, x, y=None) -> np.ndarray:
    """``(G X G^T) * (F Y F^T)``; ``Y`` defaults to ``X``."""
    y = x if y is None else y
    g, f = sys.g_mat, sys.f_mat
    return (g @ x @ g.T) * (f @ y @ f.T)


def qbeh_residual(x, sys: QbshSystem) -> np.ndarray:
    """Evaluate ``Q(X)`` in Hadamard form (symmetrized)."""
    x = _check_x(x, sys.n_state)
    a, m = sys.a_mat, sys.m_mat
    r = a @ x + x @ a.T + sys.d_mat + m @ x @ m.T + quadratic_form(sys, x)
    return symmetrize(r)


def kron_residual(x, sys: QbshSystem, h) -> np.ndarray:
    """Evaluate ``A X + X A^T + H (X kron X) H^T + M X M^T + D``.

    ``H`` is the ``N x N^2`` Kronecker-form coefficient.  The ``N^2 x N^2``
    product ``X kron X`` is never formed: ``H (X kron X) H^T`` has entries
    ``h_i (X kron X) h_j^T = tr(X^T H_i X H_j^T)`` with ``H_i`` the ``N x N``
    reshape of row ``i``.
    """
    n = sys.n_state
    x = _check_x(x, n)
    h = as_matrix(h, "H")
    if h.shape != (n, n * n):
        raise DimensionError(f"H has shape {h.shape}, expected {(n, n * n)}")
    # row-major reshape: H_i[p, q] multiplies x_p x_q
    hi = h.reshape(n, n, n)
    # (X kron X)[(p,q),(r,s)] = X[p,r] X[q,s]
    quad = np.einsum("ipq,pr,qs,jrs->ij", hi, x, x, hi, optimize=True)
    a, m = sys.a_mat, sys.m_mat
    return a @ x + x @ a.T + quad + m @ x @ m.T + sys.d_mat


def kron_residual_dense(x, sys: QbshSystem, h) -> np.ndarray:
    """Same as :func:`kron_residual` but through the explicit ``X kron X``."""
    from .linalg import kron

    n = sys.n_state
    x = _check_x(x, n)
    h = as_matrix(h, "H")
    if h.shape != (n, n * n):
        raise DimensionError(f"H has shape {h.shape}, expected {(n, n * n)}")
    a, m = sys.a_mat, sys.m_mat
    return a @ x + x @ a.T + h @ kron(x, x) @ h.T + m @ x @ m.T + sys.d_mat


def relative_residual(x, sys: QbshSystem) -> float:
    """``||Q(X)||_F / (1 + ||D||_F)``."""
    return float(np.linalg.norm(qbeh_residual(x, sys)) / (1.0 + np.linalg.norm(sys.d_mat)))


@dataclass(frozen=True, eq=False)
class SeriesReport:
    terms: List[np.ndarray]
    partial_sums: List[np.ndarray]
    term_norms: List[float]
    truncation_order: int
    diverging: bool = False
    stop_reason: str = "k_max"
    residual_norms: List[float] = field(default_factory=list)

    @property
    def gramian(self) -> np.ndarray:
        return self.partial_sums[-1]


def _decay_ratio(norms, window=5):
    tail = [v for v in norms if v > 0.0][-window:]
    if len(tail) < 2:
        return 0.0
    return float((tail[-1] / tail[0]) ** (1.0 / (len(tail) - 1)))


def gramian_series(sys: QbshSystem, k_max: int, overflow: float = 1e100) -> SeriesReport:
    """Sum the Volterra cascade up to order ``k_max``.

    Stops early once two consecutive terms are negligible (odd/even orders
    can vanish individually, e.g. every even term when ``M = 0``), or when a
    term exceeds ``overflow``.  Growth is reported through ``diverging``
    rather than raised.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    a, m = sys.a_mat, sys.m_mat
    g, f = sys.g_mat, sys.f_mat
    terms, sums, norms, residuals = [], [], [], []
    gx, fx = [], []  # G X_j G^T and F X_j F^T, cached per order
    stop = "k_max"
    threshold = None
    total = np.zeros_like(a)
    for i in range(1, k_max + 1):
        if i == 1:
            src = sys.d_mat
        else:
            src = m @ terms[-1] @ m.T
            if i >= 3:
                for j in range(1, i - 1):
                    src = src + gx[j - 1] * fx[i - 2 - j]
            src = symmetrize(src)
        xi = lyap_solve(a, src)
        terms.append(xi)
        gx.append(g @ xi @ g.T)
        fx.append(f @ xi @ f.T)
        total = total + xi
        sums.append(total.copy())
        nrm = float(np.linalg.norm(xi))
        norms.append(nrm)
        residuals.append(relative_residual(total, sys))
        if threshold is None:
            threshold = SERIES_STOP_RTOL * (1.0 + nrm)
        if not np.isfinite(nrm) or nrm > overflow:
            stop = "overflow"
            break
        if i >= 2 and norms[-1] < threshold and norms[-2] < threshold:
            stop = "negligible"
            break
    diverging = stop == "overflow" or (stop == "k_max" and _decay_ratio(norms) >= 1.0)
    return SeriesReport(
        terms=terms,
        partial_sums=sums,
        term_norms=norms,
        truncation_order=len(terms),
        diverging=diverging,
        stop_reason=stop,
        residual_norms=residuals,
    )
