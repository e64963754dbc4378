"""Dense real linear-algebra primitives.

Matrices are plain 2-D ``float64`` numpy arrays throughout the package.
:func:`as_matrix` is the single entry point that validates them (2-D, non-empty,
finite).  Vectorization uses column stacking, so that

    vec(A X B) = (B^T kron A) vec(X).
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import CapacityError, DimensionError, FormatError, NumericalError

SYMMETRY_RTOL = 1e-10

# 2**28 float64 entries = 2 GiB.
MAX_ENTRIES = 2**28

MM_HEADER = "%%MatrixMarket matrix array real general"


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Validate ``a`` as a finite, non-empty, real 2-D array and return a float copy."""
    arr = np.array(a, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got {arr.ndim}-D")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise DimensionError(f"{name} must have positive row/column counts, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NumericalError(f"{name} contains NaN or Inf entries")
    return arr


def _require_square(a, name="matrix"):
    if a.shape[0] != a.shape[1]:
        raise DimensionError(f"{name} must be square, got {a.shape[0]}x{a.shape[1]}")


def hadamard(a, b) -> np.ndarray:
    """Entrywise product of two equally shaped matrices."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DimensionError(f"hadamard: shapes {a.shape} and {b.shape} differ")
    return a * b


def kron(a, b) -> np.ndarray:
    """Kronecker product; block (i, j) of the result is ``a[i, j] * b``."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    rows = a.shape[0] * b.shape[0]
    cols = a.shape[1] * b.shape[1]
    if rows * cols > MAX_ENTRIES:
        raise CapacityError(
            f"kron: {rows}x{cols} result exceeds the {MAX_ENTRIES}-entry cap"
        )
    return np.kron(a, b)


def vectorize(a) -> np.ndarray:
    """Stack the columns of ``a`` into a single column."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    return a.reshape(-1, 1, order="F")


def unvectorize(v, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vectorize`."""
    v = np.asarray(v, dtype=float)
    if v.ndim == 2 and v.shape[1] != 1:
        raise DimensionError(f"unvectorize: expected a single column, got {v.shape}")
    if v.size != rows * cols:
        raise DimensionError(
            f"unvectorize: {v.size} entries cannot form a {rows}x{cols} matrix"
        )
    return v.reshape(rows, cols, order="F")


def asymmetry(a) -> float:
    a = np.asarray(a, dtype=float)
    if a.shape[0] != a.shape[1]:
        return np.inf
    return float(np.max(np.abs(a - a.T))) if a.size else 0.0


def is_symmetric(a, rtol: float = SYMMETRY_RTOL) -> bool:
    """True when ``max|A - A^T| <= rtol * (1 + max|A|)``."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return asymmetry(a) <= rtol * (1.0 + float(np.max(np.abs(a))))


def symmetrize(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class SpectralSummary:
    spectral_abscissa: float
    spectral_radius: float
    min_symmetric_eigenvalue: Optional[float] = None


def eigenvalues(a) -> np.ndarray:
    a = as_matrix(a)
    _require_square(a, "eigenvalues input")
    try:
        return np.linalg.eigvals(a)
    except np.linalg.LinAlgError as exc:
        # LAPACK does not surface its iteration count; report its hard limit.
        raise NumericalError(
            f"eigensolver did not converge within {30 * max(10, a.shape[0])} QR iterations: {exc}"
        ) from exc


def spectral_summary(a) -> SpectralSummary:
    a = as_matrix(a)
    _require_square(a, "spectral_summary input")
    lam = eigenvalues(a)
    min_sym = None
    if is_symmetric(a):
        min_sym = float(np.linalg.eigvalsh(symmetrize(a))[0])
    return SpectralSummary(
        spectral_abscissa=float(np.max(lam.real)),
        spectral_radius=float(np.max(np.abs(lam))),
        min_symmetric_eigenvalue=min_sym,
    )


def spectral_radius(a) -> float:
    return spectral_summary(a).spectral_radius


def min_symmetric_eigenvalue(a) -> float:
    """Smallest eigenvalue of the symmetric part of ``a`` (a Loewner-order probe)."""
    return float(np.linalg.eigvalsh(symmetrize(a))[0])


def is_stable(a, margin: float = 0.0) -> bool:
    """True iff every eigenvalue of ``a`` has real part below ``-margin``.

    Exact zero eigenvalues rarely come out as exact zeros in floating point,
    so a numerically singular matrix is never reported stable, and real parts
    within roundoff of the imaginary axis count as lying on it.
    """
    if margin < 0:
        raise ValueError("margin must be non-negative")
    a = as_matrix(a)
    _require_square(a, "is_stable input")
    return stability_abscissa(a) < -margin


def stability_abscissa(a) -> float:
    """Spectral abscissa with roundoff-level values snapped to zero."""
    a = as_matrix(a)
    _require_square(a, "stability input")
    abscissa = spectral_summary(a).spectral_abscissa
    eps = np.finfo(float).eps
    sv = np.linalg.svd(a, compute_uv=False)
    n = a.shape[0]
    if sv[-1] <= n * eps * max(sv[0], 1.0):
        return max(abscissa, 0.0)
    if abs(abscissa) <= 64 * eps * max(sv[0], 1.0):
        return 0.0
    return abscissa


# -- Matrix Market (dense array format) ---------------------------------------


def write_matrix_market(path, a, comment: Optional[str] = None) -> None:
    """Write ``a`` in Matrix Market array format with round-trip precision."""
    a = as_matrix(a)
    lines = [MM_HEADER]
    if comment:
        lines.extend(f"% {c}" for c in comment.splitlines())
    lines.append(f"{a.shape[0]} {a.shape[1]}")
    lines.extend(repr(float(x)) for x in a.flatten(order="F"))
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix_market(path) -> np.ndarray:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise FormatError(f"cannot read file ({exc.strerror})", path) from exc
    lines = text.splitlines()
    if not lines or lines[0].strip().lower() != MM_HEADER.lower():
        raise FormatError(f"expected header '{MM_HEADER}'", path, 1)
    shape = None
    values = []
    for lineno, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("%"):
            continue
        if shape is None:
            parts = line.split()
            try:
                shape = tuple(int(p) for p in parts)
            except ValueError:
                raise FormatError(f"bad size line {line!r}", path, lineno) from None
            if len(shape) != 2 or min(shape) < 1:
                raise FormatError(f"bad size line {line!r}", path, lineno)
            continue
        try:
            x = float(line)
        except ValueError:
            raise FormatError(f"bad entry {line!r}", path, lineno) from None
        if not np.isfinite(x):
            raise FormatError(f"non-finite entry {line!r}", path, lineno)
        values.append(x)
    if shape is None:
        raise FormatError("missing size line", path, len(lines))
    if len(values) != shape[0] * shape[1]:
        raise FormatError(
            f"expected {shape[0] * shape[1]} entries, found {len(values)}",
            path,
            len(lines),
        )
    return np.array(values, dtype=float).reshape(shape, order="F")
