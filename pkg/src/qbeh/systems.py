"""Quadratic bilinear systems with a Hadamard-product nonlinearity.

A system is the data of

    x' = A x + (G x) * (F x) + M x u + B u,    y = C x,    x(0) = 0,

where ``*`` is the entrywise product.  ``D = B B^T`` is derived, never stored.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import DimensionError, FormatError, ValidationError
from .linalg import as_matrix, read_matrix_market, write_matrix_market

MANIFEST = "manifest.json"
BLOCKS = ("A", "F", "G", "M", "B", "C")


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class QbshSystem:
    a_mat: np.ndarray
    f_mat: np.ndarray
    g_mat: np.ndarray
    m_mat: np.ndarray
    b_vec: np.ndarray
    c_vec: np.ndarray
    provenance: Optional[dict] = None
    n_state: int = field(init=False)
    d_mat: np.ndarray = field(init=False)

    def __post_init__(self):
        a = as_matrix(self.a_mat, "A")
        n = a.shape[0]
        shapes = {"A": (n, n), "F": (n, n), "G": (n, n), "M": (n, n), "B": (n, 1), "C": (1, n)}
        blocks = {}
        for name, attr in zip(BLOCKS, ("a_mat", "f_mat", "g_mat", "m_mat", "b_vec", "c_vec")):
            raw = np.asarray(getattr(self, attr), dtype=float)
            if name == "B" and raw.ndim == 1:
                raw = raw.reshape(-1, 1)
            if name == "C" and raw.ndim == 1:
                raw = raw.reshape(1, -1)
            m = as_matrix(raw, name)
            if m.shape != shapes[name]:
                raise DimensionError(
                    f"block {name} has shape {m.shape}, expected {shapes[name]} for N={n}"
                )
            blocks[attr] = _frozen(m)
            object.__setattr__(self, attr, blocks[attr])
        object.__setattr__(self, "n_state", n)
        b = blocks["b_vec"]
        object.__setattr__(self, "d_mat", _frozen(b @ b.T))

    def quadratic_term(self, x):
        """``(G x) * (F x)`` for a state vector (or a batch of column states)."""
        return (self.g_mat @ x) * (self.f_mat @ x)

    def rhs(self, x, u):
        return self.a_mat @ x + self.quadratic_term(x) + (self.m_mat @ x) * u + self.b_vec[:, 0] * u

    def replace(self, **blocks):
        """Copy with some blocks swapped, e.g. ``sys.replace(f_mat=0 * sys.f_mat)``."""
        kw = dict(
            a_mat=self.a_mat, f_mat=self.f_mat, g_mat=self.g_mat, m_mat=self.m_mat,
            b_vec=self.b_vec, c_vec=self.c_vec, provenance=None,
        )
        kw.update(blocks)
        return QbshSystem(**kw)

    def linear_part(self):
        z = np.zeros_like(self.a_mat)
        return self.replace(f_mat=z, m_mat=z)

    def blocks(self) -> dict:
        return {
            "A": self.a_mat, "F": self.f_mat, "G": self.g_mat,
            "M": self.m_mat, "B": self.b_vec, "C": self.c_vec,
        }


def scalar_system(a, g=1.0, f=1.0, m=0.0, b=1.0, c=1.0) -> QbshSystem:
    """One-state system; handy for closed-form checks."""
    return QbshSystem(
        a_mat=[[a]], f_mat=[[f]], g_mat=[[g]], m_mat=[[m]], b_vec=[[b]], c_vec=[[c]]
    )


@dataclass(frozen=True)
class CircuitParams:
    n_nodes: int
    diode_coefficient: float

    def __post_init__(self):
        if int(self.n_nodes) != self.n_nodes or self.n_nodes < 3:
            raise ValidationError(f"n_nodes must be an integer >= 3, got {self.n_nodes}")
        if not (np.isfinite(self.diode_coefficient) and self.diode_coefficient > 0):
            raise ValidationError(
                f"diode_coefficient must be positive, got {self.diode_coefficient}"
            )


def circuit_linear_blocks(n: int):
    """Return ``(A1, A2, b_v)`` of the v-equations ``v' = A1 v + A2 w + b_v u``.

    The v-block is ordered ``(v_1, v_12, v_23, ..., v_{n-1,n})`` and ``w_p`` is
    the shifted exponential ``exp(a v_p) - 1`` of the p-th v-variable.  All
    additive constants are dropped (the system is taken about its zero
    equilibrium).  With constants kept, the second row would carry an extra
    ``+1``; the first and last rows and the interior rows balance exactly.
    """
    a1 = np.zeros((n, n))
    a2 = np.zeros((n, n))
    a1[0, :2] = [-1.0, -1.0]
    a2[0, :2] = [-1.0, -1.0]
    a1[1, :3] = [-1.0, -2.0, 1.0]
    a2[1, :3] = [-1.0, -1.0, 1.0]
    for p in range(2, n - 1):
        a1[p, p - 1:p + 2] = [1.0, -2.0, 1.0]
        a2[p, p - 1:p + 2] = [1.0, -2.0, 1.0]
    # last row; for n == 3 it coincides with the v_23 row referenced above
    a1[n - 1, n - 2:] = [1.0, -2.0]
    a2[n - 1, n - 2:] = [1.0, -2.0]
    b_v = np.zeros(n)
    b_v[:2] = 1.0
    return a1, a2, b_v


def build_transmission_line(p: CircuitParams) -> QbshSystem:
    """Lift the diode transmission line to an order-``2n`` Hadamard system.

    With ``w = exp(a v) - 1`` the chain rule gives ``w' = a (w + 1) * v'``, so
    the w-rows of ``A`` and ``B`` are ``a`` times the v-rows, the quadratic
    part is ``w * (a A1 v + a A2 w)`` (``G = I``, ``F`` zero in its v-rows), and
    the input enters bilinearly through ``a * diag(b_v)`` in the w-rows.
    """
    n, a = int(p.n_nodes), float(p.diode_coefficient)
    a1, a2, b_v = circuit_linear_blocks(n)
    upper = np.hstack([a1, a2])
    big_a = np.vstack([upper, a * upper])
    f = np.vstack([np.zeros((n, 2 * n)), a * upper])
    m = a * np.diag(np.concatenate([np.zeros(n), b_v]))
    b = np.concatenate([b_v, a * b_v]).reshape(-1, 1)
    c = np.zeros((1, 2 * n))
    c[0, 0] = 1.0
    return QbshSystem(
        a_mat=big_a, f_mat=f, g_mat=np.eye(2 * n), m_mat=m, b_vec=b, c_vec=c,
        provenance={"builder": "transmission_line", "n_nodes": n, "diode_coefficient": a},
    )


def build_h_from_fg(f, g) -> np.ndarray:
    """Kronecker-form coefficient ``H`` (N x N^2) with ``H (x kron x) = (G x) * (F x)``.

    Row ``i`` of ``H`` is ``G[i] kron F[i]``.
    """
    f = as_matrix(f, "F")
    g = as_matrix(g, "G")
    n = f.shape[0]
    if f.shape != (n, n) or g.shape != (n, n):
        raise DimensionError(f"F{f.shape} and G{g.shape} must be square and equal-sized")
    return np.einsum("ij,ik->ijk", g, f).reshape(n, n * n)


# -- persistence ---------------------------------------------------------------


def save_system(sys: QbshSystem, path) -> Path:
    """Write one Matrix Market file per block plus a JSON manifest."""
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    files = {}
    for name, mat in sys.blocks().items():
        fname = f"{name}.mtx"
        write_matrix_market(path / fname, mat)
        files[name] = fname
    manifest = {"n_state": sys.n_state, "blocks": files, "provenance": sys.provenance or {"builder": "user"}}
    (path / MANIFEST).write_text(json.dumps(manifest, indent=2) + "\n")
    return path


def load_system(path) -> QbshSystem:
    path = Path(path)
    mpath = path / MANIFEST
    try:
        manifest = json.loads(mpath.read_text())
    except OSError as exc:
        raise FormatError(f"cannot read manifest ({exc.strerror})", mpath) from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"invalid JSON: {exc.msg}", mpath, exc.lineno) from exc
    try:
        n = manifest["n_state"]
        files = manifest["blocks"]
    except (KeyError, TypeError) as exc:
        raise FormatError(f"manifest missing key {exc}", mpath) from exc
    if not isinstance(n, int) or n < 1:
        raise FormatError(f"n_state must be a positive integer, got {n!r}", mpath)
    missing = [b for b in BLOCKS if b not in files]
    if missing:
        raise FormatError(f"manifest lists no file for blocks {missing}", mpath)
    mats = {b: read_matrix_market(path / files[b]) for b in BLOCKS}
    if mats["A"].shape != (n, n):
        raise DimensionError(
            f"{mpath}: n_state={n} but A.mtx is {mats['A'].shape[0]}x{mats['A'].shape[1]}"
        )
    prov = manifest.get("provenance")
    if prov == {"builder": "user"}:
        prov = None
    return QbshSystem(
        a_mat=mats["A"], f_mat=mats["F"], g_mat=mats["G"], m_mat=mats["M"],
        b_vec=mats["B"], c_vec=mats["C"], provenance=prov,
    )
