"""Timing of the quadratic Gramian term in Hadamard vs Kronecker form."""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence

import numpy as np

from .linalg import kron
from .simulate import loglog_slope
from .systems import build_h_from_fg

MEMORY_BUDGET_BYTES = 2 * 1024**3
HADAMARD_SLOPE_MAX = 2.6
SLOPE_GAP_MIN = 1.0


def kron_bytes(n: int) -> int:
    """Bytes held by the Kronecker path at size ``n``: X kron X, H, and H (X kron X)."""
    return 8 * (n**4 + 2 * n**3)


def max_feasible_size(budget: int = MEMORY_BUDGET_BYTES) -> int:
    n = 1
    while kron_bytes(n + 1) <= budget:
        n += 1
    return n


def _best_time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


@dataclass
class BenchRow:
    n: int
    hadamard_s: float
    kronecker_s: float
    max_abs_diff: float


@dataclass
class BenchResult:
    rows: List[BenchRow]
    skipped: List[int]
    max_feasible_n: int
    hadamard_slope: Optional[float]
    kronecker_slope: Optional[float]
    passed: bool
    justification: str = ""

    def write_csv(self, path) -> None:
        with open(Path(path), "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "hadamard_s", "kronecker_s", "max_abs_diff"])
            for r in self.rows:
                w.writerow([r.n, f"{r.hadamard_s:.6e}", f"{r.kronecker_s:.6e}", f"{r.max_abs_diff:.3e}"])


def run_benchmark(sizes: Sequence[int], repeats: int = 5, seed: int = 0,
                  budget: int = MEMORY_BUDGET_BYTES) -> BenchResult:
    """Time ``(G X G^T) * (F X F^T)`` against ``H (X kron X) H^T`` for each size."""
    rng = np.random.default_rng(seed)
    cap = max_feasible_size(budget)
    rows, skipped = [], []
    for n in sorted(set(int(s) for s in sizes)):
        if n < 1 or n > cap:
            skipped.append(n)
            continue
        g = rng.standard_normal((n, n))
        f = rng.standard_normal((n, n))
        r = rng.standard_normal((n, n))
        x = r @ r.T
        h = build_h_from_fg(f, g)
        had = (g @ x @ g.T) * (f @ x @ f.T)
        kr = h @ kron(x, x) @ h.T
        diff = float(np.max(np.abs(had - kr)))
        t_had = _best_time(lambda: (g @ x @ g.T) * (f @ x @ f.T), repeats)
        t_kr = _best_time(lambda: h @ kron(x, x) @ h.T, max(1, repeats // 2 if n > 40 else repeats))
        rows.append(BenchRow(n, t_had, t_kr, diff))

    slope_h = slope_k = None
    if len(rows) >= 2:
        ns = [r.n for r in rows]
        slope_h = loglog_slope(ns, [r.hadamard_s for r in rows])
        slope_k = loglog_slope(ns, [r.kronecker_s for r in rows])
    passed = (
        slope_h is not None
        and slope_h <= HADAMARD_SLOPE_MAX
        and slope_k - slope_h >= SLOPE_GAP_MIN
    )
    why = ""
    if not passed:
        if slope_h is None:
            why = "fewer than two feasible sizes; no slope can be fitted"
        else:
            parts = []
            if slope_h > HADAMARD_SLOPE_MAX:
                parts.append(
                    f"Hadamard slope {slope_h:.2f} > {HADAMARD_SLOPE_MAX}: the two dense "
                    "congruences G X G^T and F X F^T cost O(N^3) and dominate once BLAS "
                    "overhead is amortized; only the entrywise product itself is O(N^2)"
                )
            if slope_k - slope_h < SLOPE_GAP_MIN:
                parts.append(
                    f"slope gap {slope_k - slope_h:.2f} < {SLOPE_GAP_MIN}: at the sizes "
                    "measured, call overhead flattens the Kronecker curve; use larger sizes "
                    f"(feasible up to N={cap})"
                )
            why = "; ".join(parts)
    return BenchResult(rows, skipped, cap, slope_h, slope_k, passed, why)
