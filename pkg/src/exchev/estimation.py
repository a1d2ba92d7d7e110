"""Monte Carlo instruments: the inverse-mean Pickands estimator and
singular-path detection.

For an extreme-value copula, ``min(xi / x, eta / (1 - x))`` with
``xi = -log U_i`` and ``eta = -log U_j`` is exponential with rate ``A(x)``,
so ``n / sum_r min(xi_r / x, eta_r / (1 - x))`` estimates ``A(x)``.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np

from .errors import InvariantError

RATIO_TOL = 1e-9
DEFAULT_GRID = np.round(np.arange(1, 10) / 10.0, 12)


@dataclass(frozen=True)
class PickandsEstimate:
    grid: np.ndarray
    raw: np.ndarray
    n: int

    @property
    def clipped(self):
        """Estimate projected onto ``max(x, 1-x) <= A(x) <= 1``."""
        return np.clip(self.raw, np.maximum(self.grid, 1.0 - self.grid), 1.0)

    def sup_error(self, A, clipped=False):
        vals = self.clipped if clipped else self.raw
        return float(np.max(np.abs(vals - np.asarray(A(self.grid), dtype=float))))

    def to_csv(self, path_or_file):
        rows = zip(self.grid, self.raw, self.clipped)
        if hasattr(path_or_file, "write"):
            _write_estimate(path_or_file, rows)
        else:
            with open(path_or_file, "w", newline="") as fh:
                _write_estimate(fh, rows)


def _write_estimate(fh, rows):
    w = csv.writer(fh)
    w.writerow(["x", "A_hat_raw", "A_hat_clipped"])
    for x, r, c in rows:
        w.writerow([f"{x:.15g}", f"{r:.15g}", f"{c:.15g}"])


def _check_pair(batch, i, j):
    if i == j:
        raise InvariantError("pair", "coordinates i and j must differ")
    if not (0 <= i < batch.d and 0 <= j < batch.d):
        raise InvariantError("pair", f"coordinates must lie in 0..{batch.d - 1}")


def estimate_pickands(batch, i=0, j=1, grid=None):
    """Inverse-mean estimate of the Pickands function of coordinates (i, j).

    Parameters
    ----------
    batch : SampleBatch
    i, j : int
        Zero-based coordinates.
    grid : array_like, optional
        Abscissae in (0, 1); defaults to 0.1, ..., 0.9.
    """
    _check_pair(batch, i, j)
    grid = DEFAULT_GRID if grid is None else np.asarray(grid, dtype=float).reshape(-1)
    if np.any((grid <= 0) | (grid >= 1)):
        raise InvariantError("grid", "grid points must lie in (0, 1)")
    xi = -np.log(batch.rows[:, i])
    eta = -np.log(batch.rows[:, j])
    raw = np.empty(grid.size)
    for g, x in enumerate(grid):
        raw[g] = batch.n / np.sum(np.minimum(xi / x, eta / (1.0 - x)))
    return PickandsEstimate(grid.copy(), raw, batch.n)


def singular_paths(batch, i=0, j=1, tol=RATIO_TOL, min_count=2):
    """Ratios ``log u_j / log u_i`` shared by at least `min_count` rows.

    Points on the curve ``u_j = u_i ** c`` all share the ratio ``c``; the
    ratios are sorted and split wherever consecutive values differ by more
    than `tol`.

    Returns
    -------
    list of dict
        ``{"ratio", "count", "frequency"}`` sorted by ratio.
    """
    _check_pair(batch, i, j)
    r = np.sort(np.log(batch.rows[:, j]) / np.log(batch.rows[:, i]))
    if r.size == 0:
        return []
    starts = np.flatnonzero(np.concatenate(([True], np.diff(r) > tol)))
    ends = np.append(starts[1:], r.size)
    out = []
    for s, e in zip(starts, ends):
        if e - s >= min_count:
            out.append({"ratio": float(np.mean(r[s:e])), "count": int(e - s),
                        "frequency": float((e - s) / batch.n)})
    return out


def singular_frequency(paths):
    return float(sum(p["frequency"] for p in paths))


def paths_to_json(paths):
    return json.dumps(paths, indent=2)
