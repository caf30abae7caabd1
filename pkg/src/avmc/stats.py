"""Streaming summary statistics of the sampling policy.

Tracks per-entry visit counts with their row/column marginals. Two derived
quantities drive the regularization schedule and the risk bound:

* ``min_frequency``: the smallest per-entry empirical frequency (0 while any
  entry is unobserved).
* ``policy_variation``: the largest row or column marginal frequency. For
  single-entry observation matrices the two Gram matrices of the policy are
  diagonal with the row/column frequencies on the diagonal, so their operator
  norm is exactly the largest marginal; no SVD is needed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class SummaryStats:
    entry_counts: np.ndarray
    row_counts: np.ndarray
    col_counts: np.ndarray
    t: int = 0

    @classmethod
    def empty(cls, d1: int, d2: int) -> "SummaryStats":
        if d1 < 1 or d2 < 1:
            raise ValueError("dimensions must be at least 1")
        return cls(np.zeros((d1, d2), dtype=np.int64),
                   np.zeros(d1, dtype=np.int64),
                   np.zeros(d2, dtype=np.int64))

    @property
    def shape(self) -> tuple[int, int]:
        return self.entry_counts.shape

    def copy(self) -> "SummaryStats":
        return SummaryStats(self.entry_counts.copy(), self.row_counts.copy(),
                            self.col_counts.copy(), self.t)


def update(stats: SummaryStats, index: tuple[int, int]) -> SummaryStats:
    """Record one observation at ``index``. Mutates ``stats`` and returns it;
    snapshot with :meth:`SummaryStats.copy` if needed between updates."""
    row, col = index
    d1, d2 = stats.shape
    if not (0 <= row < d1 and 0 <= col < d2):
        raise ValueError(f"index {index} out of range for shape {stats.shape}")
    stats.entry_counts[row, col] += 1
    stats.row_counts[row] += 1
    stats.col_counts[col] += 1
    stats.t += 1
    return stats


def from_indices(d1: int, d2: int, rows, cols) -> SummaryStats:
    """Build stats from full index arrays in one shot."""
    stats = SummaryStats.empty(d1, d2)
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    if rows.size:
        if rows.min() < 0 or rows.max() >= d1 or cols.min() < 0 or cols.max() >= d2:
            raise ValueError("index out of range")
        np.add.at(stats.entry_counts, (rows, cols), 1)
        stats.row_counts = stats.entry_counts.sum(axis=1)
        stats.col_counts = stats.entry_counts.sum(axis=0)
        stats.t = int(rows.size)
    return stats


def min_frequency(stats: SummaryStats) -> float:
    """Smallest per-entry empirical frequency; 0 while any entry is unseen."""
    if stats.t < 1:
        raise ValueError("min_frequency is undefined before the first observation")
    return float(stats.entry_counts.min()) / stats.t


def policy_variation(stats: SummaryStats) -> float:
    """Largest row or column marginal frequency, in ``(0, 1]``."""
    if stats.t < 1:
        raise ValueError("policy_variation is undefined before the first observation")
    return float(max(stats.row_counts.max(), stats.col_counts.max())) / stats.t
