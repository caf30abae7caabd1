"""Synthetic data generation: low-rank targets, the uniform sampling policy,
and noisy entry observations.

Targets are built from ``r`` base vectors with entries ``Uniform(0, 1) * scale``;
every row of the target picks one of the base vectors, so the rank is at most
``r`` and the box bound ``gamma = scale`` holds by construction.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linalg import as_matrix, matrix_norm
from .models import ModelSpec, sample_response

RANK_TOL = 1e-10


@dataclass(frozen=True)
class TargetMatrix:
    theta_star: np.ndarray
    rank_bound: int
    gamma: float

    def __post_init__(self):
        theta = as_matrix(self.theta_star, "theta_star")
        object.__setattr__(self, "theta_star", theta)
        r = int(self.rank_bound)
        if not 1 <= r <= min(theta.shape):
            raise ValueError(f"rank bound {r} outside [1, {min(theta.shape)}]")
        s = np.linalg.svd(theta, compute_uv=False)
        if s[0] > 0 and r < s.size and s[r] > RANK_TOL * s[0]:
            raise ValueError(f"numerical rank exceeds the bound {r}")
        if matrix_norm(theta, "max") > self.gamma * (1 + 1e-12):
            raise ValueError("target max-norm exceeds gamma")

    @property
    def shape(self) -> tuple[int, int]:
        return self.theta_star.shape


def generate_target(d1: int, d2: int, r: int, scale: float, rng,
                    gamma: float | None = None) -> TargetMatrix:
    """Draw a rank-<=r target with entries in ``[0, scale]``.

    Each of the ``d1`` rows is one of ``r`` base vectors chosen uniformly at
    random; ``gamma`` defaults to ``scale`` so the box bound is guaranteed.
    """
    if not 1 <= r <= min(d1, d2):
        raise ValueError(f"rank {r} must lie in [1, min(d1, d2)] = [1, {min(d1, d2)}]")
    if not scale > 0:
        raise ValueError(f"scale must be positive, got {scale}")
    base = rng.uniform(0.0, 1.0, size=(r, d2)) * scale
    rows = rng.integers(0, r, size=d1)
    theta = base[rows]
    return TargetMatrix(theta, r, scale if gamma is None else gamma)


def next_index(d1: int, d2: int, rng) -> tuple[int, int]:
    """Uniform draw from the d1 x d2 index grid, independent of the past."""
    if d1 < 1 or d2 < 1:
        raise ValueError("dimensions must be at least 1")
    return (int(rng.integers(0, d1)), int(rng.integers(0, d2)))


def observe(target: TargetMatrix, index: tuple[int, int], model: ModelSpec, rng) -> float:
    """One noisy observation of the target entry at ``index``."""
    row, col = index
    d1, d2 = target.shape
    if not (0 <= row < d1 and 0 <= col < d2):
        raise ValueError(f"index {index} out of range for shape {target.shape}")
    return float(sample_response(model, target.theta_star[row, col], rng))


@dataclass
class ObservationLog:
    """The observation history: index pairs and responses, in arrival order."""

    d1: int
    d2: int
    _rows: list = field(default_factory=list, repr=False)
    _cols: list = field(default_factory=list, repr=False)
    _responses: list = field(default_factory=list, repr=False)

    def __len__(self) -> int:
        return len(self._responses)

    def append(self, index: tuple[int, int], response: float) -> None:
        row, col = index
        if not (0 <= row < self.d1 and 0 <= col < self.d2):
            raise ValueError(f"index {index} out of range")
        self._rows.append(int(row))
        self._cols.append(int(col))
        self._responses.append(float(response))

    @property
    def rows(self) -> np.ndarray:
        return np.asarray(self._rows, dtype=np.int64)

    @property
    def cols(self) -> np.ndarray:
        return np.asarray(self._cols, dtype=np.int64)

    @property
    def responses(self) -> np.ndarray:
        return np.asarray(self._responses, dtype=np.float64)

    @classmethod
    def from_arrays(cls, d1: int, d2: int, rows, cols, responses) -> "ObservationLog":
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        responses = np.asarray(responses, dtype=np.float64)
        if not (rows.shape == cols.shape == responses.shape):
            raise ValueError("rows, cols and responses must have equal length")
        if rows.size and (rows.min() < 0 or rows.max() >= d1
                          or cols.min() < 0 or cols.max() >= d2):
            raise ValueError("index out of range")
        log = cls(d1, d2)
        log._rows = rows.tolist()
        log._cols = cols.tolist()
        log._responses = responses.tolist()
        return log

    def to_csv(self, path) -> None:
        """Write the replayable log with columns t, row, col, y."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "row", "col", "y"])
            for t, (r, c, y) in enumerate(zip(self._rows, self._cols, self._responses), 1):
                writer.writerow([t, r, c, repr(y)])

    @classmethod
    def from_csv(cls, path, d1: int, d2: int) -> "ObservationLog":
        rows, cols, responses = [], [], []
        with open(path, newline="") as fh:
            for record in csv.DictReader(fh):
                rows.append(int(record["row"]))
                cols.append(int(record["col"]))
                responses.append(float(record["y"]))
        return cls.from_arrays(d1, d2, rows, cols, responses)


def simulate_stream(target: TargetMatrix, model: ModelSpec, horizon: int, rng) -> ObservationLog:
    """Run the uniform policy for ``horizon`` steps against ``target``."""
    d1, d2 = target.shape
    log = ObservationLog(d1, d2)
    for _ in range(horizon):
        idx = next_index(d1, d2, rng)
        log.append(idx, observe(target, idx, model, rng))
    return log
