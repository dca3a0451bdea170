"""Diagonal subsequence extraction at a finite horizon.

Given finitely many sequences, find an index set along which every tracked
statistic (the norm, or the k largest singular values) settles down to
within ``epsilon``.  Each statistic in turn is binned into cells of width
epsilon/2 and only the most populous cell survives, so the surviving set is
nested in the previous one exactly as in a diagonal argument.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .asymptotics import singular_profile
from .errors import ConfigurationError
from .linalg import svd_values
from .sequences import MatrixSequence, Restriction

TAIL_FRACTION = 2 / 3
BIN_SHIFT = 1e-6   # in units of the bin width; keeps round values off the cell edges


def default_min_length(horizon: int) -> int:
    return max(8, horizon // 16)


def tail(values: np.ndarray) -> np.ndarray:
    """The last two thirds of ``values``."""
    n = len(values)
    return values[n - math.ceil(TAIL_FRACTION * n):] if n else values


def oscillation(values: np.ndarray) -> float:
    t = tail(np.asarray(values, dtype=float))
    return float(t.max() - t.min()) if t.size else 0.0


@dataclass
class ExtractionRequest:
    sequences: list
    horizon: int
    epsilon: float
    k_max: int = 0
    min_length: Optional[int] = None

    def __post_init__(self):
        self.sequences = list(self.sequences)
        if not self.sequences:
            raise ConfigurationError("extraction needs at least one sequence")
        if self.horizon < 4:
            raise ConfigurationError("horizon must be >= 4")
        if not self.epsilon > 0:
            raise ConfigurationError("epsilon must be positive")
        if self.k_max < 0:
            raise ConfigurationError("k_max must be >= 0")
        if self.min_length is None:
            self.min_length = default_min_length(self.horizon)
        if not 1 <= self.min_length <= self.horizon:
            raise ConfigurationError("min_length must lie in [1, horizon]")


@dataclass
class ExtractionResult:
    eta: Restriction
    oscillation: dict           # (sequence index, k) -> tail oscillation along eta
    success: bool
    passes: int = 0

    def to_dict(self) -> dict:
        return {
            "eta": self.eta.to_list(),
            "success": self.success,
            "passes": self.passes,
            "oscillation": [{"sequence": i, "k": k, "value": v} for (i, k), v in sorted(self.oscillation.items())],
        }


def _statistics(seqs: Sequence[MatrixSequence], horizon: int, k_max: int):
    """Ordered statistic tables on the full index range 1..horizon (NaN where undefined)."""
    kk = max(1, k_max)
    stats = {}
    for i, s in enumerate(seqs):
        p = singular_profile(s, horizon, kk)
        for k in range(1, kk + 1):
            row = np.full(horizon, np.nan)
            row[p.ns - 1] = p.Sigma(k)
            stats[(i, k)] = row
    return stats


def _best_bin(vals: np.ndarray, width: float) -> np.ndarray:
    bins = np.floor(vals / width + BIN_SHIFT).astype(np.int64)
    labels, counts = np.unique(bins, return_counts=True)   # labels ascending
    best = labels[int(np.argmax(counts))]                   # first maximum = lowest bin
    return bins == best


def extract_convergent(req: ExtractionRequest) -> ExtractionResult:
    stats = _statistics(req.sequences, req.horizon, req.k_max)
    first = max(s.first_index for s in req.sequences)
    idx = np.arange(first, req.horizon + 1)
    width = req.epsilon / 2
    ok = True
    passes = 0
    changed = True
    while changed and ok:
        changed = False
        passes += 1
        for key in stats:          # sequence-major, k ascending
            vals = stats[key][idx - 1]
            if oscillation(vals) <= req.epsilon:
                continue
            keep = _best_bin(vals, width)
            if np.count_nonzero(keep) < req.min_length:
                ok = False
                break
            if not np.all(keep):
                idx = idx[keep]
                changed = True
    osc = {key: oscillation(row[idx - 1]) for key, row in stats.items()}
    success = ok and len(idx) >= req.min_length and all(v <= req.epsilon for v in osc.values())
    return ExtractionResult(Restriction.from_indices(idx.tolist()), osc, success, passes)


@dataclass
class ConvergenceReport:
    converged: bool
    oscillation: dict = field(default_factory=dict)
    length: int = 0

    def to_dict(self) -> dict:
        return {
            "converged": self.converged,
            "length": self.length,
            "oscillation": [{"sequence": i, "k": k, "value": v} for (i, k), v in sorted(self.oscillation.items())],
        }


def verify_convergence(seqs: Sequence[MatrixSequence], eta: Restriction, epsilon: float, k_max: int,
                       horizon: int) -> ConvergenceReport:
    """Recompute the statistics along eta with a full SVD and check the tail oscillation."""
    m = eta.length_within(horizon)
    points = [eta(j) for j in range(1, m + 1)]
    kk = max(1, k_max)
    osc = {}
    for i, s in enumerate(seqs):
        pts = [n for n in points if n >= s.first_index]
        table = np.zeros((len(pts), kk))
        for r, n in enumerate(pts):
            d = svd_values(s.eval(n)).descending[:kk]
            table[r, : d.size] = d
        for k in range(1, kk + 1):
            osc[(i, k)] = oscillation(table[:, k - 1])
    return ConvergenceReport(all(v <= epsilon for v in osc.values()), osc, m)
