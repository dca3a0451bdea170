"""Finite-horizon estimators for zero, compact and Fredholm sequences.

Every limit notion is estimated on windows of the index range 1..horizon:

* last half     ``[H/2, H]``   (liminf / sup over the tail)
* mid quarter   ``[H/2, 3H/4]``
* last quarter  ``(3H/4, H]``

Comparing the two quarters gives a crude trend; estimators that cannot
tell a slowly decaying row from a positive floor answer ``Undecided``.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError, ConvergenceError
from .linalg import extreme_singular_values
from .sequences import MatrixSequence, Restriction

DEFAULT_K_MAX = 16
DEFAULT_TOL = 1e-6
DEFAULT_TAU = 1e-3
TREND = 0.9           # last-quarter min must keep this fraction of the mid-quarter min
DROP = 0.5            # zero test: last-quarter max <= DROP * mid-quarter max
DECAY_FINAL = 0.1     # decaying rows must end below this value
STABLE_SPREAD = 0.1   # NotCompact: final three tail suprema within 10%


@dataclass
class SingularProfile:
    """Extreme singular values of A_n for n in ``ns``.

    ``desc[i, k-1]`` is Sigma_k(A_n), the k-th largest singular value (0 when
    k > dim).  ``asc[i, k-1]`` is sigma_k(A_n), the k-th smallest (NaN when
    k > dim).
    """

    horizon: int
    k_max: int
    ns: np.ndarray
    dims: np.ndarray
    desc: np.ndarray
    asc: np.ndarray

    @property
    def table(self) -> np.ndarray:
        return self.desc

    def Sigma(self, k: int) -> np.ndarray:
        return self.desc[:, k - 1]

    def sigma(self, k: int) -> np.ndarray:
        return self.asc[:, k - 1]

    def mask(self, lo: float, hi: float, closed_lo: bool = True) -> np.ndarray:
        a, b = lo * self.horizon, hi * self.horizon
        left = self.ns >= math.floor(a) if closed_lo else self.ns > math.floor(a)
        return left & (self.ns <= b)

    def restrict(self, eta: Restriction) -> "SingularProfile":
        """Profile of the subsequence n -> A_{eta(n)} for the eta(n) covered here."""
        m = eta.length_within(self.horizon)
        pos = {int(n): i for i, n in enumerate(self.ns)}
        rows, new_ns = [], []
        for j in range(1, m + 1):
            i = pos.get(eta(j))
            if i is not None:
                rows.append(i)
                new_ns.append(j)
        if len(rows) < 4:
            raise ConfigurationError("restriction leaves fewer than 4 profile rows")
        rows = np.asarray(rows)
        return SingularProfile(m, self.k_max, np.asarray(new_ns), self.dims[rows], self.desc[rows], self.asc[rows])

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO() if fh is None else fh
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "dim", "k", "sigma_desc"])
        for n, d, row in zip(self.ns, self.dims, self.desc):
            for k in range(1, min(self.k_max, int(d)) + 1):
                w.writerow([int(n), int(d), k, repr(float(row[k - 1]))])
        return buf.getvalue() if fh is None else ""

    def to_plot_csv(self) -> str:
        """gnuplot-ready columns: n, then sigma_1..sigma_kmax (ascending view)."""
        lines = ["# n " + " ".join(f"sigma_{k}" for k in range(1, self.k_max + 1))]
        for n, row in zip(self.ns, self.asc):
            lines.append(" ".join([str(int(n))] + [("nan" if np.isnan(v) else repr(float(v))) for v in row]))
        return "\n".join(lines) + "\n"


def singular_profile(seq: MatrixSequence, horizon: int, k_max: int = DEFAULT_K_MAX,
                     workers: Optional[int] = None) -> SingularProfile:
    """Tabulate Sigma_k and sigma_k for k <= k_max over first_index..horizon."""
    if horizon < 4:
        raise ConfigurationError("horizon must be >= 4")
    if k_max < 1:
        raise ConfigurationError("k_max must be >= 1")
    ns = np.arange(seq.first_index, horizon + 1)
    if ns.size == 0:
        raise ConfigurationError(f"sequence is undefined below n={seq.first_index}, beyond the horizon")

    def row(n):
        try:
            top, bottom = extreme_singular_values(seq.eval(int(n)), k_max)
        except ConvergenceError as exc:
            raise ConvergenceError(f"n={n}: {exc}", exc.off_norm, exc.sweeps) from exc
        return top, bottom

    if workers and workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            rows = list(ex.map(row, ns))
    else:
        rows = [row(n) for n in ns]

    desc = np.zeros((ns.size, k_max))
    asc = np.full((ns.size, k_max), np.nan)
    dims = np.zeros(ns.size, dtype=np.int64)
    for i, (top, bottom) in enumerate(rows):
        desc[i, : top.size] = top
        asc[i, : bottom.size] = bottom
        dims[i] = seq.dims(int(ns[i]))
    return SingularProfile(horizon, k_max, ns, dims, desc, asc)


# ---------------------------------------------------------------------------
# row-level rules
# ---------------------------------------------------------------------------


@dataclass
class RowTail:
    """Window statistics of one row of a profile."""

    half_max: float
    half_min: float
    mid_max: float
    mid_min: float
    last_max: float
    last_min: float
    final: float
    nonincreasing: bool

    def vanishes(self, tol: float) -> bool:
        if not self.last_max < tol:
            return False
        return self.half_max < tol or self.last_max <= DROP * self.mid_max

    def decays(self, trend: float = TREND) -> bool:
        return self.final < DECAY_FINAL and self.nonincreasing and self.last_min < trend * self.mid_min

    def has_floor(self, tau: float, trend: float = TREND) -> bool:
        return self.half_min > tau and self.last_min >= trend * self.mid_min

    def to_dict(self) -> dict:
        return {k: (bool(v) if isinstance(v, (bool, np.bool_)) else float(v)) for k, v in self.__dict__.items()}


def row_tail(profile: SingularProfile, values: np.ndarray) -> Optional[RowTail]:
    """Window statistics of ``values`` (aligned with ``profile.ns``); None if a window is empty."""
    half = profile.mask(0.5, 1.0)
    mid = profile.mask(0.5, 0.75)
    last = profile.mask(0.75, 1.0, closed_lo=False)
    ok = ~np.isnan(values)
    if not (np.any(half & ok) and np.any(mid & ok) and np.any(last & ok)):
        return None
    h, m, l = values[half & ok], values[mid & ok], values[last & ok]
    slack = 1e-12 * max(1.0, float(np.max(np.abs(l))))
    return RowTail(float(h.max()), float(h.min()), float(m.max()), float(m.min()), float(l.max()),
                   float(l.min()), float(l[-1]), bool(np.all(np.diff(l) <= slack)))


def zero_sequence_test(profile: SingularProfile, tol: float = DEFAULT_TOL) -> bool:
    """Is the sequence (numerically) in the ideal of zero sequences?"""
    tail = row_tail(profile, profile.Sigma(1))
    if tail is None:
        raise ConfigurationError("profile has no rows in the tail windows")
    return tail.vanishes(tol)


# ---------------------------------------------------------------------------
# compactness and essential rank
# ---------------------------------------------------------------------------


@dataclass
class CompactnessVerdict:
    verdict: str                        # Compact | NotCompact | Undecided
    ess_rank: Optional[int] = None
    witness_k: Optional[int] = None
    floor: Optional[float] = None
    tail_sup: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "ess_rank": self.ess_rank,
            "witness_k": self.witness_k,
            "floor": self.floor,
            "tail_sup": [None if math.isnan(v) else v for v in self.tail_sup],
        }


def tail_suprema(profile: SingularProfile) -> list[float]:
    """s_k = sup of Sigma_k(A_n) over n in [max(k, H/2), H]."""
    out = []
    lo = profile.horizon // 2
    for k in range(1, profile.k_max + 1):
        sel = profile.ns >= max(k, lo)
        out.append(float(profile.Sigma(k)[sel].max()) if np.any(sel) else float("nan"))
    return out


def compactness_test(profile: SingularProfile, tol: float = DEFAULT_TOL) -> CompactnessVerdict:
    if profile.k_max < 2:
        raise ConfigurationError("compactness_test needs k_max >= 2")
    s = tail_suprema(profile)
    for r in range(profile.k_max):
        v = s[r]
        if math.isnan(v):
            break
        if v < tol:
            head = np.asarray(s[: r + 1])
            if np.all(np.diff(head) <= 1e-12 * max(1.0, head[0])):
                return CompactnessVerdict("Compact", ess_rank=r, tail_sup=s)
            return CompactnessVerdict("Undecided", tail_sup=s)
    last3 = [v for v in s[-3:] if not math.isnan(v)]
    if len(last3) == 3 and min(last3) > tol and max(last3) - min(last3) <= STABLE_SPREAD * max(last3):
        return CompactnessVerdict("NotCompact", witness_k=profile.k_max, floor=s[-1], tail_sup=s)
    return CompactnessVerdict("Undecided", tail_sup=s)


def essential_rank(profile: SingularProfile, tol: float = DEFAULT_TOL):
    """Smallest r whose Sigma_{r+1} row is a zero sequence; ``math.inf`` when none <= k_max-1."""
    if profile.k_max < 2:
        raise ConfigurationError("essential_rank needs k_max >= 2")
    for r in range(profile.k_max):
        tail = row_tail(profile, profile.Sigma(r + 1))
        if tail is not None and tail.vanishes(tol):
            return r
    return math.inf


# ---------------------------------------------------------------------------
# Fredholm property
# ---------------------------------------------------------------------------


@dataclass
class FredholmVerdict:
    verdict: str                        # Fredholm | NotNormallySolvable | Undecided
    k: Optional[int] = None
    floor: Optional[float] = None
    tails: list = field(default_factory=list)

    @property
    def is_fredholm(self) -> bool:
        return self.verdict == "Fredholm"

    def to_dict(self) -> dict:
        return {"verdict": self.verdict, "k": self.k, "floor": self.floor, "tails": self.tails}


def fredholm_test(profile: SingularProfile, tau: float = DEFAULT_TAU, trend: float = TREND) -> FredholmVerdict:
    """Look for liminf sigma_{k+1}(A_n) > 0 with the smallest possible k.

    A floor counts only when it exceeds ``tau`` and the row shows no downward
    trend.  Rows sigma_k that tend to zero either pass the zero test or
    decay monotonically to below 0.1 over the last quarter.
    """
    tails = [row_tail(profile, profile.sigma(k)) for k in range(1, profile.k_max + 1)]
    evidence = []
    for k, t in enumerate(tails, start=1):
        rec = {"k": k, "defined": t is not None}
        if t is not None:
            rec.update(t.to_dict())
            rec.update(vanishes=t.vanishes(tau), decays=t.decays(trend), floor_ok=t.has_floor(tau, trend))
        evidence.append(rec)

    for k, t in enumerate(tails):
        if t is None or not t.has_floor(tau, trend):
            continue
        below = tails[k - 1] if k > 0 else None
        if k > 0 and not (below is not None and (below.vanishes(tau) or below.decays(trend))):
            return FredholmVerdict("Undecided", tails=evidence)
        return FredholmVerdict("Fredholm", k=k, floor=t.half_min, tails=evidence)

    if all(t is not None and (t.vanishes(tau) or t.decays(trend)) for t in tails):
        return FredholmVerdict("NotNormallySolvable", tails=evidence)
    return FredholmVerdict("Undecided", tails=evidence)
