"""Eigenvalue counting and the essential/transient classification of points.

For a self-adjoint sequence (A_n) and an open interval U, N(A_n, U) is the
number of eigenvalues of A_n in U counted with multiplicity.  A point is
essential when N(A_n, U) grows without bound for every U around it and
transient when it stays bounded for some U.  At a finite horizon both are
read off count tables over a ladder of half-widths; everything that fits
neither pattern is ``Undecided``.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .asymptotics import DEFAULT_TAU, FredholmVerdict, fredholm_test, singular_profile
from .errors import ConfigurationError, ContractViolation
from .linalg import count_below, hermitian_defect, tridiagonal_form
from .sequences import MatrixSequence, add, scaled_identity, sup_norm

DEFAULT_LADDER = (0.4, 0.2, 0.1, 0.05)
ENDPOINT_TOL = 1e-9
SELFADJOINT_TOL = 1e-10


@dataclass(frozen=True)
class Rules:
    """Thresholds of the finite-horizon classification."""

    c_max: int = 32          # largest admissible transient bound
    c_min: int = 4           # essential: final count at least this
    growth: float = 1.5      # essential: count(H) >= growth * count(H/2)
    persistent: bool = True  # essential: no zero count over the last half

    @classmethod
    def from_dict(cls, d: Optional[dict]) -> "Rules":
        if not d:
            return cls()
        unknown = set(d) - {"c_max", "c_min", "growth", "persistent"}
        if unknown:
            raise ConfigurationError(f"unknown rule(s): {sorted(unknown)}")
        return cls(**d)


def _check_ladder(ladder) -> tuple[float, ...]:
    lad = tuple(float(e) for e in ladder)
    if not lad:
        raise ConfigurationError("eps ladder is empty")
    if any(not e > 0 for e in lad):
        raise ConfigurationError("eps ladder entries must be positive")
    if any(a <= b for a, b in zip(lad, lad[1:])):
        raise ConfigurationError("eps ladder must be strictly descending")
    return lad


class SpectrumTable:
    """Tridiagonal forms of A_n for n = first_index..horizon, reused across queries."""

    def __init__(self, seq: MatrixSequence, horizon: int, workers: Optional[int] = None):
        if not seq.selfadjoint_hint:
            raise ContractViolation(f"{seq.label}: eigenvalue counts need a self-adjoint sequence")
        if horizon < max(4, seq.first_index):
            raise ConfigurationError(f"horizon must be >= max(4, {seq.first_index})")
        self.seq = seq
        self.horizon = horizon
        self.ns = np.arange(seq.first_index, horizon + 1)

        def form(n):
            a = seq.eval(int(n))
            if hermitian_defect(a) > SELFADJOINT_TOL:
                raise ContractViolation(f"{seq.label}: A_{n} is not Hermitian")
            return tridiagonal_form(a)

        if workers and workers > 1:
            with ThreadPoolExecutor(workers) as ex:
                self.forms = list(ex.map(form, self.ns))
        else:
            self.forms = [form(n) for n in self.ns]
        self.dims = np.array([f[0].size for f in self.forms])

    def counts(self, lam: float, eps: float) -> np.ndarray:
        """N(A_n, (lam-eps, lam+eps)) for every n; endpoints shrink by ENDPOINT_TOL."""
        lo, hi = lam - eps + ENDPOINT_TOL, lam + eps - ENDPOINT_TOL
        if hi <= lo:
            return np.zeros(self.ns.size, dtype=np.int64)
        out = np.empty(self.ns.size, dtype=np.int64)
        for i, (d, e2) in enumerate(self.forms):
            below = count_below(d, e2, [lo, hi])
            out[i] = below[1] - below[0]
        return out


def eig_counts(seq: MatrixSequence, lam: float, eps: float, horizon: int) -> list[int]:
    """Counts in (lam-eps, lam+eps); entry i belongs to n = seq.first_index + i."""
    if not eps > 0:
        raise ConfigurationError("eps must be positive")
    return SpectrumTable(seq, horizon).counts(lam, eps).tolist()


@dataclass
class CountTable:
    lam: float
    half_widths: tuple
    ns: np.ndarray
    counts: np.ndarray      # len(half_widths) x len(ns)

    def at(self, eps_index: int, n: int) -> int:
        return int(self.counts[eps_index, int(n) - int(self.ns[0])])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "eps", "n", "count"])
        for eps, row in zip(self.half_widths, self.counts):
            for n, c in zip(self.ns, row):
                w.writerow([repr(self.lam), repr(eps), int(n), int(c)])
        return buf.getvalue()


@dataclass
class SpectralClassification:
    lam: float
    verdict: str                 # Essential | Transient | Undecided
    table: CountTable
    bound: Optional[int] = None  # Transient only
    eps: Optional[float] = None
    growth: Optional[float] = None

    def summary(self) -> dict:
        t = self.table
        H = int(t.ns[-1])
        half, quarter = H // 2, max(H // 4, int(t.ns[0]))
        row = t.counts[-1]
        last = row[t.ns >= half]
        return {
            "eps": t.half_widths[-1],
            "n_half": half,
            "count_half": t.at(len(t.half_widths) - 1, half) if half >= t.ns[0] else None,
            "n_final": H,
            "count_final": int(row[-1]),
            "min_last_half": int(last.min()),
            "max_by_eps": {repr(e): int(r.max()) for e, r in zip(t.half_widths, t.counts)},
            "max_first_quarter_by_eps": {repr(e): int(r[t.ns <= quarter].max()) for e, r in zip(t.half_widths, t.counts)},
        }

    def to_dict(self) -> dict:
        if self.verdict == "Transient":
            bog = {"bound": self.bound}
        elif self.growth is not None:
            bog = {"growth": self.growth}
        else:
            bog = None
        return {
            "lambda": self.lam,
            "verdict": self.verdict,
            "eps": self.eps,
            "bound_or_growth": bog,
            "counts_summary": self.summary(),
        }


def _classify(table: SpectrumTable, lam: float, ladder, rules: Rules) -> SpectralClassification:
    ladder = _check_ladder(ladder)
    counts = np.vstack([table.counts(lam, e) for e in ladder])
    ns = table.ns
    ct = CountTable(float(lam), ladder, ns, counts)
    H = table.horizon
    quarter = max(H // 4, int(ns[0]))
    early = ns <= quarter

    for e, row in zip(ladder, counts):
        m = int(row.max())
        if m == int(row[early].max()) and m <= rules.c_max:
            return SpectralClassification(float(lam), "Transient", ct, bound=m, eps=e)

    row = counts[-1]
    final = int(row[-1])
    half = H // 2
    if half < ns[0]:
        return SpectralClassification(float(lam), "Undecided", ct)
    at_half = int(row[half - ns[0]])
    growth = final / at_half if at_half else (math.inf if final else 0.0)
    ok = final >= rules.growth * at_half and final >= rules.c_min
    if rules.persistent:
        ok = ok and int(row[ns >= half].min()) >= 1
    if ok:
        return SpectralClassification(float(lam), "Essential", ct, eps=ladder[-1], growth=growth)
    return SpectralClassification(float(lam), "Undecided", ct, growth=growth)


def classify_point(seq: MatrixSequence, lam: float, ladder: Sequence[float] = DEFAULT_LADDER,
                   horizon: int = 256, rules: Rules = Rules()) -> SpectralClassification:
    return _classify(SpectrumTable(seq, horizon), lam, ladder, rules)


@dataclass
class SpectrumEstimate:
    classifications: list
    essential: list
    transient: list
    undecided: list
    sup_norm: float
    bounded: bool            # non-transient points lie within sup_norm + max eps

    @property
    def non_transient(self) -> list:
        return sorted(self.essential + self.undecided)

    def to_dict(self) -> dict:
        return {
            "non_transient": self.non_transient,
            "essential": self.essential,
            "transient": self.transient,
            "undecided": self.undecided,
            "sup_norm": self.sup_norm,
            "bounded": self.bounded,
            "points": [c.to_dict() for c in self.classifications],
        }


def _grid(grid) -> list[float]:
    g = [float(x) for x in grid]
    if not g:
        raise ConfigurationError("grid is empty")
    return g


def essential_spectrum_estimate(seq: MatrixSequence, grid, ladder: Sequence[float] = DEFAULT_LADDER,
                                horizon: int = 256, rules: Rules = Rules(),
                                workers: Optional[int] = None) -> SpectrumEstimate:
    """Classify every grid point; the non-transient ones estimate the essential spectrum."""
    g = _grid(grid)
    ladder = _check_ladder(ladder)
    table = SpectrumTable(seq, horizon, workers)
    cls = [_classify(table, lam, ladder, rules) for lam in g]
    norm = sup_norm(seq, horizon)
    by = {"Essential": [], "Transient": [], "Undecided": []}
    for c in cls:
        by[c.verdict].append(c.lam)
    reach = norm + max(ladder)
    bounded = all(abs(x) <= reach for x in by["Essential"] + by["Undecided"])
    return SpectrumEstimate(cls, by["Essential"], by["Transient"], by["Undecided"], norm, bounded)


@dataclass
class DichotomyReport:
    estimate: SpectrumEstimate

    @property
    def undecided(self) -> list:
        return self.estimate.undecided

    @property
    def essential(self) -> list:
        return self.estimate.essential

    @property
    def transient(self) -> list:
        return self.estimate.transient

    @property
    def flag(self) -> bool:
        return not self.estimate.undecided

    def to_dict(self) -> dict:
        d = self.estimate.to_dict()
        d["dichotomy"] = self.flag
        return d


def dichotomy_audit(seq: MatrixSequence, grid, ladder: Sequence[float] = DEFAULT_LADDER,
                    horizon: int = 256, rules: Rules = Rules(), workers: Optional[int] = None) -> DichotomyReport:
    """Does every grid point get a definite verdict?"""
    return DichotomyReport(essential_spectrum_estimate(seq, grid, ladder, horizon, rules, workers))


@dataclass
class CrossCheck:
    lam: float
    outcome: str                 # agree-transient | agree-essentialish | conflict | undecided
    classification: SpectralClassification
    fredholm: FredholmVerdict

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "outcome": self.outcome,
            "classification": self.classification.to_dict(),
            "fredholm": self.fredholm.to_dict(),
        }


def shifted(seq: MatrixSequence, lam: float) -> MatrixSequence:
    """The sequence A_n - lam I_n."""
    lam = float(lam)
    return add(seq, scaled_identity(lambda n: -lam, seq.dims, label=f"{-lam:g}*I"))


def cross_check_fredholm(seq: MatrixSequence, lam: float, horizon: int = 256, tau: float = DEFAULT_TAU,
                         k_max: int = 16, ladder: Sequence[float] = DEFAULT_LADDER,
                         rules: Rules = Rules()) -> CrossCheck:
    """Compare the count-based verdict at lam with the Fredholm test on A_n - lam I."""
    cls = classify_point(seq, lam, ladder, horizon, rules)
    fred = fredholm_test(singular_profile(shifted(seq, lam), horizon, k_max), tau)
    if cls.verdict == "Undecided":
        outcome = "undecided"
    elif cls.verdict == "Transient":
        if fred.is_fredholm:
            outcome = "agree-transient"
        elif fred.verdict == "NotNormallySolvable":
            outcome = "conflict"
        else:
            outcome = "undecided"
    else:
        outcome = "conflict" if fred.is_fredholm else "agree-essentialish"
    return CrossCheck(float(lam), outcome, cls, fred)
