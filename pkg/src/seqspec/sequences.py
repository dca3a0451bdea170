"""Matrix sequences n -> A_n with a dimension function, and their algebra.

Sequences are lazy: a :class:`MatrixSequence` wraps a pure generator and
evaluates (and memoizes) single entries on demand.  Indices are 1-based.
"""

from __future__ import annotations

import itertools
import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import AlgebraError, ConfigurationError, EvaluationError
from .linalg import as_square, spectral_norm

CACHE_SIZE = 256
CACHE_BYTES = 64 * 2**20
SELFADJOINT_RTOL = 1e-12

_ids = itertools.count()


def _check_index(n) -> int:
    if isinstance(n, (bool, np.bool_)) or not isinstance(n, (int, np.integer)):
        raise ConfigurationError(f"index must be a positive integer, got {n!r}")
    if n < 1:
        raise ConfigurationError(f"index must be >= 1, got {n}")
    return int(n)


@dataclass(frozen=True)
class DimensionFunction:
    """The rule n -> delta(n).

    ``kind`` is ``"linear"`` (``slope * n + offset``), ``"explicit"`` (a
    finite list, ``values[n-1]``) or ``"custom"`` (any callable).
    ``filtration`` asserts that delta is strictly increasing, as for the
    ranks of a filtration.
    """

    kind: str = "linear"
    slope: int = 1
    offset: int = 0
    values: tuple = ()
    func: Optional[Callable[[int], int]] = field(default=None, compare=False)
    filtration: bool = False

    @classmethod
    def linear(cls, slope: int = 1, offset: int = 0) -> "DimensionFunction":
        return cls("linear", slope=slope, offset=offset, filtration=slope > 0)

    @classmethod
    def constant(cls, dim: int) -> "DimensionFunction":
        return cls("linear", slope=0, offset=dim)

    @classmethod
    def explicit(cls, values: Sequence[int]) -> "DimensionFunction":
        vals = tuple(values)
        inc = all(b > a for a, b in zip(vals, vals[1:]))
        return cls("explicit", values=vals, filtration=inc)

    @classmethod
    def custom(cls, func: Callable[[int], int], filtration: bool = False) -> "DimensionFunction":
        return cls("custom", func=func, filtration=filtration)

    def __call__(self, n: int) -> int:
        n = _check_index(n)
        if self.kind == "linear":
            d = self.slope * n + self.offset
        elif self.kind == "explicit":
            if n > len(self.values):
                raise ConfigurationError(f"explicit dimension list has no entry for n={n}")
            d = self.values[n - 1]
        elif self.kind == "custom":
            d = self.func(n)
        else:
            raise ConfigurationError(f"unknown dimension kind {self.kind!r}")
        if isinstance(d, (bool, np.bool_)) or not isinstance(d, (int, np.integer)) or d < 1:
            raise ConfigurationError(f"dimension rule returned {d!r} at n={n}")
        return int(d)

    def check(self, horizon: int) -> None:
        """Validate delta on 1..horizon, including monotonicity for filtrations."""
        dims = [self(n) for n in range(1, horizon + 1)]
        if self.filtration and any(b <= a for a, b in zip(dims, dims[1:])):
            raise ConfigurationError("filtration dimension function is not strictly increasing")

    def compose(self, eta: "Restriction") -> "DimensionFunction":
        if self.kind == "linear" and eta.is_arithmetic():
            start, step = eta.arithmetic_params()
            return DimensionFunction(
                "linear", slope=self.slope * step, offset=self.slope * (start - step) + self.offset,
                filtration=self.filtration,
            )
        return DimensionFunction.custom(lambda n: self(eta(n)), filtration=self.filtration)


IDENTITY_DIMS = DimensionFunction.linear()


@dataclass(frozen=True)
class Restriction:
    """Strictly increasing index map eta: N -> N.

    Stored as an explicit prefix ``eta(1..len(prefix))`` and an optional
    arithmetic tail ``eta(n) = prefix[-1] + step * (n - len(prefix))``.
    Without a tail the map is only defined on the prefix.
    """

    prefix: tuple
    step: Optional[int] = None

    def __post_init__(self):
        pre = tuple(int(v) for v in self.prefix)
        object.__setattr__(self, "prefix", pre)
        if not pre:
            raise ConfigurationError("restriction needs at least one index")
        if pre[0] < 1:
            raise ConfigurationError("restriction indices must be >= 1")
        if any(b <= a for a, b in zip(pre, pre[1:])):
            raise ConfigurationError("restriction must be strictly increasing")
        if self.step is not None and self.step < 1:
            raise ConfigurationError("restriction tail step must be >= 1")

    @classmethod
    def identity(cls) -> "Restriction":
        return cls((1,), 1)

    @classmethod
    def arithmetic(cls, start: int, step: int) -> "Restriction":
        return cls((start,), step)

    @classmethod
    def from_indices(cls, indices: Sequence[int]) -> "Restriction":
        return cls(tuple(indices))

    def __len__(self) -> int:
        if self.step is not None:
            raise TypeError("restriction with arithmetic tail is infinite")
        return len(self.prefix)

    @property
    def finite(self) -> bool:
        return self.step is None

    def is_arithmetic(self) -> bool:
        if self.step is None:
            return False
        pre = self.prefix
        return all(b - a == self.step for a, b in zip(pre, pre[1:]))

    def arithmetic_params(self) -> tuple[int, int]:
        return self.prefix[0], self.step

    def defined_at(self, n: int) -> bool:
        return n >= 1 and (self.step is not None or n <= len(self.prefix))

    def __call__(self, n: int) -> int:
        n = _check_index(n)
        L = len(self.prefix)
        if n <= L:
            return self.prefix[n - 1]
        if self.step is None:
            raise EvaluationError(f"restriction is only defined for n <= {L}")
        return self.prefix[-1] + self.step * (n - L)

    def indices(self, count: int) -> list[int]:
        """eta(1), ..., eta(count)."""
        return [self(n) for n in range(1, count + 1)]

    def length_within(self, horizon: int) -> int:
        """Number of n with eta(n) <= horizon."""
        count = 0
        for v in self.prefix:
            if v > horizon:
                return count
            count += 1
        if self.step is None:
            return count
        return count + max(0, (horizon - self.prefix[-1]) // self.step)

    def compose(self, mu: "Restriction") -> "Restriction":
        """The map n -> self(mu(n))."""
        if mu.step is None:
            vals = [self(m) for m in mu.prefix if self.defined_at(m)]
            if len(vals) < len(mu.prefix):
                raise ConfigurationError("composition leaves the domain of the outer restriction")
            return Restriction(tuple(vals))
        if self.step is None:
            count = mu.length_within(len(self.prefix))
            return Restriction(tuple(self(mu(n)) for n in range(1, count + 1)))
        # both infinite: eventually arithmetic with step self.step * mu.step
        n0 = len(mu.prefix)
        while mu(n0) <= len(self.prefix):
            n0 += 1
        return Restriction(tuple(self(mu(n)) for n in range(1, n0 + 1)), self.step * mu.step)

    def to_list(self) -> list[int]:
        return list(self.prefix)


class MatrixSequence:
    """A lazily evaluated sequence of square complex matrices.

    ``generator(n)`` must be deterministic and return a ``dims(n) x dims(n)``
    array.  Evaluated matrices are cached (bounded LRU) and handed out
    read-only.  ``first_index`` is the smallest n at which the sequence is
    defined (a fixed block needs dims(n) large enough to hold it).
    """

    def __init__(
        self,
        dims: DimensionFunction,
        generator: Callable[[int], np.ndarray],
        selfadjoint_hint: bool = False,
        label: str = "",
        cache_size: int = CACHE_SIZE,
        first_index: int = 1,
    ):
        self.dims = dims
        self.first_index = max(1, int(first_index))
        self.generator = generator
        self.selfadjoint_hint = selfadjoint_hint
        self.label = label or "seq"
        self.id = next(_ids)
        self._cache: OrderedDict[int, np.ndarray] = OrderedDict()
        self._cache_bytes = 0
        self._cache_size = cache_size
        self._lock = threading.Lock()

    def __repr__(self):
        return f"MatrixSequence({self.label!r}, id={self.id})"

    def eval(self, n: int) -> np.ndarray:
        n = _check_index(n)
        with self._lock:
            hit = self._cache.get(n)
            if hit is not None:
                self._cache.move_to_end(n)
                return hit
        d = self.dims(n)
        m = self.generator(n)
        try:
            m = as_square(m)
        except ValueError as exc:
            raise EvaluationError(f"{self.label}: invalid matrix at n={n}: {exc}") from None
        if m.shape[0] != d:
            raise EvaluationError(f"{self.label}: generator returned {m.shape[0]}x{m.shape[0]}, dims({n}) = {d}")
        m = np.array(m, copy=True)
        m.flags.writeable = False
        if self._cache_size > 0:
            with self._lock:
                self._cache[n] = m
                self._cache_bytes += m.nbytes
                while len(self._cache) > self._cache_size or (
                    self._cache_bytes > CACHE_BYTES and len(self._cache) > 1
                ):
                    _, old = self._cache.popitem(last=False)
                    self._cache_bytes -= old.nbytes
        return m

    __call__ = eval

    def clear_cache(self) -> None:
        with self._lock:
            self._cache.clear()
            self._cache_bytes = 0

    def selfadjoint_defect(self, n: int) -> float:
        """``||A_n - A_n^*|| / (1 + ||A_n||)`` in the spectral norm."""
        a = self.eval(n)
        return spectral_norm(a - a.conj().T) / (1.0 + spectral_norm(a))

    def check_selfadjoint(self, horizon: int, rtol: float = SELFADJOINT_RTOL) -> bool:
        return all(self.selfadjoint_defect(n) <= rtol for n in range(self.first_index, horizon + 1))

    # operator sugar
    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1.0))

    def __matmul__(self, other):
        return mul(self, other)

    def __mul__(self, c):
        return scale(self, c)

    __rmul__ = __mul__


# ---------------------------------------------------------------------------
# basic sequences
# ---------------------------------------------------------------------------


def eval(seq: MatrixSequence, n: int) -> np.ndarray:  # noqa: A001 - mirrors the operation name
    return seq.eval(n)


def identity(dims: DimensionFunction = IDENTITY_DIMS) -> MatrixSequence:
    return MatrixSequence(dims, lambda n: np.eye(dims(n)), selfadjoint_hint=True, label="identity")


def zero(dims: DimensionFunction = IDENTITY_DIMS) -> MatrixSequence:
    return MatrixSequence(dims, lambda n: np.zeros((dims(n), dims(n))), selfadjoint_hint=True, label="zero")


def padded(block, dims: DimensionFunction = IDENTITY_DIMS, label: str = "padded") -> MatrixSequence:
    """The fixed block placed in the upper-left corner of a zero matrix."""
    b = as_square(block)
    s = b.shape[0]

    def gen(n):
        d = dims(n)
        if s > d:
            raise EvaluationError(f"{s}x{s} block does not fit into dimension {d} at n={n}")
        out = np.zeros((d, d), dtype=b.dtype)
        out[:s, :s] = b
        return out

    first = next((n for n in range(1, 1 << 16) if dims(n) >= s), 1)
    sa = bool(np.allclose(b, b.conj().T, rtol=0, atol=SELFADJOINT_RTOL))
    return MatrixSequence(dims, gen, selfadjoint_hint=sa, label=label, first_index=first)


def scaled_identity(coeff: Callable[[int], complex], dims: DimensionFunction = IDENTITY_DIMS,
                    label: str = "scaled_identity") -> MatrixSequence:
    """The sequence coeff(n) * I_{delta(n)}."""
    probe = complex(coeff(1))
    real = probe.imag == 0.0

    def gen(n):
        c = coeff(n)
        return (c.real if real and isinstance(c, complex) else c) * np.eye(dims(n))

    return MatrixSequence(dims, gen, selfadjoint_hint=real, label=label)


def diagonal(entries: Callable[[int], np.ndarray], dims: DimensionFunction = IDENTITY_DIMS,
             selfadjoint_hint: bool = False, label: str = "diagonal") -> MatrixSequence:
    return MatrixSequence(dims, lambda n: np.diag(np.asarray(entries(n))), selfadjoint_hint, label)


def from_matrices(matrices: Sequence, label: str = "explicit") -> MatrixSequence:
    """Finite explicit list; only 1..len(matrices) can be evaluated."""
    mats = [as_square(m) for m in matrices]
    if not mats:
        raise ConfigurationError("explicit sequence needs at least one matrix")
    dims = DimensionFunction.explicit([m.shape[0] for m in mats])
    sa = all(np.allclose(m, m.conj().T, rtol=0, atol=SELFADJOINT_RTOL) for m in mats)
    return MatrixSequence(dims, lambda n: mats[n - 1], selfadjoint_hint=sa, label=label)


# ---------------------------------------------------------------------------
# pointwise algebra
# ---------------------------------------------------------------------------


def _joint_dims(a: MatrixSequence, b: MatrixSequence, op: str) -> DimensionFunction:
    if a.dims == b.dims and a.dims.kind != "custom":
        return a.dims

    def rule(n):
        da, db = a.dims(n), b.dims(n)
        if da != db:
            raise AlgebraError(f"{op}: dimension mismatch at n={n} ({da} vs {db})")
        return da

    return DimensionFunction.custom(rule, filtration=a.dims.filtration)


def _same_dims(a, b, n, op):
    da, db = a.dims(n), b.dims(n)
    if da != db:
        raise AlgebraError(f"{op}: dimension mismatch at n={n} ({da} vs {db})")


def add(a: MatrixSequence, b: MatrixSequence) -> MatrixSequence:
    def gen(n):
        _same_dims(a, b, n, "add")
        return a.eval(n) + b.eval(n)

    return MatrixSequence(_joint_dims(a, b, "add"), gen, a.selfadjoint_hint and b.selfadjoint_hint,
                          f"({a.label} + {b.label})", first_index=max(a.first_index, b.first_index))


def mul(a: MatrixSequence, b: MatrixSequence) -> MatrixSequence:
    def gen(n):
        _same_dims(a, b, n, "mul")
        return a.eval(n) @ b.eval(n)

    return MatrixSequence(_joint_dims(a, b, "mul"), gen, False, f"({a.label} {b.label})",
                          first_index=max(a.first_index, b.first_index))


def adjoint(a: MatrixSequence) -> MatrixSequence:
    return MatrixSequence(a.dims, lambda n: a.eval(n).conj().T, a.selfadjoint_hint, f"{a.label}*",
                          first_index=a.first_index)


def scale(a: MatrixSequence, c: complex) -> MatrixSequence:
    c = complex(c)
    factor = c.real if c.imag == 0.0 else c
    return MatrixSequence(a.dims, lambda n: factor * a.eval(n), a.selfadjoint_hint and c.imag == 0.0,
                          f"{c:g}*{a.label}", first_index=a.first_index)


def restrict(seq: MatrixSequence, eta: Restriction) -> MatrixSequence:
    """The subsequence n -> A_{eta(n)}."""
    first = 1
    while eta.defined_at(first) and eta(first) < seq.first_index:
        first += 1
    return MatrixSequence(seq.dims.compose(eta), lambda n: seq.eval(eta(n)), seq.selfadjoint_hint,
                          f"{seq.label}|eta", first_index=first)


def alternate(a: MatrixSequence, b: MatrixSequence) -> MatrixSequence:
    """A_n for odd n, B_n for even n."""
    def gen(n):
        _same_dims(a, b, n, "alternate")
        return a.eval(n) if n % 2 else b.eval(n)

    return MatrixSequence(_joint_dims(a, b, "alternate"), gen, a.selfadjoint_hint and b.selfadjoint_hint,
                          f"alt({a.label}, {b.label})", first_index=max(a.first_index, b.first_index))


def direct_sum(a: MatrixSequence, b: MatrixSequence) -> MatrixSequence:
    """Block diagonal diag(A_n, B_n); dimensions add."""
    dims = DimensionFunction.custom(lambda n: a.dims(n) + b.dims(n),
                                    filtration=a.dims.filtration and b.dims.filtration)

    def gen(n):
        x, y = a.eval(n), b.eval(n)
        da, db = x.shape[0], y.shape[0]
        out = np.zeros((da + db, da + db), dtype=np.result_type(x, y))
        out[:da, :da] = x
        out[da:, da:] = y
        return out

    return MatrixSequence(dims, gen, a.selfadjoint_hint and b.selfadjoint_hint, f"({a.label} (+) {b.label})",
                          first_index=max(a.first_index, b.first_index))


def sup_norm(seq: MatrixSequence, horizon: int) -> float:
    """max ||A_n|| (spectral norm) over the defined indices n <= horizon."""
    if horizon < seq.first_index:
        raise ConfigurationError(f"horizon must be >= {seq.first_index}")
    return max(spectral_norm(seq.eval(n)) for n in range(seq.first_index, horizon + 1))
