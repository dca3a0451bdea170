"""Dense Hermitian eigensolver and singular values.

Two in-house routes are provided:

* :func:`hermitian_eig` -- cyclic Jacobi rotations, returning eigenvalues
  *and* an orthonormal eigenbasis.  Used for full decompositions and as the
  value route for small matrices.
* a values-only route -- Householder reduction to real symmetric tridiagonal
  form followed by Sturm-sequence bisection.  It costs O(n^3) once plus
  O(n^2) per spectrum and is what keeps horizons of several hundred
  matrices tractable.  Already tridiagonal inputs skip the reduction.

Singular values of a general matrix come from the eigenvalues of ``A^* A``,
so values much smaller than ``sqrt(eps) * ||A||`` carry only absolute
accuracy of about ``1e-8 * ||A||``.  Hermitian inputs take the exact
shortcut ``Sigma_k(A) = |lambda|_k`` and avoid that loss.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import ContractViolation, ConvergenceError

DEFAULT_TOL = 1e-12
MAX_SWEEPS = 64
HERMITIAN_RTOL = 1e-10
SV_CLAMP = 1e-10
# values-only requests up to this size go through Jacobi
JACOBI_MAX_DIM = 48

_EPS = np.finfo(np.float64).eps
_TINY = np.finfo(np.float64).tiny


# ---------------------------------------------------------------------------
# compiled kernels
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _offdiag_norm(a):
    n = a.shape[0]
    s = 0.0
    for i in range(n):
        for j in range(n):
            if i != j:
                s += a[i, j].real ** 2 + a[i, j].imag ** 2
    return np.sqrt(s)


@njit(cache=True, nogil=True)
def _jacobi_cyclic(a, v, tol_abs, max_sweeps, want_vectors):
    """Row-cyclic Jacobi sweeps on Hermitian ``a`` (in place).

    Returns ``(sweeps, off)``; ``sweeps == -1`` signals non-convergence.
    """
    n = a.shape[0]
    sweep = 0
    while True:
        off = _offdiag_norm(a)
        if off < tol_abs:
            return sweep, off
        if sweep >= max_sweeps:
            return -1, off
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                b = abs(apq)
                if b == 0.0:
                    continue
                u = apq / b
                app = a[p, p].real
                aqq = a[q, q].real
                theta = (aqq - app) / (2.0 * b)
                if abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = 1.0 / (abs(theta) + np.sqrt(theta * theta + 1.0))
                    if theta < 0.0:
                        t = -t
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                su = s * u
                suc = s * np.conj(u)
                for i in range(n):
                    aip = a[i, p]
                    aiq = a[i, q]
                    a[i, p] = c * aip - suc * aiq
                    a[i, q] = su * aip + c * aiq
                for j in range(n):
                    apj = a[p, j]
                    aqj = a[q, j]
                    a[p, j] = c * apj - su * aqj
                    a[q, j] = suc * apj + c * aqj
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
                if want_vectors:
                    for i in range(n):
                        vip = v[i, p]
                        viq = v[i, q]
                        v[i, p] = c * vip - suc * viq
                        v[i, q] = su * vip + c * viq
        sweep += 1


@njit(cache=True, nogil=True)
def _householder_tridiagonal(a):
    """Reduce Hermitian ``a`` (overwritten) to real tridiagonal (d, e**2)."""
    n = a.shape[0]
    d = np.empty(n)
    e2 = np.zeros(max(n - 1, 0))
    for k in range(n - 2):
        m = n - k - 1
        xnorm2 = 0.0
        for i in range(m):
            x = a[k + 1 + i, k]
            xnorm2 += x.real ** 2 + x.imag ** 2
        d[k] = a[k, k].real
        tail2 = xnorm2 - (a[k + 1, k].real ** 2 + a[k + 1, k].imag ** 2)
        if tail2 == 0.0:
            # column already reduced
            e2[k] = xnorm2
            continue
        xnorm = np.sqrt(xnorm2)
        x0 = a[k + 1, k]
        ax0 = abs(x0)
        phase = x0 / ax0 if ax0 > 0.0 else x0 * 0.0 + 1.0
        alpha = -phase * xnorm
        vv = np.empty(m, dtype=a.dtype)
        for i in range(m):
            vv[i] = a[k + 1 + i, k]
        vv[0] -= alpha
        vn = 0.0
        for i in range(m):
            vn += vv[i].real ** 2 + vv[i].imag ** 2
        vn = np.sqrt(vn)
        for i in range(m):
            vv[i] /= vn
        # p = A22 v
        p = np.zeros(m, dtype=a.dtype)
        for i in range(m):
            acc = p[i]
            for j in range(m):
                acc += a[k + 1 + i, k + 1 + j] * vv[j]
            p[i] = acc
        kk = 0.0
        for i in range(m):
            kk += (np.conj(vv[i]) * p[i]).real
        w = np.empty(m, dtype=a.dtype)
        for i in range(m):
            w[i] = p[i] - kk * vv[i]
        for i in range(m):
            vi = vv[i]
            wi = w[i]
            for j in range(m):
                a[k + 1 + i, k + 1 + j] -= 2.0 * (vi * np.conj(w[j]) + wi * np.conj(vv[j]))
        e2[k] = xnorm2
    if n >= 2:
        d[n - 2] = a[n - 2, n - 2].real
        x = a[n - 1, n - 2]
        e2[n - 2] = x.real ** 2 + x.imag ** 2
    if n >= 1:
        d[n - 1] = a[n - 1, n - 1].real
    return d, e2


@njit(cache=True, nogil=True)
def _sturm_count_one(d, e2, x, pivmin):
    n = d.shape[0]
    count = 0
    q = d[0] - x
    if abs(q) < pivmin:
        q = -pivmin
    if q < 0.0:
        count += 1
    for i in range(1, n):
        q = d[i] - x - e2[i - 1] / q
        if abs(q) < pivmin:
            q = -pivmin
        if q < 0.0:
            count += 1
    return count


@njit(cache=True, nogil=True)
def _sturm_counts(d, e2, shifts, pivmin):
    out = np.empty(shifts.shape[0], dtype=np.int64)
    for s in range(shifts.shape[0]):
        out[s] = _sturm_count_one(d, e2, shifts[s], pivmin)
    return out


@njit(cache=True, nogil=True)
def _bisect_indices(d, e2, pivmin, idx):
    """Eigenvalues number ``idx[j]`` (0-based, ascending) by bisection."""
    n = d.shape[0]
    out = np.empty(idx.shape[0])
    if n == 0:
        return out
    lo0 = np.inf
    hi0 = -np.inf
    for i in range(n):
        r = 0.0
        if i > 0:
            r += np.sqrt(e2[i - 1])
        if i < n - 1:
            r += np.sqrt(e2[i])
        lo0 = min(lo0, d[i] - r)
        hi0 = max(hi0, d[i] + r)
    scale = max(abs(lo0), abs(hi0))
    lo0 -= 2.0 * 2.220446049250313e-16 * scale + 4.0 * pivmin
    hi0 += 2.0 * 2.220446049250313e-16 * scale + 4.0 * pivmin
    for jj in range(idx.shape[0]):
        j = idx[jj]
        lo = lo0
        hi = hi0
        for _ in range(200):
            if hi - lo <= 2.0 * 2.220446049250313e-16 * max(abs(lo), abs(hi)) + pivmin:
                break
            mid = 0.5 * (lo + hi)
            if _sturm_count_one(d, e2, mid, pivmin) > j:
                hi = mid
            else:
                lo = mid
        out[jj] = 0.5 * (lo + hi)
    return out


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending eigenvalues and eigenvectors (columns of ``basis``)."""

    eigenvalues: np.ndarray
    basis: np.ndarray
    sweeps: int = 0
    off_norm: float = 0.0

    def reconstruct(self) -> np.ndarray:
        v = self.basis
        return (v * self.eigenvalues) @ v.conj().T


@dataclass(frozen=True)
class SingularValues:
    """Singular values stored in nonincreasing order.

    ``largest(k)`` is Sigma_k (1-based, decreasing order) and
    ``smallest(k)`` is sigma_k (1-based, increasing order); both index the
    same array.
    """

    descending: np.ndarray = field(repr=True)

    def __len__(self) -> int:
        return int(self.descending.shape[0])

    @property
    def ascending(self) -> np.ndarray:
        return self.descending[::-1]

    @property
    def norm(self) -> float:
        return float(self.descending[0]) if len(self) else 0.0

    def largest(self, k: int) -> float:
        if not 1 <= k <= len(self):
            raise IndexError(f"Sigma_{k} undefined for dimension {len(self)}")
        return float(self.descending[k - 1])

    def smallest(self, k: int) -> float:
        if not 1 <= k <= len(self):
            raise IndexError(f"sigma_{k} undefined for dimension {len(self)}")
        return float(self.descending[len(self) - k])


# ---------------------------------------------------------------------------
# public routines
# ---------------------------------------------------------------------------


def as_square(a) -> np.ndarray:
    """Return ``a`` as a finite square 2-D array (real or complex)."""
    arr = np.asarray(a)
    if arr.dtype.kind not in "fc":
        arr = arr.astype(np.float64)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ContractViolation(f"expected a square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ContractViolation("matrix has non-finite entries")
    if arr.dtype not in (np.float64, np.complex128):
        arr = arr.astype(np.complex128 if arr.dtype.kind == "c" else np.float64)
    return arr


def hermitian_defect(a: np.ndarray) -> float:
    """``||a - a^*||_F / (1 + ||a||_F)``."""
    return float(np.linalg.norm(a - a.conj().T) / (1.0 + np.linalg.norm(a)))


def is_hermitian(a, rtol: float = HERMITIAN_RTOL) -> bool:
    arr = as_square(a)
    return hermitian_defect(arr) <= rtol


def hermitian_eig(a, tol: float = DEFAULT_TOL, max_sweeps: int = MAX_SWEEPS) -> EigenDecomposition:
    """Full eigendecomposition of a Hermitian matrix by cyclic Jacobi.

    Convergence is declared when the off-diagonal Frobenius norm drops below
    ``tol * (1 + ||a||_F)``.  Eigenvalues are returned ascending with ties
    kept in index order.
    """
    if tol <= 0:
        raise ContractViolation("tol must be positive")
    arr = as_square(a)
    if hermitian_defect(arr) > HERMITIAN_RTOL:
        raise ContractViolation("hermitian_eig requires a Hermitian matrix")
    n = arr.shape[0]
    work = np.array(0.5 * (arr + arr.conj().T), dtype=np.complex128)
    basis = np.eye(n, dtype=np.complex128)
    if n == 0:
        return EigenDecomposition(np.zeros(0), basis)
    tol_abs = tol * (1.0 + float(np.linalg.norm(arr)))
    sweeps, off = _jacobi_cyclic(work, basis, tol_abs, max_sweeps, True)
    if sweeps < 0:
        raise ConvergenceError(
            f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal norm {off:.3e})",
            off_norm=off,
            sweeps=max_sweeps,
        )
    w = np.real(np.diag(work)).copy()
    order = np.argsort(w, kind="stable")
    return EigenDecomposition(w[order], basis[:, order], sweeps=int(sweeps), off_norm=float(off))


def tridiagonal_form(a) -> tuple[np.ndarray, np.ndarray]:
    """Real symmetric tridiagonal ``(diag, offdiag**2)`` similar to Hermitian ``a``."""
    arr = as_square(a)
    n = arr.shape[0]
    if n == 0:
        return np.zeros(0), np.zeros(0)
    if n <= 2 or not np.any(np.triu(arr, 2)):
        d = np.real(np.diag(arr)).astype(np.float64)
        e2 = np.abs(np.diag(arr, -1)) ** 2
        return d, np.asarray(e2, dtype=np.float64)
    work = np.array(0.5 * (arr + arr.conj().T))
    return _householder_tridiagonal(work)


def _pivmin(e2: np.ndarray) -> float:
    return _TINY * max(1.0, float(e2.max()) if e2.size else 1.0)


def count_below(diag: np.ndarray, offdiag2: np.ndarray, shifts) -> np.ndarray:
    """Number of eigenvalues strictly below each shift (Sturm/inertia count)."""
    x = np.atleast_1d(np.asarray(shifts, dtype=np.float64))
    if diag.size == 0:
        return np.zeros(x.shape, dtype=np.int64)
    return _sturm_counts(diag, offdiag2, x, _pivmin(offdiag2))


def eigvalsh(a, tol: float = DEFAULT_TOL, method: str = "auto", indices=None) -> np.ndarray:
    """Ascending eigenvalues of a Hermitian matrix.

    ``method`` is ``"jacobi"``, ``"sturm"`` or ``"auto"`` (Jacobi up to
    ``JACOBI_MAX_DIM``, tridiagonal bisection above).  ``indices`` selects
    0-based positions in the ascending spectrum; only the bisection route
    profits from it.
    """
    arr = as_square(a)
    if hermitian_defect(arr) > HERMITIAN_RTOL:
        raise ContractViolation("eigvalsh requires a Hermitian matrix")
    n = arr.shape[0]
    if method == "auto":
        method = "jacobi" if n <= JACOBI_MAX_DIM else "sturm"
    if method == "jacobi":
        if n == 0:
            return np.zeros(0)
        work = np.array(0.5 * (arr + arr.conj().T), dtype=np.complex128)
        dummy = np.zeros((1, 1), dtype=np.complex128)
        tol_abs = tol * (1.0 + float(np.linalg.norm(arr)))
        sweeps, off = _jacobi_cyclic(work, dummy, tol_abs, MAX_SWEEPS, False)
        if sweeps < 0:
            raise ConvergenceError(
                f"Jacobi did not converge (off-diagonal norm {off:.3e})", off_norm=off, sweeps=MAX_SWEEPS
            )
        w = np.sort(np.real(np.diag(work)))
        return w if indices is None else w[np.asarray(indices, dtype=np.int64)]
    if method != "sturm":
        raise ValueError(f"unknown method {method!r}")
    d, e2 = tridiagonal_form(arr)
    idx = np.arange(n) if indices is None else np.asarray(indices, dtype=np.int64)
    if n == 0 or idx.size == 0:
        return np.zeros(idx.size)
    return _bisect_indices(d, e2, _pivmin(e2), idx)


def _clamp(desc: np.ndarray) -> np.ndarray:
    if desc.size and desc[0] > 0:
        desc = np.where(desc < SV_CLAMP * desc[0], 0.0, desc)
    return desc


def svd_values(a, tol: float = DEFAULT_TOL) -> SingularValues:
    """Singular values of a square matrix, descending.

    Computed as square roots of the eigenvalues of ``a^* a`` (negative
    round-off clamped to zero); Hermitian input uses ``|eig(a)|`` directly.
    Values below ``1e-10 * Sigma_1`` are set to zero.
    """
    if tol <= 0:
        raise ContractViolation("tol must be positive")
    arr = as_square(a)
    if arr.shape[0] == 0 or not np.any(arr):
        return SingularValues(np.zeros(arr.shape[0]))
    if hermitian_defect(arr) <= 1e-14:
        w = np.abs(eigvalsh(arr, tol))
    else:
        g = arr.conj().T @ arr
        w = np.sqrt(np.clip(eigvalsh(g, tol), 0.0, None))
    desc = np.sort(w)[::-1].copy()
    return SingularValues(_clamp(desc))

def extreme_singular_values(a, k: int) -> tuple[np.ndarray, np.ndarray]:
    """The ``k`` largest (descending) and ``k`` smallest (ascending) singular values.

    Equivalent to slicing :func:`svd_values` but bisects only for the needed
    positions on large matrices.
    """
    arr = as_square(a)
    n = arr.shape[0]
    k = min(k, n)
    if n <= JACOBI_MAX_DIM or 4 * k >= n or not np.any(arr):
        sv = svd_values(arr)
        return sv.descending[:k].copy(), sv.ascending[:k].copy()
    if hermitian_defect(arr) <= 1e-14:
        d, e2 = tridiagonal_form(arr)
        j0 = int(count_below(d, e2, [0.0])[0])
        idx = sorted(
            set(range(k))
            | set(range(n - k, n))
            | set(range(max(0, j0 - k), min(n, j0 + k)))
        )
        w = np.abs(_bisect_indices(d, e2, _pivmin(e2), np.asarray(idx, dtype=np.int64)))
        w.sort()
        top, bottom = w[::-1][:k].copy(), w[:k].copy()
    else:
        g = arr.conj().T @ arr
        d, e2 = tridiagonal_form(g)
        idx = np.asarray(list(range(k)) + list(range(n - k, n)), dtype=np.int64)
        w = np.sqrt(np.clip(_bisect_indices(d, e2, _pivmin(e2), idx), 0.0, None))
        bottom, top = w[:k].copy(), w[k:][::-1].copy()
    if top.size and top[0] > 0:
        top = np.where(top < SV_CLAMP * top[0], 0.0, top)
        bottom = np.where(bottom < SV_CLAMP * top[0], 0.0, bottom)
    return top, bottom


def spectral_norm(a) -> float:
    top, _ = extreme_singular_values(a, 1)
    return float(top[0]) if top.size else 0.0
