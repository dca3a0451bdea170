"""
Counting eigenvalues of finite Toeplitz sections
================================================

The finite sections of the symbol t + 1/t are the tridiagonal matrices with
ones next to the diagonal.  Their eigenvalues are 2 cos(j pi / (n + 1)), so
every point of [-2, 2] collects more and more eigenvalues as n grows while
points outside stay empty.  The counting classifier sees exactly that.
"""

from __future__ import annotations

import numpy as np

from seqspec import sequences as sq
from seqspec.arveson import classify_point, dichotomy_audit, eig_counts
from seqspec.toeplitz import StructuredToeplitzSequence, Symbol, assemble

seq = assemble(StructuredToeplitzSequence(Symbol({-1: 1.0, 1: 1.0})))

# eigenvalue counts in (lam - 0.1, lam + 0.1) for a few sizes
for lam in (0.0, 1.9, 2.5):
    counts = eig_counts(seq, lam, 0.1, 256)
    print(f"lambda={lam:4}: n=32 -> {counts[31]:3d}, n=128 -> {counts[127]:3d}, n=256 -> {counts[255]:3d}")

# one point in detail: the count table over the eps ladder
c = classify_point(seq, 2.25, horizon=256)
print("\nlambda=2.25:", c.verdict, "bound", c.bound, "at eps", c.eps)

# the whole grid; every point gets a definite verdict
grid = np.round(np.arange(-3, 3.001, 0.25), 2)
rep = dichotomy_audit(seq, grid, horizon=256)
print("\nessential:", rep.essential)
print("transient:", rep.transient)
print("undecided:", rep.undecided, "-> dichotomy holds:", rep.flag)

# a sequence mixing two behaviours fails the dichotomy at its two values
alt = sq.alternate(sq.identity(), sq.zero())
print("\nalternating I, 0:", dichotomy_audit(alt, [0.0, 0.5, 1.0], horizon=128).undecided)
