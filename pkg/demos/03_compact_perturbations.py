"""
Compact perturbations and their essential rank
==============================================

Glue fixed low-rank blocks into the upper-left and lower-right corners of
A_n and add noise of size 1/n.  The noise tends to zero, so only the two
blocks survive in the limit and the essential rank is the sum of their
ranks.  At a finite horizon it shows up as the first singular value row
that falls below the tolerance.
"""

from __future__ import annotations

import numpy as np

from seqspec import sequences as sq
from seqspec.asymptotics import compactness_test, essential_rank, singular_profile
from seqspec.toeplitz import StructuredToeplitzSequence, Symbol, assemble

rng = np.random.default_rng(0)


def low_rank(size, rank):
    a = rng.standard_normal((size, rank))
    b = rng.standard_normal((rank, size))
    return a @ b


K, L = low_rank(8, 2), low_rank(8, 3)
spec = StructuredToeplitzSequence(Symbol({}), K, L, sq.scaled_identity(lambda n: 1.0 / n), 2, 3)
p = singular_profile(assemble(spec), 128, 8)

print("Sigma_k at n = 128:", np.round(p.desc[-1], 4))
print("essential rank (tol 0.05):", essential_rank(p, 0.05), "expected", spec.essential_rank)
print("compactness at tol 0.05:", compactness_test(p, 0.05).verdict)

# without the corners the sequence is a zero sequence
zero = assemble(StructuredToeplitzSequence(Symbol({}), noise=sq.scaled_identity(lambda n: 1.0 / n)))
print("noise only, essential rank:", essential_rank(singular_profile(zero, 128, 4), 0.05))
