"""
Recovering the dichotomy by restriction
=======================================

The sequence I_1, 0_2, I_3, 0_4, ... has neither essential nor transient
points at 0 and 1: each value is hit by half of the matrices.  Passing to a
subsequence along which the singular values settle removes the mixing, and
on that subsequence every point is classified again.
"""

from __future__ import annotations

from seqspec import sequences as sq
from seqspec.arveson import dichotomy_audit
from seqspec.restriction import ExtractionRequest, extract_convergent, verify_convergence

alt = sq.alternate(sq.identity(), sq.zero())
grid = [0.0, 0.5, 1.0]
print("full sequence undecided at:", dichotomy_audit(alt, grid, horizon=128).undecided)

res = extract_convergent(ExtractionRequest([alt], 128, 0.01, k_max=3))
eta = res.eta.to_list()
print("extracted", len(eta), "indices, first few:", eta[:6], "success:", res.success)
print("independent re-check converged:", verify_convergence([alt], res.eta, 0.01, 3, 128).converged)

sub = sq.restrict(alt, res.eta)
rep = dichotomy_audit(sub, grid, horizon=len(eta))
print("restricted: essential", rep.essential, "transient", rep.transient, "undecided", rep.undecided)
