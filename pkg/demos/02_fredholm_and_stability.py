"""
Fredholm sequences and stability
================================

A sequence is Fredholm when, after throwing away finitely many small
singular values, the rest stays away from zero.  The number thrown away is
the index k.  The finite sections of the shift lose exactly one singular
value, those of 1 - t lose a whole family that creeps towards zero, and the
sections of t - 2 keep all singular values above one.
"""

from __future__ import annotations

from seqspec.asymptotics import fredholm_test, singular_profile
from seqspec.toeplitz import StructuredToeplitzSequence, Symbol, assemble, stability_check, winding_number

shift = assemble(StructuredToeplitzSequence(Symbol({1: 1.0})))
p = singular_profile(shift, 128, 3)
print("shift: sigma_1..3 at n=128:", p.asc[-1])
v = fredholm_test(p)
print("       verdict", v.verdict, "k =", v.k, "floor", round(v.floor, 6))

one_minus_t = assemble(StructuredToeplitzSequence(Symbol({0: 1.0, 1: -1.0})))
p = singular_profile(one_minus_t, 512, 3)
print("\n1 - t: sigma_1 at n=128, 256, 512:", p.sigma(1)[[127, 255, 511]])
print("       verdict", fredholm_test(p).verdict)

# stability: the direct estimate and the limit-operator test must agree
for coeffs, name in (({0: -2.0, 1: 1.0}, "t - 2"), ({1: 1.0}, "t")):
    sym = Symbol(coeffs)
    s = stability_check(StructuredToeplitzSequence(sym), 256)
    print(f"\n{name}: winding {winding_number(sym)}, verdict {s.verdict}, floor {s.floor:.4f}, "
          f"limits invertible {s.limits_invertible}")
