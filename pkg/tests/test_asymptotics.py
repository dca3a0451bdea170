from __future__ import annotations

import io
import math

import numpy as np
import pytest

from seqspec import sequences as sq
from seqspec.asymptotics import (
    compactness_test,
    essential_rank,
    fredholm_test,
    singular_profile,
    zero_sequence_test,
)
from seqspec.errors import ConfigurationError
from seqspec.sequences import Restriction
from seqspec.toeplitz import StructuredToeplitzSequence, Symbol, assemble

from oracles import low_rank, one_minus_t_sigma, svals_desc

E1 = np.array([[1.0]])


def toeplitz(coeffs, **kw):
    return assemble(StructuredToeplitzSequence(Symbol(coeffs), **kw))


def rank_one():
    return sq.padded(E1)


def test_profile_identity():
    p = singular_profile(sq.identity(), 8, 3)
    assert np.array_equal(p.desc, np.where(np.arange(3)[None, :] < p.dims[:, None], 1.0, 0.0))
    assert np.all(p.desc[2:] == 1.0)


def test_profile_shift():
    p = singular_profile(toeplitz({1: 1}), 16, 3)
    for i, n in enumerate(p.ns):
        ref = svals_desc(np.eye(n, k=-1))
        assert np.allclose(p.desc[i, : min(3, n)], ref[:3])
    assert np.all(p.sigma(1) < 1e-7)
    assert np.allclose(p.sigma(2)[1:], 1.0)


def test_profile_rank_one():
    p = singular_profile(rank_one(), 16, 3)
    assert np.allclose(p.Sigma(1), 1.0)
    assert np.all(p.Sigma(2) == 0.0)


def test_profile_matches_oracle_and_invariants(rng):
    k = low_rank(rng, 5, 3)
    seq = toeplitz({-1: 0.3, 0: 1.0, 2: 0.2j}, k_block=k)
    p = singular_profile(seq, 40, 6)
    assert p.ns[0] == 5
    for i, n in enumerate(p.ns):
        ref = svals_desc(seq.eval(n))
        m = min(6, n)
        assert np.allclose(p.desc[i, :m], ref[:m], atol=1e-10)
        assert np.allclose(p.asc[i, :m], ref[::-1][:m], atol=1e-7)
        assert np.all(p.desc[i, m:] == 0) and np.all(np.isnan(p.asc[i, m:]))
    assert np.all(np.diff(p.desc, axis=1) <= 1e-14) and np.all(p.desc >= 0)
    assert np.allclose(p.Sigma(1), [np.linalg.norm(seq.eval(n), 2) for n in p.ns])


def test_profile_threads_match_serial():
    seq = toeplitz({-1: 1, 1: 1, 0: 0.5})
    a = singular_profile(seq, 60, 4)
    b = singular_profile(seq, 60, 4, workers=4)
    assert np.array_equal(a.desc, b.desc) and np.array_equal(a.asc, b.asc, equal_nan=True)


def test_profile_preconditions():
    with pytest.raises(ConfigurationError):
        singular_profile(sq.identity(), 3, 2)
    with pytest.raises(ConfigurationError):
        singular_profile(sq.identity(), 8, 0)


def test_profile_csv():
    p = singular_profile(rank_one(), 4, 2)
    lines = p.to_csv().splitlines()
    assert lines[0] == "n,dim,k,sigma_desc"
    assert lines[1] == "1,1,1,1.0"
    assert len(lines) == 1 + 1 + 2 * 3
    assert p.to_plot_csv().startswith("# n sigma_1 sigma_2")


def test_profile_restrict_matches_restricted_sequence():
    seq = toeplitz({0: 1, 1: 0.5})
    eta = Restriction.arithmetic(2, 3)
    p = singular_profile(seq, 60, 3).restrict(eta)
    q = singular_profile(sq.restrict(seq, eta), eta.length_within(60), 3)
    assert np.array_equal(p.ns, q.ns) and np.allclose(p.desc, q.desc)


def test_zero_sequence_examples():
    assert zero_sequence_test(singular_profile(sq.scaled_identity(lambda n: 1 / n), 64, 1), 0.05)
    assert not zero_sequence_test(singular_profile(sq.identity(), 64, 1), 0.05)
    assert zero_sequence_test(singular_profile(sq.zero(), 64, 1), 1e-6)


def test_compactness_examples(rng):
    c = compactness_test(singular_profile(rank_one(), 64, 4))
    assert (c.verdict, c.ess_rank) == ("Compact", 1)
    c = compactness_test(singular_profile(sq.identity(), 64, 4))
    assert c.verdict == "NotCompact" and c.floor == pytest.approx(1.0)
    k = low_rank(rng, 6, 2)
    l = low_rank(rng, 4, 1)
    seq = toeplitz({}, k_block=k, l_block=l)
    c = compactness_test(singular_profile(seq, 64, 6))
    assert (c.verdict, c.ess_rank) == ("Compact", 3)


def test_compactness_needs_two():
    with pytest.raises(ConfigurationError):
        compactness_test(singular_profile(sq.identity(), 8, 1))


def test_compact_verdict_invariant(rng):
    seq = toeplitz({}, k_block=low_rank(rng, 6, 4), noise=sq.scaled_identity(lambda n: 1 / n))
    p = singular_profile(seq, 64, 8)
    c = compactness_test(p, 0.05)
    r = c.ess_rank
    assert c.verdict == "Compact" and r == 4
    assert c.tail_sup[r] < 0.05 and c.tail_sup[r - 1] >= 0.05


def test_essential_rank_examples(rng):
    assert essential_rank(singular_profile(sq.zero(), 32, 3)) == 0
    assert essential_rank(singular_profile(rank_one(), 32, 3)) == 1
    seq = toeplitz({}, k_block=low_rank(rng, 6, 2), l_block=low_rank(rng, 5, 1))
    assert essential_rank(singular_profile(seq, 64, 6)) == 3
    assert essential_rank(singular_profile(sq.identity(), 32, 4)) == math.inf


def test_fredholm_examples():
    v = fredholm_test(singular_profile(toeplitz({1: 1}), 64, 3))
    assert (v.verdict, v.k) == ("Fredholm", 1) and v.floor == pytest.approx(1.0)
    v = fredholm_test(singular_profile(sq.identity(), 64, 3))
    assert (v.verdict, v.k) == ("Fredholm", 0) and v.floor == pytest.approx(1.0)


def test_fredholm_one_minus_t():
    p = singular_profile(toeplitz({0: 1, 1: -1}), 512, 3)
    # frozen against the closed form 2 sin((2j-1) pi / (2(2n+1)))
    finals = [p.sigma(j)[-1] for j in (1, 2, 3)]
    assert np.allclose(finals, [one_minus_t_sigma(512, j) for j in (1, 2, 3)], rtol=1e-5)
    assert np.allclose(finals, [0.0030649672, 0.0091948729, 0.0153246923], rtol=1e-6)
    assert fredholm_test(p, 1e-3).verdict == "NotNormallySolvable"


def test_fredholm_alternate_undecided():
    v = fredholm_test(singular_profile(sq.alternate(sq.identity(), sq.zero()), 128, 3))
    assert v.verdict == "Undecided"


def test_fredholm_requires_lower_rows_to_vanish():
    # sigma_1 oscillates between 0 and 1, sigma_2 is identically 1
    alt = sq.alternate(sq.padded(np.zeros((1, 1))) + sq.identity(), sq.identity() - sq.padded(E1))
    v = fredholm_test(singular_profile(alt, 64, 3))
    assert v.verdict == "Undecided"
