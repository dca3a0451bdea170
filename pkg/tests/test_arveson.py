from __future__ import annotations

import numpy as np
import pytest

from seqspec import sequences as sq
from seqspec.arveson import (
    Rules,
    SpectrumTable,
    classify_point,
    cross_check_fredholm,
    dichotomy_audit,
    eig_counts,
    essential_spectrum_estimate,
)
from seqspec.errors import ConfigurationError, ContractViolation
from seqspec.sequences import Restriction
from seqspec.toeplitz import StructuredToeplitzSequence, Symbol, assemble

from oracles import tridiagonal_count


@pytest.fixture(scope="module")
def tri():
    return assemble(StructuredToeplitzSequence(Symbol({-1: 1, 1: 1})))


def test_eig_counts_examples(tri):
    assert eig_counts(sq.identity(), 1.0, 0.5, 6)[5] == 6
    assert eig_counts(sq.zero(), 1.0, 0.5, 8) == [0] * 8
    assert eig_counts(tri, 0.0, 1.0, 4)[3] == 2


def test_eig_counts_match_oracle(tri):
    for lam, eps in [(0.0, 0.05), (1.0, 0.1), (-1.5, 0.2), (2.0, 0.05), (1.0, 1.0)]:
        got = eig_counts(tri, lam, eps, 120)
        assert got == [tridiagonal_count(n, lam, eps) for n in range(1, 121)]


def test_endpoint_excluded():
    # eigenvalues 0 and 1, interval (0, 1) around 0.5 with eps exactly 0.5
    seq = sq.direct_sum(sq.zero(), sq.identity())
    assert eig_counts(seq, 0.5, 0.5, 4) == [0, 0, 0, 0]
    assert eig_counts(seq, 0.5, 0.5 + 2e-9, 4) == [2, 4, 6, 8]


def test_eig_counts_contract():
    with pytest.raises(ContractViolation):
        eig_counts(sq.mul(sq.identity(), sq.identity()), 0.0, 1.0, 4)
    lying = sq.MatrixSequence(sq.IDENTITY_DIMS, lambda n: np.eye(n, k=-1), selfadjoint_hint=True)
    with pytest.raises(ContractViolation):
        eig_counts(lying, 0.0, 1.0, 4)
    with pytest.raises(ConfigurationError):
        eig_counts(sq.identity(), 0.0, 0.0, 4)


def test_classify_examples(tri):
    assert classify_point(tri, 0.0, horizon=256).verdict == "Essential"
    t = classify_point(tri, 3.0, horizon=256)
    assert (t.verdict, t.bound, t.eps) == ("Transient", 0, 0.4)
    alt = sq.alternate(sq.identity(), sq.zero())
    assert classify_point(alt, 0.0, horizon=256).verdict == "Undecided"


def test_classify_invariants(tri):
    c = classify_point(tri, 2.25, horizon=128)
    assert c.verdict == "Transient"
    row = c.table.counts[list(c.table.half_widths).index(c.eps)]
    assert row.max() <= c.bound
    e = classify_point(tri, 0.5, horizon=256)
    assert e.verdict == "Essential"
    row = e.table.counts[-1]
    assert row[-1] >= 1.5 * row[128 - 1] and row[-1] >= 4
    assert np.all(e.table.counts <= e.table.ns[None, :])


def test_classify_ladder_validation(tri):
    with pytest.raises(ConfigurationError):
        classify_point(tri, 0.0, ladder=[0.1, 0.2], horizon=32)
    with pytest.raises(ConfigurationError):
        classify_point(tri, 0.0, ladder=[], horizon=32)


def test_rules_are_configurable(tri):
    strict = Rules(c_min=1000)
    assert classify_point(tri, 0.0, horizon=128, rules=strict).verdict == "Undecided"
    alt = sq.alternate(sq.identity(), sq.zero())
    assert classify_point(alt, 0.0, horizon=128, rules=Rules(persistent=False)).verdict == "Essential"


def test_spectrum_estimate_examples(tri):
    est = essential_spectrum_estimate(sq.identity(), [0.0, 0.5, 1.0], horizon=128)
    assert est.non_transient == [1.0]
    grid = list(np.arange(-3, 3.01, 0.25))
    est = essential_spectrum_estimate(tri, grid, horizon=256)
    assert est.non_transient == [x for x in grid if abs(x) <= 2.0]
    assert est.bounded
    alt = sq.alternate(sq.identity(), sq.zero())
    est = essential_spectrum_estimate(alt, [0.0, 1.0], horizon=128)
    assert est.non_transient == [0.0, 1.0]


def test_audit_examples(tri):
    grid = list(np.arange(-3, 3.01, 0.25))
    assert dichotomy_audit(tri, grid, horizon=256).flag
    alt = sq.alternate(sq.identity(), sq.zero())
    rep = dichotomy_audit(alt, [0.0, 0.5, 1.0], horizon=128)
    assert rep.undecided == [0.0, 1.0] and not rep.flag
    even = sq.restrict(alt, Restriction.arithmetic(2, 2))
    rep = dichotomy_audit(even, [0.0, 0.5, 1.0], horizon=64)
    assert rep.flag and rep.essential == [0.0] and rep.transient == [0.5, 1.0]


def test_audit_is_order_independent(tri):
    grid = [1.0, -2.5, 0.0, 2.25]
    a = dichotomy_audit(tri, grid, horizon=96)
    b = dichotomy_audit(tri, grid[::-1], horizon=96)
    assert sorted(a.essential) == sorted(b.essential) and sorted(a.transient) == sorted(b.transient)


def test_cross_check_examples(tri):
    c = cross_check_fredholm(tri, 3.0, horizon=128)
    assert c.outcome == "agree-transient" and c.fredholm.k == 0 and c.fredholm.floor >= 1.0
    assert cross_check_fredholm(tri, 0.0, horizon=256).outcome == "agree-essentialish"
    assert cross_check_fredholm(sq.identity(), 0.0, horizon=64).outcome == "agree-transient"


def test_report_records(tri):
    d = classify_point(tri, 3.0, horizon=64).to_dict()
    assert set(d) == {"lambda", "verdict", "eps", "bound_or_growth", "counts_summary"}
    assert d["bound_or_growth"] == {"bound": 0}
    csv = classify_point(tri, 0.0, horizon=16).table.to_csv().splitlines()
    assert csv[0] == "lambda,eps,n,count" and len(csv) == 1 + 4 * 16


def test_spectrum_table_threads(tri):
    a = SpectrumTable(tri, 80)
    b = SpectrumTable(tri, 80, workers=3)
    assert np.array_equal(a.counts(0.3, 0.1), b.counts(0.3, 0.1))
