import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from moswarm.errors import UsageError
from moswarm.stats import EXACT_MAX_N, format_report, mean_ranks, wilcoxon_signed_rank
from oracles import wilcoxon_bruteforce


def test_identical_series():
    res = wilcoxon_signed_rank([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert res.p_value == 1.0 and res.method == "degenerate" and res.n_effective == 0
    assert "no nonzero differences" in format_report(res)
    assert not res.significant


def test_five_positive_differences():
    res = wilcoxon_signed_rank([2, 3, 4, 5, 6], [1, 1, 1, 1, 1])
    assert res.p_value == 0.0625
    assert (res.w_plus, res.w_minus, res.statistic) == (15.0, 0.0, 0.0)


def test_mean_ranks_ties():
    assert mean_ranks([3.0, 1.0, 3.0, 2.0]).tolist() == [3.5, 1.0, 3.5, 2.0]


def test_zero_differences_dropped():
    res = wilcoxon_signed_rank([1, 2, 3, 4], [1, 1, 1, 1])
    assert res.n_effective == 3


values = st.integers(-6, 6).map(float)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(values, values), min_size=1, max_size=12))
def test_matches_enumeration(pairs):
    a, b = zip(*pairs)
    p, wp, wm = wilcoxon_bruteforce(a, b)
    res = wilcoxon_signed_rank(a, b)
    assert res.p_value == pytest.approx(p, abs=1e-12)
    assert (res.w_plus, res.w_minus) == (wp, wm)


def test_symmetric_in_argument_order(rng):
    a, b = rng.normal(size=20), rng.normal(size=20)
    r1, r2 = wilcoxon_signed_rank(a, b), wilcoxon_signed_rank(b, a)
    assert r1.p_value == r2.p_value and r1.w_plus == r2.w_minus


def test_against_scipy_exact(rng):
    scipy_stats = pytest.importorskip("scipy.stats")
    for _ in range(20):
        a, b = rng.normal(size=18), rng.normal(0.3, 1, size=18)
        ref = scipy_stats.wilcoxon(a, b, method="exact")
        assert wilcoxon_signed_rank(a, b).p_value == pytest.approx(ref.pvalue, rel=1e-10)


def test_against_scipy_normal(rng):
    scipy_stats = pytest.importorskip("scipy.stats")
    a, b = rng.normal(size=60), rng.normal(0.4, 1, size=60)
    ref = scipy_stats.wilcoxon(a, b, method="approx", correction=True)
    res = wilcoxon_signed_rank(a, b)
    assert res.method == "normal"
    assert res.p_value == pytest.approx(ref.pvalue, rel=1e-9)


def test_normal_with_ties_against_scipy(rng):
    scipy_stats = pytest.importorskip("scipy.stats")
    a = rng.integers(0, 8, size=80).astype(float)
    b = rng.integers(1, 9, size=80).astype(float)
    ref = scipy_stats.wilcoxon(a, b, method="approx", correction=True, zero_method="wilcox")
    assert wilcoxon_signed_rank(a, b).p_value == pytest.approx(ref.pvalue, rel=1e-9)


def test_exact_boundary(rng):
    a = rng.normal(size=EXACT_MAX_N + 1)
    assert wilcoxon_signed_rank(a[:-1], np.zeros(EXACT_MAX_N)).method == "exact"
    assert wilcoxon_signed_rank(a, np.zeros(EXACT_MAX_N + 1)).method == "normal"


def test_clear_shift_is_significant(rng):
    a = rng.normal(size=60)
    res = wilcoxon_signed_rank(a + 1.0, a + rng.normal(0, 0.1, size=60))
    assert res.significant and res.p_value < 1e-6


@pytest.mark.parametrize("a, b", [([1, 2], [1]), ([], []), ([[1]], [[1]])])
def test_bad_input(a, b):
    with pytest.raises(UsageError):
        wilcoxon_signed_rank(a, b)
