from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from softsrocc.correlation import hard_rank, plcc, srocc, srocc_closed_form
from softsrocc.errors import DegenerateVariance, LengthMismatch, NonFinite

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


def exact_pearson(a, b):
    """Rational-arithmetic Pearson r squared with sign, returned as (sign, r**2)."""
    a = [Fraction(v) for v in a]
    b = [Fraction(v) for v in b]
    ma, mb = sum(a) / len(a), sum(b) / len(b)
    cov = sum((x - ma) * (y - mb) for x, y in zip(a, b))
    va = sum((x - ma) ** 2 for x in a)
    vb = sum((y - mb) ** 2 for y in b)
    return (1 if cov >= 0 else -1), cov * cov / (va * vb)


def brute_rank(x):
    out = []
    for xi in x:
        out.append(sum(1.0 if xi > xj else 0.5 if xi == xj else 0.0 for xj in x))
    return np.array(out)


class TestPlcc:
    def test_identity(self):
        assert plcc([1, 2, 3], [1, 2, 3]) == pytest.approx(1.0, abs=1e-15)

    def test_reversed(self):
        assert plcc([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0, abs=1e-15)

    def test_hand_value(self):
        sign, r2 = exact_pearson([1, 2, 3, 4], [1, 3, 2, 4])
        assert (sign, r2) == (1, Fraction(16, 25))
        assert plcc([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-15)

    def test_constant_raises(self):
        with pytest.raises(DegenerateVariance):
            plcc([1, 1, 1], [1, 2, 3])
        with pytest.raises(DegenerateVariance):
            plcc([1, 2, 3], [5, 5, 5])

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            plcc([1, 2, 3], [1, 2])

    def test_non_finite(self):
        with pytest.raises(NonFinite):
            plcc([1, np.nan, 3], [1, 2, 3])

    def test_needs_two_points(self):
        with pytest.raises(ValueError):
            plcc([1.0], [2.0])

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.tuples(finite, finite), min_size=3, max_size=20),
           st.floats(0.1, 10), st.floats(-5, 5), st.booleans())
    def test_symmetry_and_affine(self, pairs, alpha, beta, flip):
        a = np.array([p[0] for p in pairs])
        b = np.array([p[1] for p in pairs])
        if np.ptp(a) < 1e-3 or np.ptp(b) < 1e-3:
            return
        r = plcc(a, b)
        assert plcc(b, a) == pytest.approx(r, abs=1e-12)
        alpha = -alpha if flip else alpha
        assert plcc(alpha * a + beta, b) == pytest.approx(np.sign(alpha) * r, abs=1e-9)

    def test_matches_rational_arithmetic(self, rng):
        for _ in range(50):
            a = rng.integers(-20, 20, 7)
            b = rng.integers(-20, 20, 7)
            if np.ptp(a) == 0 or np.ptp(b) == 0:
                continue
            sign, r2 = exact_pearson(a.tolist(), b.tolist())
            assert plcc(a, b) == pytest.approx(sign * float(r2) ** 0.5, abs=1e-14)


class TestHardRank:
    def test_examples(self):
        np.testing.assert_array_equal(hard_rank([0.3, 0.1, 0.2]), [2.5, 0.5, 1.5])
        np.testing.assert_array_equal(hard_rank([5.0]), [0.5])
        np.testing.assert_array_equal(hard_rank([1, 1]), [1.0, 1.0])

    def test_matches_pairwise_brute_force(self, rng):
        for n in range(1, 30):
            x = rng.integers(0, 6, n).astype(float)
            np.testing.assert_array_equal(hard_rank(x), brute_rank(x))

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.integers(-5, 5), min_size=1, max_size=40))
    def test_rank_sum_exact(self, xs):
        n = len(xs)
        assert hard_rank(np.array(xs, float)).sum() == n * n / 2

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(-1000, 1000), min_size=1, max_size=30), st.integers(-10**6, 10**6))
    def test_translation_invariance(self, xs, c):
        x = np.array(xs, dtype=float)
        np.testing.assert_array_equal(hard_rank(x + c), hard_rank(x))

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.integers(-1000, 1000), min_size=1, max_size=30))
    def test_monotone_map_invariance(self, xs):
        x = np.array(xs, dtype=float)
        np.testing.assert_array_equal(hard_rank(np.exp(x / 100.0)), hard_rank(x))

    def test_non_finite(self):
        with pytest.raises(NonFinite):
            hard_rank([1.0, np.inf])


def piecewise_monotone(rng, lo=-10.0, hi=10.0, knots=6):
    xs = np.sort(rng.uniform(lo, hi, knots))
    xs = np.concatenate([[lo - 1], xs, [hi + 1]])
    ys = np.cumsum(rng.uniform(0.1, 3.0, xs.size))
    return lambda v: np.interp(v, xs, ys)


class TestSrocc:
    def test_examples(self):
        assert srocc([1, 2, 3, 4, 5], [10, 20, 30, 40, 50]) == pytest.approx(1.0, abs=1e-15)
        assert srocc([1, 2, 3, 4, 5], [1, 2, 3, 5, 4]) == pytest.approx(0.9, abs=1e-12)
        assert srocc([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0, abs=1e-15)

    def test_closed_form_hand_value(self):
        # d^2 = {0,0,0,1,1}: 1 - 6*2/(5*24)
        assert srocc_closed_form([1, 2, 3, 4, 5], [1, 2, 3, 5, 4]) == pytest.approx(0.9, abs=1e-15)

    def test_formulations_agree(self, rng):
        for _ in range(1000):
            n = int(rng.integers(3, 9))
            q = rng.permutation(n) + rng.uniform(0, 0.5, n)
            p = rng.normal(size=n)
            assert abs(srocc(q, p) - srocc_closed_form(q, p)) < 1e-12

    def test_closed_form_rejects_ties(self):
        with pytest.raises(ValueError):
            srocc_closed_form([1, 1, 2], [1, 2, 3])

    def test_ties_use_average_ranks(self):
        q = [1, 2, 2, 3]
        p = [1, 3, 2, 4]
        assert srocc(q, p) == pytest.approx(plcc([0.5, 2.0, 2.0, 3.5], [0.5, 2.5, 1.5, 3.5]), abs=1e-15)

    def test_matches_scipy_with_ties(self, rng):
        stats = pytest.importorskip("scipy.stats")
        for _ in range(200):
            q = rng.integers(0, 5, 15).astype(float)
            p = rng.integers(0, 5, 15).astype(float)
            if np.ptp(q) == 0 or np.ptp(p) == 0:
                continue
            assert srocc(q, p) == pytest.approx(stats.spearmanr(q, p).statistic, abs=1e-12)

    def test_all_ties_raise(self):
        with pytest.raises(DegenerateVariance):
            srocc([2, 2, 2], [1, 2, 3])

    def test_monotone_invariance(self, rng):
        for _ in range(100):
            q = rng.normal(size=12) * 3
            p = rng.normal(size=12) * 3
            f, g = piecewise_monotone(rng), piecewise_monotone(rng)
            assert srocc(f(q), g(p)) == pytest.approx(srocc(q, p), abs=1e-12)
