import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cssqec import bounds
from cssqec.channels import sample_stochastic_defection
from cssqec.exceptions import UsageError

unit = st.floats(0, 1, allow_nan=False)


def rational_cdf(n, p, x):
    # independent of bounds.binomial_cdf_exact: plain loop over Fractions
    total = Fraction(0)
    for i in range(x + 1):
        total += math.comb(n, i) * p ** i * (1 - p) ** (n - i)
    return total


class TestEntropy:
    def test_half(self):
        assert bounds.entropy(0.5) == 1

    def test_endpoints(self):
        assert bounds.entropy(0) == bounds.entropy(1) == 0

    def test_printed_inverse_point(self):
        assert abs(bounds.entropy(0.110028) - 0.5) < 1e-5

    @given(unit)
    def test_symmetry(self, x):
        assert abs(bounds.entropy(x) - bounds.entropy(1 - x)) < 1e-12

    def test_out_of_range(self):
        with pytest.raises(UsageError):
            bounds.entropy(1.2)


class TestInverseEntropy:
    def test_known_points(self):
        assert bounds.inverse_entropy(1) == pytest.approx(0.5, abs=1e-9)
        assert bounds.inverse_entropy(0) == pytest.approx(0, abs=1e-9)
        assert abs(bounds.inverse_entropy(0.5) - 0.110028) < 1e-5

    @given(unit)
    def test_round_trip(self, y):
        x = bounds.inverse_entropy(y)
        assert 0 <= x <= 0.5
        # H has slope at most ~ log2((1-x)/x); the bisection error is 1e-9 in x
        assert abs(bounds.entropy(x) - y) < 1e-7


class TestRateWindow:
    def test_distance_window_at_zero_rate(self):
        lo, hi = bounds.distance_window(0.0)
        assert abs(hi - 0.220056) < 1e-5 and abs(lo - 0.110028) < 1e-5

    def test_upper_zero_at_crossing(self):
        n = 1_000_000
        w = bounds.rate_window(n, 0, round(0.220056 * n), round(0.220056 * n))
        assert abs(w.upper) < 1e-4

    def test_lower_zero_at_crossing(self):
        n = 1_000_000
        w = bounds.rate_window(n, 0, round(0.110028 * n), round(0.110028 * n))
        assert abs(w.lower) < 1e-4

    def test_classical_limit(self):
        n, d = 10_000, 500
        w = bounds.rate_window(n, 0, d, 1)
        assert w.upper == pytest.approx(1 - bounds.entropy(d / (2 * n)), abs=1e-3)
        assert w.lower == pytest.approx(1 - bounds.entropy(d / n), abs=2e-3)

    def test_worked_example_is_allowed(self):
        w = bounds.rate_window(10_000, 1000, 939, 939)
        assert w.allowed and w.guaranteed

    @given(st.integers(1, 500), st.integers(1, 500), st.integers(0, 100), st.integers(0, 100))
    def test_monotone(self, d1, d2, step1, step2):
        n = 1000
        a = bounds.rate_window(n, 1, d1, d2)
        b = bounds.rate_window(n, 1, d1 + step1, d2 + step2)
        assert b.upper <= a.upper + 1e-15
        if a.lower is not None and b.lower is not None:
            assert b.lower <= a.lower + 1e-15
        assert a.lower is None or a.upper >= a.lower


class TestThreshold:
    def test_values(self):
        lo, hi = bounds.threshold_summary()
        assert abs(lo - 0.055014) < 1e-5
        assert abs(hi - 0.110028) < 1e-5
        assert lo == hi / 2


class TestCurves:
    def test_crossings(self):
        (_, _, lower_at, _), (_, upper_at, _, _) = bounds.emit_rate_curves([0.110028, 0.220056])
        assert abs(upper_at) < 1e-4 and abs(lower_at) < 1e-4

    def test_small_distance_limit(self):
        (row,) = bounds.emit_rate_curves([1e-9])
        assert all(abs(v - 1) < 1e-6 for v in row[1:])

    def test_rejects_outside_range(self):
        with pytest.raises(UsageError):
            bounds.emit_rate_curves([0.6])


class TestSurvival:
    def test_p_zero(self):
        r = bounds.survival(100, 0.0, 11, 50)
        assert r.F_exact == r.P_exact == 1

    @pytest.mark.parametrize("n,p,x", [(5, "1/3", 2), (20, "1/20", 1), (30, "2/5", 11), (30, "1/2", 29)])
    def test_rational_oracle(self, n, p, x):
        want = rational_cdf(n, Fraction(p), x)
        assert bounds.binomial_cdf_exact(n, Fraction(p), x) == want
        got = bounds.binomial_cdf_parts(n, float(Fraction(p)), x)[0]
        assert got == pytest.approx(float(want), rel=1e-12)

    @settings(max_examples=40)
    @given(st.integers(1, 30), st.integers(1, 99), st.data())
    def test_rational_oracle_property(self, n, pct, data):
        x = data.draw(st.integers(0, n))
        p = Fraction(pct, 100)
        want = float(rational_cdf(n, p, x))
        f, tail = bounds.binomial_cdf_parts(n, float(p), x)
        assert f == pytest.approx(want, rel=1e-12, abs=1e-300)
        assert f + tail == pytest.approx(1, abs=1e-15)

    def test_tiny_tail_against_rational(self):
        # 1 - F at n = 400 is far below double epsilon; compare with the exact rational tail
        n, p, x = 400, Fraction(1, 100), 40
        exact_tail = 1 - rational_cdf(n, p, x)
        _, tail = bounds.binomial_cdf_parts(n, 0.01, x)
        assert tail == pytest.approx(float(exact_tail), rel=1e-9)

    @given(st.integers(10, 200), unit)
    def test_monotone_in_x(self, n, p):
        vals = [bounds.binomial_cdf_parts(n, p, x)[0] for x in range(0, n + 1, max(1, n // 10))]
        assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))

    def test_power_law(self):
        r = bounds.survival(1000, 0.05, 81, 7)
        assert r.P_exact == pytest.approx(r.F_exact ** 7, rel=1e-12)

    def test_printed_erf_form_reproduces_reported_numbers(self):
        r4 = bounds.survival(10_000, 0.04, 939, 10_000)
        assert r4.mu == 400 and round(r4.sigma) == 20
        assert 0.003 <= r4.P_erf <= 0.03
        r3 = bounds.survival(10_000, 0.03, 939, 10_000)
        assert 4e-24 <= r3.tail_erf <= 4e-22

    def test_asymptotic_tail_close_to_erfc(self):
        r3 = bounds.survival(10_000, 0.03, 939)
        assert r3.tail_asymptotic == pytest.approx(r3.tail_erf, rel=1e-3)

    @pytest.mark.parametrize("n", [1_000, 10_000])
    def test_erf_form_approaches_exact(self, n):
        p = 0.05
        mu, sigma = n * p, math.sqrt(n * p * (1 - p))
        x = round(mu + 3 * sigma)
        r = bounds.survival(n, p, 2 * x + 1)
        assert abs(r.F_erf - r.F_exact) < 1e-2

    def test_monte_carlo_agrees(self):
        n, p, x, trials = 100, 0.05, 10, 100_000
        f = bounds.binomial_cdf_parts(n, p, x)[0]
        hits = sum(sample_stochastic_defection(n, p, seed=s).x <= x for s in range(trials))
        se = math.sqrt(f * (1 - f) / trials)
        assert abs(hits / trials - f) <= 3 * se

    def test_bad_inputs(self):
        with pytest.raises(UsageError):
            bounds.survival(10, 1.5, 3)
        with pytest.raises(UsageError):
            bounds.survival(10, 0.1, 11)
