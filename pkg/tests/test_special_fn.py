import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate, special

from hetphase.errors import QuadratureError
from hetphase.special_fn import (PolyOrder, check_hermite_laguerre, erf, erfc, hermite,
                                 laguerre, log_factorial, log_factorials)


def laguerre_exact(n, a, x):
    """Explicit finite sum in exact rational arithmetic."""
    x = Fraction(x)
    return sum(Fraction((-1) ** k * math.comb(n + a, n - k)) * x ** k / math.factorial(k)
               for k in range(n + 1))


def hermite_exact(n, x):
    x = Fraction(x)
    return sum(Fraction((-1) ** m * math.factorial(n), math.factorial(m) * math.factorial(n - 2 * m))
               * (2 * x) ** (n - 2 * m) for m in range(n // 2 + 1))


class TestLaguerre:
    def test_degree_zero(self):
        assert laguerre(PolyOrder(0, 3), 7.5) == 1.0

    def test_degree_one(self):
        assert laguerre(PolyOrder(1, 0), 2.0) == -1.0

    def test_degree_two(self):
        assert laguerre(PolyOrder(2, 0), 1.0) == pytest.approx(float(laguerre_exact(2, 0, 1.0)), abs=1e-15)
        assert laguerre(2, 1.0) == pytest.approx(-0.5, abs=1e-15)

    @pytest.mark.parametrize("n", [0, 1, 2])
    @pytest.mark.parametrize("a", [0, 1, 4])
    @pytest.mark.parametrize("x", [0.0, 0.3, 2.5, 11.0])
    def test_low_degree_exact(self, n, a, x):
        assert laguerre(PolyOrder(n, a), x) == pytest.approx(float(laguerre_exact(n, a, x)), rel=1e-15, abs=1e-15)

    def test_recurrence_matches_explicit_sum(self):
        xs = np.arange(0.0, 50.0001, 0.5)
        worst = 0.0
        for n in range(31):
            for a in range(11):
                vals = laguerre(PolyOrder(n, a), xs)
                for x, v in zip(xs, vals):
                    e = float(laguerre_exact(n, a, float(x)))
                    if e != 0.0:
                        worst = max(worst, abs(v - e) / abs(e))
        assert worst <= 1e-9

    def test_array_and_scalar_agree(self):
        xs = np.linspace(0, 5, 7)
        arr = laguerre(PolyOrder(6, 2), xs)
        assert [laguerre(PolyOrder(6, 2), x) for x in xs] == pytest.approx(list(arr), rel=0, abs=0)

    def test_negative_order_rejected(self):
        with pytest.raises(ValueError):
            PolyOrder(-1, 0)


class TestHermite:
    def test_examples(self):
        assert hermite(0, 3.2) == 1.0
        assert hermite(1, 3.2) == pytest.approx(6.4, abs=1e-15)
        assert hermite(3, 1.0) == pytest.approx(float(hermite_exact(3, 1.0)), abs=1e-14)
        assert hermite(3, 1.0) == pytest.approx(-4.0, abs=1e-14)

    @pytest.mark.parametrize("n", [4, 9, 17, 25])
    @pytest.mark.parametrize("x", [-2.3, 0.0, 0.71, 3.0])
    def test_against_explicit_form(self, n, x):
        e = float(hermite_exact(n, x))
        assert hermite(n, x) == pytest.approx(e, rel=1e-12, abs=1e-12)


class TestErf:
    def test_zero(self):
        assert erf(0.0) == 0.0

    def test_saturation(self):
        assert abs(erf(10.0) - 1.0) <= 1e-12
        assert erf(40.0) == 1.0 and erf(-40.0) == -1.0

    def test_one_against_quadrature(self):
        val, _ = integrate.quad(lambda t: 2 / math.sqrt(math.pi) * math.exp(-t * t), 0.0, 1.0, epsabs=1e-15)
        assert erf(1.0) == pytest.approx(val, abs=1e-12)
        assert erf(1.0) == pytest.approx(0.8427007929, abs=1e-10)

    def test_accuracy_against_reference(self):
        x = np.linspace(-6, 6, 12001)
        assert np.max(np.abs(erf(x) - special.erf(x))) <= 1e-12

    def test_erfc_relative_accuracy_in_tail(self):
        x = np.linspace(0, 25, 2501)
        ref = special.erfc(x)
        assert np.max(np.abs(erfc(x) - ref) / ref) <= 1e-12
        assert np.max(np.abs(erfc(-x) - special.erfc(-x))) <= 1e-15

    @given(st.floats(-30, 30, allow_nan=False))
    def test_odd(self, x):
        assert erf(-x) == -erf(x)

    def test_monotone(self):
        x = np.linspace(-8, 8, 100001)
        assert np.all(np.diff(erf(x)) >= 0)


class TestLogFactorial:
    def test_small(self):
        assert log_factorial(0) == 0.0
        assert log_factorial(1) == 0.0

    def test_ten_against_direct_sum(self):
        direct = math.fsum(math.log(k) for k in range(1, 11))
        assert log_factorial(10) == pytest.approx(direct, rel=1e-15)
        assert log_factorial(10) == pytest.approx(15.104412573, abs=1e-9)

    @pytest.mark.parametrize("n", range(21))
    def test_exp_roundtrip(self, n):
        assert math.exp(log_factorial(n)) == pytest.approx(math.factorial(n), rel=4 * np.finfo(float).eps * max(1, n))

    @pytest.mark.parametrize("n", [21, 22, 30, 57, 170, 171, 500, 10 ** 6])
    def test_asymptotic_branch(self, n):
        assert log_factorial(n) == pytest.approx(math.lgamma(n + 1), rel=1e-12)

    def test_table(self):
        t = log_factorials(25)
        assert t.shape == (26,)
        assert t[25] == log_factorial(25)


class TestHermiteLaguerre:
    def test_trivial(self):
        lhs, rhs = check_hermite_laguerre(0, 0, 0.0, 0.0)
        assert lhs == pytest.approx(1.0, abs=1e-15) and rhs == 1.0

    def test_first_order(self):
        lhs, rhs = check_hermite_laguerre(1, 0, 0.5, 0.5)
        assert rhs == pytest.approx(3.0, abs=1e-15)
        assert lhs == pytest.approx(3.0, rel=1e-13)

    def test_mixed(self):
        lhs, rhs = check_hermite_laguerre(2, 1, 0.3, 0.7)
        assert lhs == pytest.approx(rhs, rel=1e-9)

    def test_random_lattice(self):
        rng = np.random.default_rng(11)
        y = rng.uniform(-2, 2, 100)
        t = rng.uniform(-2, 2, 100)
        worst = 0.0
        for n in range(21):
            for a in range(11):
                lhs, rhs = check_hermite_laguerre(n, a, y, t)
                worst = max(worst, float(np.max(np.abs(lhs - rhs) / np.abs(rhs))))
        assert worst <= 1e-8

    def test_direct_rule_cancels_for_small_t(self):
        # documents why the projected rule exists
        lhs_direct, rhs = check_hermite_laguerre(0, 10, -1.5, 0.04, method="direct")
        lhs_auto, _ = check_hermite_laguerre(0, 10, -1.5, 0.04)
        assert abs(lhs_auto / rhs - 1) <= 1e-8
        assert abs(lhs_direct / rhs - 1) > 1e-6

    def test_capacity(self):
        with pytest.raises(QuadratureError):
            check_hermite_laguerre(30, 11, 0.1, 0.2)
        check_hermite_laguerre(30, 11, 0.1, 0.2, capacity=41)

    def test_zero_t_with_alpha_rejected(self):
        with pytest.raises(ValueError):
            check_hermite_laguerre(2, 1, 0.3, 0.0)
