import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hetphase.errors import SeriesConvergenceError
from hetphase.fock import cutoff_for, displaced_twin_beams
from hetphase.heterodyne import (SHARD_SIZE, HeterodyneModel, density_closed, density_series,
                                 eigenstate_coeff, eigenstate_matrix, kernel_concentration,
                                 sample, variance)
from hetphase.verify import disk_integral


def model(lam, w=0.0, eta=1.0):
    return HeterodyneModel.make(lam, w, eta)


class TestEigenstate:
    def test_origin(self):
        assert eigenstate_coeff(0, 0, 0) == pytest.approx(1 / math.sqrt(math.pi), rel=1e-15)
        assert abs(eigenstate_coeff(0, 0, 0)) == pytest.approx(0.5641896, abs=1e-7)

    @pytest.mark.parametrize("n,m", [(0, 1), (3, 1), (2, 7)])
    def test_off_diagonal_vanishes_at_origin(self, n, m):
        assert eigenstate_coeff(n, m, 0) == 0

    def test_laguerre_root(self):
        assert abs(eigenstate_coeff(1, 1, 1.0)) <= 1e-16

    def test_eigen_equation(self):
        # Z = a + b^dag acting on the truncated coefficients reproduces z c
        z = 0.8 + 0.5j
        n = 60
        c = eigenstate_matrix(z, n)
        k = np.sqrt(np.arange(n + 2))
        zc = np.zeros((n + 1, n + 2), dtype=complex)
        zc[:-1, :n + 1] += k[1:n + 1, None] * c[1:, :]
        zc[:, 1:] += k[None, 1:n + 2] * c
        assert np.max(np.abs(zc[:20, :20] - z * c[:20, :20])) <= 1e-12

    def test_matrix_matches_scalar(self):
        z = -0.4 + 1.1j
        c = eigenstate_matrix(z, 12)
        for n in range(13):
            for m in range(13):
                assert c[n, m] == pytest.approx(eigenstate_coeff(n, m, z), abs=1e-14)

    def test_hermiticity(self):
        for z in (0.3, 1.2 - 0.5j, -2 + 1j):
            c = eigenstate_matrix(z, 30)
            assert np.max(np.abs(c - c.conj().T)) == 0.0
            assert eigenstate_coeff(7, 3, z) == pytest.approx(eigenstate_coeff(3, 7, z).conjugate(), abs=1e-16)

    def test_zero_eigenvalue_is_twin_pattern(self):
        for n in range(31):
            assert eigenstate_coeff(n, n, 0) == pytest.approx((-1) ** n / math.sqrt(math.pi), rel=1e-15)

    @pytest.mark.parametrize("lam", [0.25, 0.5, 0.75])
    @pytest.mark.parametrize("offset", [0.0, 0.4, -0.3 + 0.6j, 1.0])
    def test_fock_overlap_matches_series(self, lam, offset):
        # eigenstate coefficients do not decay, so the overlap error is ~ sqrt(epsilon)
        w = 0.5 - 0.2j
        z = w + offset
        state = displaced_twin_beams(lam, w, cutoff_for(lam, w, 1e-14))
        amp = np.vdot(eigenstate_matrix(z, state.cutoff), state.coeffs)
        assert abs(amp) ** 2 == pytest.approx(density_series(z, model(lam, w)), abs=1e-5)


class TestVariance:
    def test_examples(self):
        assert variance(0.0, 1.0) == 1.0
        assert variance(0.5, 1.0) == pytest.approx(1 / 3, rel=1e-15)
        assert variance(0.5, 0.75) == pytest.approx(2 / 3, rel=1e-15)

    def test_efficiency_against_monte_carlo(self):
        m = model(0.5, 0.0, 0.75)
        z = sample(m, 400_000, 5).outcomes
        assert np.mean(np.abs(z) ** 2) == pytest.approx(2 / 3, rel=0.01)

    @given(st.floats(0.0, 0.98), st.floats(0.001, 0.01), st.floats(0.05, 1.0))
    def test_strictly_decreasing_in_lambda(self, lam, step, eta):
        assert variance(lam + step, eta) < variance(lam, eta)

    @given(st.floats(0.0, 0.99), st.floats(0.05, 0.98), st.floats(0.001, 0.02))
    def test_strictly_decreasing_in_eta(self, lam, eta, step):
        assert variance(lam, eta + step) < variance(lam, eta)

    def test_bad_eta(self):
        with pytest.raises(ValueError):
            variance(0.5, 0.0)
        with pytest.raises(ValueError):
            model(0.5, 0.0, 1.2)


class TestDensity:
    def test_series_single_term(self):
        assert density_series(0.3, model(0.0, 0.3)) == pytest.approx(1 / math.pi, rel=1e-14)

    def test_series_peak(self):
        assert density_series(0, model(0.5)) == pytest.approx(3 / math.pi, rel=1e-11)
        assert density_series(0, model(0.5)) == pytest.approx(0.9549, abs=1e-4)

    def test_closed_peak(self):
        assert density_closed(1 + 1j, model(0.5, 1 + 1j)) == pytest.approx(3 / math.pi, rel=1e-15)

    def test_closed_unit_gaussian(self):
        assert density_closed(1.0, model(0.0)) == pytest.approx(math.exp(-1) / math.pi, rel=1e-15)
        assert density_closed(1.0, model(0.0)) == pytest.approx(0.11709966, abs=1e-8)

    def test_series_vs_closed_at_distance_two(self):
        w = 0.2 + 0.1j
        z = w + 2 * cmath.exp(0.3j)
        s = density_series(z, model(0.5, w), tol=1e-11)
        assert s == pytest.approx(density_closed(z, model(0.5, w)), rel=1e-11)

    @pytest.mark.parametrize("lam", [0.0, 0.25, 0.5, 0.75, 0.9])
    def test_series_vs_closed_lattice(self, lam):
        w = -0.3 + 0.8j
        r = np.arange(17) * 0.25
        z = w + r * cmath.exp(-1.1j)
        s = density_series(z, model(lam, w), tol=1e-10)
        c = density_closed(z, model(lam, w))
        assert np.max(np.abs(s / c - 1)) <= 1e-8

    def test_series_deep_cancellation(self):
        # float summation alone would return noise here
        w = 0.0
        s = density_series(4.0, model(0.9, w), tol=1e-10)
        assert s == pytest.approx(density_closed(4.0, model(0.9, w)), rel=1e-9)
        assert 0 < s < 1e-120

    def test_series_requires_unit_efficiency(self):
        with pytest.raises(ValueError):
            density_series(0.0, model(0.5, 0.0, 0.9))

    def test_series_refuses_lambda_near_one(self):
        with pytest.raises(SeriesConvergenceError):
            density_series(0.0, model(1 - 1e-10))

    def test_vectorized_matches_scalar(self):
        m = model(0.6, 0.4)
        z = np.array([0.4, 1.0 + 0.5j, -1.5j])
        vals = density_series(z, m)
        assert vals == pytest.approx([density_series(v, m) for v in z], rel=1e-12)

    @pytest.mark.parametrize("lam", [0.0, 0.5, 0.9, 0.99])
    @pytest.mark.parametrize("eta", [1.0, 0.8])
    def test_normalization(self, lam, eta):
        m = model(lam, 1.5 - 0.5j, eta)
        assert disk_integral(m) == pytest.approx(1.0, abs=1e-6)

    @settings(max_examples=50)
    @given(st.floats(0, 0.999), st.floats(-5, 5), st.floats(-5, 5), st.floats(0.05, 1.0))
    def test_nonnegative(self, lam, re, im, eta):
        assert density_closed(complex(re, im), model(lam, 0.3, eta)) >= 0.0


class TestSample:
    def test_moments(self):
        w = 1 + 1j
        m = model(0.5, w)
        z = sample(m, 1_000_000, 42).outcomes
        d = math.sqrt(1 / 3)
        bound = 4 * d / math.sqrt(2 * 1e6)
        assert abs(np.mean(z.real) - 1) <= bound
        assert abs(np.mean(z.imag) - 1) <= bound
        assert np.mean(np.abs(z - w) ** 2) == pytest.approx(1 / 3, rel=0.01)

    def test_deterministic(self):
        m = model(0.5, 1 + 1j)
        a = sample(m, 1000, 9).outcomes
        b = sample(m, 1000, 9).outcomes
        assert a.tobytes() == b.tobytes()
        assert sample(m, 1000, 10).outcomes.tobytes() != a.tobytes()

    def test_independent_of_workers(self):
        m = model(0.7, -0.5)
        n = 3 * SHARD_SIZE + 17
        assert sample(m, n, 3, workers=1).outcomes.tobytes() == sample(m, n, 3, workers=4).outcomes.tobytes()

    def test_prefix_stable_across_counts(self):
        m = model(0.7, -0.5)
        a = sample(m, SHARD_SIZE + 5, 3).outcomes
        b = sample(m, 2 * SHARD_SIZE, 3).outcomes
        assert a[:SHARD_SIZE].tobytes() == b[:SHARD_SIZE].tobytes()

    def test_large_seed(self):
        assert sample(model(0.1), 3, 2 ** 64 - 1).count == 3

    def test_bad_args(self):
        with pytest.raises(ValueError):
            sample(model(0.1), 0, 1)
        with pytest.raises(ValueError):
            sample(model(0.1), 3, -1)


class TestKernelConcentration:
    def test_values(self):
        table = dict(kernel_concentration([0.0, 0.9]))
        assert table[0.0] == 1.0
        assert table[0.9] == pytest.approx(1 / 19, rel=1e-15)

    def test_shrinking_sequence(self):
        lams = [0.9, 0.99, 0.999]
        table = kernel_concentration(lams)
        ratios = [v / table[0][1] for _, v in table]
        expected = [((1 - l) / (1 + l)) / (0.1 / 1.9) for l in lams]
        assert ratios == pytest.approx(expected, rel=1e-12)
        assert ratios[1] == pytest.approx(1 / 10.47, rel=1e-3)
        assert ratios[2] == pytest.approx(1 / 105.2, rel=1e-3)

    def test_monotone_to_zero(self):
        lams = 1 - np.logspace(0, -8, 30)
        lams[0] = 0.0
        v = [d for _, d in kernel_concentration(lams)]
        assert all(b < a for a, b in zip(v, v[1:]))
        assert v[-1] < 1e-8
