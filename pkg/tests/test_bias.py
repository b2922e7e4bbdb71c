from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from embedding.bias import (PiecewiseUniformLaw, check_smoothing_identity, check_sum_stein_identity,
                            check_zero_bias_identity, square_bias, square_bias_uniform_cdf, stein_coefficient,
                            stein_h, sum_stein_coefficient, zero_bias, zero_bias_sample)
from embedding.errors import CapExceeded, Degenerate, InvalidInput, OutsideSupport, ValidationFailed
from tests.corpus import embeddable_laws, law_named

IDENTITY_TOL = 1e-10
SUM_IDENTITY_TOL = 1e-9


class TestTransforms:

    def test_rademacher_zero_bias_is_uniform(self, rademacher):
        pw = zero_bias(rademacher)
        assert pw.breakpoints == (-1, 1)
        assert pw.densities == pytest.approx((0.5,))

    def test_quad_zero_bias(self, quad):
        pw = zero_bias(quad)
        assert pw.breakpoints == (-2, Fraction(-1, 2), Fraction(1, 2), 2)
        assert pw.densities == pytest.approx((0.2, 0.4, 0.2))
        assert pw.mass == pytest.approx(1.0)
        assert pw.density(0) == pytest.approx(0.4)
        assert pw.density(2) == 0.0
        assert pw.density(Fraction(1, 2)) == pytest.approx(0.2)

    def test_square_bias(self, quad):
        biased = square_bias(quad)
        assert dict(biased.atoms) == pytest.approx({-2: 0.4, Fraction(-1, 2): 0.1, Fraction(1, 2): 0.1, 2: 0.4})

    def test_square_bias_drops_zero_atom(self):
        biased = square_bias(law_named("lazy"))
        assert 0 not in biased.values

    @pytest.mark.parametrize("law", embeddable_laws(), ids=lambda law: law.name)
    def test_zero_bias_shape(self, law):
        pw = zero_bias(law)
        assert pw.support == (law.values[0], law.values[-1])
        assert pw.mass == pytest.approx(1.0, abs=1e-12)
        assert pw.moment(1) == pytest.approx(0.0, abs=1e-12)

    def test_not_mean_zero(self):
        with pytest.raises(ValidationFailed):
            zero_bias(law_named("lazy"))

    @pytest.mark.parametrize("law", embeddable_laws(), ids=lambda law: law.name)
    def test_uniform_product_has_the_zero_bias_law(self, law):
        grid = np.linspace(-2.5, 2.5, 101)
        np.testing.assert_allclose(square_bias_uniform_cdf(law, grid), zero_bias(law).cdf(grid), atol=1e-12)

    def test_sampler(self, quad, rng):
        draws = zero_bias_sample(quad, rng, size=20_000)
        assert stats.kstest(draws, zero_bias(quad).cdf).pvalue > 1e-3
        assert isinstance(zero_bias_sample(quad, rng), float)

    def test_piecewise_sampler(self, quad, rng):
        pw = zero_bias(quad)
        draws = pw.sample(rng, 20_000)
        assert stats.kstest(draws, pw.cdf).pvalue > 1e-3

    def test_bad_piecewise_law(self):
        with pytest.raises(InvalidInput):
            PiecewiseUniformLaw(breakpoints=(0, 1), densities=(0.5,))
        with pytest.raises(InvalidInput):
            PiecewiseUniformLaw(breakpoints=(1, 0), densities=(1.0,))


class TestIdentities:

    @pytest.mark.parametrize("law", embeddable_laws(), ids=lambda law: law.name)
    @pytest.mark.parametrize("degree", range(1, 9))
    def test_zero_bias_identity(self, law, degree):
        assert check_zero_bias_identity(law, degree) <= IDENTITY_TOL

    @pytest.mark.parametrize("law", embeddable_laws(), ids=lambda law: law.name)
    @pytest.mark.parametrize("degree", range(1, 9))
    def test_smoothing_identity(self, law, degree):
        assert check_smoothing_identity(law, degree) <= IDENTITY_TOL

    def test_skewed_law_still_has_a_zero_bias(self):
        skewed = law_named("skewed")
        for degree in range(1, 6):
            assert check_zero_bias_identity(skewed, degree) <= IDENTITY_TOL

    @pytest.mark.parametrize("law", embeddable_laws(), ids=lambda law: law.name)
    @pytest.mark.parametrize("n", [1, 2, 4])
    @pytest.mark.parametrize("degree", [1, 2, 3, 6])
    def test_sum_stein_identity(self, law, n, degree):
        assert check_sum_stein_identity(law, n, degree) <= SUM_IDENTITY_TOL

    def test_degree_range(self, quad):
        with pytest.raises(InvalidInput):
            check_zero_bias_identity(quad, 0)
        with pytest.raises(InvalidInput):
            check_smoothing_identity(quad, 9)

    def test_sum_identity_cap(self, quad):
        with pytest.raises(CapExceeded):
            check_sum_stein_identity(quad, 9, 2)


class TestSteinCoefficient:

    def test_rademacher(self, rademacher):
        pw = zero_bias(rademacher)
        for t in (-0.9, -0.25, 0, 0.5):
            assert stein_h(pw, t) == pytest.approx((1 - t * t) / 2)
        assert stein_h(pw, 1) == 0.0
        assert stein_h(pw, -3) == 0.0

    def test_numpy_arguments(self, rademacher, quad):
        pw = zero_bias(quad)
        h = stein_coefficient(pw)
        assert h(np.float64(0.0)) == pytest.approx(1.0625)
        assert h(np.int64(-1)) == pytest.approx(1.5)
        assert pw.density(np.float64(0.0)) == pytest.approx(0.4)
        assert stein_h(zero_bias(rademacher), np.float64(0.5)) == pytest.approx(0.375)
        assert sum_stein_coefficient(np.array([1, -1]), np.float64(0.0), rademacher) == pytest.approx(2.5)
        for t in np.linspace(-2.0, 2.0, 9):
            assert h(t) >= 0

    def test_sum_coefficient_examples(self, rademacher):
        assert sum_stein_coefficient((1, -1), 0, rademacher) == pytest.approx(2.5)
        assert sum_stein_coefficient((1,), Fraction(1, 2), rademacher) == pytest.approx(0.875)
        assert sum_stein_coefficient((1, 1), 0, rademacher) == pytest.approx(2.5)
        assert sum_stein_coefficient((1, 1), 1, rademacher) == pytest.approx(0.0)
        with pytest.raises(OutsideSupport):
            sum_stein_coefficient((1, 1), 2, rademacher)

    def test_eps_must_be_atoms(self, rademacher):
        with pytest.raises(InvalidInput):
            sum_stein_coefficient((1, 2), 0, rademacher)

    def test_quad_coefficient(self, quad):
        h = stein_coefficient(zero_bias(quad))
        assert h(0) == pytest.approx(1.0625)
        assert h(-1) == pytest.approx(1.5)
        assert h.sup() == pytest.approx(1.875)

    @pytest.mark.parametrize("law", embeddable_laws(), ids=lambda law: law.name)
    def test_bounded_by_half_b_squared(self, law):
        h = stein_coefficient(zero_bias(law))
        assert h.sup() <= float(law.bound) ** 2 / 2 + 1e-12
        grid = np.linspace(float(law.values[0]), float(law.values[-1]), 201)[:-1]
        assert all(0 <= h(t) <= float(law.bound) ** 2 / 2 + 1e-12 for t in grid)

    def test_weighted_moment_matches_quadrature(self, quad):
        h = stein_coefficient(zero_bias(quad))
        pw = h.law
        step = 1e-3
        mids = -2 + (np.arange(4000) + 0.5) * step
        values = np.array([h(t) for t in mids])
        dens = np.array([pw.density(t) for t in mids])
        approx = np.sum(values * dens * mids ** 2) * step
        assert h.weighted_moment(2) == pytest.approx(approx, abs=1e-5)

    @pytest.mark.parametrize("law", embeddable_laws(), ids=lambda law: law.name)
    def test_reflection_symmetry(self, law):
        h = stein_coefficient(zero_bias(law))
        h_reflected = stein_coefficient(zero_bias(law.reflect()))
        for t in (-0.9, -0.3, 0.0, 0.4, 0.95):
            assert h(-t) == pytest.approx(h_reflected(t))

    def test_reflection_of_a_skewed_law(self):
        # h_Y(-t) - h_{-Y}(t) = E[Y] / p_Y(-t)
        law = law_named("skewed")
        pw = zero_bias(law)
        h = stein_coefficient(pw)
        h_reflected = stein_coefficient(zero_bias(law.reflect()))
        assert pw.moment(1) == pytest.approx(0.5)
        for t in (-0.9, -0.3, 0.0, 0.4, 0.95):
            assert h(-t) - h_reflected(t) == pytest.approx(pw.moment(1) / pw.density(-t))
            assert h(-t) - h_reflected(t) == pytest.approx(1.5)

    def test_vanishing_density(self):
        pw = PiecewiseUniformLaw(breakpoints=(0, 1, 2, 3), densities=(0.5, 0.0, 0.5))
        h = stein_coefficient(pw)
        with pytest.raises(Degenerate):
            h(Fraction(3, 2))
