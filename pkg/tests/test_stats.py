from fractions import Fraction
import io
import math

import numpy as np
import pytest
from scipy import stats

from embedding.bridge import sample_bridge
from embedding.errors import Degenerate, InvalidInput, ValidationFailed
from embedding.laws_struct import IncrementBag
from embedding.stats import (CSV_COLUMNS, SMIRNOV_SHIFT, ScalingRow, bridge_max_ks, bridge_max_mgf_bound,
                             bridge_maxima, covariance_check, decompose_wkd, diffusive_baseline, mgf_bound_check,
                             replica_seeds, scaling_study, smirnov_cdf, smirnov_mgf, smirnov_sample,
                             summarize_scaling, tail_fit, target_covariance, theory_constants, theta5,
                             write_rows_csv)
from tests.corpus import law_named


class TestDecompose:

    def test_example(self):
        parts, w_k = decompose_wkd((1, -1, 1, 1), 2)
        assert w_k == -1
        assert parts == {0: 0, 2: -1}

    def test_with_difference_set(self):
        parts, _ = decompose_wkd((1, -1, 1, 1), 2, dplus=[0, 2])
        assert parts == {0: 0, 2: -1}
        with pytest.raises(InvalidInput):
            decompose_wkd((1, -1, 1, 1), 2, dplus=[0])

    def test_parts_sum_to_w_k_exactly(self, rng):
        atoms = [Fraction(-2), Fraction(-1, 2), Fraction(1, 2), Fraction(2)]
        for _ in range(1000):
            n = int(rng.integers(2, 13))
            eps = [atoms[i] for i in rng.integers(0, 4, size=n)]
            for k in range(1, n + 1):
                parts, w_k = decompose_wkd(eps, k)
                assert sum(parts.values()) == w_k
                assert isinstance(w_k, Fraction)

    def test_float_mode(self):
        parts, w_k = decompose_wkd([0.5, -2.0, 0.5], 1)
        assert sum(parts.values()) == pytest.approx(w_k)

    def test_k_range(self):
        with pytest.raises(InvalidInput):
            decompose_wkd((1, -1), 0)


class TestSmirnov:

    def test_cdf(self):
        assert smirnov_cdf(0.5) == pytest.approx(0.39347, abs=1e-5)
        assert smirnov_cdf(-1.0) == 0.0
        np.testing.assert_allclose(smirnov_cdf([0.0, 1.0]), [0.0, 1 - math.exp(-2)])

    def test_sampler(self, rng):
        assert stats.kstest(smirnov_sample(rng, 20_000), smirnov_cdf).pvalue > 1e-3

    def test_mgf(self, rng):
        draws = smirnov_sample(rng, 200_000)
        assert smirnov_mgf(1.0) == pytest.approx(np.exp(draws).mean(), rel=0.01)
        assert smirnov_mgf(0.0) == 1.0

    def test_two_sided_bound(self):
        for a in (0.0, 0.5, 1.0, 2.0):
            assert bridge_max_mgf_bound(a) >= smirnov_mgf(a)
        with pytest.raises(InvalidInput):
            bridge_max_mgf_bound(-0.1)

    def test_shift_constant(self):
        # -zeta(1/2) / sqrt(2 pi)
        assert SMIRNOV_SHIFT == pytest.approx(1.4603545088095868 / math.sqrt(2 * math.pi))

    def test_discrete_maxima(self, rng):
        assert bridge_max_ks(128, 20_000, rng) <= 0.03

    def test_correction_helps(self, rng):
        raw = bridge_max_ks(16, 20_000, rng, continuity_correction=False)
        corrected = bridge_max_ks(16, 20_000, rng)
        assert corrected < raw

    def test_maxima_shape(self, rng):
        maxima = bridge_maxima(4, 4500, rng, continuity_correction=False, chunk=1000)
        assert maxima.shape == (4500,)
        assert np.all(maxima >= 0)

    @pytest.mark.slow
    def test_fine_resolution(self, rng):
        assert bridge_max_ks(512, 100_000, rng) <= 0.02


class TestCovariance:

    def test_targets(self):
        np.testing.assert_allclose(target_covariance(3, "bridge"),
                                   [[2 / 3, 1 / 3, 0], [1 / 3, 2 / 3, 0], [0, 0, 0]])
        np.testing.assert_array_equal(target_covariance(3, "walk"), [[1, 1, 1], [1, 2, 2], [1, 2, 3]])
        with pytest.raises(InvalidInput):
            target_covariance(3, "sheet")

    def test_bridge_samples(self, rng):
        assert covariance_check(sample_bridge(6, rng, size=50_000), 6, "bridge") <= 0.05

    def test_walk_samples(self, rng):
        walk = np.cumsum(rng.standard_normal((200_000, 5)), axis=1)
        assert covariance_check(walk, 5, "walk") <= 0.1
        assert covariance_check(walk, 5, "bridge") > 1.0

    def test_shape_and_size(self, rng):
        with pytest.raises(InvalidInput):
            covariance_check(np.zeros((5000, 3)), 6)
        with pytest.raises(InvalidInput):
            covariance_check(np.zeros((999, 6)), 6)


class TestTailFit:

    def test_exponential_tail(self, rng):
        fit = tail_fit(rng.exponential(0.5, 100_000))
        assert fit.slope == pytest.approx(-2.0, abs=0.1)
        assert fit.r2 > 0.99
        assert fit.points >= 3

    def test_gaussian_tail_bends(self, rng):
        exponential = tail_fit(rng.exponential(1.0, 100_000))
        gaussian = tail_fit(np.abs(rng.standard_normal(100_000)))
        assert gaussian.r2 < exponential.r2

    def test_constant(self):
        with pytest.raises(Degenerate):
            tail_fit(np.ones(2000))

    def test_too_few_points(self, rng):
        with pytest.raises(Degenerate):
            tail_fit(rng.exponential(1.0, 2000), threshold_grid=[0.1, 0.2])
        with pytest.raises(InvalidInput):
            tail_fit(rng.exponential(1.0, 10))


class TestMgfBound:

    def test_rademacher_bag(self, rng):
        bag = IncrementBag.from_counts([-1, 1], [8, 8])
        results = mgf_bound_check(bag, 8, [0.5, 1.0], 20_000, rng)
        assert len(results) == 4
        assert [r.gap for r in results] == [2.0, None, 2.0, None]
        assert all(r.passed for r in results)

    def test_quad_bag(self, rng):
        bag = IncrementBag.from_counts([-2, "-1/2", "1/2", 2], [3, 12, 12, 3])
        results = mgf_bound_check(bag, 15, [0.25, 0.5], 20_000, rng)
        assert {r.gap for r in results} == {1.0, 1.5, 2.5, 4.0, None}
        assert all(r.passed for r in results)

    def test_k_range(self, rng):
        with pytest.raises(InvalidInput):
            mgf_bound_check(IncrementBag.from_counts([-1, 1], [2, 2]), 4, [1.0], 100, rng)


def make_row(n, replicate, max_dev):
    return ScalingRow(n=n, replicate=replicate, seed=0, max_dev=max_dev, terminal_dev=0.0, s_n=0.0, gamma2=1.0)


class TestScaling:

    def test_seeds(self):
        seeds = replica_seeds(5, [8, 16], 3)
        assert [(n, r) for n, r, _ in seeds] == [(8, 0), (8, 1), (8, 2), (16, 0), (16, 1), (16, 2)]
        assert len({s for _, _, s in seeds}) == 6
        assert seeds == replica_seeds(5, [8, 16], 3)

    def test_single_n(self, quad):
        rows, summary = scaling_study(quad, [8], 3, seed=1)
        assert [(row.n, row.replicate) for row in rows] == [(8, 0), (8, 1), (8, 2)]
        assert summary.slope is None and summary.r2 is None
        assert summary.ratio == 1.0

    def test_deterministic(self, quad):
        first, _ = scaling_study(quad, [16, 4], 2, seed=11)
        second, _ = scaling_study(quad, [16, 4], 2, seed=11)
        assert first == second
        assert [row.n for row in first] == [4, 4, 16, 16]

    def test_workers_do_not_change_rows(self, quad):
        serial, _ = scaling_study(quad, [8, 32], 3, seed=5, workers=1)
        parallel, _ = scaling_study(quad, [8, 32], 3, seed=5, workers=2)
        assert serial == parallel

    def test_bad_arguments(self, quad):
        with pytest.raises(InvalidInput):
            scaling_study(quad, [], 3, seed=1)
        with pytest.raises(InvalidInput):
            scaling_study(quad, [8], 0, seed=1)
        with pytest.raises(ValidationFailed):
            scaling_study(law_named("skewed"), [8], 1, seed=1)

    def test_summary(self):
        rows = [make_row(16, 0, 1.0), make_row(16, 1, 2.0), make_row(256, 0, 3.0), make_row(256, 1, 4.0)]
        summary = summarize_scaling(rows)
        assert summary.n_list == (16, 256)
        assert summary.medians == (1.5, 3.5)
        assert summary.slope == pytest.approx(2.0 / math.log(16))
        assert summary.r2 == pytest.approx(1.0)
        assert summary.ratio == pytest.approx(3.5 / 1.5)

    def test_csv(self):
        handle = io.StringIO()
        write_rows_csv([make_row(16, 0, 0.1)], handle)
        lines = handle.getvalue().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert lines[1] == "16,0,0,0.1,0.0,0.0,1.0"

    def test_diffusive_baseline_grows(self, quad, rng):
        short = np.median(diffusive_baseline(quad, 25, 300, rng))
        long = np.median(diffusive_baseline(quad, 400, 300, rng))
        assert long > 2 * short

    @pytest.mark.slow
    def test_logarithmic_rate(self, quad):
        rows, summary = scaling_study(quad, [2 ** 6, 2 ** 8, 2 ** 10, 2 ** 13], 1000, seed=20240917, workers=4)
        assert len(rows) == 4000
        assert summary.r2 >= 0.90
        assert summary.ratio <= 4.0

    @pytest.mark.slow
    def test_exponential_tail_of_max_dev(self, quad):
        rows, _ = scaling_study(quad, [2 ** 10], 10_000, seed=7, workers=4)
        devs = np.array([row.max_dev for row in rows])
        grid = np.linspace(np.median(devs), devs.max(), 50)
        fit = tail_fit(devs, threshold_grid=grid)
        assert fit.slope < 0
        assert fit.r2 >= 0.90


class TestConstants:

    def test_c(self):
        constants = theory_constants()
        assert constants.C_value == pytest.approx((2 + math.log(4)) / math.log(1.5))
        assert abs(constants.C_value - 8.4) <= 0.1
        assert constants.theta5_value is None

    def test_theta5(self, quad):
        assert theta5(1) == pytest.approx(math.sqrt(7 / 8))
        assert theory_constants(quad).theta5_value == pytest.approx(math.sqrt(7 / 8) / 4)
