from fractions import Fraction

import numpy as np
import pytest
from scipy import stats

from embedding.errors import CapExceeded, Infeasible, InvalidInput
from embedding.laws import iid_sum_law
from embedding.type_count import TypeCountTable, binomial_kernels, convolve, poisson_kernels, trimmed_kernel
from tests.corpus import law_named

TOL = 1e-12


def hypergeometric_table(counts, values, k):
    return TypeCountTable(values, binomial_kernels(counts, k), k)


class TestKernels:

    def test_trimmed_kernel_drops_tails(self):
        lo, w = trimmed_kernel([1e-30, 0.2, 0.5, 0.3, 1e-25], 1e-20)
        assert lo == 1
        np.testing.assert_allclose(w, [0.4, 1.0, 0.6])

    def test_empty_kernel(self):
        with pytest.raises(Infeasible):
            trimmed_kernel([0.0, 0.0], 1e-20)

    def test_convolve_matches_numpy(self):
        a = np.array([0.25, 0.5, 0.25])
        b = np.array([0.5, 0.0, 0.5])
        np.testing.assert_allclose(convolve(a, b), np.convolve(a, b), atol=TOL)

    def test_long_convolution_has_no_negative_entries(self):
        a = stats.binom.pmf(np.arange(2001), 2000, 0.3)
        out = convolve(a, a)
        assert np.all(out >= 0)
        assert out.sum() == pytest.approx(1.0, abs=1e-9)


class TestHypergeometric:

    def test_two_types_match_scipy(self):
        table = hypergeometric_table([30, 50], [-1, 1], 40)
        # the sum is 2 * (#ones) - 40
        ones = np.arange(0, 41)
        expected = stats.hypergeom.pmf(ones, 80, 50, 40)
        got = np.array([table.sum_prob(2 * j - 40) for j in ones])
        np.testing.assert_allclose(got, expected, atol=TOL)

    def test_small_rademacher_bag(self):
        table = hypergeometric_table([2, 2], [-1, 1], 2)
        assert table.sum_prob(-2) == pytest.approx(1 / 6, abs=TOL)
        assert table.sum_prob(0) == pytest.approx(4 / 6, abs=TOL)
        assert table.sum_prob(2) == pytest.approx(1 / 6, abs=TOL)
        assert table.sum_prob(1) == 0.0
        assert table.sum_prob(Fraction(1, 2)) == 0.0

    def test_enumerate_conditional_counts(self):
        values = [Fraction(-2), Fraction(-1, 2), Fraction(1, 2), Fraction(2)]
        table = hypergeometric_table([1, 1, 1, 1], values, 2)
        # pairs summing to 0 are {-2, 2} and {-1/2, 1/2}, equally likely
        found = dict(table.enumerate(0))
        assert found == pytest.approx({(1, 0, 0, 1): 0.5, (0, 1, 1, 0): 0.5})

    def test_sample_respects_the_sum(self, rng):
        values = [Fraction(-2), Fraction(-1, 2), Fraction(1, 2), Fraction(2)]
        counts = [3, 4, 4, 3]
        table = hypergeometric_table(counts, values, 7)
        for _ in range(200):
            draw = table.sample(Fraction(1, 2), rng)
            assert sum(draw) == 7
            assert all(0 <= d <= m for d, m in zip(draw, counts))
            assert sum(d * v for d, v in zip(draw, values)) == Fraction(1, 2)

    def test_sample_frequencies(self, rng):
        table = hypergeometric_table([3, 3, 3], [-1, 0, 1], 4)
        exact = dict(table.enumerate(0))
        assert exact == pytest.approx({(2, 0, 2): 0.25, (1, 2, 1): 0.75})
        draws = 20_000
        seen = {}
        for _ in range(draws):
            counts = table.sample(0, rng)
            seen[counts] = seen.get(counts, 0) + 1
        assert set(seen) == set(exact)
        for counts, p in exact.items():
            assert seen[counts] / draws == pytest.approx(p, abs=0.02)

    def test_infeasible_sum(self, rng):
        table = hypergeometric_table([2, 2], [-1, 1], 2)
        with pytest.raises(Infeasible):
            table.sample(1, rng)
        with pytest.raises(Infeasible):
            table.enumerate(4)

    def test_unreachable_total(self):
        with pytest.raises(Infeasible):
            TypeCountTable([1, 2], [(0, np.ones(2)), (0, np.ones(3))], 5)

    def test_kernel_count_mismatch(self):
        with pytest.raises(InvalidInput):
            TypeCountTable([1, 2], [(0, np.ones(2))], 1)

    def test_table_cap(self):
        with pytest.raises(CapExceeded):
            TypeCountTable([-1, 1, 3], binomial_kernels([400, 400, 400], 600), 600, table_cap=1000)


class TestMultinomial:

    @pytest.mark.parametrize("name", ["quad", "skewed", "lazy"])
    def test_sum_matches_iid_law(self, name):
        law = law_named(name)
        n = 12
        table = TypeCountTable(law.values, poisson_kernels(law.probs, n), n)
        reference = iid_sum_law(law, n)
        for value, p in reference.points.items():
            assert table.sum_prob(value) == pytest.approx(p, abs=TOL)

    def test_enumerate_matches_multinomial(self):
        law = law_named("quad")
        n = 4
        table = TypeCountTable(law.values, poisson_kernels(law.probs, n), n)
        found = table.enumerate(0)
        weights = {counts: stats.multinomial.pmf(counts, n, law.probs) for counts, _ in found}
        total = sum(weights.values())
        for counts, p in found:
            assert p == pytest.approx(weights[counts] / total, abs=TOL)
