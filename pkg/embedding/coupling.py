"""
One-dimensional couplings of a lattice law with a Gaussian.

The shipped coupler is the monotone quantile map: the Gaussian line is cut at
t_i = sigma * Phi^-1(P(W <= w_i)) and the half-open interval (t_{i-1}, t_i] is sent
to the i-th support point. Both marginals are exact and the output is a
deterministic function of the Gaussian draw.
"""
from fractions import Fraction
from functools import cached_property, lru_cache
import logging

import msgspec
import numpy as np
from scipy import special

from embedding.config import EmbeddingConfig
from embedding.coupler_interface import Coupler
from embedding.errors import Degenerate, InvalidInput, ValidationFailed
from embedding.laws import iid_sum_law, validate_law, wr_sum_law
from embedding.laws_struct import IncrementBag

logger = logging.getLogger(__name__)


class CouplingMap(msgspec.Struct, frozen=True, eq=False, dict=True):
    """
    Monotone map z -> w.

    thresholds holds the finite cut points t_1 <= ... <= t_{m-1} (t_0 = -inf, t_m = +inf);
    outputs the m support points in ascending order, probs their masses.
    """
    thresholds: np.ndarray
    outputs: tuple
    probs: np.ndarray
    sigma2: float

    def index(self, z):
        """Index i with t_{i-1} < z <= t_i."""
        return np.searchsorted(self.thresholds, z, side="left")

    def output_at(self, z):
        """Exact support point for a scalar Gaussian value z."""
        return self.outputs[int(self.index(z))]

    @cached_property
    def output_array(self):
        return np.array([float(w) for w in self.outputs])

    def __call__(self, z):
        return self.output_array[self.index(z)]

    def pushforward_error(self):
        """Sum over atoms of |Gaussian mass of (t_{i-1}, t_i] - P(w_i)|."""
        if self.sigma2 == 0:
            return abs(1.0 - float(self.probs.sum()))
        edges = np.concatenate(([0.0], special.ndtr(self.thresholds / np.sqrt(self.sigma2)), [1.0]))
        return float(np.abs(np.diff(edges) - self.probs).sum())


class ExpMomentEstimate(msgspec.Struct, frozen=True):
    lam: float
    estimate: float
    ci_low: float
    ci_high: float
    n_samples: int


def quantile_couple(law, sigma2):
    """Monotone quantile coupling of a LatticeLaw with N(0, sigma2)."""
    if sigma2 < 0:
        raise InvalidInput(f"sigma2 must be nonnegative, got {sigma2}")
    outputs = tuple(law.support)
    probs = law.mass_array / law.mass_array.sum()
    if len(outputs) == 1:
        # point mass: the constant map, whatever the Gaussian
        return CouplingMap(thresholds=np.zeros(0), outputs=outputs, probs=probs, sigma2=float(sigma2))
    if sigma2 == 0:
        raise Degenerate("a zero-variance Gaussian can only be coupled with a point mass")
    sigma = np.sqrt(sigma2)
    below = np.cumsum(probs)[:-1]
    above = np.cumsum(probs[::-1])[::-1][1:]
    # lower tail from the CDF, upper tail from the survival function
    thresholds = np.where(below <= 0.5, sigma * special.ndtri(below), -sigma * special.ndtri(above))
    thresholds = np.maximum.accumulate(thresholds)
    return CouplingMap(thresholds=thresholds, outputs=outputs, probs=probs, sigma2=float(sigma2))


class QuantileCoupler(Coupler):

    name = "quantile"

    def couple(self, law, sigma2):
        return quantile_couple(law, sigma2)


QUANTILE = QuantileCoupler()


def require_embeddable(law):
    report = validate_law(law)
    if not report.ok:
        raise ValidationFailed(f"law {law.name or '<unnamed>'} fails: {', '.join(report.failed())}")
    return report


@lru_cache(maxsize=64)
def _terminal_map(law, n, coupler):
    return coupler.couple(iid_sum_law(law, n), float(n))


def terminal_map(law, n, coupler=QUANTILE):
    """Coupling of S_n with N(0, n), memoised per (law, n)."""
    return _terminal_map(law, n, coupler)


def couple_sum(law, n, rng, coupler=QUANTILE):
    """
    Draw (S_n, Z_n): Z_n ~ N(0, n) and S_n the coupled image, with the exact law of the
    sum of n copies of law. S_n is returned as an exact rational.
    """
    if n < 1:
        raise InvalidInput(f"n must be at least 1, got {n}")
    require_embeddable(law)
    z = float(rng.normal(0.0, np.sqrt(n)))
    return terminal_map(law, n, coupler).output_at(z), z


def couple_sum_batch(law, n, size, rng, coupler=QUANTILE):
    """Vectorised couple_sum: arrays of float S_n and Z_n."""
    if n < 1:
        raise InvalidInput(f"n must be at least 1, got {n}")
    require_embeddable(law)
    z = rng.normal(0.0, np.sqrt(n), size=size)
    return terminal_map(law, n, coupler)(z), z


@lru_cache(maxsize=8192)
def _cached_midpoint_map(key, n, k, eta, coupler):
    return coupler.couple(wr_sum_law(IncrementBag(entries=key), k), eta * eta * k * (n - k) / n)


def midpoint_map(bag, k, eta, coupler=QUANTILE):
    """Coupling of the time-k value of a uniformly permuted bag with N(0, eta^2 k(n-k)/n)."""
    n = bag.n
    if n <= EmbeddingConfig.CACHE_MAX_N:
        return _cached_midpoint_map(bag.key, n, k, float(eta), coupler)
    return coupler.couple(wr_sum_law(bag, k), eta * eta * k * (n - k) / n)


def couple_midpoint(bag, k, eta, rng, coupler=QUANTILE):
    """
    Draw (S_k, Z) with S_k distributed as the time-k value of a uniform path of bag and
    Z ~ N(0, k(n-k)/n), coupled so that W_k = S_k - k a / n tracks eta * Z.
    """
    n = bag.n
    if abs(2 * k - n) > 1 or not 0 <= k <= n:
        raise InvalidInput(f"midpoint k={k} must satisfy |2k - n| <= 1 for n={n}")
    variance = k * (n - k) / n
    if variance == 0:
        # zero-variance Gaussian is identically 0; the walk value is forced
        return (bag.total if k == n else Fraction(0)), 0.0
    if not eta > 0:
        raise InvalidInput(f"eta must be positive, got {eta}")
    z = float(rng.normal(0.0, np.sqrt(variance)))
    return midpoint_map(bag, k, eta, coupler).output_at(eta * z), z


def exp_moment(devs, lam, bootstrap_rounds, rng, level=0.95, chunk=64):
    """Sample mean of exp(lam * dev) with a percentile-bootstrap interval."""
    devs = np.asarray(devs, dtype=float)
    if devs.size == 0:
        raise InvalidInput("exp_moment needs at least one deviation")
    if lam < 0:
        raise InvalidInput(f"lambda must be nonnegative, got {lam}")
    values = np.exp(lam * devs)
    estimate = float(values.mean())
    if bootstrap_rounds < 1 or devs.size == 1:
        return ExpMomentEstimate(lam=lam, estimate=estimate, ci_low=estimate, ci_high=estimate,
                                 n_samples=int(devs.size))
    means = []
    for start in range(0, bootstrap_rounds, chunk):
        rounds = min(chunk, bootstrap_rounds - start)
        idx = rng.integers(0, devs.size, size=(rounds, devs.size))
        means.append(values[idx].mean(axis=1))
    means = np.concatenate(means)
    alpha = (1.0 - level) / 2
    low, high = np.quantile(means, [alpha, 1.0 - alpha])
    return ExpMomentEstimate(lam=lam, estimate=estimate, ci_low=float(min(low, estimate)),
                             ci_high=float(max(high, estimate)), n_samples=int(devs.size))


class ThetaSearch(msgspec.Struct, frozen=True):
    n: int
    thetas: tuple
    estimates: tuple
    feasible: tuple  # thetas whose estimate is within the bound


def theta_grid_search(law, n_list, thetas, samples, rng, bound=8.0, coupler=QUANTILE):
    """Estimate E exp(theta |S_n - Z_n|) over a theta grid for every n."""
    results = []
    for n in n_list:
        s, z = couple_sum_batch(law, n, samples, rng, coupler)
        devs = np.abs(s - z)
        estimates = tuple(float(np.exp(theta * devs).mean()) for theta in thetas)
        feasible = tuple(theta for theta, est in zip(thetas, estimates) if est <= bound)
        logger.info("n=%d: %d of %d thetas within %.1f", n, len(feasible), len(thetas), bound)
        results.append(ThetaSearch(n=int(n), thetas=tuple(thetas), estimates=estimates, feasible=feasible))
    return results
