"""
Dyadic coupling of a uniformly permuted increment path with a discrete Brownian bridge.

The midpoint value S_k (k = n // 2) is drawn jointly with the midpoint Gaussian by the
quantile coupling, the increments are split between the two halves conditionally on
S_k, and both halves are built recursively. Child bridges are blended linearly
through the midpoint Gaussian so the assembled vector has the bridge covariance
(i ^ j)(n - (i v j)) / n.
"""
from abc import ABC, abstractmethod
from fractions import Fraction
from functools import cached_property
import logging

import msgspec
import numpy as np

from embedding.config import EmbeddingConfig
from embedding.coupling import QUANTILE, couple_midpoint
from embedding.errors import CapExceeded, Degenerate, Infeasible, InvalidInput
from embedding.laws import draw_table, is_feasible, wr_sum_law
from embedding.laws_struct import IncrementBag, Path, as_fraction
from embedding.type_count import common_denominator

logger = logging.getLogger(__name__)


class SplitLaw(msgspec.Struct, eq=False, dict=True):
    """
    Law of the first-half increment counts of a bag given that the k first increments sum to s.

    splits lists (k_1, ..., k_l, probability) over the bag's types, with weights
    proportional to prod_j C(m_j, k_j) on the feasible count vectors.
    """
    bag: IncrementBag
    k: int
    s: Fraction
    table: object = None

    @cached_property
    def splits(self):
        if self.table is None:
            return [(self._forced_counts(), 1.0)]
        return self.table.enumerate(self.s)

    def _forced_counts(self):
        return tuple(0 for _ in self.bag.counts) if self.k == 0 else self.bag.counts

    def first_counts(self, rng):
        if self.table is None:
            return self._forced_counts()
        return self.table.sample(self.s, rng)

    def probability(self, first):
        """Probability that the first half receives exactly the bag first."""
        counts = tuple(first.count_of(v) for v in self.bag.values)
        if sum(counts) != first.n:
            return 0.0
        return dict(self.splits).get(counts, 0.0)


class BridgePath(msgspec.Struct, frozen=True, eq=False):
    """Discrete bridge values z_0..z_n with z_0 = z_n = 0."""
    z: np.ndarray

    @property
    def n(self):
        return len(self.z) - 1


class CoupledBridgeSample(msgspec.Struct, frozen=True, eq=False):
    path: Path
    bridge: BridgePath
    eta: float
    w: tuple  # exact W_0..W_n
    gamma2: Fraction

    def deviations(self, scale=None):
        """|W_k - scale * Z_k| for k = 0..n; scale defaults to eta."""
        scale = self.eta if scale is None else scale
        w = np.array([float(v) for v in self.w])
        return np.abs(w - scale * self.bridge.z)

    def max_deviation(self, scale=None):
        return float(self.deviations(scale).max())


def centered_walk(path):
    """W_k = S_k - k S_n / n for k = 0..n, exact."""
    n = path.n
    end = path.values[-1]
    return (Fraction(0),) + tuple(s - Fraction(k, n) * end for k, s in enumerate(path.values, start=1))


def split_law(bag, k, s):
    n = bag.n
    if not 0 <= k <= n:
        raise InvalidInput(f"k={k} outside 0..{n}")
    s = as_fraction(s)
    if k == 0 or k == n:
        forced = Fraction(0) if k == 0 else bag.total
        if s != forced:
            raise Infeasible(f"the first {k} of {n} increments must sum to {forced}, not {s}")
        return SplitLaw(bag=bag, k=k, s=s)
    table = draw_table(bag, k)
    if table.sum_prob(s) <= 0:
        raise Infeasible(f"no {k} increments of the bag sum to {s}")
    return SplitLaw(bag=bag, k=k, s=s, table=table)


def sample_split(sl, rng):
    """
    Draw the increments of the first k steps and the remaining n - k.

    Returns (bag1, bag2); a side with no increments is None.
    """
    first = sl.first_counts(rng)
    rest = [m - c for m, c in zip(sl.bag.counts, first)]
    values = sl.bag.values
    bag1 = IncrementBag.from_counts(values, first) if sl.k > 0 else None
    bag2 = IncrementBag.from_counts(values, rest) if sl.k < sl.bag.n else None
    return bag1, bag2


def assemble_bridge(z, z1, z2, k, n):
    """
    Blend two child bridges through the midpoint value z.

    Z_i = Z1_i + (i/k) z for i <= k and Z2_{i-k} + ((n-i)/(n-k)) z for i > k.
    z1 and z2 hold the child values at times 1..k and 1..n-k. Returns Z_1..Z_n.
    """
    z1, z2 = np.asarray(z1, dtype=float), np.asarray(z2, dtype=float)
    if not 1 <= k < n or len(z1) != k or len(z2) != n - k:
        raise InvalidInput(f"child bridges of lengths {len(z1)}, {len(z2)} do not fit k={k}, n={n}")
    if z1[-1] != 0 or z2[-1] != 0:
        raise InvalidInput("child bridges must end at 0")
    left = z1 + np.arange(1, k + 1) / k * z
    right = z2 + (n - np.arange(k + 1, n + 1)) / (n - k) * z
    left[-1] = z
    right[-1] = 0.0
    return np.concatenate((left, right))


def sample_bridge(n, rng, size=None):
    """
    Discrete Gaussian bridge Z_0..Z_n drawn directly: Z_i = X_i - (i/n) X_n for a Gaussian walk X.

    Returns shape (n + 1,) or (size, n + 1).
    """
    if n < 1:
        raise InvalidInput(f"n must be at least 1, got {n}")
    shape = (n,) if size is None else (size, n)
    x = np.cumsum(rng.standard_normal(shape), axis=-1)
    z = x - np.arange(1, n + 1) / n * x[..., -1:]
    z[..., -1] = 0.0
    return np.concatenate((np.zeros(shape[:-1] + (1,)), z), axis=-1)


def _build(bag, eta, rng, coupler, den):
    """Return the path in units of 1/den at times 1..n and the bridge at times 1..n."""
    n = bag.n
    if n == 1:
        return np.array([int(bag.values[0] * den)], dtype=np.int64), np.zeros(1)
    if bag.is_constant:
        step = int(bag.values[0] * den)
        return step * np.arange(1, n + 1, dtype=np.int64), sample_bridge(n, rng)[1:]
    k = n // 2
    s, z = couple_midpoint(bag, k, eta, rng, coupler)
    bag1, bag2 = sample_split(split_law(bag, k, s), rng)
    path1, z1 = _build(bag1, eta, rng, coupler, den)
    path2, z2 = _build(bag2, eta, rng, coupler, den)
    return np.concatenate((path1, int(s * den) + path2)), assemble_bridge(z, z1, z2, k, n)


def build_bridge(bag, eta, rng, coupler=QUANTILE):
    """
    Jointly draw a uniform feasible path of bag and a discrete bridge Z.

    The path is uniform over the distinct orderings of bag and Z has covariance
    (i ^ j)(n - (i v j)) / n; W_k = S_k - k S_n / n is kept close to eta * Z_k.
    """
    if not eta > 0:
        raise InvalidInput(f"eta must be positive, got {eta}")
    den = common_denominator(bag.values)
    ints, z = _build(bag, float(eta), rng, coupler, den)
    path = Path(values=tuple(Fraction(int(v), den) for v in ints))
    bridge = BridgePath(z=np.concatenate(([0.0], z)))
    logger.debug("built bridge for n=%d with %d increment types", bag.n, len(bag.entries))
    return CoupledBridgeSample(path=path, bridge=bridge, eta=float(eta), w=centered_walk(path),
                               gamma2=bag.gamma2)


def _path_probability(bag, values):
    n = bag.n
    if n == 1 or bag.is_constant:
        return 1.0
    k = n // 2
    s = values[k - 1]
    first = values[:k]
    second = tuple(v - s for v in values[k:])
    bag1, bag2 = Path(values=first).bag(), Path(values=second).bag()
    g = wr_sum_law(bag, k).prob(s)
    split = split_law(bag, k, s).probability(bag1)
    return g * split * _path_probability(bag1, first) * _path_probability(bag2, second)


def path_probability(bag, path, eta=1.0, cap=None):
    """
    Probability that build_bridge returns path, from the midpoint laws and split kernels.

    The path law does not depend on eta; it is accepted to mirror build_bridge.
    """
    if not eta > 0:
        raise InvalidInput(f"eta must be positive, got {eta}")
    cap = EmbeddingConfig.ORACLE_CAP if cap is None else cap
    if bag.n > cap:
        raise CapExceeded(f"path probabilities are limited to n <= {cap}, got {bag.n}")
    if not is_feasible(bag, path):
        return 0.0
    return _path_probability(bag, path.values)


# Exchangeable bags

class BagModel(ABC):
    """Source of the increment bag handed to build_bridge."""

    @abstractmethod
    def draw(self, n, rng):
        ...


class FixedBag(BagModel):

    def __init__(self, bag):
        self.bag = bag

    def draw(self, n, rng):
        if n != self.bag.n:
            raise InvalidInput(f"fixed bag has {self.bag.n} increments, asked for {n}")
        return self.bag


class IidBag(BagModel):
    """Bag of n i.i.d. draws from an AtomicLaw (multinomial type counts)."""

    def __init__(self, law):
        self.law = law

    def draw(self, n, rng):
        counts = rng.multinomial(n, self.law.probs)
        return IncrementBag.from_counts(self.law.values, counts)


class MixtureBag(BagModel):

    def __init__(self, bags, weights):
        weights = np.asarray(weights, dtype=float)
        if len(bags) != len(weights) or not bags or np.any(weights < 0) or not weights.sum() > 0:
            raise InvalidInput("mixture needs one nonnegative weight per bag")
        self.bags = tuple(bags)
        self.weights = weights / weights.sum()

    def draw(self, n, rng):
        bag = self.bags[rng.choice(len(self.bags), p=self.weights)]
        if bag.n != n:
            raise InvalidInput(f"mixture component has {bag.n} increments, asked for {n}")
        return bag


def resolve_eta(bag, eta_mode):
    """eta for a bag: the fixed value, or gamma(bag) when eta_mode is "gamma"."""
    if eta_mode == "gamma":
        if bag.gamma2 == 0:
            raise Degenerate("eta = gamma needs a bag with a nonzero increment")
        return bag.gamma
    try:
        eta = float(eta_mode)
    except (TypeError, ValueError):
        raise InvalidInput(f"eta must be a positive number or \"gamma\", got {eta_mode!r}")
    if not eta > 0:
        raise InvalidInput(f"eta must be positive, got {eta_mode}")
    return eta


def exchangeable_bridge(model, n, eta_mode, rng, coupler=QUANTILE):
    """Draw a bag from model, then couple its uniform permutation with a bridge."""
    if n < 1:
        raise InvalidInput(f"n must be at least 1, got {n}")
    bag = model.draw(n, rng)
    return build_bridge(bag, resolve_eta(bag, eta_mode), rng, coupler)
