from collections import Counter
from fractions import Fraction
from functools import cached_property
from math import lcm

import msgspec
import numpy as np

from embedding.config import EmbeddingConfig
from embedding.errors import CapExceeded, InvalidInput


def as_fraction(value):
    """Exact rational from an int, Fraction, "p/q" string or decimal string/float (via its repr)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, np.integer):
        value = int(value)
    elif isinstance(value, (float, np.floating)):
        value = repr(float(value))
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as err:
        raise InvalidInput(f"cannot read {value!r} as an exact rational: {err}")


class AtomicLaw(msgspec.Struct, frozen=True, dict=True):
    """
    Finite-support law with exact rational atoms and float probabilities.

    atoms is a tuple of (value, prob) sorted by value. Build with AtomicLaw.from_pairs.
    """
    atoms: tuple
    name: str = ""

    def __post_init__(self):
        if not self.atoms:
            raise InvalidInput("a law needs at least one atom")
        values = [v for v, _ in self.atoms]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise InvalidInput("atom values must be distinct and sorted")
        for v, p in self.atoms:
            if not p > 0:
                raise InvalidInput(f"atom {v} has nonpositive probability {p}")
        total = sum(p for _, p in self.atoms)
        if abs(total - 1.0) > EmbeddingConfig.EXACT_TOL:
            raise InvalidInput(f"probabilities sum to {total!r}, not 1")

    @classmethod
    def from_pairs(cls, pairs, name=""):
        pairs = [(as_fraction(v), float(p)) for v, p in pairs]
        if not pairs:
            raise InvalidInput("a law needs at least one atom")
        merged = Counter()
        for v, p in pairs:
            if v in merged:
                raise InvalidInput(f"atom value {v} listed twice")
            merged[v] = p
        return cls(atoms=tuple(sorted(merged.items())), name=name)

    @cached_property
    def values(self):
        return tuple(v for v, _ in self.atoms)

    @cached_property
    def value_array(self):
        return np.array([float(v) for v in self.values])

    @cached_property
    def probs(self):
        return np.array([p for _, p in self.atoms])

    @cached_property
    def moments(self):
        """Raw moments m1..m4."""
        return tuple(self.moment(d) for d in range(1, 5))

    def moment(self, d):
        return float(sum(float(v ** d) * p for v, p in self.atoms))

    @property
    def variance(self):
        m1, m2 = self.moments[0], self.moments[1]
        return m2 - m1 * m1

    @property
    def bound(self):
        """B = max |a| over the atoms."""
        return max(abs(v) for v in self.values)

    @property
    def min_abs(self):
        """nu = min |a| over the atoms (0 when 0 is an atom)."""
        return min(abs(v) for v in self.values)

    @property
    def support_interval(self):
        return self.values[0], self.values[-1]

    def reflect(self):
        """Law of -X."""
        return AtomicLaw.from_pairs([(-v, p) for v, p in self.atoms], name=f"-{self.name}" if self.name else "")

    def sample_indices(self, rng, size):
        return rng.choice(len(self.atoms), size=size, p=self.probs)

    def sample(self, rng, size):
        return self.value_array[self.sample_indices(rng, size)]


class IncrementBag(msgspec.Struct, frozen=True, dict=True):
    """
    Multiset of increments: entries is a tuple of (value, multiplicity) sorted by value.
    """
    entries: tuple

    def __post_init__(self):
        if not self.entries:
            raise InvalidInput("an increment bag needs at least one entry")
        values = [v for v, _ in self.entries]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise InvalidInput("bag values must be distinct and sorted")
        if any(m < 1 for _, m in self.entries):
            raise InvalidInput("bag multiplicities must be positive")

    @classmethod
    def from_values(cls, values):
        counts = Counter(as_fraction(v) for v in values)
        return cls(entries=tuple(sorted(counts.items())))

    @classmethod
    def from_counts(cls, values, counts):
        pairs = [(as_fraction(v), int(m)) for v, m in zip(values, counts) if m > 0]
        return cls(entries=tuple(sorted(pairs)))

    @property
    def key(self):
        return self.entries

    @cached_property
    def values(self):
        return tuple(v for v, _ in self.entries)

    @cached_property
    def counts(self):
        return tuple(m for _, m in self.entries)

    @cached_property
    def n(self):
        return sum(self.counts)

    @cached_property
    def total(self):
        """a = sum of the increments."""
        return sum((v * m for v, m in self.entries), Fraction(0))

    @cached_property
    def gamma2(self):
        """gamma^2 = n^-1 sum of squared increments."""
        return sum((v * v * m for v, m in self.entries), Fraction(0)) / self.n

    @property
    def gamma(self):
        return float(self.gamma2) ** 0.5

    @property
    def is_constant(self):
        return len(self.entries) == 1

    def expand(self):
        """The increments in ascending order, repeated by multiplicity."""
        return tuple(v for v, m in self.entries for _ in range(m))

    def union(self, other):
        counts = Counter(dict(self.entries))
        counts.update(dict(other.entries))
        return IncrementBag(entries=tuple(sorted(counts.items())))

    def count_of(self, value):
        return dict(self.entries).get(as_fraction(value), 0)


class LatticeLaw(msgspec.Struct, eq=False, dict=True):
    """
    Probability mass function on the lattice {(offset + i) / denominator}.

    probs[i] is the probability of (offset + i) / denominator.
    """
    offset: int
    denominator: int
    probs: np.ndarray

    def __post_init__(self):
        if len(self.probs) > EmbeddingConfig.SUPPORT_CAP:
            raise CapExceeded(f"law support of {len(self.probs)} entries exceeds the cap {EmbeddingConfig.SUPPORT_CAP}")
        if np.any(self.probs < 0):
            raise InvalidInput("negative probability in lattice law")
        total = float(self.probs.sum())
        if abs(total - 1.0) > EmbeddingConfig.FLOAT_TOL:
            raise InvalidInput(f"lattice law mass is {total!r}, not 1")

    @classmethod
    def point_mass(cls, value):
        value = as_fraction(value)
        return cls(offset=value.numerator, denominator=value.denominator, probs=np.ones(1))

    @classmethod
    def from_points(cls, points):
        """Build from a mapping of exact rational value to probability."""
        points = {as_fraction(v): float(p) for v, p in points.items() if p > 0}
        if not points:
            raise InvalidInput("empty lattice law")
        den = lcm(*(v.denominator for v in points))
        ints = {int(v * den): p for v, p in points.items()}
        lo, hi = min(ints), max(ints)
        probs = np.zeros(hi - lo + 1)
        for i, p in ints.items():
            probs[i - lo] = p
        return cls(offset=lo, denominator=den, probs=probs / probs.sum())

    @cached_property
    def _nonzero(self):
        return np.nonzero(self.probs > 0)[0]

    @property
    def points(self):
        return {Fraction(int(self.offset + i), self.denominator): float(self.probs[i]) for i in self._nonzero}

    @property
    def support(self):
        return [Fraction(int(self.offset + i), self.denominator) for i in self._nonzero]

    @cached_property
    def support_array(self):
        return (self.offset + self._nonzero) / self.denominator

    @cached_property
    def mass_array(self):
        return self.probs[self._nonzero]

    def prob(self, value):
        t = as_fraction(value) * self.denominator
        if t.denominator != 1:
            return 0.0
        i = int(t) - self.offset
        return float(self.probs[i]) if 0 <= i < len(self.probs) else 0.0

    @property
    def mean(self):
        return float(np.dot(self.support_array, self.mass_array))

    @property
    def variance(self):
        centered = self.support_array - self.mean
        return float(np.dot(centered * centered, self.mass_array))

    @cached_property
    def cdf(self):
        """P(W <= w_i) over the support points, ascending."""
        return np.minimum(np.cumsum(self.mass_array) / self.mass_array.sum(), 1.0)

    @property
    def is_point_mass(self):
        return len(self._nonzero) == 1

    def shift(self, c):
        """Law of W + c."""
        c = as_fraction(c)
        den = lcm(self.denominator, c.denominator)
        law = self if den == self.denominator else self.on_denominator(den)
        return LatticeLaw(offset=law.offset + int(c * den), denominator=den, probs=law.probs)

    def on_denominator(self, denominator):
        """Same law written on a finer lattice with the given denominator."""
        if denominator % self.denominator:
            raise InvalidInput(f"{denominator} is not a multiple of {self.denominator}")
        stride = denominator // self.denominator
        probs = np.zeros((len(self.probs) - 1) * stride + 1)
        probs[::stride] = self.probs
        return LatticeLaw(offset=self.offset * stride, denominator=denominator, probs=probs)

    @classmethod
    def mixture(cls, laws, weights):
        weights = np.asarray(weights, dtype=float)
        if len(laws) != len(weights) or np.any(weights < 0) or not weights.sum() > 0:
            raise InvalidInput("mixture needs one nonnegative weight per law")
        den = lcm(*(law.denominator for law in laws))
        laws = [law.on_denominator(den) for law in laws]
        lo = min(law.offset for law in laws)
        hi = max(law.offset + len(law.probs) for law in laws)
        probs = np.zeros(hi - lo)
        for law, w in zip(laws, weights / weights.sum()):
            probs[law.offset - lo:law.offset - lo + len(law.probs)] += w * law.probs
        return cls(offset=lo, denominator=den, probs=probs)


class Path(msgspec.Struct, frozen=True):
    """Walk values s_1..s_n (s_0 = 0 implicit)."""
    values: tuple

    @property
    def n(self):
        return len(self.values)

    def increments(self):
        previous = (Fraction(0),) + tuple(self.values[:-1])
        return tuple(b - a for a, b in zip(previous, self.values))

    def bag(self):
        return IncrementBag.from_values(self.increments())

    def as_array(self):
        return np.array([float(v) for v in self.values])


class HypothesisCheck(msgspec.Struct, frozen=True):
    name: str
    passed: bool
    measured: float


class ValidationReport(msgspec.Struct, frozen=True):
    law_name: str
    checks: tuple
    moments: tuple
    bound: float
    min_abs: float

    @property
    def ok(self):
        return all(check.passed for check in self.checks)

    def failed(self):
        return [check.name for check in self.checks if not check.passed]


def enc_hook(obj):
    """msgspec encoder hook for the numeric types the records carry."""
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise NotImplementedError(f"cannot encode {type(obj).__name__}")
