"""
Square-bias and zero-bias transforms of finite-support laws, the Stein coefficient
h_Y of a piecewise-uniform law, and exact checkers for the Stein-type identities.

All identity checks integrate monomials exactly over the piecewise-uniform pieces;
nothing here is Monte Carlo except the samplers.
"""
from collections import defaultdict
from fractions import Fraction
from functools import cached_property
from math import comb
import logging

import msgspec
import numpy as np

from embedding.config import EmbeddingConfig
from embedding.errors import CapExceeded, Degenerate, InvalidInput, OutsideSupport, ValidationFailed
from embedding.laws_struct import AtomicLaw, as_fraction

logger = logging.getLogger(__name__)

MAX_DEGREE = 8


class PiecewiseUniformLaw(msgspec.Struct, frozen=True, dict=True):
    """
    Density constant on each open interval (b_{i-1}, b_i).

    breakpoints b_0 < ... < b_m are exact rationals; densities has m entries.
    """
    breakpoints: tuple
    densities: tuple

    def __post_init__(self):
        if len(self.breakpoints) != len(self.densities) + 1 or not self.densities:
            raise InvalidInput("need m + 1 breakpoints for m densities")
        if any(b <= a for a, b in zip(self.breakpoints, self.breakpoints[1:])):
            raise InvalidInput("breakpoints must increase")
        if any(d < 0 for d in self.densities):
            raise InvalidInput("densities must be nonnegative")
        if abs(self.mass - 1.0) > EmbeddingConfig.EXACT_TOL:
            raise InvalidInput(f"piecewise-uniform mass is {self.mass!r}, not 1")

    @cached_property
    def piece_masses(self):
        return np.array([d * float(b - a) for a, b, d in self.pieces()])

    @property
    def mass(self):
        return float(self.piece_masses.sum())

    @property
    def support(self):
        return self.breakpoints[0], self.breakpoints[-1]

    def pieces(self):
        return zip(self.breakpoints, self.breakpoints[1:], self.densities)

    def piece_index(self, t):
        """Index of the piece [b_{i-1}, b_i) holding t, or None outside [b_0, b_m)."""
        t = as_fraction(t)
        if t < self.breakpoints[0] or t >= self.breakpoints[-1]:
            return None
        for i, (a, b, _) in enumerate(self.pieces()):
            if a <= t < b:
                return i

    def density(self, t):
        """Right-continuous density."""
        i = self.piece_index(t)
        return 0.0 if i is None else self.densities[i]

    def moment(self, d):
        """E[Y^d], integrated piece by piece."""
        return float(sum(dens * float((b ** (d + 1) - a ** (d + 1)) / (d + 1)) for a, b, dens in self.pieces()))

    @cached_property
    def _cdf_knots(self):
        return (np.array([float(b) for b in self.breakpoints]),
                np.concatenate(([0.0], np.cumsum(self.piece_masses))))

    def cdf(self, x):
        """Piecewise-linear CDF, exact between the breakpoints."""
        knots, cum = self._cdf_knots
        return np.interp(x, knots, cum, left=0.0, right=1.0)

    def sample(self, rng, size=None):
        masses = self.piece_masses / self.piece_masses.sum()
        pick = rng.choice(len(masses), size=size, p=masses)
        lows = np.array([float(a) for a in self.breakpoints[:-1]])
        widths = np.array([float(b - a) for a, b, _ in self.pieces()])
        return lows[pick] + widths[pick] * rng.random(size)


class SteinCoefficientFn(msgspec.Struct, frozen=True):
    """
    h_Y(t) = E[Y 1(Y > t)] / p_Y(t) on the support of a piecewise-uniform Y.

    On the piece [b_{i-1}, b_i) with density d_i, h_Y(t) = c_i - t^2/2 where
    c_i = b_i^2/2 + (int_{b_i}^{b_m} y p_Y(y) dy) / d_i.
    """
    law: PiecewiseUniformLaw
    constants: tuple

    def evaluate(self, t):
        """Return (h_Y(t), inside_support); outside the support the value is 0."""
        i = self.law.piece_index(t)
        if i is None:
            return 0.0, False
        if self.law.densities[i] == 0:
            raise Degenerate(f"density of Y vanishes at interior point {t}")
        return self.constants[i] - float(t) ** 2 / 2, True

    def __call__(self, t):
        return self.evaluate(t)[0]

    def weighted_moment(self, j):
        """E[h_Y(Y) Y^j] = sum over pieces of int d_i (c_i - y^2/2) y^j dy."""
        total = 0.0
        for (a, b, dens), c in zip(self.law.pieces(), self.constants):
            total += dens * (c * float((b ** (j + 1) - a ** (j + 1)) / (j + 1))
                             - float((b ** (j + 3) - a ** (j + 3)) / (2 * (j + 3))))
        return total

    def sup(self, lo=None, hi=None):
        """Supremum of h_Y over [lo, hi] intersected with the support."""
        lo = self.law.breakpoints[0] if lo is None else max(as_fraction(lo), self.law.breakpoints[0])
        hi = self.law.breakpoints[-1] if hi is None else min(as_fraction(hi), self.law.breakpoints[-1])
        best = 0.0
        for (a, b, dens), c in zip(self.law.pieces(), self.constants):
            left, right = max(a, lo), min(b, hi)
            if left > right or dens == 0:
                continue
            # concave in t, peak at the point of [left, right] closest to 0
            t = min(max(Fraction(0), left), right)
            best = max(best, c - float(t) ** 2 / 2)
        return best


def square_bias(law):
    """Law reweighting each atom v by v^2 / E[X^2]."""
    m2 = law.moment(2)
    if m2 <= 0:
        raise Degenerate("square bias needs a positive second moment")
    return AtomicLaw.from_pairs([(v, float(v * v) * p / m2) for v, p in law.atoms if v != 0],
                                name=f"{law.name}-square-bias" if law.name else "")


def _require_mean_zero(law):
    m1 = law.moment(1)
    if abs(m1) > EmbeddingConfig.EXACT_TOL:
        raise ValidationFailed(f"zero bias needs a mean-zero law, mean is {m1!r}")
    if law.moment(2) <= 0:
        raise Degenerate("zero bias needs a positive variance")


def zero_bias(law):
    """
    Zero-bias law of a mean-zero X: density E[X 1(X > x)] / sigma^2, constant between atoms.
    """
    _require_mean_zero(law)
    sigma2 = law.moment(2)
    values = law.values
    densities = []
    tail = 0.0
    for v, p in reversed(law.atoms[1:]):
        tail += float(v) * p
        densities.append(tail / sigma2)
    return PiecewiseUniformLaw(breakpoints=values, densities=tuple(reversed(densities)))


def zero_bias_sample(law, rng, size=None):
    """U * X_square with U uniform on [0, 1], independent of the square-biased X_square."""
    _require_mean_zero(law)
    biased = square_bias(law)
    return biased.sample(rng, size) * rng.random(size) if size is not None \
        else float(biased.sample(rng, 1)[0] * rng.random())


def square_bias_uniform_cdf(law, x):
    """Closed-form CDF of U * X_square at x."""
    biased = square_bias(law)
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for v, q in biased.atoms:
        ratio = np.clip(x / float(v), 0.0, 1.0)
        out += q * (ratio if v > 0 else 1.0 - ratio)
    return out


def stein_coefficient(pw):
    constants = []
    tail = 0.0
    for a, b, dens in reversed(list(pw.pieces())):
        constants.append(float(b * b) / 2 + (tail / dens if dens > 0 else 0.0))
        tail += dens * float(b * b - a * a) / 2
    return SteinCoefficientFn(law=pw, constants=tuple(reversed(constants)))


def stein_h(pw, t):
    """h_Y(t); 0 outside the support (right-continuous at density jumps)."""
    value, inside = stein_coefficient(pw).evaluate(t)
    if not inside:
        logger.debug("stein_h evaluated outside the support at %s", t)
    return value


def _check_degree(degree):
    if not 1 <= degree <= MAX_DEGREE:
        raise InvalidInput(f"degree must be within 1..{MAX_DEGREE}, got {degree}")


def check_zero_bias_identity(law, degree):
    """|sigma^2 E[f'(X*)] - E[X f(X)]| for f(x) = x^degree."""
    _check_degree(degree)
    pw = zero_bias(law)
    sigma2 = law.moment(2)
    lhs = sigma2 * degree * pw.moment(degree - 1)
    rhs = law.moment(degree + 1)
    return abs(lhs - rhs)


def check_smoothing_identity(law, degree):
    """
    |E[X f(X+Y)] - E[(X^2 - XY) f'(X+Y)]| for f(x) = x^degree, Y the independent zero-bias of X.
    """
    _check_degree(degree)
    pw = zero_bias(law)
    ey = [pw.moment(j) for j in range(degree + 1)]
    d = degree
    lhs = rhs = 0.0
    for v, p in law.atoms:
        x = float(v)
        lhs += p * x * sum(comb(d, j) * x ** (d - j) * ey[j] for j in range(d + 1))
        rhs += p * d * sum(comb(d - 1, j) * x ** (d - 1 - j) * (x * x * ey[j] - x * ey[j + 1])
                           for j in range(d))
    return abs(lhs - rhs)


def sum_stein_coefficient(eps, y, law):
    """T = sum eps_i^2 - S_n y + h_Y(y), Y the zero-bias law of law."""
    atoms = set(law.values)
    eps = [as_fraction(e) for e in eps]
    if any(e not in atoms for e in eps):
        raise InvalidInput("every eps value must be an atom of the law")
    h = stein_coefficient(zero_bias(law))
    value, inside = h.evaluate(y)
    if not inside and as_fraction(y) != law.values[-1]:
        raise OutsideSupport(f"y={y} lies outside the zero-bias support {law.values[0]}..{law.values[-1]}")
    return float(sum(e * e for e in eps)) - float(sum(eps)) * float(y) + value


def _sum_and_square_law(law, n):
    """Exact joint law of (S_n, sum eps_i^2) for n i.i.d. copies of law."""
    joint = {(Fraction(0), Fraction(0)): 1.0}
    for _ in range(n):
        step = defaultdict(float)
        for (s, q), w in joint.items():
            for v, p in law.atoms:
                step[(s + v, q + v * v)] += w * p
        joint = step
    return joint


def check_sum_stein_identity(law, n, degree, cap=None):
    """
    |E[S~ f(S~)] - E[T f'(S~)]| for f(x) = x^degree, S~ = S_n + Y and T the sum Stein coefficient.
    """
    _check_degree(degree)
    cap = EmbeddingConfig.ORACLE_CAP if cap is None else cap
    if n > cap:
        raise CapExceeded(f"exact sum identity is limited to n <= {cap}")
    pw = zero_bias(law)
    h = stein_coefficient(pw)
    d = degree
    ey = [pw.moment(j) for j in range(d + 2)]
    ehy = [h.weighted_moment(j) for j in range(d)]
    lhs = rhs = 0.0
    for (s_exact, q_exact), prob in _sum_and_square_law(law, n).items():
        s, q = float(s_exact), float(q_exact)
        lhs += prob * sum(comb(d + 1, j) * s ** (d + 1 - j) * ey[j] for j in range(d + 2))
        rhs += prob * d * sum(comb(d - 1, j) * s ** (d - 1 - j) * (q * ey[j] - s * ey[j + 1] + ehy[j])
                              for j in range(d))
    return abs(lhs - rhs)
