"""
Strong embedding of an i.i.d. partial-sum path at fixed n.

S_n is coupled with Z_n ~ N(0, n); the increment multiset is drawn from its
conditional law given S_n; the uniform ordering of those increments is coupled with
a discrete bridge Z~ at eta = gamma(bag); and Z_i = Z~_i + (i/n) Z_n.
"""
from functools import lru_cache
import logging

import msgspec
import numpy as np

from embedding.bridge import build_bridge, path_probability, resolve_eta
from embedding.coupling import QUANTILE, couple_sum
from embedding.errors import InvalidInput
from embedding.laws import iid_sum_law, is_feasible
from embedding.laws_struct import IncrementBag, Path, as_fraction
from embedding.type_count import TypeCountTable, poisson_kernels

logger = logging.getLogger(__name__)


class EmbedOutput(msgspec.Struct, frozen=True, eq=False):
    """Walk S_1..S_n and Gaussian walk Z_1..Z_n (S_0 = Z_0 = 0 implicit)."""
    s: Path
    z: np.ndarray
    gamma2: float
    max_dev: float
    terminal_dev: float
    eta: float = 1.0


@lru_cache(maxsize=16)
def _multinomial_table(law, n):
    return TypeCountTable(law.values, poisson_kernels(law.probs, n), n)


def sample_bag_given_sum(law, n, s, rng):
    """Increment multiset of n i.i.d. draws from law, conditioned on their sum being s."""
    if n < 1:
        raise InvalidInput(f"n must be at least 1, got {n}")
    counts = _multinomial_table(law, n).sample(as_fraction(s), rng)
    return IncrementBag.from_counts(law.values, counts)


def max_deviation(out):
    """max over k = 0..n of |s_k - z_k|."""
    if len(out.z) != out.s.n:
        raise InvalidInput(f"walk has {out.s.n} steps but the Gaussian path has {len(out.z)}")
    return float(np.max(np.abs(out.s.as_array() - np.asarray(out.z)), initial=0.0))


def strong_embed(law, n, rng, eta_mode="gamma", coupler=QUANTILE):
    """Draw (S, Z) with S the i.i.d. walk of law and Z a Gaussian walk with Cov(Z_i, Z_j) = i ^ j."""
    s_n, z_n = couple_sum(law, n, rng, coupler)
    bag = sample_bag_given_sum(law, n, s_n, rng)
    eta = resolve_eta(bag, eta_mode)
    sample = build_bridge(bag, eta, rng, coupler)
    times = np.arange(1, n + 1)
    z = sample.bridge.z[1:] + times / n * z_n
    z[-1] = z_n
    max_dev = float(np.max(np.abs(sample.path.as_array() - z), initial=0.0))
    return EmbedOutput(s=sample.path, z=z, gamma2=float(bag.gamma2), max_dev=max_dev,
                       terminal_dev=abs(float(s_n) - z_n), eta=eta)


def iid_path_probability(law, path):
    """prod over the steps of P(X = increment)."""
    probs = dict(law.atoms)
    out = 1.0
    for step in path.increments():
        out *= probs.get(step, 0.0)
    return out


def conditional_bag_probability(law, bag, s):
    """P(increment multiset = bag | S_n = s) for n i.i.d. draws."""
    if bag.total != as_fraction(s) or any(v not in set(law.values) for v in bag.values):
        return 0.0
    counts = tuple(bag.count_of(v) for v in law.values)
    return dict(_multinomial_table(law, bag.n).enumerate(s)).get(counts, 0.0)


def embed_path_probability(law, path, cap=None):
    """
    Probability that strong_embed returns path, composed from its stages:
    P(S_n = s_n) * P(bag | S_n = s_n) * P(path | bag).
    """
    s_n = path.values[-1]
    bag = path.bag()
    terminal = iid_sum_law(law, path.n).prob(s_n)
    if terminal == 0:
        return 0.0
    conditional = conditional_bag_probability(law, bag, s_n)
    if conditional == 0 or not is_feasible(bag, path):
        return 0.0
    return terminal * conditional * path_probability(bag, path, cap=cap)
