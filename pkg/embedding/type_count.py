"""
Dynamic programming over increment types.

A multiset of increments is described by its distinct values a_1 < ... < a_l. Both
laws the embedding needs on count vectors (k_1, ..., k_l) are laws of independent
per-type counts conditioned on their total:

* sampling k items without replacement from a bag with multiplicities m_j gives the
  multivariate hypergeometric law, i.e. independent Binomial(m_j, p) counts
  conditioned on sum k (any p; p = k/n keeps the weights in range);
* n i.i.d. draws from a law with probabilities p_j give the multinomial law, i.e.
  independent Poisson(n p_j) counts conditioned on sum n.

TypeCountTable folds the types in one at a time and keeps, after each type, the
joint weight of (items so far, integer sum so far). The last type is forced by the
total, so only l - 1 two-dimensional layers are stored.
"""
from fractions import Fraction
from math import lcm
import logging

import numpy as np
from scipy import signal, stats

from embedding.config import EmbeddingConfig
from embedding.errors import CapExceeded, Infeasible, InvalidInput

logger = logging.getLogger(__name__)

# FFT convolution leaves round-off of this relative size where the exact value is zero
FFT_FLOOR = 1e-14


def common_denominator(values):
    return lcm(*(Fraction(v).denominator for v in values)) if values else 1


def convolve(a, b):
    """scipy convolution that cleans FFT round-off and negative noise."""
    method = signal.choose_conv_method(a, b, mode="full")
    out = signal.convolve(a, b, mode="full", method=method)
    if method == "fft":
        peak = out.max()
        out[out < FFT_FLOOR * peak] = 0.0
    else:
        np.clip(out, 0.0, None, out=out)
    return out


def trimmed_kernel(weights, prune_tol):
    """Return (lo, w) keeping the contiguous window of a unimodal count law above prune_tol."""
    weights = np.asarray(weights, dtype=float)
    peak = weights.max()
    if peak <= 0:
        raise Infeasible("count kernel has no mass")
    keep = np.nonzero(weights >= prune_tol * peak)[0]
    lo, hi = int(keep[0]), int(keep[-1])
    return lo, weights[lo:hi + 1] / peak


def binomial_kernels(counts, k, prune_tol=None):
    """Count kernels for drawing k items without replacement from types with multiplicities counts."""
    prune_tol = EmbeddingConfig.PRUNE_TOL if prune_tol is None else prune_tol
    n = sum(counts)
    p = k / n
    return [trimmed_kernel(stats.binom.pmf(np.arange(m + 1), m, p), prune_tol) for m in counts]


def poisson_kernels(probs, n, prune_tol=None):
    """Count kernels for n i.i.d. draws with type probabilities probs."""
    prune_tol = EmbeddingConfig.PRUNE_TOL if prune_tol is None else prune_tol
    grid = np.arange(n + 1)
    return [trimmed_kernel(stats.poisson.pmf(grid, n * p), prune_tol) for p in probs]


class _Layer:
    __slots__ = ("c_off", "t_off", "table")

    def __init__(self, c_off, t_off, table):
        self.c_off = c_off
        self.t_off = t_off
        self.table = table

    def lookup(self, c, t):
        """Vectorised table[c, t] with zeros outside the stored box."""
        rows, cols = np.broadcast_arrays(np.asarray(c) - self.c_off, np.asarray(t) - self.t_off)
        ok = (rows >= 0) & (rows < self.table.shape[0]) & (cols >= 0) & (cols < self.table.shape[1])
        out = np.zeros(rows.shape)
        out[ok] = self.table[rows[ok], cols[ok]]
        return out


class TypeCountTable:
    """
    Joint weights of (count, sum) over increment types, conditioned on a total count.

    Args:
        values: distinct increment values (exact rationals), one per type.
        kernels: list of (lo, weights) count laws, weights[i] for count lo + i.
        target: required total count.
    """

    def __init__(self, values, kernels, target, prune_tol=None, table_cap=None):
        if len(values) != len(kernels) or not values:
            raise InvalidInput("one count kernel per increment type is required")
        self.values = tuple(Fraction(v) for v in values)
        self.denominator = common_denominator(self.values)
        self.ints = [int(v * self.denominator) for v in self.values]
        self.kernels = kernels
        self.target = int(target)
        self._prune_tol = EmbeddingConfig.PRUNE_TOL if prune_tol is None else prune_tol
        self._table_cap = EmbeddingConfig.TABLE_CAP if table_cap is None else table_cap

        max_counts = [lo + len(w) - 1 for lo, w in kernels]
        min_counts = [lo for lo, _ in kernels]
        if not sum(min_counts) <= self.target <= sum(max_counts):
            raise Infeasible(f"total count {self.target} cannot be reached by the increment types")

        self.layers = [_Layer(0, 0, np.ones((1, 1)))]
        for j in range(len(values) - 1):
            rest_max = sum(max_counts[j + 1:])
            rest_min = sum(min_counts[j + 1:])
            self.layers.append(self._fold(self.layers[-1], j, rest_min, rest_max))
        self._final_offset, self._final = self._close()

    def _fold(self, layer, j, rest_min, rest_max):
        lo, w = self.kernels[j]
        v = self.ints[j]
        width = len(w)
        span = abs(v)
        rows, cols = layer.table.shape
        if (rows + width - 1) * (cols + (width - 1) * span) > self._table_cap:
            raise CapExceeded(
                f"DP layer of {(rows + width - 1) * (cols + (width - 1) * span)} entries exceeds "
                f"the table cap {self._table_cap}")
        kernel = np.zeros((width, (width - 1) * span + 1))
        idx = np.arange(width)
        kernel[idx, idx * span if v >= 0 else (width - 1 - idx) * span] = w
        table = convolve(layer.table, kernel)
        c_off = layer.c_off + lo
        t_off = layer.t_off + lo * v - (0 if v >= 0 else (width - 1) * span)

        # counts from which the remaining types can still land on the target
        c = np.arange(table.shape[0]) + c_off
        table[(c > self.target - rest_min) | (c < self.target - rest_max), :] = 0.0
        peak = table.max()
        if peak <= 0:
            raise Infeasible("no feasible count vector")
        table[table < self._prune_tol * peak] = 0.0
        live_rows = np.nonzero(table.any(axis=1))[0]
        live_cols = np.nonzero(table.any(axis=0))[0]
        r0, r1, k0, k1 = live_rows[0], live_rows[-1] + 1, live_cols[0], live_cols[-1] + 1
        logger.debug("folded type %d: table %s -> %s", j, table.shape, (r1 - r0, k1 - k0))
        return _Layer(c_off + r0, t_off + k0, table[r0:r1, k0:k1] / peak)

    def _close(self):
        """Fold the last type, whose count is forced to target minus the count so far."""
        layer = self.layers[-1]
        lo, w = self.kernels[-1]
        v = self.ints[-1]
        rows, cols = layer.table.shape
        counts = self.target - (np.arange(rows) + layer.c_off)
        live = (counts >= lo) & (counts < lo + len(w))
        if not live.any():
            raise Infeasible("no feasible count vector")
        shifts = counts[live] * v
        t_lo = layer.t_off + shifts.min()
        final = np.zeros(cols + int(shifts.max() - shifts.min()))
        for row, k_last, shift in zip(np.nonzero(live)[0], counts[live], shifts):
            start = int(shift - shifts.min())
            final[start:start + cols] += w[k_last - lo] * layer.table[row]
        total = final.sum()
        if total <= 0:
            raise Infeasible("no feasible count vector")
        return int(t_lo), final / total

    # final law over the integer sum

    @property
    def sum_offset(self):
        return self._final_offset

    @property
    def sum_probs(self):
        return self._final

    def sum_prob(self, s):
        """Probability that the (scaled) sum equals the exact rational s."""
        t = Fraction(s) * self.denominator
        if t.denominator != 1:
            return 0.0
        i = int(t) - self._final_offset
        return float(self._final[i]) if 0 <= i < len(self._final) else 0.0

    def _scaled(self, s):
        t = Fraction(s) * self.denominator
        if t.denominator != 1 or self.sum_prob(s) <= 0:
            raise Infeasible(f"sum {s} is not feasible for {self.target} items")
        return int(t)

    def _last_choices(self, t):
        """Counts of the last type with kernel weights and reachability, given the final sum."""
        layer = self.layers[-1]
        lo, w = self.kernels[-1]
        v = self.ints[-1]
        c = np.arange(layer.table.shape[0]) + layer.c_off
        k_last = self.target - c
        ok = (k_last >= lo) & (k_last < lo + len(w))
        c, k_last = c[ok], k_last[ok]
        kernel_w = w[k_last - lo]
        return c, k_last, kernel_w, kernel_w * layer.lookup(c, t - k_last * v)

    def _choices(self, j, c, t):
        """Counts of type j (0-based, j < l-1) with kernel weights and reachability, given the state after type j."""
        lo, w = self.kernels[j]
        v = self.ints[j]
        k = np.arange(lo, lo + len(w))
        return k, w, w * self.layers[j].lookup(c - k, t - k * v)

    def sample(self, s, rng):
        """Draw a count vector whose weighted sum equals s, from its conditional law."""
        t = self._scaled(s)
        counts = [0] * len(self.values)
        c, k_last, _, weights = self._last_choices(t)
        i = rng.choice(len(c), p=weights / weights.sum())
        counts[-1] = int(k_last[i])
        c, t = int(c[i]), t - counts[-1] * self.ints[-1]
        for j in range(len(self.values) - 2, -1, -1):
            k, _, weights = self._choices(j, c, t)
            i = rng.choice(len(k), p=weights / weights.sum())
            counts[j] = int(k[i])
            c, t = c - counts[j], t - counts[j] * self.ints[j]
        return tuple(counts)

    def enumerate(self, s, limit=100_000):
        """All count vectors with weighted sum s and their conditional probabilities."""
        t = self._scaled(s)
        found = []

        def descend(j, c, t, counts, weight):
            if j < 0:
                if c == 0 and t == 0:
                    found.append((tuple(counts), weight))
                if len(found) > limit:
                    raise CapExceeded(f"more than {limit} feasible count vectors")
                return
            k, kernel_w, reach = self._choices(j, c, t)
            for kj, wj, rj in zip(k, kernel_w, reach):
                if rj > 0:
                    counts[j] = int(kj)
                    descend(j - 1, c - int(kj), t - int(kj) * self.ints[j], counts, weight * wj)

        c, k_last, kernel_w, reach = self._last_choices(t)
        counts = [0] * len(self.values)
        for ci, kl, wl, rl in zip(c, k_last, kernel_w, reach):
            if rl > 0:
                counts[-1] = int(kl)
                descend(len(self.values) - 2, int(ci), t - int(kl) * self.ints[-1], counts, wl)
        total = sum(weight for _, weight in found)
        return [(counts, weight / total) for counts, weight in found]
