"""
Estimators and reference laws for checking embeddings: the W_{k,d} decomposition,
Smirnov law of the bridge maximum, covariance and tail checks, the scaling study
and the constants of the O(log n) bound.
"""
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
import csv
import logging
import math

import msgspec
import numpy as np
from scipy import optimize, special, stats

from embedding.bridge import sample_bridge
from embedding.coupling import require_embeddable
from embedding.embed import strong_embed
from embedding.errors import Degenerate, InvalidInput

logger = logging.getLogger(__name__)

MIN_SAMPLES = 1000
MIN_BIN_HITS = 50
# expected overshoot of a continuous bridge over its unit-grid maximum, -zeta(1/2) / sqrt(2 pi)
SMIRNOV_SHIFT = 0.5825971579390106
CSV_COLUMNS = ("n", "replicate", "seed", "max_dev", "terminal_dev", "s_n", "gamma2")


# W_{k,d}

def decompose_wkd(eps_in_order, k, dplus=None):
    """
    Split W_k = S_k - k S_n / n by the gap d = |eps_i - eps_j| between a first-half and a
    second-half increment: W_{k,d} = n^-1 sum_{i <= k < j} (eps_i - eps_j) 1(|eps_i - eps_j| = d).

    Exact when every increment is an int or Fraction. Returns ({d: W_{k,d}}, W_k).
    """
    eps = list(eps_in_order)
    n = len(eps)
    if not 1 <= k <= n:
        raise InvalidInput(f"k={k} outside 1..{n}")
    exact = all(isinstance(e, (int, Fraction)) for e in eps)
    if exact:
        eps = [Fraction(e) for e in eps]
    zero = Fraction(0) if exact else 0.0
    scale = Fraction(1, n) if exact else 1.0 / n

    first, second = Counter(eps[:k]), Counter(eps[k:])
    parts = {d: zero for d in (dplus or ())}
    for a, ca in first.items():
        for b, cb in second.items():
            d = abs(a - b)
            if dplus is not None and d not in parts:
                raise InvalidInput(f"gap {d} is missing from the difference set")
            parts[d] = parts.get(d, zero) + ca * cb * (a - b) * scale
    parts.setdefault(zero, zero)
    w_k = sum(eps[:k], zero) - k * scale * sum(eps, zero)
    return parts, w_k


# Smirnov law

def smirnov_cdf(x):
    """P(max of a standard Brownian bridge <= x) = 1 - exp(-2 x^2) for x > 0."""
    x = np.asarray(x, dtype=float)
    out = np.where(x > 0, -np.expm1(-2.0 * x * x), 0.0)
    return float(out) if out.ndim == 0 else out


def smirnov_sample(rng, size=None):
    return np.sqrt(-np.log1p(-rng.random(size)) / 2.0)


def smirnov_mgf(a):
    """E exp(a M) for M Smirnov distributed: 1 + a sqrt(pi/2) e^{a^2/8} Phi(a/2)."""
    return 1.0 + a * math.sqrt(math.pi / 2) * math.exp(a * a / 8) * special.ndtr(a / 2)


def bridge_max_mgf_bound(a):
    """Upper bound 2 + sqrt(2 pi) a e^{a^2/8} on E exp(a max|B|) for a standard bridge B, a >= 0."""
    if a < 0:
        raise InvalidInput(f"a must be nonnegative, got {a}")
    return 2.0 + math.sqrt(2 * math.pi) * a * math.exp(a * a / 8)


def bridge_maxima(n, samples, rng, continuity_correction=True, chunk=2000):
    """max_i Z_i / sqrt(n) for discrete bridges of n steps, optionally shifted by SMIRNOV_SHIFT / sqrt(n)."""
    out = np.empty(samples)
    for start in range(0, samples, chunk):
        size = min(chunk, samples - start)
        out[start:start + size] = sample_bridge(n, rng, size=size).max(axis=1)
    if continuity_correction:
        out += SMIRNOV_SHIFT
    return out / math.sqrt(n)


def bridge_max_ks(n, samples, rng, continuity_correction=True):
    """KS distance between rescaled discrete bridge maxima and the Smirnov law."""
    maxima = bridge_maxima(n, samples, rng, continuity_correction)
    return float(stats.kstest(maxima, smirnov_cdf).statistic)


# Covariance and tails

def _require_samples(count, what):
    if count < MIN_SAMPLES:
        raise InvalidInput(f"{what} needs at least {MIN_SAMPLES} samples, got {count}")


def target_covariance(n, target):
    i = np.arange(1, n + 1)
    low, high = np.minimum.outer(i, i), np.maximum.outer(i, i)
    if target == "bridge":
        return low * (n - high) / n
    if target == "walk":
        return low.astype(float)
    raise InvalidInput(f"unknown covariance target {target!r}; use 'bridge' or 'walk'")


def covariance_check(samples, n, target="bridge"):
    """
    Largest entrywise gap between the empirical covariance of samples and the target.

    samples has one row per draw and columns for times 1..n (a leading time-0 column is dropped).
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim != 2 or samples.shape[1] not in (n, n + 1):
        raise InvalidInput(f"samples must have n or n + 1 columns for n={n}")
    _require_samples(samples.shape[0], "covariance_check")
    if samples.shape[1] == n + 1:
        samples = samples[:, 1:]
    empirical = np.cov(samples, rowvar=False).reshape(n, n)
    return float(np.max(np.abs(empirical - target_covariance(n, target))))


class TailFit(msgspec.Struct, frozen=True):
    slope: float
    intercept: float
    r2: float
    points: int


def tail_fit(devs, threshold_grid=None, min_hits=MIN_BIN_HITS):
    """
    Least-squares line through log P(dev >= x) over the grid points with at least min_hits
    exceedances.
    """
    devs = np.sort(np.asarray(devs, dtype=float))
    _require_samples(devs.size, "tail_fit")
    if devs[0] == devs[-1]:
        raise Degenerate("tail_fit needs non-constant deviations")
    grid = np.linspace(devs[0], devs[-1], 50) if threshold_grid is None else np.asarray(threshold_grid, float)
    hits = devs.size - np.searchsorted(devs, grid, side="left")
    keep = hits >= min_hits
    if keep.sum() < 3:
        raise Degenerate(f"only {int(keep.sum())} grid points have {min_hits} or more exceedances")
    fit = stats.linregress(grid[keep], np.log(hits[keep] / devs.size))
    return TailFit(slope=float(fit.slope), intercept=float(fit.intercept), r2=float(fit.rvalue ** 2),
                   points=int(keep.sum()))


# Moment inequalities for a uniformly permuted bag

class MgfCheck(msgspec.Struct, frozen=True):
    theta: float
    gap: float | None  # d for W_{k,d}, None for W_k
    estimate: float
    std_error: float
    bound: float
    passed: bool


def mgf_bound_check(bag, k, thetas, samples, rng):
    """
    Estimate E exp(theta W_{k,d} / sqrt k) against exp(d^2 theta^2 / 2) and
    E exp(theta W_k / sqrt k) against exp(B^2 theta^2) over random orderings of bag.
    Passes when estimate <= bound (1 + 3 relative standard error).
    """
    n = bag.n
    if not 1 <= k < n:
        raise InvalidInput(f"k={k} outside 1..{n - 1}")
    values = np.array([float(v) for v in bag.values])
    first = rng.multivariate_hypergeometric(np.array(bag.counts), k, size=samples)
    second = np.array(bag.counts) - first
    gaps = np.abs(values[:, None] - values[None, :])
    bound_b = float(max(abs(v) for v in bag.values))

    stats_by_gap = {}
    for d in np.unique(gaps):
        if d == 0:
            continue
        mask = (gaps == d) * (values[:, None] - values[None, :])
        stats_by_gap[float(d)] = np.einsum("ns,st,nt->n", first, mask, second) / n
    w_k = sum(stats_by_gap.values(), np.zeros(samples))

    def check(values_, theta, gap, bound):
        draws = np.exp(theta * values_ / math.sqrt(k))
        estimate = float(draws.mean())
        std_error = float(draws.std(ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
        passed = estimate <= bound * (1.0 + 3.0 * std_error / estimate)
        return MgfCheck(theta=float(theta), gap=gap, estimate=estimate, std_error=std_error,
                        bound=bound, passed=passed)

    results = []
    for theta in thetas:
        for d, w in stats_by_gap.items():
            results.append(check(w, theta, d, math.exp(d * d * theta * theta / 2)))
        results.append(check(w_k, theta, None, math.exp(bound_b ** 2 * theta * theta)))
    return results


# Scaling study

class ScalingRow(msgspec.Struct, frozen=True):
    n: int
    replicate: int
    seed: int
    max_dev: float
    terminal_dev: float
    s_n: float
    gamma2: float


class ScalingSummary(msgspec.Struct, frozen=True):
    n_list: tuple
    medians: tuple
    slope: float | None  # of median max_dev against ln n
    intercept: float | None
    r2: float | None
    ratio: float  # median at the largest n over median at the smallest


def replica_seeds(seed, n_list, replicas):
    """One seed per (n, replicate), spawned from the master seed in that order."""
    children = np.random.SeedSequence(seed).spawn(len(n_list) * replicas)
    it = iter(children)
    return [(n, r, int(next(it).generate_state(1)[0])) for n in n_list for r in range(replicas)]


def run_replica(law, n, replicate, seed, eta_mode="gamma"):
    out = strong_embed(law, n, np.random.default_rng(seed), eta_mode=eta_mode)
    return ScalingRow(n=n, replicate=replicate, seed=seed, max_dev=out.max_dev,
                      terminal_dev=out.terminal_dev, s_n=float(out.s.values[-1]), gamma2=out.gamma2)


def _run_task(task):
    return run_replica(*task)


def summarize_scaling(rows):
    by_n = {}
    for row in rows:
        by_n.setdefault(row.n, []).append(row.max_dev)
    n_list = tuple(sorted(by_n))
    medians = tuple(float(np.median(by_n[n])) for n in n_list)
    ratio = medians[-1] / medians[0] if medians[0] > 0 else math.inf
    if len(n_list) < 2:
        return ScalingSummary(n_list=n_list, medians=medians, slope=None, intercept=None, r2=None, ratio=ratio)
    fit = stats.linregress(np.log(n_list), medians)
    return ScalingSummary(n_list=n_list, medians=medians, slope=float(fit.slope),
                          intercept=float(fit.intercept), r2=float(fit.rvalue ** 2), ratio=ratio)


def scaling_study(law, n_list, replicas, seed, workers=1, eta_mode="gamma"):
    """
    Run strong_embed for every n in n_list, replicas times each.

    Each replica runs on its own spawned seed, so the rows depend only on seed and not
    on the worker count. Returns (rows sorted by (n, replicate), ScalingSummary).
    """
    n_list = [int(n) for n in n_list]
    if not n_list:
        raise InvalidInput("n_list must not be empty")
    if replicas < 1:
        raise InvalidInput(f"replicas must be at least 1, got {replicas}")
    if any(n < 1 for n in n_list):
        raise InvalidInput("every n must be at least 1")
    require_embeddable(law)
    tasks = [(law, n, r, s, eta_mode) for n, r, s in replica_seeds(seed, n_list, replicas)]
    logger.info("scaling study: %d replicas over n=%s on %d worker(s)", len(tasks), n_list, workers)
    if workers <= 1:
        rows = [_run_task(task) for task in tasks]
    else:
        chunksize = max(1, len(tasks) // (workers * 8))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_task, tasks, chunksize=chunksize))
    rows.sort(key=lambda row: (row.n, row.replicate))
    return rows, summarize_scaling(rows)


def write_rows_csv(rows, handle):
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([row.n, row.replicate, row.seed, repr(row.max_dev), repr(row.terminal_dev),
                         repr(row.s_n), repr(row.gamma2)])


def diffusive_baseline(law, n, replicas, rng):
    """max_k |S_k - Z_k| for a walk of law and an independent Gaussian walk, per replica."""
    out = np.empty(replicas)
    for r in range(replicas):
        walk = np.cumsum(law.sample(rng, n))
        gauss = np.cumsum(rng.standard_normal(n))
        out[r] = np.abs(walk - gauss).max()
    return out


# Constants of the O(log n) bound

class TheoryConstants(msgspec.Struct, frozen=True):
    C_expression: str
    C_value: float
    K1_relation: str
    K2_relation: str
    lambda0_expression: str
    theta5_relation: str
    theta5_value: float | None = None


def theta5(bound):
    """Positive root of (1 - B^4 theta^2 / 2)^{-1/2} = 4/3."""
    b4 = float(bound) ** 4
    return optimize.brentq(lambda t: 1.0 / math.sqrt(1.0 - b4 * t * t / 2) - 4.0 / 3.0,
                           0.0, math.sqrt(2.0 / b4) * (1 - 1e-12))


def theory_constants(law=None):
    """C = (2 + ln 4) / ln(3/2) and the symbolic relations for K1, K2, lambda0."""
    return TheoryConstants(
        C_expression="(2 + ln 4) / ln(3/2)",
        C_value=(2 + math.log(4)) / math.log(1.5),
        K1_relation="8*c1",
        K2_relation="18*c2",
        lambda0_expression="min(sqrt(alpha1/(32*c1)), theta2/2, theta5/sqrt(72*c2))",
        theta5_relation="(1 - B^4 theta5^2 / 2)^(-1/2) = 4/3",
        theta5_value=None if law is None else theta5(law.bound),
    )
