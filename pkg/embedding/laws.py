"""
Exact algebra of finite-support laws: validation, sums with and without replacement,
feasible paths of an increment multiset.
"""
from fractions import Fraction
from functools import lru_cache
from math import comb, lgamma, log
from pathlib import Path as FilePath
import logging

import msgspec
import numpy as np

from embedding.config import EmbeddingConfig
from embedding.errors import CapExceeded, InvalidInput
from embedding.laws_struct import (AtomicLaw, HypothesisCheck, IncrementBag, LatticeLaw, Path,
                                   ValidationReport, as_fraction)
from embedding.type_count import TypeCountTable, binomial_kernels, common_denominator, convolve

logger = logging.getLogger(__name__)


# Law files

class LawFileAtom(msgspec.Struct, forbid_unknown_fields=True):
    value: str | int | float
    prob: str | float


class LawFile(msgspec.Struct, forbid_unknown_fields=True):
    atoms: list[LawFileAtom]
    name: str = ""


def law_from_mapping(document, name=""):
    """Build an AtomicLaw from an already decoded law document (dict)."""
    try:
        parsed = msgspec.convert(document, LawFile)
    except msgspec.ValidationError as err:
        raise InvalidInput(f"malformed law document: {err}")
    return _law_from_parsed(parsed, name)


def parse_law_file(path):
    """
    Read a law file.

    JSON or TOML (by suffix) with the layout:
        name = "quad"                       # optional
        atoms = [{value = "-1/2", prob = 0.4}, ...]
    value is an integer, a decimal or a "p/q" string and is read exactly; prob is a
    decimal or a "p/q" string.
    """
    path = FilePath(path)
    try:
        raw = path.read_bytes()
    except OSError as err:
        raise InvalidInput(f"cannot read law file {path}: {err}")
    decoder = msgspec.toml if path.suffix.lower() == ".toml" else msgspec.json
    try:
        parsed = decoder.decode(raw, type=LawFile)
    except (msgspec.ValidationError, msgspec.DecodeError) as err:
        raise InvalidInput(f"malformed law file {path}: {err}")
    return _law_from_parsed(parsed, path.stem)


def _law_from_parsed(parsed, fallback_name):
    pairs = [(as_fraction(atom.value), float(as_fraction(atom.prob))) for atom in parsed.atoms]
    return AtomicLaw.from_pairs(pairs, name=parsed.name or fallback_name)


# Validation

def validate_law(law):
    """Check the hypotheses of the strong embedding for law."""
    tol = EmbeddingConfig.EXACT_TOL
    m1, m2, m3, m4 = law.moments
    variance = m2 - m1 * m1
    checks = (
        HypothesisCheck(name="mean_zero", passed=abs(m1) <= tol, measured=m1),
        HypothesisCheck(name="unit_variance", passed=abs(variance - 1.0) <= tol, measured=variance),
        HypothesisCheck(name="zero_third_moment", passed=abs(m3) <= tol, measured=m3),
        HypothesisCheck(name="zero_excluded", passed=law.min_abs > 0, measured=float(law.min_abs)),
    )
    report = ValidationReport(law_name=law.name, checks=checks, moments=(m1, m2, m3, m4),
                              bound=float(law.bound), min_abs=float(law.min_abs))
    if not report.ok:
        logger.info("law %s fails %s", law.name or "<unnamed>", ", ".join(report.failed()))
    return report


# Sums

def _check_support(size):
    if size > EmbeddingConfig.SUPPORT_CAP:
        raise CapExceeded(f"law support of {size} entries exceeds the cap {EmbeddingConfig.SUPPORT_CAP}")


def _trimmed(offset, denominator, probs):
    live = np.nonzero(probs > 0)[0]
    probs = probs[live[0]:live[-1] + 1]
    return LatticeLaw(offset=int(offset + live[0]), denominator=denominator, probs=probs / probs.sum())


def iid_sum_law(law, n):
    """Exact pmf of S_n, the sum of n independent copies of law."""
    if n < 0:
        raise InvalidInput(f"n must be nonnegative, got {n}")
    if n == 0:
        return LatticeLaw.point_mass(0)
    den = common_denominator(law.values)
    ints = [int(v * den) for v in law.values]
    _check_support(n * (ints[-1] - ints[0]) + 1)
    base = np.zeros(ints[-1] - ints[0] + 1)
    base[np.array(ints) - ints[0]] = law.probs

    # square-and-multiply convolution power
    result, power, k = np.ones(1), base, n
    while k:
        if k & 1:
            result = convolve(result, power)
        k >>= 1
        if k:
            power = convolve(power, power)
    return _trimmed(n * ints[0], den, result)


def _build_table(key, k):
    bag = IncrementBag(entries=key)
    return TypeCountTable(bag.values, binomial_kernels(bag.counts, k), k)


_small_tables = lru_cache(maxsize=4096)(_build_table)
# large tables are big; keep only the latest few (the midpoint coupling and the split reuse them)
_large_tables = lru_cache(maxsize=4)(_build_table)


def draw_table(bag, k):
    """Type-count table of k draws without replacement from bag."""
    if bag.n <= EmbeddingConfig.CACHE_MAX_N:
        return _small_tables(bag.key, k)
    return _large_tables(bag.key, k)


def wr_sum_law(bag, k):
    """Exact law of the sum of k items drawn uniformly without replacement from bag."""
    if not 0 <= k <= bag.n:
        raise InvalidInput(f"k={k} outside 0..{bag.n}")
    if k == 0:
        return LatticeLaw.point_mass(0)
    if k == bag.n:
        return LatticeLaw.point_mass(bag.total)
    table = draw_table(bag, k)
    _check_support(len(table.sum_probs))
    return _trimmed(table.sum_offset, table.denominator, table.sum_probs)


# Paths

def path_count(bag):
    """|A_eps^n| = n! / (m_1! ... m_l!), the number of distinct feasible paths."""
    log2_count = (lgamma(bag.n + 1) - sum(lgamma(m + 1) for m in bag.counts)) / log(2)
    if log2_count > EmbeddingConfig.PATH_COUNT_MAX_BITS:
        raise CapExceeded(f"path count needs about {log2_count:.0f} bits, over the "
                          f"{EmbeddingConfig.PATH_COUNT_MAX_BITS}-bit limit")
    count, remaining = 1, bag.n
    for m in bag.counts:
        count *= comb(remaining, m)
        remaining -= m
    return count


def enumerate_paths(bag, cap=None):
    """Every distinct path whose increments form bag, in lexicographic order of increments."""
    cap = EmbeddingConfig.ORACLE_CAP if cap is None else cap
    if bag.n > cap:
        raise CapExceeded(f"path enumeration is limited to n <= {cap}, got {bag.n}")
    values = bag.values
    left = list(bag.counts)
    paths = []

    def extend(prefix, level):
        if len(prefix) == bag.n:
            paths.append(Path(values=tuple(prefix)))
            return
        for j, v in enumerate(values):
            if left[j]:
                left[j] -= 1
                prefix.append(level + v)
                extend(prefix, level + v)
                prefix.pop()
                left[j] += 1

    extend([], Fraction(0))
    return paths


def increments_of(path):
    return path.increments()


def is_feasible(bag, path):
    return path.n == bag.n and path.bag() == bag


def diff_set(law):
    """D+ : nonnegative pairwise differences of the atoms, ascending, always containing 0."""
    values = law.values
    return sorted({abs(a - b) for a in values for b in values})
