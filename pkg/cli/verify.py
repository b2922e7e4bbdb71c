from itertools import combinations_with_replacement
import logging

import click

from cli.common import RunConfig, emit, execute, law_options, output_options, parse_n_list, render, resolve_law, \
    seed_option
from embedding.bridge import path_probability
from embedding.config import EmbeddingConfig
from embedding.embed import embed_path_probability, iid_path_probability
from embedding.errors import CapExceeded, VerificationFailed
from embedding.laws import enumerate_paths, path_count
from embedding.laws_struct import IncrementBag

logger = logging.getLogger(__name__)

TOLERANCE = 1e-9
# composed embedding probabilities are compared up to this n
FULL_PATH_CAP = 6


def bags_of_size(law, n):
    """Every multiset of n atoms of law."""
    for picks in combinations_with_replacement(law.values, n):
        yield IncrementBag.from_values(picks)


def verify_small_command(config):
    law = resolve_law(config)
    n = config.n
    if n > EmbeddingConfig.ORACLE_CAP:
        raise CapExceeded(f"verify-small is limited to n <= {EmbeddingConfig.ORACLE_CAP}, got {n}")
    check_full_paths = n <= FULL_PATH_CAP

    table = []
    worst_bridge = worst_embed = 0.0
    for bag in bags_of_size(law, n):
        expected = 1.0 / path_count(bag)
        paths = enumerate_paths(bag)
        gap = max(abs(path_probability(bag, path) - expected) for path in paths)
        worst_bridge = max(worst_bridge, gap)
        embed_gap = None
        if check_full_paths:
            embed_gap = max(abs(embed_path_probability(law, path) - iid_path_probability(law, path))
                            for path in paths)
            worst_embed = max(worst_embed, embed_gap)
        table.append((str(list(bag.expand())), len(paths), gap, embed_gap))
    logger.info("checked %d bags of size %d", len(table), n)

    ok = worst_bridge <= TOLERANCE and worst_embed <= TOLERANCE
    summary = {"law": law.name, "n": n, "bags": len(table), "tolerance": TOLERANCE,
               "max_path_gap": worst_bridge, "full_paths_checked": check_full_paths,
               "max_embed_gap": worst_embed if check_full_paths else None, "ok": ok}
    emit(config, render(summary, ("bag", "paths", "path_gap", "embed_gap"), table, config.format))
    if not ok:
        raise VerificationFailed(f"path probabilities off by up to {max(worst_bridge, worst_embed):.3g}")


@click.command("verify-small")
@law_options
@click.option("--n", "n_list", required=True, callback=parse_n_list)
@seed_option
@output_options
@click.pass_context
def verify_small(ctx, law, law_file, n_list, seed, out, fmt):
    """Exact check: every path of every bag of size n has probability 1/(number of paths)."""
    config = RunConfig(command="verify-small", law=law, law_file=law_file, n_list=n_list, seed=seed,
                       out=out, format=fmt)
    ctx.exit(execute(config, verify_small_command))
