import click
import numpy as np

from cli.common import (RunConfig, emit, eta_option, execute, law_options, output_options, parse_floats,
                        parse_n_list, render, resolve_law, seed_option)
from embedding.bridge import IidBag, exchangeable_bridge
from embedding.coupling import couple_sum_batch, exp_moment, theta_grid_search
from embedding.embed import strong_embed

BOOTSTRAP_ROUNDS = 1000


def couple_sum_command(config):
    law = resolve_law(config)
    rng = np.random.default_rng(config.seed)
    if config.thetas:
        results = theta_grid_search(law, config.n_list, config.thetas, config.replicas, rng)
        table = [(r.n, theta, estimate, theta in r.feasible)
                 for r in results for theta, estimate in zip(r.thetas, r.estimates)]
        summary = {"law": law.name, "samples": config.replicas, "seed": config.seed,
                   "every_n_within_bound": all(r.feasible for r in results)}
        emit(config, render(summary, ("n", "theta", "estimate", "within_bound"), table, config.format))
        return

    n = config.n
    s, z = couple_sum_batch(law, n, config.replicas, rng)
    devs = np.abs(s - z)
    moment = exp_moment(devs, config.lam, BOOTSTRAP_ROUNDS, rng)
    summary = {
        "law": law.name,
        "n": n,
        "replicas": config.replicas,
        "seed": config.seed,
        "mean_dev": float(devs.mean()),
        "max_dev": float(devs.max()),
        "lambda": moment.lam,
        "exp_moment": moment.estimate,
        "exp_moment_ci": (moment.ci_low, moment.ci_high),
    }
    table = [(r, float(s[r]), float(z[r]), float(devs[r])) for r in range(config.replicas)]
    emit(config, render(summary, ("replicate", "s_n", "z_n", "dev"), table, config.format))


def bridge_command(config):
    law = resolve_law(config)
    n = config.n
    rng = np.random.default_rng(config.seed)
    model = IidBag(law)
    samples = [exchangeable_bridge(model, n, config.eta_mode, rng) for _ in range(config.replicas)]
    devs = [sample.max_deviation() for sample in samples]
    summary = {"law": law.name, "n": n, "replicas": config.replicas, "seed": config.seed,
               "eta": config.eta_mode, "median_max_dev": float(np.median(devs))}
    if config.paths:
        columns = ("replicate", "k", "s_k", "w_k", "z_k")
        table = [(r, k, sample.path.values[k - 1] if k else 0, sample.w[k], float(sample.bridge.z[k]))
                 for r, sample in enumerate(samples) for k in range(n + 1)]
    else:
        columns = ("replicate", "gamma2", "eta", "max_dev")
        table = [(r, float(sample.gamma2), sample.eta, dev) for r, (sample, dev) in enumerate(zip(samples, devs))]
    emit(config, render(summary, columns, table, config.format))


def embed_command(config):
    law = resolve_law(config)
    n = config.n
    rng = np.random.default_rng(config.seed)
    outputs = [strong_embed(law, n, rng, eta_mode=config.eta_mode) for _ in range(config.replicas)]
    summary = {"law": law.name, "n": n, "replicas": config.replicas, "seed": config.seed,
               "eta": config.eta_mode, "median_max_dev": float(np.median([o.max_dev for o in outputs]))}
    if config.paths:
        columns = ("replicate", "k", "s_k", "z_k")
        table = [(r, k, out.s.values[k - 1] if k else 0, float(out.z[k - 1]) if k else 0.0)
                 for r, out in enumerate(outputs) for k in range(n + 1)]
    else:
        columns = ("replicate", "max_dev", "terminal_dev", "s_n", "gamma2")
        table = [(r, out.max_dev, out.terminal_dev, float(out.s.values[-1]), out.gamma2)
                 for r, out in enumerate(outputs)]
    emit(config, render(summary, columns, table, config.format))


@click.command("couple-sum")
@law_options
@click.option("--n", "n_list", required=True, callback=parse_n_list, help="n, or a comma list with --thetas.")
@click.option("--replicas", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option("--lam", type=float, default=0.1, show_default=True, help="lambda of the exponential moment.")
@click.option("--thetas", callback=parse_floats, help="Comma list of thetas: grid search E exp(theta |S_n - Z_n|) <= 8.")
@seed_option
@output_options
@click.pass_context
def couple_sum(ctx, law, law_file, n_list, replicas, lam, thetas, seed, out, fmt):
    """Couple S_n with Z_n ~ N(0, n) and report |S_n - Z_n|."""
    config = RunConfig(command="couple-sum", law=law, law_file=law_file, n_list=n_list, replicas=replicas,
                       lam=lam, thetas=thetas, seed=seed, out=out, format=fmt)
    ctx.exit(execute(config, couple_sum_command))


@click.command("bridge")
@law_options
@click.option("--n", "n_list", required=True, callback=parse_n_list)
@click.option("--replicas", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--paths", is_flag=True, help="Emit every (k, S_k, W_k, Z_k) instead of one row per replica.")
@eta_option
@seed_option
@output_options
@click.pass_context
def bridge(ctx, law, law_file, n_list, replicas, paths, eta_mode, seed, out, fmt):
    """Couple a uniform ordering of i.i.d. increments with a discrete Brownian bridge."""
    config = RunConfig(command="bridge", law=law, law_file=law_file, n_list=n_list, replicas=replicas,
                       paths=paths, eta_mode=eta_mode, seed=seed, out=out, format=fmt)
    ctx.exit(execute(config, bridge_command))


@click.command("embed")
@law_options
@click.option("--n", "n_list", required=True, callback=parse_n_list)
@click.option("--replicas", type=click.IntRange(min=1), default=1, show_default=True)
@click.option("--paths", is_flag=True, help="Emit every (k, S_k, Z_k) instead of one row per replica.")
@eta_option
@seed_option
@output_options
@click.pass_context
def embed(ctx, law, law_file, n_list, replicas, paths, eta_mode, seed, out, fmt):
    """Strong embedding of the i.i.d. walk of a law into a Gaussian walk."""
    config = RunConfig(command="embed", law=law, law_file=law_file, n_list=n_list, replicas=replicas,
                       paths=paths, eta_mode=eta_mode, seed=seed, out=out, format=fmt)
    ctx.exit(execute(config, embed_command))
