import io
import logging

import click
import msgspec
from msgspec.structs import astuple

from cli.common import (RunConfig, emit, eta_option, execute, law_options, output_options, parse_n_list, render,
                        resolve_law, seed_option)
from cli.config import ApplicationConfig
from cli.extensions import results_store
from embedding.errors import EmbeddingError, InvalidInput
from embedding.stats import CSV_COLUMNS, scaling_study, write_rows_csv

logger = logging.getLogger(__name__)


def _summary_dict(config, law, summary):
    return {
        "law": law.name,
        "seed": config.seed,
        "replicas": config.replicas,
        "eta": config.eta_mode,
        "n": summary.n_list,
        "median_max_dev": summary.medians,
        "slope_vs_ln_n": summary.slope,
        "intercept": summary.intercept,
        "r2": summary.r2,
        "ratio_largest_to_smallest": summary.ratio,
    }


def _archive(config, law, rows, summary):
    results_store.init_app(config.db)
    if not results_store.enabled:
        return None
    success, result = results_store.manager.add_run({
        "law_name": law.name,
        "seed": config.seed,
        "n_list": list(config.n_list),
        "replicas": config.replicas,
        "eta_mode": config.eta_mode,
        "summary": msgspec.json.encode(summary).decode(),
    }, rows)
    if not success:
        raise EmbeddingError(result["message"], code=result["code"])
    logger.info("archived run %s", result)
    return result


def scaling_command(config):
    law = resolve_law(config)
    rows, summary = scaling_study(law, config.n_list, config.replicas, config.seed,
                                  workers=config.workers, eta_mode=config.eta_mode)
    run_id = _archive(config, law, rows, summary)
    summary_text = render(_summary_dict(config, law, summary))

    if config.format == "csv":
        buffer = io.StringIO()
        write_rows_csv(rows, buffer)
        emit(config, buffer.getvalue())
        # the CSV owns stdout unless it went to a file
        click.echo(summary_text, nl=False, err=not config.out)
    else:
        table = [astuple(row) for row in rows]
        emit(config, render(_summary_dict(config, law, summary), CSV_COLUMNS, table))
    if run_id is not None:
        click.echo(f"archived as run {run_id}", err=True)


def _require(result):
    success, value = result
    if not success:
        raise EmbeddingError(value["message"], code=value["code"])
    return value


def history_command(config):
    results_store.init_app(config.db)
    if not results_store.enabled:
        raise InvalidInput("no results archive: pass --db URI or set STRONGEMBED_DB_URI")
    manager = results_store.manager

    if config.delete_id is not None:
        emit(config, _require(manager.delete_run(config.delete_id)) + "\n")
        return
    if config.run_id is not None:
        runs = _require(manager.get_runs(id=config.run_id))
        if not runs:
            raise EmbeddingError(f"No scaling run with ID {config.run_id}", code="not_found")
        rows = _require(manager.get_run_rows(config.run_id))
        run = runs[0]
        summary = {key: run[key] for key in ("id", "law_name", "seed", "n_list", "replicas", "eta_mode")}
        summary["summary"] = msgspec.json.decode(run["summary"]) if run["summary"] else None
        table = [tuple(row[column] for column in CSV_COLUMNS) for row in rows]
        emit(config, render(summary, CSV_COLUMNS, table, config.format))
        return
    runs = _require(manager.get_runs())
    columns = ("id", "law_name", "seed", "n_list", "replicas", "eta_mode", "created_at")
    table = [(run["id"], run["law_name"], run["seed"], run["n_list"], run["replicas"], run["eta_mode"],
              run["created_at"].isoformat(timespec="seconds")) for run in runs]
    emit(config, render({"runs": len(runs)}, columns, table, config.format))


@click.command("scaling")
@law_options
@click.option("--n", "n_list", required=True, callback=parse_n_list, help="Comma list, e.g. 64,256,1024,4096.")
@click.option("--replicas", type=click.IntRange(min=1), default=500, show_default=True)
@click.option("--workers", type=click.IntRange(min=1), default=ApplicationConfig.WORKERS, show_default=True,
              help="Worker processes; the rows do not depend on it.")
@click.option("--db", default=ApplicationConfig.DB_URI, help="SQLAlchemy URI of the results archive.")
@eta_option
@seed_option
@click.option("--out", type=click.Path(dir_okay=False), help="Write here instead of stdout.")
@click.option("--format", "fmt", type=click.Choice(["csv", "text"]), default="csv", show_default=True)
@click.pass_context
def scaling(ctx, law, law_file, n_list, replicas, workers, db, eta_mode, seed, out, fmt):
    """Embedding deviations over a list of n, one CSV row per replica, with a log n fit."""
    config = RunConfig(command="scaling", law=law, law_file=law_file, n_list=n_list, replicas=replicas,
                       workers=workers, db=db, eta_mode=eta_mode, seed=seed, out=out, format=fmt)
    ctx.exit(execute(config, scaling_command))


@click.command("history")
@click.option("--db", default=ApplicationConfig.DB_URI, help="SQLAlchemy URI of the results archive.")
@click.option("--run", "run_id", type=int, help="Show one archived run with its rows.")
@click.option("--delete", "delete_id", type=int, help="Delete an archived run.")
@seed_option
@output_options
@click.pass_context
def history(ctx, db, run_id, delete_id, seed, out, fmt):
    """List, show or delete archived scaling runs."""
    config = RunConfig(command="history", db=db, run_id=run_id, delete_id=delete_id, seed=seed, out=out,
                       format=fmt)
    ctx.exit(execute(config, history_command))
