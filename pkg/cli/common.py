"""
Pieces shared by the command modules: the run record, law lookup, option
decorators, output rendering and atomic file writes.
"""
from fractions import Fraction
from pathlib import Path
import csv
import io
import logging
import os
import tempfile

import click
import msgspec
from sqlalchemy.exc import SQLAlchemyError

from cli.config import ApplicationConfig
from data.initial_data import builtin_laws
from embedding.errors import EmbeddingError, InvalidInput
from embedding.laws import law_from_mapping, parse_law_file
from embedding.laws_struct import enc_hook

logger = logging.getLogger(__name__)

# library error code -> process exit status; anything unlisted exits 1
exit_code_map = {
    "validation_failed": 2,
    "infeasible": 3,
    "degenerate": 3,
    "invalid_input": 1,
    "cap_exceeded": 1,
    "outside_support": 1,
    "verification_failed": 1,
    "db_error": 1,
}


class RunConfig(msgspec.Struct, frozen=True, kw_only=True):
    """Everything a command run depends on; identical configs give identical outputs."""
    command: str
    law: str | None = None
    law_file: str | None = None
    n_list: tuple = ()
    replicas: int = 1
    seed: int = ApplicationConfig.SEED
    eta_mode: str = "gamma"  # "gamma" or a positive number
    out: str | None = None
    workers: int = 1
    format: str = "text"  # "text" or "csv"
    db: str | None = None
    thetas: tuple = ()
    lam: float = 0.1
    paths: bool = False
    run_id: int | None = None
    delete_id: int | None = None

    @property
    def n(self):
        if len(self.n_list) != 1:
            raise InvalidInput(f"{self.command} takes a single --n, got {list(self.n_list)}")
        return self.n_list[0]


def builtin_law_names():
    return [record["name"] for record in builtin_laws]


def resolve_law(config):
    if config.law_file:
        return parse_law_file(config.law_file)
    if not config.law:
        raise InvalidInput("give --law NAME or --law-file PATH")
    for record in builtin_laws:
        if record["name"] == config.law:
            return law_from_mapping(record, record["name"])
    raise InvalidInput(f"unknown law {config.law!r}; built-in laws are {', '.join(builtin_law_names())}")


def parse_n_list(ctx, param, value):
    if value is None:
        return ()
    try:
        n_list = tuple(int(part) for part in value.split(",") if part.strip())
    except ValueError:
        raise click.BadParameter(f"expected comma separated integers, got {value!r}")
    if not n_list or any(n < 1 for n in n_list):
        raise click.BadParameter("every n must be a positive integer")
    return n_list


def parse_floats(ctx, param, value):
    if value is None:
        return ()
    try:
        return tuple(float(part) for part in value.split(",") if part.strip())
    except ValueError:
        raise click.BadParameter(f"expected comma separated numbers, got {value!r}")


# Shared options

def law_options(func):
    func = click.option("--law-file", type=click.Path(dir_okay=False), help="JSON or TOML law file.")(func)
    func = click.option("--law", help=f"Built-in law: {', '.join(builtin_law_names())}.")(func)
    return func


def _inherit_seed(ctx, param, value):
    if value is not None:
        return value
    group_seed = ctx.find_root().params.get("seed")
    return ApplicationConfig.SEED if group_seed is None else group_seed


def seed_option(func):
    return click.option("--seed", type=int, default=None, callback=_inherit_seed,
                        help="Master seed for this command; defaults to the global --seed.")(func)


def output_options(func):
    func = click.option("--format", "fmt", type=click.Choice(["text", "csv"]), default="text",
                        show_default=True)(func)
    func = click.option("--out", type=click.Path(dir_okay=False), help="Write here instead of stdout.")(func)
    return func


def eta_option(func):
    return click.option("--eta", "eta_mode", default="gamma", show_default=True,
                        help="Bridge coupling scale: a positive number or 'gamma'.")(func)


# Output

def _text_value(value):
    if isinstance(value, (str, Fraction)):
        return str(value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, float)):
        return repr(value)
    return msgspec.json.encode(value, enc_hook=enc_hook).decode()


def render(summary, columns=None, table=None, fmt="text"):
    """
    Render a key/value summary and an optional table.

    text: "key: value" lines, then the table tab separated. csv: the table, or the
    summary as key,value rows when there is no table.
    """
    buffer = io.StringIO()
    if fmt == "csv":
        writer = csv.writer(buffer, lineterminator="\n")
        if table is not None:
            writer.writerow(columns)
            writer.writerows([_text_value(v) for v in row] for row in table)
        else:
            writer.writerow(("key", "value"))
            writer.writerows((key, _text_value(value)) for key, value in summary.items())
        return buffer.getvalue()
    for key, value in summary.items():
        buffer.write(f"{key}: {_text_value(value)}\n")
    if table is not None:
        buffer.write("\n" + "\t".join(columns) + "\n")
        for row in table:
            buffer.write("\t".join(_text_value(v) for v in row) + "\n")
    return buffer.getvalue()


def atomic_write(path, text):
    """Write text to path through a temporary file in the same directory and os.replace."""
    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    handle = tempfile.NamedTemporaryFile("w", dir=directory, prefix=f".{target.name}.", suffix=".tmp",
                                         delete=False, newline="", encoding="utf-8")
    try:
        with handle:
            handle.write(text)
        os.replace(handle.name, target)
    except OSError:
        Path(handle.name).unlink(missing_ok=True)
        raise


def emit(config, text):
    if config.out:
        try:
            atomic_write(config.out, text)
        except OSError as err:
            raise InvalidInput(f"cannot write {config.out}: {err}")
        logger.info("wrote %s", config.out)
    else:
        click.echo(text, nl=False)


def execute(config, handler):
    """Run handler(config); report library errors on stderr and return the exit status."""
    logger.debug("run config: %s", msgspec.json.encode(config).decode())
    try:
        handler(config)
    except EmbeddingError as err:
        click.echo(f"error [{err.code}]: {err.message}", err=True)
        return exit_code_map.get(err.code, 1)
    except SQLAlchemyError as err:
        logger.error("results archive failed: %s", err)
        click.echo(f"error [db_error]: {err}", err=True)
        return exit_code_map["db_error"]
    return 0
