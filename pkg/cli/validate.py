import click

from cli.common import RunConfig, emit, execute, law_options, output_options, render, resolve_law, seed_option
from embedding.errors import ValidationFailed
from embedding.laws import validate_law
from embedding.stats import theory_constants


def validate_law_command(config):
    law = resolve_law(config)
    report = validate_law(law)
    summary = {
        "law": report.law_name,
        "ok": report.ok,
        "moments": report.moments,
        "bound": report.bound,
        "min_abs": report.min_abs,
    }
    table = [(check.name, check.passed, check.measured) for check in report.checks]
    emit(config, render(summary, ("check", "passed", "measured"), table, config.format))
    if not report.ok:
        raise ValidationFailed(f"law {report.law_name} fails: {', '.join(report.failed())}")


def constants_command(config):
    law = resolve_law(config) if (config.law or config.law_file) else None
    constants = theory_constants(law)
    summary = {
        "C": constants.C_expression,
        "C_value": constants.C_value,
        "K1": constants.K1_relation,
        "K2": constants.K2_relation,
        "lambda0": constants.lambda0_expression,
        "theta5": constants.theta5_relation,
    }
    if constants.theta5_value is not None:
        summary["theta5_value"] = constants.theta5_value
    emit(config, render(summary, fmt=config.format))


@click.command("validate")
@law_options
@seed_option
@output_options
@click.pass_context
def validate(ctx, law, law_file, seed, out, fmt):
    """Check a law against the embedding hypotheses (exit 2 when one fails)."""
    config = RunConfig(command="validate", law=law, law_file=law_file, seed=seed, out=out, format=fmt)
    ctx.exit(execute(config, validate_law_command))


@click.command("constants")
@law_options
@seed_option
@output_options
@click.pass_context
def constants(ctx, law, law_file, seed, out, fmt):
    """Print the constant C of the log n bound and the relations for K1, K2, lambda0."""
    config = RunConfig(command="constants", law=law, law_file=law_file, seed=seed, out=out, format=fmt)
    ctx.exit(execute(config, constants_command))
