"""
Experiment Commands
One click command per experiment, sharing the flag set and the config-file precedence
"""

import click
from click.core import ParameterSource
from pydantic import ValidationError

from cvmse.core.config import Defaults, get_settings
from cvmse.core.errors import CVMSEError
from cvmse.experiments import run
from cvmse.models.experiment import EXPERIMENTS, ExperimentConfig

LIST_FIELDS = ("n", "k", "m", "q", "d", "ratio")


def _ints(text):
    try:
        return [int(part) for part in str(text).replace(" ", "").split(",") if part]
    except ValueError as exc:
        raise click.BadParameter(f"expected comma-separated integers, got {text!r}") from exc


def _strings(text):
    return [part for part in str(text).replace(" ", "").split(",") if part]


# --- 1. Shared options ---

OPTIONS = [
    click.option("--n", "n", default="", help="sample sizes, comma-separated"),
    click.option("--k", "k", default="", help="fold counts, comma-separated"),
    click.option("--m", "m", default="", help="fold sizes, comma-separated"),
    click.option("--q", "q", default="", help="field sizes (primes), comma-separated"),
    click.option("--d", "d", default="", help="dimensions, comma-separated"),
    click.option("--p", "p", default="", help="label probabilities such as 1/2, comma-separated"),
    click.option("--R", "ratio", default="", help="square-wave ratios n/m - 2, comma-separated"),
    click.option("--trials", default=Defaults.TRIALS, show_default=True, type=int),
    click.option("--seed", default=Defaults.SEED, show_default=True, type=int),
    click.option("--out", default=f"{Defaults.OUTPUT_DIR}/out", show_default=True,
                 help="artifact path without extension"),
    click.option("--format", "fmt", default="csv", show_default=True,
                 type=click.Choice(["csv", "svg", "both"])),
    click.option("--budget", default=Defaults.ENUM_BUDGET, show_default=True, type=int,
                 help="largest exhaustive enumeration allowed"),
    click.option("--fixture", default=None, type=click.Choice(["majority", "anticorr", "constant"]),
                 help="decompose: rule and distribution under study"),
    click.option("--mode", default=None, type=click.Choice(["exact", "mc"]),
                 help="decompose: force exact enumeration or Monte Carlo"),
]


def experiment_options(fn):
    for option in reversed(OPTIONS):
        fn = option(fn)
    return fn


def build_config(ctx, subcommand, params):
    """Flags given on the command line win over the --config file, which wins over defaults."""
    file_values = (ctx.find_root().obj or {})
    values = {}
    for name, value in params.items():
        key = "format" if name == "fmt" else name
        explicit = ctx.get_parameter_source(name) in (ParameterSource.COMMANDLINE, ParameterSource.ENVIRONMENT)
        source = "r" if key == "ratio" and "ratio" not in file_values else key
        if not explicit and source in file_values:
            value = file_values[source]
        if key in LIST_FIELDS:
            value = _ints(value)
        elif key == "p":
            value = _strings(value)
        values[key] = value
    values["threads"] = get_settings().THREADS
    return ExperimentConfig(subcommand=subcommand, **values)


def _make_command(subcommand):
    @click.command(name=subcommand, help=f"Run the {subcommand} experiment.")
    @experiment_options
    @click.pass_context
    def command(ctx, **params):
        try:
            config = build_config(ctx, subcommand, params)
        except ValidationError as exc:
            raise click.UsageError(str(exc), ctx=ctx) from exc
        try:
            written = run(subcommand, config)
        except (CVMSEError, ValidationError) as exc:
            raise click.ClickException(str(exc)) from exc
        for path in written:
            click.echo(str(path))

    return command


COMMANDS = [_make_command(name) for name in EXPERIMENTS]
