"""
Command Line
The cvmse click group; subcommands are registered from cli.commands
"""

import click
from dotenv import dotenv_values

from cvmse import __version__
from cvmse.cli.commands import register
from cvmse.core.logging import setup_logging


@click.group()
@click.version_option(__version__, prog_name="cvmse")
@click.option("--config", "config_file", type=click.Path(exists=True, dir_okay=False),
              help="key=value file overriding the built-in defaults")
@click.option("--log-level", default="WARNING", show_default=True,
              type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False))
@click.pass_context
def cli(ctx, config_file, log_level):
    """Mean squared error of k-fold cross-validation: experiments and checks."""
    setup_logging(log_level)
    values = dotenv_values(config_file) if config_file else {}
    ctx.obj = {key.lower(): value for key, value in values.items() if value is not None}


register(cli)
