"""
Verify Command
Runs the invariant suites and reports pass/fail as JSON
"""

from pathlib import Path

import click

from cvmse.core.errors import UsageError
from cvmse.verification import SUITES, dumps, verify


@click.command(name="verify")
@click.argument("suite", default="all")
@click.option("--out", default=None, help="also write the JSON report to this file")
def verify_command(suite, out):
    """Check module invariants at desk scale: all, or one of core, decomposition, majority, linfield, squarewave."""
    try:
        report = verify(suite)
    except UsageError as exc:
        raise click.UsageError(f"{exc} ({', '.join(SUITES)})") from exc
    payload = dumps(report)
    if out:
        path = Path(out)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_bytes(payload)
    click.echo(payload.decode())
    if not report["passed"]:
        raise click.exceptions.Exit(1)
