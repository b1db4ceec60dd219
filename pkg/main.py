"""
cvmse entry point
Run `python main.py --help` for the experiment and verify commands
"""

from cvmse.cli.main import cli

if __name__ == "__main__":
    cli()
