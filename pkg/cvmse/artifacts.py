"""
Artifacts
CSV and SVG emission for experiment results
"""

import csv
import logging
from fractions import Fraction
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from cvmse import __version__  # noqa: E402
from cvmse.models.results import EstimateWithError, ExactValue  # noqa: E402

logger = logging.getLogger(__name__)

SVG_SALT = "cvmse"


def _cell(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


def _number(value):
    if isinstance(value, str):
        return float(Fraction(value))
    return float(value)


def flatten(row):
    """Expand exact values into p/q plus _float columns and estimates into value plus _std_error."""
    out = {}
    for name, value in row.items():
        if isinstance(value, ExactValue):
            out[name] = value.as_text()
            out[f"{name}_float"] = float(value)
        elif isinstance(value, EstimateWithError):
            out[name] = value.value
            out[f"{name}_std_error"] = value.std_error
        elif isinstance(value, Fraction):
            out[name] = value
            out[f"{name}_float"] = float(value)
        else:
            out[name] = value
    return out


def write_csv(path, rows, seed, experiment):
    """Comment line, header row, then one record per row (RFC 4180 line endings)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [flatten(row) for row in rows]
    header = []
    for row in rows:
        header += [name for name in row if name not in header]
    with path.open("w", newline="", encoding="utf-8") as fh:
        fh.write(f"# cvmse {__version__} seed={seed} experiment={experiment}\r\n")
        writer = csv.DictWriter(fh, fieldnames=header, lineterminator="\r\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({name: _cell(row.get(name)) for name in header})
    logger.info("wrote %d rows to %s", len(rows), path)
    return path


def write_svg(path, rows, x, y, group=None, title="", logy=False):
    """Static line chart of column y against column x, one line per group value."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = [flatten(row) for row in rows]
    series = {}
    for row in rows:
        series.setdefault(row.get(group) if group else None, []).append((_number(row[x]), _number(row[y])))

    with matplotlib.rc_context({"svg.hashsalt": SVG_SALT}):
        fig, ax = plt.subplots(figsize=(6, 4))
        for key, points in series.items():
            points.sort()
            xs, ys = zip(*points)
            ax.plot(xs, ys, marker="o", label=None if key is None else f"{group}={key}")
        ax.set_xlabel(x)
        ax.set_ylabel(y)
        if logy:
            ax.set_yscale("log")
        if title:
            ax.set_title(title)
        if group:
            ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    logger.info("wrote chart to %s", path)
    return path
