import csv
import json

import pytest
from click.testing import CliRunner

from cvmse import __version__
from cvmse.cli.main import cli
from cvmse.core.config import get_settings


@pytest.fixture
def runner():
    return CliRunner()


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        comment = fh.readline()
        return comment, list(csv.DictReader(fh))


class TestExperiments:
    def test_minimizer(self, runner, tmp_path):
        out = tmp_path / "minimizer"
        result = runner.invoke(cli, ["majority-minimizer", "--n", "300", "--out", str(out)])
        assert result.exit_code == 0, result.output
        comment, rows = read_rows(out.with_suffix(".csv"))
        assert comment.startswith(f"# cvmse {__version__} seed=")
        assert "experiment=majority-minimizer" in comment
        best = [row for row in rows if row["argmin"] == "true"]
        assert [row["m"] for row in best] == ["100"]

    def test_decompose_fixture(self, runner, tmp_path):
        out = tmp_path / "anticorr"
        result = runner.invoke(cli, [
            "decompose", "--fixture", "anticorr", "--n", "2", "--k", "2", "--out", str(out),
        ])
        assert result.exit_code == 0, result.output
        _, rows = read_rows(out.with_suffix(".csv"))
        assert rows[0]["mse"] == "0/1"
        assert rows[0]["sls"] == "1/8"
        assert rows[0]["sls_float"] == "0.125"
        assert rows[0]["mode"] == "exact"
        _, bounds = read_rows(tmp_path / "anticorr_bounds.csv")
        assert len(bounds) == 9

    def test_reruns_are_byte_identical(self, runner, tmp_path, monkeypatch):
        args = ["decompose", "--n", "4", "--k", "2", "--mode", "mc", "--trials", "300", "--seed", "8"]
        first, second = tmp_path / "a", tmp_path / "b"
        assert runner.invoke(cli, args + ["--out", str(first)]).exit_code == 0
        monkeypatch.setenv("CVMSE_THREADS", "3")
        get_settings.cache_clear()
        assert runner.invoke(cli, args + ["--out", str(second)]).exit_code == 0
        assert first.with_suffix(".csv").read_bytes() == second.with_suffix(".csv").read_bytes()

    def test_svg_is_reproducible(self, runner, tmp_path):
        paths = []
        for name in ("a", "b"):
            out = tmp_path / name
            result = runner.invoke(cli, ["majority-table", "--n", "12", "--format", "both", "--out", str(out)])
            assert result.exit_code == 0, result.output
            assert out.with_suffix(".csv").exists()
            paths.append(out.with_suffix(".svg"))
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_config_file_precedence(self, runner, tmp_path):
        config = tmp_path / "run.env"
        config.write_text("N=300\nSEED=5\n")
        out = tmp_path / "table"
        result = runner.invoke(cli, ["--config", str(config), "majority-table", "--n", "12", "--out", str(out)])
        assert result.exit_code == 0, result.output
        comment, rows = read_rows(out.with_suffix(".csv"))
        assert "seed=5" in comment
        assert {row["n"] for row in rows} == {"12"}

    def test_missing_required_flag(self, runner, tmp_path):
        result = runner.invoke(cli, ["majority-table", "--out", str(tmp_path / "x")])
        assert result.exit_code == 2

    def test_non_prime_field(self, runner, tmp_path):
        result = runner.invoke(cli, [
            "linear-mse", "--n", "4", "--q", "4", "--d", "2", "--trials", "10", "--out", str(tmp_path / "x"),
        ])
        assert result.exit_code == 1


class TestVerify:
    def test_unknown_suite(self, runner):
        assert runner.invoke(cli, ["verify", "nonsense"]).exit_code == 2

    def test_squarewave_suite(self, runner, tmp_path):
        out = tmp_path / "report.json"
        result = runner.invoke(cli, ["verify", "squarewave", "--out", str(out)])
        assert result.exit_code == 0, result.output
        report = json.loads(out.read_bytes())
        assert report["passed"] is True
        assert set(report["suites"]) == {"squarewave"}

    @pytest.mark.parametrize("suite,expected", [
        ("core", {"support_order_independent", "mc_matches_exact", "constant_functional_zero_error"}),
        ("majority", {"brute_force_equals_exact", "sublinear_within_5pct", "mc_matches_closed_form"}),
        ("linfield", {"rank_frequencies", "coset_uniform", "bound_needs_divisor"}),
        ("squarewave", {"factorized_equals_brute_force", "cov_positive", "scaled_cov_near_c0"}),
    ])
    def test_suite_checks_pass(self, runner, tmp_path, suite, expected):
        out = tmp_path / "report.json"
        result = runner.invoke(cli, ["verify", suite, "--out", str(out)])
        assert result.exit_code == 0, result.output
        checks = {c["check"]: c["passed"] for c in json.loads(out.read_bytes())["suites"][suite]}
        assert expected <= set(checks)
        assert all(checks.values())
