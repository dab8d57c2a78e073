"""Tests for the command-line interface and its reports."""

import argparse
import json

import pytest

from marketclear.cli import COMMAND_HANDLERS, RunConfig, build_parser, main, run
from marketclear.const import EXIT_OK, EXIT_USAGE, EXIT_VERDICT_FAILED
from marketclear.exceptions import InvariantViolation
from marketclear.reports import validate_report


def _run(capsys, *argv):
    status = main(list(argv))
    return status, capsys.readouterr().out


GOLDEN_CASES = [
    ("solve_two_by_two.json", ["solve", "two_by_two.json"]),
    ("prices_second_price.json", ["prices", "second_price.json"]),
    ("vcg_second_price.json", ["vcg", "second_price.json"]),
    ("check_second_price.json", ["check", "second_price.json"]),
    ("check_tied.json", ["check", "tied.json"]),
    (
        "audit_second_price.json",
        [
            "audit",
            "second_price.json",
            "--bidder",
            "high",
            "--strategy",
            "structured",
            "--trials",
            "5",
            "--seed",
            "0",
        ],
    ),
    (
        "verify_infeasible.json",
        ["verify", "second_price.json", "--prices", "infeasible_prices.json"],
    ),
    (
        "meet_second_price.json",
        [
            "meet",
            "second_price.json",
            "--prices",
            "clearing_prices.json",
            "--other",
            "first_prices.json",
        ],
    ),
]


def _resolve(argv, fixtures_dir):
    return [str(fixtures_dir / arg) if arg.endswith(".json") else arg for arg in argv]


class TestGoldenReports:
    """Tests that freeze every report against golden files."""

    @pytest.mark.parametrize(("golden", "argv"), GOLDEN_CASES)
    def test_golden(self, capsys, fixtures_dir, golden_dir, golden, argv):
        """Test the report content against its golden file."""
        _, output = _run(capsys, *_resolve(argv, fixtures_dir))
        expected = json.loads((golden_dir / golden).read_text())
        assert json.loads(output) == expected

    @pytest.mark.parametrize(("golden", "argv"), GOLDEN_CASES)
    def test_byte_identical(self, capsys, fixtures_dir, golden, argv):
        """Test that repeated runs produce identical bytes."""
        resolved = _resolve(argv, fixtures_dir)
        first = _run(capsys, *resolved)
        second = _run(capsys, *resolved)
        assert first == second
        assert first[1].endswith("}\n")


class TestExitStatus:
    """Tests for exit statuses."""

    def test_success(self, capsys, fixtures_dir):
        """Test a passing command."""
        status, output = _run(capsys, "solve", str(fixtures_dir / "two_by_two.json"))
        assert status == EXIT_OK
        assert json.loads(output)["value"] == 5

    def test_verdict_failure(self, capsys, fixtures_dir):
        """Test that failing verdicts still write their report."""
        status, output = _run(
            capsys,
            "verify",
            str(fixtures_dir / "second_price.json"),
            "--prices",
            str(fixtures_dir / "infeasible_prices.json"),
        )
        assert status == EXIT_VERDICT_FAILED
        assert json.loads(output)["failures"][0]["buyer"] == "low"

    def test_verify_passes(self, capsys, fixtures_dir):
        """Test that second-price prices clear the market."""
        status, output = _run(
            capsys,
            "verify",
            str(fixtures_dir / "second_price.json"),
            "--prices",
            str(fixtures_dir / "clearing_prices.json"),
        )
        assert status == EXIT_OK
        assert json.loads(output)["market_clearing"]

    def test_oracle_limit(self, capsys, fixtures_dir):
        """Test that oracle commands refuse large markets."""
        path = str(fixtures_dir / "nine_items.json")
        assert _run(capsys, "check", path) == (EXIT_USAGE, "")
        assert _run(capsys, "solve", path, "--oracle") == (EXIT_USAGE, "")
        status, _ = _run(capsys, "check", path, "--oracle-limit", "9")
        assert status == EXIT_OK

    def test_missing_file(self, capsys, tmp_path):
        """Test that unreadable input is a usage error."""
        assert _run(capsys, "solve", str(tmp_path / "absent.json"))[0] == EXIT_USAGE

    def test_parse_error(self, capsys, tmp_path):
        """Test that malformed input is a usage error."""
        path = tmp_path / "bad.json"
        path.write_text('{"items": ["a"], "buyers": ["x"], "valuations": [[-1]]}')
        assert _run(capsys, "solve", str(path))[0] == EXIT_USAGE

    @pytest.mark.parametrize("cell", ["NaN", "sNaN", "Infinity"])
    def test_special_csv_values(self, capsys, tmp_path, cell):
        """Test that special decimal values in CSV are usage errors."""
        path = tmp_path / "market.csv"
        path.write_text(f",x\na,{cell}\n")
        assert _run(capsys, "solve", str(path)) == (EXIT_USAGE, "")

    def test_overflowing_json_value(self, capsys, tmp_path):
        """Test that an overflowing JSON number is a usage error."""
        path = tmp_path / "market.json"
        path.write_text('{"items": ["a"], "buyers": ["x"], "valuations": [[1e99999999]]}')
        assert _run(capsys, "solve", str(path)) == (EXIT_USAGE, "")

    def test_unknown_bidder(self, capsys, fixtures_dir):
        """Test that the audited bidder must exist."""
        path = str(fixtures_dir / "second_price.json")
        assert _run(capsys, "audit", path, "--bidder", "nobody")[0] == EXIT_USAGE

    def test_missing_subcommand(self):
        """Test that argparse rejects a missing command."""
        with pytest.raises(SystemExit) as err:
            main([])
        assert err.value.code == EXIT_USAGE

    def test_invariant_failure(self, capsys, fixtures_dir, monkeypatch):
        """Test that a broken invariant exits with a failed verdict."""

        def broken(*_, **__):
            raise InvariantViolation("broken")

        monkeypatch.setattr("marketclear.cli.solve_assignment", broken)
        assert _run(capsys, "solve", str(fixtures_dir / "two_by_two.json")) == (
            EXIT_VERDICT_FAILED,
            "",
        )


class TestCommands:
    """Tests for individual commands."""

    def test_solve_with_oracle(self, capsys, fixtures_dir):
        """Test the brute-force cross-check block."""
        _, output = _run(capsys, "solve", str(fixtures_dir / "two_by_two.json"), "--oracle")
        oracle = json.loads(output)["oracle"]
        assert oracle["agrees"]
        assert oracle["value"] == 5

    def test_solve_csv(self, capsys, fixtures_dir):
        """Test that CSV input is detected from the suffix."""
        _, output = _run(capsys, "solve", str(fixtures_dir / "second_price.csv"))
        report = json.loads(output)
        assert report["value"] == 10
        assert [item["dummy"] for item in report["items"]] == [False, True]

    def test_prices_without_reduction(self, capsys, fixtures_dir):
        """Test that normalized solver prices carry a violation."""
        _, output = _run(
            capsys, "prices", str(fixtures_dir / "second_price.json"), "--no-buyer-optimal"
        )
        report = json.loads(output)
        assert [item["price"] for item in report["items"]] == [10, 0]
        assert report["certificate"]["violation"] == {
            "buyer": "high",
            "reach": ["item"],
            "min_price": 10,
        }

    def test_check_with_certificate(self, capsys, fixtures_dir):
        """Test that the certificate can be attached to the check."""
        _, output = _run(capsys, "check", str(fixtures_dir / "tied.json"), "--certificate")
        assert json.loads(output)["certificate"]["buyer_optimal"]

    def test_certificate_label_sequences(self, capsys, fixtures_dir):
        """Test that each certified path lists alternating item and buyer labels."""
        _, output = _run(capsys, "prices", str(fixtures_dir / "second_price.json"))
        paths = {path["buyer"]: path for path in json.loads(output)["certificate"]["paths"]}
        assert paths["high"]["sequence"] == ["item", "low", "__dummy_item_0"]
        assert paths["low"]["sequence"] == ["__dummy_item_0"]
        assert paths["high"]["sequence"][-1] == paths["high"]["zero_item"]

    def test_audit(self, capsys, fixtures_dir):
        """Test an audit of the high bidder."""
        status, output = _run(
            capsys,
            "audit",
            str(fixtures_dir / "second_price.json"),
            "--bidder",
            "high",
            "--strategy",
            "structured",
        )
        report = json.loads(output)
        assert status == EXIT_OK
        assert report["incentive_compatible"]
        assert report["max_utility_delta"] == 0
        assert report["truthful"] == {"item": "item", "price": 8, "utility": 2}
        assert report["deviation_count"] == len(report["deviations"])

    def test_audit_seeded(self, capsys, fixtures_dir):
        """Test that audits with the same seed are byte-identical."""
        argv = [
            "audit",
            str(fixtures_dir / "two_by_two.json"),
            "--bidder",
            "y",
            "--trials",
            "30",
            "--seed",
            "11",
        ]
        assert _run(capsys, *argv) == _run(capsys, *argv, "--workers", "3")

    def test_output_file(self, capsys, fixtures_dir, tmp_path):
        """Test writing the report to a file."""
        target = tmp_path / "report.json"
        status, output = _run(
            capsys, "vcg", str(fixtures_dir / "second_price.json"), "--output", str(target)
        )
        assert status == EXIT_OK
        assert output == ""
        assert json.loads(target.read_text())["command"] == "vcg"


class TestRunConfig:
    """Tests for RunConfig."""

    def test_format_inferred(self, fixtures_dir):
        """Test the format comes from the file suffix unless given."""
        parser = build_parser()
        csv_config = RunConfig.from_args(
            parser.parse_args(["solve", str(fixtures_dir / "second_price.csv")])
        )
        assert csv_config.fmt == "csv"
        forced = RunConfig.from_args(
            parser.parse_args(["solve", str(fixtures_dir / "second_price.csv"), "--format", "json"])
        )
        assert forced.fmt == "json"

    def test_scale_ignored_for_json(self, caplog, fixtures_dir):
        """Test that --scale only applies to CSV and warns for JSON."""
        parser = build_parser()
        json_config = RunConfig.from_args(
            parser.parse_args(["solve", str(fixtures_dir / "tied.json"), "--scale", "7"])
        )
        assert "Ignoring --scale 7" in caplog.text
        assert json_config.scale == 7
        caplog.clear()
        csv_config = RunConfig.from_args(
            parser.parse_args(["solve", str(fixtures_dir / "second_price.csv"), "--scale", "100"])
        )
        assert csv_config.scale == 100
        assert not caplog.records

    def test_every_subcommand_has_handler(self):
        """Test that the parser and the handler registry list the same commands."""
        subcommands = next(
            action
            for action in build_parser()._actions
            if isinstance(action, argparse._SubParsersAction)
        )
        assert set(subcommands.choices) == set(COMMAND_HANDLERS)

    def test_scale_default(self, fixtures_dir):
        """Test the scale default when the flag is absent."""
        config = RunConfig.from_args(
            build_parser().parse_args(["solve", str(fixtures_dir / "second_price.csv")])
        )
        assert config.scale == 1

    def test_run_directly(self, capsys, fixtures_dir):
        """Test calling run with a hand-built config."""
        config = RunConfig(command="vcg", input=fixtures_dir / "two_by_two.json")
        assert run(config) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["value"] == 5


class TestReportSchemas:
    """Tests for report validation."""

    def test_rejects_floats(self):
        """Test that amounts must be integers."""
        report = {"command": "meet", "scale": 1, "n": 1, "market_clearing": True}
        report["items"] = [{"label": "a", "dummy": False, "price": 1.5}]
        report["buyers"] = [{"label": "x", "dummy": False, "profit": 0}]
        with pytest.raises(InvariantViolation):
            validate_report(report)
