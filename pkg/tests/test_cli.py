"""Command-line surface: flags, exit codes, artifact determinism."""

import filecmp
import json

import pytest

from weicom.cli import main, parse_lambda_grid
from weicom.errors import WeicomError


@pytest.fixture(scope="module")
def corpus_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli-corpus")
    out = root / "corpus"
    code = main(
        [
            "gen-synthetic",
            "--classes", "2", "--values", "2", "--per-cell", "4",
            "--dim", "8", "--seed", "3", "--out", str(out),
        ]
    )
    assert code == 0
    return out


class TestLambdaGrid:
    def test_standard_grid_includes_both_ends(self):
        grid = parse_lambda_grid("0.0:1.0:0.1")
        assert len(grid) == 11
        assert grid[0] == 0.0 and grid[-1] == 1.0
        assert grid[3] == 0.3  # snapped, not 0.30000000000000004

    def test_non_dividing_step_stops_before_end(self):
        assert parse_lambda_grid("0:0.9:0.2") == [0.0, 0.2, 0.4, 0.6, 0.8]

    def test_single_point(self):
        assert parse_lambda_grid("0.5:0.5:0.1") == [0.5]

    def test_bad_syntax(self):
        for text in ["0.5", "a:b:c", "0:1:0", "0:1:-0.1", "1:0:0.1", "-0.2:1:0.1"]:
            with pytest.raises(WeicomError):
                parse_lambda_grid(text)


class TestGenSynthetic:
    def test_two_runs_byte_identical(self, tmp_path):
        args = ["gen-synthetic", "--per-cell", "2", "--seed", "7"]
        assert main(args + ["--out", str(tmp_path / "a")]) == 0
        assert main(args + ["--out", str(tmp_path / "b")]) == 0
        names = [p.name for p in sorted((tmp_path / "a").iterdir())]
        match, mismatch, errors = filecmp.cmpfiles(
            tmp_path / "a", tmp_path / "b", names, shallow=False
        )
        assert mismatch == [] and errors == []

    def test_invalid_shape_is_validation_error(self, tmp_path, capsys):
        code = main(
            ["gen-synthetic", "--classes", "10", "--values", "10", "--dim", "4",
             "--out", str(tmp_path / "x")]
        )
        assert code == 1
        assert "error" in capsys.readouterr().err


class TestQuery:
    def test_prints_ranked_json(self, corpus_dir, capsys):
        code = main(
            [
                "query", "--corpus", str(corpus_dir),
                "--image-id", "img_00_00_0000", "--text", "v01",
                "--method", "weicom", "--lambda", "0.5", "--k", "3",
            ]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["method"] == "weicom"
        results = payload["results"]
        assert len(results) == 3
        assert [r["rank"] for r in results] == [1, 2, 3]

    def test_query_image_ranks_first_without_exclusion(self, corpus_dir, capsys):
        code = main(
            [
                "query", "--corpus", str(corpus_dir),
                "--image-id", "img_00_00_0000",
                "--method", "image_only", "--k", "2",
            ]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["results"][0]["id"] == "img_00_00_0000"

    def test_conflicting_flags_rejected(self, corpus_dir, capsys):
        code = main(
            [
                "query", "--corpus", str(corpus_dir),
                "--image-id", "img_00_00_0000", "--text", "v01",
                "--method", "image_only",
            ]
        )
        assert code == 1
        assert "conflicts" in capsys.readouterr().err

    def test_lambda_requires_weicom(self, corpus_dir, capsys):
        code = main(
            [
                "query", "--corpus", str(corpus_dir),
                "--image-id", "img_00_00_0000",
                "--method", "image_only", "--lambda", "0.3",
            ]
        )
        assert code == 1

    def test_missing_corpus_is_io_error(self, tmp_path, capsys):
        code = main(
            ["query", "--corpus", str(tmp_path / "nope"), "--image-id", "x",
             "--text", "y", "--method", "weicom"]
        )
        assert code == 2

    def test_unknown_option_is_usage_error(self, capsys):
        assert main(["query", "--frobnicate"]) == 1


class TestEvaluate:
    def test_writes_report_and_prints_table(self, corpus_dir, tmp_path, capsys):
        out = tmp_path / "report.json"
        suite_out = tmp_path / "suite.jsonl"
        code = main(
            [
                "evaluate", "--corpus", str(corpus_dir),
                "--benchmark", str(corpus_dir / "benchmark.json"),
                "--method", "weicom", "--lambda", "0.6",
                "--out", str(out), "--suite-out", str(suite_out),
            ]
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["method"] == "weicom" and doc["lambda"] == 0.6
        assert doc["exclude_query_image"] is True
        table = capsys.readouterr().out
        assert table.splitlines()[0].split() == ["Method", "Variant", "Avg"]
        assert suite_out.exists()
        assert len(suite_out.read_text().splitlines()) == doc["query_count"]

    def test_reports_are_byte_deterministic(self, corpus_dir, tmp_path):
        outs = []
        for name in ("r1.json", "r2.json"):
            out = tmp_path / name
            code = main(
                [
                    "evaluate", "--corpus", str(corpus_dir),
                    "--benchmark", str(corpus_dir / "benchmark.json"),
                    "--method", "average", "--out", str(out),
                ]
            )
            assert code == 0
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_lambda_with_non_weicom_method_rejected(self, corpus_dir, tmp_path):
        code = main(
            [
                "evaluate", "--corpus", str(corpus_dir),
                "--benchmark", str(corpus_dir / "benchmark.json"),
                "--method", "image_only", "--lambda", "0.5",
                "--out", str(tmp_path / "r.json"),
            ]
        )
        assert code == 1


class TestSweep:
    def test_sweep_grid_and_report(self, corpus_dir, tmp_path, capsys):
        out = tmp_path / "sweep.json"
        code = main(
            [
                "sweep", "--corpus", str(corpus_dir),
                "--benchmark", str(corpus_dir / "benchmark.json"),
                "--lambdas", "0.0:1.0:0.5", "--out", str(out),
            ]
        )
        assert code == 0
        doc = json.loads(out.read_text())
        assert doc["lambda_grid"] == [0.0, 0.5, 1.0]
        assert len(doc["average"]["map"]) == 3
        table = capsys.readouterr().out
        assert table.splitlines()[0].split() == ["lambda", "0", "0.5", "1"]

    def test_bad_grid_is_validation_error(self, corpus_dir, tmp_path):
        code = main(
            [
                "sweep", "--corpus", str(corpus_dir),
                "--benchmark", str(corpus_dir / "benchmark.json"),
                "--lambdas", "0.0:2.0:0.5", "--out", str(tmp_path / "s.json"),
            ]
        )
        assert code == 1


class TestThreadsEnv:
    def test_invalid_value_rejected(self, corpus_dir, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("WEICOM_THREADS", "many")
        code = main(
            ["query", "--corpus", str(corpus_dir), "--image-id", "img_00_00_0000",
             "--method", "image_only"]
        )
        assert code == 1
        assert "WEICOM_THREADS" in capsys.readouterr().err

    def test_thread_cap_does_not_change_reports(self, corpus_dir, tmp_path, monkeypatch):
        bodies = []
        for threads in ("1", "8"):
            monkeypatch.setenv("WEICOM_THREADS", threads)
            out = tmp_path / f"r{threads}.json"
            code = main(
                [
                    "evaluate", "--corpus", str(corpus_dir),
                    "--benchmark", str(corpus_dir / "benchmark.json"),
                    "--method", "weicom", "--lambda", "0.5", "--out", str(out),
                ]
            )
            assert code == 0
            bodies.append(out.read_bytes())
        assert bodies[0] == bodies[1]


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "ingest" in capsys.readouterr().out
