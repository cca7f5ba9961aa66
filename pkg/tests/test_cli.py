from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from nyaya.config import data_path
from nyaya.service.cli import main

from .conftest import FIXTURES


@pytest.fixture()
def runner() -> CliRunner:
    return CliRunner()


def test_ingest_reports_counts(runner):
    result = runner.invoke(main, ["ingest", "--input", str(data_path("sample_corpus.jsonl"))])
    assert result.exit_code == 0
    assert "ingested 22 documents (0 rejected)" in result.output


def test_ingest_bad_file_nonzero_exit(runner):
    result = runner.invoke(main, ["ingest", "--input", str(FIXTURES / "bad_corpus.jsonl")])
    assert result.exit_code == 1
    assert "ingested 2 documents (1 rejected)" in result.output


def test_ingest_strict_aborts(runner):
    result = runner.invoke(
        main, ["ingest", "--input", str(FIXTURES / "bad_corpus.jsonl"), "--strict"]
    )
    assert result.exit_code != 0
    assert "line 2" in result.output


def test_index_build_and_query(runner, tmp_path):
    out = tmp_path / "sample.nyix"
    result = runner.invoke(
        main,
        [
            "index", "build",
            "--corpus", str(data_path("sample_corpus.jsonl")),
            "--out", str(out),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "indexed 22 chunks" in result.output
    assert out.exists()

    result = runner.invoke(
        main,
        ["index", "query", "--index", str(out), "--text", "anticipatory bail", "-k", "3"],
    )
    assert result.exit_code == 0, result.output
    lines = [line for line in result.output.splitlines() if line.strip()]
    assert len(lines) == 3
    assert "crpc-438#0000" in result.output


def test_classify_command(runner):
    result = runner.invoke(main, ["classify", "--text", "What is the punishment for theft?"])
    assert result.exit_code == 0
    assert "label: criminal" in result.output


def test_rules_lint_ok(runner):
    result = runner.invoke(main, ["rules", "lint"])
    assert result.exit_code == 0
    assert "ok" in result.output


def test_rules_lint_bad_file(runner, tmp_path):
    bad = tmp_path / "rules.jsonl"
    bad.write_text("{broken\n", encoding="utf-8")
    result = runner.invoke(main, ["rules", "lint", "--rules", str(bad)])
    assert result.exit_code == 1
    assert "problem" in result.output


def test_eval_run_prints_tables(runner, tmp_path, monkeypatch):
    monkeypatch.setenv("NYAYA_DATA_DIR", str(tmp_path / "data"))
    json_out = tmp_path / "report.json"
    result = runner.invoke(
        main,
        [
            "eval", "run",
            "--dataset", str(data_path("sample_eval.jsonl")),
            "--k", "5",
            "--json-out", str(json_out),
        ],
    )
    assert result.exit_code == 0, result.output
    assert "System Evaluation Results" in result.output
    assert "Error Category Distribution" in result.output
    payload = json.loads(json_out.read_text(encoding="utf-8"))
    assert payload["n_queries"] == 12
    assert 0.0 <= payload["retrieval_precision_at_k"] <= 1.0
