"""CLI: subcommand pipelines, exit codes, and error reporting."""

from __future__ import annotations

import json
import re

import pytest

from biorag.cli import main
from biorag.ingest import read_corpus

SOURCE_LINE = re.compile(r"^\[\d+\] ", re.MULTILINE)

DOC_A = (
    "Tamoxifen blocks estrogen receptors in breast tissue. "
    "Aromatase inhibitors such as letrozole suppress estrogen synthesis. "
    "Trastuzumab targets HER2-amplified tumors. "
    "Sentinel lymph node biopsy stages the axilla. "
    "Screening mammography detects early carcinoma."
)
DOC_B = (
    "Hypertension is first treated with thiazide diuretics. "
    "Type 2 diabetes management begins with metformin. "
    "Inhaled corticosteroids control persistent asthma. "
    "Community-acquired pneumonia is scored with CURB-65. "
    "Proton pump inhibitors relieve reflux symptoms."
)


@pytest.fixture
def corpus_files(tmp_path):
    a = tmp_path / "breast.txt"
    b = tmp_path / "general.txt"
    a.write_text(DOC_A, encoding="utf-8")
    b.write_text(DOC_B, encoding="utf-8")
    return [str(a), str(b)]


@pytest.fixture
def built_index(corpus_files, tmp_path):
    corpus_path = tmp_path / "corpus.jsonl"
    index_path = tmp_path / "corpus.ragidx"
    assert main(["ingest", "--input", *corpus_files, "--out", str(corpus_path)]) == 0
    rc = main(
        [
            "index",
            "--corpus", str(corpus_path),
            "--chunk-size", "80",
            "--overlap", "0",
            "--dimension", "64",
            "--out", str(index_path),
        ]
    )
    assert rc == 0
    return corpus_path, index_path


class TestIngest:
    def test_writes_corpus_file(self, corpus_files, tmp_path, capsys):
        out = tmp_path / "c.jsonl"
        assert main(["ingest", "--input", *corpus_files, "--out", str(out)]) == 0
        corpus = read_corpus(out)
        assert len(corpus.documents) == 2
        assert corpus.name == "c"
        assert "ingested 2 documents" in capsys.readouterr().out

    def test_unreadable_input_is_error_exit(self, tmp_path, capsys):
        rc = main(
            ["ingest", "--input", str(tmp_path / "nope.txt"), "--out", str(tmp_path / "c.jsonl")]
        )
        assert rc == 1
        err = capsys.readouterr().err
        assert err.startswith("error: UnreadableFile: ")


class TestIndex:
    def test_reports_chunk_and_doc_counts(self, built_index, tmp_path, capsys):
        corpus_path, _ = built_index
        capsys.readouterr()
        rc = main(
            [
                "index",
                "--corpus", str(corpus_path),
                "--chunk-size", "80",
                "--overlap", "0",
                "--dimension", "64",
                "--out", str(tmp_path / "again.ragidx"),
            ]
        )
        assert rc == 0
        out = capsys.readouterr().out
        match = re.search(r"indexed (\d+) chunks from 2 documents", out)
        assert match is not None
        assert int(match.group(1)) >= 5

    def test_invalid_chunk_size_is_error_exit(self, built_index, tmp_path, capsys):
        corpus_path, _ = built_index
        capsys.readouterr()
        rc = main(
            [
                "index",
                "--corpus", str(corpus_path),
                "--chunk-size", "-3",
                "--out", str(tmp_path / "bad.ragidx"),
            ]
        )
        assert rc == 1
        assert capsys.readouterr().err.startswith("error: InvalidConfig: ")

    def test_bad_strategy_is_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc_info:
            main(["index", "--corpus", "x", "--strategy", "zigzag", "--out", "y"])
        assert exc_info.value.code == 2


class TestQuery:
    def test_answers_with_five_sources(self, built_index, stub, capsys):
        state, url = stub
        _, index_path = built_index
        capsys.readouterr()
        rc = main(
            [
                "query",
                "--index", str(index_path),
                "--question", "How is early breast carcinoma detected?",
                "--show-sources",
                "--backend-url", url,
                "--dimension", "64",
            ]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "How is early breast carcinoma detected?" in out  # echoed answer
        assert len(SOURCE_LINE.findall(out)) == 5

    def test_top_k_limits_sources(self, built_index, stub, capsys):
        state, url = stub
        _, index_path = built_index
        capsys.readouterr()
        rc = main(
            [
                "query",
                "--index", str(index_path),
                "--question", "carcinoma?",
                "--top-k", "2",
                "--show-sources",
                "--backend-url", url,
                "--dimension", "64",
            ]
        )
        assert rc == 0
        assert len(SOURCE_LINE.findall(capsys.readouterr().out)) == 2

    def test_vanilla_mode_prints_no_sources(self, built_index, stub, capsys):
        state, url = stub
        _, index_path = built_index
        capsys.readouterr()
        rc = main(
            [
                "query",
                "--index", str(index_path),
                "--question", "carcinoma?",
                "--mode", "vanilla",
                "--show-sources",
                "--backend-url", url,
                "--dimension", "64",
            ]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert SOURCE_LINE.findall(out) == []
        assert "carcinoma?" in out

    def test_missing_index_is_error_exit(self, tmp_path, capsys):
        rc = main(
            ["query", "--index", str(tmp_path / "absent.ragidx"), "--question", "q"]
        )
        assert rc == 1
        assert capsys.readouterr().err.startswith("error: IoFailure: ")

    def test_unknown_flag_is_usage_error(self):
        with pytest.raises(SystemExit) as exc_info:
            main(["query", "--index", "x", "--question", "q", "--bogus"])
        assert exc_info.value.code == 2

    def test_missing_subcommand_is_usage_error(self):
        with pytest.raises(SystemExit) as exc_info:
            main([])
        assert exc_info.value.code == 2


class TestEval:
    def test_writes_report_files(self, built_index, stub, tmp_path, capsys):
        state, url = stub
        _, index_path = built_index
        pairs_path = tmp_path / "pairs.jsonl"
        pairs = [
            {"qid": "q1", "question": "What blocks estrogen receptors?",
             "reference_answer": "Tamoxifen blocks them.", "tags": {}},
            {"qid": "q2", "question": "What treats hypertension first?",
             "reference_answer": "Thiazide diuretics.", "tags": {}},
        ]
        pairs_path.write_text(
            "\n".join(json.dumps(p) for p in pairs) + "\n", encoding="utf-8"
        )
        configs_path = tmp_path / "configs.json"
        configs_path.write_text(
            json.dumps(
                [
                    {
                        "name": "rag",
                        "retrieval": {"top_k": 3},
                        "generation": {
                            "endpoint_url": url, "model_name": "m", "mode": "rag"
                        },
                    },
                    {
                        "name": "vanilla",
                        "retrieval": {"top_k": 3},
                        "generation": {
                            "endpoint_url": url, "model_name": "m", "mode": "vanilla"
                        },
                    },
                ]
            ),
            encoding="utf-8",
        )
        out_dir = tmp_path / "report"
        capsys.readouterr()
        rc = main(
            [
                "eval",
                "--index", str(index_path),
                "--pairs", str(pairs_path),
                "--configs", str(configs_path),
                "--out", str(out_dir),
                "--dimension", "64",
            ]
        )
        assert rc == 0
        summary = (out_dir / "summary.csv").read_text(encoding="utf-8").splitlines()
        assert len(summary) == 3  # header + one row per config
        assert (out_dir / "records.jsonl").read_text(encoding="utf-8").count("\n") == 4
        out = capsys.readouterr().out
        assert "rag: n=2" in out
        assert "vanilla: n=2" in out


class TestServe:
    def test_missing_config_is_error_exit(self, tmp_path, capsys):
        rc = main(["serve", "--config", str(tmp_path / "absent.toml")])
        assert rc == 1
        assert capsys.readouterr().err.startswith("error: IoFailure: ")
