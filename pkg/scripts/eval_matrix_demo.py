#!/usr/bin/env python3
"""Run the evaluation matrix against a local echo backend.

Starts a throwaway chat-completions server that echoes the user message back
as the "answer", then evaluates the bundled QA pairs under the three standard
configurations and writes summary.csv / records.jsonl. Useful for checking
report structure and determinism without any model weights.
"""

from __future__ import annotations

import argparse
import json
import sys
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from biorag import evaluation
from biorag.chunking import ChunkingConfig, chunk_corpus
from biorag.embedding import EmbeddingProviderConfig
from biorag.index import build_index
from biorag.ingest import Corpus, ingest_file

DATA = Path(__file__).resolve().parent.parent / "data"


class _EchoHandler(BaseHTTPRequestHandler):
    def do_POST(self):
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        content = ""
        for message in body.get("messages", []):
            if message.get("role") == "user":
                content = message.get("content", "")
        payload = json.dumps(
            {"choices": [{"message": {"role": "assistant", "content": content}}]}
        ).encode("utf-8")
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)

    def log_message(self, *args):
        pass


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--pairs", default=str(DATA / "qa_pairs.jsonl"))
    parser.add_argument("--configs", default=str(DATA / "eval_configs.json"))
    parser.add_argument("--out", default="reports/echo_demo")
    parser.add_argument("--dimension", type=int, default=128)
    args = parser.parse_args(argv)

    server = ThreadingHTTPServer(("127.0.0.1", 0), _EchoHandler)
    threading.Thread(target=server.serve_forever, daemon=True).start()
    url = f"http://127.0.0.1:{server.server_port}"

    try:
        pairs = evaluation.read_qa_pairs(args.pairs)
        raw = json.loads(Path(args.configs).read_text(encoding="utf-8"))
        for entry in raw:
            entry["generation"]["endpoint_url"] = url
        rewritten = Path(args.out) / "configs.echo.json"
        rewritten.parent.mkdir(parents=True, exist_ok=True)
        rewritten.write_text(json.dumps(raw, indent=2), encoding="utf-8")
        configs = evaluation.read_eval_configs(rewritten)

        documents = []
        for name in ("breast_cancer.txt", "general_medicine.txt"):
            documents.extend(ingest_file(DATA / name, "txt").documents)
        corpus = Corpus(name="demo", documents=documents)
        chunks = chunk_corpus(corpus, ChunkingConfig(chunk_size=400, overlap=80))
        provider = EmbeddingProviderConfig(kind="deterministic", dimension=args.dimension)
        index = build_index(chunks, provider, corpus_name=corpus.name)

        report, records = evaluation.run_eval(pairs, configs, index, provider)
        evaluation.write_report(report, records, args.out)
    finally:
        server.shutdown()

    print(f"wrote {args.out}/summary.csv and records.jsonl")
    for agg in report.aggregates:
        print(
            f"  {agg.config_name}: n={agg.n} em={agg.mean_em:.3f} "
            f"bleu={agg.mean_bleu:.3f} bert_f1={agg.mean_bert_f1:.3f} errors={agg.errors}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
