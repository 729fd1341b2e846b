"""Command-line driver: ingest, index, query, eval, serve.

Each subcommand is a thin composition of library calls. Exit codes: 0 on
success, 1 on operational errors (reported as ``error: <Code>: <detail>``
on stderr), 2 on usage errors (argparse's default).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import engine, evaluation, service
from .chunking import (
    DEFAULT_CHUNK_SIZE,
    DEFAULT_OVERLAP,
    ChunkingConfig,
    chunk_corpus,
)
from .embedding import DEFAULT_DIMENSION, EmbeddingProviderConfig
from .engine import GenerationConfig
from .errors import BioragError
from .index import RetrievalConfig, build_index, load_index, save_index
from .ingest import Corpus, ingest_file, read_corpus, write_corpus


def _provider_from_args(args: argparse.Namespace) -> EmbeddingProviderConfig:
    return EmbeddingProviderConfig(
        kind=args.provider,
        endpoint_url=args.endpoint,
        model_name=args.embed_model,
        dimension=args.dimension,
    )


def _cmd_ingest(args: argparse.Namespace) -> int:
    corpus = Corpus(name=Path(args.out).stem)
    skipped = 0
    for path in args.input:
        result = ingest_file(path, args.format)
        corpus.documents.extend(result.documents)
        skipped += result.skipped
    seen: set[str] = set()
    for doc in corpus.documents:
        if doc.doc_id in seen:
            raise BioragError(f"duplicate doc_id across inputs: {doc.doc_id!r}")
        seen.add(doc.doc_id)
    write_corpus(corpus, args.out)
    print(f"ingested {len(corpus.documents)} documents, skipped {skipped}")
    return 0


def _cmd_index(args: argparse.Namespace) -> int:
    corpus = read_corpus(args.corpus)
    cfg = ChunkingConfig(
        strategy=args.strategy, chunk_size=args.chunk_size, overlap=args.overlap
    )
    chunks = chunk_corpus(corpus, cfg)
    index = build_index(chunks, _provider_from_args(args), corpus_name=corpus.name)
    save_index(index, args.out)
    print(f"indexed {len(index)} chunks from {len(corpus.documents)} documents -> {args.out}")
    return 0


def _cmd_query(args: argparse.Namespace) -> int:
    index = load_index(args.index)
    rcfg = RetrievalConfig(top_k=args.top_k)
    gcfg = GenerationConfig(
        endpoint_url=args.backend_url, model_name=args.model, mode=args.mode
    )
    answer = engine.ask(args.question, index, _provider_from_args(args), rcfg, gcfg)
    print(answer.text)
    if args.show_sources:
        for hit in answer.prompt.included_hits:
            chunk = index.chunk_store[hit.chunk_id]
            print(f"[{hit.rank}] {chunk.doc_id} (score {hit.score:.4f}) {hit.chunk_id}")
    return 0


def _cmd_eval(args: argparse.Namespace) -> int:
    index = load_index(args.index)
    pairs = evaluation.read_qa_pairs(args.pairs)
    configs = evaluation.read_eval_configs(args.configs)
    report, records = evaluation.run_eval(pairs, configs, index, _provider_from_args(args))
    evaluation.write_report(report, records, args.out)
    for agg in report.aggregates:
        print(
            f"{agg.config_name}: n={agg.n} em={agg.mean_em:.3f} "
            f"bleu={agg.mean_bleu:.3f} bert_f1={agg.mean_bert_f1:.3f} errors={agg.errors}"
        )
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    config = service.load_service_config(args.config)
    service.serve(config)
    return 0


def _add_provider_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--provider", choices=("deterministic", "remote"), default="deterministic"
    )
    parser.add_argument("--endpoint", default="http://127.0.0.1:8001")
    parser.add_argument("--embed-model", default="multi-qa-MiniLM-L6-cos-v1")
    parser.add_argument("--dimension", type=int, default=DEFAULT_DIMENSION)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="biorag", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="normalize source files into a corpus")
    p_ingest.add_argument("--input", nargs="+", required=True)
    p_ingest.add_argument(
        "--format", choices=("txt", "html", "json", "jsonl"), default="txt"
    )
    p_ingest.add_argument("--out", required=True)
    p_ingest.set_defaults(func=_cmd_ingest)

    p_index = sub.add_parser("index", help="chunk a corpus and build a vector index")
    p_index.add_argument("--corpus", required=True)
    p_index.add_argument(
        "--strategy", choices=("recursive", "sentence", "adaptive"), default="recursive"
    )
    p_index.add_argument("--chunk-size", type=int, default=DEFAULT_CHUNK_SIZE)
    p_index.add_argument("--overlap", type=int, default=DEFAULT_OVERLAP)
    p_index.add_argument("--out", required=True)
    _add_provider_flags(p_index)
    p_index.set_defaults(func=_cmd_index)

    p_query = sub.add_parser("query", help="answer one question against an index")
    p_query.add_argument("--index", required=True)
    p_query.add_argument("--question", required=True)
    p_query.add_argument("--top-k", type=int, default=5)
    p_query.add_argument("--mode", choices=("rag", "vanilla"), default="rag")
    p_query.add_argument("--show-sources", action="store_true")
    p_query.add_argument("--backend-url", default="http://127.0.0.1:8000")
    p_query.add_argument("--model", default="Mistral-7B-v0.3")
    _add_provider_flags(p_query)
    p_query.set_defaults(func=_cmd_query)

    p_eval = sub.add_parser("eval", help="run the metric matrix over QA pairs")
    p_eval.add_argument("--index", required=True)
    p_eval.add_argument("--pairs", required=True)
    p_eval.add_argument("--configs", required=True)
    p_eval.add_argument("--out", required=True)
    _add_provider_flags(p_eval)
    p_eval.set_defaults(func=_cmd_eval)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--config", required=True)
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BioragError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
