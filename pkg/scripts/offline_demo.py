#!/usr/bin/env python3
"""Offline retrieval walkthrough: ingest, index, search, prompt assembly.

Runs the full pipeline up to (but not including) the generation call, so it
needs no model backend. Prints the ranked sources and the exact prompt that
would be sent for each question.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from biorag.chunking import ChunkingConfig, chunk_corpus
from biorag.embedding import EmbeddingProviderConfig, embed_deterministic
from biorag.engine import GenerationConfig, build_prompt
from biorag.index import RetrievalConfig, build_index, search
from biorag.ingest import Corpus, ingest_file

DEFAULT_QUESTIONS = [
    "How is early breast cancer detected?",
    "Which drugs target HER2-positive tumors?",
    "What is the first-line treatment for type 2 diabetes?",
]


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--input",
        nargs="+",
        default=[
            str(Path(__file__).resolve().parent.parent / "data" / "breast_cancer.txt"),
            str(Path(__file__).resolve().parent.parent / "data" / "general_medicine.txt"),
        ],
    )
    parser.add_argument("--question", action="append", default=None)
    parser.add_argument("--top-k", type=int, default=5)
    parser.add_argument("--dimension", type=int, default=384)
    parser.add_argument("--show-prompt", action="store_true")
    args = parser.parse_args(argv)

    documents = []
    for path in args.input:
        documents.extend(ingest_file(path, "txt").documents)
    corpus = Corpus(name="demo", documents=documents)
    chunks = chunk_corpus(corpus, ChunkingConfig(chunk_size=400, overlap=80))
    provider = EmbeddingProviderConfig(kind="deterministic", dimension=args.dimension)
    index = build_index(chunks, provider, corpus_name=corpus.name)
    print(f"indexed {len(index)} chunks from {len(documents)} documents "
          f"(fingerprint {index.embedder_fingerprint})\n")

    gcfg = GenerationConfig(endpoint_url="http://localhost:8000", model_name="demo")
    for question in args.question or DEFAULT_QUESTIONS:
        print(f"Q: {question}")
        query_vec = embed_deterministic(question, args.dimension)
        hits = search(index, query_vec, RetrievalConfig(top_k=args.top_k))
        for hit in hits:
            chunk = index.chunk_store[hit.chunk_id]
            excerpt = chunk.text[:70].replace("\n", " ")
            print(f"  [{hit.rank}] {hit.score:.4f} {chunk.doc_id}  {excerpt}...")
        if args.show_prompt:
            pairs = [(hit, index.chunk_store[hit.chunk_id]) for hit in hits]
            bundle = build_prompt(question, pairs, gcfg)
            print("\n--- prompt ---")
            print(bundle.rendered)
            print("--- end prompt ---")
        print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
