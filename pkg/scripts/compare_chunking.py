#!/usr/bin/env python3
"""Compare the three chunking strategies over a corpus.

Prints, per strategy: chunk count, mean/max chunk length, and whether the
overlap-stripped concatenation reproduces every document byte-exactly.
"""

from __future__ import annotations

import argparse
import statistics
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from biorag.chunking import ChunkingConfig, chunk_document, reconstruct
from biorag.ingest import ingest_file

STRATEGIES = ("recursive", "sentence", "adaptive")


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--input",
        nargs="+",
        default=[
            str(Path(__file__).resolve().parent.parent / "data" / "breast_cancer.txt"),
            str(Path(__file__).resolve().parent.parent / "data" / "general_medicine.txt"),
        ],
        help="source text files (default: bundled fixtures)",
    )
    parser.add_argument("--format", default="txt", choices=("txt", "html", "json", "jsonl"))
    parser.add_argument("--chunk-size", type=int, default=400)
    parser.add_argument("--overlap", type=int, default=80)
    args = parser.parse_args(argv)

    documents = []
    for path in args.input:
        documents.extend(ingest_file(path, args.format).documents)
    print(f"{len(documents)} documents, chunk_size={args.chunk_size}, overlap={args.overlap}\n")

    header = f"{'strategy':<10} {'chunks':>6} {'mean_len':>8} {'max_len':>7} {'lossless':>8}"
    print(header)
    print("-" * len(header))
    for strategy in STRATEGIES:
        cfg = ChunkingConfig(
            strategy=strategy, chunk_size=args.chunk_size, overlap=args.overlap
        )
        counts: list[int] = []
        lossless = True
        for doc in documents:
            chunks = chunk_document(doc, cfg)
            counts.extend(len(c.text) for c in chunks)
            if reconstruct(chunks) != doc.text:
                lossless = False
        print(
            f"{strategy:<10} {len(counts):>6} {statistics.fmean(counts):>8.1f} "
            f"{max(counts):>7} {str(lossless):>8}"
        )
    return 0


if __name__ == "__main__":
    sys.exit(main())
