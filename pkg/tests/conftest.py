"""Shared fixtures: data paths, a small indexed corpus, stub backends."""

from __future__ import annotations

from pathlib import Path

import pytest

from biorag.chunking import ChunkingConfig, chunk_corpus
from biorag.embedding import EmbeddingProviderConfig
from biorag.index import build_index
from biorag.ingest import Corpus, ingest_file

from stubs import run_stub

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def det_provider() -> EmbeddingProviderConfig:
    return EmbeddingProviderConfig(kind="deterministic", dimension=64)


@pytest.fixture(scope="session")
def fixture_corpus() -> Corpus:
    corpus = Corpus(name="fixtures")
    for name in ("breast_cancer.txt", "general_medicine.txt"):
        result = ingest_file(DATA_DIR / name, "txt")
        corpus.documents.extend(result.documents)
    return corpus


@pytest.fixture(scope="session")
def fixture_index(fixture_corpus, det_provider):
    chunks = chunk_corpus(
        fixture_corpus, ChunkingConfig(strategy="recursive", chunk_size=400, overlap=80)
    )
    return build_index(chunks, det_provider, corpus_name=fixture_corpus.name)


@pytest.fixture
def stub():
    with run_stub(dimension=16) as (state, url):
        yield state, url
