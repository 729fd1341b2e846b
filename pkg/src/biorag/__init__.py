"""Retrieval-augmented question answering over biomedical text corpora."""

from .chunking import Chunk, ChunkingConfig, chunk_corpus, chunk_document, chunk_text
from .embedding import EmbeddingProviderConfig, embed_batch, embed_deterministic
from .engine import Answer, GenerationConfig, PromptBundle, ask, build_prompt
from .errors import BioragError
from .index import (
    RetrievalConfig,
    SearchHit,
    VectorIndex,
    build_index,
    load_index,
    save_index,
    search,
)
from .ingest import Corpus, Document, ingest_file, read_corpus, write_corpus
from .metrics import bert_score, bleu4, exact_match

__version__ = "0.1.0"

__all__ = [
    "Answer",
    "BioragError",
    "Chunk",
    "ChunkingConfig",
    "Corpus",
    "Document",
    "EmbeddingProviderConfig",
    "GenerationConfig",
    "PromptBundle",
    "RetrievalConfig",
    "SearchHit",
    "VectorIndex",
    "ask",
    "bert_score",
    "bleu4",
    "build_index",
    "build_prompt",
    "chunk_corpus",
    "chunk_document",
    "chunk_text",
    "embed_batch",
    "embed_deterministic",
    "exact_match",
    "ingest_file",
    "load_index",
    "read_corpus",
    "save_index",
    "search",
    "write_corpus",
    "__version__",
]
