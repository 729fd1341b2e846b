"""Query orchestration: embed, retrieve, assemble the prompt, generate.

The prompt layout is fixed: system instruction, guidance line, a context
block of retrieved chunks tagged with their source rank and document id,
then the question and the answer cue. Retrieved chunks are included whole,
in rank order, until the character budget would be exceeded; a chunk is
never cut mid-text.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import httpx

from .embedding import EmbeddingProviderConfig, embed_batch, RETRY_ATTEMPTS, _BACKOFF_BASE_S
from .errors import (
    BackendError,
    BackendUnreachable,
    BioragError,
    EmptyCompletion,
    EmptyIndex,
    EmptyQuery,
    FingerprintMismatch,
    MalformedResponse,
)
from .chunking import Chunk
from .index import RetrievalConfig, SearchHit, VectorIndex, search

SYSTEM_INSTRUCTION = "You are a concise and factual biomedical assistant."
CONTEXT_GUIDANCE = (
    "Use the following context to answer the question "
    "in 3–4 complete, non-repetitive sentences."
)
NO_CONTEXT_GUIDANCE = (
    "Answer the question in 3–4 complete, non-repetitive sentences."
)


@dataclass
class GenerationConfig:
    endpoint_url: str = ""
    model_name: str = ""
    temperature: float = 0.2
    max_new_tokens: int = 256
    context_char_budget: int = 6000
    mode: str = "rag"  # rag | vanilla
    timeout_ms: int = 60_000

    def __post_init__(self):
        if self.mode not in ("rag", "vanilla"):
            raise ValueError(f"unknown mode: {self.mode!r}")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")
        if self.max_new_tokens <= 0 or self.context_char_budget <= 0:
            raise ValueError("max_new_tokens and context_char_budget must be positive")


@dataclass
class PromptBundle:
    system_instruction: str
    context_block: str
    query: str
    rendered: str
    included_hits: list[SearchHit] = field(default_factory=list)

    def user_message(self) -> str:
        """Everything after the system instruction, for the chat payload."""
        return self.rendered.removeprefix(self.system_instruction).lstrip("\n")


@dataclass
class GenerationResult:
    text: str
    latency_ms: int
    attempts: int


@dataclass
class Answer:
    text: str
    hits: list[SearchHit]
    prompt: PromptBundle
    latency_ms: int
    model_name: str


def _source_tag(rank: int, doc_id: str) -> str:
    return f"[Source {rank}: {doc_id}]"


def build_prompt(
    query: str,
    hits: list[tuple[SearchHit, Chunk]],
    cfg: GenerationConfig,
) -> PromptBundle:
    """Render the final prompt, budgeting retrieved chunks whole."""
    if not query or not query.strip():
        raise EmptyQuery("question is empty")

    if cfg.mode == "vanilla":
        rendered = "\n\n".join([
            SYSTEM_INSTRUCTION,
            NO_CONTEXT_GUIDANCE,
            f"Question: {query}",
            "Answer:",
        ])
        return PromptBundle(
            system_instruction=SYSTEM_INSTRUCTION,
            context_block="",
            query=query,
            rendered=rendered,
            included_hits=[],
        )

    included: list[SearchHit] = []
    entries: list[str] = []
    context_block = ""
    for hit, chunk in hits:
        entry = f"{_source_tag(hit.rank, chunk.doc_id)}\n{chunk.text}"
        candidate = "\n\n".join(entries + [entry])
        if len(candidate) > cfg.context_char_budget:
            break
        entries.append(entry)
        included.append(hit)
        context_block = candidate

    rendered = "\n\n".join([
        SYSTEM_INSTRUCTION,
        CONTEXT_GUIDANCE,
        "Context:\n" + context_block,
        f"Question: {query}",
        "Answer:",
    ])
    return PromptBundle(
        system_instruction=SYSTEM_INSTRUCTION,
        context_block=context_block,
        query=query,
        rendered=rendered,
        included_hits=included,
    )


def _chat_url(base: str) -> str:
    base = base.rstrip("/")
    return base if base.endswith("/v1/chat/completions") else base + "/v1/chat/completions"


def generate(prompt: PromptBundle, cfg: GenerationConfig) -> GenerationResult:
    """Call the chat backend; transient failures retried with backoff."""
    payload = {
        "model": cfg.model_name,
        "messages": [
            {"role": "system", "content": prompt.system_instruction},
            {"role": "user", "content": prompt.user_message()},
        ],
        "temperature": cfg.temperature,
        "max_tokens": cfg.max_new_tokens,
    }
    url = _chat_url(cfg.endpoint_url)
    started = time.perf_counter()
    last_error: Exception | None = None
    for attempt in range(1, RETRY_ATTEMPTS + 1):
        if attempt > 1:
            time.sleep(_BACKOFF_BASE_S * (2 ** (attempt - 2)))
        try:
            response = httpx.post(url, json=payload, timeout=cfg.timeout_ms / 1000.0)
        except httpx.HTTPError as exc:
            last_error = exc
            continue
        if response.status_code >= 500:
            last_error = BackendError(response.status_code, response.text)
            continue
        if response.status_code != 200:
            raise BackendError(response.status_code, response.text)
        text = _parse_chat_response(response)
        latency_ms = int((time.perf_counter() - started) * 1000)
        return GenerationResult(text=text, latency_ms=latency_ms, attempts=attempt)
    raise BackendUnreachable(
        f"{url}: giving up after {RETRY_ATTEMPTS} attempts ({last_error})"
    )


def _parse_chat_response(response: httpx.Response) -> str:
    try:
        body = response.json()
    except ValueError as exc:
        raise MalformedResponse(f"response is not JSON: {exc}") from exc
    try:
        content = body["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise MalformedResponse(f"unexpected chat response shape: {exc}") from exc
    if not isinstance(content, str) or not content.strip():
        raise EmptyCompletion("backend returned an empty completion")
    return content


def _stage(name: str):
    class _StageContext:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if isinstance(exc, BioragError) and exc.stage is None:
                exc.stage = name
            return False

    return _StageContext()


def ask(
    query: str,
    index: VectorIndex | None,
    provider: EmbeddingProviderConfig,
    rcfg: RetrievalConfig,
    gcfg: GenerationConfig,
) -> Answer:
    """Full pipeline; errors carry the stage that raised them."""
    if not query or not query.strip():
        raise EmptyQuery("question is empty")

    hits: list[SearchHit] = []
    pairs: list[tuple[SearchHit, Chunk]] = []
    if gcfg.mode == "rag":
        if index is None:
            exc = EmptyIndex("no index loaded")
            exc.stage = "search"
            raise exc
        if index.embedder_fingerprint and index.embedder_fingerprint != provider.fingerprint():
            exc = FingerprintMismatch(
                f"index built with {index.embedder_fingerprint!r}, "
                f"query provider is {provider.fingerprint()!r}"
            )
            exc.stage = "embed"
            raise exc
        with _stage("embed"):
            query_vec = embed_batch([query], provider)[0]
        with _stage("search"):
            hits = search(index, query_vec, rcfg)
        pairs = [(hit, index.chunk_store[hit.chunk_id]) for hit in hits]

    with _stage("prompt"):
        prompt = build_prompt(query, pairs, gcfg)
    with _stage("generate"):
        result = generate(prompt, gcfg)
    return Answer(
        text=result.text,
        hits=hits,
        prompt=prompt,
        latency_ms=result.latency_ms,
        model_name=gcfg.model_name,
    )


def with_overrides(
    rcfg: RetrievalConfig,
    gcfg: GenerationConfig,
    *,
    mode: str | None = None,
    top_k: int | None = None,
) -> tuple[RetrievalConfig, GenerationConfig]:
    """Per-request copies of the base configs."""
    if top_k is not None:
        rcfg = replace(rcfg, top_k=top_k)
    if mode is not None:
        gcfg = replace(gcfg, mode=mode)
    return rcfg, gcfg
