"""Document segmentation under three selectable strategies.

All strategies share the same two-phase scheme: the text is first cut into
lossless units (separator text stays attached to the end of the preceding
unit, so concatenating units reproduces the input), then units are packed
greedily into chunks of at most ``chunk_size`` characters. When a chunk
overflows, the next chunk is seeded with the longest whole-unit suffix of
the emitted chunk that fits the overlap budget.

Every chunk records the half-open span of its non-overlap core in the
parent document, so concatenating the cores in ordinal order reproduces
the document exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .errors import InvalidConfig

DEFAULT_SEPARATORS = ("\n\n", "\n", ". ", " ", "")
DEFAULT_CHUNK_SIZE = 1000
DEFAULT_OVERLAP = 150

#: Tokens that end with a period but do not end a sentence.
DEFAULT_ABBREVIATIONS = (
    "e.g.", "i.e.", "Dr.", "Fig.", "et al.", "al.", "Mr.", "Mrs.", "Ms.",
    "Prof.", "St.", "vs.", "cf.", "No.", "Eq.", "Ref.", "approx.",
)

_SENTENCE_END = re.compile(r"[.!?]")


@dataclass
class ChunkingConfig:
    strategy: str = "recursive"  # recursive | sentence | adaptive
    chunk_size: int = DEFAULT_CHUNK_SIZE
    overlap: int = DEFAULT_OVERLAP
    separators: tuple[str, ...] = DEFAULT_SEPARATORS

    def __post_init__(self):
        if self.strategy not in ("recursive", "sentence", "adaptive"):
            raise InvalidConfig(f"unknown strategy: {self.strategy!r}")
        if self.chunk_size <= 0:
            raise InvalidConfig("chunk_size must be positive")
        if self.overlap < 0 or self.overlap >= self.chunk_size:
            raise InvalidConfig(
                f"overlap must satisfy 0 <= overlap < chunk_size, "
                f"got overlap={self.overlap} chunk_size={self.chunk_size}"
            )
        seps = tuple(self.separators)
        if not seps or seps[-1] != "":
            seps = seps + ("",)  # guarantee the character-level fallback
        self.separators = seps


@dataclass
class Chunk:
    """A retrieval-sized slice of a document.

    ``text`` may start with up to ``overlap`` characters repeated from the
    previous chunk; ``char_start``/``char_end`` delimit only the non-overlap
    core within the parent document.
    """

    chunk_id: str
    doc_id: str
    ordinal: int
    text: str
    char_start: int
    char_end: int

    @property
    def overlap_len(self) -> int:
        return len(self.text) - (self.char_end - self.char_start)

    @property
    def core_text(self) -> str:
        return self.text[self.overlap_len:]


# --- phase 1: lossless unitization --------------------------------------


def _split_keep_separator(segment: str, sep: str) -> list[str]:
    """Split after each occurrence of ``sep``; concatenation is preserved."""
    pieces = segment.split(sep)
    out = [p + sep for p in pieces[:-1]]
    if pieces[-1]:
        out.append(pieces[-1])
    return out


def _unitize(segment: str, separators: tuple[str, ...], chunk_size: int) -> list[str]:
    """Cut ``segment`` into pieces of at most ``chunk_size`` characters using
    the first separator that actually divides it; recurse on long pieces."""
    if len(segment) <= chunk_size:
        return [segment]
    for sep in separators:
        if sep == "":
            return [segment[i:i + chunk_size] for i in range(0, len(segment), chunk_size)]
        pieces = _split_keep_separator(segment, sep)
        if len(pieces) > 1:
            units: list[str] = []
            for piece in pieces:
                units.extend(_unitize(piece, separators, chunk_size))
            return units
    # unreachable: ChunkingConfig guarantees the "" fallback
    raise InvalidConfig("separator list lacks the character fallback")


# --- phase 2: greedy packing with whole-unit overlap seeding -------------


def _pack(units: list[str], cfg: ChunkingConfig, doc_id: str) -> list[Chunk]:
    chunks: list[Chunk] = []
    cur: list[str] = []       # units in the open chunk, seed units first
    seed_count = 0
    cur_len = 0
    pos = 0                   # document offset of the open chunk's core start

    def emit():
        nonlocal pos
        core = "".join(cur[seed_count:])
        ordinal = len(chunks)
        chunks.append(Chunk(
            chunk_id=f"{doc_id}::{ordinal}",
            doc_id=doc_id,
            ordinal=ordinal,
            text="".join(cur),
            char_start=pos,
            char_end=pos + len(core),
        ))
        pos += len(core)

    for unit in units:
        if cur and cur_len + len(unit) > cfg.chunk_size:
            emit()
            # seed the next chunk with trailing whole units of the emitted
            # one, within the overlap budget and leaving room for `unit`
            budget = min(cfg.overlap, cfg.chunk_size - len(unit))
            seed: list[str] = []
            seed_len = 0
            for prev in reversed(cur):
                if seed_len + len(prev) > budget:
                    break
                seed.insert(0, prev)
                seed_len += len(prev)
            cur = seed + [unit]
            seed_count = len(seed)
            cur_len = seed_len + len(unit)
        else:
            cur.append(unit)
            cur_len += len(unit)
    if len(cur) > seed_count:
        emit()
    return chunks


# --- strategies ----------------------------------------------------------


def split_recursive(text: str, cfg: ChunkingConfig, doc_id: str = "") -> list[Chunk]:
    """Hierarchical splitting by the configured separator cascade."""
    if cfg.strategy != "recursive":
        raise InvalidConfig(f"config strategy is {cfg.strategy!r}, expected 'recursive'")
    if not text:
        return []
    units = _unitize(text, cfg.separators, cfg.chunk_size)
    return _pack(units, cfg, doc_id)


def _is_abbreviation(prefix: str, abbreviations: tuple[str, ...]) -> bool:
    lower = prefix.lower()
    for abbr in abbreviations:
        a = abbr.lower()
        if lower.endswith(a):
            boundary = len(prefix) - len(a)
            if boundary == 0 or not prefix[boundary - 1].isalnum():
                return True
    return False


def _sentence_spans(
    text: str, abbreviations: tuple[str, ...] = DEFAULT_ABBREVIATIONS
) -> list[tuple[int, int]]:
    """Half-open spans of sentence cores, excluding surrounding whitespace.

    A boundary is ``.``, ``!`` or ``?`` followed by whitespace and then an
    uppercase letter or digit, unless the text up to the period ends with a
    known abbreviation.
    """
    n = len(text)
    spans: list[tuple[int, int]] = []
    start = 0
    while start < n and text[start].isspace():
        start += 1
    if start == n:
        return []

    i = start
    while i < n:
        ch = text[i]
        if ch in ".!?":
            j = i + 1
            # consume a run of closing punctuation (e.g. "..." or "?!")
            while j < n and text[j] in ".!?":
                j += 1
            k = j
            while k < n and text[k].isspace():
                k += 1
            if k > j and k < n and (text[k].isupper() or text[k].isdigit()):
                if not (text[j - 1] == "." and _is_abbreviation(text[:j], abbreviations)):
                    spans.append((start, j))
                    start = k
            i = j
        else:
            i += 1
    end = n
    while end > start and text[end - 1].isspace():
        end -= 1
    if end > start:
        spans.append((start, end))
    return spans


def split_sentences(
    text: str, abbreviations: tuple[str, ...] = DEFAULT_ABBREVIATIONS
) -> list[str]:
    """Rule-based sentence segmentation; sentences exclude the whitespace
    between them, so rejoining with the original gaps reproduces the text."""
    return [text[s:e] for s, e in _sentence_spans(text, abbreviations)]


def _sentence_segments(text: str) -> list[str]:
    """Lossless segments: each sentence keeps its trailing whitespace; any
    leading whitespace sticks to the first segment."""
    spans = _sentence_spans(text)
    if not spans:
        return [text] if text else []
    cuts = [s for s, _ in spans[1:]]
    segments = []
    prev = 0
    for cut in cuts:
        segments.append(text[prev:cut])
        prev = cut
    segments.append(text[prev:])
    return segments


def _sentence_units(text: str, cfg: ChunkingConfig) -> list[str]:
    sub_seps = (" ", "")
    units: list[str] = []
    for segment in _sentence_segments(text):
        if len(segment) <= cfg.chunk_size:
            units.append(segment)
        else:
            units.extend(_unitize(segment, sub_seps, cfg.chunk_size))
    return units


def split_sentence_aware(text: str, cfg: ChunkingConfig, doc_id: str = "") -> list[Chunk]:
    """Pack whole sentences up to the size budget; oversized sentences fall
    back to word-level splitting."""
    if cfg.strategy != "sentence":
        raise InvalidConfig(f"config strategy is {cfg.strategy!r}, expected 'sentence'")
    if not text:
        return []
    return _pack(_sentence_units(text, cfg), cfg, doc_id)


def _paragraph_segments(text: str) -> list[str]:
    return _split_keep_separator(text, "\n\n")


def split_adaptive(text: str, cfg: ChunkingConfig, doc_id: str = "") -> list[Chunk]:
    """Merge blank-line-delimited paragraphs while they fit; paragraphs
    longer than the budget degrade to sentence packing."""
    if cfg.strategy != "adaptive":
        raise InvalidConfig(f"config strategy is {cfg.strategy!r}, expected 'adaptive'")
    if not text:
        return []
    units: list[str] = []
    for segment in _paragraph_segments(text):
        if len(segment) <= cfg.chunk_size:
            units.append(segment)
        else:
            units.extend(_sentence_units(segment, cfg))
    return _pack(units, cfg, doc_id)


_STRATEGIES = {
    "recursive": split_recursive,
    "sentence": split_sentence_aware,
    "adaptive": split_adaptive,
}


def chunk_text(text: str, cfg: ChunkingConfig, doc_id: str = "") -> list[Chunk]:
    """Dispatch to the configured strategy."""
    return _STRATEGIES[cfg.strategy](text, cfg, doc_id)


def chunk_document(document, cfg: ChunkingConfig) -> list[Chunk]:
    return chunk_text(document.text, cfg, doc_id=document.doc_id)


def chunk_corpus(corpus, cfg: ChunkingConfig) -> list[Chunk]:
    chunks: list[Chunk] = []
    for document in corpus.documents:
        chunks.extend(chunk_document(document, cfg))
    return chunks


def reconstruct(chunks: list[Chunk]) -> str:
    """Overlap-stripped concatenation; equals the original document text."""
    return "".join(c.core_text for c in sorted(chunks, key=lambda c: c.ordinal))
