"""Corpus ingestion: turn heterogeneous source files into normalized documents.

The pipeline per record is ``normalize_text(strip_boilerplate(strip_html(raw)))``
(HTML stripping only for html input). Normalized documents are persisted as
JSONL, one object per line, UTF-8 with LF line endings.
"""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass, field
from html.parser import HTMLParser
from pathlib import Path
from typing import Iterable

from .errors import (
    EmptyAfterNormalization,
    IoFailure,
    MalformedRecord,
    SchemaViolation,
    UnreadableFile,
)

# Tags whose entire content is dropped.
_DROP_TAGS = {"script", "style", "noscript", "template"}

# Tags that force a paragraph break (blank line) around their content.
_PARAGRAPH_TAGS = {"p", "h1", "h2", "h3", "h4", "h5", "h6", "blockquote", "pre", "table", "figure"}

# Tags that force at least a line break.
_BLOCK_TAGS = {
    "div", "br", "hr", "li", "ul", "ol", "dl", "dt", "dd", "tr", "td", "th",
    "section", "article", "header", "footer", "main", "aside", "nav", "form",
    "address", "caption",
}

# Characters mapped to ASCII before whitespace collapsing.
_CHAR_MAP = str.maketrans({
    "“": '"', "”": '"', "„": '"', "«": '"', "»": '"',
    "‘": "'", "’": "'", "‚": "'", "′": "'",
    "‒": "-", "–": "-", "—": "-", "―": "-",
    "‐": "-", "‑": "-", "−": "-",
    "…": "...",
    " ": " ",
    "\t": " ",
})

# Default noise rules. An anchored pattern that matches a whole line drops
# the line; any other match is removed in place (span removal).
DEFAULT_BOILERPLATE_RULES = (
    r"\[\d+(?:\s*[,;–-]\s*\d+)*\]",          # citation markers [3], [3,4], [3-5]
    r"(?i)^author information\b.*$",               # author detail headers
    r"(?i)^(?:conflicts? of interest|funding|acknowledge?ments?)\b.*$",
)

_SPACE_RUN = re.compile(r" {2,}")
_SPACE_AROUND_NEWLINE = re.compile(r" *\n *")
_NEWLINE_RUN = re.compile(r"\n{3,}")


@dataclass
class Document:
    """A normalized source document with provenance.

    ``text`` obeys the corpus whitespace rules: no control characters other
    than newline, no double spaces, at most two consecutive newlines.
    """

    doc_id: str
    title: str
    source: str
    text: str
    metadata: dict[str, str] = field(default_factory=dict)


@dataclass
class Corpus:
    """Documents in ingestion order with pairwise-distinct ids."""

    name: str
    documents: list[Document] = field(default_factory=list)


@dataclass
class IngestResult:
    """Documents produced from one file plus the skip report."""

    documents: list[Document]
    skipped: int = 0


class _TextExtractor(HTMLParser):
    """Best-effort HTML-to-text walk; unclosed tags are treated as boundaries."""

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.parts: list[str] = []
        self._drop_depth = 0

    def _ensure_break(self, want: str):
        if not self.parts:
            return
        tail = "".join(self.parts[-2:])[-2:]
        if want == "\n":
            if not tail.endswith("\n"):
                self.parts.append("\n")
        elif not tail.endswith("\n\n"):
            self.parts.append("\n" if tail.endswith("\n") else "\n\n")

    def _on_tag(self, tag: str):
        if tag in _PARAGRAPH_TAGS:
            self._ensure_break("\n\n")
        elif tag in _BLOCK_TAGS:
            self._ensure_break("\n")

    def handle_starttag(self, tag, attrs):
        if tag in _DROP_TAGS:
            self._drop_depth += 1
        self._on_tag(tag)

    def handle_endtag(self, tag):
        if tag in _DROP_TAGS and self._drop_depth > 0:
            self._drop_depth -= 1
        self._on_tag(tag)

    def handle_data(self, data):
        if self._drop_depth == 0 and data:
            self.parts.append(data)

    def text(self) -> str:
        out = "".join(self.parts).replace(" ", " ")
        out = _SPACE_AROUND_NEWLINE.sub("\n", out)
        out = _NEWLINE_RUN.sub("\n\n", out)
        return out.strip()


def strip_html(raw: str) -> str:
    """Remove markup from ``raw``: tags dropped, entities decoded,
    script/style contents discarded, block boundaries become newlines."""
    parser = _TextExtractor()
    parser.feed(raw)
    parser.close()
    return parser.text()


def normalize_text(raw: str) -> str:
    """Canonical text normalization; idempotent.

    NFC composition, curly quotes/dashes to ASCII, tabs to spaces, control
    characters removed (newline kept), space runs collapsed, three or more
    newlines collapsed to two, surrounding whitespace trimmed.
    """
    text = unicodedata.normalize("NFC", raw)
    text = text.replace("\r\n", "\n").replace("\r", "\n")
    text = text.translate(_CHAR_MAP)
    text = "".join(
        ch for ch in text
        if ch == "\n" or unicodedata.category(ch) not in ("Cc", "Cf")
    )
    text = _SPACE_RUN.sub(" ", text)
    text = _SPACE_AROUND_NEWLINE.sub("\n", text)
    text = _NEWLINE_RUN.sub("\n\n", text)
    return text.strip()


def strip_boilerplate(text: str, rules: Iterable[str] = DEFAULT_BOILERPLATE_RULES) -> str:
    """Drop noise lines/spans and cut everything from a References or
    Bibliography header line to the end of the document."""
    lines = text.split("\n")
    for i, line in enumerate(lines):
        if line.strip().lower() in ("references", "bibliography"):
            lines = lines[:i]
            break

    compiled = [re.compile(r) for r in rules]
    kept: list[str] = []
    for line in lines:
        dropped = False
        for rule in compiled:
            if rule.fullmatch(line.strip()):
                dropped = True
                break
        if dropped:
            continue
        for rule in compiled:
            line, n = rule.subn("", line)
            if n:
                line = _SPACE_RUN.sub(" ", line).rstrip()
        kept.append(line)
    return "\n".join(kept).strip()


def _clean(raw: str, *, html: bool, rules: Iterable[str]) -> str:
    if html:
        raw = strip_html(raw)
    return normalize_text(strip_boilerplate(raw, rules))


def _build_document(
    raw_text: str,
    *,
    doc_id: str,
    title: str,
    source: str,
    metadata: dict[str, str],
    html: bool,
    rules: Iterable[str],
) -> Document:
    text = _clean(raw_text, html=html, rules=rules)
    if not text:
        raise EmptyAfterNormalization(doc_id)
    return Document(doc_id=doc_id, title=title, source=source, text=text, metadata=metadata)


def _coerce_metadata(value: object, record_index: int) -> dict[str, str]:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise MalformedRecord(record_index, "metadata must be an object")
    return {str(k): str(v) for k, v in value.items()}


def _record_to_document(
    record: object,
    *,
    index: int,
    stem: str,
    source: str,
    html: bool,
    rules: Iterable[str],
    extra_metadata: dict[str, str],
) -> Document:
    if not isinstance(record, dict):
        raise MalformedRecord(index, f"expected an object, got {type(record).__name__}")
    raw_text = record.get("text")
    if not isinstance(raw_text, str):
        raise MalformedRecord(index, "missing or non-string 'text' field")
    doc_id = record.get("doc_id") or record.get("id") or f"{stem}#{index}"
    metadata = _coerce_metadata(record.get("metadata"), index)
    metadata.update(extra_metadata)
    return _build_document(
        raw_text,
        doc_id=str(doc_id),
        title=str(record.get("title", stem)),
        source=source,
        metadata=metadata,
        html=html,
        rules=rules,
    )


def ingest_file(
    path: str | Path,
    format: str,
    *,
    rules: Iterable[str] = DEFAULT_BOILERPLATE_RULES,
    extra_metadata: dict[str, str] | None = None,
) -> IngestResult:
    """Read one source file and return cleaned documents plus a skip count.

    ``format`` is one of html, json, jsonl, txt. Records that normalize to
    empty text are skipped and counted, not stored.
    """
    path = Path(path)
    extra_metadata = dict(extra_metadata or {})
    if format not in ("html", "json", "jsonl", "txt"):
        raise ValueError(f"unknown format: {format}")
    try:
        raw = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise UnreadableFile(f"{path}: {exc}") from exc

    stem = path.stem
    source = str(path)
    documents: list[Document] = []
    skipped = 0

    def add(builder):
        nonlocal skipped
        try:
            documents.append(builder())
        except EmptyAfterNormalization:
            skipped += 1

    if format in ("txt", "html"):
        add(lambda: _build_document(
            raw, doc_id=f"{stem}#0", title=stem, source=source,
            metadata=dict(extra_metadata), html=(format == "html"), rules=rules,
        ))
    elif format == "json":
        try:
            data = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise MalformedRecord(0, f"invalid JSON: {exc}") from exc
        records = data if isinstance(data, list) else [data]
        for i, record in enumerate(records):
            add(lambda r=record, i=i: _record_to_document(
                r, index=i, stem=stem, source=source, html=False,
                rules=rules, extra_metadata=extra_metadata,
            ))
    else:  # jsonl
        index = 0
        for line in raw.splitlines():
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedRecord(index, f"invalid JSON: {exc}") from exc
            add(lambda r=record, i=index: _record_to_document(
                r, index=i, stem=stem, source=source, html=False,
                rules=rules, extra_metadata=extra_metadata,
            ))
            index += 1

    seen: set[str] = set()
    for doc in documents:
        if doc.doc_id in seen:
            raise MalformedRecord(0, f"duplicate doc_id {doc.doc_id!r}")
        seen.add(doc.doc_id)
    return IngestResult(documents=documents, skipped=skipped)


_REQUIRED_FIELDS = ("doc_id", "title", "source", "text", "metadata")


def write_corpus(corpus: Corpus, path: str | Path) -> None:
    """Persist as JSONL, one document object per line, UTF-8, LF."""
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            for doc in corpus.documents:
                record = {
                    "doc_id": doc.doc_id,
                    "title": doc.title,
                    "source": doc.source,
                    "text": doc.text,
                    "metadata": doc.metadata,
                }
                fh.write(json.dumps(record, ensure_ascii=False) + "\n")
    except OSError as exc:
        raise IoFailure(f"{path}: {exc}") from exc


def read_corpus(path: str | Path, name: str | None = None) -> Corpus:
    """Load a JSONL corpus; the corpus name defaults to the file stem."""
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"{path}: {exc}") from exc

    documents: list[Document] = []
    seen: set[str] = set()
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"invalid JSON: {exc}", line=lineno) from exc
        if not isinstance(record, dict):
            raise SchemaViolation("expected an object", line=lineno)
        for key in _REQUIRED_FIELDS:
            if key not in record:
                raise SchemaViolation(f"missing field {key!r}", line=lineno)
        doc_id = record["doc_id"]
        if not isinstance(doc_id, str) or not doc_id:
            raise SchemaViolation("doc_id must be a non-empty string", line=lineno)
        if doc_id in seen:
            raise SchemaViolation(f"duplicate doc_id {doc_id!r}", line=lineno)
        seen.add(doc_id)
        text = record["text"]
        if not isinstance(text, str) or not text:
            raise SchemaViolation("text must be a non-empty string", line=lineno)
        metadata = record["metadata"]
        if not isinstance(metadata, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in metadata.items()
        ):
            raise SchemaViolation("metadata must be a string-to-string object", line=lineno)
        documents.append(Document(
            doc_id=doc_id,
            title=str(record["title"]),
            source=str(record["source"]),
            text=text,
            metadata=metadata,
        ))
    return Corpus(name=name if name is not None else path.stem, documents=documents)
