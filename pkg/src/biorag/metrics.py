"""Answer-quality metrics: exact match, sentence BLEU-4, embedding F1.

BLEU is the textbook sentence-level definition: clipped n-gram precisions
for n = 1..4, uniform 1/4 weights in the geometric mean, brevity penalty
exp(1 - r/c) when the candidate is shorter than the reference. Unsmoothed
by default, so any zero precision zeroes the score; an optional add-one
smoothing flag softens the higher orders.

The embedding F1 metric greedily matches unit-norm token embeddings:
recall averages each reference token's best match among candidate tokens,
precision the reverse, and F1 is their harmonic mean.
"""

from __future__ import annotations

import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, EmptyMatrix, RowNotNormalized

_ARTICLES = {"a", "an", "the"}
_WS_RUN = re.compile(r"\s+")
_BLEU_TOKEN = re.compile(r"\w+|[^\w\s]")
_WORD = re.compile(r"\w+")

ROW_NORM_TOLERANCE = 1e-6


def normalize_answer(s: str) -> str:
    """Lowercase, drop punctuation and English articles, squeeze whitespace."""
    s = s.lower()
    s = "".join(ch for ch in s if not unicodedata.category(ch).startswith("P"))
    tokens = [t for t in _WS_RUN.split(s) if t and t not in _ARTICLES]
    return " ".join(tokens)


def exact_match(candidate: str, reference: str) -> int:
    return int(normalize_answer(candidate) == normalize_answer(reference))


def bleu_tokenize(s: str) -> list[str]:
    """Lowercase and split on whitespace with punctuation as own tokens."""
    return _BLEU_TOKEN.findall(s.lower())


def word_tokenize(s: str) -> list[str]:
    """Alphanumeric tokens only, for embedding-based scoring."""
    return _WORD.findall(s.lower())


@dataclass
class BleuResult:
    score: float
    precisions: tuple[float, float, float, float]
    brevity_penalty: float
    candidate_len: int
    reference_len: int


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def bleu4(
    candidate_tokens: list[str],
    reference_tokens: list[str],
    smooth: bool = False,
) -> BleuResult:
    """Sentence BLEU with modified (clipped) n-gram precision, n = 1..4."""
    c = len(candidate_tokens)
    r = len(reference_tokens)
    if c == 0:
        return BleuResult(0.0, (0.0, 0.0, 0.0, 0.0), 0.0, 0, r)

    precisions: list[float] = []
    for n in range(1, 5):
        cand_counts = _ngrams(candidate_tokens, n)
        total = sum(cand_counts.values())
        if total == 0:
            precisions.append(0.0)
            continue
        ref_counts = _ngrams(reference_tokens, n)
        clipped = sum(min(count, ref_counts[gram]) for gram, count in cand_counts.items())
        if smooth and n >= 2:
            precisions.append((clipped + 1) / (total + 1))
        else:
            precisions.append(clipped / total)

    bp = 1.0 if c > r else math.exp(1.0 - r / c)
    if all(p > 0 for p in precisions):
        score = bp * math.exp(sum(math.log(p) for p in precisions) / 4.0)
    else:
        score = 0.0
    return BleuResult(
        score=score,
        precisions=tuple(precisions),
        brevity_penalty=bp,
        candidate_len=c,
        reference_len=r,
    )


@dataclass
class BertScoreResult:
    precision: float
    recall: float
    f1: float


def _check_rows(mat: np.ndarray, label: str) -> np.ndarray:
    mat = np.asarray(mat, dtype=np.float64)
    if mat.ndim != 2 or mat.shape[0] == 0:
        raise EmptyMatrix(f"{label} must be a non-empty 2-D matrix")
    norms = np.linalg.norm(mat, axis=1)
    bad = np.abs(norms - 1.0) > ROW_NORM_TOLERANCE
    if np.any(bad):
        raise RowNotNormalized(
            f"{label} rows {np.flatnonzero(bad).tolist()} are not unit-norm"
        )
    return mat


def bert_score(ref_emb: np.ndarray, cand_emb: np.ndarray) -> BertScoreResult:
    """Greedy token matching over unit-norm embedding rows."""
    ref = _check_rows(ref_emb, "ref_emb")
    cand = _check_rows(cand_emb, "cand_emb")
    if ref.shape[1] != cand.shape[1]:
        raise DimensionMismatch(f"{ref.shape[1]} vs {cand.shape[1]}")
    sim = np.clip(ref @ cand.T, -1.0, 1.0)
    recall = float(np.mean(np.max(sim, axis=1)))
    precision = float(np.mean(np.max(sim, axis=0)))
    if precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    else:
        f1 = 0.0
    return BertScoreResult(precision=precision, recall=recall, f1=f1)
