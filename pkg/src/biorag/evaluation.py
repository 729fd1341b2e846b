"""Multi-configuration evaluation harness.

Runs every (question, configuration) combination through the answer
pipeline, scores each generated answer against its reference with exact
match, BLEU-4 and embedding F1, and writes a per-record JSONL plus a
per-configuration CSV summary. Failures on individual questions become
errored records: counted, excluded from the means.
"""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import engine
from .embedding import EmbeddingProviderConfig, embed_batch
from .errors import BioragError, IoFailure, SchemaViolation
from .index import RetrievalConfig, VectorIndex
from .engine import GenerationConfig
from .metrics import (
    BertScoreResult,
    BleuResult,
    bert_score,
    bleu4,
    bleu_tokenize,
    exact_match,
    word_tokenize,
)


@dataclass
class QAPair:
    qid: str
    question: str
    reference_answer: str
    tags: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.question or not self.reference_answer:
            raise SchemaViolation(f"QA pair {self.qid!r}: question and reference required")


@dataclass
class EvalConfig:
    name: str
    retrieval: RetrievalConfig
    generation: GenerationConfig


@dataclass
class EvalRecord:
    qid: str
    config_name: str
    generated_answer: str
    em: int
    bleu: BleuResult | None
    bert: BertScoreResult | None
    error: str | None = None


@dataclass
class ConfigAggregate:
    config_name: str
    n: int
    mean_em: float
    mean_bleu: float
    mean_bert_f1: float
    errors: int = 0


@dataclass
class MetricReport:
    aggregates: list[ConfigAggregate]


def _token_matrix(text: str, provider: EmbeddingProviderConfig) -> np.ndarray | None:
    tokens = word_tokenize(text)
    if not tokens:
        return None
    return np.stack(embed_batch(tokens, provider))


def score_answer(
    candidate: str,
    reference: str,
    provider: EmbeddingProviderConfig,
) -> tuple[int, BleuResult, BertScoreResult]:
    """All three metrics for one candidate/reference pair.

    A candidate with no embeddable tokens scores zero on the embedding
    metric instead of erroring; an empty reference likewise.
    """
    em = exact_match(candidate, reference)
    bleu = bleu4(bleu_tokenize(candidate), bleu_tokenize(reference))
    ref_mat = _token_matrix(reference, provider)
    cand_mat = _token_matrix(candidate, provider)
    if ref_mat is None or cand_mat is None:
        bert = BertScoreResult(0.0, 0.0, 0.0)
    else:
        bert = bert_score(ref_mat, cand_mat)
    return em, bleu, bert


def run_eval(
    pairs: list[QAPair],
    configs: list[EvalConfig],
    index: VectorIndex | None,
    provider: EmbeddingProviderConfig,
) -> tuple[MetricReport, list[EvalRecord]]:
    """Evaluate every configuration over every pair."""
    if not pairs or not configs:
        raise ValueError("need at least one QA pair and one configuration")

    records: list[EvalRecord] = []
    for cfg in configs:
        for pair in pairs:
            try:
                answer = engine.ask(
                    pair.question, index, provider, cfg.retrieval, cfg.generation
                )
                em, bleu, bert = score_answer(answer.text, pair.reference_answer, provider)
                records.append(EvalRecord(
                    qid=pair.qid,
                    config_name=cfg.name,
                    generated_answer=answer.text,
                    em=em,
                    bleu=bleu,
                    bert=bert,
                ))
            except BioragError as exc:
                records.append(EvalRecord(
                    qid=pair.qid,
                    config_name=cfg.name,
                    generated_answer="",
                    em=0,
                    bleu=None,
                    bert=None,
                    error=f"{type(exc).__name__}: {exc}",
                ))

    records.sort(key=lambda rec: (rec.qid, rec.config_name))
    aggregates = []
    for cfg in configs:
        ok = [r for r in records if r.config_name == cfg.name and r.error is None]
        errors = sum(1 for r in records if r.config_name == cfg.name and r.error is not None)
        n = len(ok)
        aggregates.append(ConfigAggregate(
            config_name=cfg.name,
            n=n,
            mean_em=sum(r.em for r in ok) / n if n else 0.0,
            mean_bleu=sum(r.bleu.score for r in ok) / n if n else 0.0,
            mean_bert_f1=sum(r.bert.f1 for r in ok) / n if n else 0.0,
            errors=errors,
        ))
    return MetricReport(aggregates=aggregates), records


def write_report(report: MetricReport, records: list[EvalRecord], out_dir: str | Path) -> None:
    """Emit records.jsonl and summary.csv with deterministic bytes."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        with (out_dir / "records.jsonl").open("w", encoding="utf-8", newline="\n") as fh:
            for record in records:
                fh.write(json.dumps(asdict(record), ensure_ascii=False, sort_keys=True) + "\n")
        with (out_dir / "summary.csv").open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["config_name", "n", "mean_em", "mean_bleu", "mean_bert_f1"])
            for agg in report.aggregates:
                writer.writerow([
                    agg.config_name,
                    agg.n,
                    f"{agg.mean_em:.6f}",
                    f"{agg.mean_bleu:.6f}",
                    f"{agg.mean_bert_f1:.6f}",
                ])
    except OSError as exc:
        raise IoFailure(f"{out_dir}: {exc}") from exc


def read_qa_pairs(path: str | Path) -> list[QAPair]:
    """JSONL with keys qid, question, reference_answer, tags."""
    path = Path(path)
    try:
        raw = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"{path}: {exc}") from exc
    pairs: list[QAPair] = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaViolation(f"invalid JSON: {exc}", line=lineno) from exc
        try:
            pairs.append(QAPair(
                qid=str(record["qid"]),
                question=record["question"],
                reference_answer=record["reference_answer"],
                tags={str(k): str(v) for k, v in record.get("tags", {}).items()},
            ))
        except (KeyError, TypeError) as exc:
            raise SchemaViolation(f"bad QA pair: {exc}", line=lineno) from exc
    return pairs


def read_eval_configs(path: str | Path) -> list[EvalConfig]:
    """JSON array of {name, retrieval, generation} objects."""
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoFailure(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaViolation(f"invalid JSON: {exc}") from exc
    if not isinstance(data, list):
        raise SchemaViolation("expected a JSON array of configurations")
    configs: list[EvalConfig] = []
    for i, item in enumerate(data):
        try:
            configs.append(EvalConfig(
                name=str(item["name"]),
                retrieval=RetrievalConfig(**item.get("retrieval", {})),
                generation=GenerationConfig(**item.get("generation", {})),
            ))
        except (KeyError, TypeError) as exc:
            raise SchemaViolation(f"config {i}: {exc}") from exc
    return configs
