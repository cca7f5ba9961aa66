"""Evaluation harness: classification precision, retrieval precision@k,
keyphrase response accuracy, F1, and the error-category distribution,
reported as JSON and an aligned plain-text table.

All metric functions are pure and order-insensitive. Headline
classification precision is the unweighted (macro) mean over domains that
received at least one prediction; "response accuracy" is operationalized
as an answer containing at least 60% of the record's gold keyphrases,
case-insensitively, which makes the harness deterministic and
regression-testable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .classifier import LAW_DOMAINS, DomainLabel
from .errors import EvalInputError

KEYPHRASE_COVERAGE_THRESHOLD = 0.6


class ErrorCategory(str, Enum):
    LEGAL_JARGON = "legal_jargon"
    JURISDICTIONAL_AMBIGUITY = "jurisdictional_ambiguity"
    CONTEXT_MISUNDERSTANDING = "context_misunderstanding"
    OUT_OF_DOMAIN_QUERY = "out_of_domain_query"


ERROR_CATEGORY_TITLES = {
    ErrorCategory.LEGAL_JARGON: "Legal Jargon Complexity",
    ErrorCategory.JURISDICTIONAL_AMBIGUITY: "Jurisdictional Ambiguity",
    ErrorCategory.CONTEXT_MISUNDERSTANDING: "Context Misunderstanding",
    ErrorCategory.OUT_OF_DOMAIN_QUERY: "Out-of-Domain Queries",
}


@dataclass(frozen=True)
class EvalRecord:
    query: str
    gold_domain: DomainLabel
    relevant_chunk_ids: frozenset[str]
    gold_answer_keyphrases: tuple[str, ...]
    error_category_gold: ErrorCategory | None = None

    def __post_init__(self) -> None:
        if self.gold_domain != DomainLabel.OUT_OF_DOMAIN and not self.relevant_chunk_ids:
            raise EvalInputError(
                "relevant_chunk_ids may be empty only for out_of_domain records"
            )


def load_eval_records(source: str | Path | Iterable[str]) -> list[EvalRecord]:
    if isinstance(source, (str, Path)):
        lines: Iterable[str] = Path(source).read_text(encoding="utf-8").splitlines()
    else:
        lines = source
    records = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            category = obj.get("error_category_gold")
            records.append(
                EvalRecord(
                    query=obj["query"],
                    gold_domain=DomainLabel(obj["gold_domain"]),
                    relevant_chunk_ids=frozenset(obj.get("relevant_chunk_ids", [])),
                    gold_answer_keyphrases=tuple(obj.get("gold_answer_keyphrases", [])),
                    error_category_gold=ErrorCategory(category) if category else None,
                )
            )
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise EvalInputError(f"eval records line {line_no}: {exc}") from exc
    return records


@dataclass(frozen=True)
class DomainPrecisionResult:
    per_domain: dict[DomainLabel, float]  # only domains with >= 1 prediction
    macro: float
    undefined_domains: tuple[DomainLabel, ...]


def domain_precision(
    predictions: Sequence[DomainLabel], golds: Sequence[DomainLabel]
) -> DomainPrecisionResult:
    """Per-domain precision TP/(TP+FP) over the five law domains; domains
    never predicted are undefined and excluded from the macro mean."""
    if len(predictions) != len(golds):
        raise EvalInputError(
            f"predictions ({len(predictions)}) and golds ({len(golds)}) differ in length"
        )
    tp = {d: 0 for d in LAW_DOMAINS}
    fp = {d: 0 for d in LAW_DOMAINS}
    for pred, gold in zip(predictions, golds):
        if pred == DomainLabel.OUT_OF_DOMAIN:
            continue
        if pred == gold:
            tp[pred] += 1
        else:
            fp[pred] += 1
    per_domain = {}
    undefined = []
    for domain in LAW_DOMAINS:
        predicted = tp[domain] + fp[domain]
        if predicted == 0:
            undefined.append(domain)
        else:
            per_domain[domain] = tp[domain] / predicted
    macro = sum(per_domain.values()) / len(per_domain) if per_domain else 0.0
    return DomainPrecisionResult(
        per_domain=per_domain, macro=macro, undefined_domains=tuple(undefined)
    )


def domain_recall(
    predictions: Sequence[DomainLabel], golds: Sequence[DomainLabel]
) -> float:
    """Macro recall TP/(TP+FN) over law domains present in the golds; feeds F1."""
    if len(predictions) != len(golds):
        raise EvalInputError("predictions and golds differ in length")
    tp = {d: 0 for d in LAW_DOMAINS}
    fn = {d: 0 for d in LAW_DOMAINS}
    for pred, gold in zip(predictions, golds):
        if gold == DomainLabel.OUT_OF_DOMAIN:
            continue
        if pred == gold:
            tp[gold] += 1
        else:
            fn[gold] += 1
    rates = []
    for domain in LAW_DOMAINS:
        total = tp[domain] + fn[domain]
        if total:
            rates.append(tp[domain] / total)
    return sum(rates) / len(rates) if rates else 0.0


@dataclass(frozen=True)
class RetrievalPrecisionResult:
    rate: float
    evaluated: int
    excluded_no_relevant: int


def retrieval_precision_at_k(
    results: Sequence[Sequence[str]],
    golds: Sequence[frozenset[str] | set[str]],
    k: int,
) -> RetrievalPrecisionResult:
    """Mean over queries of |top-k hits that are relevant| / min(k, |top-k|).

    Queries with an empty relevant set are excluded from the mean and
    counted separately; a query that retrieved nothing scores 0.
    """
    if k < 1:
        raise EvalInputError("k must be >= 1")
    if len(results) != len(golds):
        raise EvalInputError("results and golds differ in length")
    rates = []
    excluded = 0
    for retrieved, relevant in zip(results, golds):
        if not relevant:
            excluded += 1
            continue
        top_k = list(retrieved)[:k]
        if not top_k:
            rates.append(0.0)
            continue
        hits = sum(1 for chunk_id in top_k if chunk_id in relevant)
        rates.append(hits / min(k, len(top_k)))
    rate = sum(rates) / len(rates) if rates else 0.0
    return RetrievalPrecisionResult(rate=rate, evaluated=len(rates), excluded_no_relevant=excluded)


def keyphrase_coverage(answer: str, keyphrases: Sequence[str]) -> float:
    if not keyphrases:
        return 1.0
    text = answer.lower()
    matched = sum(1 for phrase in keyphrases if phrase.lower() in text)
    return matched / len(keyphrases)


def is_accurate(answer: str, record: EvalRecord) -> bool:
    return keyphrase_coverage(answer, record.gold_answer_keyphrases) >= KEYPHRASE_COVERAGE_THRESHOLD


def response_accuracy(answers: Sequence[str], records: Sequence[EvalRecord]) -> float:
    """Fraction of answers covering >= 60% of their record's keyphrases."""
    if len(answers) != len(records):
        raise EvalInputError("answers and records differ in length")
    if not answers:
        return 0.0
    accurate = sum(1 for answer, record in zip(answers, records) if is_accurate(answer, record))
    return accurate / len(answers)


def f1(precision: float, recall: float) -> float:
    for name, value in (("precision", precision), ("recall", recall)):
        if not 0.0 <= value <= 1.0:
            raise EvalInputError(f"{name} must be in [0, 1], got {value}")
    if precision == 0.0 and recall == 0.0:
        raise EvalInputError("f1 is undefined when precision and recall are both 0")
    return 2 * precision * recall / (precision + recall)


def error_distribution(
    failures: Iterable[ErrorCategory],
) -> dict[ErrorCategory, float]:
    """Failure counts per category as percentages of all failures."""
    counts = {c: 0 for c in ErrorCategory}
    total = 0
    for category in failures:
        counts[ErrorCategory(category)] += 1
        total += 1
    if total == 0:
        return {}
    return {c: counts[c] * 100.0 / total for c in ErrorCategory if counts[c]}


@dataclass
class EvalReport:
    per_domain_precision: dict[DomainLabel, float]
    macro_precision: float
    macro_recall: float
    retrieval_precision: float
    retrieval_k: int
    retrieval_evaluated: int
    retrieval_excluded: int
    response_accuracy: float
    f1_score: float
    error_distribution: dict[ErrorCategory, float]
    n_queries: int
    n_failures: int
    undefined_domains: tuple[DomainLabel, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        return {
            "per_domain_precision": {d.value: p for d, p in self.per_domain_precision.items()},
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "retrieval_precision_at_k": self.retrieval_precision,
            "retrieval_k": self.retrieval_k,
            "retrieval_evaluated": self.retrieval_evaluated,
            "retrieval_excluded_no_relevant": self.retrieval_excluded,
            "response_accuracy": self.response_accuracy,
            "f1_score": self.f1_score,
            "error_distribution": {c.value: p for c, p in self.error_distribution.items()},
            "n_queries": self.n_queries,
            "n_failures": self.n_failures,
            "undefined_domains": [d.value for d in self.undefined_domains],
        }

    def format_tables(self) -> str:
        """Aligned plain-text report: headline metrics, per-domain precision,
        error-category distribution."""
        width = 34
        lines = []
        lines.append("System Evaluation Results")
        lines.append("-" * (width + 8))
        lines.append(f"{'Metric':<{width}}{'Score':>8}")
        lines.append(
            f"{'Domain Classification Precision':<{width}}{_pct(self.macro_precision):>8}"
        )
        lines.append(
            f"{'RAG Retrieval Precision':<{width}}{_pct(self.retrieval_precision):>8}"
        )
        lines.append(f"{'Response Accuracy':<{width}}{_pct(self.response_accuracy):>8}")
        lines.append(f"{'F1-Score':<{width}}{self.f1_score:>8.2f}")
        lines.append("")
        lines.append("Per-Domain Classification Precision")
        lines.append("-" * (width + 8))
        for domain in LAW_DOMAINS:
            if domain in self.per_domain_precision:
                value = _pct(self.per_domain_precision[domain])
            else:
                value = "n/a"
            lines.append(f"{domain.value.title():<{width}}{value:>8}")
        lines.append("")
        lines.append("Error Category Distribution")
        lines.append("-" * (width + 8))
        lines.append(f"{'Error Type':<{width}}{'Percentage':>8}")
        if self.error_distribution:
            for category in ErrorCategory:
                if category in self.error_distribution:
                    lines.append(
                        f"{ERROR_CATEGORY_TITLES[category]:<{width}}"
                        f"{_pct(self.error_distribution[category] / 100.0):>8}"
                    )
        else:
            lines.append(f"{'(no failures)':<{width}}{'':>8}")
        return "\n".join(lines)


def _pct(rate: float) -> str:
    return f"{round(rate * 100):d}%"


def build_report(
    predictions: Sequence[DomainLabel],
    golds: Sequence[DomainLabel],
    retrieved: Sequence[Sequence[str]],
    relevant: Sequence[frozenset[str] | set[str]],
    answers: Sequence[str],
    records: Sequence[EvalRecord],
    k: int,
) -> EvalReport:
    """Assemble the full report from aligned pipeline outputs.

    A record counts as a failure when its answer misses the keyphrase bar
    or its domain prediction is wrong; the error distribution is computed
    over failing records that carry a gold error category.
    """
    precision = domain_precision(predictions, golds)
    recall = domain_recall(predictions, golds)
    retrieval = retrieval_precision_at_k(retrieved, relevant, k)
    accuracy = response_accuracy(answers, records)
    try:
        f1_value = f1(precision.macro, recall)
    except EvalInputError:
        f1_value = 0.0

    failures: list[ErrorCategory] = []
    n_failures = 0
    for pred, record, answer in zip(predictions, records, answers):
        failed = (pred != record.gold_domain) or not is_accurate(answer, record)
        if failed:
            n_failures += 1
            if record.error_category_gold is not None:
                failures.append(record.error_category_gold)

    return EvalReport(
        per_domain_precision=precision.per_domain,
        macro_precision=precision.macro,
        macro_recall=recall,
        retrieval_precision=retrieval.rate,
        retrieval_k=k,
        retrieval_evaluated=retrieval.evaluated,
        retrieval_excluded=retrieval.excluded_no_relevant,
        response_accuracy=accuracy,
        f1_score=f1_value,
        error_distribution=error_distribution(failures),
        n_queries=len(records),
        n_failures=n_failures,
        undefined_domains=precision.undefined_domains,
    )
