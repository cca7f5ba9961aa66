"""Query domain classification: weighted lexicon hits blended with centroid similarity.

The classifier is deliberately training-free. Each of the five law domains
gets a hybrid score

    score_d = w_lex * (sum of weights of lexicon terms present in the query)
            + w_emb * max(0, cosine(query embedding, domain centroid))

and the winner takes the label when its score clears the threshold,
otherwise the query is out_of_domain. Term matching is lowercase with word
boundaries; a term counts once no matter how often it occurs. Ties break by
the fixed domain order below.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .corpus import Corpus, chunk_document
from .embedding import Embedder, normalize
from .errors import ClassifierError, RuleFileError


class DomainLabel(str, Enum):
    CONSTITUTIONAL = "constitutional"
    CRIMINAL = "criminal"
    CIVIL = "civil"
    FAMILY = "family"
    CORPORATE = "corporate"
    OUT_OF_DOMAIN = "out_of_domain"


# fixed tie-break order
LAW_DOMAINS = (
    DomainLabel.CONSTITUTIONAL,
    DomainLabel.CRIMINAL,
    DomainLabel.CIVIL,
    DomainLabel.FAMILY,
    DomainLabel.CORPORATE,
)

DEFAULT_W_LEX = 0.5
DEFAULT_W_EMB = 0.5
DEFAULT_THRESHOLD = 0.15


@dataclass(frozen=True)
class Classification:
    label: DomainLabel
    scores: dict[DomainLabel, float]
    confidence: float


@dataclass(frozen=True)
class LexiconEntry:
    domain: DomainLabel
    term: str
    weight: float


def load_lexicon(source: str | Path | Iterable[str]) -> list[LexiconEntry]:
    """Read line-delimited {domain, term, weight} records."""
    if isinstance(source, (str, Path)):
        lines: Iterable[str] = Path(source).read_text(encoding="utf-8").splitlines()
    else:
        lines = source
    entries: list[LexiconEntry] = []
    for line_no, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            domain = DomainLabel(obj["domain"])
            term = str(obj["term"]).strip().lower()
            weight = float(obj["weight"])
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise RuleFileError(f"lexicon line {line_no}: {exc}") from exc
        if not term:
            raise RuleFileError(f"lexicon line {line_no}: empty term")
        if domain == DomainLabel.OUT_OF_DOMAIN:
            raise RuleFileError(f"lexicon line {line_no}: out_of_domain cannot carry terms")
        if weight <= 0:
            raise RuleFileError(f"lexicon line {line_no}: weight must be > 0")
        entries.append(LexiconEntry(domain, term, weight))
    return entries


def _term_pattern(term: str) -> re.Pattern[str]:
    # word boundaries via lookarounds so terms with punctuation still anchor
    return re.compile(r"(?<!\w)" + re.escape(term) + r"(?!\w)")


def argmax_domain(scores: Mapping[DomainLabel, float]) -> DomainLabel:
    """Highest-scoring law domain; ties break by the fixed domain order.

    Pure and scale-invariant: multiplying every score by c > 0 never
    changes the winner.
    """
    best = LAW_DOMAINS[0]
    best_score = scores.get(best, 0.0)
    for domain in LAW_DOMAINS[1:]:
        score = scores.get(domain, 0.0)
        if score > best_score:
            best, best_score = domain, score
    return best


def build_centroids(
    corpus: Corpus,
    embedder: Embedder,
    chunk_tokens: int = 1000,
    overlap_tokens: int = 200,
) -> dict[DomainLabel, np.ndarray]:
    """L2-normalized mean vector of each domain's labeled chunks.

    Domains with no labeled chunks are simply absent; the classifier then
    scores them from the lexicon alone.
    """
    sums: dict[DomainLabel, np.ndarray] = {}
    counts: dict[DomainLabel, int] = {}
    for doc in corpus:
        if doc.domain is None:
            continue
        domain = DomainLabel(doc.domain)
        for chunk in chunk_document(doc, chunk_tokens, overlap_tokens):
            vec = np.asarray(embedder.embed(chunk.text), dtype=np.float64)
            if domain in sums:
                sums[domain] += vec
                counts[domain] += 1
            else:
                sums[domain] = vec.copy()
                counts[domain] = 1
    return {d: normalize(sums[d] / counts[d]) for d in sums}


class DomainClassifier:
    """Deterministic hybrid classifier; immutable after construction."""

    def __init__(
        self,
        lexicon: Iterable[LexiconEntry],
        embedder: Embedder | None = None,
        centroids: Mapping[DomainLabel, np.ndarray] | None = None,
        w_lex: float = DEFAULT_W_LEX,
        w_emb: float = DEFAULT_W_EMB,
        threshold: float = DEFAULT_THRESHOLD,
    ):
        self._compiled: list[tuple[DomainLabel, re.Pattern[str], float]] = [
            (entry.domain, _term_pattern(entry.term), entry.weight) for entry in lexicon
        ]
        self._embedder = embedder
        self._centroids = {
            d: np.asarray(v, dtype=np.float64) for d, v in (centroids or {}).items()
        }
        self.w_lex = w_lex
        self.w_emb = w_emb
        self.threshold = threshold

    def lexicon_scores(self, query: str) -> dict[DomainLabel, float]:
        text = query.lower()
        scores = {d: 0.0 for d in LAW_DOMAINS}
        for domain, pattern, weight in self._compiled:
            if pattern.search(text):
                scores[domain] += weight
        return scores

    def classify(self, query: str) -> Classification:
        if not query or not query.strip():
            raise ClassifierError("cannot classify an empty query")
        scores = self.lexicon_scores(query)
        for domain in scores:
            scores[domain] *= self.w_lex
        if self._embedder is not None and self._centroids:
            qv = np.asarray(self._embedder.embed(query), dtype=np.float64)
            for domain, centroid in self._centroids.items():
                sim = max(0.0, float(np.dot(qv, centroid)))
                scores[domain] += self.w_emb * sim
        top = argmax_domain(scores)
        max_score = scores[top]
        total = sum(scores.values())
        confidence = max_score / total if total > 0 else 0.0
        label = top if max_score >= self.threshold else DomainLabel.OUT_OF_DOMAIN
        return Classification(label=label, scores=scores, confidence=confidence)
