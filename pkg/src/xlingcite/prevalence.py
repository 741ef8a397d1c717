"""Prevalence statistics: how often, where, and when cross-lingual citations occur."""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Optional

from .corpus import Document
from .markers import DetectionSet

HIST_BINS = 50  # width 0.02 over [0, 1]


class InvariantError(ValueError):
    pass


def _ratio(num: int, den: int) -> Fraction:
    return Fraction(num, den) if den else Fraction(0)


@dataclass
class PrevalenceReport:
    xling_refs: int
    total_refs: int
    xling_docs: int
    total_docs: int
    # number of distinct non-English languages cited -> number of docs
    docs_by_language_count: dict[int, int] = field(default_factory=dict)
    # language -> (reference count, document count)
    per_language: dict[str, tuple[int, int]] = field(default_factory=dict)

    @property
    def ref_ratio(self) -> Fraction:
        return _ratio(self.xling_refs, self.total_refs)

    @property
    def doc_ratio(self) -> Fraction:
        return _ratio(self.xling_docs, self.total_docs)

    @property
    def one_in_n_docs(self) -> Optional[float]:
        """Docs per doc with a cross-lingual citation (the "1 in N" figure)."""
        return self.total_docs / self.xling_docs if self.xling_docs else None

    def rows(self) -> list[dict]:
        return [
            {"metric": "refs", "count": self.xling_refs, "total": self.total_refs, "ratio": fmt(self.ref_ratio)},
            {"metric": "docs", "count": self.xling_docs, "total": self.total_docs, "ratio": fmt(self.doc_ratio)},
        ]

    def language_rows(self) -> list[dict]:
        items = sorted(self.per_language.items(), key=lambda kv: (-kv[1][0], -kv[1][1], kv[0]))
        return [{"language": lang, "references": r, "documents": d} for lang, (r, d) in items]

    def histogram_rows(self) -> list[dict]:
        return [{"languages": k, "documents": v} for k, v in sorted(self.docs_by_language_count.items())]


def fmt(value, digits: int = 6) -> str:
    """Render a ratio with at least four significant digits, locale-free."""
    if value is None:
        return ""
    if isinstance(value, Fraction) and value.denominator == 1:
        return str(value.numerator)
    x = float(value)
    if x == 0:
        return "0"
    return f"{x:.{digits}g}" if abs(x) < 1 else f"{x:.{digits}f}".rstrip("0").rstrip(".")


def prevalence_summary(docs: Iterable[Document], detections: DetectionSet) -> PrevalenceReport:
    by_doc = detections.by_doc()
    total_docs = total_refs = 0
    for doc in docs:
        total_docs += 1
        total_refs += len(doc.references)
    lang_refs: Counter = Counter(c.language for c in detections.citations)
    lang_docs: Counter = Counter()
    hist: Counter = Counter()
    for cites in by_doc.values():
        langs = {c.language for c in cites}
        lang_docs.update(langs)
        hist[len(langs)] += 1
    return PrevalenceReport(
        xling_refs=len(detections.citations),
        total_refs=total_refs,
        xling_docs=len(by_doc),
        total_docs=total_docs,
        docs_by_language_count=dict(hist),
        per_language={l: (lang_refs[l], lang_docs[l]) for l in lang_refs},
    )


def grouped_doc_rates(
    docs: Iterable[Document],
    detections: DetectionSet,
    group: str = "year",
    language_filter: Optional[str] = None,
) -> dict:
    """Share of documents per group with at least one matching citation.

    The denominator counts all documents of the group. Empty groups are
    absent from the result.
    """
    if group not in ("year", "discipline"):
        raise ValueError(f"unknown group {group!r}")
    hits = {
        c.doc_id
        for c in detections.citations
        if language_filter is None or c.language == language_filter
    }
    totals: Counter = Counter()
    matched: Counter = Counter()
    for doc in docs:
        key = getattr(doc, group)
        totals[key] += 1
        if doc.doc_id in hits:
            matched[key] += 1
    return {key: Fraction(matched[key], totals[key]) for key in sorted(totals)}


def rate_rows(rates: dict, group: str, language: Optional[str] = None) -> list[dict]:
    return [
        {group: key, "language": language or "all", "rate": fmt(rate)}
        for key, rate in rates.items()
    ]


@dataclass(frozen=True)
class CrossLinguality:
    doc_id: str
    value: Fraction


@dataclass
class CrossLingualitySummary:
    values: list[CrossLinguality]
    mean: Fraction
    sd: float  # population standard deviation
    per_discipline_mean: dict[str, Fraction]
    per_discipline_count: dict[str, int] = field(default_factory=dict)
    empty_reference_docs: int = 0

    def histogram(self, bins: int = HIST_BINS) -> list[int]:
        counts = [0] * bins
        for v in self.values:
            counts[min(math.floor(v.value * bins), bins - 1)] += 1
        return counts

    def histogram_rows(self, bins: int = HIST_BINS) -> list[dict]:
        return [
            {"bin_start": fmt(Fraction(i, bins)), "bin_end": fmt(Fraction(i + 1, bins)), "documents": n}
            for i, n in enumerate(self.histogram(bins))
        ]


def mean_and_pstdev(values: list[Fraction]) -> tuple[Fraction, float]:
    """Exact mean and population standard deviation."""
    if not values:
        return Fraction(0), 0.0
    n = len(values)
    mean = sum(values, Fraction(0)) / n
    var = sum(((v - mean) ** 2 for v in values), Fraction(0)) / n
    return mean, math.sqrt(var)


def cross_linguality(docs: Iterable[Document], detections: DetectionSet) -> CrossLingualitySummary:
    """Cross-lingual share of each reference section, over documents with ≥1 detection."""
    counts = Counter(c.doc_id for c in detections.citations)
    values: list[CrossLinguality] = []
    by_disc: dict[str, list[Fraction]] = defaultdict(list)
    empty = 0
    for doc in docs:
        n_x = counts.get(doc.doc_id, 0)
        if not doc.references:
            if n_x:
                raise InvariantError(f"doc {doc.doc_id} has detections but no references")
            empty += 1
            continue
        if not n_x:
            continue
        if n_x > len(doc.references):
            raise InvariantError(f"doc {doc.doc_id} has more detections than references")
        value = Fraction(n_x, len(doc.references))
        values.append(CrossLinguality(doc.doc_id, value))
        by_disc[doc.discipline].append(value)
    mean, sd = mean_and_pstdev([v.value for v in values])
    return CrossLingualitySummary(
        values=values,
        mean=mean,
        sd=sd,
        per_discipline_mean={d: mean_and_pstdev(vs)[0] for d, vs in sorted(by_disc.items())},
        per_discipline_count={d: len(vs) for d, vs in sorted(by_disc.items())},
        empty_reference_docs=empty,
    )


def language_pair_counts(detections: DetectionSet) -> list[tuple[tuple[str, str], int]]:
    """Documents citing both languages of each unordered pair, most common first."""
    pairs: Counter = Counter()
    for cites in detections.by_doc().values():
        langs = sorted({c.language for c in cites})
        pairs.update(combinations(langs, 2))
    return sorted(pairs.items(), key=lambda kv: (-kv[1], kv[0]))


def pair_rows(pairs: list[tuple[tuple[str, str], int]]) -> list[dict]:
    return [{"language_a": a, "language_b": b, "documents": n} for (a, b), n in pairs]
