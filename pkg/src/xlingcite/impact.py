"""Impact statistics: comparison sets, preprint/published diffs, citations, resolution."""

from __future__ import annotations

import random
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .corpus import Document, MetadataStore, ReferenceEntry
from .markers import DetectionSet, detect_cross_lingual
from .prevalence import mean_and_pstdev
from .registry import LanguageRegistry
from .titles import extract_title


class SamplingError(ValueError):
    pass


def cell_of(doc: Document) -> tuple[int, str]:
    return (doc.year, doc.discipline)


def stratified_random_set(
    docs: Iterable[Document],
    target: Iterable[Document],
    seed: int = 0,
) -> list[str]:
    """Sample doc ids matching ``target``'s (year, discipline) histogram exactly.

    Sampling is uniform without replacement inside each cell and draws from
    the whole corpus, target members included.
    """
    wanted = Counter(cell_of(d) for d in target)
    pools: dict[tuple[int, str], list[str]] = defaultdict(list)
    for doc in docs:
        cell = cell_of(doc)
        if cell in wanted:
            pools[cell].append(doc.doc_id)
    rng = random.Random(seed)
    out: list[str] = []
    for cell in sorted(wanted):
        pool = sorted(pools.get(cell, ()))
        if len(pool) < wanted[cell]:
            year, disc = cell
            raise SamplingError(
                f"cell (year={year}, discipline={disc}) has {len(pool)} docs, {wanted[cell]} needed"
            )
        out.extend(rng.sample(pool, wanted[cell]))
    return sorted(out)


@dataclass(frozen=True)
class PairDiffStats:
    pairs: int
    increased: int
    decreased: int
    delta_sum: int
    sd_delta: float

    @property
    def mean_delta(self) -> Fraction:
        return Fraction(self.delta_sum, self.pairs)

    def row(self, label: str) -> dict:
        return {
            "evaluation": label,
            "pairs": self.pairs,
            "increased": self.increased,
            "decreased": self.decreased,
            "mean": f"{float(self.mean_delta):.2f}",
            "sd": f"{self.sd_delta:.3f}",
        }


def delta_stats(deltas: Sequence[int]) -> PairDiffStats:
    if not deltas:
        raise ValueError("no pairs")
    _, sd = mean_and_pstdev([Fraction(d) for d in deltas])
    return PairDiffStats(
        pairs=len(deltas),
        increased=sum(1 for d in deltas if d > 0),
        decreased=sum(1 for d in deltas if d < 0),
        delta_sum=sum(deltas),
        sd_delta=sd,
    )


def count_cross_lingual(raw_refs: Iterable[str], reg: LanguageRegistry, case_insensitive: bool = False) -> int:
    return sum(
        1
        for i, raw in enumerate(raw_refs)
        if raw and detect_cross_lingual(ReferenceEntry(i, raw), reg, case_insensitive=case_insensitive)
    )


def pair_diff_stats(
    pairs: Sequence[dict],
    reg: LanguageRegistry,
    case_insensitive: bool = False,
) -> PairDiffStats:
    """Change in cross-lingual reference count from preprint to published version.

    Detection runs afresh on both reference lists of every pair.
    """
    if not pairs:
        raise ValueError("empty pair list")
    deltas = [
        count_cross_lingual(p["pub_refs"], reg, case_insensitive)
        - count_cross_lingual(p["pre_refs"], reg, case_insensitive)
        for p in pairs
    ]
    return delta_stats(deltas)


@dataclass
class CitationStats:
    docs: int
    published: int
    citations: list[int] = field(default_factory=list)

    @property
    def published_ratio(self) -> Fraction:
        return Fraction(self.published, self.docs) if self.docs else Fraction(0)

    @property
    def mean(self) -> Fraction:
        return mean_and_pstdev([Fraction(c) for c in self.citations])[0]

    @property
    def sd(self) -> float:
        return mean_and_pstdev([Fraction(c) for c in self.citations])[1]


@dataclass
class ImpactComparison:
    sets: dict[str, CitationStats]
    filtered: dict[str, CitationStats]
    window: Optional[tuple[int, int]]
    unresolved: dict[str, int]

    def rows(self) -> list[dict]:
        names = list(self.sets)
        rows = []

        def block(label: str, stats: dict[str, CitationStats]) -> None:
            rows.append({"filter": label, "metric": "docs", **{n: stats[n].docs for n in names}})
            rows.append({"filter": label, "metric": "published_ratio",
                         **{n: f"{float(stats[n].published_ratio):.4f}" for n in names}})
            rows.append({"filter": label, "metric": "mean_citations",
                         **{n: f"{float(stats[n].mean):.1f}" for n in names}})
            rows.append({"filter": label, "metric": "sd_citations", **{n: f"{stats[n].sd:.1f}" for n in names}})

        block("none", self.sets)
        if self.window is not None:
            lo, hi = self.window
            block(f"{lo}<=cit<={hi}", self.filtered)
        return rows


def _citation_stats(ids: Iterable[str], store: MetadataStore, window=None) -> tuple[CitationStats, int]:
    stats = CitationStats(docs=0, published=0)
    unresolved = 0
    for doc_id in ids:
        rec = store.get(doc_id)
        if rec is None:
            unresolved += 1
            continue
        if window is not None and not window[0] <= rec.citation_count <= window[1]:
            continue
        stats.docs += 1
        if rec.published_version_id:
            stats.published += 1
        stats.citations.append(rec.citation_count)
    return stats, unresolved


def citation_compare(
    sets: dict[str, Iterable[str]],
    store: MetadataStore,
    window: Optional[tuple[int, int]] = None,
) -> ImpactComparison:
    """Published share and citation counts per named document set."""
    full, filtered, unresolved = {}, {}, {}
    for name, ids in sets.items():
        ids = list(ids)
        full[name], unresolved[name] = _citation_stats(ids, store)
        if window is not None:
            filtered[name], _ = _citation_stats(ids, store, window)
    return ImpactComparison(full, filtered, window, unresolved)


def match_reference(entry: ReferenceEntry, store: MetadataStore) -> tuple[str, ...]:
    """Every record whose normalized title equals the entry's extracted title."""
    title = extract_title(entry)
    if not title:
        return ()
    return store.ids_for_title(title)


def resolve_reference(entry: ReferenceEntry, store: MetadataStore) -> Optional[str]:
    ids = match_reference(entry, store)
    return ids[0] if len(ids) == 1 else None


@dataclass
class LanguageResolution:
    attempted: int = 0
    resolved: int = 0

    @property
    def failure_rate(self) -> Fraction:
        return 1 - Fraction(self.resolved, self.attempted) if self.attempted else Fraction(0)


@dataclass
class ResolutionReport:
    attempted: int
    resolved: int
    ambiguous: int
    per_language: dict[str, LanguageResolution]

    @property
    def rate(self) -> Fraction:
        return Fraction(self.resolved, self.attempted) if self.attempted else Fraction(0)

    @property
    def xling_rate(self) -> Fraction:
        att = sum(r.attempted for r in self.per_language.values())
        res = sum(r.resolved for r in self.per_language.values())
        return Fraction(res, att) if att else Fraction(0)

    def rows(self) -> list[dict]:
        rows = [
            {"language": "all", "attempted": self.attempted, "resolved": self.resolved,
             "failure_rate": f"{float(1 - self.rate) if self.attempted else 0.0:.4f}"}
        ]
        items = sorted(self.per_language.items(), key=lambda kv: (-kv[1].attempted, kv[0]))
        for lang, r in items:
            rows.append({"language": lang, "attempted": r.attempted, "resolved": r.resolved,
                         "failure_rate": f"{float(r.failure_rate):.4f}"})
        return rows


def resolution_rates(
    docs: Iterable[Document],
    detections: DetectionSet,
    store: MetadataStore,
) -> ResolutionReport:
    """Title-match every reference against ``store``.

    The overall rate covers all references; per-language rates cover
    detected cross-lingual references only. Ambiguous matches are failures.
    """
    language = {(c.doc_id, c.ref_index): c.language for c in detections.citations}
    attempted = resolved = ambiguous = 0
    per_language: dict[str, LanguageResolution] = defaultdict(LanguageResolution)
    for doc in docs:
        for ref in doc.references:
            ids = match_reference(ref, store)
            ok = len(ids) == 1
            attempted += 1
            resolved += ok
            ambiguous += len(ids) > 1
            lang = language.get((doc.doc_id, ref.ref_index))
            if lang is not None:
                per_language[lang].attempted += 1
                per_language[lang].resolved += ok
    return ResolutionReport(attempted, resolved, ambiguous, dict(per_language))
