"""Usage statistics: self-citation, geographic origin, and citation contexts."""

from __future__ import annotations

import logging
import random
import unicodedata
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Hashable, Iterable, Optional, Sequence, TypeVar

from .corpus import Document, InTextCitation, MetadataRecord, MetadataStore, TerritoryLanguageMap
from .markers import DetectionSet

logger = logging.getLogger(__name__)

ENGLISH = "en"

T = TypeVar("T")


# ---------------------------------------------------------------------------
# self-citation


def normalize_author_name(name: str) -> str:
    """Reduce a name to a ``"surname, i"`` key.

    "A. Ivanov", "Ivanov, Aleksei" and "Aleksei Ivanov" all become
    "ivanov, a". A bare surname stays as it is.
    """
    text = unicodedata.normalize("NFKD", name)
    text = "".join(ch for ch in text if not unicodedata.combining(ch)).casefold()
    text = text.replace(".", ". ")
    if "," in text:
        surname, _, given = text.partition(",")
        surname_words = surname.split()
        given_words = given.split()
    else:
        words = text.split()
        if not words:
            return ""
        surname_words, given_words = words[-1:], words[:-1]
    surname = " ".join(surname_words).strip(". ")
    initial = next((ch for w in given_words for ch in w if ch.isalpha()), "")
    return f"{surname}, {initial}" if initial else surname


def author_name_overlap(a: Iterable[str], b: Iterable[str]) -> bool:
    keys_a = {k for k in map(normalize_author_name, a) if k}
    return any(k in keys_a for k in map(normalize_author_name, b) if k)


def is_strict_self_citation(citing: MetadataRecord, cited: MetadataRecord) -> bool:
    ids = {a.author_id for a in citing.authors if a.author_id}
    return any(a.author_id in ids for a in cited.authors if a.author_id)


def is_loose_self_citation(citing: MetadataRecord, cited: MetadataRecord) -> bool:
    return is_strict_self_citation(citing, cited) or author_name_overlap(
        (a.name for a in citing.authors), (a.name for a in cited.authors)
    )


@dataclass
class SelfCitationRates:
    scope: str
    strict_count: int = 0
    loose_count: int = 0
    support: int = 0
    excluded: int = 0

    @property
    def strict(self) -> Fraction:
        return Fraction(self.strict_count, self.support) if self.support else Fraction(0)

    @property
    def loose(self) -> Fraction:
        return Fraction(self.loose_count, self.support) if self.support else Fraction(0)


def self_citation_rates(
    docs: Iterable[Document],
    detections: DetectionSet,
    store: MetadataStore,
) -> tuple[SelfCitationRates, SelfCitationRates]:
    """Strict and loose self-citation shares for cross-lingual and monolingual refs.

    Both scopes draw on the same citing documents: those with at least one
    detection. The citing document's record is looked up by its doc_id.
    """
    detected = detections.keys()
    citing_docs = {doc_id for doc_id, _ in detected}
    xling = SelfCitationRates("cross_lingual_refs")
    mono = SelfCitationRates("monolingual_refs")
    for doc in docs:
        if doc.doc_id not in citing_docs:
            continue
        citing = store.get(doc.doc_id)
        for ref in doc.references:
            rates = xling if (doc.doc_id, ref.ref_index) in detected else mono
            cited = store.get(ref.cited_meta_id)
            if citing is None or cited is None:
                rates.excluded += 1
                continue
            rates.support += 1
            if is_strict_self_citation(citing, cited):
                rates.strict_count += 1
                rates.loose_count += 1
            elif is_loose_self_citation(citing, cited):
                rates.loose_count += 1
    return xling, mono


# ---------------------------------------------------------------------------
# geographic origin


@dataclass
class GeoMatrix:
    cells: dict[str, Counter] = field(default_factory=dict)
    excluded_unmapped: int = 0
    multi_affiliation_authors: int = 0
    docs_used: int = 0

    def add(self, language: str, group: str, n: int = 1) -> None:
        self.cells.setdefault(language, Counter())[group] += n

    @property
    def rows(self) -> list[str]:
        return sorted(self.cells, key=lambda r: (-self.row_total(r), r))

    @property
    def columns(self) -> list[str]:
        cols = {c for row in self.cells.values() for c in row}
        return sorted(cols)

    def get(self, row: str, col: str) -> int:
        return self.cells.get(row, Counter()).get(col, 0)

    def row_total(self, row: str) -> int:
        return sum(self.cells.get(row, Counter()).values())

    @property
    def total(self) -> int:
        return sum(self.row_total(r) for r in self.cells)

    def relative(self) -> dict[str, dict[str, Fraction]]:
        """Row-normalized view: each non-empty row sums to 1."""
        out = {}
        for row, counts in self.cells.items():
            t = sum(counts.values())
            if t:
                out[row] = {c: Fraction(n, t) for c, n in counts.items()}
        return out

    def top(self, n: int) -> "GeoMatrix":
        keep = self.rows[:n]
        return GeoMatrix({r: Counter(self.cells[r]) for r in keep})

    def table(self, mode: str = "abs") -> tuple[list[str], list[str], list[list[float]]]:
        rows, cols = self.rows, self.columns
        rel = self.relative() if mode == "rel" else None
        values = []
        for r in rows:
            if rel is None:
                values.append([float(self.get(r, c)) for c in cols])
            else:
                values.append([float(rel.get(r, {}).get(c, 0)) for c in cols])
        return rows, cols, values


def geo_origin_matrix(
    docs: Iterable[Document],
    detections: DetectionSet,
    store: MetadataStore,
    territory: TerritoryLanguageMap,
) -> GeoMatrix:
    """Count (cited language, affiliation language) pairs per citing author.

    An author listed with several countries contributes once per country.
    Countries missing from ``territory`` are tallied and skipped.
    """
    by_doc = detections.by_doc()
    matrix = GeoMatrix()
    unmapped: set[str] = set()
    for doc in docs:
        cites = by_doc.get(doc.doc_id)
        if not cites:
            continue
        record = store.get(doc.doc_id)
        if record is None or not record.author_affiliation_countries:
            continue
        matrix.docs_used += 1
        per_author = Counter(a.author_position for a in record.author_affiliation_countries)
        matrix.multi_affiliation_authors += sum(1 for n in per_author.values() if n > 1)
        for aff in record.author_affiliation_countries:
            group = territory.get(aff.country)
            if group is None:
                matrix.excluded_unmapped += len(cites)
                unmapped.add(aff.country)
                continue
            for c in cites:
                matrix.add(c.language, group)
    if unmapped:
        logger.warning("countries missing from territory map: %s", ", ".join(sorted(unmapped)))
    return matrix


@dataclass
class LocalitySummary:
    local_ratio: Fraction
    anglosphere_ratio: Fraction
    # cited language -> (locality, share from English-speaking countries)
    per_language: dict[str, tuple[Fraction, Fraction]]


def locality_summary(m: GeoMatrix) -> LocalitySummary:
    total = m.total
    if total == 0:
        raise ValueError("geo matrix is empty")
    diagonal = sum(m.get(r, r) for r in m.cells)
    english = sum(m.get(r, ENGLISH) for r in m.cells)
    per_language = {}
    for row in m.rows:
        t = m.row_total(row)
        per_language[row] = (Fraction(m.get(row, row), t), Fraction(m.get(row, ENGLISH), t))
    return LocalitySummary(Fraction(diagonal, total), Fraction(english, total), per_language)


# ---------------------------------------------------------------------------
# citation context sets


@dataclass(frozen=True, slots=True)
class ContextItem:
    doc_id: str
    discipline: str
    year: int
    context: InTextCitation

    @property
    def key(self) -> tuple[str, int, int]:
        return (self.doc_id, self.context.sentence_id, self.context.ref_index)

    @property
    def stratum(self) -> tuple[str, int]:
        return (self.discipline, self.year)

    def to_json(self, label: str) -> dict:
        return {
            "set": label,
            "doc_id": self.doc_id,
            "sentence_id": self.context.sentence_id,
            "sentence_text": self.context.sentence_text,
            "ref_index": self.context.ref_index,
        }


@dataclass
class ContextSets:
    x_ling: list[ContextItem]
    mono: list[ContextItem]
    mixed: list[ContextItem]
    # sizes before balancing, after mixed separation
    x_ling_pool: int = 0
    mono_pool: int = 0
    no_neighbor: int = 0

    def as_dict(self) -> dict[str, list[ContextItem]]:
        return {"x_ling": self.x_ling, "mono": self.mono, "mixed": self.mixed}


def adjacent_monolingual(ref_index: int, n_refs: int, xling: set[int]) -> Optional[int]:
    """Nearest reference not in ``xling``; the preceding one wins ties."""
    for d in range(1, n_refs):
        for cand in (ref_index - d, ref_index + d):
            if 0 <= cand < n_refs and cand not in xling:
                return cand
    return None


def stratified_downsample(
    items: Sequence[T],
    n: int,
    stratum,
    rng: random.Random,
    sort_key=None,
) -> list[T]:
    """Pick ``n`` of ``items`` keeping stratum proportions (largest remainder)."""
    if n >= len(items):
        return list(items)
    groups: dict[Hashable, list[T]] = defaultdict(list)
    for it in items:
        groups[stratum(it)].append(it)
    keys = sorted(groups)
    total = len(items)
    quotas = {k: len(groups[k]) * n // total for k in keys}
    short = n - sum(quotas.values())
    by_remainder = sorted(keys, key=lambda k: (-(len(groups[k]) * n % total), keys.index(k)))
    for k in by_remainder[:short]:
        quotas[k] += 1
    out: list[T] = []
    for k in keys:
        pool = sorted(groups[k], key=sort_key) if sort_key else groups[k]
        out.extend(rng.sample(pool, quotas[k]))
    return out


def extract_context_sets(
    docs: Iterable[Document],
    detections: DetectionSet,
    seed: int = 0,
) -> ContextSets:
    """Build the cross-lingual, adjacent-monolingual, and mixed context sets.

    A sentence holding contexts from both pools goes to ``mixed`` once per
    cross-lingual context; its monolingual contexts are dropped. The larger
    of the remaining pools is then downsampled to the size of the smaller,
    stratified by (discipline, year).
    """
    by_doc = detections.by_doc()
    x_pool: list[ContextItem] = []
    m_pool: list[ContextItem] = []
    mixed: list[ContextItem] = []
    no_neighbor = 0
    for doc in docs:
        cites = by_doc.get(doc.doc_id)
        if not cites:
            continue
        xling = {c.ref_index for c in cites}
        adjacent = set()
        for idx in sorted(xling):
            adj = adjacent_monolingual(idx, len(doc.references), xling)
            if adj is None:
                no_neighbor += 1
            else:
                adjacent.add(adj)
        x_ctx = [c for c in doc.contexts if c.ref_index in xling]
        m_ctx = [c for c in doc.contexts if c.ref_index in adjacent]
        shared = {c.sentence_id for c in x_ctx} & {c.sentence_id for c in m_ctx}
        for ctx in x_ctx:
            item = ContextItem(doc.doc_id, doc.discipline, doc.year, ctx)
            (mixed if ctx.sentence_id in shared else x_pool).append(item)
        for ctx in m_ctx:
            if ctx.sentence_id not in shared:
                m_pool.append(ContextItem(doc.doc_id, doc.discipline, doc.year, ctx))

    sort_key = lambda it: it.key  # noqa: E731
    x_pool.sort(key=sort_key)
    m_pool.sort(key=sort_key)
    mixed.sort(key=sort_key)
    rng = random.Random(seed)
    target = min(len(x_pool), len(m_pool))
    x_ling = sorted(stratified_downsample(x_pool, target, lambda it: it.stratum, rng), key=sort_key)
    mono = sorted(stratified_downsample(m_pool, target, lambda it: it.stratum, rng), key=sort_key)
    return ContextSets(
        x_ling=x_ling,
        mono=mono,
        mixed=mixed,
        x_ling_pool=len(x_pool),
        mono_pool=len(m_pool),
        no_neighbor=no_neighbor,
    )
