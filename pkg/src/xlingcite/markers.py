"""Explicit "(in <Language>)" marker detection in reference strings."""

from __future__ import annotations

import re
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import islice
from typing import Iterable, Iterator, Optional

from .corpus import Document, ReferenceEntry
from .registry import Language, LanguageRegistry, normalize_token

MARKER_PATTERN = r"\(\s*in\s+([a-zA-Z][a-z]+)\s*\)"
MARKER_RE = re.compile(MARKER_PATTERN)
# Widened variant: only the literal "in" becomes case-insensitive.
MARKER_RE_CI = re.compile(r"\(\s*[iI][nN]\s+([a-zA-Z][a-z]+)\s*\)")


@dataclass(frozen=True, slots=True)
class MarkerMatch:
    raw_token: str
    # UTF-8 byte offsets of the whole parenthesized match in raw_text
    byte_span: tuple[int, int]


@dataclass(frozen=True, slots=True)
class CrossLingualCitation:
    doc_id: str
    ref_index: int
    language: str
    marker: MarkerMatch

    def to_json(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "ref_index": self.ref_index,
            "language": self.language,
            "token": self.marker.raw_token,
            "span": list(self.marker.byte_span),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CrossLingualCitation":
        s, e = obj["span"]
        return cls(obj["doc_id"], obj["ref_index"], obj["language"], MarkerMatch(obj["token"], (s, e)))


def _byte_offset(text: str, char_offset: int) -> int:
    if text.isascii():
        return char_offset
    return len(text[:char_offset].encode("utf-8"))


def scan_marker(raw_text: str, case_insensitive: bool = False) -> Optional[MarkerMatch]:
    """Return the leftmost marker match in ``raw_text``, if any."""
    m = (MARKER_RE_CI if case_insensitive else MARKER_RE).search(raw_text)
    if m is None:
        return None
    return _to_marker(raw_text, m)


def _to_marker(raw_text: str, m: re.Match) -> MarkerMatch:
    start, end = m.span()
    return MarkerMatch(m.group(1), (_byte_offset(raw_text, start), _byte_offset(raw_text, end)))


def detect_cross_lingual(
    entry: ReferenceEntry,
    reg: LanguageRegistry,
    doc_id: str = "",
    case_insensitive: bool = False,
) -> Optional[CrossLingualCitation]:
    marker = scan_marker(entry.raw_text, case_insensitive)
    if marker is None:
        return None
    result = normalize_token(marker.raw_token, reg)
    if not isinstance(result, Language) or result.code == reg.english_code:
        return None
    return CrossLingualCitation(doc_id, entry.ref_index, result.code, marker)


@dataclass
class DetectionSet:
    citations: list[CrossLingualCitation] = field(default_factory=list)
    refs_scanned: int = 0
    docs_scanned: int = 0
    # every regex-level token, accepted or not, for registry curation
    token_counts: Counter = field(default_factory=Counter)

    def merge(self, other: "DetectionSet") -> "DetectionSet":
        return DetectionSet(
            citations=sorted(self.citations + other.citations, key=_citation_key),
            refs_scanned=self.refs_scanned + other.refs_scanned,
            docs_scanned=self.docs_scanned + other.docs_scanned,
            token_counts=self.token_counts + other.token_counts,
        )

    def __len__(self) -> int:
        return len(self.citations)

    def by_doc(self) -> dict[str, list[CrossLingualCitation]]:
        out: dict[str, list[CrossLingualCitation]] = {}
        for c in self.citations:
            out.setdefault(c.doc_id, []).append(c)
        return out

    def keys(self) -> set[tuple[str, int]]:
        return {(c.doc_id, c.ref_index) for c in self.citations}

    def token_rows(self) -> list[dict]:
        rows = sorted(self.token_counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return [{"token": t, "count": n} for t, n in rows]


def _citation_key(c: CrossLingualCitation) -> tuple[str, int]:
    return (c.doc_id, c.ref_index)


def _detect_chunk(docs: Iterable[Document], reg: LanguageRegistry, case_insensitive: bool) -> DetectionSet:
    out = DetectionSet()
    rx = MARKER_RE_CI if case_insensitive else MARKER_RE
    for doc in docs:
        out.docs_scanned += 1
        for ref in doc.references:
            out.refs_scanned += 1
            text = ref.raw_text
            # cheap prefilter before the regex engine
            if "(" not in text:
                continue
            m = rx.search(text)
            if m is None:
                continue
            marker = _to_marker(text, m)
            out.token_counts[marker.raw_token] += 1
            result = normalize_token(marker.raw_token, reg)
            if isinstance(result, Language) and result.code != reg.english_code:
                out.citations.append(CrossLingualCitation(doc.doc_id, ref.ref_index, result.code, marker))
    out.citations.sort(key=_citation_key)
    return out


def _chunks(docs: Iterable[Document], size: int) -> Iterator[list[Document]]:
    it = iter(docs)
    while chunk := list(islice(it, size)):
        yield chunk


def detect_corpus(
    docs: Iterable[Document],
    reg: LanguageRegistry,
    case_insensitive: bool = False,
    workers: int = 1,
    chunk_size: int = 2000,
) -> DetectionSet:
    """Scan every reference of every document for language markers.

    Citations come back sorted by (doc_id, ref_index) whatever the worker
    count, so results are comparable across runs.
    """
    if workers <= 1:
        return _detect_chunk(docs, reg, case_insensitive)
    result = DetectionSet()
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(_detect_chunk, chunk, reg, case_insensitive)
            for chunk in _chunks(docs, chunk_size)
        ]
        for fut in futures:
            result = result.merge(fut.result())
    return result
