"""Corpus data model and streaming loaders.

Three flat-file inputs are supported:

- ``documents.jsonl``: one citing document per line, with its reference
  section and pre-segmented in-text citation sentences
- ``metadata.jsonl``: one metadata record per line (cited or citing works)
- ``territory.csv``: country code to most commonly spoken language
"""

from __future__ import annotations

import csv
import io
import json
import logging
import unicodedata
from dataclasses import dataclass, field
from typing import IO, Iterable, Iterator, Optional, Union

import pycountry

logger = logging.getLogger(__name__)

KNOWN_DISCIPLINES = ("math", "physics", "cs")

Stream = Union[IO[bytes], IO[str], Iterable[bytes], Iterable[str]]


class CorpusError(ValueError):
    """Malformed input line or schema violation."""

    def __init__(self, reason: str, line_no: Optional[int] = None, doc_id: Optional[str] = None):
        self.reason = reason
        self.line_no = line_no
        self.doc_id = doc_id
        where = []
        if line_no is not None:
            where.append(f"line {line_no}")
        if doc_id:
            where.append(f"doc_id {doc_id!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + reason)


@dataclass(frozen=True, slots=True)
class ReferenceEntry:
    ref_index: int
    raw_text: str
    title: Optional[str] = None
    cited_meta_id: Optional[str] = None
    year: Optional[int] = None


@dataclass(frozen=True, slots=True)
class InTextCitation:
    sentence_id: int
    sentence_text: str
    ref_index: int


@dataclass(frozen=True, slots=True)
class Document:
    doc_id: str
    discipline: str
    year: int
    references: tuple[ReferenceEntry, ...] = ()
    contexts: tuple[InTextCitation, ...] = ()
    month: Optional[int] = None

    @property
    def known_discipline(self) -> bool:
        return self.discipline in KNOWN_DISCIPLINES


@dataclass(frozen=True, slots=True)
class Author:
    name: str
    author_id: Optional[str] = None


@dataclass(frozen=True, slots=True)
class Affiliation:
    author_position: int
    country: str


@dataclass(frozen=True, slots=True)
class MetadataRecord:
    meta_id: str
    title: str
    alt_titles: tuple[str, ...] = ()
    authors: tuple[Author, ...] = ()
    author_affiliation_countries: tuple[Affiliation, ...] = ()
    year: Optional[int] = None
    citation_count: int = 0
    published_version_id: Optional[str] = None


def normalize_title(text: str) -> str:
    """Casefold, strip diacritics and punctuation, collapse whitespace.

    Kana voicing marks survive so that e.g. "が" and "か" stay distinct.
    """
    decomposed = unicodedata.normalize("NFKD", text.casefold())
    kept = []
    for ch in decomposed:
        cat = unicodedata.category(ch)
        if cat == "Mn" and ch not in "゙゚":
            continue
        if cat.startswith("P"):
            kept.append(" ")
            continue
        kept.append(ch)
    return " ".join(unicodedata.normalize("NFC", "".join(kept)).split())


class MetadataStore:
    """Read-only id- and title-indexed collection of metadata records."""

    def __init__(self, records: Iterable[MetadataRecord] = ()):
        self._by_id: dict[str, MetadataRecord] = {}
        self._by_title: dict[str, set[str]] = {}
        self.dangling_published = 0
        for rec in records:
            self._add(rec)
        self._check_published_links()

    def _add(self, rec: MetadataRecord) -> None:
        if rec.meta_id in self._by_id:
            raise CorpusError(f"duplicate meta_id {rec.meta_id!r}")
        self._by_id[rec.meta_id] = rec
        for title in (rec.title, *rec.alt_titles):
            key = normalize_title(title)
            if key:
                self._by_title.setdefault(key, set()).add(rec.meta_id)

    def _check_published_links(self) -> None:
        self.dangling_published = 0
        for rec in self._by_id.values():
            if rec.published_version_id and rec.published_version_id not in self._by_id:
                self.dangling_published += 1
                logger.warning(
                    "record %s: published_version_id %s not in store",
                    rec.meta_id,
                    rec.published_version_id,
                )

    def extended(self, records: Iterable[MetadataRecord]) -> "MetadataStore":
        """Return a new store holding this store's records plus ``records``."""
        return MetadataStore([*self._by_id.values(), *records])

    def __len__(self) -> int:
        return len(self._by_id)

    def __contains__(self, meta_id: object) -> bool:
        return meta_id in self._by_id

    def __iter__(self) -> Iterator[MetadataRecord]:
        return iter(self._by_id.values())

    def get(self, meta_id: Optional[str]) -> Optional[MetadataRecord]:
        if meta_id is None:
            return None
        return self._by_id.get(meta_id)

    def __getitem__(self, meta_id: str) -> MetadataRecord:
        return self._by_id[meta_id]

    def ids_for_title(self, title: str) -> tuple[str, ...]:
        """All record ids whose normalized title or alt title equals ``title``'s."""
        return tuple(sorted(self._by_title.get(normalize_title(title), ())))


@dataclass
class TerritoryLanguageMap:
    entries: dict[str, str] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, country: object) -> bool:
        return country in self.entries

    def get(self, country: str) -> Optional[str]:
        return self.entries.get(country)

    def __getitem__(self, country: str) -> str:
        return self.entries[country]


@dataclass
class LoadStats:
    lines: int = 0
    loaded: int = 0
    skipped: int = 0
    errors: list[str] = field(default_factory=list)

    @property
    def skipped_ratio(self) -> float:
        return self.skipped / self.lines if self.lines else 0.0


@dataclass(frozen=True)
class ValidationReport:
    docs: int = 0
    refs: int = 0
    contexts: int = 0
    refs_with_meta_id: int = 0
    dangling_meta_id_refs: int = 0
    countries_missing_from_map: int = 0

    def as_rows(self) -> list[dict]:
        return [{"count": k, "value": v} for k, v in self.__dict__.items()]


# ---------------------------------------------------------------------------
# parsing helpers


def _lines(stream: Stream) -> Iterator[str]:
    for raw in stream:
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        yield raw


def _text_stream(stream: Stream) -> Iterable[str]:
    if isinstance(stream, str):
        return io.StringIO(stream)
    return _lines(stream)


def _req(obj: dict, key: str, kind, doc_id: Optional[str] = None):
    if key not in obj:
        raise CorpusError(f"missing field {key!r}", doc_id=doc_id)
    value = obj[key]
    if not isinstance(value, kind) or isinstance(value, bool) and kind is int:
        raise CorpusError(f"field {key!r} has wrong type {type(value).__name__}", doc_id=doc_id)
    return value


def _opt(obj: dict, key: str, kind, doc_id: Optional[str] = None):
    value = obj.get(key)
    if value is None:
        return None
    if not isinstance(value, kind) or isinstance(value, bool) and kind is int:
        raise CorpusError(f"field {key!r} has wrong type {type(value).__name__}", doc_id=doc_id)
    return value


def document_from_dict(obj: dict) -> Document:
    """Build a validated :class:`Document` from its JSON object form."""
    if not isinstance(obj, dict):
        raise CorpusError("line is not a JSON object")
    doc_id = _req(obj, "doc_id", str)
    if not doc_id:
        raise CorpusError("empty doc_id")
    discipline = _req(obj, "discipline", str, doc_id).strip().lower()
    if not discipline:
        raise CorpusError("empty discipline", doc_id=doc_id)
    year = _req(obj, "year", int, doc_id)
    month = _opt(obj, "month", int, doc_id)
    if month is not None and not 1 <= month <= 12:
        raise CorpusError(f"month {month} out of range", doc_id=doc_id)

    refs = []
    for pos, r in enumerate(_req(obj, "references", list, doc_id)):
        if not isinstance(r, dict):
            raise CorpusError("reference is not an object", doc_id=doc_id)
        idx = _req(r, "ref_index", int, doc_id)
        if idx != pos:
            raise CorpusError(f"references out of order: ref_index {idx} at position {pos}", doc_id=doc_id)
        raw = _req(r, "raw_text", str, doc_id)
        if not raw:
            raise CorpusError(f"empty raw_text at ref_index {idx}", doc_id=doc_id)
        refs.append(
            ReferenceEntry(
                ref_index=idx,
                raw_text=raw,
                title=_opt(r, "title", str, doc_id),
                cited_meta_id=_opt(r, "cited_meta_id", str, doc_id),
                year=_opt(r, "year", int, doc_id),
            )
        )

    contexts = []
    for c in obj.get("contexts") or ():
        if not isinstance(c, dict):
            raise CorpusError("context is not an object", doc_id=doc_id)
        ctx = InTextCitation(
            sentence_id=_req(c, "sentence_id", int, doc_id),
            sentence_text=_req(c, "sentence_text", str, doc_id),
            ref_index=_req(c, "ref_index", int, doc_id),
        )
        if not ctx.sentence_text:
            raise CorpusError(f"empty sentence_text in sentence {ctx.sentence_id}", doc_id=doc_id)
        if not 0 <= ctx.ref_index < len(refs):
            raise CorpusError(f"context points at missing ref_index {ctx.ref_index}", doc_id=doc_id)
        contexts.append(ctx)

    return Document(
        doc_id=doc_id,
        discipline=discipline,
        year=year,
        month=month,
        references=tuple(refs),
        contexts=tuple(contexts),
    )


def document_to_dict(doc: Document) -> dict:
    out: dict = {"doc_id": doc.doc_id, "discipline": doc.discipline, "year": doc.year}
    if doc.month is not None:
        out["month"] = doc.month
    refs = []
    for r in doc.references:
        d: dict = {"ref_index": r.ref_index, "raw_text": r.raw_text}
        if r.title is not None:
            d["title"] = r.title
        if r.cited_meta_id is not None:
            d["cited_meta_id"] = r.cited_meta_id
        if r.year is not None:
            d["year"] = r.year
        refs.append(d)
    out["references"] = refs
    out["contexts"] = [
        {"sentence_id": c.sentence_id, "sentence_text": c.sentence_text, "ref_index": c.ref_index}
        for c in doc.contexts
    ]
    return out


def dump_documents(docs: Iterable[Document], fh: IO[str]) -> int:
    n = 0
    for doc in docs:
        fh.write(json.dumps(document_to_dict(doc), ensure_ascii=False, sort_keys=True))
        fh.write("\n")
        n += 1
    return n


def load_documents(
    stream: Stream,
    severity: str = "skip",
    stats: Optional[LoadStats] = None,
    check_unique: bool = True,
) -> Iterator[Document]:
    """Lazily parse a documents JSONL stream.

    With ``severity="abort"`` the first bad line raises :class:`CorpusError`;
    with ``"skip"`` bad lines are counted in ``stats`` and dropped. Blank lines
    are ignored. ``check_unique`` keeps a set of seen ids, the only state that
    grows with the corpus.
    """
    if severity not in ("abort", "skip"):
        raise ValueError(f"unknown severity {severity!r}")
    stats = stats if stats is not None else LoadStats()
    seen: set[str] = set()
    for line_no, line in enumerate(_text_stream(stream), start=1):
        if not line.strip():
            continue
        stats.lines += 1
        try:
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"malformed JSON: {exc.msg}", line_no=line_no) from None
            try:
                doc = document_from_dict(obj)
            except CorpusError as exc:
                raise CorpusError(exc.reason, line_no=line_no, doc_id=exc.doc_id) from None
            if check_unique:
                if doc.doc_id in seen:
                    raise CorpusError("duplicate doc_id", line_no=line_no, doc_id=doc.doc_id)
                seen.add(doc.doc_id)
        except CorpusError as exc:
            if severity == "abort":
                raise
            stats.skipped += 1
            stats.errors.append(str(exc))
            logger.warning("skipping %s", exc)
            continue
        stats.loaded += 1
        yield doc


def _country(code: object) -> str:
    if not isinstance(code, str) or pycountry.countries.get(alpha_2=code.upper()) is None or code != code.upper():
        raise CorpusError(f"not an ISO 3166-1 alpha-2 country code: {code!r}")
    return code


def _language(code: object) -> str:
    if not isinstance(code, str) or code != code.lower() or pycountry.languages.get(alpha_2=code) is None:
        raise CorpusError(f"not an ISO 639-1 language code: {code!r}")
    return code


def metadata_from_dict(obj: dict) -> MetadataRecord:
    if not isinstance(obj, dict):
        raise CorpusError("line is not a JSON object")
    meta_id = _req(obj, "meta_id", str)
    if not meta_id:
        raise CorpusError("empty meta_id")
    authors = []
    for a in obj.get("authors") or ():
        if not isinstance(a, dict):
            raise CorpusError(f"record {meta_id}: author is not an object")
        authors.append(Author(name=_req(a, "name", str), author_id=_opt(a, "author_id", str)))
    affs = []
    for a in obj.get("author_affiliation_countries") or ():
        pos = _req(a, "author_position", int)
        if not 0 <= pos < len(authors):
            raise CorpusError(f"record {meta_id}: author_position {pos} out of range")
        affs.append(Affiliation(author_position=pos, country=_country(_req(a, "country", str))))
    count = _req(obj, "citation_count", int)
    if count < 0:
        raise CorpusError(f"record {meta_id}: negative citation_count")
    alt = obj.get("alt_titles") or []
    if not all(isinstance(t, str) for t in alt):
        raise CorpusError(f"record {meta_id}: alt_titles must be strings")
    return MetadataRecord(
        meta_id=meta_id,
        title=_req(obj, "title", str),
        alt_titles=tuple(alt),
        authors=tuple(authors),
        author_affiliation_countries=tuple(affs),
        year=_opt(obj, "year", int),
        citation_count=count,
        published_version_id=_opt(obj, "published_version_id", str),
    )


def metadata_to_dict(rec: MetadataRecord) -> dict:
    out: dict = {
        "meta_id": rec.meta_id,
        "title": rec.title,
        "alt_titles": list(rec.alt_titles),
        "authors": [
            {"name": a.name, **({"author_id": a.author_id} if a.author_id is not None else {})}
            for a in rec.authors
        ],
        "author_affiliation_countries": [
            {"author_position": a.author_position, "country": a.country}
            for a in rec.author_affiliation_countries
        ],
        "citation_count": rec.citation_count,
    }
    if rec.year is not None:
        out["year"] = rec.year
    if rec.published_version_id is not None:
        out["published_version_id"] = rec.published_version_id
    return out


def load_metadata(stream: Stream) -> MetadataStore:
    """Load a metadata JSONL stream into a :class:`MetadataStore`.

    Any malformed line or duplicate id raises. Dangling ``published_version_id``
    links are logged and counted in ``store.dangling_published``.
    """
    records = []
    for line_no, line in enumerate(_text_stream(stream), start=1):
        if not line.strip():
            continue
        try:
            records.append(metadata_from_dict(json.loads(line)))
        except json.JSONDecodeError as exc:
            raise CorpusError(f"malformed JSON: {exc.msg}", line_no=line_no) from None
        except CorpusError as exc:
            raise CorpusError(exc.reason, line_no=line_no) from None
    return MetadataStore(records)


def load_territory_map(stream: Stream) -> TerritoryLanguageMap:
    reader = csv.reader(_text_stream(stream))
    entries: dict[str, str] = {}
    for row_no, row in enumerate(reader, start=1):
        if not row or not "".join(row).strip():
            continue
        if row_no == 1 and [c.strip() for c in row] == ["country_code", "language_code"]:
            continue
        if len(row) != 2:
            raise CorpusError(f"expected 2 columns, got {len(row)}", line_no=row_no)
        country, language = (c.strip() for c in row)
        try:
            _country(country)
            _language(language)
        except CorpusError as exc:
            raise CorpusError(exc.reason, line_no=row_no) from None
        if country in entries:
            raise CorpusError(f"duplicate country {country}", line_no=row_no)
        entries[country] = language
    return TerritoryLanguageMap(entries)


def validate_corpus(
    docs: Iterable[Document],
    store: MetadataStore,
    territory: TerritoryLanguageMap,
) -> ValidationReport:
    n_docs = n_refs = n_ctx = with_meta = dangling = 0
    for doc in docs:
        n_docs += 1
        n_refs += len(doc.references)
        n_ctx += len(doc.contexts)
        for ref in doc.references:
            if ref.cited_meta_id is not None:
                with_meta += 1
                if ref.cited_meta_id not in store:
                    dangling += 1
    countries = {a.country for rec in store for a in rec.author_affiliation_countries}
    return ValidationReport(
        docs=n_docs,
        refs=n_refs,
        contexts=n_ctx,
        refs_with_meta_id=with_meta,
        dangling_meta_id_refs=dangling,
        countries_missing_from_map=sum(1 for c in countries if c not in territory),
    )
