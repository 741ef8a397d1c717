"""Language registry: raw marker tokens to ISO 639-1 codes."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Iterable, Mapping, Optional, Union

ENGLISH = "en"

# Codes of the 44 languages found behind "(in <Language>)" markers.
SEED_CODES = frozenset(
    "be bg ca cs da de el en eo es et fa fi fr he hi hr hu hy id is it ja ka ko la "
    "lv mk mr nl no pl pt ro ru sa sk sl sr sv tr uk vi zh".split()
)


class RegistryError(ValueError):
    pass


@dataclass(frozen=True)
class Language:
    code: str


@dataclass(frozen=True)
class NonLanguage:
    pass


@dataclass(frozen=True)
class Unknown:
    pass


NormalizationResult = Union[Language, NonLanguage, Unknown]

NON_LANGUAGE = NonLanguage()
UNKNOWN = Unknown()


@dataclass(frozen=True)
class LanguageRegistry:
    canonical: Mapping[str, str]
    misspellings: Mapping[str, str] = field(default_factory=dict)
    stoplist: frozenset = frozenset()
    english_code: str = ENGLISH

    def __post_init__(self):
        clash = self.stoplist & (set(self.canonical) | set(self.misspellings))
        if clash:
            raise RegistryError(f"tokens both stopped and mapped: {sorted(clash)}")
        for token in self.misspellings:
            if token in self.canonical:
                raise RegistryError(f"{token!r} is both canonical and a misspelling")
        orphan = set(self.misspellings.values()) - set(self.canonical.values())
        if orphan:
            raise RegistryError(f"misspellings map to codes with no canonical name: {sorted(orphan)}")

    @property
    def codes(self) -> frozenset:
        return frozenset(self.canonical.values())

    def names_for(self, code: str) -> tuple[str, ...]:
        return tuple(sorted(t for t, c in self.canonical.items() if c == code))

    def name_of(self, code: str) -> Optional[str]:
        names = self.names_for(code)
        return names[0].capitalize() if names else None

    def lookup(self, token: str) -> NormalizationResult:
        return normalize_token(token, self)


def normalize_token(raw: str, reg: LanguageRegistry) -> NormalizationResult:
    token = raw.strip().lower()
    code = reg.canonical.get(token) or reg.misspellings.get(token)
    if code is not None:
        return Language(code)
    if token in reg.stoplist:
        return NON_LANGUAGE
    return UNKNOWN


def parse_registry(rows: Iterable[str]) -> LanguageRegistry:
    """Build a registry from ``kind,token,code`` CSV lines."""
    canonical: dict[str, str] = {}
    misspellings: dict[str, str] = {}
    stop: set[str] = set()
    reader = csv.reader(rows)
    for row_no, row in enumerate(reader, start=1):
        if not row or not "".join(row).strip():
            continue
        row = [c.strip() for c in row] + [""] * (3 - len(row))
        kind, token, code = row[0].lower(), row[1].lower(), row[2].lower()
        if row_no == 1 and kind == "kind":
            continue
        if not token:
            raise RegistryError(f"row {row_no}: empty token")
        if kind == "canonical":
            target = canonical
        elif kind == "misspelling":
            target = misspellings
        elif kind == "stop":
            stop.add(token)
            continue
        else:
            raise RegistryError(f"row {row_no}: unknown kind {kind!r}")
        if len(code) != 2 or not code.isascii() or not code.isalpha():
            raise RegistryError(f"row {row_no}: {code!r} is not an ISO 639-1 code")
        if target.get(token, code) != code:
            raise RegistryError(f"row {row_no}: {token!r} mapped to two codes")
        target[token] = code
    return LanguageRegistry(canonical=canonical, misspellings=misspellings, stoplist=frozenset(stop))


def load_registry(path: Optional[str] = None) -> LanguageRegistry:
    """Load a registry CSV, or the bundled default when ``path`` is None."""
    if path is None:
        text = resources.files("xlingcite").joinpath("data/registry.csv").read_text("utf-8")
        return parse_registry(io.StringIO(text))
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_registry(fh)


_default: Optional[LanguageRegistry] = None


def default_registry() -> LanguageRegistry:
    global _default
    if _default is None:
        _default = load_registry()
    return _default


@dataclass(frozen=True)
class CoverageReport:
    languages_covered: int
    languages_total: int
    journal_share: Fraction
    uncovered_languages: tuple[str, ...]


def coverage_report(reg: LanguageRegistry, journal_counts: Mapping[str, int]) -> CoverageReport:
    """Share of journals (by count) published in a language the registry knows."""
    if not journal_counts:
        raise ValueError("journal_counts is empty")
    if any(n < 0 for n in journal_counts.values()):
        raise ValueError("journal counts must be non-negative")
    total = sum(journal_counts.values())
    if total == 0:
        raise ValueError("journal counts sum to zero")
    codes = reg.codes
    covered = [c for c in journal_counts if c in codes]
    return CoverageReport(
        languages_covered=len(covered),
        languages_total=len(journal_counts),
        journal_share=Fraction(sum(journal_counts[c] for c in covered), total),
        uncovered_languages=tuple(sorted(c for c in journal_counts if c not in codes)),
    )
