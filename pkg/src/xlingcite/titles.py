"""Script-based language identification of cited titles.

Only non-Latin scripts give a usable language signal: a Cyrillic or kana
title says a lot about the cited work, an all-Latin title says almost
nothing. The built-in identifier therefore maps scripts to languages and
marks every Latin-script guess unreliable. A statistical identifier can be
plugged in as a callable ``title -> (code, confidence)``.
"""

from __future__ import annotations

import enum
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Optional, Sequence

from .corpus import Document, ReferenceEntry
from .markers import MARKER_RE, DetectionSet
from .registry import LanguageRegistry

ShortTextIdentifier = Callable[[str], tuple[Optional[str], float]]

DEFAULT_MAJORITY = 0.8


class ScriptClass(str, enum.Enum):
    LATIN = "Latin"
    CYRILLIC = "Cyrillic"
    HAN = "Han"
    JAPANESE = "Japanese"
    HANGUL = "Hangul"
    GREEK = "Greek"
    ARABIC = "Arabic"
    HEBREW = "Hebrew"
    MIXED = "Mixed"
    OTHER = "Other"
    EMPTY = "Empty"


UNRELIABLE_SCRIPTS = frozenset({ScriptClass.LATIN, ScriptClass.MIXED, ScriptClass.OTHER, ScriptClass.EMPTY})

# code, script_level
SCRIPT_LANGUAGE: dict[ScriptClass, tuple[str, bool]] = {
    ScriptClass.CYRILLIC: ("ru", True),
    ScriptClass.JAPANESE: ("ja", False),
    ScriptClass.HANGUL: ("ko", False),
    ScriptClass.GREEK: ("el", False),
    ScriptClass.HEBREW: ("he", False),
    ScriptClass.ARABIC: ("fa", True),
    ScriptClass.HAN: ("zh", False),
}

_KANA = "Kana"
_NAME_PREFIXES = (
    ("LATIN", ScriptClass.LATIN),
    ("FULLWIDTH LATIN", ScriptClass.LATIN),
    ("CYRILLIC", ScriptClass.CYRILLIC),
    ("GREEK", ScriptClass.GREEK),
    ("ARABIC", ScriptClass.ARABIC),
    ("HEBREW", ScriptClass.HEBREW),
    ("HANGUL", ScriptClass.HANGUL),
    ("HALFWIDTH HANGUL", ScriptClass.HANGUL),
    ("CJK UNIFIED IDEOGRAPH", ScriptClass.HAN),
    ("CJK COMPATIBILITY IDEOGRAPH", ScriptClass.HAN),
    ("IDEOGRAPHIC ITERATION MARK", ScriptClass.HAN),
    ("HIRAGANA", _KANA),
    ("KATAKANA", _KANA),
    ("HALFWIDTH KATAKANA", _KANA),
)


def _char_script(ch: str):
    name = unicodedata.name(ch, "")
    for prefix, script in _NAME_PREFIXES:
        if name.startswith(prefix):
            return script
    return ScriptClass.OTHER


def _is_letter(ch: str) -> bool:
    # 々 and ー are Lm, kana/han are Lo; combining marks do not count
    return unicodedata.category(ch).startswith("L")


def classify_script(text: str, majority: float = DEFAULT_MAJORITY) -> ScriptClass:
    """Classify ``text`` by the Unicode scripts of its letters.

    Any kana makes Han+kana count together as Japanese. The winning script
    needs at least ``majority`` of the letters, otherwise the result is Mixed.
    """
    counts: Counter = Counter(_char_script(ch) for ch in text if _is_letter(ch))
    total = sum(counts.values())
    if total == 0:
        return ScriptClass.EMPTY
    if counts[_KANA]:
        counts[ScriptClass.JAPANESE] = counts.pop(_KANA) + counts.pop(ScriptClass.HAN, 0)
    # deterministic tie-break by enum order
    order = list(ScriptClass)
    script, n = max(counts.items(), key=lambda kv: (kv[1], -order.index(kv[0])))
    if n < majority * total:
        return ScriptClass.MIXED
    return script


@dataclass(frozen=True)
class LanguageGuess:
    code: Optional[str]
    script: ScriptClass
    # code only identifies the script family (e.g. Cyrillic -> ru)
    script_level: bool = False

    @property
    def reliable(self) -> bool:
        return self.script not in UNRELIABLE_SCRIPTS


def identify_title_language(
    title: str,
    plugin: Optional[ShortTextIdentifier] = None,
    majority: float = DEFAULT_MAJORITY,
) -> LanguageGuess:
    script = classify_script(title, majority)
    code, script_level = SCRIPT_LANGUAGE.get(script, (None, False))
    if plugin is not None and (script is ScriptClass.LATIN or script_level):
        guess, _confidence = plugin(title)
        if guess:
            return LanguageGuess(guess, script, False)
    return LanguageGuess(code, script, script_level)


_QUOTED = re.compile(r"``(.+?)''|\"(.+?)\"|“(.+?)”|‘(.+?)’|„(.+?)[“”]|«(.+?)»|(?<!\w)'(.+?)'(?!\w)")
_YEAR_OR_NUMBERS = re.compile(r"^[\s\d()\[\]:;/\-–]*$")
_PAGES = re.compile(r"^\s*(pp?|vol|no|nr)\s*\d", re.IGNORECASE)
_CONNECTORS = {"and", "&", "et", "al", "und", "и"}


def _letters(text: str) -> int:
    return sum(1 for ch in text if ch.isalpha())


def _wide_letters(text: str) -> int:
    return sum(1 for ch in text if ch.isalpha() and unicodedata.east_asian_width(ch) in ("W", "F"))


def _enough_letters(text: str) -> bool:
    """At least 8 letters, or 4 in dense East Asian scripts."""
    return _letters(text) >= 8 or _wide_letters(text) >= 4


def _author_like(words: Sequence[str]) -> bool:
    if any(w.lower() in ("et", "al") for w in words):
        return True
    names = all(w.lower() in _CONNECTORS or w[:1].isupper() for w in words)
    if not names:
        return False
    return len(words) <= 2 or any(w.lower() in _CONNECTORS for w in words)


def extract_title(entry: ReferenceEntry) -> Optional[str]:
    """Best-effort title of the cited work.

    Order of preference: the entry's own ``title`` field, the first quoted
    span with at least 8 letters (4 for East Asian scripts), the longest comma/period-delimited segment
    that does not look like authors, a year, or page numbers.
    """
    if entry.title:
        return entry.title
    text = MARKER_RE.sub(" ", entry.raw_text)
    for m in _QUOTED.finditer(text):
        span = next(g for g in m.groups() if g is not None).strip()
        if _enough_letters(span):
            return span
    best: Optional[str] = None
    for seg in re.split(r"[.,]", text):
        seg = seg.strip()
        words = seg.split()
        # East Asian titles carry no spaces, so the two-word floor skips them
        if not _enough_letters(seg) or (len(words) < 2 and _wide_letters(seg) < 4):
            continue
        if _YEAR_OR_NUMBERS.match(seg) or _PAGES.match(seg) or _author_like(words):
            continue
        if best is None or len(seg) > len(best):
            best = seg
    return best


@dataclass(frozen=True)
class UnmarkedRow:
    language: str
    marked: int
    unmarked: int

    @property
    def ratio(self) -> Optional[Fraction]:
        if self.marked == 0:
            return None
        return Fraction(self.unmarked, self.marked)


def unmarked_rows(marked: Mapping[str, int], unmarked: Mapping[str, int]) -> list[UnmarkedRow]:
    """Combine per-language counts, ordered by marked count descending."""
    langs = set(marked) | set(unmarked)
    rows = [UnmarkedRow(l, marked.get(l, 0), unmarked.get(l, 0)) for l in langs]
    return sorted(rows, key=lambda r: (-r.marked, -r.unmarked, r.language))


def unmarked_rate(
    detections: DetectionSet,
    docs: Iterable[Document],
    reg: Optional[LanguageRegistry] = None,
    plugin: Optional[ShortTextIdentifier] = None,
) -> list[UnmarkedRow]:
    """Estimate how many non-Latin-script references lack a language marker.

    A reference counts as unmarked for language L when it has no detection
    and its extracted title gets a reliable guess of L.
    """
    detected = detections.keys()
    marked = Counter(c.language for c in detections.citations)
    unmarked: Counter = Counter()
    for doc in docs:
        for ref in doc.references:
            if (doc.doc_id, ref.ref_index) in detected:
                continue
            title = extract_title(ref)
            if not title:
                continue
            guess = identify_title_language(title, plugin)
            if not guess.reliable or guess.code is None:
                continue
            if reg is not None and reg.english_code == guess.code:
                continue
            unmarked[guess.code] += 1
    return unmarked_rows(marked, unmarked)


def below_bound(rows: Iterable[UnmarkedRow], bound: Fraction = Fraction(2, 100)) -> dict[str, bool]:
    return {r.language: r.ratio is not None and r.ratio < bound for r in rows}


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: int


def f1_score(precision: float, recall: float) -> float:
    if precision + recall == 0:
        return 0.0
    return 2 * precision * recall / (precision + recall)


def evaluate_identifier(
    labeled: Sequence[tuple[str, str]],
    plugin: Optional[ShortTextIdentifier],
    reg: LanguageRegistry,
) -> dict[str, ClassScores]:
    """Per-language precision/recall/F1 of an identifier on (title, gold) pairs.

    Without a plugin the built-in script identifier is evaluated. A missing
    prediction counts against recall only.
    """
    if not labeled:
        raise ValueError("labeled sample is empty")
    codes = reg.codes
    bad = sorted({gold for _, gold in labeled if gold not in codes})
    if bad:
        raise ValueError(f"gold codes not in registry: {bad}")
    tp: Counter = Counter()
    predicted: Counter = Counter()
    support: Counter = Counter()
    for title, gold in labeled:
        pred = plugin(title)[0] if plugin is not None else identify_title_language(title).code
        support[gold] += 1
        if pred is not None:
            predicted[pred] += 1
            if pred == gold:
                tp[gold] += 1
    scores = {}
    for lang in sorted(set(support) | set(predicted)):
        p = tp[lang] / predicted[lang] if predicted[lang] else 0.0
        r = tp[lang] / support[lang] if support[lang] else 0.0
        scores[lang] = ClassScores(p, r, f1_score(p, r), support[lang])
    return scores
