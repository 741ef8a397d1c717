"""Citation intent and sentiment labels for context sets.

Real labels come from external models through :func:`import_labels`. The
cue-lexicon baseline exists so the pipeline runs end to end without them.
"""

from __future__ import annotations

import csv
import enum
import io
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from typing import Callable, Iterable, Mapping, Optional

from .corpus import InTextCitation
from .usage import ContextSets


class Task(str, enum.Enum):
    INTENT = "intent"
    SENTIMENT = "sentiment"


class IntentLabel(str, enum.Enum):
    BACKGROUND = "Background"
    METHOD = "Method"
    RESULT = "Result"


class SentimentLabel(str, enum.Enum):
    NEUTRAL = "Neutral"
    POSITIVE = "Positive"
    NEGATIVE = "Negative"


LABELS = {Task.INTENT: IntentLabel, Task.SENTIMENT: SentimentLabel}
DEFAULTS = {Task.INTENT: IntentLabel.BACKGROUND, Task.SENTIMENT: SentimentLabel.NEUTRAL}

THREE_CLASS = "three_class"
TWO_CLASS = "two_class"


class LabelError(ValueError):
    pass


class ClassificationError(RuntimeError):
    def __init__(self, sentence_id: int, cause: BaseException):
        self.sentence_id = sentence_id
        super().__init__(f"classifier failed on sentence {sentence_id}: {cause}")


ContextClassifier = Callable[[str, Task], enum.Enum]


def parse_label(task: Task, value: str, scheme: str = THREE_CLASS):
    try:
        label = LABELS[task](value.strip())
    except ValueError:
        raise LabelError(f"unknown {task.value} label {value!r}") from None
    if task is Task.SENTIMENT and scheme == TWO_CLASS and label is SentimentLabel.NEGATIVE:
        raise LabelError("Negative is not part of the two-class sentiment scheme")
    return label


def _cue_matches(cue: str, text: str) -> bool:
    # "a ... b" means a, then b later in the sentence
    pos = 0
    for part in cue.split("..."):
        part = part.strip()
        if not part:
            continue
        pos = text.find(part, pos)
        if pos < 0:
            return False
        pos += len(part)
    return True


@dataclass
class CueLexiconClassifier:
    """Ordered cue rules, first match wins, casefolded substring matching."""

    rules: dict[Task, list[tuple[enum.Enum, str]]] = field(default_factory=dict)

    def __call__(self, text: str, task: Task) -> enum.Enum:
        task = Task(task)
        folded = text.casefold()
        for label, cue in self.rules.get(task, ()):
            if _cue_matches(cue, folded):
                return label
        return DEFAULTS[task]

    @classmethod
    def from_rows(cls, rows: Iterable[Mapping[str, str]]) -> "CueLexiconClassifier":
        rules: dict[Task, list] = {Task.INTENT: [], Task.SENTIMENT: []}
        for row in rows:
            task = Task(row["task"].strip())
            label = parse_label(task, row["label"])
            rules[task].append((label, row["cue"].strip().casefold()))
        return cls(rules)

    @classmethod
    def load(cls, path: Optional[str] = None) -> "CueLexiconClassifier":
        if path is None:
            text = resources.files("xlingcite").joinpath("data/lexicon.csv").read_text("utf-8")
            return cls.from_rows(csv.DictReader(io.StringIO(text)))
        with open(path, encoding="utf-8", newline="") as fh:
            return cls.from_rows(csv.DictReader(fh))


def classify_context(ctx: InTextCitation, task: Task, classifier: ContextClassifier):
    if not ctx.sentence_text:
        raise ValueError(f"sentence {ctx.sentence_id} is empty")
    try:
        return LABELS[Task(task)](classifier(ctx.sentence_text, Task(task)))
    except Exception as exc:
        raise ClassificationError(ctx.sentence_id, exc) from exc


LabelKey = tuple[str, int, int]  # doc_id, sentence_id, ref_index


@dataclass
class LabelStore:
    labels: dict[Task, dict[LabelKey, enum.Enum]] = field(
        default_factory=lambda: {Task.INTENT: {}, Task.SENTIMENT: {}}
    )
    scheme: str = THREE_CLASS

    def __len__(self) -> int:
        return sum(len(v) for v in self.labels.values())

    def get(self, task: Task, key: LabelKey):
        return self.labels[Task(task)].get(key)

    def put(self, task: Task, key: LabelKey, label) -> None:
        table = self.labels[Task(task)]
        if key in table:
            raise LabelError(f"duplicate label for {task.value} {key}")
        table[key] = label


def import_labels(stream: Iterable[str], scheme: str = THREE_CLASS) -> LabelStore:
    """Read ``doc_id,sentence_id,ref_index,task,label`` rows."""
    if scheme not in (THREE_CLASS, TWO_CLASS):
        raise ValueError(f"unknown scheme {scheme!r}")
    store = LabelStore(scheme=scheme)
    reader = csv.DictReader(stream)
    need = {"doc_id", "sentence_id", "ref_index", "task", "label"}
    if reader.fieldnames is None or not need <= set(reader.fieldnames):
        raise LabelError(f"label file needs columns {sorted(need)}")
    for row_no, row in enumerate(reader, start=2):
        try:
            task = Task(row["task"].strip())
            key = (row["doc_id"], int(row["sentence_id"]), int(row["ref_index"]))
        except ValueError as exc:
            raise LabelError(f"row {row_no}: {exc}") from None
        try:
            store.put(task, key, parse_label(task, row["label"], scheme))
        except LabelError as exc:
            raise LabelError(f"row {row_no}: {exc}") from None
    return store


def label_sets(sets: ContextSets, tasks: Iterable[Task], classifier: ContextClassifier) -> LabelStore:
    """Label every context of ``sets`` with ``classifier`` for each task."""
    store = LabelStore()
    for task in tasks:
        for items in sets.as_dict().values():
            for it in items:
                if store.get(task, it.key) is None:
                    store.put(task, it.key, classify_context(it.context, task, classifier))
    return store


@dataclass
class SetDistribution:
    counts: Counter
    excluded: int
    per_discipline: dict[str, Counter] = field(default_factory=dict)

    @property
    def labeled(self) -> int:
        return sum(self.counts.values())

    def percentage(self, label) -> Fraction:
        return Fraction(100 * self.counts.get(label, 0), self.labeled) if self.labeled else Fraction(0)


def label_distribution(
    sets: ContextSets,
    labels: LabelStore,
    task: Task,
) -> dict[str, SetDistribution]:
    task = Task(task)
    out = {}
    for name, items in sets.as_dict().items():
        counts: Counter = Counter()
        per_disc: dict[str, Counter] = {}
        excluded = 0
        for it in items:
            label = labels.get(task, it.key)
            if label is None:
                excluded += 1
                continue
            counts[label] += 1
            per_disc.setdefault(it.discipline, Counter())[label] += 1
        out[name] = SetDistribution(counts, excluded, dict(sorted(per_disc.items())))
    return out


def distribution_rows(dist: Mapping[str, SetDistribution], task: Task) -> list[dict]:
    """One row per set: count and one-decimal percentage per class."""
    rows = []
    for name, d in dist.items():
        row: dict = {"set": name}
        for label in LABELS[Task(task)]:
            row[label.value] = d.counts.get(label, 0)
            row[f"{label.value}_pct"] = f"{float(d.percentage(label)):.1f}"
        row["excluded"] = d.excluded
        rows.append(row)
    return rows


def discipline_rows(dist: Mapping[str, SetDistribution], task: Task) -> list[dict]:
    rows = []
    for name, d in dist.items():
        for disc, counts in d.per_discipline.items():
            total = sum(counts.values())
            for label in LABELS[Task(task)]:
                n = counts.get(label, 0)
                rows.append(
                    {"set": name, "discipline": disc, "label": label.value, "count": n,
                     "pct": f"{100 * n / total:.1f}" if total else "0.0"}
                )
    return rows
