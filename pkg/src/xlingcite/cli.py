"""Command-line front end.

Every subcommand writes its artifacts under ``--out`` and reports progress
on stderr. Exit codes: 0 success, 1 input error, 2 too many invalid lines.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import classify, impact, prevalence, titles, usage
from .corpus import (
    CorpusError,
    Document,
    LoadStats,
    MetadataStore,
    TerritoryLanguageMap,
    load_documents,
    load_metadata,
    load_territory_map,
    validate_corpus,
)
from .markers import DetectionSet, detect_corpus
from .registry import LanguageRegistry, RegistryError, load_registry
from .report import emit_csv, emit_heatmap_svg, emit_jsonl, matrix_rows

log = logging.getLogger("xlingcite")

SKIP_THRESHOLD = 0.01
TOP_LANGUAGES = 5
TOP_GEO_LANGUAGES = 10


class InputError(Exception):
    pass


class ValidationFailed(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    command: str
    out: str
    docs: Optional[str] = None
    metadata: Optional[str] = None
    territory: Optional[str] = None
    registry: Optional[str] = None
    labels: list[str] = field(default_factory=list)
    pairs: Optional[str] = None
    lexicon: Optional[str] = None
    seed: int = 0
    marker_case_insensitive: bool = False
    validation: str = "skip"
    citation_window: Optional[tuple[int, int]] = (1, 100)
    workers: int = 1
    label_scheme: str = classify.THREE_CLASS


class Pipeline:
    """Lazily loads inputs and caches intermediate results for one run."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self._docs: Optional[list[Document]] = None
        self._store: Optional[MetadataStore] = None
        self._territory: Optional[TerritoryLanguageMap] = None
        self._registry: Optional[LanguageRegistry] = None
        self._detections: Optional[DetectionSet] = None
        self._contexts: Optional[usage.ContextSets] = None
        self.load_stats = LoadStats()

    def path(self, name: str) -> str:
        return os.path.join(self.cfg.out, name)

    def _require(self, attr: str) -> str:
        value = getattr(self.cfg, attr)
        if not value:
            raise InputError(f"--{attr.replace('_', '-')} is required for {self.cfg.command}")
        if not os.path.isfile(value):
            raise InputError(f"input file not found: {value}")
        return value

    @property
    def docs(self) -> list[Document]:
        if self._docs is None:
            path = self._require("docs")
            with open(path, "rb") as fh:
                try:
                    self._docs = list(load_documents(fh, self.cfg.validation, self.load_stats))
                except CorpusError as exc:
                    raise ValidationFailed(f"{path}: {exc}") from None
            s = self.load_stats
            log.info("loaded %d documents (%d lines, %d skipped)", s.loaded, s.lines, s.skipped)
            if s.skipped_ratio > SKIP_THRESHOLD:
                raise ValidationFailed(
                    f"{path}: {s.skipped} of {s.lines} lines invalid "
                    f"({100 * s.skipped_ratio:.2f}% > {100 * SKIP_THRESHOLD:.0f}%)"
                )
        return self._docs

    @property
    def store(self) -> MetadataStore:
        if self._store is None:
            path = self._require("metadata")
            with open(path, "rb") as fh:
                try:
                    self._store = load_metadata(fh)
                except CorpusError as exc:
                    raise InputError(f"{path}: {exc}") from None
            log.info("loaded %d metadata records", len(self._store))
        return self._store

    @property
    def territory(self) -> TerritoryLanguageMap:
        if self._territory is None:
            path = self._require("territory")
            with open(path, encoding="utf-8", newline="") as fh:
                try:
                    self._territory = load_territory_map(fh)
                except CorpusError as exc:
                    raise InputError(f"{path}: {exc}") from None
        return self._territory

    @property
    def registry(self) -> LanguageRegistry:
        if self._registry is None:
            if self.cfg.registry and not os.path.isfile(self.cfg.registry):
                raise InputError(f"input file not found: {self.cfg.registry}")
            try:
                self._registry = load_registry(self.cfg.registry)
            except RegistryError as exc:
                raise InputError(f"{self.cfg.registry}: {exc}") from None
        return self._registry

    @property
    def detections(self) -> DetectionSet:
        if self._detections is None:
            self._detections = detect_corpus(
                self.docs, self.registry, self.cfg.marker_case_insensitive, workers=self.cfg.workers
            )
            d = self._detections
            log.info("scanned %d refs in %d docs: %d cross-lingual", d.refs_scanned, d.docs_scanned, len(d))
        return self._detections

    @property
    def contexts(self) -> usage.ContextSets:
        if self._contexts is None:
            self._contexts = usage.extract_context_sets(self.docs, self.detections, self.cfg.seed)
        return self._contexts

    # ------------------------------------------------------------------ steps

    def detect(self) -> None:
        emit_jsonl((c.to_json() for c in self.detections.citations), self.path("detections.jsonl"))
        emit_csv(self.detections.token_rows(), self.path("tokens.csv"), ["token", "count"])

    def prevalence(self) -> None:
        docs, det = self.docs, self.detections
        summary = prevalence.prevalence_summary(docs, det)
        emit_csv(summary.rows(), self.path("prevalence.csv"), ["metric", "count", "total", "ratio"])
        emit_csv(summary.language_rows(), self.path("languages.csv"), ["language", "references", "documents"])
        emit_csv(summary.histogram_rows(), self.path("languages_per_doc.csv"), ["languages", "documents"])

        top = [r["language"] for r in summary.language_rows()[:TOP_LANGUAGES]]
        for group in ("year", "discipline"):
            rows = []
            for lang in [None, *top]:
                rates = prevalence.grouped_doc_rates(docs, det, group, lang)
                rows.extend(prevalence.rate_rows(rates, group, lang))
            emit_csv(rows, self.path(f"rates_by_{group}.csv"), [group, "language", "rate"])

        xl = prevalence.cross_linguality(docs, det)
        emit_csv(xl.histogram_rows(), self.path("xlinguality_hist.csv"), ["bin_start", "bin_end", "documents"])
        xl_rows = [{"group": "all", "documents": len(xl.values), "mean": prevalence.fmt(xl.mean),
                    "sd": prevalence.fmt(xl.sd)}]
        for disc, mean in xl.per_discipline_mean.items():
            xl_rows.append({"group": disc, "documents": xl.per_discipline_count[disc],
                            "mean": prevalence.fmt(mean), "sd": ""})
        emit_csv(xl_rows, self.path("xlinguality.csv"), ["group", "documents", "mean", "sd"])

        pairs = prevalence.language_pair_counts(det)
        emit_csv(prevalence.pair_rows(pairs), self.path("pairs.csv"), ["language_a", "language_b", "documents"])

        unmarked = titles.unmarked_rate(det, docs, self.registry)
        emit_csv(
            [{"language": r.language, "marked": r.marked, "unmarked": r.unmarked,
              "ratio": prevalence.fmt(r.ratio)} for r in unmarked],
            self.path("unmarked_report.csv"),
            ["language", "marked", "unmarked", "ratio"],
        )

    def usage(self) -> None:
        docs, det, store = self.docs, self.detections, self.store
        x, m = usage.self_citation_rates(docs, det, store)
        emit_csv(
            [{"scope": r.scope, "support": r.support, "strict": prevalence.fmt(r.strict),
              "loose": prevalence.fmt(r.loose), "excluded": r.excluded} for r in (x, m)],
            self.path("selfcite.csv"),
            ["scope", "support", "strict", "loose", "excluded"],
        )

        geo = usage.geo_origin_matrix(docs, det, store, self.territory)
        for mode in ("abs", "rel"):
            rows, cols = matrix_rows(geo, mode)
            emit_csv(rows, self.path(f"geo_{mode}.csv"), cols)
        if geo.total:
            top = geo.top(TOP_GEO_LANGUAGES)
            emit_heatmap_svg(top, self.path("geo_abs.svg"), "abs")
            emit_heatmap_svg(top, self.path("geo_rel.svg"), "rel")
            emit_heatmap_svg(geo, self.path("geo_all_rel.svg"), "rel")
            loc = usage.locality_summary(geo)
            loc_rows = [{"language": "all", "citations": geo.total, "locality": prevalence.fmt(loc.local_ratio),
                         "en_origin": prevalence.fmt(loc.anglosphere_ratio)}]
            for lang, (local, en) in loc.per_language.items():
                loc_rows.append({"language": lang, "citations": geo.row_total(lang),
                                 "locality": prevalence.fmt(local), "en_origin": prevalence.fmt(en)})
            emit_csv(loc_rows, self.path("locality.csv"), ["language", "citations", "locality", "en_origin"])
        else:
            log.warning("no located authors; skipping heatmaps and locality summary")

        sets = self.contexts
        for name, items in (("xling", sets.x_ling), ("mono", sets.mono), ("mixed", sets.mixed)):
            emit_jsonl((it.to_json(name) for it in items), self.path(f"contexts_{name}.jsonl"))
        emit_csv(
            [
                {"set": "x_ling", "pool": sets.x_ling_pool, "final": len(sets.x_ling)},
                {"set": "mono", "pool": sets.mono_pool, "final": len(sets.mono)},
                {"set": "mixed", "pool": len(sets.mixed), "final": len(sets.mixed)},
            ],
            self.path("contexts_summary.csv"),
            ["set", "pool", "final"],
        )

    def sample(self) -> list[str]:
        by_doc = self.detections.by_doc()
        target = [d for d in self.docs if d.doc_id in by_doc]
        try:
            ids = impact.stratified_random_set(self.docs, target, self.cfg.seed)
        except impact.SamplingError as exc:
            raise InputError(str(exc)) from None
        index = {d.doc_id: d for d in self.docs}
        emit_csv(
            [{"doc_id": i, "year": index[i].year, "discipline": index[i].discipline} for i in ids],
            self.path("sample.csv"),
            ["doc_id", "year", "discipline"],
        )
        return ids

    def resolve(self) -> None:
        rep = impact.resolution_rates(self.docs, self.detections, self.store)
        emit_csv(rep.rows(), self.path("resolution.csv"), ["language", "attempted", "resolved", "failure_rate"])

    def impact(self) -> None:
        random_ids = self.sample()
        xling_ids = sorted(self.detections.by_doc())
        cmp = impact.citation_compare(
            {"cross_lingual": xling_ids, "random": random_ids}, self.store, self.cfg.citation_window
        )
        emit_csv(cmp.rows(), self.path("impact.csv"), ["filter", "metric", "cross_lingual", "random"])
        self.resolve()
        if self.cfg.pairs:
            self.diff_pairs()

    def diff_pairs(self) -> None:
        path = self._require("pairs")
        pairs = []
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                if not line.strip():
                    continue
                try:
                    obj = json.loads(line)
                    pre, pub = obj["pre_refs"], obj["pub_refs"]
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise InputError(f"{path}: line {line_no}: {exc}") from None
                pairs.append({"pair_id": obj.get("pair_id"), "pre_refs": pre, "pub_refs": pub})
        try:
            stats = impact.pair_diff_stats(pairs, self.registry, self.cfg.marker_case_insensitive)
        except ValueError as exc:
            raise InputError(f"{path}: {exc}") from None
        emit_csv([stats.row("automated")], self.path("diff_pairs.csv"),
                 ["evaluation", "pairs", "increased", "decreased", "mean", "sd"])

    def classify(self) -> None:
        sets = self.contexts
        if self.cfg.lexicon and not os.path.isfile(self.cfg.lexicon):
            raise InputError(f"input file not found: {self.cfg.lexicon}")
        baseline = classify.CueLexiconClassifier.load(self.cfg.lexicon)
        sources = [("baseline", classify.label_sets(sets, list(classify.Task), baseline))]
        for path in self.cfg.labels:
            if not os.path.isfile(path):
                raise InputError(f"input file not found: {path}")
            with open(path, encoding="utf-8", newline="") as fh:
                try:
                    store = classify.import_labels(fh, self.cfg.label_scheme)
                except classify.LabelError as exc:
                    raise InputError(f"{path}: {exc}") from None
            sources.append((os.path.splitext(os.path.basename(path))[0], store))

        for name, store in sources:
            for task in classify.Task:
                if not store.labels[task]:
                    continue
                dist = classify.label_distribution(sets, store, task)
                cols = ["set"]
                for label in classify.LABELS[task]:
                    cols += [label.value, f"{label.value}_pct"]
                cols.append("excluded")
                emit_csv(classify.distribution_rows(dist, task), self.path(f"{name}_{task.value}_distribution.csv"),
                         cols)
                emit_csv(classify.discipline_rows(dist, task), self.path(f"{name}_{task.value}_by_discipline.csv"),
                         ["set", "discipline", "label", "count", "pct"])

    def validate(self) -> None:
        rep = validate_corpus(self.docs, self.store, self.territory)
        emit_csv(rep.as_rows(), self.path("validation.csv"), ["count", "value"])

    def report(self) -> None:
        self.validate()
        self.detect()
        self.prevalence()
        self.usage()
        self.classify()
        self.impact()


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", required=True, help="output directory (created if absent)")
    common.add_argument("--docs", help="documents JSONL")
    common.add_argument("--metadata", help="metadata JSONL")
    common.add_argument("--territory", help="territory CSV (country_code,language_code)")
    common.add_argument("--registry", help="language registry CSV (default: bundled)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--marker-case-insensitive", action="store_true",
                        help='also accept "(In <Language>)" markers')
    common.add_argument("--validation", choices=("skip", "abort"), default="skip")
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--citation-window", type=int, nargs=2, metavar=("LO", "HI"), default=(1, 100))
    common.add_argument("--no-citation-window", action="store_true")
    common.add_argument("--labels", action="append", default=[], help="label CSV (repeatable)")
    common.add_argument("--label-scheme", choices=(classify.THREE_CLASS, classify.TWO_CLASS),
                        default=classify.THREE_CLASS)
    common.add_argument("--lexicon", help="cue lexicon CSV for the baseline classifier")
    common.add_argument("--pairs", help="preprint/published pairs JSONL")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="xlingcite", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, help_text in (
        ("detect", "find language markers"),
        ("sample", "draw the stratified random comparison set"),
        ("resolve", "title-match references against metadata"),
        ("diff-pairs", "cross-lingual changes between preprint and published versions"),
        ("classify", "intent/sentiment distributions of citation contexts"),
        ("validate", "count corpus records and dangling links"),
        ("report", "run everything"),
    ):
        sub.add_parser(name, parents=[common], help=help_text)
    stats = sub.add_parser("stats", help="prevalence, usage, or impact statistics")
    stats_sub = stats.add_subparsers(dest="topic", required=True, parser_class=_Parser)
    for topic in ("prevalence", "usage", "impact"):
        stats_sub.add_parser(topic, parents=[common])
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    command = args.command if args.command != "stats" else f"stats {args.topic}"
    return RunConfig(
        command=command,
        out=args.out,
        docs=args.docs,
        metadata=args.metadata,
        territory=args.territory,
        registry=args.registry,
        labels=list(args.labels),
        pairs=args.pairs,
        lexicon=args.lexicon,
        seed=args.seed,
        marker_case_insensitive=args.marker_case_insensitive,
        validation=args.validation,
        citation_window=None if args.no_citation_window else tuple(args.citation_window),
        workers=args.workers,
        label_scheme=args.label_scheme,
    )


STEPS = {
    "detect": "detect",
    "sample": "sample",
    "resolve": "resolve",
    "diff-pairs": "diff_pairs",
    "classify": "classify",
    "validate": "validate",
    "report": "report",
    "stats prevalence": "prevalence",
    "stats usage": "usage",
    "stats impact": "impact",
}


def run_command(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    cfg = config_from_args(args)
    pipe = Pipeline(cfg)
    try:
        os.makedirs(cfg.out, exist_ok=True)
        getattr(pipe, STEPS[cfg.command])()
    except ValidationFailed as exc:
        print(f"xlingcite: validation failed: {exc}", file=sys.stderr)
        return 2
    except (InputError, CorpusError, RegistryError, OSError) as exc:
        print(f"xlingcite: {exc}", file=sys.stderr)
        return 1
    if pipe._detections is not None:
        d = pipe._detections
        print(
            f"xlingcite {cfg.command}: {d.docs_scanned} docs, {d.refs_scanned} refs, "
            f"{len(d)} cross-lingual references",
            file=sys.stderr,
        )
    return 0


def main() -> None:
    sys.exit(run_command())


if __name__ == "__main__":
    main()
