import random
import statistics
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xlingcite.corpus import Document, MetadataRecord, MetadataStore, ReferenceEntry
from xlingcite.impact import (
    SamplingError,
    cell_of,
    citation_compare,
    delta_stats,
    pair_diff_stats,
    resolution_rates,
    resolve_reference,
    stratified_random_set,
)
from xlingcite.markers import detect_corpus
from synth import make_corpus
from pair_diff_reference import AUTOMATED, MANUAL, REFERENCE_ROWS


def test_sampler_exact_cells():
    corpus = make_corpus(n_docs=300, refs_per_doc=1, seed=4)
    target = corpus.docs[:40]
    ids = stratified_random_set(corpus.docs, target, seed=1)
    by_id = {d.doc_id: d for d in corpus.docs}
    assert Counter(cell_of(by_id[i]) for i in ids) == Counter(cell_of(d) for d in target)
    assert ids == stratified_random_set(corpus.docs, target, seed=1)
    assert len(set(ids)) == len(ids)


def test_sampler_forced():
    docs = [Document(f"d{i}", "math", 2010) for i in range(5)] + [Document("x", "cs", 2010)]
    assert stratified_random_set(docs, docs[:5], seed=9) == [f"d{i}" for i in range(5)]


def test_sampler_insufficient_names_cell():
    docs = [Document("a", "math", 2010)]
    with pytest.raises(SamplingError, match="2010.*math"):
        stratified_random_set(docs, docs + [Document("b", "math", 2010)])


def test_sampler_seeds_differ_on_large_cells():
    docs = [Document(f"d{i:04d}", "math", 2010) for i in range(2000)]
    a = stratified_random_set(docs, docs[:100], seed=1)
    b = stratified_random_set(docs, docs[:100], seed=2)
    assert a != b


def test_delta_examples():
    s = delta_stats([-1, 0, 0, 1])
    assert (s.mean_delta, s.increased, s.decreased) == (0, 1, 1)
    with pytest.raises(ValueError):
        delta_stats([])


@given(st.lists(st.integers(-20, 20), min_size=1, max_size=200))
def test_delta_stats_oracle(deltas):
    s = delta_stats(deltas)
    assert s.mean_delta == Fraction(sum(deltas), len(deltas))
    assert s.mean_delta * s.pairs == sum(deltas)
    assert abs(s.sd_delta - statistics.pstdev(deltas)) < 1e-12
    assert s.increased + s.decreased <= s.pairs


def test_reference_rows():
    assert [delta_stats(MANUAL).row("Manual"), delta_stats(AUTOMATED).row("Automated")] == REFERENCE_ROWS


def test_pair_diff_reruns_detection(reg):
    pairs = [
        {"pre_refs": ["A (in Russian)", "B"], "pub_refs": ["A", "B"]},
        {"pre_refs": ["A"], "pub_refs": ["A (in Japanese)", "B (in press)"]},
        {"pre_refs": [], "pub_refs": []},
    ]
    s = pair_diff_stats(pairs, reg)
    assert (s.pairs, s.increased, s.decreased, s.delta_sum) == (3, 1, 1, 0)
    with pytest.raises(ValueError):
        pair_diff_stats([], reg)


def test_citation_compare():
    store = MetadataStore([
        MetadataRecord("a", "t", citation_count=1, published_version_id="p"),
        MetadataRecord("b", "t", citation_count=3),
        MetadataRecord("c", "t", citation_count=0),
        MetadataRecord("p", "t", citation_count=500),
    ])
    cmp = citation_compare({"x": ["a", "b", "zz"], "y": ["c", "p"]}, store, window=(1, 100))
    assert cmp.sets["x"].mean == 2 and cmp.sets["x"].published_ratio == Fraction(1, 2)
    assert cmp.unresolved == {"x": 1, "y": 0}
    assert cmp.filtered["y"].docs == 0 and cmp.filtered["x"].docs == 2
    for name in cmp.sets:
        assert cmp.filtered[name].docs <= cmp.sets[name].docs
    rows = cmp.rows()
    assert rows[0] == {"filter": "none", "metric": "docs", "x": 2, "y": 2}
    assert rows[4]["filter"] == "1<=cit<=100"


def test_transliterated_and_translated_titles_fail():
    store = MetadataStore([
        MetadataRecord("j1", "代名詞が指すもの,その指し方"),
        MetadataRecord("j2", "記憶付き可逆論理素子の能力の階層構造について"),
        MetadataRecord("e1", "Foundations of Algebraic Geometry"),
    ])
    transliterated = ReferenceEntry(0, "x", title="Daimeishi-ga Sasumono Sono Sashi-kata")
    translated = ReferenceEntry(1, "x", title="Hierarchy of reversible logic elements with memory")
    assert resolve_reference(transliterated, store) is None
    assert resolve_reference(translated, store) is None
    assert resolve_reference(ReferenceEntry(2, "x", title="代名詞が指すもの、その指し方"), store) == "j1"
    assert resolve_reference(ReferenceEntry(3, "x", title="記憶付き可逆論理素子の能力の階層構造について"), store) == "j2"
    assert resolve_reference(ReferenceEntry(4, "x", title="foundations of algebraic geometry"), store) == "e1"


def test_ambiguous_is_failure():
    store = MetadataStore([MetadataRecord("a", "Same Title"), MetadataRecord("b", "same title!")])
    assert resolve_reference(ReferenceEntry(0, "x", title="Same title"), store) is None
    docs = [Document("d", "math", 2000, (ReferenceEntry(0, "x", title="Same title"),))]
    from xlingcite.markers import DetectionSet
    rep = resolution_rates(docs, DetectionSet(), store)
    assert (rep.resolved, rep.ambiguous) == (0, 1)


def resolution_fixture(n_docs=10, refs=10, missing_per_doc=3, seed=0):
    """Docs whose titles are all unique; the store lacks ``missing_per_doc`` per doc."""
    rng = random.Random(seed)
    docs, records = [], []
    for d in range(n_docs):
        entries = []
        gone = set(rng.sample(range(refs), missing_per_doc))
        for i in range(refs):
            title = f"Study number {d} {i} of operators"
            lang = " (in Russian)" if i % 4 == 0 else ""
            entries.append(ReferenceEntry(i, f"A. Author, {title}, J. Math. 3 (1999){lang}"))
            if i not in gone:
                records.append(MetadataRecord(f"m{d}-{i}", title))
        docs.append(Document(f"d{d}", "math", 2000, tuple(entries)))
    return docs, records


def test_resolution_rate_exact(reg):
    docs, records = resolution_fixture()
    rep = resolution_rates(docs, detect_corpus(docs, reg), MetadataStore(records))
    assert rep.rate == Fraction(7, 10)
    det = detect_corpus(docs, reg)
    assert sum(r.attempted for r in rep.per_language.values()) == len(det)


def test_full_store_zero_failure(reg):
    docs, records = resolution_fixture(missing_per_doc=0)
    rep = resolution_rates(docs, detect_corpus(docs, reg), MetadataStore(records))
    assert rep.rate == 1
    assert all(r.failure_rate == 0 for r in rep.per_language.values())
    assert rep.rows()[0]["failure_rate"] == "0.0000"


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6))
def test_store_growth_monotone(seed):
    from xlingcite.registry import default_registry
    reg = default_registry()
    rng = random.Random(seed)
    docs, records = resolution_fixture(n_docs=4, missing_per_doc=rng.randint(0, 10), seed=seed)
    det = detect_corpus(docs, reg)
    k = rng.randint(0, len(records))
    rng.shuffle(records)
    small = MetadataStore(records[:k])
    # added records carry titles not already in the store
    big = small.extended(records[k:])
    a, b = resolution_rates(docs, det, small), resolution_rates(docs, det, big)
    assert b.rate >= a.rate
    for lang, r in a.per_language.items():
        assert b.per_language[lang].resolved >= r.resolved
