import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from xlingcite.corpus import ReferenceEntry
from xlingcite.markers import (
    CrossLingualCitation,
    DetectionSet,
    MarkerMatch,
    detect_corpus,
    detect_cross_lingual,
    scan_marker,
)
from marker_oracle import oracle_scan
from synth import make_corpus


def golden(data_dir):
    with open(data_dir / "marker_golden.jsonl", encoding="utf-8") as fh:
        return [json.loads(line) for line in fh]


def as_dict(m):
    return None if m is None else {"token": m.raw_token, "span": list(m.byte_span)}


def test_golden_file(data_dir):
    cases = golden(data_dir)
    assert len(cases) >= 200
    for case in cases:
        assert as_dict(scan_marker(case["text"])) == case["match"], case["text"]


def test_golden_agrees_with_oracle(data_dir):
    for case in golden(data_dir):
        assert oracle_scan(case["text"]) == case["match"]


MARKER_ALPHABET = st.sampled_from(list("(in) \tRrusianJapeINéЖx.,"))


@settings(max_examples=400)
@given(st.text(alphabet=MARKER_ALPHABET, max_size=40))
def test_scan_matches_oracle(text):
    assert as_dict(scan_marker(text)) == oracle_scan(text)


@given(st.text(max_size=60))
def test_scan_matches_oracle_any_text(text):
    assert as_dict(scan_marker(text)) == oracle_scan(text)


@given(st.text(max_size=30), st.text(max_size=30))
def test_span_is_utf8_bytes(prefix, suffix):
    text = f"{prefix}(in Russian){suffix}"
    m = scan_marker(text)
    assert m is not None
    s, e = m.byte_span
    b = text.encode("utf-8")
    assert b[s:e].decode("utf-8").startswith("(")
    assert b[s:e].decode("utf-8").endswith(")")
    assert s <= len(prefix.encode("utf-8"))


@pytest.mark.parametrize(
    "raw, code",
    [
        ("V. I. Arnold, Lectures (in Russian), Nauka, 1975", "ru"),
        ("X, Title (in russain)", "ru"),
        ("Y, Title ( in   Japanese )", "ja"),
        ("Z, Title (in Chinese) (in Russian)", "zh"),
    ],
)
def test_detect_positive(reg, raw, code):
    c = detect_cross_lingual(ReferenceEntry(0, raw), reg, doc_id="d")
    assert c is not None and c.language == code and c.doc_id == "d"


@pytest.mark.parametrize(
    "raw",
    [
        "J. Doe, results (in press)",
        "J. Doe, results (in preparation)",
        "J. Doe, Title (in English)",
        "J. Doe, Title (In Russian)",
        "J. Doe, Title (in RUSSIAN)",
        "J. Doe, Title (in Klingon)",
        "J. Doe, Title (in press) (in Russian)",
        "J. Doe, Title in Russian",
        "",
    ],
)
def test_detect_negative(reg, raw):
    assert detect_cross_lingual(ReferenceEntry(0, raw or "x"), reg) is None


def test_case_insensitive_flag_widens_in_only(reg):
    ref = ReferenceEntry(0, "T (In Russian)")
    assert detect_cross_lingual(ref, reg) is None
    assert detect_cross_lingual(ref, reg, case_insensitive=True).language == "ru"
    assert detect_cross_lingual(ReferenceEntry(0, "T (IN RUSSIAN)"), reg, case_insensitive=True) is None


def test_leftmost_match_decides(reg):
    # the first marker is a stop word: the ref is not cross-lingual
    assert detect_cross_lingual(ReferenceEntry(0, "A (in press) (in Russian)"), reg) is None


def test_json_round_trip():
    c = CrossLingualCitation("d", 3, "ru", MarkerMatch("Russian", (4, 16)))
    assert CrossLingualCitation.from_json(json.loads(json.dumps(c.to_json()))) == c


def test_corpus_detection_precision_recall(reg):
    corpus = make_corpus(n_docs=200, refs_per_doc=10, plant_rate=0.1, decoy_rate=0.1, seed=5)
    det = detect_corpus(corpus.docs, reg)
    found = {(c.doc_id, c.ref_index): c.language for c in det.citations}
    assert found == corpus.truth
    assert det.refs_scanned == 2000 and det.docs_scanned == 200
    assert [(c.doc_id, c.ref_index) for c in det.citations] == sorted(found)


def test_workers_give_identical_results(reg):
    corpus = make_corpus(n_docs=120, refs_per_doc=5, plant_rate=0.2, seed=8)
    one = detect_corpus(corpus.docs, reg)
    many = detect_corpus(corpus.docs, reg, workers=2, chunk_size=25)
    assert one.citations == many.citations
    assert one.token_counts == many.token_counts
    assert (one.refs_scanned, one.docs_scanned) == (many.refs_scanned, many.docs_scanned)


def test_token_counts_include_rejected(reg):
    corpus = make_corpus(n_docs=1, refs_per_doc=0)
    from synth import doc_with
    doc = doc_with("d", ["Russian", None])
    det = detect_corpus([doc], reg)
    assert det.token_counts["Russian"] == 1
    det2 = detect_corpus([doc_with("e", ["press"])], reg)
    assert det2.citations == [] and det2.token_counts["press"] == 1
    assert det.merge(det2).token_rows() == [{"token": "Russian", "count": 1}, {"token": "press", "count": 1}]
    assert corpus.docs[0].references == ()


def test_empty_detection_set():
    assert len(DetectionSet()) == 0
    assert DetectionSet().by_doc() == {}
