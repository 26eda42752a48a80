import json
import random

import pytest

from docasd.config import RunConfig
from docasd.datapipe import (
    DocRecord,
    build_preference_pairs,
    evaluate_corpus,
    parse_record,
    read_corpus,
    reward,
    reward_batch,
    select_best,
    write_preference_file,
)
from docasd.errors import DataError, InvalidInput, RecordSkipped
from docasd.scorer import MetricId
from conftest import join_doc, make_sentences

LEXICAL = MetricId("lexical")
CONFIG = RunConfig(metric_align="lexical", metric_eval="lexical")


def make_record(seed: int, n: int = 6, doc_id: str = "doc-1") -> DocRecord:
    sentences = make_sentences(random.Random(seed), n)
    src = join_doc(sentences)
    return DocRecord(
        doc_id=doc_id,
        src=src,
        candidates={
            "complete": src,
            "damaged": join_doc(sentences[: n // 2] + sentences[n // 2 + 1 :]),
        },
        src_lang="en",
        tgt_lang="en",
    )


def test_select_best_prefers_complete_candidate():
    record = make_record(1)
    system, result = select_best(record, LEXICAL, CONFIG)
    assert system == "complete"
    assert result.final == pytest.approx(1.0, abs=1e-12)


def test_select_best_single_candidate():
    record = DocRecord(doc_id="d", src="One here. Two here.",
                       candidates={"only": "One here. Two here."},
                       src_lang="en", tgt_lang="en")
    system, _ = select_best(record, LEXICAL, CONFIG)
    assert system == "only"


def test_select_best_tie_keeps_first_candidate():
    doc = "One here. Two here."
    record = DocRecord(doc_id="d", src=doc,
                       candidates={"b_first": doc, "a_second": doc},
                       src_lang="en", tgt_lang="en")
    system, _ = select_best(record, LEXICAL, CONFIG)
    assert system == "b_first"  # insertion order, not name order


def test_select_best_matches_max_of_individual_scores():
    from docasd.datapipe import score_candidate
    record = make_record(2)
    finals = {name: score_candidate(record, text, LEXICAL, CONFIG).final
              for name, text in record.candidates.items()}
    _, best = select_best(record, LEXICAL, CONFIG)
    assert best.final == max(finals.values())


def test_select_best_all_failures_skips_record():
    record = DocRecord(doc_id="d", src="Some source here.",
                       candidates={"empty": "   "}, src_lang="en", tgt_lang="en")
    with pytest.raises(RecordSkipped):
        select_best(record, LEXICAL, CONFIG)


def test_preference_pair_chooses_higher_scoring():
    record = make_record(3)
    triplet = build_preference_pairs(record, "complete", "damaged", LEXICAL, 0.0, CONFIG)
    assert triplet is not None
    assert triplet.chosen == record.candidates["complete"]
    assert triplet.rejected == record.candidates["damaged"]
    assert triplet.score_chosen > triplet.score_rejected
    assert triplet.margin == pytest.approx(triplet.score_chosen - triplet.score_rejected)


def test_preference_pair_antisymmetric():
    record = make_record(4)
    forward = build_preference_pairs(record, "complete", "damaged", LEXICAL, 0.0, CONFIG)
    backward = build_preference_pairs(record, "damaged", "complete", LEXICAL, 0.0, CONFIG)
    assert forward == backward


def test_preference_pair_equal_scores_emit_nothing():
    doc = "One here. Two here."
    record = DocRecord(doc_id="d", src=doc, candidates={"a": doc, "b": doc},
                       src_lang="en", tgt_lang="en")
    assert build_preference_pairs(record, "a", "b", LEXICAL, 0.0, CONFIG) is None


def test_preference_pair_margin_filters_small_gaps():
    record = make_record(5)
    wide_open = build_preference_pairs(record, "complete", "damaged", LEXICAL, 0.0, CONFIG)
    gap = wide_open.score_chosen - wide_open.score_rejected
    filtered = build_preference_pairs(record, "complete", "damaged", LEXICAL,
                                      gap + 0.01, CONFIG)
    assert filtered is None


def test_preference_pair_unknown_candidate():
    record = make_record(6)
    with pytest.raises(InvalidInput):
        build_preference_pairs(record, "complete", "nope", LEXICAL, 0.0, CONFIG)


def test_reward_prefers_faithful_hypothesis():
    sentences = make_sentences(random.Random(8), 7)
    src = join_doc(sentences)
    faithful = src
    degraded = join_doc(sentences[:3] + sentences[5:])  # two sentences dropped
    good = reward(src, faithful, LEXICAL, CONFIG)
    bad = reward(src, degraded, LEXICAL, CONFIG)
    assert good > bad


def test_reward_failure_returns_sentinel_not_crash():
    assert reward("Source text here.", "   ", LEXICAL, CONFIG) == 0.0
    assert reward("Source text here.", "   ", LEXICAL, CONFIG,
                  failure_reward=-1.0) == -1.0


def test_reward_rejects_reference_based_metric():
    with pytest.raises(InvalidInput):
        reward("src", "hyp", MetricId("ref-remote:wmt22-comet-da"), CONFIG)


def test_reward_batch_eight_samples():
    sentences = make_sentences(random.Random(9), 5)
    src = join_doc(sentences)
    hyps = [src] * 3 + [join_doc(sentences[:-1])] * 5
    rewards = reward_batch(src, hyps, LEXICAL, CONFIG)
    assert len(rewards) == 8
    assert all(isinstance(r, float) for r in rewards)
    assert rewards[0] > rewards[-1]


def test_reward_invariant_to_trailing_whitespace():
    sentences = make_sentences(random.Random(10), 4)
    src = join_doc(sentences)
    hyp = join_doc(sentences[:-1])
    assert reward(src, hyp, LEXICAL, CONFIG) == reward(src, hyp + "  \n ", LEXICAL, CONFIG)


# --- corpus I/O -------------------------------------------------------------


def write_corpus(path, rows):
    path.write_text("\n".join(json.dumps(r, ensure_ascii=False) for r in rows) + "\n",
                    encoding="utf-8")


def test_read_corpus_round_trip(tmp_path):
    rows = [
        {"doc_id": "a", "src": "One. Two.", "tgt": "One. Two.",
         "src_lang": "en", "tgt_lang": "en"},
        {"doc_id": "b", "src": "Three. Four.", "candidates": {"x": "Three.", "y": "Four."},
         "ref": "Three. Four.", "src_lang": "en", "tgt_lang": "en"},
    ]
    corpus = tmp_path / "corpus.jsonl"
    write_corpus(corpus, rows)
    records = read_corpus(corpus)
    assert [r.doc_id for r in records] == ["a", "b"]
    assert records[0].candidates == {"system": "One. Two."}
    assert records[1].ref == "Three. Four."


def test_read_corpus_reports_line_numbers(tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    corpus.write_text('{"doc_id": "a", "src": "x", "tgt": "y", "src_lang": "en", '
                      '"tgt_lang": "en"}\nnot json\n{"doc_id": "c"}\n', encoding="utf-8")
    with pytest.raises(DataError, match="line 2.*line 3"):
        read_corpus(corpus)


def test_read_corpus_rejects_duplicates_and_empty(tmp_path):
    corpus = tmp_path / "dups.jsonl"
    row = {"doc_id": "a", "src": "x", "tgt": "y", "src_lang": "en", "tgt_lang": "en"}
    write_corpus(corpus, [row, row])
    with pytest.raises(DataError, match="duplicate"):
        read_corpus(corpus)
    empty = tmp_path / "empty.jsonl"
    empty.write_text("", encoding="utf-8")
    with pytest.raises(DataError):
        read_corpus(empty)


def test_parse_record_requires_translation():
    with pytest.raises(DataError):
        parse_record({"doc_id": "a", "src": "x", "src_lang": "en", "tgt_lang": "en"})


def test_evaluate_corpus_ordering_and_skips():
    records = [make_record(20, doc_id="doc-b"), make_record(21, doc_id="doc-a")]
    records.append(DocRecord(doc_id="doc-c", src="Source here.",
                             candidates={"bad": " "}, src_lang="en", tgt_lang="en"))
    results, skipped = evaluate_corpus(records, LEXICAL, CONFIG)
    assert [(doc, sys) for doc, sys, _ in results] == [
        ("doc-a", "complete"), ("doc-a", "damaged"),
        ("doc-b", "complete"), ("doc-b", "damaged"),
    ]
    assert len(skipped) == 1 and skipped[0]["doc_id"] == "doc-c"


def test_evaluate_corpus_parallel_equals_sequential():
    records = [make_record(30 + i, doc_id=f"doc-{i}") for i in range(4)]
    seq_results, _ = evaluate_corpus(records, LEXICAL, CONFIG)
    par_config = RunConfig(metric_align="lexical", metric_eval="lexical", workers=4)
    par_results, _ = evaluate_corpus(records, LEXICAL, par_config)
    assert [(d, s, r.final) for d, s, r in seq_results] == \
           [(d, s, r.final) for d, s, r in par_results]


def test_write_preference_file_format(tmp_path):
    record = make_record(40)
    triplet = build_preference_pairs(record, "complete", "damaged", LEXICAL, 0.0, CONFIG)
    out = tmp_path / "prefs.jsonl"
    write_preference_file([triplet], out)
    lines = out.read_text(encoding="utf-8").splitlines()
    assert len(lines) == 1
    payload = json.loads(lines[0])
    assert set(payload) == {"src", "chosen", "rejected", "score_chosen", "score_rejected"}
    assert payload["chosen"] == triplet.chosen
