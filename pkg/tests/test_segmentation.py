import sys

import pytest

from docasd.errors import EmptyDocument, InvalidInput, SegmenterBackendError
from docasd.segmentation import SegmenterConfig, SentenceList, segment, segment_via_external


def test_two_latin_sentences():
    result = segment("Hello world. How are you?", "en")
    assert result.sentences == ("Hello world.", "How are you?")


def test_cjk_full_stops():
    result = segment("你好。今天天气好！", "zh")
    assert result.sentences == ("你好。", "今天天气好！")


def test_six_sentence_document(golden_source):
    result = segment(golden_source, "en")
    assert len(result) == 6
    assert result.sentences[0] == "The committee met on Monday morning."
    assert result.sentences[-1] == "The vote was postponed until Friday."


def test_spans_point_into_normalized_text():
    doc = "  One sentence here.   Another one!  "
    result = segment(doc, "en")
    for sent, (start, end) in zip(result.sentences, result.spans):
        assert result.text[start:end] == sent
        assert result.text[start:end].strip() == sent


def test_round_trip_minus_whitespace():
    doc = "First part. Second part! Third?"
    result = segment(doc, "en")
    joined = "".join(result.text[s:e] for s, e in result.spans)
    assert joined == "First part.Second part!Third?"
    assert " ".join(result.sentences) == doc


def test_abbreviations_do_not_split():
    result = segment("Dr. Smith met Mr. Jones. They talked.", "en")
    assert result.sentences == ("Dr. Smith met Mr. Jones.", "They talked.")


def test_initials_do_not_split():
    result = segment("J. Smith arrived late. Nobody minded.", "en")
    assert len(result) == 2


def test_decimals_do_not_split():
    result = segment("The value is 3.14 exactly. Moving on.", "en")
    assert result.sentences[0] == "The value is 3.14 exactly."


def test_closing_quote_stays_attached():
    result = segment('He said "stop." Then he left.', "en")
    assert result.sentences == ('He said "stop."', "Then he left.")


def test_newline_is_hard_boundary():
    result = segment("no punctuation here\nsecond line", "en")
    assert result.sentences == ("no punctuation here", "second line")


def test_whitespace_only_chunks_dropped():
    result = segment("One.   \n \n Two.", "en")
    assert result.sentences == ("One.", "Two.")


def test_empty_document_raises():
    with pytest.raises(EmptyDocument):
        segment("   \n  ", "en")


def test_idempotent_on_single_sentence():
    once = segment("Just one sentence here.", "en")
    assert len(once) == 1
    again = segment(once.sentences[0], "en")
    assert again.sentences == once.sentences


def test_deterministic():
    doc = "Alpha beta. Gamma delta! Epsilon?"
    first = segment(doc, "en")
    second = segment(doc, "en")
    assert first == second


def test_nfc_normalization_applied():
    # e + combining acute composes to a single code point
    doc = "Café closed. It reopened."
    result = segment(doc, "en")
    assert result.sentences[0] == "Café closed."


def test_language_override_changes_rule_set():
    config = SegmenterConfig(language_overrides={"en": "cjk"})
    # with the cjk rule set the abbreviation guard is off
    result = segment("Dr. Smith arrived.", "en", config)
    assert result.sentences == ("Dr.", "Smith arrived.")


def test_sentence_list_invariants_enforced():
    with pytest.raises(InvalidInput):
        SentenceList(doc_id="", language="en", sentences=("a.", "b."),
                     spans=((0, 2),), text="a. b.")
    with pytest.raises(InvalidInput):
        SentenceList(doc_id="", language="en", sentences=("b.",),
                     spans=((0, 2),), text="a. b.")


def test_external_segmenter_matches_builtin():
    doc = "First sentence. Second sentence."
    command = (f"{sys.executable} -c \"import sys; "
               "text = sys.stdin.read(); "
               "[print(s.strip() + '.') for s in text.split('.') if s.strip()]\"")
    result = segment_via_external(doc, "en", command)
    builtin = segment(doc, "en")
    assert result.sentences == builtin.sentences
    assert result.spans == builtin.spans


def test_external_segmenter_config_backend():
    config = SegmenterConfig(backend="external", external_command=(
        f"{sys.executable} -c \"import sys; print(sys.stdin.read().strip())\""))
    result = segment("One single line", "en", config)
    assert result.sentences == ("One single line",)


def test_external_line_not_in_document_fails():
    command = f"{sys.executable} -c \"print('made up line')\""
    with pytest.raises(SegmenterBackendError):
        segment_via_external("Real document text.", "en", command)


def test_external_nonzero_exit_fails():
    command = f"{sys.executable} -c \"import sys; sys.exit(3)\""
    with pytest.raises(SegmenterBackendError):
        segment_via_external("Some text.", "en", command)


def test_external_backend_requires_command():
    with pytest.raises(InvalidInput):
        SegmenterConfig(backend="external")
