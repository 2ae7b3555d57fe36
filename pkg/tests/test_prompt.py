from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from lrmt.corpus import DictionaryEntry, GrammarBook, SentencePair
from lrmt.errors import BudgetError, ResourceDisabledError
from lrmt.manifest import direction_langs, load_language
from lrmt.prompt import (
    CONFIG_LABELS,
    SECTION_ORDER,
    TRUNCATION_MARKER,
    PromptConfig,
    assemble,
    build_grammar_section,
    build_prefix,
    build_sentence_block,
    build_suffix,
    build_word_block,
    dump_name,
)
from lrmt.retrieval import SentenceMatch, WordMatch, gather_context

from build_fixtures import ILO_SENTENCE

GOLDEN = Path(__file__).parent / "fixtures" / "golden"
WORKED = GOLDEN / "worked_example"


def golden(name):
    return (GOLDEN / name).read_bytes().decode("utf-8")


def piece(name):
    return (WORKED / name).read_bytes().decode("utf-8")


def build(resources, label, sentence=ILO_SENTENCE, direction=("ilo", "eng"), **kw):
    cfg = PromptConfig.from_label(label, **kw)
    ctx = gather_context(sentence, resources, cfg, direction[0])
    return assemble(sentence, ctx, resources, cfg, direction)


def test_prefix_and_suffix_verbatim():
    assert build_prefix("Ilokano", "English", ILO_SENTENCE) == piece("prefix.txt")
    assert build_suffix("Ilokano", "English", ILO_SENTENCE) == piece("suffix.txt")
    assert build_prefix("Ilokano", "English", "").endswith(": ")
    assert build_suffix("a", "b", "x").endswith("translation:")


def test_word_block_verbatim():
    m = WordMatch("Adu", DictionaryEntry("Adams", ("Adams",)), 2)
    first = piece("words_head.txt").split("\n\n")[0] + "\n"
    assert build_word_block(m, "Ilokano", "English") == first
    one = build_word_block(WordMatch("x", DictionaryEntry("y", ("z",)), 0), "A", "B")
    assert "; " not in one


def test_sentence_block_verbatim():
    text = piece("sentences_head.txt")
    src, tgt = [line.split(": ", 1)[1] for line in text.split("\n")[1:3]]
    block = build_sentence_block(SentenceMatch("Adu", SentencePair(src, tgt), 3), "Ilokano", "English")
    assert block == text.split("\n\n")[0] + "\n"
    quoted = build_sentence_block(SentenceMatch('"a"', SentencePair("s", "t"), 0), "A", "B")
    assert 'similar to ""a"" in' in quoted


def test_grammar_wrapper():
    book = GrammarBook("ilo", "## FULL BOOK INSERTED HERE ##", 8)
    assert build_grammar_section(book) == piece("grammar.txt")
    odd = GrammarBook("x", "  line one\n\tline two  ", 5)
    assert "\n---\n  line one\n\tline two  \nThis is the end" in build_grammar_section(odd)


@pytest.mark.parametrize("label", CONFIG_LABELS)
def test_ilokano_golden(ilo, label):
    prompt = build(ilo, label)
    assert prompt.text == golden(f"ilo_X-eng_{label}.txt")


def test_golden_contains_worked_example_blocks():
    full = golden("ilo_X-eng_W+S+G.txt")
    assert full.startswith(piece("prefix.txt") + "\n\n" + piece("words_head.txt"))
    assert "\n\n" + piece("sentences_head.txt") in full
    assert full.endswith(piece("grammar.txt") + "\n\n" + piece("suffix.txt"))


@pytest.mark.parametrize("code, direction", [("cjk", "X-eng"), ("cjk", "eng-X"), ("kgv", "X-eng"), ("kgv", "eng-X")])
def test_synthetic_language_goldens(manifest, code, direction):
    res = load_language(manifest.language(code), manifest.seed)
    src, tgt = direction_langs(direction, code)
    sentence = res.corpus_for(src).by_origin("devtest")[0].source
    cfg = PromptConfig.from_label("W+S+G")
    if not res.words_enabled:
        cfg = cfg.without_words()
    prompt = assemble(sentence, gather_context(sentence, res, cfg, src), res, cfg, (src, tgt))
    assert prompt.text == golden(f"{code}_{direction}_W+S+G.txt")


def test_section_order_and_spans(ilo):
    prompt = build(ilo, "W+S+G")
    assert prompt.section_labels == SECTION_ORDER
    assert prompt.section_text("prefix") == piece("prefix.txt")
    assert prompt.section_text("suffix") == piece("suffix.txt")
    assert prompt.text.count(ILO_SENTENCE) == 2
    base = build(ilo, "baseline")
    assert base.section_labels == ("prefix", "suffix")
    assert base.text == piece("prefix.txt") + "\n\n" + piece("suffix.txt")


@settings(max_examples=16, deadline=None)
@given(st.booleans(), st.booleans(), st.booleans())
def test_toggles_never_reorder(ilo, w, s, g):
    cfg = PromptConfig(include_words=w, include_sentences=s, include_grammar=g)
    ctx = gather_context("Adu pay ti pusa.", ilo, cfg, "ilo")
    prompt = assemble("Adu pay ti pusa.", ctx, ilo, cfg, ("ilo", "eng"))
    labels = prompt.section_labels
    assert list(labels) == [x for x in SECTION_ORDER if x in labels]
    base = build(ilo, "baseline", "Adu pay ti pusa.")
    assert prompt.section_text("prefix") == base.section_text("prefix")
    assert prompt.section_text("suffix") == base.section_text("suffix")
    assert prompt.token_estimate + cfg.reserve_output_tokens <= cfg.context_budget_tokens
    again = assemble("Adu pay ti pusa.", ctx, ilo, cfg, ("ilo", "eng"))
    assert again.text == prompt.text


def _big_grammar(ilo, tokens):
    from dataclasses import replace

    return replace(ilo, grammar=GrammarBook("ilo", "x" * (tokens * 4), tokens))


def test_budget_error(ilo):
    res = _big_grammar(ilo, 130_000)
    with pytest.raises(BudgetError) as exc:
        build(res, "W+S+G")
    err = exc.value
    assert err.budget == 128_000 and err.estimate > 128_000
    assert err.section_sizes["grammar"] > 130_000


def test_budget_truncation_is_marked_and_fits(ilo):
    res = _big_grammar(ilo, 130_000)
    prompt = build(res, "W+S+G", truncate_grammar=True)
    assert prompt.truncated
    assert TRUNCATION_MARKER.strip() in prompt.section_text("grammar")
    assert prompt.token_estimate <= 128_000 - 1024
    assert prompt.section_labels == SECTION_ORDER


def test_missing_grammar_is_disabled_error(ilo):
    from dataclasses import replace

    with pytest.raises(ResourceDisabledError):
        build(replace(ilo, grammar=None), "W+S+G")


def test_config_labels():
    assert PromptConfig.from_label("baseline") == PromptConfig()
    assert PromptConfig.from_label("W+S").label == "W+S"
    assert PromptConfig.from_label("W+S+G").without_words().label == "S+G"
    with pytest.raises(ValueError):
        PromptConfig.from_label("G")
    with pytest.raises(ValueError):
        PromptConfig(context_budget_tokens=10, reserve_output_tokens=10)
    with pytest.raises(ValueError):
        PromptConfig(top_k_words=0)


def test_dump_name():
    assert dump_name("ilo", "X-eng", "W+S", 3) == "ilo_X-eng_W+S_3.prompt.txt"
