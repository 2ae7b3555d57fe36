from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from lrmt.corpus import (
    MIN_USABLE_ENTRIES,
    GrammarMeta,
    LanguageResources,
    ParallelCorpus,
    SentencePair,
    estimate_tokens,
    load_dictionary,
    load_grammar_book,
    load_parallel_corpus,
    split_dev_corpus,
    write_dictionary,
    write_parallel_corpus,
)
from lrmt.errors import (
    AlignmentError,
    EmptyResourceError,
    EncodingError,
    ParseError,
    ResourceMismatchError,
)


def write_rows(path, n, prefix="w"):
    path.write_text("".join(f"{prefix}{i}\tgloss {i}\n" for i in range(n)), encoding="utf-8")
    return path


def test_dictionary_row_with_repeated_gloss(tmp_path):
    p = tmp_path / "d.tsv"
    p.write_text("adu\tmany; lots of; majority; many; much\n", encoding="utf-8")
    d = load_dictionary(p, "ilo", "eng")
    assert d.entries[0].headword == "adu"
    assert d.entries[0].translations == ("many", "lots of", "majority", "many", "much")
    assert d.entries[0].gloss == "many; lots of; majority; many; much"


@pytest.mark.parametrize("n, usable", [(99, False), (100, True), (101, True)])
def test_usability_boundary(tmp_path, n, usable):
    d = load_dictionary(write_rows(tmp_path / "d.tsv", n), "eng", "xxx")
    assert len(d) == n
    assert d.usable is usable


def test_duplicate_rows_collapse_but_senses_stay(tmp_path):
    p = tmp_path / "d.tsv"
    p.write_text("bato\tstone\nbato\tstone\nbato\tkind of fish\n\n", encoding="utf-8")
    d = load_dictionary(p, "ilo", "eng")
    assert [e.translations for e in d.entries] == [("stone",), ("kind of fish",)]


def test_malformed_row_reports_line(tmp_path):
    p = tmp_path / "d.tsv"
    p.write_text("a\tb\nno tab here\n", encoding="utf-8")
    with pytest.raises(ParseError) as exc:
        load_dictionary(p, "x", "y")
    assert exc.value.line_no == 2


def test_empty_dictionary(tmp_path):
    p = tmp_path / "d.tsv"
    p.write_text("", encoding="utf-8")
    with pytest.raises(EmptyResourceError):
        load_dictionary(p, "x", "y")


def test_stated_size_must_match(tmp_path):
    p = write_rows(tmp_path / "d.tsv", 5)
    assert len(load_dictionary(p, "x", "y", stated_size=5)) == 5
    with pytest.raises(ResourceMismatchError):
        load_dictionary(p, "x", "y", stated_size=6)


def test_dictionary_round_trip(tmp_path):
    src = write_rows(tmp_path / "a.tsv", 12)
    d = load_dictionary(src, "x", "y")
    write_dictionary(d, tmp_path / "b.tsv")
    assert load_dictionary(tmp_path / "b.tsv", "x", "y") == d


def test_parallel_corpus_alignment(tmp_path):
    (tmp_path / "s").write_text("".join(f"s{i}\n" for i in range(10)), encoding="utf-8")
    (tmp_path / "t").write_text("".join(f"t{i}\n" for i in range(9)), encoding="utf-8")
    with pytest.raises(AlignmentError) as exc:
        load_parallel_corpus(tmp_path / "s", tmp_path / "t", "dev", "xxx")
    assert (exc.value.source_count, exc.value.target_count) == (10, 9)


def test_empty_corpus_is_valid(tmp_path):
    (tmp_path / "s").write_text("", encoding="utf-8")
    (tmp_path / "t").write_text("", encoding="utf-8")
    c = load_parallel_corpus(tmp_path / "s", tmp_path / "t", "dev", "xxx")
    assert len(c) == 0


def test_corpus_trims_and_labels(tmp_path):
    (tmp_path / "s").write_text("  a b \nc\n", encoding="utf-8")
    (tmp_path / "t").write_text("x\n y\n", encoding="utf-8")
    c = load_parallel_corpus(tmp_path / "s", tmp_path / "t", "dev", "xxx")
    assert [(p.source, p.target, p.origin) for p in c.pairs] == [("a b", "x", "dev"), ("c", "y", "dev")]


def _corpus(n):
    return ParallelCorpus("xxx", tuple(SentencePair(f"s{i}", f"t{i}") for i in range(n)))


def test_split_sizes_match_flores_halves():
    dev, devtest = split_dev_corpus(_corpus(997), 497, seed=7)
    assert (len(dev), len(devtest)) == (497, 500)
    assert dev.split_seed == devtest.split_seed == 7
    assert {p.origin for p in dev.pairs} == {"dev"}
    assert {p.origin for p in devtest.pairs} == {"devtest"}


def test_split_boundaries():
    dev, devtest = split_dev_corpus(_corpus(997), 997, seed=1)
    assert (len(dev), len(devtest)) == (997, 0)
    with pytest.raises(ValueError):
        split_dev_corpus(_corpus(5), 6, seed=1)


@settings(max_examples=50, deadline=None)
@given(n=st.integers(0, 60), data=st.data())
def test_split_is_a_deterministic_partition(n, data):
    k = data.draw(st.integers(0, n))
    seed = data.draw(st.integers(0, 2**32 - 1))
    corpus = _corpus(n)
    a = split_dev_corpus(corpus, k, seed)
    b = split_dev_corpus(corpus, k, seed)
    assert a == b
    dev, devtest = a
    assert len(dev) == k
    ids = Counter(p.source for p in dev.pairs) + Counter(p.source for p in devtest.pairs)
    assert ids == Counter(p.source for p in corpus.pairs)
    assert not {p.source for p in dev.pairs} & {p.source for p in devtest.pairs}


def test_devtest_never_retrievable_and_no_overlap():
    dev, devtest = split_dev_corpus(_corpus(20), 12, seed=3)
    merged = dev.merged(devtest)
    assert all(p.origin == "dev" for p in merged.retrievable())
    with pytest.raises(ValueError):
        ParallelCorpus("xxx", (SentencePair("a", "b", "dev"), SentencePair("a", "b", "devtest")))


_line = st.text(st.characters(blacklist_categories=("Cc", "Cs", "Zl", "Zp")), min_size=1).map(str.strip).filter(bool)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.tuples(_line, _line), max_size=20))
def test_corpus_round_trip(tmp_path_factory, rows):
    d = tmp_path_factory.mktemp("rt")
    c = ParallelCorpus("xxx", tuple(SentencePair(a, b) for a, b in rows))
    write_parallel_corpus(c, d / "s", d / "t")
    assert load_parallel_corpus(d / "s", d / "t", "dev", "xxx") == c


def test_corpus_orientation():
    c = _corpus(3)
    flipped = c.oriented("eng")
    assert flipped.pairs[0] == SentencePair("t0", "s0")
    assert flipped.oriented("xxx") == c
    with pytest.raises(ValueError):
        c.oriented("fra")


def test_grammar_book_bytes_preserved(tmp_path):
    raw = "Sección 1\r\n\tnasal ŋ\n"
    p = tmp_path / "g.txt"
    p.write_bytes(raw.encode("utf-8"))
    book = load_grammar_book(p, "xxx")
    assert book.text == raw
    assert book.token_count == estimate_tokens(raw)


def test_grammar_one_character(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("x", encoding="utf-8")
    assert load_grammar_book(p).token_count >= 1


def test_grammar_token_tolerance(tmp_path):
    p = tmp_path / "g.txt"
    p.write_text("a" * 4000, encoding="utf-8")  # 1000 estimated tokens
    assert load_grammar_book(p, metadata=GrammarMeta(tokens=1090)).warnings == ()
    assert load_grammar_book(p, metadata=GrammarMeta(tokens=910)).warnings == ()
    book = load_grammar_book(p, metadata=GrammarMeta(tokens=1200))
    assert len(book.warnings) == 1


def test_wolof_sized_grammar_accepted(tmp_path):
    p = tmp_path / "wol.txt"
    p.write_text("x" * (42898 * 4), encoding="utf-8")
    book = load_grammar_book(p, "wol", GrammarMeta(tokens=42898, perplexity=11.60))
    assert book.token_count == 42898 and not book.warnings


def test_grammar_encoding_error_offset(tmp_path):
    p = tmp_path / "g.txt"
    p.write_bytes(b"abc\xffdef")
    with pytest.raises(EncodingError) as exc:
        load_grammar_book(p)
    assert exc.value.offset == 3


def test_estimate_tokens():
    assert estimate_tokens("") == 0
    assert estimate_tokens("abcd") == 1
    assert estimate_tokens("abcde") == 2
    assert estimate_tokens("ŋŋ") == 1  # 4 bytes


def test_words_disabled_when_any_lexicon_is_small(tmp_path):
    big = load_dictionary(write_rows(tmp_path / "a.tsv", MIN_USABLE_ENTRIES), "eng", "kac")
    small = load_dictionary(write_rows(tmp_path / "b.tsv", 92), "kac", "eng")
    res = LanguageResources("kac", _corpus(2), "Kachin", big, small)
    assert not res.words_enabled
    assert res.dictionary_for("eng") is None and res.dictionary_for("kac") is None
    res = LanguageResources("kac", _corpus(2), "Kachin", big, None)
    assert res.words_enabled
    assert res.dictionary_for("kac") is None


def test_fixture_resources_load(ilo):
    assert ilo.words_enabled
    assert len(ilo.corpus.by_origin("dev")) == 10
    assert len(ilo.corpus.by_origin("devtest")) == 5
