"""Longest-common-substring retrieval of dictionary entries and example sentences."""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass
from typing import TYPE_CHECKING

from .corpus import BilingualDictionary, DictionaryEntry, LanguageResources, ParallelCorpus, SentencePair
from .errors import ResourceDisabledError

if TYPE_CHECKING:
    from .prompt import PromptConfig


def longest_common_substring(a: str, b: str) -> int:
    """Length of the longest contiguous run shared by ``a`` and ``b``, ignoring case.

    O(len(a) * len(b)) time, O(min(len(a), len(b))) memory.
    """
    a, b = a.lower(), b.lower()
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return 0
    best = 0
    prev = [0] * (len(b) + 1)
    for ca in a:
        cur = [0] * (len(b) + 1)
        for j, cb in enumerate(b, start=1):
            if ca == cb:
                v = prev[j - 1] + 1
                cur[j] = v
                if v > best:
                    best = v
        prev = cur
    return best


def _lcs_scan(a: str, b: str) -> int:
    """Same value as :func:`longest_common_substring` for already-lowercased input.

    Grows the candidate length until no substring of ``a`` of that length occurs in
    ``b``; cheap when ``a`` is a short query word.
    """
    if len(a) > len(b):
        a, b = b, a
    n = len(a)
    length = 0
    while length < n:
        size = length + 1
        if any(a[i:i + size] in b for i in range(n - size + 1)):
            length = size
        else:
            break
    return length


def _is_punct(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _strip_punct(token: str) -> str:
    start, end = 0, len(token)
    while start < end and _is_punct(token[start]):
        start += 1
    while end > start and _is_punct(token[end - 1]):
        end -= 1
    return token[start:end]


def tokenize_source(sentence: str) -> list[str]:
    """Whitespace tokens with leading/trailing punctuation removed; order and repeats kept."""
    out = []
    for tok in sentence.split():
        tok = _strip_punct(tok)
        if tok:
            out.append(tok)
    return out


@dataclass(frozen=True)
class WordMatch:
    query_word: str
    entry: DictionaryEntry
    lcs_len: int


@dataclass(frozen=True)
class SentenceMatch:
    query_word: str
    pair: SentencePair
    lcs_len: int


@dataclass(frozen=True)
class RetrievedContext:
    """Matches in source-sentence word order; within a word, best match first."""

    word_matches: tuple[WordMatch, ...] = ()
    sentence_matches: tuple[SentenceMatch, ...] = ()


def rank_dictionary(word: str, dictionary: BilingualDictionary) -> list[WordMatch]:
    q = word.lower()
    scored = [WordMatch(word, e, _lcs_scan(q, e.headword.lower())) for e in dictionary.entries]
    # ties: shorter headword, then headword order, then file order (sort is stable)
    scored.sort(key=lambda m: (-m.lcs_len, len(m.entry.headword), m.entry.headword))
    return scored


def top_dictionary_matches(word: str, dictionary: BilingualDictionary, k: int = 2) -> list[WordMatch]:
    if k < 1:
        raise ValueError("k must be at least 1")
    if dictionary is None or not dictionary.usable:
        size = 0 if dictionary is None else len(dictionary)
        raise ResourceDisabledError(f"dictionary with {size} entries is below the usability threshold")
    return rank_dictionary(word, dictionary)[:k]


def rank_sentences(word: str, pairs) -> list[SentenceMatch]:
    q = word.lower()
    scored = [(_lcs_scan(q, p.source.lower()), len(p.source), i, p) for i, p in enumerate(pairs)]
    scored.sort(key=lambda t: (-t[0], t[1], t[2]))
    return [SentenceMatch(word, p, n) for n, _, _, p in scored]


def top_sentence_matches(word: str, corpus: ParallelCorpus, k: int = 2) -> list[SentenceMatch]:
    """Best ``k`` example pairs for ``word``. Devtest pairs are never candidates."""
    if k < 1:
        raise ValueError("k must be at least 1")
    pool = corpus.retrievable() if corpus is not None else ()
    if not pool:
        raise ResourceDisabledError("no retrievable example sentences (dev split is empty)")
    return rank_sentences(word, pool)[:k]


def _unique(matches):
    seen = set()
    out = []
    for m in matches:
        if m not in seen:
            seen.add(m)
            out.append(m)
    return out


def gather_context(sentence: str, resources: LanguageResources, config: "PromptConfig",
                   source_lang: str) -> RetrievedContext:
    """Retrieve word and sentence matches for every token of ``sentence``.

    ``source_lang`` selects which lexicon and which corpus side are searched.
    Repeats of a word produce repeated blocks unless ``config.dedupe_across_words``.
    """
    words: list[WordMatch] = []
    sents: list[SentenceMatch] = []
    dictionary = corpus = None
    if config.include_words:
        dictionary = resources.dictionary_for(source_lang)
        if dictionary is None:
            raise ResourceDisabledError(f"word retrieval is disabled for {resources.lang}")
    if config.include_sentences:
        corpus = resources.corpus_for(source_lang)

    for word in tokenize_source(sentence):
        if dictionary is not None:
            words.extend(_unique(top_dictionary_matches(word, dictionary, config.top_k_words)))
        if corpus is not None:
            sents.extend(_unique(top_sentence_matches(word, corpus, config.top_k_sentences)))

    if config.dedupe_across_words:
        words = _dedupe_by(words, lambda m: m.entry)
        sents = _dedupe_by(sents, lambda m: m.pair)
    return RetrievedContext(tuple(words), tuple(sents))


def _dedupe_by(matches, key):
    seen = set()
    out = []
    for m in matches:
        k = key(m)
        if k not in seen:
            seen.add(k)
            out.append(m)
    return out
