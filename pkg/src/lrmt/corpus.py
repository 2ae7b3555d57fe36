"""Loading, validation and splitting of dictionaries, parallel sentences and grammar books.

File formats:

* dictionary: UTF-8 TSV, ``headword<TAB>gloss1; gloss2; ...``, one entry per line
* parallel corpus: two UTF-8 files, one sentence per line, aligned by line number
* grammar book: a single UTF-8 text file, kept byte-exact
"""

from __future__ import annotations

import logging
import math
import random
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Optional, Sequence

from .errors import (
    AlignmentError,
    EmptyResourceError,
    EncodingError,
    ParseError,
    ResourceMismatchError,
)

log = logging.getLogger(__name__)

MIN_USABLE_ENTRIES = 100
GLOSS_SEPARATOR = "; "
SPLIT_LABELS = ("train", "dev", "devtest")
ENGLISH = "eng"
TOKEN_TOLERANCE = 0.10

TokenEstimator = Callable[[str], int]


def estimate_tokens(text: str) -> int:
    """Cheap tokenizer-free estimate: one token per four UTF-8 bytes, rounded up."""
    n_bytes = len(text.encode("utf-8"))
    if n_bytes == 0:
        return 0
    return max(1, math.ceil(n_bytes / 4))


@dataclass(frozen=True)
class DictionaryEntry:
    headword: str
    translations: tuple[str, ...]

    def __post_init__(self):
        if not self.headword.strip():
            raise ValueError("dictionary headword is empty")
        if not self.translations:
            raise ValueError(f"dictionary entry {self.headword!r} has no translations")

    @property
    def gloss(self) -> str:
        return GLOSS_SEPARATOR.join(self.translations)


@dataclass(frozen=True)
class BilingualDictionary:
    source_lang: str
    target_lang: str
    entries: tuple[DictionaryEntry, ...]
    stated_size: Optional[int] = None

    @property
    def usable(self) -> bool:
        return len(self.entries) >= MIN_USABLE_ENTRIES

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class SentencePair:
    source: str
    target: str
    origin: str = "dev"

    def __post_init__(self):
        if self.origin not in SPLIT_LABELS:
            raise ValueError(f"unknown split label {self.origin!r}")

    def swapped(self) -> "SentencePair":
        return SentencePair(self.target, self.source, self.origin)


@dataclass(frozen=True)
class ParallelCorpus:
    """Aligned sentence pairs; ``source`` is written in ``source_lang``."""

    lang: str
    pairs: tuple[SentencePair, ...]
    split_seed: Optional[int] = None
    source_lang: str = ""
    target_lang: str = ENGLISH

    def __post_init__(self):
        if not self.source_lang:
            object.__setattr__(self, "source_lang", self.lang)
        dev = {(p.source, p.target) for p in self.pairs if p.origin == "dev"}
        leaked = [p for p in self.pairs if p.origin == "devtest" and (p.source, p.target) in dev]
        if leaked:
            raise ValueError(f"{len(leaked)} pair(s) appear in both dev and devtest")

    def __len__(self):
        return len(self.pairs)

    def by_origin(self, *labels: str) -> tuple[SentencePair, ...]:
        return tuple(p for p in self.pairs if p.origin in labels)

    def retrievable(self) -> tuple[SentencePair, ...]:
        """Pairs that may be shown as prompt examples (never devtest)."""
        return tuple(p for p in self.pairs if p.origin != "devtest")

    def oriented(self, source_lang: str) -> "ParallelCorpus":
        """Return the corpus with ``source_lang`` on the source side."""
        if source_lang == self.source_lang:
            return self
        if source_lang != self.target_lang:
            raise ValueError(f"corpus {self.source_lang}-{self.target_lang} has no side {source_lang!r}")
        return ParallelCorpus(
            lang=self.lang,
            pairs=tuple(p.swapped() for p in self.pairs),
            split_seed=self.split_seed,
            source_lang=self.target_lang,
            target_lang=self.source_lang,
        )

    def merged(self, other: "ParallelCorpus") -> "ParallelCorpus":
        if (other.source_lang, other.target_lang) != (self.source_lang, self.target_lang):
            other = other.oriented(self.source_lang)
        seed = self.split_seed if self.split_seed is not None else other.split_seed
        return replace(self, pairs=self.pairs + other.pairs, split_seed=seed)


@dataclass(frozen=True)
class GrammarBook:
    lang: str
    text: str
    token_count: int
    perplexity: Optional[float] = None
    citation: str = ""
    stated_tokens: Optional[int] = None
    warnings: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if not self.text:
            raise EmptyResourceError(f"grammar book for {self.lang!r} is empty")
        if self.token_count <= 0:
            raise ValueError("grammar token_count must be positive")


@dataclass(frozen=True)
class GrammarMeta:
    """Manifest metadata for a grammar book."""

    tokens: Optional[int] = None
    perplexity: Optional[float] = None
    citation: str = ""


@dataclass(frozen=True)
class LanguageResources:
    """Everything needed to prompt for one language, in both directions.

    ``dictionary_fwd`` has English headwords (used for eng→X), ``dictionary_rev``
    has headwords in the language itself (used for X→eng).
    """

    lang: str
    corpus: ParallelCorpus
    display_name: str = ""
    dictionary_fwd: Optional[BilingualDictionary] = None
    dictionary_rev: Optional[BilingualDictionary] = None
    grammar: Optional[GrammarBook] = None

    def __post_init__(self):
        if self.corpus is None:
            raise ValueError(f"language {self.lang!r} needs at least a parallel corpus")
        if not self.display_name:
            object.__setattr__(self, "display_name", self.lang)

    @property
    def words_enabled(self) -> bool:
        # A lexicon that is too small in either direction switches words off
        # for the whole language.
        dicts = [d for d in (self.dictionary_fwd, self.dictionary_rev) if d is not None]
        return bool(dicts) and all(d.usable for d in dicts)

    def dictionary_for(self, source_lang: str) -> Optional[BilingualDictionary]:
        """Lexicon whose headwords are in ``source_lang``, or None when word retrieval is off."""
        if not self.words_enabled:
            return None
        d = self.dictionary_fwd if source_lang == ENGLISH else self.dictionary_rev
        return d if d is not None and d.usable else None

    def corpus_for(self, source_lang: str) -> ParallelCorpus:
        return self.corpus.oriented(source_lang)


def _read_utf8(path: Path) -> str:
    data = path.read_bytes()
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise EncodingError(path, exc.start, exc.reason) from None


def _parse_dictionary_line(line: str, path, line_no):
    cols = line.split("\t")
    if len(cols) != 2:
        raise ParseError(path, line_no, f"expected 2 tab-separated columns, found {len(cols)}")
    headword = cols[0].strip()
    if not headword:
        raise ParseError(path, line_no, "empty headword")
    glosses = tuple(g.strip() for g in cols[1].split(";") if g.strip())
    if not glosses:
        raise ParseError(path, line_no, f"no translations for {headword!r}")
    return DictionaryEntry(headword, glosses)


def load_dictionary(path, source_lang: str, target_lang: str, stated_size: Optional[int] = None) -> BilingualDictionary:
    """Read a two-column TSV lexicon.

    Identical rows collapse to one entry; the same headword with different glosses
    is kept as separate entries. Blank lines are ignored.
    """
    path = Path(path)
    text = _read_utf8(path)
    entries: list[DictionaryEntry] = []
    seen = set()
    for line_no, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        entry = _parse_dictionary_line(line, path, line_no)
        if entry in seen:
            continue
        seen.add(entry)
        entries.append(entry)
    if not entries:
        raise EmptyResourceError(f"{path}: dictionary has no entries")
    if stated_size is not None and stated_size != len(entries):
        raise ResourceMismatchError(
            f"{path}: manifest states {stated_size} entries, file has {len(entries)}"
        )
    return BilingualDictionary(source_lang, target_lang, tuple(entries), stated_size)


def write_dictionary(dictionary: BilingualDictionary, path) -> None:
    lines = [f"{e.headword}\t{e.gloss}\n" for e in dictionary.entries]
    Path(path).write_text("".join(lines), encoding="utf-8", newline="\n")


def _read_lines(path: Path) -> list[str]:
    text = _read_utf8(path)
    if not text:
        return []
    lines = text.split("\n")
    if lines[-1] == "":
        lines.pop()
    return [ln.rstrip("\r") for ln in lines]


def load_parallel_corpus(src_path, tgt_path, split: str, lang: str = "", source_lang: str = "",
                         target_lang: str = ENGLISH) -> ParallelCorpus:
    src_path, tgt_path = Path(src_path), Path(tgt_path)
    src_lines = _read_lines(src_path)
    tgt_lines = _read_lines(tgt_path)
    if len(src_lines) != len(tgt_lines):
        raise AlignmentError(
            f"{src_path} has {len(src_lines)} lines but {tgt_path} has {len(tgt_lines)}",
            len(src_lines), len(tgt_lines),
        )
    pairs = []
    for i, (s, t) in enumerate(zip(src_lines, tgt_lines), start=1):
        s, t = s.strip(), t.strip()
        if not s or not t:
            raise ParseError(src_path if not s else tgt_path, i, "empty sentence in aligned corpus")
        pairs.append(SentencePair(s, t, split))
    lang = lang or source_lang
    return ParallelCorpus(lang, tuple(pairs), None, source_lang or lang, target_lang)


def write_parallel_corpus(corpus: ParallelCorpus, src_path, tgt_path) -> None:
    Path(src_path).write_text("".join(p.source + "\n" for p in corpus.pairs), encoding="utf-8", newline="\n")
    Path(tgt_path).write_text("".join(p.target + "\n" for p in corpus.pairs), encoding="utf-8", newline="\n")


def split_dev_corpus(corpus: ParallelCorpus, dev_size: int, seed: int) -> tuple[ParallelCorpus, ParallelCorpus]:
    """Randomly partition ``corpus`` into a dev part of ``dev_size`` pairs and a devtest remainder.

    Both parts keep the original relative order and record ``seed``.
    """
    n = len(corpus.pairs)
    if dev_size < 0 or dev_size > n:
        raise ValueError(f"dev_size={dev_size} is outside 0..{n}")
    chosen = set(random.Random(seed).sample(range(n), dev_size))
    dev, devtest = [], []
    for i, pair in enumerate(corpus.pairs):
        if i in chosen:
            dev.append(replace(pair, origin="dev"))
        else:
            devtest.append(replace(pair, origin="devtest"))
    return (
        replace(corpus, pairs=tuple(dev), split_seed=seed),
        replace(corpus, pairs=tuple(devtest), split_seed=seed),
    )


def load_grammar_book(path, lang: str = "", metadata: Optional[GrammarMeta] = None,
                      estimator: TokenEstimator = estimate_tokens) -> GrammarBook:
    path = Path(path)
    text = _read_utf8(path)
    if not text:
        raise EmptyResourceError(f"{path}: grammar book is empty")
    meta = metadata or GrammarMeta()
    token_count = max(1, estimator(text))
    warnings = []
    if meta.tokens:
        deviation = abs(token_count - meta.tokens) / meta.tokens
        if deviation > TOKEN_TOLERANCE:
            msg = (f"{path}: estimated {token_count} tokens, manifest states {meta.tokens} "
                   f"({deviation:.1%} off)")
            log.warning(msg)
            warnings.append(msg)
    return GrammarBook(
        lang=lang,
        text=text,
        token_count=token_count,
        perplexity=meta.perplexity,
        citation=meta.citation,
        stated_tokens=meta.tokens,
        warnings=tuple(warnings),
    )

