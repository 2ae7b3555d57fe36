"""Five-part translation prompt: prefix, words, sentences, grammar, suffix."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Mapping, Optional

from .corpus import ENGLISH, GLOSS_SEPARATOR, GrammarBook, LanguageResources, TokenEstimator, estimate_tokens
from .errors import BudgetError, ResourceDisabledError
from .retrieval import RetrievedContext, SentenceMatch, WordMatch

CONFIG_LABELS = ("baseline", "W", "W+S", "W+S+G")
SECTION_ORDER = ("prefix", "words", "sentences", "grammar", "suffix")
SECTION_SEPARATOR = "\n\n"
TRUNCATION_MARKER = "\n[... the rest of the grammar book was cut to fit the context window ...]\n"

_TOGGLES = {
    "baseline": (False, False, False),
    "W": (True, False, False),
    "W+S": (True, True, False),
    "W+S+G": (True, True, True),
}


@dataclass(frozen=True)
class PromptConfig:
    include_words: bool = False
    include_sentences: bool = False
    include_grammar: bool = False
    top_k_words: int = 2
    top_k_sentences: int = 2
    context_budget_tokens: int = 128_000
    reserve_output_tokens: int = 1024
    dedupe_across_words: bool = False
    truncate_grammar: bool = False
    # Within one query word: dictionary blocks weakest-to-best, sentence blocks best-first.
    words_weakest_first: bool = True
    sentences_weakest_first: bool = False

    def __post_init__(self):
        if self.top_k_words < 1 or self.top_k_sentences < 1:
            raise ValueError("top_k values must be at least 1")
        if self.context_budget_tokens <= self.reserve_output_tokens:
            raise ValueError("context budget must exceed the output reserve")

    @classmethod
    def from_label(cls, label: str, **kwargs) -> "PromptConfig":
        try:
            w, s, g = _TOGGLES[label]
        except KeyError:
            raise ValueError(f"unknown config label {label!r}; expected one of {CONFIG_LABELS}") from None
        return cls(include_words=w, include_sentences=s, include_grammar=g, **kwargs)

    @property
    def label(self) -> str:
        toggles = (self.include_words, self.include_sentences, self.include_grammar)
        for name, t in _TOGGLES.items():
            if t == toggles:
                return name
        return "+".join(n for n, on in zip("WSG", toggles) if on)

    def without_words(self) -> "PromptConfig":
        return replace(self, include_words=False)


@dataclass(frozen=True)
class Section:
    label: str
    start: int
    end: int


@dataclass(frozen=True)
class AssembledPrompt:
    text: str
    sections: tuple[Section, ...]
    token_estimate: int
    source_sentence: str
    direction: tuple[str, str]
    config_label: str = ""
    truncated: bool = False

    def section_text(self, label: str) -> Optional[str]:
        for s in self.sections:
            if s.label == label:
                return self.text[s.start:s.end]
        return None

    @property
    def section_labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.sections)


def build_prefix(source_lang_name: str, target_lang_name: str, sentence: str) -> str:
    return (f"You are an expert translator. Translate the following sentence from "
            f"{source_lang_name} to {target_lang_name}: {sentence}")


def build_word_block(match: WordMatch, source_lang_name: str, target_lang_name: str) -> str:
    return (f"To help with the translation, here is one of the closest entries to {match.query_word} "
            f"in the bilingual dictionary:\n"
            f"{source_lang_name} word: {match.entry.headword}\n"
            f"{target_lang_name} translation: {GLOSS_SEPARATOR.join(match.entry.translations)}\n")


def build_sentence_block(match: SentenceMatch, source_lang_name: str, target_lang_name: str) -> str:
    return (f"To help with the translation, here is a translated sentence with words similar to "
            f"\"{match.query_word}\" in a list of translated reference sentences:\n"
            f"{source_lang_name} sentence: {match.pair.source}\n"
            f"{target_lang_name} translation: {match.pair.target}\n")


def build_grammar_section(book: GrammarBook, text: Optional[str] = None) -> str:
    body = (book.text if text is None else text).rstrip("\n")
    return ("To help with the translation, here is the full text of a bilingual grammar book:\n---\n"
            f"{body}\nThis is the end of the bilingual grammar book.\n---")


def build_suffix(source_lang_name: str, target_lang_name: str, sentence: str) -> str:
    return f"Now write the translation.\n{source_lang_name}: {sentence}\n{target_lang_name} translation:"


def _per_word_groups(matches):
    """Split matches into runs sharing a query word.

    Back-to-back repeats of a word yield identical runs, so merging them into one
    run does not change the reversed order.
    """
    groups = []
    for m in matches:
        if groups and groups[-1][-1].query_word == m.query_word:
            groups[-1].append(m)
        else:
            groups.append([m])
    return groups


def _ordered(matches, weakest_first):
    if not weakest_first:
        return list(matches)
    out = []
    for group in _per_word_groups(matches):
        out.extend(reversed(group))
    return out


def _join_blocks(blocks) -> str:
    # each block ends with "\n"; one extra newline leaves a blank line between blocks
    return "\n".join(blocks)


def _language_names(resources: LanguageResources, names: Optional[Mapping[str, str]]):
    out = {ENGLISH: "English", resources.lang: resources.display_name}
    if names:
        out.update(names)
    return out


def _layout(parts):
    text = ""
    sections = []
    for label, body in parts:
        body = body.rstrip("\n") if label in ("words", "sentences") else body
        if text:
            text += SECTION_SEPARATOR
        start = len(text)
        text += body
        sections.append(Section(label, start, len(text)))
    return text, tuple(sections)


def assemble(sentence: str, context: RetrievedContext, resources: LanguageResources, config: PromptConfig,
             direction: tuple[str, str] = (None, ENGLISH), names: Optional[Mapping[str, str]] = None,
             estimator: TokenEstimator = estimate_tokens) -> AssembledPrompt:
    """Lay out the prompt sections in canonical order and check the token budget.

    Raises :class:`BudgetError` when the prompt does not fit, unless
    ``config.truncate_grammar`` allows cutting the tail of the grammar book.
    """
    src, tgt = direction
    src = src or resources.lang
    lang_names = _language_names(resources, names)
    src_name, tgt_name = lang_names.get(src, src), lang_names.get(tgt, tgt)

    parts = [("prefix", build_prefix(src_name, tgt_name, sentence))]
    if config.include_words:
        words = _ordered(context.word_matches, config.words_weakest_first)
        if words:
            parts.append(("words", _join_blocks(build_word_block(m, src_name, tgt_name) for m in words)))
    if config.include_sentences:
        sents = _ordered(context.sentence_matches, config.sentences_weakest_first)
        if sents:
            parts.append(("sentences", _join_blocks(build_sentence_block(m, src_name, tgt_name) for m in sents)))
    grammar_index = None
    if config.include_grammar:
        if resources.grammar is None:
            raise ResourceDisabledError(f"no grammar book loaded for {resources.lang}")
        grammar_index = len(parts)
        parts.append(("grammar", build_grammar_section(resources.grammar)))
    parts.append(("suffix", build_suffix(src_name, tgt_name, sentence)))

    text, sections = _layout(parts)
    estimate = estimator(text)
    available = config.context_budget_tokens - config.reserve_output_tokens
    truncated = False
    if estimate > available:
        if not (config.truncate_grammar and grammar_index is not None):
            sizes = {label: estimator(body) for label, body in parts}
            raise BudgetError(estimate, config.context_budget_tokens, config.reserve_output_tokens, sizes)
        parts[grammar_index] = ("grammar", _fit_grammar(parts, grammar_index, resources.grammar, available,
                                                        estimator, config))
        text, sections = _layout(parts)
        estimate = estimator(text)
        truncated = True

    return AssembledPrompt(text, sections, estimate, sentence, (src, tgt), config.label, truncated)


def _fit_grammar(parts, index, book, available, estimator, config) -> str:
    others = [p for i, p in enumerate(parts) if i != index]
    shell, _ = _layout(others[:index] + [("grammar", build_grammar_section(book, TRUNCATION_MARKER))] + others[index:])
    room = available - estimator(shell)
    if room <= 0:
        sizes = {label: estimator(body) for label, body in parts}
        raise BudgetError(estimator(shell), config.context_budget_tokens, config.reserve_output_tokens, sizes)
    data = book.text.encode("utf-8")
    keep = min(len(data), room * 4)
    while True:
        head = data[:keep].decode("utf-8", errors="ignore")
        candidate = build_grammar_section(book, head + TRUNCATION_MARKER)
        trial, _ = _layout(others[:index] + [("grammar", candidate)] + others[index:])
        if estimator(trial) <= available or keep == 0:
            return candidate
        keep = max(0, keep - max(4, (estimator(trial) - available) * 4))


def dump_name(lang: str, direction: str, config_label: str, index: int) -> str:
    return f"{lang}_{direction}_{config_label}_{index}.prompt.txt"
