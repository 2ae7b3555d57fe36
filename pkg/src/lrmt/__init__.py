"""Retrieval-augmented prompting of LLMs for low-resource machine translation."""

from .corpus import (
    BilingualDictionary,
    GrammarBook,
    LanguageResources,
    ParallelCorpus,
    load_dictionary,
    load_grammar_book,
    load_parallel_corpus,
    split_dev_corpus,
)
from .prompt import PromptConfig, assemble
from .retrieval import gather_context, longest_common_substring
from .scoring import bleu, chrf_pp, corpus_chrf_pp, paired_bootstrap

__version__ = "0.1.0"

__all__ = [
    "BilingualDictionary",
    "GrammarBook",
    "LanguageResources",
    "ParallelCorpus",
    "PromptConfig",
    "assemble",
    "bleu",
    "chrf_pp",
    "corpus_chrf_pp",
    "gather_context",
    "load_dictionary",
    "load_grammar_book",
    "load_parallel_corpus",
    "longest_common_substring",
    "paired_bootstrap",
    "split_dev_corpus",
]
