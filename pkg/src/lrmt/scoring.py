"""chrF++ and BLEU scoring plus paired bootstrap significance testing.

Behaviour follows the sacreBLEU 2.x defaults identified by the signatures
``nrefs:1|case:mixed|eff:yes|nc:6|nw:2|space:no`` (chrF++) and
``nrefs:1|case:mixed|eff:no|tok:13a|smooth:exp`` (BLEU). Corpus scores are
always computed from summed sufficient statistics.
"""

from __future__ import annotations

import math
import re
import warnings
from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

BLEU_ORDER = 4
_PUNCTS = frozenset('!"#$%&\'()*+,-./:;<=>?@[\\]^_`{|}~')
_EPS = 1e-16


class DegenerateSegmentWarning(UserWarning):
    """Both hypothesis and reference are empty; the segment scores 0."""


@dataclass(frozen=True)
class ChrfParams:
    char_order: int = 6
    word_order: int = 2
    beta: float = 2.0
    effective_order: bool = True
    remove_whitespace_from_char_ngrams: bool = True
    case_sensitive: bool = True

    def __post_init__(self):
        if self.char_order < 1 or self.word_order < 0:
            raise ValueError("char_order must be >= 1 and word_order >= 0")
        if self.beta <= 0:
            raise ValueError("beta must be positive")

    @property
    def n_orders(self) -> int:
        return self.char_order + self.word_order

    @property
    def signature(self) -> str:
        beta = f"|beta:{self.beta:g}" if self.beta != 2 else ""
        return (f"nrefs:1|case:{'mixed' if self.case_sensitive else 'lc'}"
                f"|eff:{'yes' if self.effective_order else 'no'}"
                f"|nc:{self.char_order}|nw:{self.word_order}"
                f"|space:{'no' if self.remove_whitespace_from_char_ngrams else 'yes'}{beta}")


DEFAULT_CHRF = ChrfParams()
BLEU_SIGNATURE = "nrefs:1|case:mixed|eff:no|tok:13a|smooth:exp"


# ---------------------------------------------------------------- chrF++

def char_ngram_counts(text: str, order: int, params: ChrfParams = DEFAULT_CHRF) -> Counter:
    if order < 1:
        raise ValueError("order must be >= 1")
    if params.remove_whitespace_from_char_ngrams:
        text = "".join(text.split())
    return Counter(text[i:i + order] for i in range(len(text) - order + 1))


def chrf_words(text: str) -> list[str]:
    """Whitespace tokens with one punctuation mark split off the end (or else the start)."""
    out = []
    for w in text.split():
        if len(w) == 1:
            out.append(w)
        elif w[-1] in _PUNCTS:
            out += [w[:-1], w[-1]]
        elif w[0] in _PUNCTS:
            out += [w[0], w[1:]]
        else:
            out.append(w)
    return out


def word_ngram_counts(text: str, order: int) -> Counter:
    if order < 1:
        raise ValueError("order must be >= 1")
    words = chrf_words(text)
    return Counter(" ".join(words[i:i + order]) for i in range(len(words) - order + 1))


def _ngram_profile(text: str, params: ChrfParams) -> list[Counter]:
    if not params.case_sensitive:
        text = text.lower()
    profile = [char_ngram_counts(text, n, params) for n in range(1, params.char_order + 1)]
    profile += [word_ngram_counts(text, n) for n in range(1, params.word_order + 1)]
    return profile


def chrf_statistics(hypothesis: str, reference: str, params: ChrfParams = DEFAULT_CHRF) -> list[int]:
    """Flat ``[hyp, ref, match] * n_orders`` counts for one segment.

    Hypothesis n-grams of an order count only if the reference has n-grams of that order.
    """
    stats = []
    for hyp, ref in zip(_ngram_profile(hypothesis, params), _ngram_profile(reference, params)):
        n_ref = sum(ref.values())
        n_hyp = sum(hyp.values()) if n_ref else 0
        n_match = sum(min(c, ref[g]) for g, c in hyp.items() if g in ref)
        stats += [n_hyp, n_ref, n_match]
    return stats


def chrf_from_statistics(stats, params: ChrfParams = DEFAULT_CHRF) -> float:
    arr = np.asarray(stats, dtype=float)
    return float(_chrf_vectorized(arr[None, :], params)[0])


def _chrf_vectorized(stats: np.ndarray, params: ChrfParams) -> np.ndarray:
    """Score many flat statistic rows at once; ``stats`` has shape (rows, 3 * n_orders)."""
    s = stats.reshape(stats.shape[0], params.n_orders, 3)
    n_hyp, n_ref, n_match = s[..., 0], s[..., 1], s[..., 2]
    factor = params.beta ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        prec = np.where(n_hyp > 0, n_match / np.where(n_hyp > 0, n_hyp, 1), _EPS)
        rec = np.where(n_ref > 0, n_match / np.where(n_ref > 0, n_ref, 1), _EPS)
    if not params.effective_order:
        denom = factor * prec + rec
        f = np.where(denom > 0, (1 + factor) * prec * rec / np.where(denom > 0, denom, 1), _EPS)
        return 100 * f.sum(axis=1) / params.n_orders
    valid = (n_hyp > 0) & (n_ref > 0)
    count = valid.sum(axis=1)
    safe = np.maximum(count, 1)
    avg_p = np.where(valid, prec, 0).sum(axis=1) / safe
    avg_r = np.where(valid, rec, 0).sum(axis=1) / safe
    denom = factor * avg_p + avg_r
    score = np.where(denom > 0, (1 + factor) * avg_p * avg_r / np.where(denom > 0, denom, 1), 0.0)
    return 100 * np.where(count > 0, score, 0.0)


def chrf_pp(hypothesis: str, reference: str, params: ChrfParams = DEFAULT_CHRF) -> float:
    """Segment-level chrF++ on a 0-100 scale."""
    if not hypothesis.strip() and not reference.strip():
        warnings.warn("empty hypothesis and reference; chrF++ defined as 0", DegenerateSegmentWarning,
                      stacklevel=2)
        return 0.0
    return chrf_from_statistics(chrf_statistics(hypothesis, reference, params), params)


def _check_parallel(hypotheses, references):
    if len(hypotheses) != len(references):
        raise ValueError(f"{len(hypotheses)} hypotheses but {len(references)} references")
    if not hypotheses:
        raise ValueError("at least one segment is required")


def chrf_corpus_statistics(hypotheses: Sequence[str], references: Sequence[str],
                           params: ChrfParams = DEFAULT_CHRF) -> np.ndarray:
    _check_parallel(hypotheses, references)
    return np.array([chrf_statistics(h, r, params) for h, r in zip(hypotheses, references)], dtype=np.int64)


def corpus_chrf_pp(hypotheses: Sequence[str], references: Sequence[str], params: ChrfParams = DEFAULT_CHRF) -> float:
    stats = chrf_corpus_statistics(hypotheses, references, params)
    return chrf_from_statistics(stats.sum(axis=0), params)


# ---------------------------------------------------------------- BLEU

_13A_RULES = [
    (re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])"), r" \1 "),
    (re.compile(r"([^0-9])([\.,])"), r"\1 \2 "),
    (re.compile(r"([\.,])([^0-9])"), r" \1 \2"),
    (re.compile(r"([0-9])(-)"), r"\1 \2 "),
]


@lru_cache(maxsize=2 ** 16)
def tokenize_13a(line: str) -> str:
    """mteval-v13a style tokenization used by WMT BLEU."""
    line = line.replace("<skipped>", "").replace("-\n", "").replace("\n", " ")
    if "&" in line:
        line = (line.replace("&quot;", '"').replace("&amp;", "&")
                .replace("&lt;", "<").replace("&gt;", ">"))
    line = f" {line} "
    for pattern, repl in _13A_RULES:
        line = pattern.sub(repl, line)
    return " ".join(line.split())


def _word_ngrams(tokens, max_order):
    c = Counter()
    for n in range(1, max_order + 1):
        for i in range(len(tokens) - n + 1):
            c[tuple(tokens[i:i + n])] += 1
    return c


def bleu_statistics(hypothesis: str, reference: str, max_order: int = BLEU_ORDER) -> list[int]:
    """``[hyp_len, ref_len, correct_1..n, total_1..n]`` for one segment."""
    hyp = tokenize_13a(hypothesis.rstrip()).split()
    ref = tokenize_13a(reference.rstrip()).split()
    hyp_ngrams, ref_ngrams = _word_ngrams(hyp, max_order), _word_ngrams(ref, max_order)
    correct = [0] * max_order
    total = [0] * max_order
    for gram, count in hyp_ngrams.items():
        n = len(gram) - 1
        total[n] += count
        if gram in ref_ngrams:
            correct[n] += min(count, ref_ngrams[gram])
    return [len(hyp), len(ref)] + correct + total


def _bleu_vectorized(stats: np.ndarray, max_order: int = BLEU_ORDER) -> np.ndarray:
    sys_len, ref_len = stats[:, 0], stats[:, 1]
    correct = stats[:, 2:2 + max_order].astype(float)
    total = stats[:, 2 + max_order:2 + 2 * max_order].astype(float)
    with np.errstate(divide="ignore", invalid="ignore"):
        bp = np.where(sys_len < ref_len,
                      np.where(sys_len > 0, np.exp(1 - ref_len / np.where(sys_len > 0, sys_len, 1)), 0.0),
                      1.0)
    rows = stats.shape[0]
    scores = np.zeros(rows)
    for r in range(rows):
        if not correct[r].any():
            continue
        log_sum = 0.0
        smooth = 1.0
        for n in range(max_order):
            if total[r, n] == 0:
                # remaining precisions stay 0
                log_sum += -9999999999 * (max_order - n)
                break
            if correct[r, n] == 0:
                smooth *= 2
                p = 100.0 / (smooth * total[r, n])
            else:
                p = 100.0 * correct[r, n] / total[r, n]
            log_sum += math.log(p)
        scores[r] = bp[r] * math.exp(log_sum / max_order)
    return scores


def bleu_from_statistics(stats) -> float:
    return float(_bleu_vectorized(np.asarray(stats, dtype=np.int64)[None, :])[0])


def bleu_corpus_statistics(hypotheses: Sequence[str], references: Sequence[str]) -> np.ndarray:
    _check_parallel(hypotheses, references)
    return np.array([bleu_statistics(h, r) for h, r in zip(hypotheses, references)], dtype=np.int64)


def bleu(hypotheses: Sequence[str], references: Sequence[str]) -> float:
    """Corpus BLEU (4-gram, brevity penalty, 13a tokens, exponential smoothing)."""
    return bleu_from_statistics(bleu_corpus_statistics(hypotheses, references).sum(axis=0))


# ---------------------------------------------------------------- bootstrap

METRICS = ("chrf_pp", "bleu")


def segment_statistics(hypotheses, references, metric: str = "chrf_pp", params: ChrfParams = DEFAULT_CHRF):
    if metric == "chrf_pp":
        return chrf_corpus_statistics(hypotheses, references, params)
    if metric == "bleu":
        return bleu_corpus_statistics(hypotheses, references)
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


def score_statistics(stats: np.ndarray, metric: str = "chrf_pp", params: ChrfParams = DEFAULT_CHRF) -> np.ndarray:
    """Score each row of summed sufficient statistics."""
    stats = np.atleast_2d(stats)
    if metric == "chrf_pp":
        return _chrf_vectorized(stats.astype(float), params)
    if metric == "bleu":
        return _bleu_vectorized(stats)
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


@dataclass(frozen=True)
class BootstrapResult:
    best_system_score: float
    other_system_score: float
    best_mean: float
    other_mean: float
    ci_half_width: float
    other_ci_half_width: float
    p_value: float
    significant: bool
    n_resamples: int
    seed: int
    metric: str = "chrf_pp"
    alpha: float = 0.05


def resample_indices(n: int, n_resamples: int, seed: int) -> np.ndarray:
    """Bootstrap draws as an (n_resamples, n) index array from a counter-based Philox stream."""
    rng = np.random.Generator(np.random.Philox(seed))
    return rng.integers(0, n, size=(n_resamples, n))


def _resampled_scores(stats: np.ndarray, indices: np.ndarray, metric, params) -> np.ndarray:
    # Summing per-draw statistics via an occurrence-count matrix keeps this a single matmul.
    n_resamples, n = indices.shape
    weights = np.zeros((n_resamples, n), dtype=np.int64)
    rows = np.repeat(np.arange(n_resamples), n)
    np.add.at(weights, (rows, indices.ravel()), 1)
    summed = weights @ stats.astype(np.int64)
    return score_statistics(summed, metric, params)


def _half_width(scores: np.ndarray) -> float:
    lo, hi = np.percentile(scores, [2.5, 97.5])
    return float((hi - lo) / 2)


def paired_bootstrap(best_segments: Sequence[str], other_segments: Sequence[str], references: Sequence[str],
                     metric: str = "chrf_pp", n_resamples: int = 1000, seed: int = 12345,
                     params: ChrfParams = DEFAULT_CHRF, alpha: float = 0.05) -> BootstrapResult:
    """Paired bootstrap resampling of two systems over the same references.

    ``p_value = (1 + #draws where other >= best) / (1 + n_resamples)``.
    """
    n = len(references)
    if len(best_segments) != n or len(other_segments) != n:
        raise ValueError("best, other and references must have the same length")
    if n < 2:
        raise ValueError("paired bootstrap needs at least two segments")
    if n_resamples < 1:
        raise ValueError("n_resamples must be positive")
    best_stats = segment_statistics(best_segments, references, metric, params)
    other_stats = segment_statistics(other_segments, references, metric, params)
    return paired_bootstrap_from_statistics(best_stats, other_stats, metric, n_resamples, seed, params, alpha)


def paired_bootstrap_from_statistics(best_stats: np.ndarray, other_stats: np.ndarray, metric: str = "chrf_pp",
                                     n_resamples: int = 1000, seed: int = 12345,
                                     params: ChrfParams = DEFAULT_CHRF, alpha: float = 0.05) -> BootstrapResult:
    n = best_stats.shape[0]
    if other_stats.shape[0] != n or n < 2:
        raise ValueError("paired bootstrap needs two aligned systems with at least two segments")
    best_score = float(score_statistics(best_stats.sum(axis=0), metric, params)[0])
    other_score = float(score_statistics(other_stats.sum(axis=0), metric, params)[0])
    idx = resample_indices(n, n_resamples, seed)
    best_draws = _resampled_scores(best_stats, idx, metric, params)
    other_draws = _resampled_scores(other_stats, idx, metric, params)
    wins_other = int(np.count_nonzero(other_draws >= best_draws))
    p = (1 + wins_other) / (1 + n_resamples)
    return BootstrapResult(
        best_system_score=best_score,
        other_system_score=other_score,
        best_mean=float(best_draws.mean()),
        other_mean=float(other_draws.mean()),
        ci_half_width=_half_width(best_draws),
        other_ci_half_width=_half_width(other_draws),
        p_value=p,
        significant=p < alpha,
        n_resamples=n_resamples,
        seed=seed,
        metric=metric,
        alpha=alpha,
    )
