"""Least-squares feature analysis and best-system summaries."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np
from scipy import linalg

from .errors import SingularityError

FEATURE_ORDER = ("baseline_score", "dict_words", "opus_sentences", "grammar_perplexity", "grammar_tokens")
FEATURE_NAMES = {
    "baseline_score": "Baseline",
    "dict_words": "Words",
    "opus_sentences": "Sentences",
    "grammar_perplexity": "Perplexity",
    "grammar_tokens": "Length",
}
TRANSFORMS = ("raw", "log1p", "zscore")


@dataclass(frozen=True)
class FeatureRow:
    lang: str
    direction: str
    baseline_score: float
    target_score: float
    dict_words: int
    opus_sentences: int
    grammar_perplexity: float
    grammar_tokens: int

    def __post_init__(self):
        for name in ("baseline_score", "target_score"):
            v = getattr(self, name)
            if not 0 <= v <= 100:
                raise ValueError(f"{self.lang}: {name}={v} is outside [0, 100]")
        for name in ("dict_words", "opus_sentences", "grammar_tokens"):
            if getattr(self, name) < 0:
                raise ValueError(f"{self.lang}: {name} must be non-negative")


@dataclass(frozen=True)
class RegressionResult:
    feature_labels: tuple[str, ...]
    coefficients: tuple[float, ...]
    intercept: float
    r_squared: float
    n: int = 0
    residuals: tuple[float, ...] = field(default=(), repr=False, compare=False)


def _column(rows, name, transform="raw"):
    x = np.array([float(getattr(r, name)) for r in rows])
    if transform == "raw" or name in ("baseline_score", "target_score"):
        return x
    if transform == "log1p":
        return np.log1p(x)
    if transform == "zscore":
        sd = x.std()
        return (x - x.mean()) / sd if sd > 0 else x - x.mean()
    raise ValueError(f"unknown transform {transform!r}; expected one of {TRANSFORMS}")


def ols(X: np.ndarray, y: np.ndarray, labels: Sequence[str]) -> RegressionResult:
    """Fit ``y ~ 1 + X`` by column-pivoted QR. ``labels`` names the columns of ``X``."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    if n <= p + 1:
        raise ValueError(f"need more than {p + 1} rows to fit {p} feature(s) with an intercept, got {n}")
    constant = [labels[j] for j in range(p) if np.ptp(X[:, j]) == 0]
    if constant:
        raise SingularityError(constant, f"feature column(s) constant across rows: {', '.join(constant)}")

    A = np.column_stack([np.ones(n), X])
    names = ["intercept", *labels]
    # Scale columns so the rank test is not dominated by units (counts vs. scores).
    # Max-abs rather than the 2-norm: the norm of tiny entries underflows to zero.
    scale = np.abs(A).max(axis=0)
    As = A / scale
    Q, R, piv = linalg.qr(As, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = diag[0] * max(n, p + 1) * np.finfo(float).eps * 1e3
    rank = int(np.sum(diag > tol))
    if rank < p + 1:
        basis = As[:, piv[:rank]]
        involved = set()
        for j in piv[rank:]:
            coef, *_ = np.linalg.lstsq(basis, As[:, j], rcond=None)
            involved.add(names[j])
            involved.update(names[piv[i]] for i in range(rank) if abs(coef[i]) > 1e-8)
        involved.discard("intercept")
        raise SingularityError(sorted(involved))

    beta_s = linalg.solve_triangular(R, Q.T @ y)
    beta = np.empty(p + 1)
    beta[piv] = beta_s
    beta /= scale
    fitted = A @ beta
    resid = y - fitted
    ss_res = float(resid @ resid)
    centred = y - y.mean()
    ss_tot = float(centred @ centred)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    r2 = min(1.0, max(0.0, r2))
    return RegressionResult(tuple(labels), tuple(float(b) for b in beta[1:]), float(beta[0]), r2, n,
                            tuple(float(v) for v in resid))


def ols_fit(rows: Sequence[FeatureRow], feature_subset: Sequence[str], target: str = "target_score",
            transform: str = "raw") -> RegressionResult:
    X = np.column_stack([_column(rows, f, transform) for f in feature_subset]) if feature_subset else np.empty((len(rows), 0))
    y = _column(rows, target)
    return ols(X, y, list(feature_subset))


def additive_analysis(rows: Sequence[FeatureRow], feature_order: Sequence[str] = FEATURE_ORDER,
                      transform: str = "raw") -> list[RegressionResult]:
    """Nested fits: the k-th model uses the first k features."""
    return [ols_fit(rows, feature_order[:k], transform=transform) for k in range(1, len(feature_order) + 1)]


def single_feature_analysis(rows: Sequence[FeatureRow], feature_order: Sequence[str] = FEATURE_ORDER,
                            transform: str = "raw") -> list[RegressionResult]:
    return [ols_fit(rows, [f], transform=transform) for f in feature_order]


def feature_table(rows_by_direction: Mapping[str, Sequence[FeatureRow]], feature_order=FEATURE_ORDER,
                  transform: str = "raw") -> list[dict]:
    """Rows of ``{feature, <dir>_additive, <dir>_single, ...}``; cells are None when n is too small."""
    table = [{"feature": FEATURE_NAMES.get(f, f)} for f in feature_order]
    for direction, rows in rows_by_direction.items():
        for k, f in enumerate(feature_order):
            for kind, subset in (("additive", feature_order[:k + 1]), ("single", [f])):
                try:
                    r2 = ols_fit(rows, subset, transform=transform).r_squared
                except (ValueError, SingularityError):
                    r2 = None
                table[k][f"{direction}_{kind}"] = r2
    return table


# ---------------------------------------------------------------- best-system table

@dataclass(frozen=True)
class SystemSummary:
    configs: tuple[str, ...]
    winners: dict  # lang -> tuple of winning configs
    ties: tuple[str, ...]
    wins: dict  # config -> count
    averages: dict  # config -> mean over languages with a score (None when no scores)


def best_system_table(all_scores: Mapping[str, Mapping[str, Optional[float]]],
                      configs: Optional[Sequence[str]] = None) -> SystemSummary:
    """Per-language argmax over configs, win counts and per-config means.

    ``all_scores[lang][config]`` may be None or missing for configs that were not run.
    Tied best configs all receive a win and the language is listed in ``ties``.
    """
    if configs is None:
        seen = []
        for per_lang in all_scores.values():
            for c in per_lang:
                if c not in seen:
                    seen.append(c)
        configs = seen
    configs = tuple(configs)
    winners, ties = {}, []
    wins = {c: 0 for c in configs}
    for lang, per_lang in all_scores.items():
        available = {c: v for c, v in per_lang.items() if v is not None and c in configs}
        if not available:
            raise ValueError(f"{lang}: no scores")
        top = max(available.values())
        best = tuple(c for c in configs if available.get(c) == top)
        winners[lang] = best
        if len(best) > 1:
            ties.append(lang)
        for c in best:
            wins[c] += 1
    averages = {}
    for c in configs:
        vals = [per_lang[c] for per_lang in all_scores.values() if per_lang.get(c) is not None]
        averages[c] = sum(vals) / len(vals) if vals else None
    return SystemSummary(configs, winners, tuple(ties), wins, averages)


def scatter_rows(rows: Sequence[FeatureRow]) -> list[dict]:
    """(log10 OPUS sentences, W+S+G minus baseline) points, one per language and direction."""
    return [{
        "lang": r.lang,
        "direction": r.direction,
        "log10_sentences": round(math.log10(r.opus_sentences + 1), 6),
        "score_delta": round(r.target_score - r.baseline_score, 6),
    } for r in rows]
