import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lrmt import published as P
from lrmt.analysis import (
    FEATURE_ORDER,
    FeatureRow,
    additive_analysis,
    best_system_table,
    feature_table,
    ols,
    ols_fit,
    scatter_rows,
    single_feature_analysis,
)
from lrmt.errors import SingularityError

import oracles


def rows_from(X, y):
    out = []
    for i, (xs, t) in enumerate(zip(X, y)):
        out.append(FeatureRow(f"l{i}", "eng-X", float(xs[0]), float(t), int(xs[1]), int(xs[2]), float(xs[3]),
                              int(xs[4])))
    return out


def test_perfect_fit_and_constant_target():
    x = np.arange(6, dtype=float)[:, None]
    assert ols(x, 3 * x[:, 0] - 2, ["x"]).r_squared == pytest.approx(1.0)
    fit = ols(x, np.full(6, 4.0), ["x"])
    assert fit.r_squared == 0.0
    assert fit.intercept == pytest.approx(4.0) and fit.coefficients[0] == pytest.approx(0.0, abs=1e-12)


def test_coefficients_match_pinv_oracle():
    X = np.array([[1.0, 2.0], [2.0, 1.5], [3.0, 7.0], [4.5, 2.0], [5.0, 3.3]])
    y = np.array([2.0, 3.5, 1.0, 9.0, 4.0])
    fit = ols(X, y, ["a", "b"])
    r2, beta = oracles.r2_pinv(X, y)
    assert fit.intercept == pytest.approx(beta[0], abs=1e-8)
    assert np.allclose(fit.coefficients, beta[1:], atol=1e-8)
    assert fit.r_squared == pytest.approx(r2, abs=1e-10)


def test_mixed_units_are_stable():
    rng = np.random.default_rng(0)
    X = np.column_stack([rng.uniform(10, 60, 16), rng.integers(0, 4_000_000, 16), rng.uniform(5, 60, 16)])
    y = rng.uniform(10, 60, 16)
    fit = ols(X, y, ["a", "b", "c"])
    r2, beta = oracles.r2_pinv(X, y)
    assert np.allclose(fit.coefficients, beta[1:], rtol=1e-7, atol=1e-12)
    assert fit.r_squared == pytest.approx(r2, abs=1e-10)


def test_constant_column_named():
    X = np.column_stack([np.arange(6.0), np.full(6, 3.0)])
    with pytest.raises(SingularityError) as exc:
        ols(X, np.arange(6.0) ** 2, ["a", "flat"])
    assert exc.value.columns == ["flat"]


def test_collinear_columns_named():
    a = np.array([1.0, 2.0, 4.0, 7.0, 8.0, 9.0])
    b = np.array([3.0, 1.0, 4.0, 1.0, 5.0, 9.0])
    X = np.column_stack([a, b, 2 * a - b + 1])
    with pytest.raises(SingularityError) as exc:
        ols(X, np.arange(6.0), ["a", "b", "c"])
    assert set(exc.value.columns) == {"a", "b", "c"}
    assert "c" in str(exc.value)


def test_tiny_but_varying_column_is_fit():
    x = np.zeros(8)
    x[-1] = 1e-241
    fit = ols(x[:, None], np.arange(8.0), ["x"])
    assert 0.0 <= fit.r_squared <= 1.0 and np.isfinite(fit.coefficients).all()


def test_too_few_rows():
    with pytest.raises(ValueError):
        ols(np.array([[1.0], [2.0]]), np.array([1.0, 2.0]), ["x"])


def test_single_feature_r2_is_squared_pearson():
    for d in P.DIRECTIONS:
        rows = P.feature_rows(d)
        y = [r.target_score for r in rows]
        for f, fit in zip(FEATURE_ORDER, single_feature_analysis(rows)):
            x = [float(getattr(r, f)) for r in rows]
            assert fit.r_squared == pytest.approx(oracles.pearson_r2(x, y), abs=1e-10)


def test_feature_regressed_on_itself():
    rows = P.feature_rows("eng-X")
    assert ols_fit(rows, ["baseline_score"], target="baseline_score").r_squared == pytest.approx(1.0)


finite = st.integers(-5000, 5000).map(lambda i: i / 100)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(finite, finite, finite, finite), min_size=8, max_size=20))
def test_nested_r2_monotone_and_residuals_orthogonal(data):
    arr = np.array(data)
    X, y = arr[:, :3], arr[:, 3]
    labels = ["a", "b", "c"]
    prev = -1.0
    for k in range(1, 4):
        try:
            fit = ols(X[:, :k], y, labels[:k])
        except SingularityError:
            return
        assert 0.0 <= fit.r_squared <= 1.0
        assert fit.r_squared >= prev - 1e-9
        prev = fit.r_squared
        resid = np.array(fit.residuals)
        scale = max(np.linalg.norm(resid), 1e-12)
        for j in range(k):
            col = X[:, j] - X[:, j].mean()
            assert abs(resid @ col) / (scale * np.linalg.norm(col)) < 1e-8
        assert abs(resid.sum()) / (scale * math.sqrt(len(y))) < 1e-8


@pytest.mark.parametrize("direction", P.DIRECTIONS)
def test_additive_monotone_on_published_rows(direction):
    r2 = [f.r_squared for f in additive_analysis(P.feature_rows(direction))]
    assert all(b >= a - 1e-12 for a, b in zip(r2, r2[1:]))


def test_eng_x_baseline_r2_from_main_table():
    fit = ols_fit(P.feature_rows("eng-X"), ["baseline_score"])
    assert abs(fit.r_squared - P.FEATURE_R2["eng-X"][0][0]) <= 0.01


@pytest.mark.parametrize("direction", P.DIRECTIONS)
def test_bootstrap_table_scores_reproduce_published_r2(direction):
    # The bootstrap-run point scores reproduce every published cell closely.
    rows = P.feature_rows(direction, P.BOOTSTRAP_CHRF)
    add = additive_analysis(rows)
    single = single_feature_analysis(rows)
    for (want_add, want_single), a, s in zip(P.FEATURE_R2[direction], add, single):
        assert abs(a.r_squared - want_add) <= 0.02
        assert abs(s.r_squared - want_single) <= 0.02
    assert abs(add[0].r_squared - P.FEATURE_R2[direction][0][0]) <= 0.01


def test_transforms_leave_baseline_cell_unchanged():
    rows = P.feature_rows("eng-X")
    cells = {t: feature_table({"eng-X": rows}, transform=t)[0]["eng-X_additive"] for t in ("raw", "log1p", "zscore")}
    assert cells["raw"] == pytest.approx(cells["log1p"]) == pytest.approx(cells["zscore"])
    with pytest.raises(ValueError):
        ols_fit(rows, ["dict_words"], transform="cube")


def test_feature_table_shape_and_small_n():
    table = feature_table({d: P.feature_rows(d) for d in P.DIRECTIONS})
    assert [r["feature"] for r in table] == ["Baseline", "Words", "Sentences", "Perplexity", "Length"]
    assert table[0]["eng-X_additive"] == table[0]["eng-X_single"]
    small = feature_table({"eng-X": P.feature_rows("eng-X")[:3]})
    assert small[1]["eng-X_additive"] is None


def test_feature_row_validation():
    with pytest.raises(ValueError):
        FeatureRow("x", "eng-X", 101, 5, 1, 1, 1.0, 1)
    with pytest.raises(ValueError):
        FeatureRow("x", "eng-X", 10, 5, -1, 1, 1.0, 1)


@pytest.mark.parametrize("direction", P.DIRECTIONS)
def test_system_wins_and_averages(direction):
    summary = best_system_table(P.scores_by_language(direction))
    assert tuple(summary.wins[c] for c in P.CONFIGS) == P.MAIN_SYSTEM_WINS[direction]
    for c, want in zip(P.CONFIGS, P.MAIN_SYSTEM_AVERAGE[direction]):
        assert abs(summary.averages[c] - want) <= 0.05 + 1e-9
    assert summary.ties == ()


def test_ties_count_for_every_tied_config():
    s = best_system_table({"a": {"x": 5.0, "y": 5.0, "z": 1.0}, "b": {"x": 1.0, "y": 2.0, "z": None}})
    assert s.winners == {"a": ("x", "y"), "b": ("y",)}
    assert s.ties == ("a",)
    assert s.wins == {"x": 1, "y": 2, "z": 0}
    assert s.averages["z"] == 1.0


def test_single_language_single_config():
    s = best_system_table({"a": {"baseline": 12.0}})
    assert s.winners == {"a": ("baseline",)} and s.wins == {"baseline": 1}
    with pytest.raises(ValueError):
        best_system_table({"a": {"baseline": None}})


@settings(max_examples=50, deadline=None)
@given(st.dictionaries(st.sampled_from(["a", "b", "c"]),
                       st.lists(st.integers(0, 10000).map(lambda i: i / 100), min_size=4, max_size=4), min_size=1))
def test_argmax_invariant_under_monotone_transform(table):
    scores = {lang: dict(zip(P.CONFIGS, vals)) for lang, vals in table.items()}
    warped = {lang: {c: math.exp(v / 10) + 3 for c, v in per.items()} for lang, per in scores.items()}
    assert best_system_table(scores).winners == best_system_table(warped).winners


def test_scatter_rows():
    rows = P.feature_rows("eng-X") + P.feature_rows("X-eng")
    pts = scatter_rows(rows)
    assert len(pts) == 32
    kgv = next(p for p in pts if p["lang"] == "kgv" and p["direction"] == "eng-X")
    row = next(r for r in rows if r.lang == "kgv")
    assert kgv["score_delta"] == pytest.approx(row.target_score - row.baseline_score)
    assert kgv["log10_sentences"] == pytest.approx(math.log10(P.OPUS_SENTENCES["kgv"] + 1), abs=1e-6)
