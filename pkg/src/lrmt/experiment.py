"""End-to-end experiment steps driven by an :class:`ExperimentManifest`.

Layout of an output directory::

    results/{lang}_{direction}_{config}.jsonl   one record per evaluation sentence
    results/skipped.jsonl                       configs not run, with the reason
    prompts/*.prompt.txt                        optional prompt dumps
    reports/                                    score, significance and feature tables
"""

from __future__ import annotations

import hashlib
import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Optional, Sequence

from . import analysis, reports
from .corpus import ENGLISH, LanguageResources
from .errors import (
    AlignmentError,
    BudgetError,
    LrmtError,
    ManifestError,
    ResourceError,
    SingularityError,
)
from .llm import TranslationJob, Translator
from .manifest import ExperimentManifest, LanguageSpec, direction_langs, load_language
from .prompt import CONFIG_LABELS, PromptConfig, assemble, build_grammar_section, dump_name
from .retrieval import gather_context
from .scoring import (
    BLEU_SIGNATURE,
    ChrfParams,
    bleu_corpus_statistics,
    bleu_from_statistics,
    chrf_corpus_statistics,
    chrf_from_statistics,
    paired_bootstrap_from_statistics,
)

log = logging.getLogger(__name__)

RESULT_FIELDS = ("job_id", "lang", "direction", "config", "index", "source", "hypothesis", "reference",
                 "prompt_sha256", "cached", "error")


@dataclass(frozen=True)
class Selection:
    langs: Optional[tuple[str, ...]] = None
    directions: Optional[tuple[str, ...]] = None
    configs: Optional[tuple[str, ...]] = None

    def apply(self, manifest: ExperimentManifest):
        specs = manifest.languages
        if self.langs:
            unknown = set(self.langs) - {s.code for s in specs}
            if unknown:
                raise ManifestError(f"languages not in manifest: {sorted(unknown)}")
            specs = tuple(s for s in specs if s.code in self.langs)
        directions = tuple(d for d in manifest.directions if not self.directions or d in self.directions)
        configs = tuple(c for c in manifest.configs if not self.configs or c in self.configs)
        return specs, directions, configs


def prompt_config(manifest: ExperimentManifest, label: str) -> PromptConfig:
    return PromptConfig.from_label(label, **manifest.prompt)


# ---------------------------------------------------------------- validate

@dataclass
class Issue:
    level: str  # error | warning | notice
    lang: str
    rule: str
    message: str
    path: str = ""

    def line(self) -> str:
        where = f" [{self.path}]" if self.path else ""
        return f"{self.level.upper():7s} {self.lang}: {self.rule}: {self.message}{where}"


@dataclass
class ValidationReport:
    issues: list[Issue] = field(default_factory=list)
    words_disabled: dict = field(default_factory=dict)  # lang -> tuple of directions

    @property
    def ok(self) -> bool:
        return not any(i.level == "error" for i in self.issues)

    @property
    def exit_code(self) -> int:
        return 0 if self.ok else 1

    def add(self, *args, **kwargs):
        self.issues.append(Issue(*args, **kwargs))

    def text(self) -> str:
        lines = [i.line() for i in self.issues]
        n_err = sum(i.level == "error" for i in self.issues)
        n_warn = sum(i.level == "warning" for i in self.issues)
        lines.append(f"{'OK' if self.ok else 'FAILED'}: {n_err} error(s), {n_warn} warning(s)")
        return "\n".join(lines) + "\n"


def _grammar_budget_issue(report, spec, res: LanguageResources, manifest):
    cfg = prompt_config(manifest, "W+S+G")
    section = build_grammar_section(res.grammar)
    from .corpus import estimate_tokens

    need = estimate_tokens(section)
    available = cfg.context_budget_tokens - cfg.reserve_output_tokens
    if need > available:
        level = "warning" if cfg.truncate_grammar else "error"
        report.add(level, spec.code, "token-budget",
                   f"grammar section needs ~{need} tokens, budget leaves {available}"
                   + (" (will be truncated)" if cfg.truncate_grammar else ""), str(spec.grammar))


def cmd_validate(manifest: ExperimentManifest, selection: Selection = Selection()) -> ValidationReport:
    """Check every selected language: files, parsing, dictionary usability, grammar budget."""
    report = ValidationReport()
    specs, directions, configs = selection.apply(manifest)
    if not specs:
        report.add("error", "-", "manifest", "no languages selected")
        return report
    for spec in specs:
        missing = [(what, p) for what, p in spec.paths() if not p.exists()]
        for what, p in missing:
            report.add("error", spec.code, "missing-file", f"{what} not found", str(p))
        if missing:
            continue
        try:
            res = load_language(spec, manifest.seed)
        except (ResourceError, ValueError) as exc:
            report.add("error", spec.code, "load", str(exc))
            continue
        if not res.corpus.by_origin("devtest"):
            report.add("error", spec.code, "no-devtest", "no evaluation (devtest) sentences")
        if any("W" in c for c in configs) and not res.words_enabled:
            sizes = ", ".join(f"{name}={len(d)}" for name, d in
                              (("eng-X", res.dictionary_fwd), ("X-eng", res.dictionary_rev)) if d is not None)
            dirs = tuple(directions)
            report.words_disabled[spec.code] = dirs
            for d in dirs:
                src, tgt = direction_langs(d, spec.code)
                report.add("notice", spec.code, "dictionary-usability",
                           f"W disabled for {src}->{tgt}; W+S and W+S+G run without words "
                           f"(dictionary sizes: {sizes or 'none'})")
        if res.grammar is not None:
            for w in res.grammar.warnings:
                report.add("warning", spec.code, "grammar-tokens", w, str(spec.grammar))
            if "W+S+G" in configs:
                _grammar_budget_issue(report, spec, res, manifest)
        elif "W+S+G" in configs:
            report.add("error", spec.code, "missing-grammar", "W+S+G requested but no grammar book given")
    return report


# ---------------------------------------------------------------- translate

def _sha(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def results_path(out: Path, lang: str, direction: str, config: str) -> Path:
    return out / "results" / f"{lang}_{direction}_{config}.jsonl"


@dataclass
class TranslateSummary:
    jobs: int = 0
    failures: int = 0
    cached: int = 0
    backend_calls: int = 0
    skipped: list = field(default_factory=list)
    files: list = field(default_factory=list)


def build_jobs(spec: LanguageSpec, res: LanguageResources, direction: str, label: str,
               manifest: ExperimentManifest) -> tuple[list[TranslationJob], Optional[str]]:
    """Jobs for one (language, direction, config); returns ``([], reason)`` when the config is skipped."""
    src, tgt = direction_langs(direction, spec.code)
    config = prompt_config(manifest, label)
    if config.include_words and not res.words_enabled:
        if not (config.include_sentences or config.include_grammar):
            return [], "dictionary below usability threshold; W not run"
        config = config.without_words()
    pairs = res.corpus_for(src).by_origin("devtest")
    if manifest.max_sentences is not None:
        pairs = pairs[: int(manifest.max_sentences)]
    jobs = []
    for i, pair in enumerate(pairs):
        ctx = gather_context(pair.source, res, config, src)
        prompt = replace(assemble(pair.source, ctx, res, config, (src, tgt)), config_label=label)
        jobs.append(TranslationJob.create(prompt, spec.code, direction, label, i, pair.target))
    return jobs, None


def _write_jsonl(path: Path, records: Iterable[dict]):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for rec in records:
            f.write(json.dumps(rec, ensure_ascii=False, sort_keys=True) + "\n")


def cmd_translate(manifest: ExperimentManifest, selection: Selection = Selection(), out: Optional[Path] = None,
                  dump_prompts: bool = False, translator: Optional[Translator] = None) -> TranslateSummary:
    out = Path(out or manifest.output_dir)
    specs, directions, configs = selection.apply(manifest)
    translator = translator or Translator(manifest.backend, manifest.backend.cache_dir or out / "cache")
    summary = TranslateSummary()
    groups = []  # (lang, direction, config, jobs)
    for spec in specs:
        res = load_language(spec, manifest.seed)
        for direction in directions:
            for label in configs:
                try:
                    jobs, reason = build_jobs(spec, res, direction, label, manifest)
                except (BudgetError, LrmtError) as exc:
                    jobs, reason = [], f"{type(exc).__name__}: {exc}"
                if reason:
                    summary.skipped.append({"lang": spec.code, "direction": direction, "config": label,
                                            "reason": reason})
                    continue
                groups.append((spec.code, direction, label, jobs))
                if dump_prompts:
                    pdir = out / "prompts"
                    pdir.mkdir(parents=True, exist_ok=True)
                    for job in jobs:
                        (pdir / dump_name(spec.code, direction, label, job.index)).write_bytes(
                            job.prompt.text.encode("utf-8"))

    all_jobs = [job for *_, jobs in groups for job in jobs]
    calls_before = translator.calls
    results = translator.run_batch(all_jobs, manifest.max_in_flight)
    summary.backend_calls = translator.calls - calls_before
    by_id = iter(results)
    for lang, direction, label, jobs in groups:
        records = []
        for job in jobs:
            r = next(by_id)
            rec = {
                "job_id": job.job_id, "lang": lang, "direction": direction, "config": label,
                "index": job.index, "source": job.prompt.source_sentence, "hypothesis": r.hypothesis,
                "reference": job.reference, "prompt_sha256": _sha(job.prompt.text), "cached": r.cached,
            }
            if r.error:
                rec["error"] = r.error
                summary.failures += 1
            summary.cached += int(r.cached)
            records.append(rec)
        path = results_path(out, lang, direction, label)
        _write_jsonl(path, records)
        summary.files.append(str(path))
        summary.jobs += len(records)
    _write_jsonl(out / "results" / "skipped.jsonl", summary.skipped)
    return summary


# ---------------------------------------------------------------- score

def read_results(paths: Sequence[Path]) -> dict:
    """``{(lang, direction, config): [record, ...]}`` sorted by index."""
    grouped = defaultdict(list)
    for p in paths:
        with open(p, encoding="utf-8") as f:
            for line in f:
                if line.strip():
                    rec = json.loads(line)
                    grouped[(rec["lang"], rec["direction"], rec["config"])].append(rec)
    for recs in grouped.values():
        recs.sort(key=lambda r: r["index"])
    return dict(grouped)


def result_files(out: Path) -> list[Path]:
    return sorted(p for p in (Path(out) / "results").glob("*.jsonl") if p.name != "skipped.jsonl")


@dataclass
class SystemScores:
    lang: str
    direction: str
    config: str
    n: int
    failures: int
    chrf: float
    bleu: float
    chrf_stats: object = field(repr=False, default=None)


def _hyps_refs(recs, references=None):
    hyps = [r.get("hypothesis") or "" for r in recs]
    if references is not None:
        refs = list(references)
    else:
        refs = [r.get("reference") for r in recs]
    if len(refs) != len(hyps) or any(ref is None or ref == "" for ref in refs):
        raise AlignmentError(f"{len(hyps)} hypotheses but references are missing or misaligned")
    return hyps, refs


def cmd_score(paths: Sequence[Path], params: ChrfParams = ChrfParams(), references: Optional[dict] = None) -> list[SystemScores]:
    """Corpus chrF++ and BLEU per (lang, direction, config).

    ``references`` optionally maps ``(lang, direction)`` to the reference list; otherwise the
    references stored in the result records are used.
    """
    grouped = read_results(paths)
    if not grouped:
        raise AlignmentError("no result records to score")
    out = []
    for key in sorted(grouped):
        recs = grouped[key]
        refs = references.get(key[:2]) if references else None
        hyps, refs = _hyps_refs(recs, refs)
        chrf_stats = chrf_corpus_statistics(hyps, refs, params)
        bleu_stats = bleu_corpus_statistics(hyps, refs)
        out.append(SystemScores(*key, n=len(recs), failures=sum(1 for r in recs if r.get("error")),
                                chrf=chrf_from_statistics(chrf_stats.sum(axis=0), params),
                                bleu=bleu_from_statistics(bleu_stats.sum(axis=0)), chrf_stats=chrf_stats))
    return out


def score_grid(scores: Sequence[SystemScores], attr: str = "chrf") -> dict:
    grid = defaultdict(lambda: defaultdict(dict))
    for s in scores:
        grid[s.direction][s.lang][s.config] = getattr(s, attr)
    return {d: {lang: dict(v) for lang, v in per.items()} for d, per in grid.items()}


def scores_csv(scores: Sequence[SystemScores], params: ChrfParams) -> str:
    recs = [{"lang": s.lang, "direction": s.direction, "config": s.config, "segments": s.n,
             "failures": s.failures, "chrf_pp": f"{s.chrf:.4f}", "bleu": f"{s.bleu:.4f}",
             "chrf_signature": params.signature, "bleu_signature": BLEU_SIGNATURE} for s in scores]
    return reports.to_csv(recs, ["lang", "direction", "config", "segments", "failures", "chrf_pp", "bleu",
                                 "chrf_signature", "bleu_signature"])


# ---------------------------------------------------------------- significance

@dataclass
class Comparison:
    lang: str
    direction: str
    best: str
    other: str
    result: object


def _config_rank(label: str) -> int:
    return CONFIG_LABELS.index(label) if label in CONFIG_LABELS else len(CONFIG_LABELS)


def cmd_significance(scores: Sequence[SystemScores], n_resamples: int = 1000, seed: int = 1234,
                     params: ChrfParams = ChrfParams()) -> list[Comparison]:
    """Bootstrap the best config of every (lang, direction) against each other config."""
    by_pair = defaultdict(dict)
    for s in scores:
        by_pair[(s.lang, s.direction)][s.config] = s
    out = []
    for (lang, direction), systems in sorted(by_pair.items()):
        if len(systems) < 2:
            log.info("%s %s: only one config scored; nothing to compare", lang, direction)
            continue
        # max() keeps the first maximum, so ties go to the earliest config in the standard order
        ordered = sorted(systems.values(), key=lambda s: (_config_rank(s.config), s.config))
        best = max(ordered, key=lambda s: s.chrf)
        for cfg, other in systems.items():
            if cfg == best.config:
                continue
            if other.chrf_stats.shape[0] != best.chrf_stats.shape[0]:
                raise AlignmentError(f"{lang} {direction}: {best.config} and {cfg} differ in segment count")
            res = paired_bootstrap_from_statistics(best.chrf_stats, other.chrf_stats, "chrf_pp",
                                                   n_resamples, seed, params)
            out.append(Comparison(lang, direction, best.config, cfg, res))
    return out


def significance_table(comparisons: Sequence[Comparison], direction: str, configs: Sequence[str],
                       names: dict) -> str:
    by_lang = defaultdict(list)
    for c in comparisons:
        if c.direction == direction:
            by_lang[c.lang].append(c)
    rows = []
    for lang in sorted(by_lang, key=lambda code: names.get(code, code)):
        comps = by_lang[lang]
        cells = {c.other: reports.bootstrap_cell(c.result, False) for c in comps}
        cells[comps[0].best] = reports.bootstrap_cell(comps[0].result, True)
        rows.append([names.get(lang, lang)] + [cells.get(cfg, "NA") for cfg in configs])
    return reports.aligned(rows, ["Language", *configs])


def significance_csv(comparisons: Sequence[Comparison]) -> str:
    recs = []
    for c in comparisons:
        r = c.result
        recs.append({"lang": c.lang, "direction": c.direction, "best": c.best, "other": c.other,
                     "best_score": f"{r.best_system_score:.4f}", "other_score": f"{r.other_system_score:.4f}",
                     "best_mean": f"{r.best_mean:.4f}", "best_ci_half_width": f"{r.ci_half_width:.4f}",
                     "other_mean": f"{r.other_mean:.4f}", "other_ci_half_width": f"{r.other_ci_half_width:.4f}",
                     "p_value": f"{r.p_value:.4f}", "significant": int(r.significant),
                     "n_resamples": r.n_resamples, "seed": r.seed})
    return reports.to_csv(recs, list(recs[0]) if recs else ["lang"])


def all_significant(comparisons: Sequence[Comparison]) -> dict:
    flags = {}
    for c in comparisons:
        key = (c.lang, c.direction)
        flags[key] = flags.get(key, True) and c.result.significant
    return flags


# ---------------------------------------------------------------- analyze

def feature_rows_from_run(manifest: ExperimentManifest, scores: Sequence[SystemScores]) -> dict:
    """Regression rows per direction built from run scores plus manifest resource stats."""
    grid = score_grid(scores)
    rows = defaultdict(list)
    for direction, per_lang in grid.items():
        for lang, per_cfg in sorted(per_lang.items()):
            if "baseline" not in per_cfg or "W+S+G" not in per_cfg:
                continue
            spec = manifest.language(lang)
            gaps = []
            if spec.opus_sentences is None:
                gaps.append("opus_sentences")
            if spec.grammar_meta.perplexity is None:
                gaps.append("grammar perplexity")
            dspec = spec.dictionary_fwd if direction == "eng-X" else spec.dictionary_rev
            if dspec is None:
                gaps.append(f"dictionary ({direction})")
            if spec.grammar is None:
                gaps.append("grammar")
            if gaps:
                raise ManifestError(f"{lang}: missing feature(s) for analysis: {', '.join(gaps)}")
            words = dspec.size
            if words is None:
                src, tgt = direction_langs(direction, lang)
                from .corpus import load_dictionary

                words = len(load_dictionary(dspec.path, src, tgt))
            tokens = spec.grammar_meta.tokens
            if tokens is None:
                from .corpus import load_grammar_book

                tokens = load_grammar_book(spec.grammar, lang).token_count
            rows[direction].append(analysis.FeatureRow(
                lang, direction, per_cfg["baseline"], per_cfg["W+S+G"], int(words), int(spec.opus_sentences),
                float(spec.grammar_meta.perplexity), int(tokens)))
    return dict(rows)


def cmd_analyze(rows_by_direction: dict, transform: str = "raw") -> tuple[list[dict], list[dict]]:
    """Additive and single-feature R^2 grid plus scatter points. Refuses when no direction has enough rows."""
    if not rows_by_direction or all(len(rows) < 3 for rows in rows_by_direction.values()):
        n = max((len(r) for r in rows_by_direction.values()), default=0)
        raise ValueError(f"regression needs at least 3 languages per direction, got {n}")
    table = analysis.feature_table(rows_by_direction, transform=transform)
    scatter = [pt for d in rows_by_direction for pt in analysis.scatter_rows(rows_by_direction[d])]
    return table, scatter


def feature_table_text(table: list[dict], directions: Sequence[str]) -> str:
    header = ["Feature"]
    for d in directions:
        header += [f"{d} Add.", f"{d} Single"]
    rows = []
    for k, rec in enumerate(table):
        label = rec["feature"] if k == 0 else f"+ {rec['feature']}"
        row = [label]
        for d in directions:
            row += [reports.fmt(rec.get(f"{d}_additive"), 3, "n/a"), reports.fmt(rec.get(f"{d}_single"), 3, "n/a")]
        rows.append(row)
    return reports.aligned(rows, header)


def feature_table_csv(table: list[dict], directions: Sequence[str]) -> str:
    fields = ["feature"] + [f"{d}_{k}" for d in directions for k in ("additive", "single")]
    recs = [{k: (f"{v:.4f}" if isinstance(v, float) else v) for k, v in rec.items()} for rec in table]
    return reports.to_csv(recs, fields)


# ---------------------------------------------------------------- report

def _write(path: Path, text: str):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(text.encode("utf-8"))


def write_score_reports(out: Path, scores, manifest: Optional[ExperimentManifest], params, comparisons=None,
                        directions=None, configs=None):
    rdir = out / "reports"
    _write(rdir / "scores.csv", scores_csv(scores, params))
    grid = score_grid(scores)
    directions = [d for d in (directions or ("eng-X", "X-eng")) if d in grid]
    configs = configs or ("baseline", "W", "W+S", "W+S+G")
    names = {s.code: s.display_name for s in manifest.languages} if manifest else {}
    nllb = defaultdict(dict)
    if manifest:
        for s in manifest.languages:
            for d, v in s.nllb.items():
                nllb[d][s.code] = float(v)
    summaries = {d: analysis.best_system_table(grid[d], configs) for d in directions}
    starred = all_significant(comparisons) if comparisons else {}
    text = reports.main_table(grid, directions, configs, names, summaries, starred, nllb)
    text += f"\nchrF++ signature: {params.signature}\nBLEU signature: {BLEU_SIGNATURE}\n"
    _write(rdir / "table_chrf.txt", text)
    bleu_grid = score_grid(scores, "bleu")
    bleu_summ = {d: analysis.best_system_table(bleu_grid[d], configs) for d in directions}
    _write(rdir / "table_bleu.txt", reports.main_table(bleu_grid, directions, configs, names, bleu_summ))
    return summaries


def write_significance_reports(out: Path, comparisons, directions, configs, names):
    rdir = out / "reports"
    _write(rdir / "significance.csv", significance_csv(comparisons))
    for d in directions:
        _write(rdir / f"significance_{d}.txt", significance_table(comparisons, d, configs, names))


def write_analysis_reports(out: Path, table, scatter, directions):
    rdir = out / "reports"
    _write(rdir / "features.txt", feature_table_text(table, directions))
    _write(rdir / "features.csv", feature_table_csv(table, directions))
    _write(rdir / "scatter.csv", reports.to_csv(scatter, ["lang", "direction", "log10_sentences", "score_delta"]))


def cmd_report(manifest: ExperimentManifest, selection: Selection = Selection(), out: Optional[Path] = None,
               seed: Optional[int] = None) -> dict:
    """Score, test and analyze an existing run; returns the paths written."""
    out = Path(out or manifest.output_dir)
    seed = manifest.seed if seed is None else seed
    _, directions, configs = selection.apply(manifest)
    files = result_files(out)
    if selection.langs or selection.directions or selection.configs:
        files = [f for f in files if _selected(f, selection)]
    scores = cmd_score(files, manifest.eval_params)
    comparisons = cmd_significance(scores, manifest.n_resamples, seed, manifest.eval_params)
    names = {s.code: s.display_name for s in manifest.languages}
    write_score_reports(out, scores, manifest, manifest.eval_params, comparisons, directions, configs)
    write_significance_reports(out, comparisons, directions, configs, names)
    written = {"scores": out / "reports" / "scores.csv"}
    try:
        rows = feature_rows_from_run(manifest, scores)
        table, scatter = cmd_analyze(rows)
    except (ValueError, ManifestError, SingularityError) as exc:
        log.warning("feature analysis skipped: %s", exc)
        _write(out / "reports" / "features.txt", f"feature analysis skipped: {exc}\n")
    else:
        write_analysis_reports(out, table, scatter, [d for d in directions if d in rows])
        written["features"] = out / "reports" / "features.csv"
    return written


def _selected(path: Path, selection: Selection) -> bool:
    lang, direction, config = path.stem.split("_", 2)
    return ((not selection.langs or lang in selection.langs)
            and (not selection.directions or direction in selection.directions)
            and (not selection.configs or config in selection.configs))

