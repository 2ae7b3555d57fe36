"""Command-line entry point: ``lrmt {validate,translate,score,significance,analyze,report}``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import experiment, published
from .errors import LrmtError
from .manifest import load_manifest

log = logging.getLogger("lrmt")


def _csv_list(value: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in value.split(",") if v.strip())


def _common(p: argparse.ArgumentParser, manifest_required: bool = True):
    p.add_argument("--manifest", type=Path, required=manifest_required, help="experiment manifest (YAML or JSON)")
    p.add_argument("--langs", type=_csv_list, help="comma-separated language codes")
    p.add_argument("--directions", type=_csv_list, help="comma-separated subset of eng-X,X-eng")
    p.add_argument("--configs", type=_csv_list, help="comma-separated subset of baseline,W,W+S,W+S+G")
    p.add_argument("--out", type=Path, help="output directory (default: manifest output_dir)")
    p.add_argument("--seed", type=int, help="override the manifest seed")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lrmt", description="Retrieval-augmented LLM translation experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check resources, dictionary usability and token budgets")
    _common(p)

    p = sub.add_parser("translate", help="assemble prompts and collect translations")
    _common(p)
    p.add_argument("--dump-prompts", action="store_true", help="write every prompt under OUT/prompts/")
    p.add_argument("--max-in-flight", type=int, help="concurrent requests (default: manifest value)")
    p.add_argument("--max-sentences", type=int, help="evaluate only the first N devtest sentences")

    p = sub.add_parser("score", help="corpus chrF++ and BLEU for every results file")
    _common(p)

    p = sub.add_parser("significance", help="paired bootstrap of the best config against the others")
    _common(p)
    p.add_argument("--n-resamples", type=int, help="bootstrap resamples (default: manifest value)")

    p = sub.add_parser("analyze", help="feature regressions and scatter data")
    _common(p, manifest_required=False)
    p.add_argument("--published", action="store_true", help="use the published score and resource tables")
    p.add_argument("--table", choices=("main", "bootstrap"), default="main",
                   help="which published score table to use with --published")
    p.add_argument("--transform", choices=("raw", "log1p", "zscore"), default="raw")

    p = sub.add_parser("report", help="translate then score, test and analyze")
    _common(p)
    p.add_argument("--dump-prompts", action="store_true")
    p.add_argument("--max-in-flight", type=int)
    return parser


def _setup(args):
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")
    manifest = load_manifest(args.manifest) if args.manifest else None
    if manifest is not None:
        changes = {}
        if args.seed is not None:
            changes["seed"] = args.seed
        if getattr(args, "max_in_flight", None):
            changes["max_in_flight"] = args.max_in_flight
        if getattr(args, "max_sentences", None):
            changes["max_sentences"] = args.max_sentences
        if getattr(args, "n_resamples", None):
            changes["n_resamples"] = args.n_resamples
        if changes:
            from dataclasses import replace

            manifest = replace(manifest, **changes)
    selection = experiment.Selection(args.langs, args.directions, args.configs)
    out = args.out or (manifest.output_dir if manifest else Path("runs"))
    return manifest, selection, Path(out)


def _validate(manifest, selection, out, args) -> int:
    report = experiment.cmd_validate(manifest, selection)
    sys.stdout.write(report.text())
    return report.exit_code


def _translate(manifest, selection, out, args) -> int:
    report = experiment.cmd_validate(manifest, selection)
    if not report.ok:
        sys.stdout.write(report.text())
        return 1
    s = experiment.cmd_translate(manifest, selection, out, dump_prompts=args.dump_prompts)
    print(f"{s.jobs} result(s) in {len(s.files)} file(s); {s.cached} cached, {s.backend_calls} backend call(s), "
          f"{s.failures} failure(s), {len(s.skipped)} config(s) skipped")
    for rec in s.skipped:
        print(f"skipped {rec['lang']} {rec['direction']} {rec['config']}: {rec['reason']}")
    return 1 if s.failures else 0


def _scores(manifest, selection, out):
    files = [f for f in experiment.result_files(out) if experiment._selected(f, selection)]
    return experiment.cmd_score(files, manifest.eval_params)


def _score(manifest, selection, out, args) -> int:
    scores = _scores(manifest, selection, out)
    _, directions, configs = selection.apply(manifest)
    experiment.write_score_reports(out, scores, manifest, manifest.eval_params, None, directions, configs)
    sys.stdout.write((out / "reports" / "table_chrf.txt").read_text(encoding="utf-8"))
    return 0


def _significance(manifest, selection, out, args) -> int:
    scores = _scores(manifest, selection, out)
    comps = experiment.cmd_significance(scores, manifest.n_resamples, manifest.seed, manifest.eval_params)
    if not comps:
        print("nothing to compare: every (language, direction) has a single scored config")
        return 0
    _, directions, configs = selection.apply(manifest)
    names = {s.code: s.display_name for s in manifest.languages}
    experiment.write_significance_reports(out, comps, directions, configs, names)
    for d in directions:
        path = out / "reports" / f"significance_{d}.txt"
        print(f"== {d}")
        sys.stdout.write(path.read_text(encoding="utf-8"))
    return 0


def _analyze(manifest, selection, out, args) -> int:
    if args.published:
        table = published.MAIN_CHRF if args.table == "main" else published.BOOTSTRAP_CHRF
        directions = selection.directions or published.DIRECTIONS
        rows = {d: published.feature_rows(d, table) for d in directions}
        if selection.langs:
            rows = {d: [r for r in rs if r.lang in selection.langs] for d, rs in rows.items()}
    else:
        if manifest is None:
            raise LrmtError("analyze needs --manifest or --published")
        scores = _scores(manifest, selection, out)
        rows = experiment.feature_rows_from_run(manifest, scores)
        directions = [d for d in manifest.directions if d in rows]
    table, scatter = experiment.cmd_analyze(rows, args.transform)
    experiment.write_analysis_reports(out, table, scatter, directions)
    sys.stdout.write(experiment.feature_table_text(table, directions))
    return 0


def _report(manifest, selection, out, args) -> int:
    code = _translate(manifest, selection, out, args)
    if code:
        return code
    written = experiment.cmd_report(manifest, selection, out)
    for name, path in written.items():
        print(f"{name}: {path}")
    return 0


COMMANDS = {
    "validate": _validate,
    "translate": _translate,
    "score": _score,
    "significance": _significance,
    "analyze": _analyze,
    "report": _report,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        manifest, selection, out = _setup(args)
        return COMMANDS[args.command](manifest, selection, out, args)
    except (LrmtError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
