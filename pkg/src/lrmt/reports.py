"""Plain-text and CSV renderings of score, significance and feature tables."""

from __future__ import annotations

import csv
import io
from typing import Iterable, Mapping, Optional, Sequence

from .scoring import BootstrapResult


def fmt(value: Optional[float], digits: int = 1, missing: str = "-") -> str:
    return missing if value is None else f"{value:.{digits}f}"


def aligned(rows: Sequence[Sequence[str]], header: Optional[Sequence[str]] = None) -> str:
    table = ([list(header)] if header else []) + [list(r) for r in rows]
    if not table:
        return ""
    widths = [max(len(r[i]) for r in table if i < len(r)) for i in range(max(len(r) for r in table))]
    lines = []
    for k, row in enumerate(table):
        cells = [c.ljust(widths[i]) if i == 0 else c.rjust(widths[i]) for i, c in enumerate(row)]
        lines.append("  ".join(cells).rstrip())
        if header and k == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def to_csv(records: Iterable[Mapping], fieldnames: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(fieldnames), lineterminator="\n", extrasaction="ignore")
    writer.writeheader()
    for rec in records:
        writer.writerow({k: ("" if rec.get(k) is None else rec.get(k)) for k in fieldnames})
    return buf.getvalue()


def bootstrap_cell(result: BootstrapResult, is_best: bool) -> str:
    """``21.9 (21.9 +/- 2.0)`` for the best system, plus ``p = 0.0010*`` for the others."""
    if is_best:
        return f"{result.best_system_score:.1f} ({result.best_mean:.1f} +/- {result.ci_half_width:.1f})"
    star = "*" if result.significant else ""
    return (f"{result.other_system_score:.1f} ({result.other_mean:.1f} +/- {result.other_ci_half_width:.1f}) "
            f"p = {result.p_value:.4f}{star}")


def main_table(scores: Mapping[str, Mapping[str, Mapping[str, Optional[float]]]], directions: Sequence[str],
               configs: Sequence[str], names: Mapping[str, str], summaries: Mapping,
               starred: Mapping[tuple, bool] = None, nllb: Mapping[str, Mapping[str, float]] = None) -> str:
    """Languages by (direction x config) chrF++ grid; best cell marked with ``[ ]``."""
    starred = starred or {}
    nllb = nllb or {}
    has_nllb = {d: bool(nllb.get(d)) for d in directions}
    header = ["Language"]
    for d in directions:
        header += [f"{d} {c}" for c in configs]
        if has_nllb[d]:
            header.append(f"{d} NLLB")
    langs = []
    for d in directions:
        for lang in scores.get(d, {}):
            if lang not in langs:
                langs.append(lang)
    rows = []
    for lang in langs:
        row = [names.get(lang, lang)]
        for d in directions:
            per = scores.get(d, {}).get(lang, {})
            winners = summaries[d].winners.get(lang, ()) if d in summaries else ()
            for c in configs:
                cell = fmt(per.get(c))
                if c in winners:
                    cell = f"[{cell}]" + ("*" if starred.get((lang, d)) else "")
                row.append(cell)
            if has_nllb[d]:
                row.append(fmt(nllb[d].get(lang), missing="--"))
        rows.append(row)
    for title, attr in (("System Average:", "averages"), ("System Wins:", "wins")):
        row = [title]
        for d in directions:
            s = summaries.get(d)
            for c in configs:
                v = getattr(s, attr).get(c) if s else None
                row.append(fmt(v) if attr == "averages" else str(v if v is not None else 0))
            if has_nllb[d]:
                row.append("")
        rows.append(row)
    return aligned(rows, header)
