"""Scheme-comparison tables and linearity diagnostics from a bench CSV."""

from __future__ import annotations

import math
import statistics
from collections import defaultdict

from zkperm.bench import PROOF_TYPES, BenchRecord, read_csv

METRICS = (
    "constraint_count",
    "witness_time_s",
    "setup_time_s",
    "prove_time_s",
    "compiled_size_bytes",
    "pk_size_bytes",
    "vk_size_bytes",
    "proof_size_bytes",
    "verify_cost_units",
)
ROW_ORDER = tuple(label for t in PROOF_TYPES for label in (t, f"cp-{t}"))


def reduction(baseline: float, cp: float) -> float | None:
    """Relative saving of cp over baseline, in percent."""
    if not baseline:
        return None
    return 100.0 * (baseline - cp) / baseline


def linear_fit(xs, ys) -> dict | None:
    """Least-squares line with the residual ratio RMS(residual) / mean(y).

    Returns None when there are fewer than two distinct x values.
    """
    if len(set(xs)) < 2:
        return None
    slope, intercept = statistics.linear_regression(xs, ys)
    residuals = [y - (slope * x + intercept) for x, y in zip(xs, ys)]
    rms = math.sqrt(sum(r * r for r in residuals) / len(residuals))
    mean = statistics.fmean(ys)
    return {
        "slope": slope,
        "intercept": intercept,
        "residual_ratio": rms / mean if mean else 0.0,
    }


def build_report(records: list[BenchRecord]) -> dict:
    cells = {(r.label, r.condition_count): r for r in records}
    counts = sorted({r.condition_count for r in records})
    labels = [lab for lab in ROW_ORDER if any(k[0] == lab for k in cells)]

    rows = [cells[(lab, n)] for n in counts for lab in labels if (lab, n) in cells]

    reductions = defaultdict(dict)  # (proof_type, n) -> metric -> percent
    for (lab, n), rec in cells.items():
        if lab.startswith("cp-") and (rec.proof_type, n) in cells:
            base = cells[(rec.proof_type, n)]
            for m in METRICS:
                reductions[(rec.proof_type, n)][m] = reduction(getattr(base, m), getattr(rec, m))

    trends = {}
    for lab in labels:
        series = sorted((r for (l, _), r in cells.items() if l == lab), key=lambda r: r.condition_count)
        xs = [r.condition_count for r in series]
        trends[lab] = {m: linear_fit(xs, [getattr(r, m) for r in series]) for m in METRICS}

    vk_effect = {}
    for t in PROOF_TYPES:
        pairs = [
            (cells[(t, n)].vk_size_bytes, cells[(f"cp-{t}", n)].vk_size_bytes)
            for n in counts
            if (t, n) in cells and (f"cp-{t}", n) in cells
        ]
        if pairs:
            vk_effect[t] = "no vk effect" if all(a == b for a, b in pairs) else "vk differs"
    return {
        "rows": rows,
        "labels": labels,
        "counts": counts,
        "reductions": dict(reductions),
        "trends": trends,
        "vk_effect": vk_effect,
    }


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)


def _table(header: list[str], body: list[list[str]]) -> list[str]:
    widths = [max(len(row[i]) for row in [header, *body]) for i in range(len(header))]
    line = lambda row: "  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(row, widths)))
    return [line(header), line(["-" * w for w in widths]), *map(line, body)]


def format_report(report: dict) -> str:
    out = []
    short = ["constraint_count", "witness_time_s", "setup_time_s", "prove_time_s",
             "compiled_size_bytes", "pk_size_bytes", "vk_size_bytes", "verify_cost_units"]
    for n in report["counts"]:
        rows = [r for r in report["rows"] if r.condition_count == n]
        out.append(f"== {n} condition{'s' if n != 1 else ''} ==")
        out += _table(["scheme", *short], [[r.label, *(_fmt(getattr(r, m)) for m in short)] for r in rows])
        reds = [(t, report["reductions"][(t, n)]) for t in PROOF_TYPES if (t, n) in report["reductions"]]
        if reds:
            out.append("")
            out += _table(
                ["cp reduction %", *short],
                [[t, *(_fmt(red[m]) for m in short)] for t, red in reds],
            )
        out.append("")
    fits = [
        (lab, m, fit)
        for lab, metrics in report["trends"].items()
        for m, fit in metrics.items()
        if fit is not None
    ]
    if fits:
        out.append("== linearity (least squares vs condition count) ==")
        out += _table(
            ["series", "metric", "slope", "intercept", "residual ratio"],
            [[lab, m, _fmt(f["slope"]), _fmt(f["intercept"]), _fmt(f["residual_ratio"])] for lab, m, f in fits],
        )
        out.append("")
    for t, flag in report["vk_effect"].items():
        out.append(f"vk size, {t} vs cp-{t}: {flag}")
    return "\n".join(out).rstrip() + "\n"


def cmd_report(csv_path) -> str:
    try:
        records = read_csv(csv_path)
    except (KeyError, ValueError) as exc:
        raise ValueError(f"malformed bench CSV: {exc}") from exc
    if not records:
        raise ValueError("bench CSV has no rows")
    return format_report(build_report(records))
