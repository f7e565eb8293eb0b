"""Region-level aggregation, ranking, and report rendering.

Results roll up per region: the arithmetic mean of unrounded performance
scores per device mode over ok audits, rounded to 2 decimals for display.
The overall row is the unweighted mean of the region means at 1 decimal,
so every region counts once regardless of how many sites it has. Reports
render as markdown (full layout: region table, chart data, manual
validation list, failure section), CSV (region table only), or JSON
(lossless round trip of the aggregates).
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Iterable, Sequence

from .config import load_member_regions
from .corpus import AuditResult, normalize_region
from .errors import ParseError, UnknownFormat
from .scoring import round_half_away

# Device mode kinds feeding the two report columns. The recording modes
# are called mobile and desktop; reports label the desktop column "Web".
MOBILE_KIND = "mobile"
WEB_KIND = "desktop"

REPORT_COLUMNS = ("No", "Daerah", "Rata-rata Skor Mobile", "Rata-rata Skor Web", "Tanggal Uji")
TOTAL_ROW_LABEL = "Rata-rata total"

RANK_MODES = ("mobile", "web", "combined-mean")


@dataclass(frozen=True)
class RegionAggregate:
    """One report row: a region's mean scores and audit counts.

    mean_* carry the displayed 2-decimal rounding; raw_mean_* keep full
    precision for chart data. A mode with no ok audits has None means.
    """

    region: str
    mean_mobile: float | None
    mean_web: float | None
    raw_mean_mobile: float | None
    raw_mean_web: float | None
    n_ok_mobile: int
    n_ok_web: int
    n_failed: int
    test_date: date | None


def aggregate_regions(
    results: Sequence[AuditResult], member_regions: Sequence[str] | None = None
) -> list[RegionAggregate]:
    """Group results per region, in member-list row order.

    Regions absent from the member list sort after it, alphabetically.
    Failed audits count toward n_failed and nothing else.
    """
    if member_regions is None:
        member_regions = load_member_regions()

    order = {normalize_region(name): i for i, name in enumerate(member_regions)}
    display = {normalize_region(name): name for name in member_regions}
    groups: dict[str, list[AuditResult]] = {}
    for result in results:
        key = normalize_region(result.site.region)
        groups.setdefault(key, []).append(result)
        display.setdefault(key, result.site.region)

    keys = sorted(groups, key=lambda k: (order.get(k, len(order)), display[k]))

    aggregates = []
    for key in keys:
        group = groups[key]
        raw_mobile = _mean_score(group, MOBILE_KIND)
        raw_web = _mean_score(group, WEB_KIND)
        aggregates.append(
            RegionAggregate(
                region=display[key],
                mean_mobile=None if raw_mobile is None else round_half_away(raw_mobile, 2),
                mean_web=None if raw_web is None else round_half_away(raw_web, 2),
                raw_mean_mobile=raw_mobile,
                raw_mean_web=raw_web,
                n_ok_mobile=sum(1 for r in group if r.mode == MOBILE_KIND and r.status == "ok"),
                n_ok_web=sum(1 for r in group if r.mode == WEB_KIND and r.status == "ok"),
                n_failed=sum(1 for r in group if r.status == "failed"),
                test_date=max(r.test_date for r in group),
            )
        )
    return aggregates


def _mean_score(group: Sequence[AuditResult], kind: str) -> float | None:
    scores = [r.report.performance_score for r in group if r.mode == kind and r.status == "ok"]
    if not scores:
        return None
    return math.fsum(scores) / len(scores)


def overall_average(aggregates: Sequence[RegionAggregate]) -> dict[str, float | None]:
    """Unweighted mean of the displayed region means, at 1 decimal."""
    out: dict[str, float | None] = {}
    for column, field in (("mobile", "mean_mobile"), ("web", "mean_web")):
        means = [getattr(a, field) for a in aggregates if getattr(a, field) is not None]
        out[column] = round_half_away(math.fsum(means) / len(means), 1) if means else None
    return out


def rank_regions(aggregates: Sequence[RegionAggregate], mode: str) -> list[RegionAggregate]:
    """Order regions best-first by the chosen mean; ties alphabetical.

    Regions lacking a mean for the chosen mode rank last.
    """
    if mode not in RANK_MODES:
        raise ValueError(f"mode must be one of {', '.join(RANK_MODES)}, got {mode!r}")

    def value(aggregate: RegionAggregate) -> float | None:
        if mode == "mobile":
            return aggregate.mean_mobile
        if mode == "web":
            return aggregate.mean_web
        present = [v for v in (aggregate.mean_mobile, aggregate.mean_web) if v is not None]
        return math.fsum(present) / len(present) if present else None

    return sorted(
        aggregates,
        key=lambda a: (value(a) is None, -(value(a) or 0.0), a.region),
    )


def emit_report(
    aggregates: Sequence[RegionAggregate],
    results: Sequence[AuditResult],
    format: str,
    *,
    decimal_comma: bool = False,
) -> str:
    """Render the report in the chosen format; raises UnknownFormat."""
    if format == "csv":
        return _emit_csv(aggregates)
    if format == "md":
        return _emit_md(aggregates, results, decimal_comma)
    if format == "json":
        return _emit_json(aggregates, results)
    raise UnknownFormat(f"format must be csv, md or json, got {format!r}")


def _fmt(value: float | None, decimals: int, missing: str, comma: bool = False) -> str:
    if value is None:
        return missing
    text = f"{value:.{decimals}f}" if decimals >= 0 else repr(value)
    return text.replace(".", ",") if comma else text


def _emit_csv(aggregates: Sequence[RegionAggregate]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(REPORT_COLUMNS)
    for number, aggregate in enumerate(aggregates, start=1):
        writer.writerow(
            [
                number,
                aggregate.region,
                _fmt(aggregate.mean_mobile, 2, ""),
                _fmt(aggregate.mean_web, 2, ""),
                aggregate.test_date.isoformat() if aggregate.test_date else "",
            ]
        )
    return buffer.getvalue()


def parse_report_csv(text: str) -> list[dict]:
    """Parse a CSV report back into its row values.

    Returns dicts with region, mean_mobile, mean_web, test_date; the
    inverse of the projection _emit_csv applies to the aggregates.
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = tuple(next(reader))
    except StopIteration:
        raise ParseError("empty report") from None
    if header != REPORT_COLUMNS:
        raise ParseError(f"unexpected header {header!r}")
    rows = []
    for row in reader:
        if not row:
            continue
        rows.append(
            {
                "region": row[1],
                "mean_mobile": float(row[2]) if row[2] else None,
                "mean_web": float(row[3]) if row[3] else None,
                "test_date": date.fromisoformat(row[4]) if row[4] else None,
            }
        )
    return rows


def _emit_md(aggregates: Sequence[RegionAggregate], results: Sequence[AuditResult], comma: bool) -> str:
    lines = ["# Laporan Audit Performa Web", ""]

    lines += ["## Hasil per Daerah", ""]
    lines.append("| " + " | ".join(REPORT_COLUMNS) + " |")
    lines.append("| ---: | --- | ---: | ---: | --- |")
    for number, aggregate in enumerate(aggregates, start=1):
        lines.append(
            "| {} | {} | {} | {} | {} |".format(
                number,
                aggregate.region,
                _fmt(aggregate.mean_mobile, 2, "-", comma),
                _fmt(aggregate.mean_web, 2, "-", comma),
                aggregate.test_date.isoformat() if aggregate.test_date else "-",
            )
        )
    if aggregates:
        overall = overall_average(aggregates)
        lines.append(
            "|  | {} | {} | {} |  |".format(
                TOTAL_ROW_LABEL,
                _fmt(overall["mobile"], 1, "-", comma),
                _fmt(overall["web"], 1, "-", comma),
            )
        )
    lines.append("")

    lines += [
        "## Data Grafik",
        "",
        "Rata-rata per daerah sebelum pembulatan, untuk diagram batang",
        "berkelompok (mobile vs web).",
        "",
        "| Daerah | Mobile | Web |",
        "| --- | ---: | ---: |",
    ]
    for aggregate in aggregates:
        lines.append(
            "| {} | {} | {} |".format(
                aggregate.region,
                _fmt(aggregate.raw_mean_mobile, -1, "-", comma),
                _fmt(aggregate.raw_mean_web, -1, "-", comma),
            )
        )
    lines.append("")

    lines += ["## Validasi Manual", "", "Hasil dengan skor mendekati batas 0 atau 100:", ""]
    outliers = [r for r in results if r.status == "ok" and r.outlier_flag]
    if outliers:
        for result in outliers:
            lines.append(
                "- {} ({}) skor {}: {}".format(
                    result.site.region,
                    result.mode,
                    _fmt(result.report.performance_score, 2, "-", comma),
                    result.site.url,
                )
            )
    else:
        lines.append("Tidak ada.")
    lines.append("")

    failures = [r for r in results if r.status == "failed"]
    lines += ["## Kegagalan", ""]
    lines.append(f"Audit gagal: {len(failures)} dari {len(results)}.")
    lines.append("")
    per_region = [(a.region, a.n_failed) for a in aggregates if a.n_failed]
    if per_region:
        lines += ["| Daerah | Gagal |", "| --- | ---: |"]
        lines += [f"| {region} | {count} |" for region, count in per_region]
        lines.append("")
    if failures:
        for result in failures:
            lines.append(f"- {result.site.url} ({result.mode}): {result.failure_reason}")
    else:
        lines.append("Tidak ada.")
    lines.append("")

    return "\n".join(lines)


def aggregate_to_dict(aggregate: RegionAggregate) -> dict:
    return {
        "region": aggregate.region,
        "mean_mobile": aggregate.mean_mobile,
        "mean_web": aggregate.mean_web,
        "raw_mean_mobile": aggregate.raw_mean_mobile,
        "raw_mean_web": aggregate.raw_mean_web,
        "n_ok_mobile": aggregate.n_ok_mobile,
        "n_ok_web": aggregate.n_ok_web,
        "n_failed": aggregate.n_failed,
        "test_date": aggregate.test_date.isoformat() if aggregate.test_date else None,
    }


def aggregate_from_dict(data: dict) -> RegionAggregate:
    return RegionAggregate(
        region=data["region"],
        mean_mobile=data["mean_mobile"],
        mean_web=data["mean_web"],
        raw_mean_mobile=data["raw_mean_mobile"],
        raw_mean_web=data["raw_mean_web"],
        n_ok_mobile=int(data["n_ok_mobile"]),
        n_ok_web=int(data["n_ok_web"]),
        n_failed=int(data["n_failed"]),
        test_date=date.fromisoformat(data["test_date"]) if data["test_date"] else None,
    )


def _emit_json(aggregates: Sequence[RegionAggregate], results: Sequence[AuditResult]) -> str:
    document = {
        "aggregates": [aggregate_to_dict(a) for a in aggregates],
        "overall_average": overall_average(aggregates) if aggregates else {"mobile": None, "web": None},
        "outliers": [
            {
                "region": r.site.region,
                "url": r.site.url,
                "mode": r.mode,
                "performance_score": r.report.performance_score,
            }
            for r in results
            if r.status == "ok" and r.outlier_flag
        ],
        "failures": {
            "total": sum(1 for r in results if r.status == "failed"),
            "items": [
                {"region": r.site.region, "url": r.site.url, "mode": r.mode, "reason": r.failure_reason}
                for r in results
                if r.status == "failed"
            ],
        },
    }
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def aggregates_from_report_json(text: str) -> list[RegionAggregate]:
    try:
        document = json.loads(text)
        return [aggregate_from_dict(item) for item in document["aggregates"]]
    except (json.JSONDecodeError, KeyError, TypeError) as exc:
        raise ParseError(f"not a JSON report: {exc}") from exc


def write_aggregates(aggregates: Sequence[RegionAggregate], path: str | Path) -> None:
    """Write the aggregates file the report step consumes."""
    document = {
        "aggregates": [aggregate_to_dict(a) for a in aggregates],
        "overall_average": overall_average(aggregates) if aggregates else {"mobile": None, "web": None},
    }
    Path(path).write_text(json.dumps(document, indent=2, sort_keys=True) + "\n", "utf-8")


def read_aggregates(path: str | Path) -> list[RegionAggregate]:
    return aggregates_from_report_json(Path(path).read_text("utf-8"))
