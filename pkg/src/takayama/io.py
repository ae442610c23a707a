"""CSV ingestion of survey microdata and report emission.

One fixed CSV dialect: comma-separated, UTF-8, mandatory header row,
'.' decimal separator.  Reports serialize deterministically to text
(indices as percentages, two decimals), JSON (full precision), or tidy CSV
(one row per group / replicate).
"""
from __future__ import annotations

import csv
import io as _io
import json
from dataclasses import dataclass, fields
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import DataFormatError
from .quadrature import QuadratureSettings
from .samples import IncomeSample, PovertyConfig

TEXT = "text"
JSON = "json"
CSV = "csv"
_FORMATS = (TEXT, JSON, CSV)


@dataclass(frozen=True)
class RunConfig:
    """Command-level configuration, merged from flags and a JSON config file."""
    poverty_line: Optional[float] = None
    confidence_level: float = 0.95
    strict_comparison: bool = False
    income_column: str = "income"
    group_column: Optional[str] = None
    adult_equiv_column: Optional[str] = None
    quad_tol: float = 1e-8
    seed: int = 0
    sample_size: int = 2000
    replicates: int = 1000
    threads: int = 1

    def __post_init__(self):
        if self.poverty_line is not None and self.poverty_line <= 0:
            raise DataFormatError(f"poverty line must be positive, got {self.poverty_line}")
        if not 0.0 < self.confidence_level < 1.0:
            raise DataFormatError(
                f"confidence level must lie in (0, 1), got {self.confidence_level}")
        if self.quad_tol <= 0:
            raise DataFormatError(f"quadrature tolerance must be positive, got {self.quad_tol}")
        if self.threads < 1 or self.sample_size < 1 or self.replicates < 1:
            raise DataFormatError("threads, sample size, and replicates must be >= 1")

    def poverty(self) -> PovertyConfig:
        if self.poverty_line is None:
            raise DataFormatError("a poverty line is required")
        return PovertyConfig(self.poverty_line, self.confidence_level,
                             self.strict_comparison)

    def quadrature(self) -> QuadratureSettings:
        return QuadratureSettings(abs_tol=self.quad_tol)

    @classmethod
    def merged(cls, file_values: Mapping, flag_values: Mapping) -> "RunConfig":
        """Config-file values overridden by explicitly set flags."""
        known = {f.name for f in fields(cls)}
        unknown = set(file_values) - known
        if unknown:
            raise DataFormatError(f"unknown config keys: {sorted(unknown)}")
        merged = dict(file_values)
        merged.update({k: v for k, v in flag_values.items() if v is not None})
        return cls(**merged)


def ingest_csv(path: str, config: RunConfig) -> IncomeSample:
    """Read survey rows into an IncomeSample.

    The income column is required.  Adult-equivalence divisors are applied
    when the (configurable) column is present; group labels are attached
    when config.group_column is set.  Errors carry the offending column
    name or 1-based data-row number.
    """
    try:
        handle = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise DataFormatError(f"cannot open {path}: {exc}") from exc
    with handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise DataFormatError(f"{path}: empty file")
        header = list(reader.fieldnames)

        if config.income_column not in header:
            raise DataFormatError(f"missing column: {config.income_column}")
        if config.group_column is not None and config.group_column not in header:
            raise DataFormatError(f"missing column: {config.group_column}")
        equiv_column = config.adult_equiv_column
        if equiv_column is not None and equiv_column not in header:
            raise DataFormatError(f"missing column: {equiv_column}")
        if equiv_column is None and "adult_equiv" in header:
            equiv_column = "adult_equiv"

        incomes, labels, divisors = [], [], []
        for row_number, row in enumerate(reader, start=1):
            raw = (row.get(config.income_column) or "").strip()
            try:
                income = float(raw)
            except ValueError:
                raise DataFormatError(f"row {row_number}: income not numeric") from None
            if not np.isfinite(income) or income < 0:
                raise DataFormatError(f"row {row_number}: income must be a non-negative number")
            incomes.append(income)
            if config.group_column is not None:
                label = (row.get(config.group_column) or "").strip()
                if not label:
                    raise DataFormatError(f"row {row_number}: empty group label")
                labels.append(label)
            if equiv_column is not None:
                raw_div = (row.get(equiv_column) or "").strip()
                try:
                    divisor = float(raw_div)
                except ValueError:
                    raise DataFormatError(
                        f"row {row_number}: {equiv_column} not numeric") from None
                if not np.isfinite(divisor) or divisor <= 0:
                    raise DataFormatError(f"row {row_number}: {equiv_column} must be positive")
                divisors.append(divisor)

    if not incomes:
        raise DataFormatError(f"{path}: no data rows")
    return IncomeSample(
        np.asarray(incomes, dtype=float),
        group_labels=np.asarray(labels, dtype=object) if labels else None,
        equivalence_divisors=np.asarray(divisors, dtype=float) if divisors else None)


# ---------------------------------------------------------------------------
# report emission


def _pct(value: float) -> str:
    return f"{100.0 * value:.2f}"


def _text_index(report: Mapping) -> str:
    lines = [
        "Takayama index report",
        f"observations: {report['sample_size']}",
        f"poverty line: {report['poverty_line']:g}",
        f"index (%): {_pct(report['index'])}",
        f"variance components: sigma1^2={report['sigma1_sq']:.6g} "
        f"sigma2^2={report['sigma2_sq']:.6g} sigma12={report['sigma12']:.6g}",
        f"total variance: {report['variance']:.6g}",
        f"{int(round(report['level'] * 100))}% CI: "
        f"[{report['ci_lower']:.6g}, {report['ci_upper']:.6g}]",
    ]
    return "\n".join(lines) + "\n"


def _text_decomposition(report: Mapping) -> str:
    width = max(len("group"), *(len(g["label"]) for g in report["groups"]))
    lines = [
        "Takayama decomposition report",
        f"poverty line: {report['poverty_line']:g}",
        f"{'group'.ljust(width)}  index(%)  size",
        f"{'global'.ljust(width)}  {_pct(report['global_index']).rjust(8)}  {report['sample_size']}",
    ]
    for g in report["groups"]:
        lines.append(f"{g['label'].ljust(width)}  {_pct(g['index']).rjust(8)}  {g['size']}")
    lines += [
        f"weighted local sum: {report['weighted_local_sum']:.4f}",
        f"gap: {report['gap']:.4f}",
        f"gap variance (theta1^2 + theta2^2): {report['gap_variance']:.6g}",
        f"{int(round(report['level'] * 100))}% gap CI: "
        f"[{report['gap_ci_lower']:.4f}, {report['gap_ci_upper']:.4f}]",
        f"recomposed global: {report['global_index']:.4f} in "
        f"[{report['recomposed_lower']:.4f}, {report['recomposed_upper']:.4f}]",
    ]
    return "\n".join(lines) + "\n"


def _text_simulation(report: Mapping) -> str:
    lines = [
        "Simulation report",
        f"model: {report['model']}",
        f"target: {report['target']}",
        f"population truth: {report['truth']:.6g}",
        f"replicates: {report['replicates']}  sample size: {report['sample_size']}  "
        f"seed: {report['seed']}",
        f"mean statistic: {report['mean_statistic']:.6g}",
        f"variance of sqrt(n) deviations: {report['scaled_variance']:.6g}",
        f"mean plug-in variance: {report['mean_plugin_variance']:.6g}",
        f"coverage at {int(round(report['level'] * 100))}%: {report['coverage']:.4f}",
        f"KS statistic: {report['ks_statistic']:.4f} "
        f"(critical {report['ks_critical']:.4f}, "
        f"{'pass' if report['ks_pass'] else 'fail'})",
        f"degenerate replicates: {report['degenerate_count']}",
    ]
    return "\n".join(lines) + "\n"


def _csv_rows(report: Mapping) -> list[dict]:
    kind = report["kind"]
    if kind == "index":
        keys = ("sample_size", "poverty_line", "index", "sigma1_sq", "sigma2_sq",
                "sigma12", "variance", "level", "ci_lower", "ci_upper")
        return [{k: report[k] for k in keys}]
    if kind == "decomposition":
        rows = []
        for g in report["groups"]:
            rows.append({"label": g["label"], "size": g["size"],
                         "weight": g["weight"], "index": g["index"]})
        rows.append({"label": "__global__", "size": report["sample_size"],
                     "weight": 1.0, "index": report["global_index"]})
        return rows
    if kind == "simulation":
        return [{"replicate": i, "value": v, "variance": s, "ci_hit": int(h),
                 "degenerate": int(d)}
                for i, (v, s, h, d) in enumerate(zip(
                    report["values"], report["variances"],
                    report["ci_hits"], report["degenerate"]))]
    raise DataFormatError(f"unknown report kind {kind!r}")


def emit_report(report: Mapping, format: str = TEXT) -> bytes:
    """Serialize a report mapping; deterministic for a given input."""
    if format not in _FORMATS:
        raise DataFormatError(f"unknown format {format!r}; expected one of {_FORMATS}")
    if format == JSON:
        return (json.dumps(report, sort_keys=True, indent=2) + "\n").encode("utf-8")
    if format == CSV:
        rows = _csv_rows(report)
        buffer = _io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=list(rows[0].keys()), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buffer.getvalue().encode("utf-8")
    kind = report["kind"]
    if kind == "index":
        return _text_index(report).encode("utf-8")
    if kind == "decomposition":
        return _text_decomposition(report).encode("utf-8")
    if kind == "simulation":
        return _text_simulation(report).encode("utf-8")
    raise DataFormatError(f"unknown report kind {kind!r}")


def load_report(path: str) -> dict:
    """Read back a JSON report written by emit_report."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            report = json.load(handle)
    except OSError as exc:
        raise DataFormatError(f"cannot open {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(report, dict) or "kind" not in report:
        raise DataFormatError(f"{path}: not a report file (missing 'kind')")
    return report
