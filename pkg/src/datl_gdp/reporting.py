"""JSON reports and derived CSV views for transfer runs, sweeps and missing-GDP estimates.

JSON is authoritative; every CSV can be re-rendered from it.  Floats are
written at full round-trip precision.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import __version__
from .metrics import improvement_pct  # noqa: F401  (re-exported for report consumers)
from .transfer import (
    EvalReport,
    MissingEstimateReport,
    RunFailure,
    SweepTable,
    format_fraction,
    fraction_label,
    report_from_dict,
)


@dataclass(frozen=True)
class RunManifest:
    tool_version: str
    config: dict
    seed: int
    input_digests: dict
    timestamp: Optional[str] = None
    notes: dict = field(default_factory=dict)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def make_manifest(config, seed, inputs=(), timestamp=None, notes=None):
    digests = {str(p): file_digest(p) for p in inputs}
    return RunManifest(__version__, config, seed, digests, timestamp, dict(notes or {}))


def _num(v):
    return "" if v is None else repr(float(v))


def _write_csv(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    return path


def _write_json(path, doc):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, allow_nan=False) + "\n", encoding="utf-8")
    return path


def _pair_names(reports):
    """Plot-CSV file name per report; a fraction suffix only when names would collide."""
    base = [f"{r.config.source_code}-to-{r.config.target_code}-{r.config.regressor.name}" for r in reports]
    dup = {b for b in base if base.count(b) > 1}
    out = []
    for b, r in zip(base, reports):
        if b in dup:
            f = r.config.td_fraction
            b = f"{b}-td{f.numerator}_{f.denominator}"
        out.append(b + ".csv")
    return out


def eval_document(reports, manifest=None):
    return {
        "kind": "eval",
        "manifest": manifest.to_dict() if manifest else None,
        "reports": [r.to_dict() | {"kind": r.kind} for r in reports],
    }


def write_eval_csvs(reports, out_dir):
    out_dir = Path(out_dir)
    ok = [r for r in reports if isinstance(r, EvalReport)]
    paths = [_write_csv(out_dir / "summary.csv",
                        ["source", "target", "regressor", "td_fraction", "rmse", "r2", "rrmse"],
                        [[r.config.source_code, r.config.target_code, r.config.regressor.name,
                          format_fraction(r.config.td_fraction), _num(r.rmse), _num(r.r2), _num(r.rrmse)]
                         for r in ok])]
    for name, r in zip(_pair_names(ok), ok):
        paths.append(_write_csv(out_dir / "pairs" / name, ["year", "actual", "predicted"],
                                [[y, _num(a), _num(p)] for y, a, p in r.per_year]))
    return paths


def write_eval_reports(reports, path, manifest=None):
    """report.json + summary.csv + pairs/<SRC>-to-<TGT>-<regressor>.csv under ``path``."""
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to write")
    out_dir = Path(path)
    paths = [_write_json(out_dir / "report.json", eval_document(reports, manifest))]
    return paths + write_eval_csvs(reports, out_dir)


def read_eval_reports(path):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    manifest = RunManifest.from_dict(doc["manifest"]) if doc.get("manifest") else None
    return [report_from_dict(r) for r in doc["reports"]], manifest


def write_td_sweep_csvs(table: SweepTable, out_dir):
    out_dir = Path(out_dir)
    labels = [fraction_label(f) for f in table.fractions]
    paths = [_write_csv(out_dir / "td_sweep.csv", ["regressor"] + labels,
                        [[name] + [_num(table.mean_rmse[name][f]) for f in table.fractions]
                         for name in table.regressors])]
    if table.improvements:
        paths.append(_write_csv(
            out_dir / "td_improvement.csv", ["regressor"] + [f"No_TD→{lab}" for lab in labels],
            [[name] + [_num(table.improvements[name][f]) for f in table.fractions] for name in table.regressors],
        ))
    return paths


def write_td_sweep(table: SweepTable, path, manifest=None):
    """td_sweep.csv (regressors x fractions), td_improvement.csv, sweep.json and per-run files."""
    if not table.regressors or not table.fractions:
        raise ValueError("empty sweep table")
    out_dir = Path(path)
    doc = {"kind": "sweep", "manifest": manifest.to_dict() if manifest else None, "table": table.to_dict()}
    paths = [_write_json(out_dir / "sweep.json", doc)]
    paths += write_td_sweep_csvs(table, out_dir)
    if table.reports:
        paths += write_eval_csvs(table.reports, out_dir)
    return paths


def read_td_sweep(path):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    manifest = RunManifest.from_dict(doc["manifest"]) if doc.get("manifest") else None
    return SweepTable.from_dict(doc["table"]), manifest


def write_missing_csvs(r: MissingEstimateReport, out_dir):
    out_dir = Path(out_dir)
    cand_rows = []
    for i, c in enumerate(r.candidates):
        cand_rows.append([c.regressor, c.source, _num(c.rmse), _num(c.r2), _num(c.rrmse),
                          "yes" if i == r.selected else "", c.error or ""])
    return [
        _write_csv(out_dir / "candidates.csv",
                   ["regressor", "source", "rmse", "r2", "rrmse", "selected", "error"], cand_rows),
        _write_csv(out_dir / "estimates.csv", ["year", "predicted_gdp"],
                   [[y, _num(v)] for y, v in r.estimates]),
        _write_csv(out_dir / "windows.csv", ["country", "start_year", "end_year"],
                   [[r.country, a, b] for a, b in r.missing_windows]),
    ]


def write_missing_report(r: MissingEstimateReport, path):
    """report.json, candidates.csv (model-selection table), estimates.csv and windows.csv."""
    if r.selected is not None and not 0 <= r.selected < len(r.candidates):
        raise ValueError("selected candidate index out of range")
    out_dir = Path(path)
    paths = [_write_json(out_dir / "report.json", {"kind": "missing", "report": r.to_dict()})]
    return paths + write_missing_csvs(r, out_dir)


def read_missing_report(path):
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return MissingEstimateReport.from_dict(doc["report"])


def rerender(json_path):
    """Regenerate the CSV views next to an existing JSON report."""
    json_path = Path(json_path)
    doc = json.loads(json_path.read_text(encoding="utf-8"))
    out_dir = json_path.parent
    kind = doc.get("kind")
    if kind == "eval":
        reports, _ = read_eval_reports(json_path)
        return write_eval_csvs(reports, out_dir)
    if kind == "sweep":
        table, _ = read_td_sweep(json_path)
        return write_td_sweep_csvs(table, out_dir) + (write_eval_csvs(table.reports, out_dir)
                                                       if table.reports else [])
    if kind == "missing":
        return write_missing_csvs(MissingEstimateReport.from_dict(doc["report"]), out_dir)
    raise ValueError(f"{json_path}: unknown report kind {kind!r}")


__all__ = [
    "EvalReport", "Fraction", "MissingEstimateReport", "RunFailure", "RunManifest", "SweepTable",
    "file_digest", "make_manifest", "read_eval_reports", "read_missing_report", "read_td_sweep",
    "rerender", "write_eval_reports", "write_missing_report", "write_td_sweep",
]
