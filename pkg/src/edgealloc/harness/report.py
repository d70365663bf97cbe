"""Report emission: per_task.csv, summary.csv and report.json."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List

from .config import ExperimentConfig, config_to_dict
from .experiment import MetricsReport

FORMAT_VERSION = 1
PER_TASK_COLUMNS = ["seed", "method", "task_id", "tet_s", "energy_j", "deadline_s", "met_deadline"]
SUMMARY_COLUMNS = ["method", "mean_tet", "p95_tet", "mean_energy", "completion_rate", "mean_objective"]


def _fmt(v: float) -> str:
    return repr(float(v))


def report_to_dict(report: MetricsReport, cfg: ExperimentConfig,
                   timestamp: bool = False) -> Dict:
    config = config_to_dict(cfg)
    config.pop("output_dir")
    doc = {
        "format_version": FORMAT_VERSION,
        "config_hash": report.config_hash,
        "config": config,
        "seeds": report.seeds,
        "methods": report.methods,
        "aggregates": report.aggregates,
        "runs": [asdict(r) for r in report.records],
        "forecasts": report.forecasts,
        "errors": report.errors,
    }
    if timestamp:
        doc["generated_at"] = datetime.now(timezone.utc).isoformat()
    return doc


def emit_report(report: MetricsReport, cfg: ExperimentConfig, output_dir,
                timestamp: bool = False) -> List[Path]:
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    per_task = out / "per_task.csv"
    with open(per_task, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PER_TASK_COLUMNS)
        for r in report.records:
            for tid, tet, e, d, met in zip(r.task_ids, r.tet, r.energy, r.deadline, r.met_deadline):
                w.writerow([r.seed, r.method, tid, _fmt(tet), _fmt(e), _fmt(d), int(met)])
    summary = out / "summary.csv"
    with open(summary, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SUMMARY_COLUMNS)
        for m in report.methods:
            agg = report.aggregates.get(m)
            if agg is None:
                continue
            w.writerow([m, _fmt(agg["tet"]["mean"]), _fmt(agg["tet"]["p95"]),
                        _fmt(agg["energy"]["mean"]), _fmt(agg["completion_rate"]),
                        _fmt(agg["objective"])])
    rep = out / "report.json"
    rep.write_text(json.dumps(report_to_dict(report, cfg, timestamp), indent=1, sort_keys=True) + "\n",
                   encoding="utf-8")
    return [per_task, summary, rep]
