"""JSON (de)serialization for ProblemInstance and SolveResult."""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

from ..sysmodel import CostBreakdown, CostParams, ServerSpec, TaskSpec
from ..workload import DemandVector
from .model import Allocation, Method, ProblemInstance, SolveResult

FORMAT_VERSION = 1


def instance_to_dict(instance: ProblemInstance) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "tasks": [asdict(t) for t in instance.tasks],
        "servers": [dict(asdict(s), kind=s.kind.value) for s in instance.servers],
        "cost_params": asdict(instance.cost_params),
        "bandwidth_units_total": instance.bandwidth_units_total,
        "reservation": asdict(instance.reservation),
    }


def instance_from_dict(doc: dict) -> ProblemInstance:
    if doc.get("format_version", FORMAT_VERSION) != FORMAT_VERSION:
        raise ValueError(f"unsupported instance format_version {doc['format_version']!r}")
    return ProblemInstance(
        tasks=tuple(TaskSpec(**t) for t in doc["tasks"]),
        servers=tuple(ServerSpec(**s) for s in doc["servers"]),
        cost_params=CostParams(**doc.get("cost_params", {})),
        bandwidth_units_total=int(doc["bandwidth_units_total"]),
        reservation=DemandVector(**doc.get("reservation", {})),
    )


def result_to_dict(result: SolveResult) -> dict:
    a = result.allocation
    return {
        "format_version": FORMAT_VERSION,
        "method": result.method.value,
        "objective": result.objective,
        "iterations": result.iterations,
        "trace": list(result.trace),
        "allocation": {"placement": list(a.placement), "units": list(a.units),
                       "power": list(a.power)},
        "per_task_costs": [asdict(c) for c in result.per_task_costs],
    }


def result_from_dict(doc: dict) -> SolveResult:
    a = doc["allocation"]
    return SolveResult(
        allocation=Allocation(a["placement"], a["units"], a["power"]),
        objective=float(doc["objective"]),
        per_task_costs=[CostBreakdown(**c) for c in doc["per_task_costs"]],
        method=Method(doc["method"]),
        iterations=int(doc.get("iterations", 0)),
        trace=[float(v) for v in doc.get("trace", [])],
    )


def dump_instance(instance: ProblemInstance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_dict(instance), indent=2) + "\n", encoding="utf-8")


def load_instance(path) -> ProblemInstance:
    return instance_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
