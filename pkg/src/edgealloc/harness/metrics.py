"""Per-run metrics and per-method aggregates (execution time, user energy, completion)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np

from ..sysmodel import CostBreakdown, TaskSpec


def completion_rate(tasks: Sequence[TaskSpec], costs: Sequence[CostBreakdown]) -> float:
    """Share of tasks whose execution time is within their deadline; 1.0 when empty."""
    if len(tasks) != len(costs):
        raise ValueError(f"{len(tasks)} tasks but {len(costs)} costs")
    if not tasks:
        return 1.0
    met = sum(1 for t, c in zip(tasks, costs) if c.tet <= t.deadline)
    return met / len(tasks)


@dataclass
class RunRecord:
    """One (seed, method) cell of the run matrix."""
    seed: int
    method: str
    solver: str
    objective: float
    completion_rate: float
    iterations: int
    task_ids: List[int]
    tet: List[float]
    energy: List[float]
    deadline: List[float]
    alpha: List[float]
    beta: List[float]
    placement: List[int]
    units: List[int]
    power: List[float]
    trace: List[float] = field(default_factory=list)

    @property
    def met_deadline(self) -> List[bool]:
        return [t <= d for t, d in zip(self.tet, self.deadline)]


def _stats(values: Sequence[float]) -> Dict[str, float]:
    if not values:
        return {"mean": 0.0, "min": 0.0, "max": 0.0, "p95": 0.0}
    a = np.asarray(values, dtype=float)
    return {"mean": float(a.mean()), "min": float(a.min()), "max": float(a.max()),
            "p95": float(np.percentile(a, 95))}


def aggregate(records: Sequence[RunRecord], methods: Sequence[str]) -> Dict[str, dict]:
    out = {}
    for m in methods:
        rows = [r for r in records if r.method == m]
        if not rows:
            continue
        tet = [v for r in rows for v in r.tet]
        energy = [v for r in rows for v in r.energy]
        out[m] = {
            "runs": len(rows),
            "tet": _stats(tet),
            "energy": _stats(energy),
            "completion_rate": float(np.mean([r.completion_rate for r in rows])),
            "objective": float(np.mean([r.objective for r in rows])),
        }
    return out
