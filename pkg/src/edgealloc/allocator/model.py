"""Problem instances, allocations, reservation and the objective evaluator."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import List, NamedTuple, Optional, Sequence, Tuple

from ..sysmodel import (CostBreakdown, CostParams, ServerKind, ServerSpec, TaskSpec,
                        cost_local, cost_offload, utility)
from ..workload import DemandVector

LOCAL = -1


class AllocationError(ValueError):
    """An allocation breaks a constraint; the message names task and constraint."""


class SizeError(ValueError):
    """Instance too large for exhaustive enumeration."""


class Method(str, enum.Enum):
    EXACT = "Exact"
    HEURISTIC = "Heuristic"
    DLD = "DLD"
    MEC = "MEC"
    GSA = "GSA"


@dataclass(frozen=True)
class SolverConfig:
    exact_limit: int = 100_000
    tol: float = 1e-6
    max_sweeps: int = 50
    max_iters: int = 1000


class Reservation(NamedTuple):
    servers: List[ServerSpec]
    bandwidth_total: int
    over_demand: bool


def reserve_capacity(servers: Sequence[ServerSpec], bandwidth_total: int,
                     demand: DemandVector) -> Reservation:
    """Subtract forecast background demand from server capacities and bandwidth.

    Demand is spread evenly across servers of each kind; capacities are
    floored at the server's min_alloc and bandwidth at one unit.
    """
    over = False
    out = []
    for kind, need in ((ServerKind.CPU, demand.cpu_demand), (ServerKind.GPU, demand.gpu_demand)):
        group = [s for s in servers if s.kind is kind]
        if not group:
            over = over or need > 0
            continue
        per = need / len(group)
        for s in group:
            cap = s.capacity - per
            if cap < s.min_alloc:
                over = True
                cap = s.min_alloc
            out.append(replace(s, capacity=cap))
    order = {s.id: i for i, s in enumerate(servers)}
    out.sort(key=lambda s: order[s.id])
    bw = bandwidth_total - int(round(demand.bandwidth_demand))
    if bw < 1:
        over = True
        bw = 1
    return Reservation(out, bw, over)


@dataclass(frozen=True)
class ProblemInstance:
    tasks: Tuple[TaskSpec, ...]
    servers: Tuple[ServerSpec, ...]
    cost_params: CostParams = CostParams()
    bandwidth_units_total: int = 50
    reservation: DemandVector = DemandVector()

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        object.__setattr__(self, "servers", tuple(self.servers))
        ids = [t.id for t in self.tasks]
        if len(set(ids)) != len(ids):
            raise ValueError("task ids must be unique")
        if self.bandwidth_units_total < 0:
            raise ValueError("bandwidth_units_total must be >= 0")

    @cached_property
    def _reserved(self) -> Reservation:
        return reserve_capacity(self.servers, self.bandwidth_units_total, self.reservation)

    @property
    def available_servers(self) -> List[ServerSpec]:
        return self._reserved.servers

    @property
    def available_bandwidth(self) -> int:
        return self._reserved.bandwidth_total

    @property
    def over_demand(self) -> bool:
        return self._reserved.over_demand

    def subset(self, indices: Sequence[int]) -> "ProblemInstance":
        return replace(self, tasks=tuple(self.tasks[i] for i in indices))


@dataclass(frozen=True)
class Allocation:
    """Per-task placement (LOCAL or a server index), bandwidth units and power."""
    placement: Tuple[int, ...]
    units: Tuple[int, ...]
    power: Tuple[float, ...]

    def __post_init__(self):
        for name in ("placement", "units", "power"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        if not len(self.placement) == len(self.units) == len(self.power):
            raise ValueError("placement, units and power must have equal length")

    @classmethod
    def all_local(cls, n: int) -> "Allocation":
        return cls((LOCAL,) * n, (0,) * n, (0.0,) * n)


@dataclass
class SolveResult:
    allocation: Allocation
    objective: float
    per_task_costs: List[CostBreakdown]
    method: Method
    iterations: int = 0
    trace: List[float] = field(default_factory=list)


def server_loads(placement: Sequence[int], n_servers: int) -> List[int]:
    counts = Counter(p for p in placement if p != LOCAL)
    return [counts.get(j, 0) for j in range(n_servers)]


def equal_share(server: ServerSpec, hosted: int) -> float:
    """Each hosted task gets an equal split of capacity, never below min_alloc."""
    return max(server.capacity / hosted, server.min_alloc)


def placement_feasible(instance: ProblemInstance, placement: Sequence[int]) -> bool:
    """Slot limits, GPU eligibility and one bandwidth unit per offloaded task."""
    servers = instance.available_servers
    loads = server_loads(placement, len(servers))
    if any(n > s.slots for n, s in zip(loads, servers)):
        return False
    for task, p in zip(instance.tasks, placement):
        if p != LOCAL and servers[p].kind is ServerKind.GPU and not task.special:
            return False
    return sum(1 for p in placement if p != LOCAL) <= instance.available_bandwidth


def validate(instance: ProblemInstance, alloc: Allocation) -> None:
    """Raise AllocationError if ``alloc`` breaks any allocation invariant."""
    tasks = instance.tasks
    servers = instance.available_servers
    params = instance.cost_params
    if len(alloc.placement) != len(tasks):
        raise AllocationError(f"allocation covers {len(alloc.placement)} tasks, instance has {len(tasks)}")
    for task, p, u, pw in zip(tasks, alloc.placement, alloc.units, alloc.power):
        if p == LOCAL:
            if u != 0:
                raise AllocationError(f"task {task.id}: local task holds {u} bandwidth units")
            continue
        if not 0 <= p < len(servers):
            raise AllocationError(f"task {task.id}: placement {p} is not a server index")
        if u < 1:
            raise AllocationError(f"task {task.id}: offloaded with {u} bandwidth units (need >= 1)")
        if not params.power_min <= pw <= params.power_max:
            raise AllocationError(f"task {task.id}: power {pw} W outside "
                                  f"[{params.power_min}, {params.power_max}]")
        if servers[p].kind is ServerKind.GPU and not task.special:
            raise AllocationError(f"task {task.id}: common task placed on GPU server {servers[p].id}")
    total = sum(alloc.units)
    if total > instance.available_bandwidth:
        raise AllocationError(f"bandwidth budget exceeded: {total} > {instance.available_bandwidth}")
    for j, (n, s) in enumerate(zip(server_loads(alloc.placement, len(servers)), servers)):
        if n > s.slots:
            raise AllocationError(f"server {s.id}: hosts {n} tasks, slot limit {s.slots}")


def task_costs(instance: ProblemInstance, alloc: Allocation) -> List[CostBreakdown]:
    servers = instance.available_servers
    loads = server_loads(alloc.placement, len(servers))
    params = instance.cost_params
    out = []
    for task, p, u, pw in zip(instance.tasks, alloc.placement, alloc.units, alloc.power):
        if p == LOCAL:
            out.append(cost_local(task, params))
        else:
            s = servers[p]
            out.append(cost_offload(task, s, equal_share(s, loads[p]), u, pw, params))
    return out


def evaluate(instance: ProblemInstance, alloc: Allocation) -> Tuple[float, List[CostBreakdown]]:
    """Objective value and per-task costs; infeasible allocations raise."""
    validate(instance, alloc)
    costs = task_costs(instance, alloc)
    for task, c in zip(instance.tasks, costs):
        if not c.feasible:
            raise AllocationError(f"task {task.id}: placement is infeasible")
    return utility(instance.tasks, costs), costs


def make_result(instance: ProblemInstance, alloc: Allocation, method: Method,
                iterations: int = 0, trace: Optional[List[float]] = None) -> SolveResult:
    obj, costs = evaluate(instance, alloc)
    return SolveResult(alloc, obj, costs, method, iterations, list(trace or []))
