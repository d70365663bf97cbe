"""Physical cost model: transmission, execution, energy and the weighted utility.

Units follow the rest of the package: compute in gigacycles and gigacycles/s,
data in bytes (1 KB = 1000 bytes, 8 bits per byte), power in watts.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

BITS_PER_BYTE = 8
GIGA = 1e9


class PreconditionError(ValueError):
    """Raised when a cost function is called outside its domain."""


class ServerKind(str, enum.Enum):
    CPU = "CPU"
    GPU = "GPU"


@dataclass(frozen=True)
class TaskSpec:
    id: int
    data_bytes: float
    cycles: float  # gigacycles
    special: bool
    sensitivity: float
    deadline: float  # seconds
    alpha: float
    beta: float
    unit_bandwidth_rate: float  # bits/s per bandwidth unit
    snr_coeff: float  # 1/W

    def __post_init__(self):
        if not self.cycles > 0:
            raise ValueError(f"task {self.id}: cycles must be > 0, got {self.cycles}")
        if self.data_bytes < 0:
            raise ValueError(f"task {self.id}: data_bytes must be >= 0")
        if not 0 < self.sensitivity <= 1:
            raise ValueError(f"task {self.id}: sensitivity must be in (0, 1]")
        if not self.deadline > 0:
            raise ValueError(f"task {self.id}: deadline must be > 0")
        if self.alpha < 0 or self.beta < 0 or not self.alpha + self.beta > 0:
            raise ValueError(f"task {self.id}: need alpha, beta >= 0 and alpha + beta > 0")
        if not self.unit_bandwidth_rate > 0 or not self.snr_coeff > 0:
            raise ValueError(f"task {self.id}: unit_bandwidth_rate and snr_coeff must be > 0")

    @property
    def data_bits(self) -> float:
        return BITS_PER_BYTE * self.data_bytes


@dataclass(frozen=True)
class ServerSpec:
    id: int
    kind: ServerKind
    capacity: float  # Gcycles/s
    min_alloc: float  # Gcycles/s

    def __post_init__(self):
        object.__setattr__(self, "kind", ServerKind(self.kind))
        if not self.capacity > 0 or not self.min_alloc > 0:
            raise ValueError(f"server {self.id}: capacity and min_alloc must be > 0")
        if self.min_alloc > self.capacity:
            raise ValueError(f"server {self.id}: min_alloc exceeds capacity")

    @property
    def slots(self) -> int:
        """How many tasks the server can host at its minimum allocation."""
        # tolerance absorbs float noise in capacities left over by reservation
        return int(math.floor(self.capacity / self.min_alloc + 1e-9))


@dataclass(frozen=True)
class CostParams:
    local_capacity: float = 1.0  # Gcycles/s
    kappa: float = 1e-27  # J*s^2/cycle^3
    gpu_special_efficiency: float = 0.2
    power_min: float = 0.01
    power_max: float = 1.0

    def __post_init__(self):
        if not self.local_capacity > 0:
            raise ValueError("local_capacity must be > 0")
        if self.kappa < 0:
            raise ValueError("kappa must be >= 0")
        if not 0 < self.gpu_special_efficiency <= 1:
            raise ValueError("gpu_special_efficiency must be in (0, 1]")
        if not 0 < self.power_min <= self.power_max:
            raise ValueError("need 0 < power_min <= power_max")


@dataclass(frozen=True)
class CostBreakdown:
    tx_time: float
    exec_time: float
    tet: float
    energy: float
    feasible: bool = True

    @classmethod
    def infeasible(cls) -> "CostBreakdown":
        return cls(math.inf, math.inf, math.inf, math.inf, feasible=False)


def effective_rate(server: ServerSpec, task: TaskSpec, params: CostParams,
                   share: float) -> Optional[float]:
    """Processing rate a task actually gets from ``share`` Gcycles/s of a server.

    Returns None when the task may not run on the server (common tasks on GPU).
    """
    if not server.min_alloc <= share <= server.capacity:
        raise PreconditionError(
            f"share {share} outside [{server.min_alloc}, {server.capacity}] on server {server.id}")
    if server.kind is ServerKind.CPU:
        return share
    if task.special:
        return params.gpu_special_efficiency * share
    return None


def _check_power(power: float, params: CostParams) -> None:
    if not params.power_min <= power <= params.power_max:
        raise PreconditionError(
            f"power {power} W outside [{params.power_min}, {params.power_max}]")


def spectral_efficiency(task: TaskSpec, power: float) -> float:
    return math.log2(1.0 + task.snr_coeff * power)


def uplink_rate(task: TaskSpec, units: int, power: float, params: CostParams) -> float:
    """Uplink rate in bits/s for ``units`` bandwidth units at transmit ``power``."""
    if units < 0:
        raise PreconditionError(f"negative bandwidth units {units}")
    _check_power(power, params)
    if units == 0:
        return 0.0
    return units * task.unit_bandwidth_rate * spectral_efficiency(task, power)


def cost_local(task: TaskSpec, params: CostParams) -> CostBreakdown:
    exec_time = task.cycles / params.local_capacity
    energy = params.kappa * (task.cycles * GIGA) * (params.local_capacity * GIGA) ** 2
    return CostBreakdown(0.0, exec_time, exec_time, energy)


def cost_offload(task: TaskSpec, server: ServerSpec, share: float, units: int,
                 power: float, params: CostParams) -> CostBreakdown:
    rate = effective_rate(server, task, params, share)
    if rate is None:
        return CostBreakdown.infeasible()
    bits = task.data_bits
    if bits == 0:
        _check_power(power, params)
        tx_time = 0.0
    else:
        up = uplink_rate(task, units, power, params)
        if up == 0:
            return CostBreakdown.infeasible()
        tx_time = bits / up
    exec_time = task.cycles / rate
    return CostBreakdown(tx_time, exec_time, tx_time + exec_time, power * tx_time)


def weighted_cost(task: TaskSpec, cost: CostBreakdown) -> float:
    return task.alpha * cost.tet + task.beta * cost.energy


def utility(tasks: Sequence[TaskSpec], costs: Sequence[CostBreakdown]) -> float:
    """Weighted delay-plus-energy sum over tasks; lower is better."""
    if len(tasks) != len(costs):
        raise ValueError(f"{len(tasks)} tasks but {len(costs)} costs")
    total = 0.0
    for task, cost in zip(tasks, costs):
        if not cost.feasible:
            raise ValueError(f"task {task.id} has an infeasible cost")
        total += weighted_cost(task, cost)
    return total
