"""Synthetic scenario generation, moving-average features and forecaster datasets."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from .sysmodel import CostParams, ServerKind, ServerSpec, TaskSpec

TRACE_PERIOD = 24
N_FEATURES = 8
ALPHA_DEFAULT = 0.8
BETA_DEFAULT = 0.2


@dataclass(frozen=True)
class RawSample:
    t: int
    cpu_util: float
    gpu_util: float
    net_util: float
    arrivals: int


@dataclass(frozen=True)
class FeatureVector:
    values: Tuple[float, ...]
    t: int

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class DemandVector:
    cpu_demand: float = 0.0
    gpu_demand: float = 0.0
    bandwidth_demand: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (math.isfinite(v) and v >= 0):
                raise ValueError(f"{f.name} must be finite and >= 0, got {v}")

    def as_array(self) -> np.ndarray:
        return np.array([self.cpu_demand, self.gpu_demand, self.bandwidth_demand])


@dataclass(frozen=True)
class ScenarioConfig:
    n_tasks: int = 15
    special_prob: float = 0.7
    mean_data_bytes: float = 420_000.0
    mean_cycles: float = 1.0
    sensitivity_range: Tuple[float, float] = (0.1, 1.0)
    rate_range: Tuple[float, float] = (1e6, 2e6)
    bandwidth_units_total: int = 50
    seed: int = 0
    trace_length: int = 240
    window_k: int = 4
    trace_noise: float = 0.05
    snr_coeff: float = 10.0
    n_cpu: int = 5
    n_gpu: int = 5
    cpu_capacity: float = 9.0
    gpu_capacity: float = 100.0
    cpu_min_alloc: float = 0.1
    gpu_min_alloc: float = 1.0
    local_capacity: float = 1.0
    kappa: float = 1e-27
    gpu_special_efficiency: float = 0.2
    power_min: float = 0.01
    power_max: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "sensitivity_range", tuple(self.sensitivity_range))
        object.__setattr__(self, "rate_range", tuple(self.rate_range))
        if self.n_tasks < 0:
            raise ValueError("n_tasks must be >= 0")
        if not 0 <= self.special_prob <= 1:
            raise ValueError("special_prob must be in [0, 1]")
        for name in ("sensitivity_range", "rate_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name} must be ordered low <= high")
        if self.window_k < 1:
            raise ValueError("window_k must be >= 1")
        if self.bandwidth_units_total < 1:
            raise ValueError("bandwidth_units_total must be >= 1")
        if self.n_cpu < 0 or self.n_gpu < 0:
            raise ValueError("server counts must be >= 0")

    def servers(self) -> List[ServerSpec]:
        out = [ServerSpec(i, ServerKind.CPU, self.cpu_capacity, self.cpu_min_alloc)
               for i in range(self.n_cpu)]
        out += [ServerSpec(self.n_cpu + i, ServerKind.GPU, self.gpu_capacity, self.gpu_min_alloc)
                for i in range(self.n_gpu)]
        return out

    def cost_params(self) -> CostParams:
        return CostParams(self.local_capacity, self.kappa, self.gpu_special_efficiency,
                          self.power_min, self.power_max)

    @property
    def total_cpu_capacity(self) -> float:
        return self.n_cpu * self.cpu_capacity

    @property
    def total_gpu_capacity(self) -> float:
        return self.n_gpu * self.gpu_capacity


def deadline_for(sensitivity: float, deadline_min: float, deadline_max: float) -> float:
    """More latency-sensitive tasks get tighter deadlines."""
    return deadline_max - sensitivity * (deadline_max - deadline_min)


def generate_tasks(cfg: ScenarioConfig, rng: np.random.Generator,
                   deadline_min: float = 0.2, deadline_max: float = 2.0) -> List[TaskSpec]:
    n = cfg.n_tasks
    special = rng.random(n) < cfg.special_prob
    data = rng.uniform(0.5, 1.5, n) * cfg.mean_data_bytes
    cycles = rng.uniform(0.5, 1.5, n) * cfg.mean_cycles
    sens = rng.uniform(*cfg.sensitivity_range, n)
    rates = rng.uniform(*cfg.rate_range, n)
    tasks = []
    for i in range(n):
        tasks.append(TaskSpec(
            id=i,
            data_bytes=float(data[i]),
            cycles=float(cycles[i]),
            special=bool(special[i]),
            sensitivity=float(sens[i]),
            deadline=deadline_for(float(sens[i]), deadline_min, deadline_max),
            alpha=ALPHA_DEFAULT,
            beta=BETA_DEFAULT,
            unit_bandwidth_rate=float(rates[i]),
            snr_coeff=cfg.snr_coeff,
        ))
    return tasks


def generate_trace(cfg: ScenarioConfig, rng: np.random.Generator) -> List[RawSample]:
    """Daily-periodic utilization with Gaussian noise and Poisson arrivals."""
    n = cfg.trace_length
    if n < 1:
        raise ValueError("trace_length must be >= 1")
    t = np.arange(n)
    base = 0.5 + 0.3 * np.sin(2 * np.pi * t / TRACE_PERIOD)
    noise = rng.normal(0.0, cfg.trace_noise, size=(3, n)) if cfg.trace_noise > 0 else np.zeros((3, n))
    util = np.clip(base + noise, 0.0, 1.0)
    arrivals = rng.poisson(cfg.n_tasks / 4, size=n)
    return [RawSample(int(t[i]), float(util[0, i]), float(util[1, i]), float(util[2, i]),
                      int(arrivals[i])) for i in range(n)]


def moving_average(series: Sequence[float], k: int) -> float:
    if k < 1 or k > len(series):
        raise ValueError(f"window {k} invalid for series of length {len(series)}")
    last = len(series) - 1
    return sum(series[last - i] for i in range(k)) / k


def extract_features(trace: Sequence[RawSample], t: int, k: int) -> FeatureVector:
    if t < k - 1:
        raise ValueError(f"insufficient history: t={t} needs t >= {k - 1}")
    if t >= len(trace):
        raise IndexError(f"t={t} beyond trace of length {len(trace)}")
    window = trace[t - k + 1:t + 1]
    s = trace[t]
    values = (
        s.cpu_util, s.gpu_util, s.net_util, float(s.arrivals),
        moving_average([w.cpu_util for w in window], k),
        moving_average([w.gpu_util for w in window], k),
        moving_average([w.net_util for w in window], k),
        (s.t % TRACE_PERIOD) / (TRACE_PERIOD - 1),
    )
    return FeatureVector(values, t)


def demand_from_sample(sample: RawSample, cfg: ScenarioConfig) -> DemandVector:
    return DemandVector(sample.cpu_util * cfg.total_cpu_capacity,
                        sample.gpu_util * cfg.total_gpu_capacity,
                        sample.net_util * cfg.bandwidth_units_total)


def build_dataset(trace: Sequence[RawSample], k: int,
                  cfg: ScenarioConfig) -> List[Tuple[FeatureVector, DemandVector]]:
    """Pairs (features at t, demand at t+1) for every t with a full window."""
    if len(trace) < k + 1:
        raise ValueError(f"trace of length {len(trace)} too short for window {k}")
    return [(extract_features(trace, t, k), demand_from_sample(trace[t + 1], cfg))
            for t in range(k - 1, len(trace) - 1)]


TRACE_COLUMNS = ["t", "cpu_util", "gpu_util", "net_util", "arrivals"]
FEATURE_COLUMNS = ["cpu_util", "gpu_util", "net_util", "arrivals",
                   "ma_cpu", "ma_gpu", "ma_net", "time_of_cycle"]
DEMAND_COLUMNS = ["cpu_demand", "gpu_demand", "bandwidth_demand"]


def write_trace_csv(trace: Sequence[RawSample], path) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for s in trace:
            w.writerow([s.t, repr(s.cpu_util), repr(s.gpu_util), repr(s.net_util), s.arrivals])


def read_trace_csv(path) -> List[RawSample]:
    with open(Path(path), newline="", encoding="utf-8") as fh:
        return [RawSample(int(r["t"]), float(r["cpu_util"]), float(r["gpu_util"]),
                          float(r["net_util"]), int(r["arrivals"]))
                for r in csv.DictReader(fh)]


def write_dataset_csv(dataset: Sequence[Tuple[FeatureVector, DemandVector]], path) -> None:
    with open(Path(path), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + FEATURE_COLUMNS + DEMAND_COLUMNS)
        for x, y in dataset:
            w.writerow([x.t] + [repr(v) for v in x.values]
                       + [repr(v) for v in (y.cpu_demand, y.gpu_demand, y.bandwidth_demand)])
