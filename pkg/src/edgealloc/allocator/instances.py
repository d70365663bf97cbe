"""Seeded instance builders used by the CLI audits and the test-suite."""

from __future__ import annotations

import numpy as np

from ..sysmodel import CostParams, ServerKind, ServerSpec
from ..workload import DemandVector, ScenarioConfig, generate_tasks
from .model import ProblemInstance


def scenario_instance(cfg: ScenarioConfig, rng: np.random.Generator,
                      reservation: DemandVector = DemandVector(),
                      deadline_min: float = 0.2, deadline_max: float = 2.0) -> ProblemInstance:
    return ProblemInstance(
        tasks=tuple(generate_tasks(cfg, rng, deadline_min, deadline_max)),
        servers=tuple(cfg.servers()),
        cost_params=cfg.cost_params(),
        bandwidth_units_total=cfg.bandwidth_units_total,
        reservation=reservation,
    )


def random_small_instance(seed: int, max_tasks: int = 4, max_servers: int = 2,
                          max_units: int = 6) -> ProblemInstance:
    """Small random instance in the range where exhaustive search is cheap.

    Task attributes follow the default scenario distributions; server
    capacities are drawn small enough that slot limits and shared capacity
    make placements interact.
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_tasks + 1))
    m = int(rng.integers(1, max_servers + 1))
    budget = int(rng.integers(1, max_units + 1))
    cfg = ScenarioConfig(n_tasks=n, bandwidth_units_total=budget,
                         special_prob=float(rng.uniform(0.3, 1.0)))
    tasks = generate_tasks(cfg, rng)
    servers = []
    for j in range(m):
        if rng.random() < 0.5:
            cap = float(rng.uniform(1.0, 9.0))
            servers.append(ServerSpec(j, ServerKind.CPU, cap, float(rng.uniform(0.1, cap / 1.5))))
        else:
            cap = float(rng.uniform(5.0, 100.0))
            servers.append(ServerSpec(j, ServerKind.GPU, cap, float(rng.uniform(1.0, cap / 1.5))))
    local = float(rng.uniform(0.5, 2.0))
    params = CostParams(local_capacity=local)
    return ProblemInstance(tuple(tasks), tuple(servers), params, budget)
