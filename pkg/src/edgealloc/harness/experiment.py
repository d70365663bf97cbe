"""End-to-end experiment: trace -> forecast -> reservation -> every method -> metrics."""

from __future__ import annotations

import logging
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from ..allocator import Method, ProblemInstance, SolveResult, solve, validate
from ..allocator.instances import scenario_instance
from ..forecast import init_params, predict_demand, train
from ..workload import build_dataset, extract_features, generate_trace
from .config import OURS, ExperimentConfig, config_hash
from .metrics import RunRecord, aggregate, completion_rate

log = logging.getLogger(__name__)


@dataclass
class SeedOutcome:
    seed: int
    records: List[RunRecord] = field(default_factory=list)
    errors: List[dict] = field(default_factory=list)
    forecast: Optional[dict] = None


@dataclass
class MetricsReport:
    config_hash: str
    seeds: List[int]
    methods: List[str]
    records: List[RunRecord]
    aggregates: dict
    errors: List[dict]
    forecasts: List[dict]


def ours_solver(instance: ProblemInstance, exact_limit: int) -> Method:
    """Exact enumeration when it fits the size limit, the heuristic otherwise."""
    size = (len(instance.available_servers) + 1) ** len(instance.tasks)
    return Method.EXACT if size <= exact_limit else Method.HEURISTIC


def _streams(seed: int):
    trace_ss, task_ss, net_ss = np.random.SeedSequence(seed).spawn(3)
    return (np.random.default_rng(trace_ss), np.random.default_rng(task_ss),
            int(net_ss.generate_state(1)[0]))


def build_instance(cfg: ExperimentConfig, seed: int):
    """Run the forecasting stage for one seed; returns (instance, forecast summary)."""
    scn = cfg.scenario
    trace_rng, task_rng, net_seed = _streams(seed)
    trace = generate_trace(scn, trace_rng)
    dataset = build_dataset(trace, scn.window_k, scn)
    params = init_params(cfg.layer_sizes, net_seed)
    tcfg = replace(cfg.train, seed=int(np.random.SeedSequence([cfg.train.seed, seed]).generate_state(1)[0]))
    trained, history = train(params, dataset, tcfg)
    demand = predict_demand(trained, extract_features(trace, len(trace) - 1, scn.window_k))
    instance = scenario_instance(scn, task_rng, demand, cfg.deadline_min, cfg.deadline_max)
    summary = {
        "seed": seed,
        "final_train_mse": history[-1],
        "predicted_demand": [demand.cpu_demand, demand.gpu_demand, demand.bandwidth_demand],
        "available_bandwidth": instance.available_bandwidth,
        "over_demand": instance.over_demand,
    }
    return instance, summary


def _record(seed: int, label: str, instance: ProblemInstance, result: SolveResult) -> RunRecord:
    a = result.allocation
    tasks = instance.tasks
    return RunRecord(
        seed=seed, method=label, solver=result.method.value, objective=result.objective,
        completion_rate=completion_rate(tasks, result.per_task_costs),
        iterations=result.iterations,
        task_ids=[t.id for t in tasks],
        tet=[c.tet for c in result.per_task_costs],
        energy=[c.energy for c in result.per_task_costs],
        deadline=[t.deadline for t in tasks],
        alpha=[t.alpha for t in tasks], beta=[t.beta for t in tasks],
        placement=list(a.placement), units=list(a.units), power=list(a.power),
        trace=list(result.trace),
    )


def run_seed(cfg: ExperimentConfig, seed: int) -> SeedOutcome:
    out = SeedOutcome(seed)
    try:
        instance, out.forecast = build_instance(cfg, seed)
    except Exception as exc:  # any pipeline failure aborts this seed only
        out.errors.append({"seed": seed, "method": None, "stage": "forecast",
                           "error": f"{type(exc).__name__}: {exc}"})
        log.debug("seed %s failed:\n%s", seed, traceback.format_exc())
        return out
    for label in cfg.methods:
        method = ours_solver(instance, cfg.solver.exact_limit) if label == OURS else Method(label)
        try:
            result = solve(instance, method, cfg.solver)
            validate(instance, result.allocation)
        except Exception as exc:
            out.errors.append({"seed": seed, "method": label, "stage": "solve",
                               "error": f"{type(exc).__name__}: {exc}"})
            continue
        out.records.append(_record(seed, label, instance, result))
    return out


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> MetricsReport:
    """Run every configured method on every seed; output order never depends on ``jobs``."""
    seeds = list(cfg.seeds)
    if jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(run_seed, [cfg] * len(seeds), seeds))
    else:
        outcomes = [run_seed(cfg, s) for s in seeds]
    # outcomes follow the seed list and records within a seed follow cfg.methods
    records = [r for o in outcomes for r in o.records]
    errors = [e for o in outcomes for e in o.errors]
    forecasts = [o.forecast for o in outcomes if o.forecast is not None]
    return MetricsReport(config_hash(cfg), seeds, list(cfg.methods), records,
                         aggregate(records, cfg.methods), errors, forecasts)
