"""Simplified reference baselines: delay-demand-level (DLD), minimum user energy
(MEC) and Gauss-Seidel power/bandwidth sweeps (GSA).

These follow one-sentence behavioural descriptions of the compared methods;
they are reference reimplementations, not the original authors' algorithms.
"""

from __future__ import annotations

from typing import Dict, Sequence

from ..sysmodel import (ServerKind, ServerSpec, TaskSpec, cost_local, cost_offload,
                        effective_rate, spectral_efficiency, weighted_cost)
from .inner import allocate_bandwidth, optimize_power
from .model import (LOCAL, Allocation, Method, ProblemInstance, SolveResult, SolverConfig,
                    equal_share, evaluate, make_result, server_loads)


def _can_host(task: TaskSpec, server: ServerSpec, load: int) -> bool:
    if server.kind is ServerKind.GPU and not task.special:
        return False
    return load + 1 <= server.slots


def _rate_if_added(instance, task, server, load) -> float:
    return effective_rate(server, task, instance.cost_params, equal_share(server, load + 1))


def _equal_split(offloaded: Sequence[int], budget: int) -> Dict[int, int]:
    if not offloaded:
        return {}
    base, extra = divmod(budget, len(offloaded))
    return {i: base + (1 if k < extra else 0) for k, i in enumerate(sorted(offloaded))}


def _proportional_split(instance, offloaded: Sequence[int], budget: int) -> Dict[int, int]:
    """One unit each, the rest in proportion to data size; leftover to the largest task."""
    if not offloaded:
        return {}
    units = {i: 1 for i in offloaded}
    rest = budget - len(offloaded)
    data = {i: instance.tasks[i].data_bytes for i in offloaded}
    total = sum(data.values())
    if total > 0:
        for i in offloaded:
            units[i] += int(rest * data[i] // total)
    largest = min(offloaded, key=lambda i: (-data[i], instance.tasks[i].id))
    units[largest] += budget - sum(units.values())
    return units


def _build(n, placement, units, powers) -> Allocation:
    return Allocation(tuple(placement),
                      tuple(units.get(i, 0) for i in range(n)),
                      tuple(powers.get(i, 0.0) for i in range(n)))


def baseline_dld(instance: ProblemInstance) -> SolveResult:
    """Most delay-sensitive tasks first, each to the server with the lowest
    execution time given current load; full power; data-proportional bandwidth."""
    tasks, servers = instance.tasks, instance.available_servers
    n, budget = len(tasks), instance.available_bandwidth
    params = instance.cost_params
    order = sorted(range(n), key=lambda i: -tasks[i].sensitivity)
    placement = [LOCAL] * n
    loads = [0] * len(servers)
    n_off = 0
    for i in order:
        if n_off >= budget:
            break
        best_j, best_t = LOCAL, None
        for j, s in enumerate(servers):
            if not _can_host(tasks[i], s, loads[j]):
                continue
            t = tasks[i].cycles / _rate_if_added(instance, tasks[i], s, loads[j])
            if best_t is None or t < best_t:
                best_j, best_t = j, t
        if best_j != LOCAL:
            placement[i] = best_j
            loads[best_j] += 1
            n_off += 1
    offloaded = [i for i in range(n) if placement[i] != LOCAL]
    units = _proportional_split(instance, offloaded, budget)
    powers = {i: params.power_max for i in offloaded}
    return make_result(instance, _build(n, placement, units, powers), Method.DLD)


def baseline_mec(instance: ProblemInstance) -> SolveResult:
    """Per-task energy minimization at minimum power, assuming an equal
    bandwidth split at decision time; re-evaluated with the actual split."""
    tasks, servers = instance.tasks, instance.available_servers
    n, budget = len(tasks), instance.available_bandwidth
    params = instance.cost_params
    placement = [LOCAL] * n
    loads = [0] * len(servers)
    assumed_units = budget / n if n else 0.0
    p = params.power_min
    n_off = 0
    for i, task in enumerate(tasks):
        local_e = cost_local(task, params).energy
        offload_e = p * task.data_bits / (assumed_units * task.unit_bandwidth_rate
                                          * spectral_efficiency(task, p))
        if not offload_e < local_e or n_off >= budget:
            continue
        hosts = [j for j, s in enumerate(servers) if _can_host(task, s, loads[j])]
        if not hosts:
            continue
        j = min(hosts, key=lambda j: (loads[j], j))
        placement[i] = j
        loads[j] += 1
        n_off += 1
    offloaded = [i for i in range(n) if placement[i] != LOCAL]
    units = _equal_split(offloaded, budget)
    powers = {i: p for i in offloaded}
    return make_result(instance, _build(n, placement, units, powers), Method.MEC)


def baseline_gsa(instance: ProblemInstance, cfg: SolverConfig = SolverConfig()) -> SolveResult:
    """Offload each task to its fastest server (given load so far), then alternate
    per-task power updates and a bandwidth update until the objective settles."""
    tasks, servers = instance.tasks, instance.available_servers
    n, budget = len(tasks), instance.available_bandwidth
    params = instance.cost_params
    placement = [LOCAL] * n
    loads = [0] * len(servers)
    n_off = 0
    for i, task in enumerate(tasks):
        if n_off >= budget:
            break
        best_j, best_r = LOCAL, None
        for j, s in enumerate(servers):
            if not _can_host(task, s, loads[j]):
                continue
            r = _rate_if_added(instance, task, s, loads[j])
            if best_r is None or r > best_r:
                best_j, best_r = j, r
        if best_j != LOCAL:
            placement[i] = best_j
            loads[best_j] += 1
            n_off += 1
    offloaded = [i for i in range(n) if placement[i] != LOCAL]
    final_loads = server_loads(placement, len(servers))
    srv = {i: servers[placement[i]] for i in offloaded}
    share = {i: equal_share(srv[i], final_loads[placement[i]]) for i in offloaded}
    units = _equal_split(offloaded, budget)
    powers = {i: params.power_max for i in offloaded}

    def objective():
        return evaluate(instance, _build(n, placement, units, powers))[0]

    def own_cost(i, b, p):
        return weighted_cost(tasks[i], cost_offload(tasks[i], srv[i], share[i], b, p, params))

    obj = objective()
    trace = [obj]
    sweeps = 0
    while sweeps < cfg.max_sweeps:
        sweeps += 1
        for i in offloaded:
            cand = optimize_power(tasks[i], srv[i], share[i], units[i], params)
            if own_cost(i, units[i], cand) <= own_cost(i, units[i], powers[i]):
                powers[i] = cand
        # the greedy split is optimal for fixed powers; keep the old one on float ties
        new_units = allocate_bandwidth(instance, offloaded, [srv[i] for i in offloaded],
                                       [share[i] for i in offloaded],
                                       [powers[i] for i in offloaded], budget)
        old_units = units
        units = new_units
        new_obj = objective()
        if new_obj > trace[-1]:
            units = old_units
            new_obj = objective()
        trace.append(new_obj)
        if trace[-2] - new_obj < cfg.tol:
            break
    return make_result(instance, _build(n, placement, units, powers), Method.GSA,
                       iterations=sweeps, trace=trace)
