import dataclasses
import itertools
import json

import numpy as np
import pytest

from edgealloc.allocator import (LOCAL, Allocation, AllocationError, Method, ProblemInstance,
                                 SizeError, SolverConfig, allocate_bandwidth, baseline_dld,
                                 baseline_gsa, baseline_mec, evaluate, golden_section,
                                 optimize_power, reserve_capacity, solve_exact, solve_heuristic,
                                 validate)
from edgealloc.allocator.instances import random_small_instance, scenario_instance
from edgealloc.allocator.io import (instance_from_dict, instance_to_dict, load_instance,
                                    dump_instance, result_from_dict, result_to_dict)
from edgealloc.allocator.model import equal_share
from edgealloc.allocator.oracle import brute_force
from edgealloc.sysmodel import (CostParams, ServerKind, ServerSpec, cost_local, cost_offload,
                                weighted_cost)
from edgealloc.workload import DemandVector, ScenarioConfig

from conftest import make_task


def cpu_pool(n=5, cap=9.0):
    return [ServerSpec(i, ServerKind.CPU, cap, 0.1) for i in range(n)]


# -- reservation ------------------------------------------------------------

def test_reserve_zero_demand_is_identity():
    servers = cpu_pool()
    r = reserve_capacity(servers, 50, DemandVector())
    assert r.servers == servers and r.bandwidth_total == 50 and not r.over_demand


def test_reserve_even_split_and_bandwidth():
    r = reserve_capacity(cpu_pool(), 50, DemandVector(5.0, 0.0, 10.0))
    assert [s.capacity for s in r.servers] == pytest.approx([8.0] * 5)
    assert r.bandwidth_total == 40


def test_reserve_floors_and_flags():
    servers = cpu_pool(2) + [ServerSpec(9, ServerKind.GPU, 100.0, 1.0)]
    r = reserve_capacity(servers, 50, DemandVector(100.0, 500.0, 80.0))
    assert [s.capacity for s in r.servers] == [0.1, 0.1, 1.0]
    assert r.bandwidth_total == 1 and r.over_demand
    assert [s.id for s in r.servers] == [0, 1, 9]


# -- evaluation -------------------------------------------------------------

def single_gpu_instance(**task_kw):
    task = make_task(**task_kw)
    return ProblemInstance((task,), (ServerSpec(0, ServerKind.GPU, 100.0, 1.0),), CostParams(), 50)


def test_evaluate_all_local():
    p = CostParams()
    tasks = tuple(make_task(id=i, cycles=c) for i, c in enumerate([0.5, 1.0, 1.5]))
    inst = ProblemInstance(tasks, tuple(cpu_pool()), p, 50)
    obj, costs = evaluate(inst, Allocation.all_local(3))
    expected = sum(t.alpha * t.cycles / p.local_capacity
                   + t.beta * p.kappa * t.cycles * 1e9 * (p.local_capacity * 1e9) ** 2 for t in tasks)
    assert obj == pytest.approx(expected, rel=1e-12)
    assert all(c.tx_time == 0 for c in costs)


def test_evaluate_empty():
    inst = ProblemInstance((), tuple(cpu_pool()), CostParams(), 50)
    assert evaluate(inst, Allocation((), (), ()))[0] == 0.0


def test_evaluate_single_offload_worked_example():
    inst = single_gpu_instance(data_bytes=420_000, special=True, rate=1e6)
    obj, _ = evaluate(inst, Allocation((0,), (50,), (0.1,)))
    assert obj == pytest.approx(0.8 * 0.1172 + 0.2 * 0.00672)
    assert obj == pytest.approx(0.095104)


@pytest.mark.parametrize("alloc,match", [
    (Allocation((0,), (0,), (0.5,)), "need >= 1"),
    (Allocation((0,), (51,), (0.5,)), "bandwidth budget"),
    (Allocation((0,), (5,), (2.0,)), "power"),
    (Allocation((LOCAL,), (3,), (0.0,)), "local task"),
    (Allocation((3,), (1,), (0.5,)), "not a server"),
])
def test_validate_names_constraint(alloc, match):
    with pytest.raises(AllocationError, match=match):
        evaluate(single_gpu_instance(), alloc)


def test_validate_gpu_common_and_slots():
    with pytest.raises(AllocationError, match="common task"):
        evaluate(single_gpu_instance(special=False), Allocation((0,), (1,), (0.5,)))
    tasks = tuple(make_task(id=i) for i in range(3))
    inst = ProblemInstance(tasks, (ServerSpec(0, ServerKind.CPU, 2.0, 1.0),), CostParams(), 10)
    with pytest.raises(AllocationError, match="slot limit"):
        validate(inst, Allocation((0, 0, 0), (1, 1, 1), (0.5,) * 3))


# -- inner problems ---------------------------------------------------------

def test_golden_section_quadratic():
    assert golden_section(lambda x: (x - 0.3) ** 2, 0.0, 1.0, 1e-8) == pytest.approx(0.3, abs=1e-8)


def test_optimize_power_monotone_cases(cpu, params):
    assert optimize_power(make_task(beta=0.0, alpha=1.0), cpu, 9.0, 3, params) == params.power_max
    assert optimize_power(make_task(alpha=0.0, beta=1.0), cpu, 9.0, 3, params) == params.power_min


@pytest.mark.parametrize("alpha,beta,snr", [(0.8, 0.2, 10.0), (0.2, 2.0, 10.0), (0.1, 3.0, 40.0)])
def test_optimize_power_matches_grid(cpu, params, alpha, beta, snr):
    task = make_task(alpha=alpha, beta=beta, snr=snr)
    grid = np.arange(params.power_min, params.power_max + 1e-12, 1e-4)
    vals = [weighted_cost(task, cost_offload(task, cpu, 9.0, 4, p, params)) for p in grid]
    assert optimize_power(task, cpu, 9.0, 4, params) == pytest.approx(grid[int(np.argmin(vals))], abs=1e-3)


def _bw_setup(n, seed):
    rng = np.random.default_rng(seed)
    tasks = tuple(make_task(id=i, data_bytes=float(rng.uniform(1e5, 8e5)), rate=float(rng.uniform(1e6, 2e6)),
                            alpha=float(rng.uniform(0.1, 1)), beta=float(rng.uniform(0.1, 1)))
                  for i in range(n))
    srv = [ServerSpec(0, ServerKind.CPU, 9.0, 0.1)] * n
    inst = ProblemInstance(tasks, (srv[0],), CostParams(), 100)
    powers = [float(rng.uniform(0.01, 1.0)) for _ in range(n)]
    return inst, srv, powers


def _bw_total(inst, srv, powers, units):
    return sum(weighted_cost(t, cost_offload(t, s, 9.0, b, p, inst.cost_params))
               for t, s, p, b in zip(inst.tasks, srv, powers, units))


def test_allocate_bandwidth_symmetric_split():
    t = make_task()
    inst = ProblemInstance((t, dataclasses.replace(t, id=1)), tuple(cpu_pool(1)), CostParams(), 10)
    s = inst.servers[0]
    units = allocate_bandwidth(inst, [0, 1], [s, s], [4.5, 4.5], [0.5, 0.5], 10)
    assert units == {0: 5, 1: 5}


def test_allocate_bandwidth_single_consumer():
    inst, srv, powers = _bw_setup(1, 0)
    assert allocate_bandwidth(inst, [0], srv, [9.0], powers, 17) == {0: 17}


@pytest.mark.parametrize("seed", range(10))
def test_allocate_bandwidth_matches_enumeration(seed):
    inst, srv, powers = _bw_setup(3, seed)
    got = allocate_bandwidth(inst, [0, 1, 2], srv, [9.0] * 3, powers, 6)
    best = min(_bw_total(inst, srv, powers, c)
               for c in itertools.product(range(1, 5), repeat=3) if sum(c) == 6)
    assert _bw_total(inst, srv, powers, [got[i] for i in range(3)]) == pytest.approx(best, rel=1e-12)


def test_allocate_bandwidth_budget_error():
    inst, srv, powers = _bw_setup(3, 0)
    with pytest.raises(ValueError):
        allocate_bandwidth(inst, [0, 1, 2], srv, [9.0] * 3, powers, 2)


# -- solvers ----------------------------------------------------------------

def test_exact_empty():
    inst = ProblemInstance((), tuple(cpu_pool(2)), CostParams(), 6)
    r = solve_exact(inst)
    assert r.objective == 0 and r.allocation.placement == ()


def test_exact_prefers_cheaper_offload():
    # offloading at 50 units: tet ~0.12 s vs 1 s local; energy ~0.01 J vs 1 J local
    inst = single_gpu_instance(special=True)
    local = cost_local(inst.tasks[0], inst.cost_params)
    off = cost_offload(inst.tasks[0], inst.servers[0], 100.0, 50, 1.0, inst.cost_params)
    assert off.tet < local.tet and off.energy < local.energy
    assert solve_exact(inst).allocation.placement == (0,)


def test_exact_size_limit():
    inst = scenario_instance(ScenarioConfig(), np.random.default_rng(0))
    with pytest.raises(SizeError, match="heuristic"):
        solve_exact(inst)


@pytest.mark.parametrize("seed", range(20))
def test_exact_never_worse_than_oracle_with_random_weights(seed):
    # interior power optima: the oracle's 1e-3 W grid can only be worse than the continuous optimum
    inst = random_small_instance(seed)
    rng = np.random.default_rng(500 + seed)
    tasks = tuple(dataclasses.replace(t, alpha=float(rng.uniform(0, 1)), beta=float(rng.uniform(0.05, 5)),
                                      snr_coeff=float(rng.uniform(1, 50))) for t in inst.tasks)
    inst = dataclasses.replace(inst, tasks=tasks)
    exact = solve_exact(inst).objective
    ref, _ = brute_force(inst)
    assert exact <= ref * (1 + 1e-12)
    assert (ref - exact) / ref < 1e-4


def test_heuristic_single_task_equals_exact():
    inst = random_small_instance(3, max_tasks=1)
    assert solve_heuristic(inst).objective == solve_exact(inst).objective


def test_heuristic_close_to_exact():
    within = 0
    for seed in range(100):
        inst = random_small_instance(seed)
        h, e = solve_heuristic(inst).objective, solve_exact(inst).objective
        assert h >= e
        within += h <= 1.1 * e
    assert within >= 95


def test_heuristic_trace_non_increasing():
    inst = scenario_instance(ScenarioConfig(n_tasks=8), np.random.default_rng(1),
                             DemandVector(20.0, 200.0, 20.0))
    r = solve_heuristic(inst)
    assert all(b <= a for a, b in zip(r.trace, r.trace[1:]))
    assert r.objective == r.trace[-1]


# -- baselines --------------------------------------------------------------

def test_dld_equal_sensitivity_keeps_id_order():
    tasks = tuple(make_task(id=i, sensitivity=0.5, special=False) for i in range(3))
    inst = ProblemInstance(tasks, (ServerSpec(0, ServerKind.CPU, 2.0, 1.0),), CostParams(), 10)
    # two slots: the first two ids in stable order get them
    assert baseline_dld(inst).allocation.placement == (0, 0, LOCAL)


def test_dld_sensitive_special_task_gets_gpu():
    servers = (ServerSpec(0, ServerKind.CPU, 9.0, 0.1), ServerSpec(1, ServerKind.GPU, 100.0, 100.0))
    tasks = (make_task(id=0, sensitivity=0.2, special=True), make_task(id=1, sensitivity=0.9, special=True))
    inst = ProblemInstance(tasks, servers, CostParams(), 50)
    # task 1 goes first: GPU gives 0.2 * 100 = 20 Gcyc/s > 9; the single GPU slot is then gone
    assert baseline_dld(inst).allocation.placement == (0, 1)


def test_dld_proportional_bandwidth():
    tasks = (make_task(id=0, data_bytes=100_000), make_task(id=1, data_bytes=300_000))
    inst = ProblemInstance(tasks, tuple(cpu_pool(2)), CostParams(), 10)
    a = baseline_dld(inst).allocation
    # one each, then 8 split 2:6 by data size
    assert a.units == (3, 7) and a.power == (1.0, 1.0)


def test_mec_offloads_when_transmit_energy_is_lower():
    inst = scenario_instance(ScenarioConfig(), np.random.default_rng(4))
    p = inst.cost_params
    per = inst.available_bandwidth / len(inst.tasks)
    for t in inst.tasks:
        tx_e = p.power_min * t.data_bits / (per * t.unit_bandwidth_rate * np.log2(1 + t.snr_coeff * p.power_min))
        assert tx_e < cost_local(t, p).energy
    r = baseline_mec(inst)
    assert LOCAL not in r.allocation.placement
    assert set(r.allocation.power) == {p.power_min}


def test_mec_free_local_compute_keeps_everything_local():
    inst = scenario_instance(ScenarioConfig(kappa=0.0), np.random.default_rng(4))
    assert set(baseline_mec(inst).allocation.placement) == {LOCAL}


def test_gsa_single_task_converges_fast():
    inst = single_gpu_instance(special=True)
    r = baseline_gsa(inst)
    assert r.iterations <= 2
    t, s = inst.tasks[0], inst.servers[0]
    assert r.allocation.units == (50,)
    assert r.allocation.power[0] == optimize_power(t, s, 100.0, 50, inst.cost_params)


def test_gsa_trace_non_increasing():
    inst = scenario_instance(ScenarioConfig(), np.random.default_rng(2), DemandVector(10, 100, 10))
    r = baseline_gsa(inst)
    assert all(b <= a for a, b in zip(r.trace, r.trace[1:]))


@pytest.mark.parametrize("seed", range(25))
def test_exact_dominates_every_method(seed):
    inst = random_small_instance(seed)
    e = solve_exact(inst).objective
    for r in (solve_heuristic(inst), baseline_dld(inst), baseline_mec(inst), baseline_gsa(inst)):
        assert e <= r.objective
        validate(inst, r.allocation)
        assert r.objective == pytest.approx(evaluate(inst, r.allocation)[0], abs=1e-9)


def test_solvers_deterministic():
    inst = scenario_instance(ScenarioConfig(n_tasks=6), np.random.default_rng(7), DemandVector(5, 50, 5))
    for fn in (solve_heuristic, baseline_dld, baseline_mec, baseline_gsa):
        a, b = fn(inst), fn(inst)
        assert a.allocation == b.allocation and a.objective == b.objective


def test_solvers_do_not_mutate_instance():
    inst = random_small_instance(8)
    before = instance_to_dict(inst)
    solve_exact(inst)
    solve_heuristic(inst)
    assert instance_to_dict(inst) == before


# -- serialization ----------------------------------------------------------

def test_instance_json_round_trip(tmp_path):
    inst = scenario_instance(ScenarioConfig(n_tasks=4), np.random.default_rng(0), DemandVector(1, 2, 3))
    dump_instance(inst, tmp_path / "inst.json")
    back = load_instance(tmp_path / "inst.json")
    assert back == inst
    assert json.loads((tmp_path / "inst.json").read_text())["format_version"] == 1


def test_result_json_round_trip():
    inst = random_small_instance(1)
    r = solve_exact(inst)
    back = result_from_dict(json.loads(json.dumps(result_to_dict(r))))
    assert back.allocation == r.allocation and back.objective == r.objective
    assert back.method is Method.EXACT and back.per_task_costs == r.per_task_costs
