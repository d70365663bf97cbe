import math

import pytest
from hypothesis import given, strategies as st

from edgealloc.sysmodel import (CostParams, PreconditionError, ServerKind, ServerSpec,
                                cost_local, cost_offload, effective_rate, uplink_rate, utility)

from conftest import make_task


def test_effective_rate_gpu_special(gpu, params):
    assert effective_rate(gpu, make_task(special=True), params, 100.0) == pytest.approx(20.0)


def test_effective_rate_cpu_identity(cpu, params):
    assert effective_rate(cpu, make_task(special=False), params, 9.0) == 9.0
    assert effective_rate(cpu, make_task(special=True), params, 9.0) == 9.0


def test_effective_rate_gpu_common_infeasible(gpu, params):
    assert effective_rate(gpu, make_task(special=False), params, 50.0) is None


@pytest.mark.parametrize("share", [0.5, 100.5])
def test_effective_rate_share_out_of_range(gpu, params, share):
    with pytest.raises(PreconditionError):
        effective_rate(gpu, make_task(), params, share)


def test_uplink_rate_examples(params):
    t = make_task(rate=1e6, snr=10.0)
    assert uplink_rate(t, 1, 0.1, params) == pytest.approx(1.0e6)
    assert uplink_rate(t, 0, 0.1, params) == 0.0
    assert uplink_rate(t, 50, 0.1, params) == pytest.approx(5.0e7)


@pytest.mark.parametrize("power", [0.001, 1.5])
def test_uplink_rate_power_bounds(params, power):
    with pytest.raises(PreconditionError):
        uplink_rate(make_task(), 1, power, params)


def test_cost_local_examples():
    p = CostParams(local_capacity=1.0, kappa=1e-27)
    c = cost_local(make_task(cycles=1.0), p)
    assert (c.tx_time, c.tet, c.feasible) == (0.0, pytest.approx(1.0), True)
    assert c.energy == pytest.approx(1.0)
    assert cost_local(make_task(cycles=2.0), p).tet == pytest.approx(2.0)
    c2 = cost_local(make_task(cycles=1.0), CostParams(local_capacity=2.0, kappa=1e-27))
    assert c2.tet == pytest.approx(0.5)
    assert c2.energy == pytest.approx(4.0)


def test_cost_offload_worked_example(gpu, params):
    # 420 KB = 3.36e6 bits over 50 units at 1 Mbps/unit with log2(1 + 10*0.1) = 1
    c = cost_offload(make_task(data_bytes=420_000, special=True), gpu, 100.0, 50, 0.1, params)
    assert c.tx_time == pytest.approx(0.0672)
    assert c.exec_time == pytest.approx(0.05)
    assert c.tet == pytest.approx(0.1172)
    assert c.energy == pytest.approx(0.00672)
    assert c.feasible


def test_cost_offload_zero_data(cpu, params):
    for units, power in [(1, 0.01), (7, 1.0)]:
        assert cost_offload(make_task(data_bytes=0), cpu, 9.0, units, power, params).tx_time == 0.0


def test_cost_offload_common_on_gpu(gpu, params):
    assert not cost_offload(make_task(special=False), gpu, 100.0, 5, 0.5, params).feasible


def test_cost_offload_zero_units_is_infeasible(cpu, params):
    c = cost_offload(make_task(), cpu, 9.0, 0, 0.5, params)
    assert not c.feasible


def test_utility_examples():
    t = make_task(alpha=0.8, beta=0.2)
    c = cost_local(make_task(cycles=1.0), CostParams())
    assert utility([t], [c]) == pytest.approx(1.0)
    assert utility([], []) == 0.0
    assert utility([t, t], [c, c]) == 2 * utility([t], [c])


def test_utility_errors(gpu, params):
    t = make_task(id=7, special=False)
    with pytest.raises(ValueError, match="2 tasks but 1"):
        utility([t, t], [cost_local(t, params)])
    with pytest.raises(ValueError, match="task 7"):
        utility([t], [cost_offload(t, gpu, 100.0, 1, 0.5, params)])


def test_taskspec_invariants():
    with pytest.raises(ValueError):
        make_task(cycles=0.0)
    with pytest.raises(ValueError):
        make_task(alpha=0.0, beta=0.0)
    with pytest.raises(ValueError):
        make_task(sensitivity=0.0)
    with pytest.raises(ValueError):
        ServerSpec(0, ServerKind.CPU, 1.0, 2.0)


units_st = st.integers(1, 60)
power_st = st.floats(0.01, 1.0)
share_st = st.floats(1.0, 100.0)


@given(units_st, power_st, share_st)
def test_tet_non_increasing(units, power, share):
    p = CostParams()
    gpu = ServerSpec(0, ServerKind.GPU, 100.0, 1.0)
    t = make_task(rate=1.5e6)
    base = cost_offload(t, gpu, share, units, power, p).tet
    assert cost_offload(t, gpu, share, units + 1, power, p).tet <= base
    assert cost_offload(t, gpu, min(share * 1.1, 100.0), units, power, p).tet <= base
    assert cost_offload(t, gpu, share, units, min(power * 1.1, 1.0), p).tet <= base


@given(units_st, st.floats(0.01, 0.9))
def test_energy_strictly_increasing_in_power(units, power):
    p = CostParams()
    cpu = ServerSpec(0, ServerKind.CPU, 9.0, 0.1)
    t = make_task()
    lo = cost_offload(t, cpu, 9.0, units, power, p).energy
    hi = cost_offload(t, cpu, 9.0, units, power * 1.05 + 1e-6, p).energy
    assert hi > lo


@given(st.lists(st.floats(0.1, 3.0), min_size=0, max_size=6),
       st.lists(st.floats(0.1, 3.0), min_size=0, max_size=6))
def test_utility_additive(cyc_a, cyc_b):
    p = CostParams()
    A = [make_task(id=i, cycles=c) for i, c in enumerate(cyc_a)]
    B = [make_task(id=100 + i, cycles=c) for i, c in enumerate(cyc_b)]
    ca = [cost_local(t, p) for t in A]
    cb = [cost_local(t, p) for t in B]
    assert math.isclose(utility(A + B, ca + cb), utility(A, ca) + utility(B, cb), rel_tol=1e-12)


@given(st.lists(st.floats(0.1, 3.0), min_size=1, max_size=6), st.floats(0.1, 2.0))
def test_utility_scales_with_alpha(cycles, alpha):
    p = CostParams()
    T1 = [make_task(id=i, cycles=c, alpha=alpha, beta=0.0) for i, c in enumerate(cycles)]
    T2 = [make_task(id=i, cycles=c, alpha=2 * alpha, beta=0.0) for i, c in enumerate(cycles)]
    costs = [cost_local(t, p) for t in T1]
    assert utility(T2, costs) == pytest.approx(2 * utility(T1, costs), rel=1e-14)


def test_cost_functions_pure(gpu, params):
    t = make_task()
    assert cost_offload(t, gpu, 37.0, 3, 0.37, params) == cost_offload(t, gpu, 37.0, 3, 0.37, params)
    assert cost_local(t, params) == cost_local(t, params)
