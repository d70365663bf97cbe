"""Continuous and integer inner problems for a fixed placement: power, then bandwidth."""

from __future__ import annotations

import heapq
import math
from functools import lru_cache
from typing import Dict, List, Optional, Sequence

from ..sysmodel import CostParams, ServerSpec, TaskSpec, cost_offload, weighted_cost
from .model import LOCAL, Allocation, ProblemInstance, equal_share, placement_feasible, server_loads

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI2 = (3 - math.sqrt(5)) / 2


def golden_section(f, a: float, b: float, tol: float = 1e-6) -> float:
    """Minimizer of a unimodal ``f`` on [a, b], located to within ``tol``."""
    h = b - a
    if h <= tol:
        return (a + b) / 2
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(n - 1):
        if yc < yd:
            b, d, yd = d, c, yc
            h *= INV_PHI
            c = a + INV_PHI2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            h *= INV_PHI
            d = a + INV_PHI * h
            yd = f(d)
    return (a + d) / 2 if yc < yd else (c + b) / 2


@lru_cache(maxsize=65536)
def optimize_power(task: TaskSpec, server: ServerSpec, share: float, units: int,
                   params: CostParams) -> float:
    """Transmit power minimizing the task's weighted delay-plus-energy cost.

    The cost is unimodal in power; the golden-section result is compared
    against both bounds so monotone cases land exactly on a bound.
    """
    if units < 1:
        raise ValueError(f"task {task.id}: need at least one bandwidth unit")
    if task.data_bytes == 0:
        return params.power_min

    def f(p):
        return weighted_cost(task, cost_offload(task, server, share, units, p, params))

    lo, hi = params.power_min, params.power_max
    best = golden_section(f, lo, hi, tol=1e-6)
    best_val = f(best)
    for p in (lo, hi):
        v = f(p)
        if v < best_val:
            best, best_val = p, v
    return best


def allocate_bandwidth(instance: ProblemInstance, offloaded: Sequence[int],
                       servers: Sequence[ServerSpec], shares: Sequence[float],
                       powers: Sequence[float], budget: int) -> Dict[int, int]:
    """Greedy marginal allocation of integer bandwidth units.

    ``offloaded`` are task indices; ``servers``, ``shares`` and ``powers`` are
    aligned with it. Each task gets one unit, then every further unit goes to
    the task whose cost drops the most (ties: lowest task id). Costs are convex
    and decreasing in units, so this is optimal.
    """
    if budget < len(offloaded):
        raise ValueError(f"{budget} bandwidth units cannot cover {len(offloaded)} offloaded tasks")
    params = instance.cost_params
    units = {i: 1 for i in offloaded}
    if not offloaded:
        return units
    ctx = {i: (instance.tasks[i], s, sh, p) for i, s, sh, p in zip(offloaded, servers, shares, powers)}

    def cost(i, b):
        task, s, sh, p = ctx[i]
        return weighted_cost(task, cost_offload(task, s, sh, b, p, params))

    current = {i: cost(i, 1) for i in offloaded}
    heap = []
    for i in offloaded:
        nxt = cost(i, 2)
        heapq.heappush(heap, (-(current[i] - nxt), instance.tasks[i].id, i, nxt))
    for _ in range(budget - len(offloaded)):
        neg_gain, _, i, nxt = heapq.heappop(heap)
        if -neg_gain <= 0:
            break
        units[i] += 1
        current[i] = nxt
        after = cost(i, units[i] + 1)
        heapq.heappush(heap, (-(nxt - after), instance.tasks[i].id, i, after))
    return units


def solve_placement(instance: ProblemInstance, placement: Sequence[int]) -> Optional[Allocation]:
    """Optimal powers and bandwidth for a fixed placement; None if it is infeasible.

    Powers are chosen first at one unit, bandwidth second, then powers are
    re-optimized once at the final unit counts.
    """
    if not placement_feasible(instance, placement):
        return None
    servers = instance.available_servers
    params = instance.cost_params
    loads = server_loads(placement, len(servers))
    offloaded = [i for i, p in enumerate(placement) if p != LOCAL]
    srv = [servers[placement[i]] for i in offloaded]
    shares = [equal_share(s, loads[placement[i]]) for i, s in zip(offloaded, srv)]
    for i, s, sh in zip(offloaded, srv, shares):
        if not cost_offload(instance.tasks[i], s, sh, 1, params.power_max, params).feasible:
            return None
    powers = [optimize_power(instance.tasks[i], s, sh, 1, params)
              for i, s, sh in zip(offloaded, srv, shares)]
    units = allocate_bandwidth(instance, offloaded, srv, shares, powers, instance.available_bandwidth)
    powers = [optimize_power(instance.tasks[i], s, sh, units[i], params)
              for i, s, sh in zip(offloaded, srv, shares)]
    n = len(placement)
    u = [0] * n
    pw = [0.0] * n
    for k, i in enumerate(offloaded):
        u[i] = units[i]
        pw[i] = powers[k]
    return Allocation(tuple(placement), tuple(u), tuple(pw))
