"""Brute-force reference for the joint placement/bandwidth/power problem.

Deliberately shares no code with the solvers: cost formulas, shares, slot
limits and reservation are recomputed here with numpy over every placement,
every integer bandwidth split and a fixed power grid.
"""

from __future__ import annotations

import itertools
import math
from typing import Iterator, Tuple

import numpy as np

POWER_STEP = 1e-3


def _compositions(total: int, parts: int) -> Iterator[Tuple[int, ...]]:
    """All tuples of ``parts`` integers >= 1 whose sum is at most ``total``."""
    if parts == 0:
        yield ()
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def _reserved(instance):
    servers = []
    d = instance.reservation
    for kind, need in (("CPU", d.cpu_demand), ("GPU", d.gpu_demand)):
        group = [s for s in instance.servers if s.kind.value == kind]
        for s in group:
            servers.append((s.id, kind, max(s.capacity - need / len(group), s.min_alloc), s.min_alloc))
    pos = {s.id: i for i, s in enumerate(instance.servers)}
    servers.sort(key=lambda s: pos[s[0]])
    budget = max(instance.bandwidth_units_total - int(round(d.bandwidth_demand)), 1)
    return servers, budget


def brute_force(instance, power_step: float = POWER_STEP) -> Tuple[float, tuple]:
    """Minimum objective and the placement that attains it."""
    cp = instance.cost_params
    tasks = instance.tasks
    servers, budget = _reserved(instance)
    n_grid = int(round((cp.power_max - cp.power_min) / power_step)) + 1
    grid = np.linspace(cp.power_min, cp.power_max, n_grid)

    local = [t.alpha * t.cycles / cp.local_capacity
             + t.beta * cp.kappa * t.cycles * 1e9 * (cp.local_capacity * 1e9) ** 2 for t in tasks]

    # best transmission-dependent cost for task i with b units, minimized over the grid
    tx_best = {}
    for i, t in enumerate(tasks):
        for b in range(1, budget + 1):
            bits = 8.0 * t.data_bytes
            tx = bits / (b * t.unit_bandwidth_rate * np.log2(1.0 + t.snr_coeff * grid))
            tx_best[i, b] = float(np.min(t.alpha * tx + t.beta * grid * tx))

    best, best_place = math.inf, None
    m = len(servers)
    for place in itertools.product(range(-1, m), repeat=len(tasks)):
        counts = [place.count(j) for j in range(m)]
        if any(c > math.floor(cap / mn + 1e-9) for c, (_, _, cap, mn) in zip(counts, servers)):
            continue
        fixed = 0.0
        off = []
        ok = True
        for i, (t, j) in enumerate(zip(tasks, place)):
            if j == -1:
                fixed += local[i]
                continue
            _, kind, cap, mn = servers[j]
            share = max(cap / counts[j], mn)
            if kind == "GPU":
                if not t.special:
                    ok = False
                    break
                rate = cp.gpu_special_efficiency * share
            else:
                rate = share
            fixed += t.alpha * t.cycles / rate
            off.append(i)
        if not ok or len(off) > budget:
            continue
        for comp in _compositions(budget, len(off)):
            total = fixed + sum(tx_best[i, b] for i, b in zip(off, comp))
            if total < best:
                best, best_place = total, place
    return best, best_place


def relative_gap(solver_obj: float, oracle_obj: float) -> float:
    return abs(solver_obj - oracle_obj) / max(abs(oracle_obj), 1e-300)
