"""Exact enumeration and the greedy + local-search heuristic."""

from __future__ import annotations

import itertools
from typing import List, Optional, Sequence

from .inner import solve_placement
from .model import (LOCAL, Allocation, Method, ProblemInstance, SizeError, SolveResult,
                    SolverConfig, evaluate, make_result)


def _placement_objective(instance: ProblemInstance, placement: Sequence[int]):
    alloc = solve_placement(instance, placement)
    if alloc is None:
        return None, None
    obj, _ = evaluate(instance, alloc)
    return obj, alloc


def solve_exact(instance: ProblemInstance, cfg: SolverConfig = SolverConfig()) -> SolveResult:
    """Enumerate every placement vector and solve the inner problem for each.

    Ties go to the lexicographically smallest placement (Local sorts first).
    """
    n, m = len(instance.tasks), len(instance.available_servers)
    size = (m + 1) ** n
    if size > cfg.exact_limit:
        raise SizeError(f"{size} placements exceed exact_limit={cfg.exact_limit}; "
                        "use the heuristic solver")
    best_obj, best_alloc, count = None, None, 0
    for placement in itertools.product(range(LOCAL, m), repeat=n):
        count += 1
        obj, alloc = _placement_objective(instance, placement)
        if obj is not None and (best_obj is None or obj < best_obj):
            best_obj, best_alloc = obj, alloc
    if best_alloc is None:
        # all-local is always feasible, so this only happens for n == 0
        best_alloc = Allocation.all_local(n)
    return make_result(instance, best_alloc, Method.EXACT, iterations=count)


def _greedy_placement(instance: ProblemInstance) -> List[int]:
    n, m = len(instance.tasks), len(instance.available_servers)
    order = sorted(range(n), key=lambda i: (-instance.tasks[i].alpha * instance.tasks[i].cycles,
                                            instance.tasks[i].id))
    assigned: List[int] = []
    chosen: List[int] = []
    for i in order:
        sub = instance.subset(assigned + [i])
        best, best_p = None, LOCAL
        for p in range(LOCAL, m):
            obj, _ = _placement_objective(sub, chosen + [p])
            if obj is not None and (best is None or obj < best):
                best, best_p = obj, p
        assigned.append(i)
        chosen.append(best_p)
    placement = [LOCAL] * n
    for i, p in zip(assigned, chosen):
        placement[i] = p
    return placement


def _neighbours(placement: Sequence[int], m: int):
    n = len(placement)
    for i in range(n):
        for p in range(LOCAL, m):
            if p != placement[i]:
                cand = list(placement)
                cand[i] = p
                yield tuple(cand)
    for i in range(n):
        for j in range(i + 1, n):
            if placement[i] != placement[j]:
                cand = list(placement)
                cand[i], cand[j] = cand[j], cand[i]
                yield tuple(cand)


def solve_heuristic(instance: ProblemInstance, cfg: SolverConfig = SolverConfig()) -> SolveResult:
    """Greedy construction by descending alpha*cycles, then best-improvement
    local search over single-task moves and pairwise swaps."""
    n, m = len(instance.tasks), len(instance.available_servers)
    placement = tuple(_greedy_placement(instance))
    obj, alloc = _placement_objective(instance, placement)
    if alloc is None:
        placement = (LOCAL,) * n
        obj, alloc = _placement_objective(instance, placement)
    trace = [obj]
    iters = 0
    while iters < cfg.max_iters:
        best_obj, best_alloc = obj, None
        for cand in _neighbours(alloc.placement, m):
            c_obj, c_alloc = _placement_objective(instance, cand)
            if c_obj is not None and c_obj < best_obj:
                best_obj, best_alloc = c_obj, c_alloc
        # require a non-trivial gain so float noise cannot cycle
        if best_alloc is None or best_obj >= obj - 1e-12 * max(1.0, abs(obj)):
            break
        obj, alloc = best_obj, best_alloc
        trace.append(obj)
        iters += 1
    return make_result(instance, alloc, Method.HEURISTIC, iterations=iters, trace=trace)
