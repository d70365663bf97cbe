from .baselines import baseline_dld, baseline_gsa, baseline_mec
from .inner import allocate_bandwidth, golden_section, optimize_power, solve_placement
from .model import (LOCAL, Allocation, AllocationError, Method, ProblemInstance, Reservation,
                    SizeError, SolveResult, SolverConfig, evaluate, reserve_capacity, validate)
from .solvers import solve_exact, solve_heuristic

SOLVERS = {
    Method.EXACT: solve_exact,
    Method.HEURISTIC: solve_heuristic,
    Method.DLD: lambda inst, cfg=None: baseline_dld(inst),
    Method.MEC: lambda inst, cfg=None: baseline_mec(inst),
    Method.GSA: baseline_gsa,
}


def solve(instance: ProblemInstance, method, cfg: SolverConfig = SolverConfig()) -> SolveResult:
    return SOLVERS[Method(method)](instance, cfg)
