"""FP and EDF schedulability tests built on the kernel solvers.

Fixed-priority analysis reduces each priority level to one kernel instance;
``solver="fp"`` is classic response time analysis. EDF analysis splits the
interval [D̂_min, L) into branches on which dbf has a guard-free form, and
reduces each branch to a kernel by negating t; ``solver="fp"`` then runs the
downward iteration of QPA.
"""

from dataclasses import dataclass, field
import math
from typing import List, NamedTuple, Optional, Union

from schedkernel.demand import (EDF_ORDER, FP_ORDER, TaskSystem, compute_Lb,
                                hyperperiod, weighted_utilization)
from schedkernel.kernel import KernelInstance, SolveTrace, solve


def _check_fp_level(system: TaskSystem, i: int) -> None:
    if system.order != FP_ORDER:
        raise ValueError("fixed-priority analysis needs a priority-ordered system")
    if not 1 <= i <= len(system):
        raise ValueError(f"level {i} outside 1..{len(system)}")
    task = system[i - 1]
    if task.D > task.T:
        raise ValueError(f"task {i} has an arbitrary deadline (D > T)")


def reduce_fp_basic(system: TaskSystem, i: int) -> KernelInstance:
    """Kernel for level i: least t in [1, D_i - J_i] with rbf_i(t) <= t."""
    _check_fp_level(system, i)
    tasks = system[:i]
    return KernelInstance(C=[t.C for t in tasks], T=[t.T for t in tasks],
                          alpha=[t.J for t in tasks], beta=0, a=1,
                          b=system[i - 1].dhat)


def reduce_fp_improved(system: TaskSystem, i: int) -> KernelInstance:
    """Kernel for level i with task i folded into beta.

    On [1, D_i - J_i] task i contributes exactly C_i, so the instance keeps
    only the higher-priority tasks and starts from
    max(C_i, ceil((C_i + sum J_j U_j) / (1 - sum U_j))).
    """
    _check_fp_level(system, i)
    hp = system[:i - 1]
    own = system[i - 1]
    a = own.C
    if hp:
        # Over the common denominator M: f(0) = (C_i M + sum J u) / (M - sum u).
        M = math.lcm(*(t.T for t in hp))
        u = [t.C * (M // t.T) for t in hp]
        slack = M - sum(u)
        if slack > 0:
            num = own.C * M + sum(t.J * uj for t, uj in zip(hp, u))
            a = max(a, -(-num // slack))
    return KernelInstance(C=[t.C for t in hp], T=[t.T for t in hp],
                          alpha=[t.J for t in hp], beta=own.C, a=a, b=own.dhat)


FP_REDUCTIONS = {"basic": reduce_fp_basic, "improved": reduce_fp_improved}


@dataclass
class FpResult:
    """Response times of the analysed levels, in priority order.

    ``failed_level`` is the 1-based level found unschedulable, after which
    analysis stops; it is None when every level is schedulable.
    """

    response_times: List[int] = field(default_factory=list)
    failed_level: Optional[int] = None
    traces: List[SolveTrace] = field(default_factory=list)

    @property
    def schedulable(self) -> bool:
        return self.failed_level is None


def fp_analyze(system: TaskSystem, solver: str = "cp",
               reduction: str = "improved") -> FpResult:
    """Analyse every priority level of a constrained-deadline FP system."""
    if system.order != FP_ORDER:
        raise ValueError("fixed-priority analysis needs a priority-ordered system")
    try:
        reduce = FP_REDUCTIONS[reduction]
    except KeyError:
        raise ValueError(f"unknown reduction {reduction!r}") from None

    result = FpResult()
    # Running sum over the common denominator of all periods.
    M = math.lcm(*(t.T for t in system)) if len(system) else 1
    total = 0
    for i, task in enumerate(system, start=1):
        total += task.C * (M // task.T)
        if total > M:
            # rbf_i(t) >= t * total > t for every t > 0.
            result.failed_level = i
            return result
        t, trace = solve(reduce(system, i), solver)
        result.traces.append(trace)
        if t is None:
            result.failed_level = i
            return result
        result.response_times.append(t + task.J)
    return result


class BranchInterval(NamedTuple):
    """Half-open interval [a, b) on which dbf equals dbf_k."""

    k: int
    a: int
    b: int


def edf_branch_bounds(system: TaskSystem, L: int) -> List[BranchInterval]:
    """Nonempty branches of [D̂_min, L), highest k first.

    ``k`` is 1-based: branch k involves the first k tasks.
    """
    if system.order != EDF_ORDER:
        raise ValueError("EDF analysis needs a system sorted by D - J - T")
    n = len(system)
    if n == 0:
        return []
    dmin = min(t.dhat for t in system)
    if dmin >= L:
        return []
    keys = [t.dhat - t.T for t in system]

    k_first = 1
    while k_first <= n - 1 and keys[k_first] < dmin:
        k_first += 1
    k_last = n
    while k_last >= 1 and keys[k_last - 1] >= L:
        k_last -= 1

    out = []
    for k in range(k_last, k_first - 1, -1):
        a = max(dmin, keys[k - 1])
        # Clip at L: for k = k_last < n the next key may lie beyond L.
        b = L if k == n else min(L, keys[k])
        if a < b:
            out.append(BranchInterval(k, a, b))
    return out


def reduce_edf_subproblem(system: TaskSystem, iv: BranchInterval,
                          improved: bool = False) -> KernelInstance:
    """Kernel for one branch, with t negated.

    A deadline miss at some t in [a_k, b_k) exists iff the kernel over
    [-b_k + 1, -a_k] is feasible; the miss time is minus its optimum.
    """
    if iv.a >= iv.b:
        raise ValueError(f"empty branch interval {iv}")
    tasks = system[:iv.k]
    alpha = [t.dhat - t.T for t in tasks]
    a = -iv.b + 1
    if improved:
        total = weighted_utilization(tasks)
        if total < 1:
            f0 = (1 + weighted_utilization(tasks, alpha)) / (1 - total)
            a = max(a, math.ceil(f0))
    return KernelInstance(C=[t.C for t in tasks], T=[t.T for t in tasks],
                          alpha=alpha, beta=1, a=a, b=-iv.a)


@dataclass
class EdfResult:
    """Outcome of the EDF test.

    ``miss`` is a time t with dbf(t) > t: the largest such t in the first
    branch (highest k) that has one. It is None when the system is
    schedulable, and also when it is overloaded (utilization above 1), where
    no witness is searched for.
    """

    schedulable: bool
    miss: Optional[int] = None
    overloaded: bool = False
    L: Optional[int] = None
    traces: List[SolveTrace] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return sum(tr.iterations for tr in self.traces)


def edf_bound(system: TaskSystem, bound: Union[str, int] = "lb") -> int:
    """Exclusive right end L of the EDF search interval.

    ``"lb"`` uses floor(L_b) + 1 and falls back to ``"hyp"`` when the
    utilization is exactly 1. ``"hyp"`` uses the hyperperiod plus the
    largest positive D - J - T, which covers arbitrary deadlines.
    An int is taken as L directly.
    """
    if isinstance(bound, int) and not isinstance(bound, bool):
        return bound
    if bound == "lb" and system.utilization < 1:
        return compute_Lb(system)[1]
    if bound in ("lb", "hyp"):
        return hyperperiod(system) + max(0, max(t.dhat - t.T for t in system))
    raise ValueError(f"unknown bound {bound!r}")


def edf_test(system: TaskSystem, solver: str = "cp",
             bound: Union[str, int] = "lb", improved: bool = False,
             record_bounds: bool = True) -> EdfResult:
    """Decide EDF schedulability of a synchronous arbitrary-deadline system.

    The system is sorted by D - J - T here if it is not already.
    """
    if system.order != EDF_ORDER:
        system = TaskSystem.edf(system.tasks)
    if not len(system):
        return EdfResult(schedulable=True)
    if system.utilization > 1:
        return EdfResult(schedulable=False, overloaded=True)

    L = edf_bound(system, bound)
    result = EdfResult(schedulable=True, L=L)
    for iv in edf_branch_bounds(system, L):
        inst = reduce_edf_subproblem(system, iv, improved=improved)
        t, trace = solve(inst, solver, record_bounds=record_bounds)
        result.traces.append(trace)
        if t is not None:
            result.schedulable = False
            result.miss = -t
            return result
    return result
