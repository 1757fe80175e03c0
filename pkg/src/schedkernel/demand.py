"""Task model, request/demand bound functions and EDF interval bounds."""

from dataclasses import dataclass
from fractions import Fraction
import math
from typing import Iterable, Optional, Sequence, Tuple

from schedkernel.kernel import KernelInstance, ceil_div, floor_div, solve

FP_ORDER = "fp"
EDF_ORDER = "edf"


@dataclass(frozen=True)
class Task:
    """A sporadic task with wcet C, period T, deadline D, jitter J, phase O."""

    C: int
    T: int
    D: int
    J: int = 0
    O: int = 0

    def __post_init__(self):
        if self.C < 1 or self.T < 1 or self.D < 1:
            raise ValueError(f"C, T and D must be positive: {self}")
        if self.J < 0 or self.O < 0:
            raise ValueError(f"J and O must be nonnegative: {self}")

    @property
    def dhat(self) -> int:
        """Deadline measured from the release, D - J."""
        return self.D - self.J

    @property
    def utilization(self) -> Fraction:
        return Fraction(self.C, self.T)

    @property
    def density(self) -> Fraction:
        return Fraction(self.C, self.D)


def edf_key(task: Task) -> int:
    return task.dhat - task.T


@dataclass(frozen=True)
class TaskSystem:
    """An ordered tuple of tasks.

    ``order`` is ``"fp"`` for priority order (highest first) or ``"edf"`` for
    nondecreasing D - J - T. Use ``TaskSystem.edf`` to sort on construction.
    """

    tasks: Tuple[Task, ...]
    order: str = FP_ORDER

    def __post_init__(self):
        object.__setattr__(self, "tasks", tuple(self.tasks))
        if self.order not in (FP_ORDER, EDF_ORDER):
            raise ValueError(f"unknown ordering {self.order!r}")
        if self.order == EDF_ORDER:
            keys = [edf_key(t) for t in self.tasks]
            if any(k1 > k2 for k1, k2 in zip(keys, keys[1:])):
                raise ValueError("EDF systems must be sorted by D - J - T")

    @classmethod
    def fp(cls, tasks: Iterable[Task]) -> "TaskSystem":
        return cls(tuple(tasks), FP_ORDER)

    @classmethod
    def edf(cls, tasks: Iterable[Task]) -> "TaskSystem":
        # sorted() is stable, so equal keys keep their input order.
        return cls(tuple(sorted(tasks, key=edf_key)), EDF_ORDER)

    def __len__(self) -> int:
        return len(self.tasks)

    def __iter__(self):
        return iter(self.tasks)

    def __getitem__(self, i):
        return self.tasks[i]

    @property
    def utilization(self) -> Fraction:
        return weighted_utilization(self.tasks)


def weighted_utilization(tasks: Sequence[Task],
                         weights: Optional[Sequence[int]] = None) -> Fraction:
    """Exact sum of w_j * C_j / T_j (w = 1 by default) over a common denominator.

    Much cheaper than adding Fractions one by one, which renormalizes at
    every step.
    """
    if not tasks:
        return Fraction(0)
    M = math.lcm(*(tk.T for tk in tasks))
    if weights is None:
        num = sum(tk.C * (M // tk.T) for tk in tasks)
    else:
        num = sum(w * tk.C * (M // tk.T) for w, tk in zip(weights, tasks))
    return Fraction(num, M)


def rbf(system: Sequence[Task], i: int, t: int) -> int:
    """Request bound function of the subsystem made of the first i tasks."""
    return sum(ceil_div(t + tk.J, tk.T) * tk.C for tk in system[:i])


def dbf(system: Sequence[Task], t: int) -> int:
    """Demand bound function: work released and due within any window of length t."""
    return sum(floor_div(t + tk.T - tk.dhat, tk.T) * tk.C
               for tk in system if t >= tk.dhat - tk.T)


def dbf_k(system: Sequence[Task], k: int, t: int) -> int:
    """dbf restricted to the first k tasks, without the guard.

    Agrees with ``dbf`` on the k-th branch interval of an EDF-sorted system.
    """
    return sum(floor_div(t + tk.T - tk.dhat, tk.T) * tk.C for tk in system[:k])


def hyperperiod(system: Sequence[Task]) -> int:
    if not system:
        raise ValueError("hyperperiod of an empty system")
    return math.lcm(*(tk.T for tk in system))


def compute_La(system: Sequence[Task], solver: str = "cp") -> Optional[int]:
    """Least t in (0, hyperperiod] with rbf(t) <= t, or None.

    Returns None when the total utilization exceeds 1, and also when jitter
    pushes the least fixed point of rbf beyond the hyperperiod.
    """
    if not system:
        raise ValueError("L_a of an empty system")
    if weighted_utilization(system) > 1:
        return None
    inst = KernelInstance(C=[tk.C for tk in system], T=[tk.T for tk in system],
                          alpha=[tk.J for tk in system], beta=0, a=1,
                          b=hyperperiod(system))
    t, _ = solve(inst, solver)
    return t


def compute_Lb(system: Sequence[Task]) -> Tuple[Fraction, int]:
    """Utilization-based bound L_b and the integer exclusive end floor(L_b) + 1.

    Raises:
        ValueError: if the total utilization is not strictly below 1.
    """
    if not system:
        raise ValueError("L_b of an empty system")
    total = weighted_utilization(system)
    if total >= 1:
        raise ValueError("L_b requires total utilization < 1")
    first = max(tk.dhat - tk.T for tk in system)
    second = weighted_utilization(system, [tk.T - tk.dhat for tk in system]) / (1 - total)
    lb = max(Fraction(first), second)
    return lb, math.floor(lb) + 1


def eta(task: Task, t1: int, t2: int) -> int:
    """Number of jobs of ``task`` whose release and deadline lie in [t1, t2].

    Jobs are released at O + k*T for k = 0, 1, 2, ...
    """
    O, T, D = task.O, task.T, task.D
    if t1 <= O and O + D <= t2:
        return floor_div(t2 + T - D - O, T)
    # A window starting before the first release but ending before its
    # deadline holds no job; the two-term formula would overcount there.
    if t1 > O and t2 - t1 >= D:
        return floor_div(t2 + T - D - O, T) - ceil_div(t1 - O, T)
    return 0
