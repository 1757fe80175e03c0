"""The kernel: a one-dimensional integer problem shared by FP and EDF analysis.

    minimize t
    s.t. t ∈ [a, b] ∩ ℤ
         sum(ceil((t + alpha[j]) / T[j]) * C[j] for j in range(n)) + beta <= t

where C, T are positive integer vectors with sum(C[j] / T[j]) <= 1 and alpha,
beta, a, b are arbitrary integers. Three solvers are provided:

* ``solve_fp_kern``: fixed-point iteration on ``phi`` (RTA and QPA are special
  cases of it),
* ``solve_cp_kern``: the cutting-plane method whose relaxation optimum is the
  maximum of the rational map ``f`` (see ``eval_f``),
* ``solve_oracle``: an exhaustive scan used for testing.

All solver arithmetic is exact: integers, and ``Fraction`` where a value is
genuinely rational. Indices are 0-based throughout.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np


class RangeTooLarge(ValueError):
    """Raised by the oracle when b - a exceeds its scan budget."""


def ceil_div(num: int, den: int) -> int:
    """Return the smallest integer >= num / den for den >= 1."""
    if den <= 0:
        raise ValueError(f"ceil_div requires a positive denominator, got {den}")
    return -(-num // den)


def floor_div(num: int, den: int) -> int:
    if den <= 0:
        raise ValueError(f"floor_div requires a positive denominator, got {den}")
    return num // den


@dataclass(frozen=True)
class KernelInstance:
    """Data (C, T, alpha, beta, a, b) of one kernel problem."""

    C: Tuple[int, ...]
    T: Tuple[int, ...]
    alpha: Tuple[int, ...]
    beta: int
    a: int
    b: int

    def __post_init__(self):
        object.__setattr__(self, "C", tuple(int(c) for c in self.C))
        object.__setattr__(self, "T", tuple(int(t) for t in self.T))
        object.__setattr__(self, "alpha", tuple(int(x) for x in self.alpha))
        if not len(self.C) == len(self.T) == len(self.alpha):
            raise ValueError("C, T and alpha must have the same length")
        if any(c < 1 for c in self.C) or any(t < 1 for t in self.T):
            raise ValueError("C and T must be positive")
        if self.T:
            M = math.lcm(*self.T)
            if sum(c * (M // t) for c, t in zip(self.C, self.T)) > M:
                raise ValueError("total utilization of a kernel instance exceeds 1")

    @property
    def n(self) -> int:
        return len(self.C)

    @property
    def utilization(self) -> Fraction:
        if not self.T:
            return Fraction(0)
        M = math.lcm(*self.T)
        return Fraction(sum(c * (M // t) for c, t in zip(self.C, self.T)), M)

    def to_dict(self) -> dict:
        return {"C": list(self.C), "T": list(self.T), "alpha": list(self.alpha),
                "beta": self.beta, "a": self.a, "b": self.b}

    @classmethod
    def from_dict(cls, d: dict) -> "KernelInstance":
        return cls(C=d["C"], T=d["T"], alpha=d["alpha"], beta=d["beta"],
                   a=d["a"], b=d["b"])


@dataclass
class SolveTrace:
    """Iteration count and the dual bound produced by each iteration.

    With ``record=False`` only the count is kept; the timing benchmarks use
    this to keep rational normalization out of the measurement.
    """

    record: bool = True
    iterations: int = 0
    bounds: List[Fraction] = field(default_factory=list)

    def add(self, num: int, den: int = 1) -> None:
        self.iterations += 1
        if self.record:
            self.bounds.append(Fraction(num, den))


def phi(inst: KernelInstance, t: int) -> int:
    """The nondecreasing step function whose least fixed point solves the kernel."""
    return sum(-(-(t + al) // T) * C
               for C, T, al in zip(inst.C, inst.T, inst.alpha)) + inst.beta


def solve_fp_kern(inst: KernelInstance,
                  record_bounds: bool = True) -> Tuple[Optional[int], SolveTrace]:
    """Solve the kernel by fixed-point iteration from t = a.

    One iteration is one relaxation solve of the equivalent cutting-plane
    view, i.e. one new value of phi. The evaluation that merely confirms a
    fixed point reached by the previous iteration is not counted.

    Returns:
        (t, trace) where t is the optimal value, or None if infeasible.
    """
    trace = SolveTrace(record_bounds)
    a, b = inst.a, inst.b
    if a > b:
        return None, trace
    C, T, alpha, beta = inst.C, inst.T, inst.alpha, inst.beta
    terms = list(zip(C, T, alpha))

    t = a
    v = sum(-(-(t + al) // p) * c for c, p, al in terms) + beta
    trace.add(v)
    while v > t:
        if v > b:
            return None, trace
        t = v
        v = sum(-(-(t + al) // p) * c for c, p, al in terms) + beta
        if v > t:
            trace.add(v)
    return t, trace


def initial_lower_bounds(inst: KernelInstance) -> List[int]:
    """Lower bounds ceil((a + alpha_j) / T_j) on the integer variables."""
    return [ceil_div(inst.a + al, p) for p, al in zip(inst.T, inst.alpha)]


def sort_keys(inst: KernelInstance, xlb: Sequence[int]) -> List[int]:
    """y_j = T_j * xlb_j - alpha_j, the value per unit weight of item j."""
    return [p * x - al for p, x, al in zip(inst.T, xlb, inst.alpha)]


def sorted_order(y: Sequence[int]) -> List[int]:
    """Indices by nonincreasing y, ties broken by ascending index."""
    return sorted(range(len(y)), key=lambda j: (-y[j], j))


def eval_f(inst: KernelInstance, xlb: Sequence[int], order: Sequence[int],
           k: int) -> Fraction:
    """Evaluate f(k): the first k items of ``order`` sit at their lower bounds.

    f(k) = (beta + sum_{j not in head} U_j alpha_j + sum_{j in head} C_j xlb_j)
           / (1 - sum_{j not in head} U_j)

    Raises:
        ValueError: if k is out of range or the denominator vanishes
            (k = 0 with total utilization exactly 1).
    """
    if not 0 <= k <= inst.n:
        raise ValueError(f"k={k} outside 0..{inst.n}")
    head, rest = order[:k], order[k:]
    num = Fraction(inst.beta)
    den = Fraction(1)
    for j in rest:
        u = Fraction(inst.C[j], inst.T[j])
        num += u * inst.alpha[j]
        den -= u
    for j in head:
        num += inst.C[j] * xlb[j]
    if den == 0:
        raise ValueError("f(0) is undefined when total utilization equals 1")
    return num / den


@dataclass(frozen=True)
class Relaxation:
    """Optimum of the linear relaxation for a given lower-bound vector.

    ``argmax`` is the number of leading items of ``order`` kept at their lower
    bounds; the remaining items are tight against t.
    """

    tstar: Fraction
    argmax: int
    order: Tuple[int, ...]


def solve_relaxation(inst: KernelInstance,
                     xlb: Sequence[int]) -> Optional[Relaxation]:
    """Solve the linear relaxation of the kernel IP as max f.

    Returns None when the relaxation (and therefore the kernel) is
    infeasible, which happens exactly when the utilization is 1 and
    beta + U . alpha > 0.
    """
    n = inst.n
    us = [Fraction(c, p) for c, p in zip(inst.C, inst.T)]
    total = sum(us, Fraction(0))
    if total == 1 and inst.beta + sum(u * al for u, al in zip(us, inst.alpha)) > 0:
        return None
    i0 = 1 if total == 1 else 0
    y = sort_keys(inst, xlb)
    order = sorted_order(y)

    # Downward scan: the first i (from the top) with f(i) >= f(i-1) is a
    # local, hence global, maximum.
    num = Fraction(inst.beta + sum(c * x for c, x in zip(inst.C, xlb)))
    den = Fraction(1)
    i = n
    while i > i0:
        k = order[i - 1]
        if num <= den * y[k]:
            break
        num -= inst.C[k] * xlb[k] - us[k] * inst.alpha[k]
        den -= us[k]
        i -= 1
    return Relaxation(num / den, i, tuple(order))


def relaxation_point(inst: KernelInstance, xlb: Sequence[int],
                     relax: Relaxation) -> Tuple[Fraction, List[Fraction]]:
    """Recover a primal optimum (t*, x*) of the relaxation."""
    t = relax.tstar
    x = [Fraction(v) for v in xlb]
    for j in relax.order[relax.argmax:]:
        x[j] = (t + inst.alpha[j]) / inst.T[j]
    return t, x


def solve_cp_kern(inst: KernelInstance,
                  record_bounds: bool = True) -> Tuple[Optional[int], SolveTrace]:
    """Solve the kernel with the cutting-plane method.

    Each iteration solves the relaxation as max f by a downward scan over
    the items sorted by y, then raises the lower bound of every item after
    the maximizer to ceil((t* + alpha_j) / T_j). Only the updated tail of the
    order is re-sorted.

    Utilizations are scaled by M = lcm(T), so the scan compares integers:
    f(i) = p / q with p, q integers and q > 0.

    Returns:
        (t, trace) where t is the optimal value, or None if infeasible.
    """
    trace = SolveTrace(record_bounds)
    a, b = inst.a, inst.b
    if a > b:
        return None, trace
    n, C, T, alpha, beta = inst.n, inst.C, inst.T, inst.alpha, inst.beta

    M = math.lcm(*T) if n else 1
    u = [c * (M // p) for c, p in zip(C, T)]
    xlb = [-(-(a + al) // p) for p, al in zip(T, alpha)]
    y = [p * x - al for p, x, al in zip(T, xlb, alpha)]
    r = beta + sum(c * x for c, x in zip(C, xlb))

    slack = M - sum(u)
    if slack == 0 and beta * M + sum(uj * al for uj, al in zip(u, alpha)) > 0:
        return None, trace
    i0 = 1 if slack == 0 else 0

    # Python's sort is stable, so items with equal y keep their relative
    # order; f and every dual bound are invariant under such ties.
    pi = sorted(range(n), key=y.__getitem__, reverse=True)
    # Moving item k from the head to the tail of the order lowers the
    # scaled numerator of f by drop[k] = M * C_k * xlb_k - u_k * alpha_k.
    CM = [c * M for c in C]
    UA = [uj * al for uj, al in zip(u, alpha)]
    drop = [cm * x - ua for cm, x, ua in zip(CM, xlb, UA)]

    bounds = trace.bounds if record_bounds else None
    its = 0
    while True:
        p, q, i = r * M, M, n
        while i > i0:
            k = pi[i - 1]
            if p <= q * y[k]:
                break
            p -= drop[k]
            q -= u[k]
            i -= 1
        its += 1
        if bounds is not None:
            bounds.append(Fraction(p, q))
        # a and b are integers, so comparing ceil(t*) against them is exact.
        tc = -(-p // q)
        if tc <= a or tc > b or i == n:
            trace.iterations = its
            if tc <= a:
                return a, trace
            if tc > b:
                return None, trace
            return r, trace

        # ceil((t* + alpha) / T) == ceil((ceil(t*) + alpha) / T) for integral
        # alpha and T, so the tail update needs no rational arithmetic.
        for k in pi[i:]:
            x = -(-(tc + alpha[k]) // T[k])
            r += C[k] * (x - xlb[k])
            xlb[k] = x
            y[k] = T[k] * x - alpha[k]
            drop[k] = CM[k] * x - UA[k]
        # The head pi[:i] is still sorted. Timsort detects it as a run,
        # sorts the updated tail and merges the two runs.
        pi.sort(key=y.__getitem__, reverse=True)


def solve_oracle(inst: KernelInstance, max_range: int = 10**7) -> Optional[int]:
    """Exhaustive scan of [a, b] for the least t with phi(t) <= t.

    Raises:
        RangeTooLarge: if b - a exceeds ``max_range``.
    """
    a, b = inst.a, inst.b
    if a > b:
        return None
    if b - a > max_range:
        raise RangeTooLarge(f"range {b - a} exceeds oracle budget {max_range}")

    bound = max([abs(a), abs(b)] + [abs(x) for x in inst.alpha]) + 1
    big = bound * (sum(inst.C) + 1) + abs(inst.beta)
    if big >= 2**62:
        for t in range(a, b + 1):
            if phi(inst, t) <= t:
                return t
        return None

    chunk = 1 << 16
    for lo in range(a, b + 1, chunk):
        ts = np.arange(lo, min(lo + chunk, b + 1), dtype=np.int64)
        vals = np.full(ts.shape, inst.beta, dtype=np.int64)
        for c, p, al in zip(inst.C, inst.T, inst.alpha):
            vals += -((-(ts + al)) // p) * c
        hits = np.flatnonzero(vals <= ts)
        if hits.size:
            return int(ts[hits[0]])
    return None


SOLVERS = {"fp": solve_fp_kern, "cp": solve_cp_kern}


def solve(inst: KernelInstance, method: str = "cp",
          record_bounds: bool = True) -> Tuple[Optional[int], SolveTrace]:
    """Dispatch to ``solve_fp_kern`` or ``solve_cp_kern`` by name."""
    try:
        fn = SOLVERS[method]
    except KeyError:
        raise ValueError(f"unknown solver {method!r}; expected 'fp' or 'cp'") from None
    return fn(inst, record_bounds=record_bounds)
