"""Seeded synthetic task systems for the experiments.

Utilizations are drawn uniformly from the simplex {U > 0, sum U = total}
(a flat Dirichlet, i.e. Dirichlet-Rescale without upper-bound constraints).
Densities are U plus a second flat-Dirichlet vector carrying the extra
density, clamped at 1. WCETs are log-uniform on [1, 1000] and rounded up;
periods are ceil(C / U) and deadlines floor(C / density).

Randomness comes from numpy's counter-based Philox bit generator so that a
(config, seed) pair always yields the same systems.
"""

from dataclasses import dataclass
from fractions import Fraction
import math
from typing import List, Optional

import numpy as np

from schedkernel.demand import Task, TaskSystem
from schedkernel.kernel import KernelInstance

WCET_RANGE = (1, 1000)
FP_LAST_TASK = Task(C=100, T=10**8, D=10**8)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True)
class GenConfig:
    n: int
    total_util: float
    total_density: Optional[float] = None
    flavor: str = "fp"
    seed: int = 0

    def __post_init__(self):
        if self.flavor not in ("fp", "edf"):
            raise ValueError(f"unknown flavor {self.flavor!r}")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.flavor == "edf":
            if self.total_density is None:
                raise ValueError("EDF generation needs a total density")
            if not 0 < self.total_util < 1:
                raise ValueError("EDF generation needs 0 < total_util < 1")
            if self.total_density < self.total_util:
                raise ValueError("total density must be at least total utilization")
            if self.total_density > self.n:
                raise ValueError("total density cannot exceed n")


def gen_utilizations(n: int, total: float, rng: np.random.Generator) -> List[float]:
    """n positive values, uniform on the simplex scaled to ``total``, each < 1."""
    if n < 1 or not 0 < total < n:
        raise ValueError(f"cannot split {total} into {n} values in (0, 1)")
    while True:
        us = rng.dirichlet(np.ones(n)) * total
        if np.all(us > 0) and np.all(us < 1):
            return us.tolist()


def gen_densities(us: List[float], total: float, rng: np.random.Generator) -> List[float]:
    """Densities d >= us with sum(d) = total and every d <= 1."""
    extra = total - sum(us)
    ds = np.asarray(us) + (rng.dirichlet(np.ones(len(us))) * extra if extra > 0 else 0.0)
    # Push any excess above 1 onto the tasks that still have room.
    for _ in range(len(us)):
        over = ds > 1
        if not over.any():
            break
        excess = float((ds[over] - 1).sum())
        ds[over] = 1.0
        room = np.where(ds < 1, 1 - ds, 0.0)
        if room.sum() <= 0:
            break
        ds += room / room.sum() * excess
    return np.minimum(ds, 1.0).tolist()


def gen_wcets(n: int, rng: np.random.Generator) -> List[int]:
    lo, hi = WCET_RANGE
    raw = np.exp(rng.uniform(math.log(lo), math.log(hi), size=n))
    return [min(hi, max(lo, math.ceil(c))) for c in raw]


def gen_fp_system(cfg: GenConfig, rng: np.random.Generator) -> TaskSystem:
    """n - 1 random implicit-deadline tasks followed by the fixed task (100, 10^8)."""
    if cfg.flavor != "fp":
        raise ValueError("gen_fp_system needs an fp config")
    m = cfg.n - 1
    tasks = []
    if m:
        us = gen_utilizations(m, cfg.total_util, rng)
        for c, u in zip(gen_wcets(m, rng), us):
            t = math.ceil(c / u)
            tasks.append(Task(C=c, T=t, D=t))
    tasks.append(FP_LAST_TASK)
    return TaskSystem.fp(tasks)


def gen_edf_system(cfg: GenConfig, rng: np.random.Generator) -> TaskSystem:
    """Constrained-deadline system with C <= D <= T for every task."""
    if cfg.flavor != "edf":
        raise ValueError("gen_edf_system needs an edf config")
    us = gen_utilizations(cfg.n, cfg.total_util, rng)
    ds = gen_densities(us, cfg.total_density, rng)
    tasks = []
    for c, u, d in zip(gen_wcets(cfg.n, rng), us, ds):
        t = math.ceil(c / u)
        dl = min(t, max(c, math.floor(c / d)))
        tasks.append(Task(C=c, T=t, D=dl))
    return TaskSystem.edf(tasks)


def gen_system(cfg: GenConfig, rng: np.random.Generator) -> TaskSystem:
    return gen_fp_system(cfg, rng) if cfg.flavor == "fp" else gen_edf_system(cfg, rng)


def random_kernel_instance(rng: np.random.Generator, max_n: int = 6,
                           max_range: int = 10**4) -> KernelInstance:
    """A small random kernel instance with b - a <= max_range.

    About one instance in eight has total utilization exactly 1.
    """
    n = int(rng.integers(0, max_n + 1))
    if n and rng.random() < 0.125:
        period = int(rng.integers(n, 60))
        cuts = sorted(rng.choice(np.arange(1, period), size=n - 1, replace=False).tolist())
        parts = [hi - lo for lo, hi in zip([0] + cuts, cuts + [period])]
        C, T = parts, [period] * n
    else:
        while True:
            T = rng.integers(1, 120, size=n).tolist()
            C = [int(rng.integers(1, max(2, t // max(1, n) + 2))) for t in T]
            if sum((Fraction(c, t) for c, t in zip(C, T)), Fraction(0)) <= 1:
                break
    alpha = rng.integers(-60, 61, size=n).tolist()
    beta = int(rng.integers(-30, 31))
    a = int(rng.integers(-300, 301))
    b = a + int(rng.integers(-2, max_range + 1))
    return KernelInstance(C=C, T=T, alpha=alpha, beta=beta, a=a, b=b)
