"""Experiment runner comparing FP-KERN (RTA / QPA) with CP-KERN.

Experiments I and III count iterations, II and IV measure wall time, on
generated FP and EDF systems respectively. Every pair of runs is checked for
agreement; a disagreement aborts the run with the offending system attached.
"""

from dataclasses import dataclass, field
from fractions import Fraction
import csv
import io
import json
import statistics
import time
from typing import Iterable, List, Optional, Sequence, Tuple

from schedkernel.demand import Task, TaskSystem
from schedkernel.kernel import solve
from schedkernel.sched import edf_test, reduce_fp_improved
from schedkernel.taskgen import GenConfig, gen_system, make_rng

FP_EXPERIMENTS = ("I", "II")
EDF_EXPERIMENTS = ("III", "IV")
ITERATION_EXPERIMENTS = ("I", "III")
N_GRID = (25, 50, 75)
UTIL_GRID = (0.7, 0.8, 0.9)
DENSITY_GRID = (1.25, 1.5, 1.75)
CSV_COLUMNS = ("experiment", "n", "total_util", "total_density", "algo", "min",
               "max", "mean", "variance", "samples", "seed")
TIMING_REPEATS = 3


class InconsistencyError(RuntimeError):
    """The two solvers disagreed on a generated system."""

    def __init__(self, message: str, system: TaskSystem):
        super().__init__(message)
        self.system = system


@dataclass(frozen=True)
class RunStats:
    min: float
    max: float
    mean: float
    variance: float
    count: int


EMPTY_STATS = RunStats(float("nan"), float("nan"), float("nan"), float("nan"), 0)


def aggregate(samples: Sequence) -> RunStats:
    """Exact min and max, mean and population variance.

    Raises:
        ValueError: on an empty sample list.
    """
    if not samples:
        raise ValueError("cannot aggregate an empty sample list")
    return RunStats(min=min(samples), max=max(samples),
                    mean=statistics.fmean(samples),
                    variance=statistics.pvariance(samples),
                    count=len(samples))


def harmonic_mean_periods(system: Iterable[Task]) -> Fraction:
    periods = [t.T for t in system]
    if not periods:
        raise ValueError("harmonic mean of an empty system")
    return len(periods) / sum(Fraction(1, p) for p in periods)


Cell = Tuple[int, float, Optional[float]]


def default_cells(experiment: str) -> List[Cell]:
    """Default cells for one experiment.

    FP experiments cover the full n x utilization grid. EDF experiments vary
    one parameter at a time around n=25, U=0.9, density=1.5.
    """
    if experiment in FP_EXPERIMENTS:
        return [(n, u, None) for n in N_GRID for u in UTIL_GRID]
    if experiment in EDF_EXPERIMENTS:
        cells = [(25, u, 1.5) for u in UTIL_GRID]
        cells += [(25, 0.9, d) for d in DENSITY_GRID if d != 1.5]
        cells += [(n, 0.9, 1.5) for n in N_GRID if n != 25]
        return cells
    raise ValueError(f"unknown experiment {experiment!r}")


@dataclass
class ExperimentConfig:
    """One experiment: its id, the cells to run and the sample count per cell."""

    experiment: str
    samples: int = 10_000
    seed: int = 0
    cells: Optional[List[Cell]] = None

    def __post_init__(self):
        if self.experiment not in FP_EXPERIMENTS + EDF_EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}")
        if self.samples < 1:
            raise ValueError("samples must be positive")
        if self.cells is None:
            self.cells = default_cells(self.experiment)
        for n, u, d in self.cells:
            if self.experiment in EDF_EXPERIMENTS and (d is None or u >= 1):
                raise ValueError(f"EDF cell ({n}, {u}, {d}) needs U < 1 and a density")

    @property
    def measurement(self) -> str:
        return "iterations" if self.experiment in ITERATION_EXPERIMENTS else "time"


@dataclass
class CellResult:
    experiment: str
    n: int
    total_util: float
    total_density: Optional[float]
    seed: int
    fp: RunStats
    cp: RunStats
    ratio: RunStats
    raw: List[dict] = field(default_factory=list)

    def rows(self) -> List[dict]:
        out = []
        for algo, st in (("fp", self.fp), ("cp", self.cp), ("ratio", self.ratio)):
            out.append({"experiment": self.experiment, "n": self.n,
                        "total_util": self.total_util,
                        "total_density": "" if self.total_density is None else self.total_density,
                        "algo": algo, "min": st.min, "max": st.max, "mean": st.mean,
                        "variance": st.variance, "samples": st.count, "seed": self.seed})
        return out


def cell_seed(seed: int, index: int) -> int:
    # Independent Philox streams per cell, stable under reordering of other cells.
    return seed * 1_000_003 + index


def _timed(fn, repeats: int = TIMING_REPEATS) -> Tuple[int, object]:
    """Median of ``repeats`` perf_counter_ns measurements of ``fn()``."""
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        out = fn()
        times.append(time.perf_counter_ns() - t0)
    return statistics.median_low(times), out


def _solve_fp_level(system: TaskSystem, method: str):
    return solve(reduce_fp_improved(system, len(system)), method, record_bounds=False)


def _solve_edf(system: TaskSystem, method: str):
    return edf_test(system, solver=method, bound="lb", record_bounds=False)


def _run_cell(cfg: ExperimentConfig, index: int, keep_raw: bool) -> CellResult:
    n, u, d = cfg.cells[index]
    fp_flavor = cfg.experiment in FP_EXPERIMENTS
    gen = GenConfig(n=n, total_util=u, total_density=None if fp_flavor else d,
                    flavor="fp" if fp_flavor else "edf", seed=cell_seed(cfg.seed, index))
    rng = make_rng(gen.seed)
    timing = cfg.measurement == "time"
    run = _solve_fp_level if fp_flavor else _solve_edf

    fp_vals, cp_vals, ratios, raw = [], [], [], []
    for s in range(cfg.samples):
        system = gen_system(gen, rng)
        outs = {}
        vals = {}
        for method in ("fp", "cp"):
            if timing:
                vals[method], outs[method] = _timed(lambda: run(system, method))
            else:
                outs[method] = run(system, method)
        if fp_flavor:
            (t_fp, tr_fp), (t_cp, tr_cp) = outs["fp"], outs["cp"]
            if t_fp != t_cp:
                raise InconsistencyError(
                    f"FP level {n}: fp-kern gave {t_fp}, cp-kern gave {t_cp}", system)
            if not timing:
                vals = {"fp": tr_fp.iterations, "cp": tr_cp.iterations}
        else:
            r_fp, r_cp = outs["fp"], outs["cp"]
            if (r_fp.schedulable, r_fp.miss) != (r_cp.schedulable, r_cp.miss):
                raise InconsistencyError(
                    f"EDF: fp-kern gave {r_fp.miss}, cp-kern gave {r_cp.miss}", system)
            if not timing:
                vals = {"fp": r_fp.iterations, "cp": r_cp.iterations}
        fp_vals.append(vals["fp"])
        cp_vals.append(vals["cp"])
        # A system settled without any kernel solve has no meaningful ratio.
        ratio = vals["fp"] / vals["cp"] if vals["cp"] else None
        if ratio is not None:
            ratios.append(ratio)
        if keep_raw:
            raw.append({"experiment": cfg.experiment, "n": n, "total_util": u,
                        "total_density": d, "sample": s, "fp": vals["fp"],
                        "cp": vals["cp"], "ratio": ratio})
    return CellResult(cfg.experiment, n, u, d, gen.seed, aggregate(fp_vals),
                      aggregate(cp_vals), aggregate(ratios) if ratios else EMPTY_STATS, raw)


def run_experiment(cfg: ExperimentConfig, keep_raw: bool = False) -> List[CellResult]:
    return [_run_cell(cfg, i, keep_raw) for i in range(len(cfg.cells))]


def run_fp_experiment(cfg: ExperimentConfig, keep_raw: bool = False) -> List[CellResult]:
    """Level n of generated FP systems, improved reduction for both solvers."""
    if cfg.experiment not in FP_EXPERIMENTS:
        raise ValueError(f"experiment {cfg.experiment} is not an FP experiment")
    return run_experiment(cfg, keep_raw)


def run_edf_experiment(cfg: ExperimentConfig, keep_raw: bool = False) -> List[CellResult]:
    """Full EDF test of generated systems with L from the utilization bound."""
    if cfg.experiment not in EDF_EXPERIMENTS:
        raise ValueError(f"experiment {cfg.experiment} is not an EDF experiment")
    return run_experiment(cfg, keep_raw)


def to_csv(results: Iterable[CellResult]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for res in results:
        writer.writerows(res.rows())
    return buf.getvalue()


def to_jsonl(results: Iterable[CellResult]) -> str:
    return "".join(json.dumps(rec) + "\n" for res in results for rec in res.raw)


def summary_table(results: Sequence[CellResult]) -> str:
    """Plain-text table: (min, max), mean and variance per algorithm, then the mean ratio."""
    if not results:
        return ""
    timing = results[0].experiment not in ITERATION_EXPERIMENTS
    unit = "us" if timing else "iterations"
    scale = 1e-3 if timing else 1.0
    lines = [f"Experiment {results[0].experiment} ({unit})",
             f"{'n':>4} {'U':>5} {'dens':>5} | {'(Min, Max) fp':>18} {'(Min, Max) cp':>18}"
             f" | {'mean fp':>9} {'mean cp':>9} | {'var fp':>10} {'var cp':>10} | {'ratio':>6}"]
    for r in results:
        dens = "-" if r.total_density is None else f"{r.total_density:.2f}"
        mm = lambda st: f"({st.min * scale:.4g}, {st.max * scale:.4g})"
        lines.append(
            f"{r.n:>4} {r.total_util:>5.2f} {dens:>5} | {mm(r.fp):>18} {mm(r.cp):>18}"
            f" | {r.fp.mean * scale:>9.2f} {r.cp.mean * scale:>9.2f}"
            f" | {r.fp.variance * scale ** 2:>10.2f} {r.cp.variance * scale ** 2:>10.2f}"
            f" | {r.ratio.mean:>6.2f}")
    return "\n".join(lines)
