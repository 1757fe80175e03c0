"""Exact schedulability analysis through the kernel problem.

Fixed-priority response time analysis and EDF processor demand analysis both
reduce to one integer problem, solved here by fixed-point iteration
(``solve_fp_kern``) or by cutting planes (``solve_cp_kern``).
"""

from schedkernel.demand import (Task, TaskSystem, compute_La, compute_Lb, dbf,
                                dbf_k, eta, hyperperiod, rbf)
from schedkernel.kernel import (KernelInstance, RangeTooLarge, SolveTrace,
                                ceil_div, eval_f, phi, solve, solve_cp_kern,
                                solve_fp_kern, solve_oracle, solve_relaxation)
from schedkernel.sched import (BranchInterval, EdfResult, FpResult,
                               edf_branch_bounds, edf_test, fp_analyze,
                               reduce_edf_subproblem, reduce_fp_basic,
                               reduce_fp_improved)

__version__ = "0.1.0"

__all__ = [
    "BranchInterval", "EdfResult", "FpResult", "KernelInstance", "RangeTooLarge",
    "SolveTrace", "Task", "TaskSystem", "ceil_div", "compute_La", "compute_Lb",
    "dbf", "dbf_k", "edf_branch_bounds", "edf_test", "eta", "eval_f",
    "fp_analyze", "hyperperiod", "phi", "rbf", "reduce_edf_subproblem",
    "reduce_fp_basic", "reduce_fp_improved", "solve", "solve_cp_kern",
    "solve_fp_kern", "solve_oracle", "solve_relaxation",
]
