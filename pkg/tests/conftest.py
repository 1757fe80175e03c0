"""Shared strategies and brute-force reference implementations."""

from hypothesis import strategies as st

from schedkernel.demand import Task, TaskSystem
from schedkernel.kernel import KernelInstance

TABLE1 = TaskSystem.fp([Task(20, 40, 40), Task(10, 50, 50), Task(33, 150, 150)])
TABLE2 = TaskSystem.edf([Task(6, 17, 10), Task(5, 13, 10), Task(1, 20, 31)])
TABLE1_KERNEL = KernelInstance(C=(20, 10, 33), T=(40, 50, 150), alpha=(0, 0, 0),
                               beta=0, a=1, b=150)


@st.composite
def kernel_instances(draw, max_n=5, max_period=40, max_range=400):
    """Small kernel instances; some have utilization exactly 1."""
    n = draw(st.integers(0, max_n))
    if n and draw(st.booleans()) and draw(st.booleans()):
        # Utilization exactly 1: split one common period into n parts.
        period = draw(st.integers(n, max_period))
        cuts = sorted(draw(st.sets(st.integers(1, period - 1), min_size=n - 1,
                                   max_size=n - 1))) if n > 1 else []
        C = [hi - lo for lo, hi in zip([0] + cuts, cuts + [period])]
        T = [period] * n
    else:
        # C_j <= T_j / n keeps the total utilization at most 1.
        T = draw(st.lists(st.integers(n, max_period), min_size=n, max_size=n))
        C = [draw(st.integers(1, p // n)) for p in T]
    alpha = draw(st.lists(st.integers(-40, 40), min_size=n, max_size=n))
    beta = draw(st.integers(-20, 20))
    a = draw(st.integers(-120, 120))
    b = a + draw(st.integers(-2, max_range))
    return KernelInstance(C=C, T=T, alpha=alpha, beta=beta, a=a, b=b)


@st.composite
def task_systems(draw, max_n=4, max_period=30, constrained=False, jitter=False):
    n = draw(st.integers(1, max_n))
    tasks = []
    for _ in range(n):
        T = draw(st.integers(1, max_period))
        C = draw(st.integers(1, T))
        D = draw(st.integers(C, T) if constrained else st.integers(1, 2 * max_period))
        J = draw(st.integers(0, max(0, D - 1))) if jitter else 0
        tasks.append(Task(C=C, T=T, D=D, J=J))
    return tasks


def brute_dbf(tasks, t):
    """Work of jobs released at k*T + J-shifted offsets with deadline <= t."""
    total = 0
    for tk in tasks:
        # Job k: released (at worst) at k*T - J, due at k*T - J + D.
        k = 0
        while k * tk.T + tk.dhat <= t:
            total += tk.C
            k += 1
    return total


def brute_eta(task, t1, t2):
    count = 0
    k = 0
    while task.O + k * task.T <= t2:
        r = task.O + k * task.T
        if t1 <= r and r + task.D <= t2:
            count += 1
        k += 1
    return count


def brute_edf_miss(tasks, L):
    """All t in [D̂_min, L) with dbf(t) > t, by direct job enumeration."""
    dmin = min(tk.dhat for tk in tasks)
    return [t for t in range(dmin, L) if brute_dbf(tasks, t) > t]


# (criterion, passed, detail) lines collected by the acceptance suite.
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
