import numpy as np
import pytest

from jobshop_mcts.core import Interval, Job, JobSet, Machine, Schedule


def fig1_jobs():
    """Three jobs on three machines; j3 skips m2."""
    machines = [Machine(0), Machine(1), Machine(2)]
    jobs = [
        Job(0, 0, (0, 1, 2), {0: 4, 1: 2, 2: 1}),
        Job(1, 1, (0, 1, 2), {0: 1, 1: 4, 2: 4}),
        Job(2, 2, (0, 2), {0: 1, 2: 3}),
    ]
    return JobSet(jobs, machines)


def fig1_schedule():
    I = Interval
    return Schedule({
        0: (I(0, 0, 4), I(1, 4, 6), I(2, 6, 7)),
        1: (I(0, 5, 6), I(1, 6, 10), I(2, 10, 14)),
        2: (I(0, 6, 7), I(2, 7, 10)),
    })


def random_shop(rng, n_jobs, n_machines, parallel=False, deadlines=False, p_high=9):
    """Small random shop. With ``parallel`` machines are paired into groups."""
    if parallel:
        machines = [Machine(m, group=m // 2) for m in range(n_machines)]
        reps = sorted({m - m % 2 for m in range(n_machines)})
    else:
        machines = [Machine(m) for m in range(n_machines)]
        reps = list(range(n_machines))
    jobs = []
    for j in range(n_jobs):
        k = int(rng.integers(1, len(reps) + 1))
        route = tuple(int(m) for m in rng.choice(reps, size=k, replace=False))
        proc = {m: int(rng.integers(1, p_high + 1)) for m in route}
        d = int(rng.integers(0, 4 * p_high)) if deadlines else None
        jobs.append(Job(j, int(rng.integers(3)), route, proc, deadline=d))
    return JobSet(jobs, machines)


@pytest.fixture
def fig1():
    return fig1_jobs(), fig1_schedule()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def brute_force_best(jobs, evaluator):
    """Best objective over every permutation (small instances only)."""
    from itertools import permutations
    return min(evaluator.objective(list(p)) for p in permutations(range(jobs.n)))


def independent_violations(schedule, jobs):
    """Feasibility recomputed from scratch, without the library validator."""
    problems = []
    per_machine = {}
    for job in jobs:
        ivs = schedule.assignments.get(job.id)
        if ivs is None or len(ivs) != len(job.route):
            problems.append(("stage-count", job.id))
            continue
        prev_end = None
        for iv, m in zip(ivs, job.route):
            if jobs.machine_group[iv.machine] != jobs.machine_group[m]:
                problems.append(("machine", job.id))
            if iv.end - iv.start != job.proc_times[m]:
                problems.append(("duration", job.id))
            if prev_end is not None and iv.start < prev_end:
                problems.append(("order", job.id))
            prev_end = iv.end
            per_machine.setdefault(iv.machine, []).append((iv.start, iv.end))
    for m, spans in per_machine.items():
        busy = set()
        for a, b in spans:
            for t in range(a, b):
                if t in busy:
                    problems.append(("overlap", m, t))
                busy.add(t)
    return problems


def resource_sweep(log, pool):
    """Walk every time step and count what each carrier and rack type holds."""
    from collections import Counter
    rows = [e for e in log if e.job_id >= 0]
    end = max(e.completion for e in rows)
    for t in range(end + 1):
        live = [e for e in rows if e.hold_start <= t < e.completion]
        carriers = Counter(e.carrier for e in live)
        if carriers and max(carriers.values()) > 1:
            return f"carrier double-booked at {t}"
        if len(carriers) > pool.carriers:
            return f"too many carriers at {t}"
        for rtype, c in Counter(e.rack_type for e in live).items():
            if c > pool.racks[rtype]:
                return f"rack type {rtype} over-used at {t}"
    return None


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.REPORT, key=lambda l: int(l.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
