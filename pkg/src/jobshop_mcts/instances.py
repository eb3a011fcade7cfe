"""
Benchmark instance generators.

Problem 1 is the synthetic three-type parallel-machine shop with a known
optimum; Problem 2 is the Demirkol-style random job shop with deadlines.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .core import InstanceError, Job, JobSet, Machine, Plan
from .metrics import trivial_lower_bound

# job type -> processing time; ratio of counts a:b:c = 7:7:6
P1_DURATIONS = {0: 2, 1: 3, 2: 4}
P1_SHARES = (7, 7, 6)
P1_FULL_SIZE = 2000


class Problem1(NamedTuple):
    jobs: JobSet
    optimum: int
    optimal_plan: Plan
    interleaved_plan: Plan


def problem1_counts(n_jobs: int) -> tuple:
    if n_jobs <= 0:
        raise InstanceError("Problem 1 needs at least one job")
    if n_jobs % 20:
        raise InstanceError(f"{n_jobs} jobs cannot be split 7:7:6 into whole counts")
    k = n_jobs // 20
    return tuple(s * k for s in P1_SHARES)


def problem1_jobset(counts: tuple) -> JobSet:
    """Three identical parallel machines; job ids run a's, then b's, then c's."""
    machines = [Machine(m, group=0) for m in range(3)]
    jobs = []
    for jt, cnt in enumerate(counts):
        for _ in range(cnt):
            jobs.append(Job(len(jobs), jt, (0,), {0: P1_DURATIONS[jt]}))
    return JobSet(jobs, machines)


def gen_problem1(n_jobs: int = P1_FULL_SIZE) -> Problem1:
    """Problem 1 with ``n_jobs`` jobs (a multiple of 20).

    Under the on-line dispatcher every job ``k`` of a plan starts no
    earlier than step ``k``, so no plan beats ``n - 1 + 2``. Putting each
    type-c job right before a type-a job, then all b's, then the leftover
    a's keeps every machine busy and ends on a type-a job, which reaches
    that bound. ``interleaved_plan`` is the plain c,a,b interleave appended to
    the surplus a's and b's; it has no idle time either but ends on a
    type-b job, one step later.
    """
    na, nb, nc = problem1_counts(n_jobs)
    jobs = problem1_jobset((na, nb, nc))
    a = list(range(na))
    b = list(range(na, na + nb))
    c = list(range(na + nb, na + nb + nc))
    optimal = []
    for i in range(nc):
        optimal += [c[i], a[i]]
    optimal += b + a[nc:]
    mixed = a[nc:] + b[nc:]
    for i in range(nc):
        mixed += [c[i], a[i], b[i]]
    return Problem1(jobs, n_jobs + 1, Plan(optimal), Plan(mixed))


def demirkol_deadline_window(mu: float, T: float, R: float) -> tuple:
    """Deadline range centred at ``mu (1 - T)`` with width ``mu R``."""
    return mu * (1 - T - R / 2), mu * (1 - T + R / 2)


def gen_demirkol(n_jobs: int, n_machines: int, seed=None, T: float = 0.2, R: float = 0.8,
                 p_low: int = 1, p_high: int = 200) -> JobSet:
    """Random job shop: every job visits every machine in a random order.

    Processing times are uniform integers in ``[p_low, p_high]``; deadlines
    are uniform integers in the window of :func:`demirkol_deadline_window`
    around the instance's trivial lower bound, clipped at zero.
    """
    if n_jobs < 1 or n_machines < 1:
        raise InstanceError("need at least one job and one machine")
    if T < 0 or R < 0:
        raise InstanceError("T and R must be non-negative")
    rng = np.random.default_rng(seed)
    machines = [Machine(m) for m in range(n_machines)]
    routes = [rng.permutation(n_machines) for _ in range(n_jobs)]
    procs = rng.integers(p_low, p_high + 1, size=(n_jobs, n_machines))
    jobs = [Job(j, 0, tuple(int(m) for m in routes[j]), {m: int(procs[j, m]) for m in range(n_machines)})
            for j in range(n_jobs)]
    mu = trivial_lower_bound(JobSet(jobs, machines))
    lo, hi = demirkol_deadline_window(mu, T, R)
    lo_i, hi_i = max(math.ceil(lo), 0), max(math.floor(hi), 0)
    deadlines = rng.integers(lo_i, max(hi_i, lo_i) + 1, size=n_jobs)
    jobs = [Job(j.id, j.job_type, j.route, j.proc_times, deadline=int(deadlines[j.id])) for j in jobs]
    return JobSet(jobs, machines)


def with_random_deadlines(jobs: JobSet, seed=None, T: float = 0.2, R: float = 0.8) -> JobSet:
    """Copy of ``jobs`` with deadlines drawn like :func:`gen_demirkol`."""
    rng = np.random.default_rng(seed)
    lo, hi = demirkol_deadline_window(trivial_lower_bound(jobs), T, R)
    lo_i, hi_i = max(math.ceil(lo), 0), max(math.floor(hi), 0)
    d = rng.integers(lo_i, max(hi_i, lo_i) + 1, size=jobs.n)
    return JobSet([Job(j.id, j.job_type, j.route, j.proc_times, int(d[j.id]), j.rack_type) for j in jobs],
                  jobs.machines)
