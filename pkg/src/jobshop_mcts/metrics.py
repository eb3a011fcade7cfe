"""
Objective functions, lower bounds and score normalisation.

Every objective here is minimised. Search code works with scores in
``[0, 1]`` instead, obtained as ``bound / value`` (see
:func:`normalize_score`), so a better plan always scores higher.
"""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from .core import InstanceError, JobSet, PlanLike, Schedule

OBJECTIVES = ("makespan", "lmax", "total_lateness", "mixed")


def makespan(schedule: Schedule) -> int:
    if not schedule.assignments:
        return 0
    return max(ivs[-1].end for ivs in schedule.assignments.values())


def _latenesses(schedule: Schedule, jobs: JobSet) -> np.ndarray:
    if not jobs.has_deadlines:
        raise InstanceError("lateness needs a deadline on every job")
    ids = schedule.job_ids
    c = np.array([schedule.completion(j) for j in ids], dtype=np.int64)
    return c - jobs.deadlines[ids]


def max_lateness(schedule: Schedule, jobs: JobSet) -> int:
    """``L_max = max_j (c_j - d_j)``; negative when every job is early."""
    lat = _latenesses(schedule, jobs)
    if lat.size == 0:
        raise ValueError("maximum lateness of an empty schedule is undefined")
    return int(lat.max())


def total_lateness(schedule: Schedule, jobs: JobSet) -> int:
    return int(_latenesses(schedule, jobs).sum())


def tardiness(completion: int, deadline: int) -> int:
    return max(completion - deadline, 0)


def mixed_score(schedule: Schedule, jobs: JobSet) -> float:
    """Makespan per job plus maximum lateness (plant objective)."""
    n = len(schedule.assignments)
    if n == 0:
        raise ValueError("mixed score of an empty schedule is undefined")
    return makespan(schedule) / n + max_lateness(schedule, jobs)


def trivial_lower_bound(jobs: JobSet) -> int:
    """Larger of the longest job and the load of the busiest machine.

    A parallel group counts as one machine whose load is shared evenly,
    i.e. ``ceil(load / group size)``.
    """
    if jobs.n == 0:
        return 0
    longest = int(jobs.total_processing.max())
    load: dict = {}
    for job in jobs:
        for m, p in job.proc_times.items():
            g = jobs.machine_group[m]
            load[g] = load.get(g, 0) + p
    busiest = max(math.ceil(v / len(jobs.group_members[g])) for g, v in load.items())
    return max(longest, busiest)


def lateness_lower_bound(jobs: JobSet) -> int:
    """Lower bound on ``L_max`` valid for every feasible schedule.

    Each machine is relaxed to a single-machine problem where a job's
    deadline is tightened by the processing still ahead of it on its
    route; Jackson's earliest-due-date order solves that relaxation
    exactly. The bound is the worst machine, or the worst single job if
    that is larger.
    """
    d = jobs.deadlines
    best = int((jobs.total_processing - d).max())
    per_group: dict = {}
    for job in jobs:
        tail = 0
        for m in reversed(job.route):
            p = job.proc_times[m]
            per_group.setdefault(jobs.machine_group[m], []).append((job.deadline - tail, p))
            tail += p
    for g, items in per_group.items():
        k = len(jobs.group_members[g])
        items.sort()
        t = 0
        for due, p in items:
            t += p
            # a group of k parallel machines finishes this prefix no earlier than its load / k
            best = max(best, math.ceil(t / k) - due)
    return int(best)


def normalize_score(value: float, bound: float, shift: float = 0.0) -> float:
    """Map a minimised objective onto ``(0, 1]`` as ``(bound + shift) / (value + shift)``.

    Lateness can be negative, so lateness objectives pass a positive
    ``shift`` (the latest deadline) that makes both terms positive.
    """
    den = value + shift
    num = bound + shift
    if num <= 0:
        raise ValueError("bound + shift must be positive")
    if math.isinf(den):
        return 0.0
    if den <= 0:
        raise ValueError("value + shift must be positive")
    return min(num / den, 1.0)


class Evaluator:
    """Scores complete plans through a black-box oracle.

    Parameters
    ----------
    jobs : JobSet
    oracle : object with ``completion_times(plan) -> ndarray``
    objective : one of ``makespan``, ``lmax``, ``total_lateness``, ``mixed``
    bound : lower bound of the objective; defaults to the trivial bound
        (makespan) or :func:`lateness_lower_bound` (lateness objectives).

    Calling the evaluator returns a score in ``[0, 1]``; :meth:`objective`
    returns the raw objective and :meth:`ratio` its ratio to ``bound``.
    Instances are stateless after construction and safe to share between
    threads.
    """

    def __init__(self, jobs: JobSet, oracle, objective: str = "makespan", bound: Optional[float] = None):
        if objective not in OBJECTIVES:
            raise ValueError(f"unknown objective {objective!r}; expected one of {OBJECTIVES}")
        self.jobs = jobs
        self.oracle = oracle
        self.objective_name = objective
        self.shift = 0.0
        if objective == "makespan":
            self.bound = float(trivial_lower_bound(jobs) if bound is None else bound)
        elif objective == "mixed":
            # c_max / n >= LB / n and L_max >= its bound; shifted like lateness
            self.shift = float(jobs.deadlines.max())
            self.bound = float(trivial_lower_bound(jobs) / jobs.n + lateness_lower_bound(jobs)) if bound is None else float(bound)
        else:
            self.shift = float(jobs.deadlines.max())
            if objective == "lmax":
                self.bound = float(lateness_lower_bound(jobs) if bound is None else bound)
            else:
                self.shift *= jobs.n
                self.bound = float((jobs.total_processing - jobs.deadlines).sum() if bound is None else bound)
        self._d = jobs.deadlines if objective != "makespan" else None

    def objective_from_completions(self, c: np.ndarray) -> float:
        name = self.objective_name
        if name == "makespan":
            return float(c.max()) if c.size else 0.0
        lat = c - self._d
        if name == "lmax":
            return float(lat.max())
        if name == "total_lateness":
            return float(lat.sum())
        return float(c.max()) / c.size + float(lat.max())

    def objective(self, plan: PlanLike) -> float:
        return self.objective_from_completions(self.oracle.completion_times(plan))

    def ratio(self, plan: PlanLike) -> float:
        """Objective relative to the bound (shifted for lateness); 1 is ideal."""
        return (self.objective(plan) + self.shift) / (self.bound + self.shift)

    def score_value(self, value: float) -> float:
        return normalize_score(value, self.bound, self.shift)

    def __call__(self, plan: PlanLike) -> float:
        return self.score_value(self.objective(plan))


ScoreFn = Callable[[np.ndarray], float]
