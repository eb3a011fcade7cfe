"""
Black-box schedulers and the plan-producing baseline heuristics.

Two dispatchers turn a plan into a schedule:

* :func:`online_dispatch` releases jobs in plan order, at most one new job
  per time step, and never revisits the past. Each stage goes to the
  machine of its group that becomes free first.
* :func:`offline_dispatch` builds the whole schedule before execution, so a
  later job may be slotted into an earlier idle gap of a machine.

Both are exposed as oracle objects (:class:`OnlineDispatcher`,
:class:`OfflineDispatcher`) bound to one job set; search code only ever
calls ``completion_times``.
"""

from __future__ import annotations

import numpy as np

from . import _kernels
from .core import InstanceError, JobSet, Plan, PlanLike, Schedule, plan_array

RULES = ("SPT", "LPT", "EDD", "RANDOM")


class Dispatcher:
    """Common oracle interface: plan in, completion times or schedule out."""

    name = "dispatcher"

    def __init__(self, jobs: JobSet):
        self.jobs = jobs
        self._c = jobs.compiled

    def _run(self, plan: np.ndarray):
        raise NotImplementedError

    def completion_times(self, plan: PlanLike) -> np.ndarray:
        """Completion time ``c_j`` per job id for a complete plan."""
        arr = plan if isinstance(plan, np.ndarray) and plan.dtype == np.int64 else plan_array(plan, self.jobs)
        return self._run(arr)[2]

    def schedule(self, plan: PlanLike) -> Schedule:
        arr = plan_array(plan, self.jobs)
        starts, mach, _ = self._run(arr)
        return Schedule.from_arrays(self.jobs, starts, mach)

    __call__ = schedule


class OnlineDispatcher(Dispatcher):
    """On-line dispatching rule.

    ``release_gap`` is the minimum distance between the start times of
    consecutive jobs of the plan; the line admits one new job per step.
    """

    name = "online"

    def __init__(self, jobs: JobSet, release_gap: int = 1):
        super().__init__(jobs)
        if release_gap < 0:
            raise ValueError("release_gap must be non-negative")
        self.release_gap = int(release_gap)

    def _run(self, plan):
        c = self._c
        return _kernels.online_kernel(plan, c.route_groups, c.route_procs, c.route_len,
                                      c.group_ptr, c.group_machines, c.n_machines, self.release_gap)


class OfflineDispatcher(Dispatcher):
    """Off-line dispatching rule with earliest-gap insertion."""

    name = "offline"

    def _run(self, plan):
        c = self._c
        return _kernels.offline_kernel(plan, c.route_groups, c.route_procs, c.route_len,
                                       c.group_ptr, c.group_machines, c.n_machines)


def make_dispatcher(kind: str, jobs: JobSet) -> Dispatcher:
    kinds = {"online": OnlineDispatcher, "offline": OfflineDispatcher}
    try:
        return kinds[kind](jobs)
    except KeyError:
        raise ValueError(f"unknown dispatcher {kind!r}; expected one of {sorted(kinds)}") from None


def online_dispatch(plan: PlanLike, jobs: JobSet, release_gap: int = 1) -> Schedule:
    return OnlineDispatcher(jobs, release_gap).schedule(plan)


def offline_dispatch(plan: PlanLike, jobs: JobSet) -> Schedule:
    return OfflineDispatcher(jobs).schedule(plan)


def heuristic_plan(jobs: JobSet, rule: str, seed=None) -> Plan:
    """Order jobs by a classic dispatching rule.

    SPT and LPT sort by total processing time, EDD by deadline; ties go to
    the lower job id. RANDOM shuffles with ``seed``.
    """
    rule = rule.upper()
    ids = np.arange(jobs.n)
    if rule == "SPT":
        order = np.lexsort((ids, jobs.total_processing))
    elif rule == "LPT":
        order = np.lexsort((ids, -jobs.total_processing))
    elif rule == "EDD":
        if not jobs.has_deadlines:
            raise InstanceError("EDD needs a deadline on every job")
        order = np.lexsort((ids, jobs.deadlines))
    elif rule == "RANDOM":
        order = np.random.default_rng(seed).permutation(jobs.n)
    else:
        raise ValueError(f"unknown rule {rule!r}; expected one of {RULES}")
    return Plan(order.tolist())
