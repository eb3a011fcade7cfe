import math

import numpy as np
import pytest

from jobshop_mcts.core import Interval, Job, JobSet, Machine, Schedule
from jobshop_mcts.instances import gen_demirkol, gen_problem1
from jobshop_mcts.metrics import (Evaluator, lateness_lower_bound, makespan, max_lateness, mixed_score,
                                  normalize_score, tardiness, total_lateness, trivial_lower_bound)
from jobshop_mcts.schedulers import OfflineDispatcher, OnlineDispatcher, offline_dispatch
from conftest import brute_force_best, random_shop


def test_makespan_fig1(fig1):
    jobs, sched = fig1
    assert makespan(sched) == 14
    assert trivial_lower_bound(jobs) == 9   # job 1 alone runs 1 + 4 + 4


def test_empty_makespan():
    assert makespan(Schedule({})) == 0


def test_lateness_values():
    jobs = JobSet([Job(0, 0, (0,), {0: 3}, deadline=5), Job(1, 0, (0,), {0: 4}, deadline=4)], [Machine(0)])
    s = Schedule({0: (Interval(0, 0, 3),), 1: (Interval(0, 3, 7),)})
    assert max_lateness(s, jobs) == 3
    assert total_lateness(s, jobs) == 1
    assert mixed_score(s, jobs) == pytest.approx(7 / 2 + 3)
    assert tardiness(3, 5) == 0 and tardiness(9, 5) == 4


def test_lateness_needs_deadlines(fig1):
    jobs, sched = fig1
    with pytest.raises(Exception):
        max_lateness(sched, jobs)


def test_trivial_bound_parallel_group():
    p = gen_problem1(20)
    # 7*2 + 7*3 + 6*4 = 59 over 3 machines
    assert trivial_lower_bound(p.jobs) == math.ceil(59 / 3)


def test_normalize_score():
    assert normalize_score(10, 10) == 1.0
    assert normalize_score(20, 10) == 0.5
    assert normalize_score(5, 10) == 1.0
    assert normalize_score(-2, -4, shift=6) == pytest.approx(0.5)
    assert normalize_score(math.inf, 10) == 0.0
    with pytest.raises(ValueError):
        normalize_score(1, -3)


def test_evaluator_consistency():
    p = gen_problem1(40)
    ev = Evaluator(p.jobs, OnlineDispatcher(p.jobs), bound=p.optimum)
    assert ev.objective(p.optimal_plan) == 41
    assert ev.ratio(p.optimal_plan) == 1.0
    assert ev(p.optimal_plan) == 1.0
    assert ev.ratio(p.interleaved_plan) == pytest.approx(42 / 41)
    assert ev(p.interleaved_plan) == pytest.approx(41 / 42)
    with pytest.raises(ValueError):
        Evaluator(p.jobs, OnlineDispatcher(p.jobs), objective="nonsense")


@pytest.mark.parametrize("seed", range(15))
def test_lateness_bound_is_valid(seed):
    rng = np.random.default_rng(seed)
    jobs = random_shop(rng, 5, 3, parallel=bool(seed % 2), deadlines=True)
    ev = Evaluator(jobs, OfflineDispatcher(jobs), "lmax")
    assert lateness_lower_bound(jobs) <= brute_force_best(jobs, ev)


@pytest.mark.parametrize("seed", range(15))
def test_makespan_bound_is_valid(seed):
    rng = np.random.default_rng(seed)
    jobs = random_shop(rng, 5, 3, parallel=bool(seed % 2))
    ev = Evaluator(jobs, OfflineDispatcher(jobs))
    assert trivial_lower_bound(jobs) <= brute_force_best(jobs, ev)


def test_lateness_ratio_and_score_agree():
    jobs = gen_demirkol(8, 3, seed=4)
    ev = Evaluator(jobs, OfflineDispatcher(jobs), "lmax")
    plan = list(range(8))
    v = ev.objective(plan)
    assert v == max_lateness(offline_dispatch(plan, jobs), jobs)
    assert ev(plan) == pytest.approx(min(1.0, 1 / ev.ratio(plan)))
