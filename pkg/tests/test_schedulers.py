import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jobshop_mcts.core import InstanceError, Job, JobSet, Machine, validate_schedule
from jobshop_mcts.instances import gen_demirkol, gen_problem1
from jobshop_mcts.metrics import makespan
from jobshop_mcts.schedulers import (OfflineDispatcher, OnlineDispatcher, heuristic_plan,
                                     offline_dispatch, online_dispatch)
from conftest import random_shop


def test_problem1_small_spt_and_reference_plans():
    p = gen_problem1(40)
    assert makespan(online_dispatch(heuristic_plan(p.jobs, "SPT"), p.jobs)) == 46
    assert makespan(online_dispatch(p.interleaved_plan, p.jobs)) == 42
    assert makespan(online_dispatch(p.optimal_plan, p.jobs)) == 41


def test_single_job():
    jobs = JobSet([Job(0, 0, (0,), {0: 4})], [Machine(0)])
    for f in (online_dispatch, offline_dispatch):
        s = f([0], jobs)
        assert s.start(0) == 0 and makespan(s) == 4


def test_incomplete_plan_rejected():
    p = gen_problem1(20)
    with pytest.raises(InstanceError):
        online_dispatch([0, 1], p.jobs)


def test_offline_single_machine_sums():
    jobs = JobSet([Job(j, 0, (0,), {0: d}) for j, d in enumerate((3, 5, 2))], [Machine(0)])
    assert makespan(offline_dispatch([2, 0, 1], jobs)) == 10


def test_offline_disjoint_machines():
    jobs = JobSet([Job(0, 0, (0,), {0: 3}), Job(1, 0, (1,), {1: 7})], [Machine(0), Machine(1)])
    assert makespan(offline_dispatch([0, 1], jobs)) == 7


def test_offline_fills_gaps():
    # job 1 only needs m1, which idles while job 0 runs on m0 first
    jobs = JobSet([Job(0, 0, (0, 1), {0: 5, 1: 2}), Job(1, 0, (1,), {1: 4})], [Machine(0), Machine(1)])
    s = offline_dispatch([0, 1], jobs)
    assert s.start(1) == 0
    assert online_dispatch([0, 1], jobs).start(1) >= 1


def test_lpt_denser_than_spt_on_demirkol():
    wins = 0
    for seed in range(10):
        jobs = gen_demirkol(20, 10, seed=seed)
        d = OfflineDispatcher(jobs)
        lpt = d.completion_times(heuristic_plan(jobs, "LPT")).max()
        spt = d.completion_times(heuristic_plan(jobs, "SPT")).max()
        wins += lpt < spt
    assert wins >= 8


def test_heuristic_rules():
    p = gen_problem1(20)
    plan = heuristic_plan(p.jobs, "SPT")
    types = [p.jobs[j].job_type for j in plan]
    assert types == sorted(types)
    same = JobSet([Job(j, 0, (0,), {0: 2}) for j in range(4)], [Machine(0)])
    assert list(heuristic_plan(same, "SPT")) == [0, 1, 2, 3]
    dl = JobSet([Job(j, 0, (0,), {0: 1}, deadline=d) for j, d in enumerate((5, 3, 9))], [Machine(0)])
    assert list(heuristic_plan(dl, "EDD")) == [1, 0, 2]
    with pytest.raises(InstanceError):
        heuristic_plan(same, "EDD")
    assert list(heuristic_plan(same, "RANDOM", seed=3)) == list(heuristic_plan(same, "RANDOM", seed=3))
    with pytest.raises(ValueError):
        heuristic_plan(same, "FIFO")


def test_online_starts_follow_plan_order(rng):
    for _ in range(50):
        jobs = random_shop(rng, 8, 4, parallel=bool(rng.integers(2)))
        plan = rng.permutation(jobs.n)
        s = online_dispatch(plan, jobs)
        starts = [s.start(int(j)) for j in plan]
        assert all(b >= a + 1 for a, b in zip(starts, starts[1:]))


def test_determinism(rng):
    jobs = random_shop(rng, 10, 4, parallel=True)
    plan = rng.permutation(jobs.n)
    for f in (online_dispatch, offline_dispatch):
        assert f(plan, jobs) == f(plan, jobs)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 8), st.integers(1, 5))
def test_offline_dominates_online_without_parallel_groups(seed, n, m):
    rng = np.random.default_rng(seed)
    jobs = random_shop(rng, n, m)
    plan = rng.permutation(n)
    assert makespan(offline_dispatch(plan, jobs)) <= makespan(online_dispatch(plan, jobs))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 8), st.integers(1, 6), st.booleans())
def test_random_plans_feasible(seed, n, m, parallel):
    rng = np.random.default_rng(seed)
    jobs = random_shop(rng, n, m, parallel=parallel)
    plan = rng.permutation(n)
    for f in (online_dispatch, offline_dispatch):
        s = f(plan, jobs)
        assert validate_schedule(s, jobs) == []
        for j in jobs:
            assert s.completion(j.id) - s.start(j.id) >= max(j.proc_times.values())
