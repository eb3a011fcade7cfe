import math
from collections import Counter

import numpy as np
import pytest

from jobshop_mcts.core import InstanceError, Job, JobSet, Machine, validate_schedule
from jobshop_mcts.resources import (LoadingArea, ResourceDispatcher, ResourceLog, ResourcePool,
                                    gen_problem3, loading_violations, occupancy_violations,
                                    resource_dispatch, simulate_loading)
from jobshop_mcts.schedulers import online_dispatch
from conftest import resource_sweep as sweep


def two_job_shop():
    jobs = JobSet([Job(0, 0, (0,), {0: 5}, rack_type=0), Job(1, 0, (0,), {0: 5}, rack_type=1)], [Machine(0)])
    return jobs


def test_one_carrier_forces_rack_change():
    jobs = two_job_shop()
    pool = ResourcePool({0: 1, 1: 1}, carriers=1, rack_change_duration=10, loading=None)
    sched, log = resource_dispatch([0, 1], jobs, pool)
    assert sched.start(0) == 0
    changes = [e for e in log if e.job_id == -1]
    assert len(changes) == 1
    # second job waits for the carrier, then the 10-step swap
    assert sched.start(1) >= 5 + 10
    assert validate_schedule(sched, jobs) == []
    assert sweep(log, pool) is None


def test_two_carriers_need_no_change():
    jobs = two_job_shop()
    pool = ResourcePool({0: 1, 1: 1}, carriers=2, loading=None)
    sched, log = resource_dispatch([0, 1], jobs, pool)
    assert not [e for e in log if e.job_id == -1]
    assert sched.start(1) == 5


def test_missing_rack_type_rejected():
    jobs = two_job_shop()
    with pytest.raises(InstanceError):
        resource_dispatch([0, 1], jobs, ResourcePool({0: 1}, loading=None))


def test_pool_validation():
    with pytest.raises(ValueError):
        ResourcePool({0: -1})
    with pytest.raises(ValueError):
        LoadingArea(stations=0)


def test_simulate_loading_is_tabled():
    simulate_loading.cache_clear()
    ready = (True, False, True, True, False, False)
    assert simulate_loading(ready, 2) == (0, 2)
    assert simulate_loading(ready, 2, already=1) == (0,)
    assert simulate_loading(ready, 2) == (0, 2)
    assert simulate_loading.cache_info().hits == 1


@pytest.mark.parametrize("seed", range(12))
def test_unlimited_pool_matches_online(seed):
    jobs, _ = gen_problem3(40, seed=seed)
    plan = np.random.default_rng(seed).permutation(40)
    sched, log = resource_dispatch(plan, jobs, ResourcePool.unlimited(jobs))
    assert sched == online_dispatch(plan, jobs)
    assert not [e for e in log if e.job_id == -1]


@pytest.mark.parametrize("seed", range(6))
def test_limited_pool_invariants(seed):
    jobs, pool = gen_problem3(50, n_carriers=3, racks_per_type=1, seed=seed)
    plan = np.random.default_rng(seed + 100).permutation(50)
    sched, log = resource_dispatch(plan, jobs, pool)
    assert validate_schedule(sched, jobs) == []
    assert sweep(log, pool) is None
    assert occupancy_violations(log, pool) == []
    assert loading_violations(log, pool) == []
    assert Counter(e.load_slot for e in log if e.job_id >= 0).most_common(1)[0][1] <= 2


def test_log_csv_round_trip(tmp_path):
    jobs, pool = gen_problem3(20, seed=3)
    _, log = resource_dispatch(range(20), jobs, pool)
    text = log.to_csv(tmp_path / "log.csv")
    assert text.splitlines()[0] == "job_id,process,carrier,rack,rack_type,d_j,s_j,c_j,hold_start,load_slot"
    assert ResourceLog.from_csv(text) == log
    with pytest.raises(ValueError):
        ResourceLog.from_csv("a,b\n1,2\n")


def test_dispatcher_oracle():
    jobs, pool = gen_problem3(20, seed=5)
    d = ResourceDispatcher(jobs, pool)
    c = d.completion_times(list(range(20)))
    assert c.shape == (20,)
    assert np.array_equal(c, d.schedule(list(range(20))).completion_times(20))


def test_problem3_generator():
    jobs, pool = gen_problem3(60, seed=9)
    assert jobs.n == 60 and jobs.has_deadlines
    assert all(j.rack_type in pool.racks for j in jobs)
    assert pool.carriers == 8 and pool.loading == LoadingArea()
    assert gen_problem3(60, seed=9)[0].to_dict() == jobs.to_dict()
