import math

import numpy as np
import pytest

from jobshop_mcts.core import Job, JobSet, Machine
from jobshop_mcts.hierarchy import OptionHierarchy
from jobshop_mcts.instances import gen_demirkol, gen_problem1
from jobshop_mcts.metrics import Evaluator
from jobshop_mcts.schedulers import OfflineDispatcher, OnlineDispatcher
from jobshop_mcts.search import (ActionSpace, BestPath, BigramHistory, SearchBudget, SearchConfig,
                                 StepClock, TreeSearch, flat_mcs_plan, hmcts_plan, hnmcs_plan, mcts_plan,
                                 nmcs_plan, parallel_search, time_for_step, uct_ph_value, uct_value)
from conftest import brute_force_best, random_shop


@pytest.fixture(scope="module")
def p1():
    p = gen_problem1(40)
    return p, Evaluator(p.jobs, OnlineDispatcher(p.jobs), bound=p.optimum)


def test_uct_formula():
    assert uct_value(0.4, 4, 16, 0.5) == pytest.approx(0.4 + 0.5 * math.sqrt(math.log(16) / 4))
    assert uct_ph_value(0.4, 4, 16, 0.5, 0.8, 5) == pytest.approx(
        uct_value(0.4, 4, 16, 0.5) + 0.8 * 5 / (4 - 0.4 + 1))


def test_time_redistribution_endpoints():
    assert time_for_step(0, 2.0, 100) == pytest.approx(3.8)
    assert time_for_step(100, 2.0, 100) == pytest.approx(0.2)
    with pytest.raises(ValueError):
        time_for_step(0, 1.0, 0)


def test_budget_validation():
    with pytest.raises(ValueError):
        SearchBudget()
    with pytest.raises(ValueError):
        SearchBudget(step_sims=-1)
    b = SearchBudget(step_sims=100)
    assert b.for_step(0, 10) == (100, None)
    assert b.for_step(0, 10, True) == (190, None)
    assert b.for_step(10, 10, True) == (10, None)
    assert SearchBudget(step_sims=1).for_step(10, 10, True)[0] == 1


def test_step_clock_counts():
    c = StepClock(3, None)
    assert [c.take() for _ in range(5)] == [True, True, True, False, False]
    assert c.used == 3 and c.exhausted


def test_enhancement_parsing():
    c = SearchConfig.from_enhancements("tr, bp,ph,par-tree", threads=4)
    assert (c.time_redistribution, c.best_path, c.progressive_history, c.parallel, c.threads) == \
        (True, True, True, "tree", 4)
    assert c.label == "tr,bp,ph,par-tree"
    assert SearchConfig.from_enhancements("").label == "none"
    assert SearchConfig.from_enhancements("tr").threads == 1
    with pytest.raises(ValueError):
        SearchConfig.from_enhancements("xyz")
    with pytest.raises(ValueError):
        SearchConfig.from_enhancements("par-root,par-tree")


def test_best_path_keeps_first_of_ties():
    b = BestPath()
    assert b.offer(0.5, np.array([1, 0]))
    assert not b.offer(0.5, np.array([0, 1]))
    assert list(b.plan) == [1, 0]
    assert b.offer(0.6, np.array([0, 1]))


def test_bigram_history_means():
    h = BigramHistory(3)
    h.update(np.array([0, 1, 2]), 1.0)
    h.update(np.array([0, 2, 1]), 0.0)
    m = h.mean(0, np.array([1, 2]))
    assert list(m) == [1.0, 0.0]
    assert h.mean(-1, np.array([0]))[0] == pytest.approx(0.5)
    assert h.mean(2, np.array([0]))[0] == 0.0


def test_action_space_flat_and_hierarchy():
    flat = ActionSpace(4)
    assert flat.flat
    assert sorted(flat.available(flat.initial_state())) == [0, 1, 2, 3]
    h = OptionHierarchy(((0, 1), (2, 3)))
    sp = ActionSpace(4, h)
    s = sp.initial_state()
    acts = sp.available(s)
    assert all(a >= 4 for a in acts) and acts.size == 2
    sp.apply(s, int(acts[0]))
    inner = sp.available(s)
    assert set(inner) <= {0, 1, 2, 3} and inner.size == 2
    rng = np.random.default_rng(0)
    tail = sp.rollout(s, rng)
    assert sorted(tail) == [0, 1, 2, 3]
    # the job under the pending option comes first
    assert tail[0] in inner


def test_action_space_rollout_is_permutation():
    h = OptionHierarchy((((0, 1), 2), (3, (4, 5, 6))))
    sp = ActionSpace(7, h)
    rng = np.random.default_rng(1)
    for _ in range(100):
        assert sorted(sp.rollout(sp.initial_state(), rng)) == list(range(7))


PLANNERS = {
    "flat": lambda j, e, b, s: flat_mcs_plan(j, e, b, seed=s),
    "mcts": lambda j, e, b, s: mcts_plan(j, e, b, seed=s),
    "mcts-enh": lambda j, e, b, s: mcts_plan(j, e, b, SearchConfig.from_enhancements("tr,bp,ph"), seed=s),
    "root": lambda j, e, b, s: parallel_search("root", 3, j, e, b, seed=s),
    "tree": lambda j, e, b, s: parallel_search("tree", 3, j, e, b, seed=s),
    "nmcs": lambda j, e, b, s: nmcs_plan(j, e, 1, b, seed=s),
    "hmcts": lambda j, e, b, s: hmcts_plan(j, e, OptionHierarchy(((0, 1, 2), tuple(range(3, j.n)))), b, seed=s),
    "hnmcs": lambda j, e, b, s: hnmcs_plan(j, e, OptionHierarchy(((0, 1, 2), tuple(range(3, j.n)))), 1, b, seed=s),
}


@pytest.mark.parametrize("name", PLANNERS)
def test_planners_emit_complete_plans(name, p1):
    p, ev = p1
    res = PLANNERS[name](p.jobs, ev, SearchBudget(step_sims=30), 3)
    assert sorted(res.plan) == list(range(40))
    assert res.score == pytest.approx(ev(res.plan))
    assert res.best_score >= res.score - 1e-12
    assert res.simulations > 0


@pytest.mark.parametrize("name", ["flat", "mcts", "nmcs", "hmcts"])
def test_planners_are_reproducible(name, p1):
    p, ev = p1
    a = PLANNERS[name](p.jobs, ev, SearchBudget(step_sims=20), 11)
    b = PLANNERS[name](p.jobs, ev, SearchBudget(step_sims=20), 11)
    assert list(a.plan) == list(b.plan)


@pytest.mark.parametrize("name", ["flat", "mcts", "nmcs"])
def test_planners_beat_random_on_problem1(name, p1):
    p, ev = p1
    rng = np.random.default_rng(0)
    rand = np.mean([ev.objective(rng.permutation(40)) for _ in range(200)])
    res = PLANNERS[name](p.jobs, ev, SearchBudget(step_sims=200), 0)
    assert ev.objective(res.plan) < rand


def test_time_budget_is_respected(p1):
    p, ev = p1
    res = mcts_plan(p.jobs, ev, SearchBudget(step_seconds=0.002), seed=0)
    assert res.wall_time < 40 * 0.002 + 2.0


def test_tree_parallel_root_visits_equal_budget():
    p = gen_problem1(20)
    ev = Evaluator(p.jobs, OnlineDispatcher(p.jobs))
    eng = TreeSearch(ActionSpace(20), ev, SearchConfig(parallel="tree", threads=4), np.random.default_rng(0))
    rngs = [np.random.default_rng(i) for i in range(4)]
    eng.run_step(StepClock(500, None), 4, rngs)
    assert eng.root.visits == 500 == eng.root.n.sum() == eng.simulations


def test_single_job_instance():
    jobs = JobSet([Job(0, 0, (0,), {0: 3})], [Machine(0)])
    ev = Evaluator(jobs, OnlineDispatcher(jobs))
    for f in ("flat", "mcts", "nmcs"):
        assert list(PLANNERS[f](jobs, ev, SearchBudget(step_sims=5), 0).plan) == [0]


def test_zero_budget_still_plans(p1):
    p, ev = p1
    for f in ("flat", "mcts"):
        assert sorted(PLANNERS[f](p.jobs, ev, SearchBudget(step_sims=0), 0).plan) == list(range(40))


def test_exhaustive_tree_finds_optimum():
    rng = np.random.default_rng(3)
    jobs = random_shop(rng, 5, 3)
    ev = Evaluator(jobs, OfflineDispatcher(jobs))
    res = mcts_plan(jobs, ev, SearchBudget(step_sims=2000), SearchConfig(best_path=True), seed=0)
    assert ev.objective(res.plan) == brute_force_best(jobs, ev)


def test_depth_profile_shapes(p1):
    p, ev = p1
    flat = flat_mcs_plan(p.jobs, ev, SearchBudget(step_sims=60), seed=0).depth_profile
    tree = mcts_plan(p.jobs, ev, SearchBudget(step_sims=60), seed=0).depth_profile
    assert flat.shape == tree.shape == (41,)
    assert tree.sum() > flat.sum() > 0
