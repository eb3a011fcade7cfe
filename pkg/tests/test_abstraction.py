import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jobshop_mcts.abstraction import (default_bandwidth, detached_abstraction, distance_matrix,
                                      integrated_abstraction, job_features, mean_shift, pairwise_distance,
                                      scale_features)
from jobshop_mcts.core import InstanceError, Job, JobSet, Machine
from jobshop_mcts.hierarchy import OptionHierarchy
from jobshop_mcts.instances import gen_problem1
from jobshop_mcts.metrics import Evaluator
from jobshop_mcts.schedulers import OnlineDispatcher


def line_triple(order):
    """Jobs a, b, c on a line: d(a,b) = d(b,c) = 1, d(a,c) = 2."""
    p = {"a": 1, "b": 2, "c": 3}
    jobs = [Job(i, 0, (0,), {0: p[name]}) for i, name in enumerate(order)]
    return JobSet(jobs, [Machine(0)])


def equidistant_triple():
    # one-hot rack types put the three jobs at equal mutual distance
    return JobSet([Job(i, 0, (0,), {0: 2}, rack_type=i) for i in range(3)], [Machine(0)])


def test_distances():
    assert pairwise_distance([0, 0], [3, 4]) == 5
    assert pairwise_distance([1, 0], [0, 1], "cosine") == pytest.approx(1.0)
    with pytest.raises(ValueError):
        pairwise_distance([0, 0], [1, 1], "cosine")
    with pytest.raises(ValueError):
        pairwise_distance([0], [1], "chebyshev-ish")
    x = np.array([[0.0, 0.0], [3.0, 4.0], [6.0, 8.0]])
    d = distance_matrix(x)
    assert d[0, 2] == 10 and np.allclose(d, d.T)


def test_features():
    jobs = JobSet([Job(0, 0, (0,), {0: 2}, deadline=5, rack_type=3), Job(1, 0, (0,), {0: 4}, rack_type=7)],
                  [Machine(0)])
    f = job_features(jobs)
    assert f.tolist() == [[2, 5, 1, 0], [4, 6, 0, 1]]
    s = scale_features(f)
    assert s.min() == 0 and s.max() == 1


def test_detached_both_orders():
    assert detached_abstraction(line_triple("abc")).root == ((0, 1), 2)
    # order c, b, a: job 0 is c, job 1 is b; c and b join first
    assert detached_abstraction(line_triple("cba")).root == ((0, 1), 2)
    names_abc = _named(detached_abstraction(line_triple("abc")).root, "abc")
    names_cba = _named(detached_abstraction(line_triple("cba")).root, "cba")
    assert names_abc == (("a", "b"), "c")
    assert names_cba == (("c", "b"), "a")
    assert names_abc != names_cba


def _named(tree, order):
    if isinstance(tree, int):
        return order[tree]
    return tuple(_named(t, order) for t in tree)


def test_detached_is_binary_and_complete():
    p = gen_problem1(20)
    h = detached_abstraction(p.jobs)
    assert sorted(h.leaves()) == list(range(20))
    assert all(len(o) == 2 for o in h.options())


def test_integrated_equidistant_is_balanced():
    jobs = equidistant_triple()
    ev = Evaluator(jobs, OnlineDispatcher(jobs))
    h = integrated_abstraction(jobs, ev, sims=30, seed=0)
    assert h.root == (0, 1, 2)
    assert detached_abstraction(jobs).root == ((0, 1), 2)


def test_integrated_problem1_groups_types():
    p = gen_problem1(40)
    ev = Evaluator(p.jobs, OnlineDispatcher(p.jobs), bound=p.optimum)
    h = integrated_abstraction(p.jobs, ev, sims=40, seed=1)
    h.check_jobs(40)
    types = {p.jobs[j].job_type: j for j in range(40)}
    # every job type forms one option somewhere in the tree
    for t in range(3):
        members = tuple(j.id for j in p.jobs if j.job_type == t)
        assert any(set(o) == set(members) for o in h.options() if all(isinstance(x, int) for x in o))


def test_integrated_single_job():
    jobs = JobSet([Job(0, 0, (0,), {0: 2})], [Machine(0)])
    assert integrated_abstraction(jobs, Evaluator(jobs, OnlineDispatcher(jobs))).root == 0
    with pytest.raises(InstanceError):
        detached_abstraction(JobSet([], [Machine(0)]))


def test_mean_shift_edge_cases():
    assert mean_shift(np.zeros((0, 2))).size == 0
    assert list(mean_shift(np.ones((4, 2)))) == [0, 0, 0, 0]
    with pytest.raises(ValueError):
        mean_shift(np.ones(3))
    with pytest.raises(ValueError):
        mean_shift(np.ones((3, 2)), bandwidth=0)
    assert default_bandwidth(np.ones((3, 2))) == 1.0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_mean_shift_keeps_identical_rows_together(seed):
    rng = np.random.default_rng(seed)
    base = rng.normal(size=(int(rng.integers(2, 6)), 3))
    x = base[rng.integers(0, base.shape[0], size=20)]
    labels = mean_shift(x)
    for i in range(20):
        for j in range(20):
            if np.array_equal(x[i], x[j]):
                assert labels[i] == labels[j]
    # labels are numbered by first appearance
    _, first = np.unique(labels, return_index=True)
    assert list(labels[np.sort(first)]) == list(range(labels.max() + 1))


def test_hierarchy_validation_and_json(tmp_path):
    with pytest.raises(ValueError):
        OptionHierarchy(((0, 1), 1))
    with pytest.raises(ValueError):
        OptionHierarchy(((0,), 1))
    h = OptionHierarchy(((2, 0), (1, (3, 4))))
    assert h.depth() == 3
    with pytest.raises(ValueError):
        h.check_jobs(6)
    path = tmp_path / "h.json"
    h.to_json(path)
    assert OptionHierarchy.from_json(path) == h
    assert OptionHierarchy.flat(1).root == 0
    assert OptionHierarchy.flat(3).root == (0, 1, 2)
