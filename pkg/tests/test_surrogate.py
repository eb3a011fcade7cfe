import numpy as np
import pytest

from jobshop_mcts.core import validate_schedule
from jobshop_mcts.instances import gen_problem1
from jobshop_mcts.metrics import Evaluator, trivial_lower_bound
from jobshop_mcts.schedulers import OnlineDispatcher, online_dispatch
from jobshop_mcts.search import SearchBudget, mcts_plan
from jobshop_mcts.surrogate import (FeedForwardModel, JobEncoder, SurrogateOracle, generate_dataset,
                                    gradient_check, r_squared, stack, train, waiting_targets, windows,
                                    within_tolerance)


def random_biases(model, rng):
    # zero biases put many units exactly on the ReLU kink, where the
    # finite difference is not a derivative
    for b in model.b:
        b[:] = rng.normal(0, 0.5, size=b.shape)


@pytest.mark.parametrize("seed", range(4))
def test_gradient_check(seed):
    rng = np.random.default_rng(seed)
    sizes = [int(rng.integers(2, 7)), int(rng.integers(2, 6)), int(rng.integers(2, 5)), 1]
    m = FeedForwardModel(sizes, seed=seed)
    random_biases(m, rng)
    X = rng.normal(size=(9, sizes[0]))
    y = rng.normal(size=9)
    assert gradient_check(m, X, y) < 1e-4


def test_windows_pad_with_zeros():
    f = np.arange(6, dtype=float).reshape(3, 2)
    w = windows(f, np.array([2, 0, 1]), 2)
    assert w.tolist() == [[0, 0, 4, 5], [4, 5, 0, 1], [0, 1, 2, 3]]


def test_waiting_targets_are_zero_without_contention():
    p = gen_problem1(20)
    plan = np.array(p.optimal_plan, dtype=np.int64)
    c = OnlineDispatcher(p.jobs).completion_times(plan)
    w = waiting_targets(p.jobs, plan, c, 1)
    assert w.min() >= 0
    # the first three jobs start on empty machines
    assert np.allclose(w[:3], 0)


def test_dataset_and_training_reduce_loss():
    p = gen_problem1(40)
    enc = JobEncoder.fit(p.jobs)
    data = generate_dataset(p.jobs, OnlineDispatcher(p.jobs), 20, seed=0, window=4, encoder=enc)
    assert len(data) == 20 * 40
    assert data[0].input.shape == (4 * enc.width,)
    assert generate_dataset(p.jobs, OnlineDispatcher(p.jobs), 0) == []
    with pytest.raises(ValueError):
        stack([])
    m = FeedForwardModel([4 * enc.width, 16, 1], seed=0)
    _, losses = train(m, data, epochs=15, lr=0.05, seed=0)
    assert losses[-1] < losses[0]
    X, y = stack(data)
    assert r_squared(m, X, y) > 0
    assert 0 <= within_tolerance(m, X, y) <= 1


def test_model_json_round_trip(tmp_path):
    m = FeedForwardModel([5, 3, 1], seed=2)
    m.meta = {"window": 4}
    path = tmp_path / "model.json"
    m.to_json(path)
    back = FeedForwardModel.from_json(path)
    X = np.random.default_rng(0).normal(size=(7, 5))
    assert np.array_equal(back.forward(X), m.forward(X))
    assert back.meta == {"window": 4}
    with pytest.raises(ValueError):
        FeedForwardModel([3])


def test_surrogate_as_evaluator_gives_feasible_plans():
    p = gen_problem1(40)
    enc = JobEncoder.fit(p.jobs)
    data = generate_dataset(p.jobs, OnlineDispatcher(p.jobs), 10, seed=1, window=4, encoder=enc)
    m, _ = train(FeedForwardModel([4 * enc.width, 8, 1], seed=1), data, epochs=3, seed=1)
    oracle = SurrogateOracle(p.jobs, m, window=4, encoder=enc)
    ev = Evaluator(p.jobs, oracle, bound=trivial_lower_bound(p.jobs))
    res = mcts_plan(p.jobs, ev, SearchBudget(step_sims=20), seed=0)
    assert sorted(res.plan) == list(range(40))
    assert validate_schedule(online_dispatch(res.plan, p.jobs), p.jobs) == []
    c = oracle.completion_times(list(res.plan))
    assert c.shape == (40,) and np.all(c > 0)
