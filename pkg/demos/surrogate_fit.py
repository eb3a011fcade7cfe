"""
Learning the dispatcher
=======================

A small network reads a sliding window of planned jobs and guesses how
long the newest one waits. Plugged into the evaluator it replaces the
dispatcher during search.
"""

import numpy as np

from jobshop_mcts import Evaluator, OnlineDispatcher, SearchBudget, gen_problem1, mcts_plan
from jobshop_mcts.metrics import trivial_lower_bound
from jobshop_mcts.surrogate import (FeedForwardModel, JobEncoder, SurrogateOracle, generate_dataset,
                                    r_squared, stack, train)

p = gen_problem1(40)
truth = OnlineDispatcher(p.jobs)
enc = JobEncoder.fit(p.jobs)

train_set = generate_dataset(p.jobs, truth, 60, seed=0, window=8, encoder=enc)
test_set = generate_dataset(p.jobs, truth, 20, seed=1, window=8, encoder=enc)
model = FeedForwardModel([8 * enc.width, 64, 32, 1], seed=0)
model, losses = train(model, train_set, epochs=20, lr=0.02, seed=0)
print(f"loss {losses[0]:.4f} -> {losses[-1]:.4f}")
print("held-out R^2:", round(r_squared(model, *stack(test_set)), 3))

# search against the model, then check the plan on the real dispatcher
ev = Evaluator(p.jobs, SurrogateOracle(p.jobs, model, encoder=enc), bound=trivial_lower_bound(p.jobs))
res = mcts_plan(p.jobs, ev, SearchBudget(step_sims=50), seed=0)
real = Evaluator(p.jobs, truth, bound=p.optimum)
print("true makespan of surrogate-guided plan:", real.objective(res.plan), "optimum", p.optimum)
