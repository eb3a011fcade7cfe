"""
Grouping similar jobs into options
==================================

A hierarchy turns one decision among n jobs into a few smaller ones:
first pick a group, then a job inside it.
"""

import numpy as np

from jobshop_mcts import Evaluator, OnlineDispatcher, gen_problem1
from jobshop_mcts.abstraction import (detached_abstraction, integrated_abstraction, job_features,
                                      mean_shift, scale_features)
from jobshop_mcts.core import Job, JobSet, Machine

# Three jobs on a line, a - b - c. Single linkage has a tie between (a, b)
# and (b, c); input order decides it.
def line(order):
    p = {"a": 1, "b": 2, "c": 3}
    return JobSet([Job(i, 0, (0,), {0: p[k]}) for i, k in enumerate(order)], [Machine(0)])

def named(tree, order):
    return order[tree] if isinstance(tree, int) else tuple(named(t, order) for t in tree)

for order in ("abc", "cba"):
    print(f"order {order}:", named(detached_abstraction(line(order)).root, order))

# Mean-shift sees the three job types of the small synthetic shop.
p = gen_problem1(20)
x = scale_features(job_features(p.jobs))
print("clusters:", mean_shift(x))

# The integrated variant searches over which clusters to join.
h = integrated_abstraction(p.jobs, Evaluator(p.jobs, OnlineDispatcher(p.jobs)), sims=60, seed=0)
print("integrated:", h.to_json())
print("depth", h.depth(), "options", sum(1 for _ in h.options()))
