"""
Planning job orders for a black-box dispatcher
==============================================

The dispatcher is fixed; the only lever is the order in which jobs are
handed to it. This walk-through builds the three-type parallel-machine
shop, looks at a few hand-made orders, then lets the searches find one.
"""

from pathlib import Path

import numpy as np

from jobshop_mcts import (Evaluator, OnlineDispatcher, SearchBudget, SearchConfig, flat_mcs_plan,
                          gen_problem1, heuristic_plan, hmcts_plan, mcts_plan)
from jobshop_mcts.abstraction import detached_abstraction
from jobshop_mcts.harness import render_gantt

out = Path("demo_output")
out.mkdir(exist_ok=True)

###############################################################################
# 40 jobs: 14 of type a (2 steps), 14 of type b (3 steps), 12 of type c (4 steps),
# three identical machines, one job released per step.
p = gen_problem1(40)
dispatcher = OnlineDispatcher(p.jobs)
ev = Evaluator(p.jobs, dispatcher, bound=p.optimum)
print("known optimum:", p.optimum)

# Shortest-first leaves the long jobs for the end, where they stick out.
for name, plan in [("SPT", heuristic_plan(p.jobs, "SPT")),
                   ("random", heuristic_plan(p.jobs, "random", seed=0)),
                   ("interleaved", p.interleaved_plan),
                   ("optimal", p.optimal_plan)]:
    print(f"{name:>12}: makespan {ev.objective(plan):.0f}  ratio {ev.ratio(plan):.3f}")

###############################################################################
# Search. Budgets are simulations per planning step, so the numbers below
# do not depend on the machine.
budget = SearchBudget(step_sims=200)
flat = flat_mcs_plan(p.jobs, ev, budget, seed=1)
tree = mcts_plan(p.jobs, ev, budget, SearchConfig.from_enhancements("tr,bp"), seed=1)
hier = hmcts_plan(p.jobs, ev, detached_abstraction(p.jobs), budget, seed=1)
for name, res in [("flat MCS", flat), ("MCTS tr,bp", tree), ("H-MCTS", hier)]:
    print(f"{name:>12}: makespan {ev.objective(res.plan):.0f} after {res.simulations} simulations")

###############################################################################
# The Gantt chart marks the optimum with a black rule.
sched = dispatcher.schedule(tree.plan)
(out / "problem1_mcts.svg").write_text(render_gantt(sched, p.jobs, bound=p.optimum, title="MCTS plan"))
print("wrote", out / "problem1_mcts.svg")
