"""Flat Monte-Carlo search: a one-ply search repeated for every plan position."""

from __future__ import annotations

import time
from typing import Callable, Optional

import numpy as np

from ..core import JobSet, Plan
from .policy import BestPath, SearchBudget, SearchResult, StepClock


def flat_mcs_plan(jobs: JobSet, evaluator: Callable[[np.ndarray], float], budget: SearchBudget,
                  seed=None, best_path: bool = False, time_redistribution: bool = False) -> SearchResult:
    """At each step, sample uniform roll-outs for each candidate next job
    round-robin and commit the candidate with the best mean score.

    With ``best_path`` the next job of the best roll-out seen so far is
    committed instead.
    """
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    n = jobs.n
    plan = np.zeros(0, dtype=np.int64)
    remaining = np.ones(n, dtype=bool)
    best = BestPath()
    profile = np.zeros(n + 1, dtype=np.int64)
    sims = 0
    for d in range(n):
        cand = np.flatnonzero(remaining)
        if cand.size == 1:
            job = int(cand[0])
        else:
            s_lim, t_lim = budget.for_step(d, n, time_redistribution)
            clock = StepClock(s_lim, t_lim)
            total = np.zeros(cand.size)
            count = np.zeros(cand.size, dtype=np.int64)
            order = rng.permutation(cand.size)
            k = 0
            while clock.take():
                i = order[k % cand.size]
                k += 1
                rest = cand[cand != cand[i]]
                rng.shuffle(rest)
                full = np.concatenate((plan, [cand[i]], rest))
                s = float(evaluator(full))
                total[i] += s
                count[i] += 1
                best.offer(s, full)
            sims += clock.used
            profile[d + 1] += int((count > 0).sum())
            if best_path and best.plan is not None:
                job = int(best.plan[d])
            elif count.any():
                mean = np.where(count > 0, total / np.maximum(count, 1), -np.inf)
                job = int(cand[np.argmax(mean)])
            else:
                job = int(rng.choice(cand))
        plan = np.append(plan, job)
        remaining[job] = False
    final = float(evaluator(plan))
    return SearchResult(Plan(plan.tolist()), final, sims, max(best.score, final),
                        time.perf_counter() - t0, profile)
