"""
Nested Monte-Carlo search, flat and over an option hierarchy.

A level-k search tries every legal action, scores each with a level-(k-1)
search, and then plays the first move of the best sequence found so far
(level 0 is a uniform roll-out). Budgets bound each committed job: once a
step's budget is used up, nested calls fall back to a single roll-out, so
every step still finishes. At the top level the candidates are swept
repeatedly while budget remains.
"""

from __future__ import annotations

import math
import time
from typing import Callable, Optional

import numpy as np

from ..core import JobSet, Plan
from ..hierarchy import OptionHierarchy
from .policy import SearchBudget, SearchResult, StepClock
from .space import ActionSpace, SimState


class _Nested:
    def __init__(self, space: ActionSpace, score, rng, profile):
        self.space = space
        self.score = score
        self.rng = rng
        self.prefix = np.zeros(0, dtype=np.int64)
        self.sims = 0
        self.profile = profile
        self.clock: Optional[StepClock] = None

    def _eval(self, state: SimState, tail: np.ndarray):
        jobs = np.concatenate((np.asarray(state.jobs, dtype=np.int64), tail))
        self.sims += 1
        if self.clock is not None:
            self.clock.used += 1
        return float(self.score(np.concatenate((self.prefix, jobs)))), jobs

    def rollout(self, state: SimState):
        return self._eval(state, self.space.rollout(state, self.rng))

    def _follow(self, state: SimState, actions: np.ndarray, job: int) -> int:
        targets = np.append(self.space.ancestors[job] + self.space.n, job)
        return int(actions[np.isin(actions, targets)][0])

    def search(self, state: SimState, level: int):
        """Best ``(score, jobs)`` reachable from ``state``; ``jobs`` includes ``state.jobs``."""
        if level <= 0 or (self.clock is not None and self.clock.exhausted()):
            return self.rollout(state)
        space = self.space
        best_score, best_seq = -math.inf, None
        state = state.copy()
        while state.n_left:
            if self.clock is not None and self.clock.exhausted():
                sc, seq = self.rollout(state)
                if sc > best_score:
                    best_score, best_seq = sc, seq
                break
            acts = space.available(state)
            for a in acts:
                child = state.copy()
                space.apply(child, int(a))
                sc, seq = self.search(child, level - 1)
                if sc > best_score:
                    best_score, best_seq = sc, seq
            job = int(best_seq[len(state.jobs)])
            space.apply(state, self._follow(state, acts, job))
        return best_score, best_seq


def _hnmcs(jobs: JobSet, score, level: int, budget: SearchBudget, seed,
           hierarchy: Optional[OptionHierarchy], time_redistribution: bool) -> SearchResult:
    if level < 1:
        raise ValueError("nesting level must be >= 1")
    t0 = time.perf_counter()
    space = ActionSpace(jobs.n, hierarchy)
    n = jobs.n
    rng = np.random.default_rng(seed)
    profile = np.zeros(n + 1, dtype=np.int64)
    eng = _Nested(space, score, rng, profile)
    state = space.initial_state()
    best_score, best_seq = -math.inf, None  # jobs after eng.prefix
    top_best = -math.inf
    for d in range(n):
        s_lim, t_lim = (None, None) if budget is None else budget.for_step(d, n, time_redistribution)
        # a committed job takes mean_depth decisions on average; split the step budget over them
        depth = space.mean_depth
        if s_lim is not None:
            s_lim = int(math.ceil(s_lim / depth)) if s_lim > 0 else 0
        if t_lim is not None:
            t_lim = t_lim / depth
        while True:
            acts = space.available(state)
            if state.n_left > 1 or acts.size > 1:
                eng.clock = StepClock(s_lim, t_lim)
                first = True
                while first or not eng.clock.exhausted():
                    for a in rng.permutation(acts):
                        child = state.copy()
                        space.apply(child, int(a))
                        sc, seq = eng.search(child, level - 1)
                        if sc > best_score:
                            best_score, best_seq = sc, seq
                    first = False
                    if s_lim is None and t_lim is None:
                        break
                profile[d + 1] += acts.size
                eng.clock = None
                job = int(best_seq[len(state.jobs)])
                a = eng._follow(state, acts, job)
            else:
                a = int(acts[0])
            space.apply(state, a)
            if a < n:
                break
        top_best = max(top_best, best_score)
        # re-anchor the memorised sequence on the new prefix
        eng.prefix = np.append(eng.prefix, state.jobs[-1])
        best_seq = best_seq[1:] if best_seq is not None and best_seq.size and best_seq[0] == eng.prefix[-1] else None
        if best_seq is None:
            best_score = -math.inf
        state.jobs = []
    plan = eng.prefix
    final = float(score(plan))
    return SearchResult(Plan(plan.tolist()), final, eng.sims, max(top_best, final),
                        time.perf_counter() - t0, profile)


def nmcs_plan(jobs: JobSet, evaluator: Callable[[np.ndarray], float], level: int = 2,
              budget: Optional[SearchBudget] = None, seed=None,
              time_redistribution: bool = False) -> SearchResult:
    """Nested Monte-Carlo search over job orderings (level 2 by default).

    Without a budget every step makes exactly one sweep, as in the
    textbook algorithm.
    """
    return _hnmcs(jobs, evaluator, level, budget, seed, None, time_redistribution)


def hnmcs_plan(jobs: JobSet, evaluator: Callable[[np.ndarray], float], hierarchy: OptionHierarchy,
               level: int = 2, budget: Optional[SearchBudget] = None, seed=None,
               time_redistribution: bool = False) -> SearchResult:
    """Nested Monte-Carlo search whose moves descend ``hierarchy``."""
    return _hnmcs(jobs, evaluator, level, budget, seed, hierarchy, time_redistribution)
