"""
Monte-Carlo tree search over job orderings.

One tree node per decision. After each step's budget the search commits
one job and restarts from the matching child, keeping its subtree. Plain
MCTS and H-MCTS share this engine; they differ only in the action space
(see :mod:`.space`).
"""

from __future__ import annotations

import math
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Optional

import numpy as np

from ..core import JobSet, Plan
from ..hierarchy import OptionHierarchy
from .policy import BestPath, BigramHistory, SearchBudget, SearchConfig, SearchResult, StepClock
from .space import ActionSpace, SimState

Score = Callable[[np.ndarray], float]


class Node:
    __slots__ = ("action", "parent", "idx", "ctx", "actions", "kids", "n", "w",
                 "untried", "visits", "total", "lock")

    def __init__(self, action: int, parent: Optional["Node"], idx: int, ctx: int,
                 actions: np.ndarray, rng: np.random.Generator):
        self.action = action
        self.parent = parent
        self.idx = idx
        self.ctx = ctx
        self.actions = actions
        k = actions.size
        self.kids = [None] * k
        self.n = np.zeros(k, dtype=np.int64)
        self.w = np.zeros(k, dtype=np.float64)
        self.untried = rng.permutation(k).tolist() if k else []
        self.visits = 0
        self.total = 0.0
        self.lock = threading.Lock()

    @property
    def terminal(self) -> bool:
        return self.actions.size == 0

    @property
    def mean(self) -> float:
        return self.total / self.visits if self.visits else 0.0

    def child_means(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.n > 0, self.w / np.maximum(self.n, 1), -np.inf)


class TreeSearch:
    """Stateful MCTS engine that plans one job per :meth:`step`."""

    def __init__(self, space: ActionSpace, score: Score, config: SearchConfig, rng: np.random.Generator):
        self.space = space
        self.score = score
        self.cfg = config
        self.rng = rng
        self.prefix = np.zeros(0, dtype=np.int64)
        self.state = space.initial_state()
        self.best = BestPath()
        self.history = BigramHistory(space.n_actions) if config.progressive_history else None
        self.simulations = 0
        self.profile = np.zeros(space.n + 1, dtype=np.int64)
        self._lock = threading.Lock()
        self.root = self._new_node(-1, None, -1, self.state.copy(), rng)

    # -- tree construction -------------------------------------------------

    def _new_node(self, action, parent, idx, state: SimState, rng) -> Node:
        acts = self.space.available(state)
        self.profile[len(self.prefix) + len(state.jobs)] += 1
        return Node(action, parent, idx, state.ctx, acts, rng)

    def _select(self, node: Node) -> int:
        n = node.n.astype(np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            mean = node.w / n
            v = mean + self.cfg.C * np.sqrt(math.log(max(node.visits, 1)) / n)
            if self.history is not None:
                sa = self.history.mean(node.action, node.actions)
                v = v + sa * self.cfg.W / (n - mean + 1)
        # a child still being expanded by another worker has n == 0
        v[node.n == 0] = np.inf
        return int(np.argmax(v))

    # -- one simulation ----------------------------------------------------

    def simulate(self, rng: np.random.Generator) -> float:
        space = self.space
        node = self.root
        state = self.state.copy()
        path = [node]
        acts = []
        while not node.terminal:
            state.ctx = node.ctx
            child = None
            with node.lock:
                if node.untried:
                    i = node.untried.pop()
                    a = int(node.actions[i])
                    space.apply(state, a)
                    child = self._new_node(a, node, i, state, rng)
                    node.kids[i] = child
            if child is not None:
                acts.append(a)
                path.append(child)
                break
            i = self._select(node)
            a = int(node.actions[i])
            space.apply(state, a)
            acts.append(a)
            node = node.kids[i]
            path.append(node)
        if path[-1].terminal:
            tail = np.zeros(0, dtype=np.int64)
        else:
            state.ctx = path[-1].ctx
            tail = space.rollout(state, rng)
        plan = np.concatenate((self.prefix, np.asarray(state.jobs, dtype=np.int64), tail))
        s = float(self.score(plan))
        for nd in reversed(path):
            with nd.lock:
                nd.visits += 1
                nd.total += s
                if nd.parent is not None:
                    nd.parent.n[nd.idx] += 1
                    nd.parent.w[nd.idx] += s
        self.best.offer(s, plan)
        if self.history is not None:
            seq = np.concatenate((np.asarray(acts, dtype=np.int64), tail))
            self.history.update(seq, s, self.root.action)
        with self._lock:
            self.simulations += 1
        return s

    # -- stepping ----------------------------------------------------------

    def run_step(self, clock: StepClock, threads: int = 1, rngs=None) -> None:
        if threads == 1:
            rng = self.rng if rngs is None else rngs[0]
            while clock.take():
                self.simulate(rng)
            return

        def worker(r):
            while clock.take():
                self.simulate(r)

        with ThreadPoolExecutor(threads) as ex:
            list(ex.map(worker, rngs))

    def choose_job(self) -> int:
        """Job to commit from the current root."""
        d = len(self.prefix)
        if self.cfg.best_path and self.best.plan is not None:
            return int(self.best.plan[d])
        node = self.root
        state = self.state.copy()
        while True:
            state.ctx = node.ctx
            means = node.child_means()
            if np.isfinite(means).any():
                i = int(np.argmax(means))
            else:
                i = int(self.rng.integers(node.actions.size))
            a = int(node.actions[i])
            self.space.apply(state, a)
            if a < self.space.n:
                return a
            node = node.kids[i]
            if node is None:
                return int(self.space.rollout(state, self.rng)[0])

    def advance(self, job: int) -> None:
        """Commit ``job`` and re-root at the matching subtree."""
        space = self.space
        node = self.root
        state = self.state
        targets = np.append(space.ancestors[job] + space.n, job)
        while node is not None:
            state.ctx = node.ctx
            hit = np.flatnonzero(np.isin(node.actions, targets))
            if hit.size == 0:
                node = None
                break
            i = int(hit[0])
            a = int(node.actions[i])
            space.apply(state, a)
            node = node.kids[i]
            if a < space.n:
                break
        if state.remaining[job]:
            space.apply(state, job)
        state.jobs = []
        self.prefix = np.append(self.prefix, job)
        if node is None:
            node = self._new_node(job, None, -1, state.copy(), self.rng)
        node.parent, node.idx = None, -1
        self.root = node

    @property
    def done(self) -> bool:
        return self.state.n_left == 0


def _engines(space, score, config, seed, k):
    seqs = np.random.SeedSequence(seed).spawn(k + 1)
    return [TreeSearch(space, score, config, np.random.default_rng(s)) for s in seqs[:k]], \
        [np.random.default_rng(s) for s in seqs[k:]]


def _search(jobs: JobSet, score: Score, budget: SearchBudget, config: SearchConfig, seed,
            hierarchy: Optional[OptionHierarchy]) -> SearchResult:
    t0 = time.perf_counter()
    space = ActionSpace(jobs.n, hierarchy)
    n = jobs.n
    mode = config.parallel
    k = config.threads if mode == "root" else 1
    engines, _ = _engines(space, score, config, seed, k)
    tree_rngs = None
    if mode == "tree":
        tree_rngs = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(config.threads + 1)[1:]]
    main = engines[0]
    while not main.done:
        d = len(main.prefix)
        if main.state.n_left > 1:
            sims, secs = budget.for_step(d, n, config.time_redistribution)
            if mode == "tree":
                main.run_step(StepClock(sims, secs), config.threads, tree_rngs)
            elif mode == "root" and k > 1:
                clocks = [StepClock(sims, secs) for _ in engines]
                with ThreadPoolExecutor(k) as ex:
                    list(ex.map(lambda ec: ec[0].run_step(ec[1]), zip(engines, clocks)))
            else:
                main.run_step(StepClock(sims, secs))
        if mode == "root":
            lead = max(engines, key=lambda e: e.best.score)
            if lead.best.plan is not None:
                job = int(lead.best.plan[d])
                shared = lead.best.copy()
                for e in engines:
                    e.best = shared.copy()
            else:
                job = main.choose_job()
        else:
            job = main.choose_job()
        for e in engines:
            e.advance(job)
    plan = main.prefix
    final = float(score(plan))
    sims = sum(e.simulations for e in engines)
    best = max(max(e.best.score for e in engines), final)
    profile = np.sum([e.profile for e in engines], axis=0)
    return SearchResult(Plan(plan.tolist()), final, sims, best, time.perf_counter() - t0, profile)


def mcts_plan(jobs: JobSet, evaluator: Score, budget: SearchBudget,
              config: Optional[SearchConfig] = None, seed=None) -> SearchResult:
    """Plan by MCTS with UCT selection and uniform roll-outs."""
    return _search(jobs, evaluator, budget, config or SearchConfig(), seed, None)


def hmcts_plan(jobs: JobSet, evaluator: Score, hierarchy: OptionHierarchy, budget: SearchBudget,
               config: Optional[SearchConfig] = None, seed=None) -> SearchResult:
    """MCTS whose decisions descend ``hierarchy`` option by option down to a job."""
    return _search(jobs, evaluator, budget, config or SearchConfig(), seed, hierarchy)


def parallel_search(mode: str, threads: int, jobs: JobSet, evaluator: Score, budget: SearchBudget,
                    config: Optional[SearchConfig] = None, seed=None,
                    hierarchy: Optional[OptionHierarchy] = None) -> SearchResult:
    """Root-parallel (independent trees) or tree-parallel (shared, locked tree) search.

    Budgets are per worker in root mode and shared in tree mode, so a
    tree-parallel step with ``step_sims=N`` runs exactly N simulations.
    """
    if threads < 1:
        raise ValueError("threads must be >= 1")
    base = config or SearchConfig()
    cfg = SearchConfig(base.C, base.W, base.time_redistribution, base.best_path,
                       base.progressive_history, mode, threads)
    return _search(jobs, evaluator, budget, cfg, seed, hierarchy)
