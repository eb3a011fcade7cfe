"""Action spaces: flat job choice or descent through an option hierarchy.

Actions ``0..n-1`` are jobs; ``n..n+K-1`` are the K abstract options of the
hierarchy. Choosing an option narrows the next choice to its children;
choosing a job appends it to the plan and returns to the root. An option
whose only remaining child is another option is skipped automatically.
"""

from __future__ import annotations

import numpy as np

from ..core import InstanceError
from ..hierarchy import OptionHierarchy


class SimState:
    __slots__ = ("jobs", "remaining", "left", "ctx", "n_left")

    def __init__(self, jobs, remaining, left, ctx, n_left):
        self.jobs = jobs            # jobs appended since the search root (list)
        self.remaining = remaining  # bool per job
        self.left = left            # remaining jobs under each option
        self.ctx = ctx              # option index the next choice is made in
        self.n_left = n_left

    def copy(self) -> "SimState":
        return SimState(list(self.jobs), self.remaining.copy(), self.left.copy(), self.ctx, self.n_left)


class ActionSpace:
    def __init__(self, n_jobs: int, hierarchy: OptionHierarchy = None):
        if hierarchy is None:
            hierarchy = OptionHierarchy.flat(n_jobs)
        hierarchy.check_jobs(n_jobs)
        self.n = n_jobs
        self.hierarchy = hierarchy
        root = hierarchy.root if isinstance(hierarchy.root, tuple) else (hierarchy.root,)
        child_jobs, child_opts, leaf_jobs = [], [], []
        parent = []
        anc = [[] for _ in range(n_jobs)]

        def build(node, par):
            k = len(child_jobs)
            child_jobs.append(None)
            child_opts.append(None)
            leaf_jobs.append(None)
            parent.append(par)
            jobs, opts, leaves = [], [], []
            for c in node:
                if isinstance(c, tuple):
                    o = build(c, k)
                    opts.append(o)
                    leaves.extend(leaf_jobs[o])
                else:
                    jobs.append(c)
                    leaves.append(c)
            child_jobs[k] = np.array(jobs, dtype=np.int64)
            child_opts[k] = np.array(opts, dtype=np.int64)
            leaf_jobs[k] = np.array(leaves, dtype=np.int64)
            for j in leaves:
                anc[j].append(k)
            return k

        build(root, -1)
        self.K = len(child_jobs)
        self.child_jobs = child_jobs
        self.child_opts = child_opts
        self.leaf_jobs = leaf_jobs
        self.parent = np.array(parent, dtype=np.int64)
        self.ancestors = [np.array(a, dtype=np.int64) for a in anc]
        self.n_actions = self.n + self.K
        self.flat = self.K == 1
        self.sizes = np.array([len(l) for l in leaf_jobs], dtype=np.int64)
        # mean number of decisions needed to commit one job
        self.mean_depth = float(np.mean([len(a) for a in anc])) if n_jobs else 1.0

    def initial_state(self) -> SimState:
        return SimState([], np.ones(self.n, dtype=bool), self.sizes.copy(), 0, self.n)

    def state_after(self, prefix) -> SimState:
        s = self.initial_state()
        for j in prefix:
            self.apply(s, int(j))
        s.jobs = []
        return s

    def available(self, s: SimState) -> np.ndarray:
        """Legal actions at ``s``; descends through single-child options and updates ``s.ctx``."""
        if s.n_left == 0:
            return np.zeros(0, dtype=np.int64)
        while True:
            cj = self.child_jobs[s.ctx]
            co = self.child_opts[s.ctx]
            jobs = cj[s.remaining[cj]] if cj.size else cj
            if co.size:
                opts = co[s.left[co] > 0]
                if jobs.size == 0 and opts.size == 1:
                    s.ctx = int(opts[0])
                    continue
                return np.concatenate((jobs, opts + self.n))
            return jobs

    def apply(self, s: SimState, a: int) -> None:
        if a < self.n:
            if not s.remaining[a]:
                raise InstanceError(f"job {a} already planned")
            s.remaining[a] = False
            s.left[self.ancestors[a]] -= 1
            s.jobs.append(a)
            s.n_left -= 1
            s.ctx = 0
        else:
            s.ctx = a - self.n

    def contains(self, a: int, job: int) -> bool:
        """Whether action ``a`` leads towards ``job``."""
        if a < self.n:
            return a == job
        return bool((self.ancestors[job] == a - self.n).any())

    def rollout(self, s: SimState, rng: np.random.Generator) -> np.ndarray:
        """Uniform random completion; a pending option choice is honoured first."""
        rest = np.flatnonzero(s.remaining)
        if s.ctx != 0 and rest.size:
            under = self.leaf_jobs[s.ctx]
            under = under[s.remaining[under]]
            first = under[rng.integers(under.size)]
            rest = rest[rest != first]
            rng.shuffle(rest)
            return np.concatenate(([first], rest))
        rng.shuffle(rest)
        return rest
