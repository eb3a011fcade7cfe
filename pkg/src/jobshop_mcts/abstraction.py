"""
Job abstraction: grouping similar jobs into an option hierarchy.

Two constructions are offered:

* :func:`detached_abstraction` clusters before any search, joining the
  nearest pair of options until one is left (single linkage).
* :func:`integrated_abstraction` starts from mean-shift clusters and lets a
  small Monte-Carlo tree search decide which options to join, scoring each
  candidate hierarchy by random plans drawn through it.
"""

from __future__ import annotations

import math
import time
from typing import Optional

import numpy as np
from sklearn.cluster import MeanShift

from .core import InstanceError, JobSet
from .hierarchy import OptionHierarchy
from .search.space import ActionSpace

METRICS = ("euclidean", "cosine")


def job_features(jobs: JobSet) -> np.ndarray:
    """Rows of (total processing time, deadline, rack-type one-hot).

    Jobs without a deadline get the serial horizon (sum of all processing
    times), which no schedule of the set can exceed without idling.
    """
    n = jobs.n
    horizon = float(jobs.total_processing.sum()) if n else 0.0
    dl = np.array([horizon if j.deadline is None else j.deadline for j in jobs], dtype=float)
    racks = sorted({j.rack_type for j in jobs if j.rack_type is not None})
    onehot = np.zeros((n, len(racks)))
    col = {r: i for i, r in enumerate(racks)}
    for j in jobs:
        if j.rack_type is not None:
            onehot[j.id, col[j.rack_type]] = 1.0
    return np.column_stack([jobs.total_processing.astype(float), dl, onehot]) if n else np.zeros((0, 2))


def scale_features(x: np.ndarray) -> np.ndarray:
    """Min-max scale each column to [0, 1]; constant columns become 0."""
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        return x
    lo, hi = x.min(axis=0), x.max(axis=0)
    span = np.where(hi > lo, hi - lo, 1.0)
    return (x - lo) / span


def pairwise_distance(a, b, metric: str = "euclidean") -> float:
    """
    >>> pairwise_distance([0, 0], [1, 1])  # doctest: +ELLIPSIS
    1.414...
    >>> pairwise_distance([1, 0], [0, 1], "cosine")
    1.0
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("feature vectors differ in dimensionality")
    if metric == "euclidean":
        return float(np.linalg.norm(a - b))
    if metric == "cosine":
        na, nb = np.linalg.norm(a), np.linalg.norm(b)
        if na == 0 or nb == 0:
            raise ValueError("cosine distance is undefined for a zero vector")
        return float(1.0 - a @ b / (na * nb))
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


def distance_matrix(x: np.ndarray, metric: str = "euclidean") -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if metric == "euclidean":
        sq = (x * x).sum(axis=1)
        d2 = np.maximum(sq[:, None] + sq[None, :] - 2 * x @ x.T, 0.0)
        d = np.sqrt(d2)
        np.fill_diagonal(d, 0.0)
        # the expansion above loses exactness for equal rows; fix those up
        d[np.isclose(d, 0.0, atol=1e-9)] = 0.0
        return d
    if metric == "cosine":
        norms = np.linalg.norm(x, axis=1)
        if (norms == 0).any():
            raise ValueError("cosine distance is undefined for a zero vector")
        u = x / norms[:, None]
        d = np.clip(1.0 - u @ u.T, 0.0, 2.0)
        np.fill_diagonal(d, 0.0)
        return d
    raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")


def detached_abstraction(jobs: JobSet, metric: str = "euclidean",
                         features: Optional[np.ndarray] = None) -> OptionHierarchy:
    """Binary single-linkage agglomeration over job features.

    Pairs are joined in order of distance; equal distances go to the pair
    that comes first in input order, so reordering the jobs can change the
    tree. Raw (unscaled) features are used unless ``features`` is given.
    """
    n = jobs.n
    if n == 0:
        raise InstanceError("abstraction needs at least one job")
    x = job_features(jobs) if features is None else np.asarray(features, dtype=float)
    if n == 1:
        return OptionHierarchy(0)
    d = distance_matrix(x, metric)
    iu, ju = np.triu_indices(n, 1)
    order = np.lexsort((ju, iu, d[iu, ju]))
    parent = list(range(n))
    tree = {i: i for i in range(n)}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    merged = 0
    for e in order:
        a, b = find(int(iu[e])), find(int(ju[e]))
        if a == b:
            continue
        lo, hi = min(a, b), max(a, b)
        first, second = tree[a], tree[b]
        parent[hi] = lo
        tree[lo] = (first, second)
        del tree[hi]
        merged += 1
        if merged == n - 1:
            break
    return OptionHierarchy(tree[0])


def default_bandwidth(x: np.ndarray) -> float:
    """Half the median distance from each point to its nearest distinct point."""
    d = distance_matrix(x)
    d[d <= 1e-12] = np.inf
    nearest = d.min(axis=1)
    nearest = nearest[np.isfinite(nearest)]
    if nearest.size == 0:
        return 1.0
    return float(np.median(nearest)) / 2


def mean_shift(features, bandwidth: Optional[float] = None) -> np.ndarray:
    """Flat-kernel mean-shift cluster labels, numbered in order of first appearance."""
    x = np.asarray(features, dtype=float)
    if x.ndim != 2:
        raise ValueError("features must be a 2-d array")
    if bandwidth is not None and bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    n = x.shape[0]
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    bw = default_bandwidth(x) if bandwidth is None else float(bandwidth)
    uniq, inv = np.unique(x, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    if uniq.shape[0] == 1:
        return np.zeros(n, dtype=np.int64)
    raw = MeanShift(bandwidth=bw, cluster_all=True).fit(uniq).labels_
    labels = raw[inv]
    _, first = np.unique(labels, return_index=True)
    rank = {int(labels[i]): k for k, i in enumerate(sorted(first))}
    return np.array([rank[int(l)] for l in labels], dtype=np.int64)


# -- integrated abstraction ---------------------------------------------------

class _Forest:
    """Current top-level options, their merge heights and single-linkage distances."""

    __slots__ = ("trees", "heights", "dist")

    def __init__(self, trees, heights, dist):
        self.trees = trees
        self.heights = heights
        self.dist = dist

    def copy(self):
        return _Forest(list(self.trees), list(self.heights), self.dist.copy())

    def candidates(self, m: int):
        k = len(self.trees)
        iu, ju = np.triu_indices(k, 1)
        order = np.lexsort((ju, iu, self.dist[iu, ju]))[:m]
        return [(int(iu[e]), int(ju[e])) for e in order]

    def join(self, i: int, j: int):
        h = float(self.dist[i, j])
        kids = []
        for t, th in ((self.trees[i], self.heights[i]), (self.trees[j], self.heights[j])):
            # an option formed at the same distance is absorbed, giving multi-way nodes
            if isinstance(t, tuple) and math.isclose(th, h, rel_tol=1e-9, abs_tol=1e-12):
                kids.extend(t)
            else:
                kids.append(t)
        self.trees[i] = tuple(kids)
        self.heights[i] = h
        row = np.minimum(self.dist[i], self.dist[j])
        self.dist[i, :] = row
        self.dist[:, i] = row
        self.dist[i, i] = 0.0
        keep = [q for q in range(len(self.trees)) if q != j]
        self.dist = self.dist[np.ix_(keep, keep)]
        del self.trees[j]
        del self.heights[j]


def random_descent_plan(space: ActionSpace, rng: np.random.Generator) -> np.ndarray:
    """A plan drawn by choosing uniformly among live options at every level."""
    s = space.initial_state()
    while s.n_left:
        acts = space.available(s)
        space.apply(s, int(acts[rng.integers(acts.size)]))
    return np.asarray(s.jobs, dtype=np.int64)


class _JoinNode:
    __slots__ = ("pairs", "kids", "n", "w", "untried", "visits")

    def __init__(self, pairs, rng):
        self.pairs = pairs
        self.kids = [None] * len(pairs)
        self.n = np.zeros(len(pairs))
        self.w = np.zeros(len(pairs))
        self.untried = rng.permutation(len(pairs)).tolist()
        self.visits = 0


def integrated_abstraction(jobs: JobSet, evaluator, sims: Optional[int] = 200,
                           seconds: Optional[float] = None, seed=None, rollouts: int = 8,
                           candidates: int = 6, bandwidth: Optional[float] = None,
                           metric: str = "euclidean", C: float = 0.5) -> OptionHierarchy:
    """Search over which options to join, starting from mean-shift clusters.

    ``sims`` / ``seconds`` bound the whole abstraction search and are split
    evenly over the join plies. Each simulation completes the joins at
    random, draws ``rollouts`` plans through the resulting hierarchy and
    averages their scores. Only the ``candidates`` closest pairs are
    considered per ply.
    """
    n = jobs.n
    if n == 0:
        raise InstanceError("abstraction needs at least one job")
    if n == 1:
        return OptionHierarchy(0)
    rng = np.random.default_rng(seed)
    x = scale_features(job_features(jobs))
    labels = mean_shift(x, bandwidth)
    groups = [np.flatnonzero(labels == c).tolist() for c in range(labels.max() + 1)]
    trees = [tuple(g) if len(g) > 1 else g[0] for g in groups]
    if len(trees) == 1:
        return OptionHierarchy(trees[0])
    dj = distance_matrix(x, metric)
    k = len(trees)
    dist = np.zeros((k, k))
    for a in range(k):
        for b in range(a + 1, k):
            dist[a, b] = dist[b, a] = dj[np.ix_(groups[a], groups[b])].min()
    forest = _Forest(trees, [0.0] * k, dist)

    def evaluate(f: _Forest) -> float:
        f = f.copy()
        while len(f.trees) > 1:
            cand = f.candidates(candidates)
            f.join(*cand[rng.integers(len(cand))])
        space = ActionSpace(n, OptionHierarchy(f.trees[0]))
        return float(np.mean([evaluator(random_descent_plan(space, rng)) for _ in range(rollouts)]))

    plies = k - 1
    per_sims = None if sims is None else max(1, sims // plies)
    per_secs = None if seconds is None else seconds / plies
    root = _JoinNode(forest.candidates(candidates), rng)
    while len(forest.trees) > 1:
        if len(root.pairs) > 1:
            deadline = None if per_secs is None else time.perf_counter() + per_secs
            done = 0
            while (per_sims is None or done < per_sims) and (deadline is None or time.perf_counter() < deadline):
                done += 1
                node, f, path = root, forest.copy(), []
                while True:
                    if node.untried:
                        i = node.untried.pop()
                        f.join(*node.pairs[i])
                        if len(f.trees) > 1:
                            node.kids[i] = _JoinNode(f.candidates(candidates), rng)
                        path.append((node, i))
                        break
                    with np.errstate(divide="ignore"):
                        v = node.w / node.n + C * np.sqrt(math.log(max(node.visits, 1)) / node.n)
                    i = int(np.argmax(v))
                    f.join(*node.pairs[i])
                    path.append((node, i))
                    if node.kids[i] is None:
                        break
                    node = node.kids[i]
                s = evaluate(f)
                for nd, i in path:
                    nd.visits += 1
                    nd.n[i] += 1
                    nd.w[i] += s
            visited = root.n > 0
            i = int(np.argmax(np.where(visited, root.w / np.maximum(root.n, 1), -np.inf))) if visited.any() else 0
        else:
            i = 0
        forest.join(*root.pairs[i])
        nxt = root.kids[i]
        root = nxt if nxt is not None else _JoinNode(forest.candidates(candidates), rng)
    return OptionHierarchy(forest.trees[0])
