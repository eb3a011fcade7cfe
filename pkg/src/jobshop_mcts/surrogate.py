"""
Feed-forward surrogate of a scheduler.

The network reads the features of the most recently planned jobs and
predicts how long the newest one waits. Waiting is measured against the
earliest moment the dispatcher could have finished the job, i.e.
``w = c_j - k * gap - P_j`` for the job at plan position ``k`` with total
processing time ``P_j``, divided by the instance horizon. Summing the
prediction back onto ``k * gap + P_j`` gives estimated completion times,
so a trained model drops into :class:`~jobshop_mcts.metrics.Evaluator` as
an oracle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np

from .core import JobSet, PlanLike, plan_array
from .metrics import trivial_lower_bound


@dataclass(frozen=True)
class JobEncoder:
    """Per-job features: job-type one-hot, scaled total processing time, rack one-hot."""

    n_types: int
    rack_types: tuple
    proc_scale: float

    @classmethod
    def fit(cls, jobs: JobSet) -> "JobEncoder":
        racks = tuple(sorted({j.rack_type for j in jobs if j.rack_type is not None}))
        return cls(max(j.job_type for j in jobs) + 1, racks, float(max(jobs.total_processing.max(), 1)))

    @property
    def width(self) -> int:
        return self.n_types + 1 + len(self.rack_types)

    def encode(self, jobs: JobSet) -> np.ndarray:
        f = np.zeros((jobs.n, self.width))
        col = {r: i for i, r in enumerate(self.rack_types)}
        for j in jobs:
            if j.job_type < self.n_types:
                f[j.id, j.job_type] = 1.0
            f[j.id, self.n_types] = j.total_processing / self.proc_scale
            if j.rack_type in col:
                f[j.id, self.n_types + 1 + col[j.rack_type]] = 1.0
        return f


def windows(features: np.ndarray, plan: np.ndarray, k: int) -> np.ndarray:
    """Row ``i`` holds the features of plan positions ``i-k+1 .. i`` (zeros before the start)."""
    n, f = features.shape[0], features.shape[1]
    m = plan.shape[0]
    padded = np.zeros((m + k - 1, f))
    padded[k - 1:] = features[plan]
    idx = np.arange(m)[:, None] + np.arange(k)[None, :]
    return padded[idx].reshape(m, k * f)


@dataclass
class WindowSample:
    input: np.ndarray
    target: float


def horizon(jobs: JobSet) -> float:
    return float(max(trivial_lower_bound(jobs), 1))


def waiting_targets(jobs: JobSet, plan: np.ndarray, completion: np.ndarray, release_gap: int) -> np.ndarray:
    pos = np.arange(plan.shape[0])
    return (completion[plan] - pos * release_gap - jobs.total_processing[plan]) / horizon(jobs)


def generate_dataset(jobs: JobSet, scheduler, n_plans: int, seed=None, window: int = 8,
                     encoder: Optional[JobEncoder] = None) -> list:
    """One sample per planned job for ``n_plans`` uniformly random plans."""
    if n_plans <= 0:
        return []
    rng = np.random.default_rng(seed)
    enc = encoder or JobEncoder.fit(jobs)
    feats = enc.encode(jobs)
    gap = int(getattr(scheduler, "release_gap", 0))
    out = []
    for _ in range(n_plans):
        plan = rng.permutation(jobs.n).astype(np.int64)
        c = scheduler.completion_times(plan)
        X = windows(feats, plan, window)
        y = waiting_targets(jobs, plan, c, gap)
        out.extend(WindowSample(x, float(t)) for x, t in zip(X, y))
    return out


def stack(samples: Sequence[WindowSample]):
    if not samples:
        raise ValueError("empty dataset")
    return np.stack([s.input for s in samples]), np.array([s.target for s in samples])


class FeedForwardModel:
    """Fully connected ReLU network with a linear scalar output."""

    def __init__(self, sizes: Sequence[int], seed=None):
        sizes = [int(s) for s in sizes]
        if len(sizes) < 2 or min(sizes) < 1:
            raise ValueError("need at least input and output layer, all of positive width")
        rng = np.random.default_rng(seed)
        self.sizes = sizes
        self.W = [rng.normal(0.0, np.sqrt(2.0 / a), size=(a, b)) for a, b in zip(sizes, sizes[1:])]
        self.b = [np.zeros(b) for b in sizes[1:]]
        self.meta: dict = {}

    def params(self) -> list:
        return [p for pair in zip(self.W, self.b) for p in pair]

    def forward(self, X: np.ndarray, keep: bool = False):
        acts = [X]
        h = X
        last = len(self.W) - 1
        for i, (W, b) in enumerate(zip(self.W, self.b)):
            h = h @ W + b
            if i < last:
                h = np.maximum(h, 0.0)
            acts.append(h)
        out = h[:, 0]
        return (out, acts) if keep else out

    def loss(self, X, y) -> float:
        return float(np.mean((self.forward(X) - y) ** 2))

    def gradients(self, X, y):
        """Gradients of the mean squared error, in :meth:`params` order."""
        out, acts = self.forward(X, keep=True)
        delta = (2.0 / X.shape[0]) * (out - y)[:, None]
        grads = []
        for i in range(len(self.W) - 1, -1, -1):
            gW = acts[i].T @ delta
            gb = delta.sum(axis=0)
            grads.append((gW, gb))
            if i:
                delta = (delta @ self.W[i].T) * (acts[i] > 0)
        grads.reverse()
        return [g for pair in grads for g in pair]

    def to_json(self, path: Union[str, Path, None] = None) -> str:
        text = json.dumps({"sizes": self.sizes, "W": [w.tolist() for w in self.W],
                           "b": [b.tolist() for b in self.b], "meta": self.meta})
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, source: Union[str, Path]) -> "FeedForwardModel":
        p = Path(source)
        data = json.loads(p.read_text() if p.suffix == ".json" and p.exists() else str(source))
        m = cls(data["sizes"])
        m.W = [np.array(w, dtype=float).reshape(a, b) for w, a, b in zip(data["W"], m.sizes, m.sizes[1:])]
        m.b = [np.array(b, dtype=float) for b in data["b"]]
        m.meta = data.get("meta", {})
        return m


def gradient_check(model: FeedForwardModel, X, y, eps: float = 1e-6) -> float:
    """Largest relative gap between analytic and central-difference gradients."""
    analytic = model.gradients(X, y)
    worst = 0.0
    for p, g in zip(model.params(), analytic):
        flat = p.reshape(-1)
        gf = g.reshape(-1)
        for i in range(flat.size):
            old = flat[i]
            flat[i] = old + eps
            up = model.loss(X, y)
            flat[i] = old - eps
            down = model.loss(X, y)
            flat[i] = old
            num = (up - down) / (2 * eps)
            den = max(abs(num) + abs(gf[i]), 1e-8)
            worst = max(worst, abs(num - gf[i]) / den)
    return worst


def train(model: FeedForwardModel, dataset, epochs: int = 20, lr: float = 0.01, seed=None,
          batch_size: int = 64, momentum: float = 0.9):
    """Mini-batch SGD with momentum on mean squared error.

    ``dataset`` is a list of :class:`WindowSample` or an ``(X, y)`` pair.
    Returns ``(model, losses)`` where ``losses[0]`` is the loss before
    training and ``losses[e]`` the loss after epoch ``e``.
    """
    X, y = stack(dataset) if isinstance(dataset, list) else (np.asarray(dataset[0]), np.asarray(dataset[1]))
    if X.shape[0] == 0:
        raise ValueError("empty dataset")
    rng = np.random.default_rng(seed)
    vel = [np.zeros_like(p) for p in model.params()]
    losses = [model.loss(X, y)]
    n = X.shape[0]
    for _ in range(epochs):
        order = rng.permutation(n)
        for s in range(0, n, batch_size):
            idx = order[s:s + batch_size]
            grads = model.gradients(X[idx], y[idx])
            for p, v, g in zip(model.params(), vel, grads):
                v *= momentum
                v -= lr * g
                p += v
        losses.append(model.loss(X, y))
    return model, losses


def predict_waiting(model: FeedForwardModel, window) -> np.ndarray:
    """Normalised waiting estimate(s) for one window vector or a batch of them."""
    x = np.atleast_2d(np.asarray(window, dtype=float))
    out = model.forward(x)
    return out if np.ndim(window) > 1 else out[:1]


def within_tolerance(model: FeedForwardModel, X, y, tol: float = 0.02) -> float:
    """Share of samples whose prediction lands within ``tol`` of the target."""
    return float(np.mean(np.abs(model.forward(X) - y) <= tol))


def r_squared(model: FeedForwardModel, X, y) -> float:
    resid = np.sum((model.forward(X) - y) ** 2)
    total = np.sum((y - y.mean()) ** 2)
    return float(1 - resid / total) if total > 0 else float(resid == 0)


class SurrogateOracle:
    """Completion-time estimates from a trained model; drop-in for a dispatcher."""

    name = "surrogate"

    def __init__(self, jobs: JobSet, model: FeedForwardModel, release_gap: int = 1, window: int = 8,
                 encoder: Optional[JobEncoder] = None):
        self.jobs = jobs
        self.model = model
        self.release_gap = release_gap
        self.window = window
        self.feats = (encoder or JobEncoder.fit(jobs)).encode(jobs)
        self.h = horizon(jobs)

    def completion_times(self, plan: PlanLike) -> np.ndarray:
        arr = plan if isinstance(plan, np.ndarray) and plan.dtype == np.int64 else plan_array(plan, self.jobs)
        w = np.maximum(self.model.forward(windows(self.feats, arr, self.window)), 0.0)
        est = np.arange(arr.size) * self.release_gap + self.jobs.total_processing[arr] + w * self.h
        c = np.zeros(self.jobs.n)
        c[arr] = est
        return c
