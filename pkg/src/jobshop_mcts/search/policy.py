"""Selection formulas, budgets and the small records shared by all searches."""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..core import Plan

ENHANCEMENTS = ("tr", "bp", "ph", "par-root", "par-tree")


def uct_value(s_i: float, n_i: int, n_p: int, C: float) -> float:
    """``s_i + C sqrt(ln n_p / n_i)``.

    >>> uct_value(0.5, 1, 1, 1.0)
    0.5
    >>> round(uct_value(0.0, 1, math.e, 1.0), 12)
    1.0
    """
    return s_i + C * math.sqrt(math.log(n_p) / n_i)


def uct_ph_value(s_i: float, n_i: int, n_p: int, C: float, s_a: float, W: float) -> float:
    """UCT plus the progressive-history bias ``s_a W / (n_i - s_i + 1)``."""
    return uct_value(s_i, n_i, n_p, C) + s_a * W / (n_i - s_i + 1)


def time_for_step(d: float, T: float, n_jobs: int) -> float:
    """Redistributed budget for step ``d``: linear from ``1.9 T`` down to ``0.1 T``."""
    if n_jobs <= 0:
        raise ValueError("n_jobs must be positive")
    return (-1.8 * T / n_jobs) * d + 1.9 * T


@dataclass(frozen=True)
class SearchBudget:
    """Per-step budget, either wall-clock seconds or simulation count.

    When both are given the step ends at whichever runs out first. With
    ``redistribute`` the per-step base value is reshaped by
    :func:`time_for_step`.
    """

    step_seconds: Optional[float] = None
    step_sims: Optional[int] = None

    def __post_init__(self):
        if self.step_seconds is None and self.step_sims is None:
            raise ValueError("budget needs step_seconds or step_sims")
        if (self.step_seconds is not None and self.step_seconds < 0) or \
                (self.step_sims is not None and self.step_sims < 0):
            raise ValueError("budget must be non-negative")

    def for_step(self, d: int, n_jobs: int, redistribute: bool = False):
        """``(sims, seconds)`` for step ``d``; ``None`` means unlimited on that axis."""
        sims, secs = self.step_sims, self.step_seconds
        if redistribute:
            if sims is not None:
                sims = time_for_step(d, sims, n_jobs)
                sims = max(int(round(sims)), 1) if self.step_sims > 0 else 0
            if secs is not None:
                secs = time_for_step(d, secs, n_jobs)
        return sims, secs

    def scaled(self, factor: float) -> "SearchBudget":
        return SearchBudget(None if self.step_seconds is None else self.step_seconds * factor,
                            None if self.step_sims is None else int(round(self.step_sims * factor)))


class StepClock:
    """Tracks one step's budget; ``take()`` claims a simulation ticket."""

    def __init__(self, sims: Optional[int], seconds: Optional[float]):
        self.sims = sims
        self.deadline = None if seconds is None else time.perf_counter() + seconds
        self.used = 0
        self._lock = threading.Lock()

    def take(self) -> bool:
        with self._lock:
            if self.sims is not None and self.used >= self.sims:
                return False
            if self.deadline is not None and time.perf_counter() >= self.deadline:
                return False
            self.used += 1
            return True

    def exhausted(self) -> bool:
        if self.sims is not None and self.used >= self.sims:
            return True
        return self.deadline is not None and time.perf_counter() >= self.deadline


@dataclass(frozen=True)
class SearchConfig:
    C: float = 0.5
    W: float = 5.0
    time_redistribution: bool = False
    best_path: bool = False
    progressive_history: bool = False
    parallel: Optional[str] = None
    threads: int = 1

    def __post_init__(self):
        if self.parallel not in (None, "root", "tree"):
            raise ValueError(f"unknown parallel mode {self.parallel!r}")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    @classmethod
    def from_enhancements(cls, text: str = "", threads: int = 4, **kw) -> "SearchConfig":
        """Build from a comma list such as ``"tr,bp,ph,par-root"``."""
        items = [s.strip().lower() for s in (text or "").split(",") if s.strip()]
        unknown = [s for s in items if s not in ENHANCEMENTS]
        if unknown:
            raise ValueError(f"unknown enhancements {unknown}; expected any of {ENHANCEMENTS}")
        if "par-root" in items and "par-tree" in items:
            raise ValueError("choose one of par-root and par-tree")
        par = "root" if "par-root" in items else "tree" if "par-tree" in items else None
        return cls(time_redistribution="tr" in items, best_path="bp" in items,
                   progressive_history="ph" in items, parallel=par,
                   threads=threads if par else 1, **kw)

    @property
    def label(self) -> str:
        parts = [n for n, on in (("tr", self.time_redistribution), ("bp", self.best_path),
                                 ("ph", self.progressive_history)) if on]
        if self.parallel:
            parts.append("par-" + self.parallel)
        return ",".join(parts) or "none"


class BestPath:
    """Best complete plan seen so far; updates keep the first of equal scores."""

    __slots__ = ("score", "plan", "_lock")

    def __init__(self, score: float = -math.inf, plan: Optional[np.ndarray] = None):
        self.score = score
        self.plan = plan
        self._lock = threading.Lock()

    def offer(self, score: float, plan: np.ndarray) -> bool:
        if score <= self.score:
            return False
        with self._lock:
            if score <= self.score:
                return False
            self.score, self.plan = score, plan
            return True

    def copy(self) -> "BestPath":
        return BestPath(self.score, self.plan)


class BigramHistory:
    """Averaged scores of consecutive action pairs.

    Row ``n_actions`` stands for "no previous action" at the very start.
    """

    def __init__(self, n_actions: int):
        self.n_actions = n_actions
        self.sum = np.zeros((n_actions + 1, n_actions), dtype=np.float64)
        self.count = np.zeros((n_actions + 1, n_actions), dtype=np.int64)

    def update(self, actions: np.ndarray, score: float, prev: int = -1) -> None:
        if actions.size == 0:
            return
        p = np.empty(actions.size, dtype=np.int64)
        p[0] = self.n_actions if prev < 0 else prev
        p[1:] = actions[:-1]
        np.add.at(self.sum, (p, actions), score)
        np.add.at(self.count, (p, actions), 1)

    def mean(self, prev: int, actions: np.ndarray) -> np.ndarray:
        row = self.n_actions if prev < 0 else prev
        c = self.count[row, actions]
        out = np.zeros(actions.size)
        seen = c > 0
        out[seen] = self.sum[row, actions[seen]] / c[seen]
        return out


@dataclass
class SearchResult:
    plan: Plan
    score: float
    simulations: int
    best_score: float
    wall_time: float = 0.0
    # nodes (or evaluated candidates) created at each plan depth
    depth_profile: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
