"""Experiment runner: one CSV row per (instance, algorithm, enhancements, seed) cell."""

from __future__ import annotations

import csv
import json
import math
import re
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from ..abstraction import detached_abstraction, integrated_abstraction
from ..core import JobSet
from ..hierarchy import OptionHierarchy
from ..instances import gen_demirkol, gen_problem1
from ..metrics import Evaluator
from ..resources import ResourceDispatcher, ResourcePool, gen_problem3
from ..schedulers import heuristic_plan, make_dispatcher
from ..search import (SearchBudget, SearchConfig, flat_mcs_plan, hmcts_plan, hnmcs_plan, mcts_plan,
                      nmcs_plan)
from .config import TREE_ALGOS, ExperimentConfig

RESULT_COLUMNS = ("problem", "instance", "algo", "enhancements", "seed", "objective", "ratio", "wall_ms")
SUMMARY_COLUMNS = ("problem", "algo", "enhancements", "runs", "mean_ratio", "std", "ci95", "sem95",
                   "mean_objective", "mean_wall_ms")


@dataclass
class Instance:
    jobs: JobSet
    oracle: object
    bound: Optional[float]   # known optimum, when there is one


def build_instance(cfg: ExperimentConfig, idx: int) -> Instance:
    seed = cfg.instance_seed + idx
    if cfg.instance_file:
        jobs = JobSet.from_json(cfg.instance_file)
        return Instance(jobs, make_dispatcher(cfg.default_dispatcher, jobs), None)
    if cfg.problem == 1:
        p = gen_problem1(cfg.jobs)
        return Instance(p.jobs, make_dispatcher(cfg.default_dispatcher, p.jobs), p.optimum)
    if cfg.problem == 2:
        jobs = gen_demirkol(cfg.jobs, cfg.machines, seed=seed, T=cfg.T, R=cfg.R)
        return Instance(jobs, make_dispatcher(cfg.default_dispatcher, jobs), None)
    jobs, pool = gen_problem3(cfg.jobs, seed=seed, T=cfg.T, R=cfg.R)
    return Instance(jobs, ResourceDispatcher(jobs, pool), None)


def cells(cfg: ExperimentConfig):
    for i in range(cfg.instances):
        for algo in cfg.algorithms:
            enh_sets = cfg.enhancements if algo in TREE_ALGOS else ("none",)
            for enh in enh_sets:
                if algo in ("spt", "lpt", "edd"):
                    seeds = [cfg.seed_base]
                else:
                    seeds = range(cfg.seed_base, cfg.seed_base + cfg.seeds)
                for s in seeds:
                    yield i, algo, enh, s


def _hierarchy(cfg, inst, ev, budget, seed) -> OptionHierarchy:
    n = inst.jobs.n
    if cfg.abstraction == "flat":
        return OptionHierarchy.flat(n)
    if cfg.abstraction == "detached":
        return detached_abstraction(inst.jobs)
    share = cfg.abstraction_share / (1 - cfg.abstraction_share)
    secs = None if budget.step_seconds is None else share * budget.step_seconds * n
    sims = None if budget.step_sims is None else max(1, int(share * budget.step_sims * n / 8))
    return integrated_abstraction(inst.jobs, ev, sims=sims, seconds=secs, seed=seed)


def run_cell(cfg: ExperimentConfig, inst: Instance, idx: int, algo: str, enh: str, seed: int) -> dict:
    """Run one cell; returns the CSV row plus ``plan`` and ``profile`` for figures."""
    ev = Evaluator(inst.jobs, inst.oracle, cfg.objective, bound=inst.bound)
    budget = SearchBudget(None if cfg.budget_ms is None else cfg.budget_ms / 1000.0, cfg.budget_sims)
    enh_text = "" if enh == "none" else enh
    sc = SearchConfig.from_enhancements(enh_text, threads=cfg.threads, C=cfg.C, W=cfg.W)
    profile = None
    t0 = time.perf_counter()
    if algo in ("spt", "lpt", "edd", "random"):
        plan = heuristic_plan(inst.jobs, algo, seed)
    else:
        hierarchical = algo in ("hmcts", "hnmcs")
        plan_budget = budget
        h = None
        if hierarchical:
            if cfg.abstraction == "integrated":
                plan_budget = budget.scaled(1 - cfg.abstraction_share)
            h = _hierarchy(cfg, inst, ev, budget, seed)
        if algo == "flat":
            res = flat_mcs_plan(inst.jobs, ev, plan_budget, seed=seed, best_path=sc.best_path,
                                time_redistribution=sc.time_redistribution)
        elif algo == "nmcs":
            res = nmcs_plan(inst.jobs, ev, cfg.nmcs_level, plan_budget, seed=seed,
                            time_redistribution=sc.time_redistribution)
        elif algo == "hnmcs":
            res = hnmcs_plan(inst.jobs, ev, h, cfg.nmcs_level, plan_budget, seed=seed,
                             time_redistribution=sc.time_redistribution)
        elif algo == "mcts":
            res = mcts_plan(inst.jobs, ev, plan_budget, sc, seed=seed)
        else:
            res = hmcts_plan(inst.jobs, ev, h, plan_budget, sc, seed=seed)
        plan = res.plan
        profile = res.depth_profile
    wall = (time.perf_counter() - t0) * 1000.0
    return {"problem": cfg.problem, "instance": idx, "algo": algo, "enhancements": enh, "seed": seed,
            "objective": ev.objective(plan), "ratio": ev.ratio(plan), "wall_ms": round(wall, 1),
            "plan": list(plan), "profile": None if profile is None else profile.tolist()}


def _run_chunk(args):
    cfg, idx, todo = args
    inst = build_instance(cfg, idx)
    return [run_cell(cfg, inst, idx, a, e, s) for a, e, s in todo]


def summarize(rows: list) -> list:
    groups: dict = {}
    for r in rows:
        groups.setdefault((r["problem"], r["algo"], r["enhancements"]), []).append(r)
    out = []
    for (prob, algo, enh), rs in groups.items():
        ratios = np.array([r["ratio"] for r in rs], dtype=float)
        n = ratios.size
        std = float(ratios.std(ddof=1)) if n > 1 else None
        out.append({
            "problem": prob, "algo": algo, "enhancements": enh, "runs": n,
            "mean_ratio": float(ratios.mean()),
            "std": std,
            "ci95": None if std is None else 1.96 * std,
            "sem95": None if std is None else 1.96 * std / math.sqrt(n),
            "mean_objective": float(np.mean([r["objective"] for r in rs])),
            "mean_wall_ms": float(np.mean([r["wall_ms"] for r in rs])),
        })
    return out


def per_instance(rows: list) -> dict:
    """``label -> {instance: mean ratio}``."""
    out: dict = {}
    for r in rows:
        lab = label(r["algo"], r["enhancements"])
        out.setdefault(lab, {}).setdefault(r["instance"], []).append(r["ratio"])
    return {k: {i: float(np.mean(v)) for i, v in d.items()} for k, d in out.items()}


def label(algo: str, enh: str) -> str:
    return algo if enh == "none" else f"{algo}[{enh}]"


_EXPR = re.compile(r"^\s*(\S+)\s*(<=~|<=|<)\s*(\S+)\s*$")
_WINS = re.compile(r"^\s*(\S+)\s*<\s*(\S+)\s*>=\s*(\d+)\s*$")


def _lookup(summary_by_label, tok):
    try:
        return float(tok), 0.0
    except ValueError:
        pass
    if tok not in summary_by_label:
        raise KeyError(f"no results for {tok!r}; known: {sorted(summary_by_label)}")
    s = summary_by_label[tok]
    return s["mean_ratio"], s["sem95"] or 0.0


def evaluate_checks(cfg: ExperimentConfig, summary: list, rows: list) -> list:
    """``(expression, passed, detail)`` for every ``expect`` / ``expect_wins`` entry.

    ``a < b`` and ``a <= b`` compare mean ratios; ``a <=~ b`` also accepts
    ``a`` above ``b`` by at most the larger of their 95% standard-error
    half-widths. ``a < b >= k`` (in ``expect_wins``) asks that ``a`` have
    a strictly lower mean ratio than ``b`` on at least ``k`` instances.
    """
    by = {label(s["algo"], s["enhancements"]): s for s in summary}
    out = []
    for expr in cfg.expect:
        m = _EXPR.match(expr)
        if not m:
            raise ValueError(f"cannot parse expectation {expr!r}")
        (a, ta), op, (b, tb) = _lookup(by, m.group(1)), m.group(2), _lookup(by, m.group(3))
        ok = a < b if op == "<" else a <= b if op == "<=" else a <= b + max(ta, tb)
        out.append((expr, ok, f"{a:.4f} {op} {b:.4f}"))
    inst = per_instance(rows)
    for expr in cfg.expect_wins:
        m = _WINS.match(expr)
        if not m:
            raise ValueError(f"cannot parse expectation {expr!r}")
        a, b, k = m.group(1), m.group(2), int(m.group(3))
        wins = sum(1 for i, v in inst[a].items() if v < inst[b][i])
        out.append((expr, wins >= k, f"{wins} of {len(inst[a])} instances"))
    return out


def run_experiment(cfg: ExperimentConfig, out_dir=None, progress=None) -> dict:
    """Run every cell of ``cfg`` and write results.csv, summary.csv, summary.json.

    Returns ``{"rows", "summary", "checks"}``. Each cell depends only on
    the config and its seed, so any cell can be re-run on its own.
    """
    todo: dict = {}
    for i, a, e, s in cells(cfg):
        todo.setdefault(i, []).append((a, e, s))
    jobs = [(cfg, i, t) for i, t in todo.items()]
    rows = []
    if cfg.workers > 1:
        with ProcessPoolExecutor(cfg.workers) as ex:
            for chunk in ex.map(_run_chunk, jobs):
                rows.extend(chunk)
    else:
        for cfg_, i, t in jobs:
            inst = build_instance(cfg_, i)
            for a, e, s in t:
                r = run_cell(cfg_, inst, i, a, e, s)
                rows.append(r)
                if progress:
                    progress(r)
    summary = summarize(rows)
    checks = evaluate_checks(cfg, summary, rows)
    if out_dir is not None:
        write_outputs(cfg, rows, summary, checks, Path(out_dir))
    return {"rows": rows, "summary": summary, "checks": checks}


def write_outputs(cfg, rows, summary, checks, out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "results.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, RESULT_COLUMNS, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    with open(out / "summary.csv", "w", newline="") as fh:
        w = csv.DictWriter(fh, SUMMARY_COLUMNS, lineterminator="\n")
        w.writeheader()
        for s in summary:
            w.writerow({k: "" if v is None else v for k, v in s.items()})
    doc = {"config": cfg.to_text(), "summary": summary,
           "per_instance": per_instance(rows),
           "checks": [{"expect": e, "passed": ok, "detail": d} for e, ok, d in checks]}
    (out / "summary.json").write_text(json.dumps(doc, indent=1))
    if cfg.figures:
        from .render import render_gantt, render_tree_density
        inst = build_instance(cfg, 0)
        for r in rows:
            if r["instance"] != 0 or r["seed"] != cfg.seed_base:
                continue
            stem = label(r["algo"], r["enhancements"]).replace("[", "_").replace("]", "").replace(",", "-")
            sched = inst.oracle.schedule(r["plan"])
            (out / f"gantt_{stem}.svg").write_text(render_gantt(sched, inst.jobs, title=stem))
            if r["profile"] is not None:
                (out / f"tree_{stem}.svg").write_text(render_tree_density(r["profile"], title=stem))
