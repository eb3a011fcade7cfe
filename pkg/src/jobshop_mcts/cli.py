"""Command line: ``gen``, ``plan``, ``surrogate train|eval`` and ``run``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .abstraction import detached_abstraction, integrated_abstraction
from .core import JobSet
from .hierarchy import OptionHierarchy
from .instances import gen_demirkol, gen_problem1
from .metrics import Evaluator, OBJECTIVES
from .schedulers import make_dispatcher
from .search import (SearchBudget, SearchConfig, flat_mcs_plan, hmcts_plan, hnmcs_plan, mcts_plan,
                     nmcs_plan)


def _gen(a) -> int:
    if a.problem == 1:
        jobs = gen_problem1(a.jobs).jobs
    else:
        jobs = gen_demirkol(a.jobs, a.machines, seed=a.seed, T=a.T, R=a.R)
    text = jobs.to_json()
    if a.out:
        Path(a.out).write_text(text)
    else:
        print(text)
    return 0


def _plan(a) -> int:
    jobs = JobSet.from_json(a.instance)
    oracle = make_dispatcher(a.dispatcher, jobs)
    ev = Evaluator(jobs, oracle, a.objective)
    if a.budget_ms is None and a.budget_sims is None:
        a.budget_ms = 100.0
    budget = SearchBudget(None if a.budget_ms is None else a.budget_ms / 1000.0, a.budget_sims)
    cfg = SearchConfig.from_enhancements(a.enhancements, threads=a.threads, C=a.C, W=a.W)
    h = None
    if a.algo in ("hmcts", "hnmcs"):
        if a.hierarchy:
            h = OptionHierarchy.from_json(a.hierarchy)
        elif a.abstraction == "detached":
            h = detached_abstraction(jobs)
        elif a.abstraction == "flat":
            h = OptionHierarchy.flat(jobs.n)
        else:
            sims = None if budget.step_sims is None else max(1, budget.step_sims * jobs.n // 32)
            secs = None if budget.step_seconds is None else budget.step_seconds * jobs.n / 4
            h = integrated_abstraction(jobs, ev, sims=sims, seconds=secs, seed=a.seed)
        if a.hierarchy_out:
            h.to_json(a.hierarchy_out)
    if a.algo == "flat":
        res = flat_mcs_plan(jobs, ev, budget, seed=a.seed, best_path=cfg.best_path,
                            time_redistribution=cfg.time_redistribution)
    elif a.algo == "nmcs":
        res = nmcs_plan(jobs, ev, a.level, budget, seed=a.seed, time_redistribution=cfg.time_redistribution)
    elif a.algo == "hnmcs":
        res = hnmcs_plan(jobs, ev, h, a.level, budget, seed=a.seed, time_redistribution=cfg.time_redistribution)
    elif a.algo == "mcts":
        res = mcts_plan(jobs, ev, budget, cfg, seed=a.seed)
    else:
        res = hmcts_plan(jobs, ev, h, budget, cfg, seed=a.seed)
    sched = oracle.schedule(res.plan)
    if a.out:
        sched.to_csv(a.out)
    if a.gantt:
        from .harness.render import render_gantt
        from .metrics import trivial_lower_bound
        Path(a.gantt).write_text(render_gantt(sched, jobs, deadlines=a.objective != "makespan",
                                              bound=trivial_lower_bound(jobs)))
    print(json.dumps({"algo": a.algo, "enhancements": cfg.label, "objective": ev.objective(res.plan),
                      "ratio": round(ev.ratio(res.plan), 6), "simulations": res.simulations,
                      "plan": list(res.plan)}))
    return 0


def _surrogate(a) -> int:
    from .surrogate import (FeedForwardModel, JobEncoder, SurrogateOracle, generate_dataset, r_squared,
                            stack, train, within_tolerance)
    jobs = JobSet.from_json(a.instance)
    oracle = make_dispatcher(a.dispatcher, jobs)
    if a.action == "train":
        enc = JobEncoder.fit(jobs)
        X, y = stack(generate_dataset(jobs, oracle, a.plans, seed=a.seed, window=a.window, encoder=enc))
        model = FeedForwardModel([X.shape[1], 64, 32, 1], seed=a.seed)
        model, losses = train(model, (X, y), epochs=a.epochs, lr=a.lr, seed=a.seed)
        model.meta = {"window": a.window, "n_types": enc.n_types, "rack_types": list(enc.rack_types),
                      "proc_scale": enc.proc_scale, "release_gap": int(getattr(oracle, "release_gap", 0))}
        model.to_json(a.model)
        print(json.dumps({"samples": int(X.shape[0]), "loss_initial": losses[0], "loss_final": losses[-1]}))
        return 0
    model = FeedForwardModel.from_json(a.model)
    meta = model.meta
    enc = JobEncoder(meta["n_types"], tuple(meta["rack_types"]), meta["proc_scale"])
    X, y = stack(generate_dataset(jobs, oracle, a.plans, seed=a.seed, window=meta["window"], encoder=enc))
    # rank agreement between surrogate and true makespan on fresh random plans
    so = SurrogateOracle(jobs, model, meta["release_gap"], meta["window"], enc)
    rng = np.random.default_rng(a.seed)
    plans = [rng.permutation(jobs.n).astype(np.int64) for _ in range(50)]
    true = [oracle.completion_times(p).max() for p in plans]
    est = [so.completion_times(p).max() for p in plans]
    corr = float(np.corrcoef(true, est)[0, 1]) if np.std(true) > 0 and np.std(est) > 0 else float("nan")
    print(json.dumps({"samples": int(X.shape[0]), "mse": model.loss(X, y), "r2": r_squared(model, X, y),
                      "within_tol": within_tolerance(model, X, y, a.tol), "makespan_corr": corr}))
    return 0


def _run(a) -> int:
    from .harness.config import load_config
    from .harness.runner import run_experiment
    cfg = load_config(a.config)
    if a.paper_scale:
        cfg = cfg.full_scale()
    out = a.out or str(Path(a.config).with_suffix("")) + "_results"
    verbose = not a.quiet

    def progress(r):
        if verbose:
            print(f"{r['algo']:>6} {r['enhancements']:<16} inst {r['instance']} seed {r['seed']}: "
                  f"ratio {r['ratio']:.4f} ({r['wall_ms']:.0f} ms)", file=sys.stderr)

    res = run_experiment(cfg, out, progress)
    for s in res["summary"]:
        ci = "" if s["sem95"] is None else f" +- {s['sem95']:.4f}"
        print(f"{s['algo']:>6} {s['enhancements']:<16} mean ratio {s['mean_ratio']:.4f}{ci} (n={s['runs']})")
    failed = 0
    for expr, ok, detail in res["checks"]:
        print(f"{'PASS' if ok else 'FAIL'} {expr}: {detail}")
        failed += not ok
    return 1 if a.check and failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jobshop-mcts", description=__doc__)
    sub = p.add_subparsers(dest="cmd", required=True)

    g = sub.add_parser("gen", help="generate a benchmark instance (JSON)")
    g.add_argument("--problem", type=int, choices=(1, 2), default=1)
    g.add_argument("--jobs", type=int, default=200)
    g.add_argument("--machines", type=int, default=10)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("-T", type=float, default=0.2)
    g.add_argument("-R", type=float, default=0.8)
    g.add_argument("--out")
    g.set_defaults(func=_gen)

    q = sub.add_parser("plan", help="search a plan for an instance")
    q.add_argument("--instance", required=True)
    q.add_argument("--algo", choices=("flat", "mcts", "nmcs", "hmcts", "hnmcs"), default="mcts")
    q.add_argument("--enhancements", default="")
    q.add_argument("--threads", type=int, default=4)
    q.add_argument("--budget-ms", type=float)
    q.add_argument("--budget-sims", type=int)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--dispatcher", choices=("online", "offline"), default="online")
    q.add_argument("--objective", choices=OBJECTIVES, default="makespan")
    q.add_argument("--level", type=int, default=2)
    q.add_argument("--abstraction", choices=("integrated", "detached", "flat"), default="integrated")
    q.add_argument("--hierarchy", help="hierarchy JSON to use instead of building one")
    q.add_argument("--hierarchy-out")
    q.add_argument("-C", type=float, default=0.5)
    q.add_argument("-W", type=float, default=5.0)
    q.add_argument("--out", help="schedule CSV")
    q.add_argument("--gantt", help="Gantt chart SVG")
    q.set_defaults(func=_plan)

    s = sub.add_parser("surrogate", help="train or evaluate the scheduler surrogate")
    s.add_argument("action", choices=("train", "eval"))
    s.add_argument("--instance", required=True)
    s.add_argument("--model", required=True, help="model JSON (written by train, read by eval)")
    s.add_argument("--dispatcher", choices=("online", "offline"), default="online")
    s.add_argument("--plans", type=int, default=100)
    s.add_argument("--epochs", type=int, default=20)
    s.add_argument("--lr", type=float, default=0.01)
    s.add_argument("--window", type=int, default=8)
    s.add_argument("--tol", type=float, default=0.02)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=_surrogate)

    r = sub.add_parser("run", help="run an experiment config")
    r.add_argument("config")
    r.add_argument("--out")
    r.add_argument("--check", action="store_true", help="exit non-zero if any expectation fails")
    r.add_argument("--paper-scale", action="store_true", help="full-size instances, 10 s per step")
    r.add_argument("--quiet", action="store_true")
    r.set_defaults(func=_run)
    return p


def main(argv=None) -> int:
    a = build_parser().parse_args(argv)
    try:
        return a.func(a)
    except (ValueError, KeyError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
