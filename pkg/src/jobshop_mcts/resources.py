"""
Resource-constrained job shop: racks, carriers and a loading area.

The dispatcher here is our own resource-aware on-line rule. It is not
the plant's production heuristic; it only honours the same constraints:

* every job rides on a rack of its own type, mounted on a carrier, from
  the moment the pair is taken until the job completes (waiting between
  stages included, since the shop has no buffers);
* a carrier that holds a rack of the wrong type must swap it first, a
  pseudo-job of ``rack_change_duration`` steps;
* jobs are loaded at a small number of stations, and only a fixed number
  of loads finish per loading interval.

With unlimited racks and carriers and no loading area the rule reduces
exactly to :func:`jobshop_mcts.schedulers.online_dispatch`.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .core import InstanceError, Job, JobSet, Machine, PlanLike, Schedule, plan_array
from .instances import with_random_deadlines

INF = math.inf


@dataclass(frozen=True)
class LoadingArea:
    stations: int = 6
    loads_per_interval: int = 2
    interval: int = 5

    def __post_init__(self):
        if self.stations < 1 or self.loads_per_interval < 1 or self.interval < 1:
            raise ValueError("loading area parameters must be positive")


@dataclass(frozen=True)
class ResourcePool:
    """Rack counts per type, carrier count, rack change time and loading area.

    Counts may be ``math.inf``; ``loading=None`` disables the loading area.
    """

    racks: dict
    carriers: float = INF
    rack_change_duration: int = 10
    loading: Optional[LoadingArea] = field(default_factory=LoadingArea)

    def __post_init__(self):
        if any(c < 0 for c in self.racks.values()) or self.carriers < 0:
            raise ValueError("resource counts must be non-negative")
        if self.rack_change_duration < 0:
            raise ValueError("rack_change_duration must be non-negative")

    @classmethod
    def unlimited(cls, jobs: JobSet) -> "ResourcePool":
        types = {j.rack_type for j in jobs}
        return cls({t: INF for t in types}, INF, 10, None)


@dataclass
class CarrierState:
    id: int
    rack_type: Optional[int] = None
    rack: Optional[int] = None
    busy_until: int = 0


@dataclass(frozen=True)
class LogEntry:
    job_id: int
    process: str
    carrier: int
    rack: int
    rack_type: Optional[int]
    deadline: Optional[int]
    start: int
    completion: int
    hold_start: int
    load_slot: int = -1


LOG_COLUMNS = ("job_id", "process", "carrier", "rack", "rack_type", "d_j", "s_j", "c_j", "hold_start",
               "load_slot")


class ResourceLog(list):
    """Rows of :class:`LogEntry`; rack changes appear with ``job_id = -1``."""

    def to_csv(self, path: Union[str, Path, None] = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(LOG_COLUMNS)
        for e in self:
            w.writerow([e.job_id, e.process, e.carrier, e.rack,
                        "" if e.rack_type is None else e.rack_type,
                        "" if e.deadline is None else e.deadline,
                        e.start, e.completion, e.hold_start, e.load_slot])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, text: str) -> "ResourceLog":
        rows = csv.DictReader(io.StringIO(text))
        if rows.fieldnames is None or tuple(rows.fieldnames) != LOG_COLUMNS:
            raise ValueError(f"resource log must have columns {LOG_COLUMNS}")
        opt = lambda s: None if s == "" else int(s)
        return cls(LogEntry(int(r["job_id"]), r["process"], int(r["carrier"]), int(r["rack"]),
                            opt(r["rack_type"]), opt(r["d_j"]), int(r["s_j"]), int(r["c_j"]),
                            int(r["hold_start"]), int(r["load_slot"])) for r in rows)


@lru_cache(maxsize=4096)
def simulate_loading(ready: tuple, loads_per_interval: int, already: int = 0) -> tuple:
    """Stations that finish loading this interval.

    ``ready`` flags which stations hold a job waiting to load; ``already``
    loads have been granted in the interval. Lower station indices go
    first. Results are tabled: ``simulate_loading.cache_info()`` reports
    hits for configurations seen before.

    >>> simulate_loading((True, True, False, False, False, False), 2)
    (0, 1)
    """
    free = max(loads_per_interval - already, 0)
    return tuple(i for i, r in enumerate(ready) if r)[:free]


class _RackStore:
    """Racks not mounted on any carrier, with the time each became free."""

    def __init__(self, pool: ResourcePool):
        self.pool = pool
        self.free = {}        # type -> list of (available_at, rack_id)
        self.created = {}     # type -> racks created so far
        self.next_id = 0
        self.ids = {}

    def _make(self, rtype):
        rid = self.next_id
        self.next_id += 1
        self.created[rtype] = self.created.get(rtype, 0) + 1
        return rid

    def peek(self, rtype):
        """Earliest ``(available_at, rack_id)`` of a stored rack of ``rtype``, or None."""
        lst = self.free.setdefault(rtype, [])
        if not lst and self.created.get(rtype, 0) < self.pool.racks.get(rtype, 0):
            lst.append((0, self._make(rtype)))
        if not lst:
            return None
        return min(lst, key=lambda x: (x[0], -x[1]))

    def take(self, rtype, item):
        self.free[rtype].remove(item)

    def put(self, rtype, rack, t):
        self.free.setdefault(rtype, []).append((t, rack))


def resource_dispatch(plan: PlanLike, jobs: JobSet, pool: ResourcePool, release_gap: int = 1):
    """Dispatch ``plan`` under rack, carrier and loading constraints.

    Returns ``(schedule, log)``. See the module docstring for the rules;
    ties between carrier choices prefer reusing a carrier that already
    holds the right rack type, the one freed most recently first.
    """
    arr = plan_array(plan, jobs)
    for j in jobs:
        if pool.racks.get(j.rack_type, 0) <= 0:
            raise InstanceError(f"job {j.id} needs rack type {j.rack_type!r}, which the pool lacks")
    comp = jobs.compiled
    free = np.zeros(comp.n_machines, dtype=np.int64)
    carriers: list = []
    store = _RackStore(pool)
    loading = pool.loading
    stations = np.zeros(loading.stations, dtype=np.int64) if loading else None
    loads: dict = {}
    change = pool.rack_change_duration
    starts = np.zeros(comp.route_groups.shape, dtype=np.int64)
    mach = np.zeros(comp.route_groups.shape, dtype=np.int64)
    log = ResourceLog()
    prev = None
    for k, j in enumerate(arr):
        j = int(j)
        job = jobs[j]
        rtype = job.rack_type
        t0 = 0 if prev is None else prev + release_gap

        # candidate (ready, preference, carrier, stored rack or None, needs change)
        best = None
        for c in carriers:
            if c.rack_type == rtype:
                ready = max(t0, c.busy_until)
                cand = (ready, 0, -c.busy_until, c.id, None, False)
                best = cand if best is None or cand < best else best
        stored = store.peek(rtype)
        if stored is not None:
            avail = stored[0]
            empty = [c for c in carriers if c.rack_type is None]
            if len(carriers) < pool.carriers:
                empty.append(None)   # a carrier not used yet
            for c in empty:
                cb = 0 if c is None else c.busy_until
                cid = len(carriers) if c is None else c.id
                ready = max(t0, cb, avail)
                cand = (ready, 1, -cb, cid, stored, False)
                best = cand if best is None or cand < best else best
            for c in carriers:
                if c.rack_type is not None and c.rack_type != rtype:
                    ready = max(t0, c.busy_until, avail) + change
                    cand = (ready, 2, -c.busy_until, c.id, stored, True)
                    best = cand if best is None or cand < best else best
        if best is None:
            raise InstanceError(f"no carrier can ever take rack type {rtype!r}")
        ready, _, _, cid, stored, swap = best
        if cid == len(carriers):
            carriers.append(CarrierState(cid))
        carrier = carriers[cid]
        hold = ready
        if stored is not None:
            store.take(rtype, stored)
            if swap:
                hold = ready - change
                store.put(carrier.rack_type, carrier.rack, ready)
                log.append(LogEntry(-1, "rack-change", cid, stored[1], rtype, None, hold, ready, hold))
            carrier.rack_type, carrier.rack = rtype, stored[1]

        t = ready
        slot = -1
        if loading:
            s = int(np.argmin(stations))
            enter = max(t, int(stations[s]))
            ready_flags = tuple(i == s for i in range(loading.stations))
            q = -(-enter // loading.interval)
            while not simulate_loading(ready_flags, loading.loads_per_interval, loads.get(q, 0)):
                q += 1
            loads[q] = loads.get(q, 0) + 1
            slot = q
            t = q * loading.interval
            stations[s] = t
            prev = enter
        for st in range(comp.route_len[j]):
            g = comp.route_groups[j, st]
            best_t, best_m = None, -1
            for qi in range(comp.group_ptr[g], comp.group_ptr[g + 1]):
                m = comp.group_machines[qi]
                tm = max(int(free[m]), t)
                if best_t is None or tm < best_t:
                    best_t, best_m = tm, m
            starts[j, st] = best_t
            mach[j, st] = best_m
            if st == 0 and not loading:
                prev = best_t
            t = best_t + int(comp.route_procs[j, st])
            free[best_m] = t
        carrier.busy_until = t
        log.append(LogEntry(j, str(job.job_type), cid, carrier.rack, rtype, job.deadline,
                            int(starts[j, 0]), t, hold, slot))
    return Schedule.from_arrays(jobs, starts, mach), log


class ResourceDispatcher:
    """Oracle wrapper around :func:`resource_dispatch` for the search code."""

    name = "resource"

    def __init__(self, jobs: JobSet, pool: ResourcePool, release_gap: int = 1):
        self.jobs = jobs
        self.pool = pool
        self.release_gap = release_gap

    def completion_times(self, plan: PlanLike) -> np.ndarray:
        sched, _ = resource_dispatch(plan, self.jobs, self.pool, self.release_gap)
        return sched.completion_times(self.jobs.n)

    def schedule(self, plan: PlanLike) -> Schedule:
        return resource_dispatch(plan, self.jobs, self.pool, self.release_gap)[0]

    __call__ = schedule


def occupancy_violations(log, pool: ResourcePool) -> list:
    """Sweep the log and report any time where resource use exceeds the pool.

    Checks: no carrier holds two things at once, concurrently used carriers
    never exceed the carrier count, and racks of each type in use never
    exceed that type's count.
    """
    bad = []
    by_carrier: dict = {}
    for e in log:
        # a rack change lies inside the hold span of the job it serves
        if e.job_id >= 0:
            by_carrier.setdefault(e.carrier, []).append((e.hold_start, e.completion, e))
    for c, spans in by_carrier.items():
        spans.sort(key=lambda s: (s[0], s[1]))
        for a, b in zip(spans, spans[1:]):
            if b[0] < a[1]:
                bad.append(("carrier-overlap", c, a[2].job_id, b[2].job_id))
    if len(by_carrier) > pool.carriers:
        bad.append(("carrier-count", len(by_carrier), pool.carriers))
    events = []
    for e in log:
        if e.job_id >= 0:
            events.append((e.hold_start, 1, e.rack_type, e.carrier))
            events.append((e.completion, -1, e.rack_type, e.carrier))
    events.sort(key=lambda x: (x[0], x[1]))
    use: dict = {}
    carriers_busy = 0
    for t, delta, rtype, _ in events:
        use[rtype] = use.get(rtype, 0) + delta
        carriers_busy += delta
        if use[rtype] > pool.racks.get(rtype, 0):
            bad.append(("rack-count", t, rtype, use[rtype]))
        if carriers_busy > pool.carriers:
            bad.append(("carrier-busy", t, carriers_busy))
    return bad


def loading_violations(log, pool: ResourcePool) -> list:
    if pool.loading is None:
        return []
    per: dict = {}
    for e in log:
        if e.job_id >= 0:
            per[e.load_slot] = per.get(e.load_slot, 0) + 1
    return [("loading", q, c) for q, c in per.items() if c > pool.loading.loads_per_interval]


def gen_problem3(n_jobs: int = 200, n_job_types: int = 16, n_rack_types: int = 12, n_carriers: int = 8,
                 racks_per_type: int = 3, n_stations: int = 6, seed=None, loading: bool = True,
                 T: float = 0.2, R: float = 0.8):
    """Synthetic plant-style instance: ``(JobSet, ResourcePool)``.

    Machines form ``n_stations`` process steps; steps alternate between
    single machines and pairs of parallel machines. Each job type has its
    own route over a random subset of steps, base durations in [2, 20] and
    a fixed rack type; individual jobs jitter durations by up to 20%.
    Deadlines follow :func:`with_random_deadlines`.
    """
    if n_jobs < 1 or n_job_types < 1 or n_rack_types < 1:
        raise InstanceError("counts must be positive")
    rng = np.random.default_rng(seed)
    machines = []
    step_machine = []
    for s in range(n_stations):
        step_machine.append(len(machines))
        width = 2 if s % 2 else 1
        for _ in range(width):
            machines.append(Machine(len(machines), group=s))
    types = []
    for t in range(n_job_types):
        length = int(rng.integers(2, n_stations + 1))
        steps = np.sort(rng.choice(n_stations, size=length, replace=False))
        route = tuple(step_machine[s] for s in steps)
        base = rng.integers(2, 21, size=length)
        rack = int(t % n_rack_types) if t < n_rack_types else int(rng.integers(n_rack_types))
        types.append((route, base, rack))
    jobs = []
    for j in range(n_jobs):
        t = int(rng.integers(n_job_types))
        route, base, rack = types[t]
        jitter = rng.uniform(0.8, 1.2, size=base.size)
        p = np.maximum(1, np.round(base * jitter)).astype(int)
        jobs.append(Job(j, t, route, {m: int(x) for m, x in zip(route, p)}, rack_type=rack))
    js = with_random_deadlines(JobSet(jobs, machines), seed=rng.integers(2 ** 32), T=T, R=R)
    pool = ResourcePool({r: racks_per_type for r in range(n_rack_types)}, n_carriers, 10,
                        LoadingArea() if loading else None)
    return js, pool
