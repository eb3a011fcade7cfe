"""
Domain model of the job shop: jobs, machines, plans and schedules.

A *plan* is an ordering of job ids. A black-box scheduler turns a plan into
a *schedule*, i.e. one time interval per job and route stage. Everything in
this module is immutable once built, so instances can be shared freely
between search threads.

Time is measured in integer steps throughout.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Optional, Sequence, Union

import numpy as np


class InstanceError(ValueError):
    """Raised when a job, job set or plan violates its structural invariants."""


class ScheduleStructureError(ValueError):
    """A schedule refers to jobs or machines that do not exist.

    Kept apart from infeasibility: an infeasible schedule is still a
    well-formed object, this one is not.
    """


@dataclass(frozen=True)
class Machine:
    id: int
    group: int = -1

    def __post_init__(self):
        # machines without an explicit group form a singleton group
        if self.group == -1:
            object.__setattr__(self, "group", self.id)


@dataclass(frozen=True, eq=True)
class Job:
    """A production item travelling along a fixed machine route.

    ``proc_times`` maps each machine id of the route to its processing time.
    A route stage listed as machine ``m`` may be served by any machine in
    ``m``'s parallel group.
    """

    id: int
    job_type: int
    route: tuple
    proc_times: Mapping[int, int]
    deadline: Optional[int] = None
    rack_type: Optional[int] = None

    def __post_init__(self):
        route = tuple(int(m) for m in self.route)
        object.__setattr__(self, "route", route)
        object.__setattr__(self, "proc_times", {int(k): int(v) for k, v in self.proc_times.items()})
        if not route:
            raise InstanceError(f"job {self.id}: empty route")
        if len(set(route)) != len(route):
            raise InstanceError(f"job {self.id}: route repeats a machine")
        if set(self.proc_times) != set(route):
            raise InstanceError(f"job {self.id}: proc_times keys must equal the route machines")
        if any(p <= 0 for p in self.proc_times.values()):
            raise InstanceError(f"job {self.id}: processing times must be positive")
        if self.deadline is not None and self.deadline < 0:
            raise InstanceError(f"job {self.id}: negative deadline")

    __hash__ = object.__hash__

    @property
    def total_processing(self) -> int:
        return sum(self.proc_times.values())

    @property
    def stage_times(self) -> tuple:
        return tuple(self.proc_times[m] for m in self.route)


class JobSet:
    """The set ``J`` of jobs together with the machines they use.

    Job ids must be the dense range ``0..n-1`` so that plans and search
    statistics can index arrays directly.
    """

    def __init__(self, jobs: Iterable[Job], machines: Iterable[Machine]):
        self.jobs = tuple(sorted(jobs, key=lambda j: j.id))
        self.machines = tuple(machines)
        ids = [j.id for j in self.jobs]
        if ids != list(range(len(ids))):
            raise InstanceError("job ids must be unique and dense 0..n-1")
        mids = [m.id for m in self.machines]
        if len(set(mids)) != len(mids):
            raise InstanceError("machine ids must be unique")
        known = set(mids)
        for job in self.jobs:
            missing = set(job.route) - known
            if missing:
                raise InstanceError(f"job {job.id} routes through unknown machines {sorted(missing)}")

    def __len__(self) -> int:
        return len(self.jobs)

    def __getitem__(self, job_id: int) -> Job:
        return self.jobs[job_id]

    def __iter__(self):
        return iter(self.jobs)

    def __repr__(self) -> str:
        return f"JobSet(n_jobs={len(self.jobs)}, n_machines={len(self.machines)})"

    @property
    def n(self) -> int:
        return len(self.jobs)

    @cached_property
    def machine_index(self) -> dict:
        return {m.id: i for i, m in enumerate(self.machines)}

    @cached_property
    def machine_group(self) -> dict:
        return {m.id: m.group for m in self.machines}

    @cached_property
    def group_members(self) -> dict:
        members: dict = {}
        for m in self.machines:
            members.setdefault(m.group, []).append(m.id)
        return {g: tuple(sorted(ms)) for g, ms in members.items()}

    @property
    def has_deadlines(self) -> bool:
        return all(j.deadline is not None for j in self.jobs)

    @cached_property
    def deadlines(self) -> np.ndarray:
        if not self.has_deadlines:
            raise InstanceError("not every job has a deadline")
        return np.array([j.deadline for j in self.jobs], dtype=np.int64)

    @cached_property
    def total_processing(self) -> np.ndarray:
        return np.array([j.total_processing for j in self.jobs], dtype=np.int64)

    @cached_property
    def compiled(self) -> "CompiledJobSet":
        return CompiledJobSet.build(self)

    # -- serialisation -------------------------------------------------

    def to_dict(self) -> dict:
        jobs = []
        for j in self.jobs:
            d = {
                "id": j.id,
                "type": j.job_type,
                "route": list(j.route),
                "proc_times": {str(m): p for m, p in j.proc_times.items()},
            }
            if j.deadline is not None:
                d["deadline"] = j.deadline
            if j.rack_type is not None:
                d["rack_type"] = j.rack_type
            jobs.append(d)
        return {"machines": [{"id": m.id, "group": m.group} for m in self.machines], "jobs": jobs}

    @classmethod
    def from_dict(cls, data: Mapping) -> "JobSet":
        unknown = set(data) - {"machines", "jobs"}
        if unknown:
            raise InstanceError(f"unknown instance keys: {sorted(unknown)}")
        machines = []
        for m in data["machines"]:
            if isinstance(m, Mapping):
                machines.append(Machine(int(m["id"]), int(m.get("group", -1))))
            else:
                machines.append(Machine(int(m)))
        jobs = [
            Job(
                id=int(d["id"]),
                job_type=int(d.get("type", 0)),
                route=tuple(d["route"]),
                proc_times={int(k): int(v) for k, v in d["proc_times"].items()},
                deadline=d.get("deadline"),
                rack_type=d.get("rack_type"),
            )
            for d in data["jobs"]
        ]
        return cls(jobs, machines)

    def to_json(self, path: Union[str, Path, None] = None) -> str:
        text = json.dumps(self.to_dict(), indent=1)
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, source: Union[str, Path]) -> "JobSet":
        p = Path(source)
        if p.suffix == ".json" and p.exists():
            return cls.from_dict(json.loads(p.read_text()))
        return cls.from_dict(json.loads(str(source)))


@dataclass(frozen=True)
class CompiledJobSet:
    """Array form of a :class:`JobSet` consumed by the numba dispatch kernels.

    Machines are addressed by their position in ``JobSet.machines`` and
    groups by a dense index; ``group_machines[group_ptr[g]:group_ptr[g+1]]``
    lists the machine indices of group ``g`` in ascending machine-id order.
    """

    route_groups: np.ndarray   # (n, L) group index per stage, -1 padded
    route_procs: np.ndarray    # (n, L) processing time per stage
    route_len: np.ndarray      # (n,)
    group_ptr: np.ndarray
    group_machines: np.ndarray
    n_machines: int

    @classmethod
    def build(cls, jobs: JobSet) -> "CompiledJobSet":
        n = jobs.n
        L = max((len(j.route) for j in jobs), default=1)
        groups = sorted(jobs.group_members)
        gidx = {g: i for i, g in enumerate(groups)}
        rg = np.full((n, L), -1, dtype=np.int64)
        rp = np.zeros((n, L), dtype=np.int64)
        rl = np.zeros(n, dtype=np.int64)
        for j in jobs:
            rl[j.id] = len(j.route)
            for s, m in enumerate(j.route):
                rg[j.id, s] = gidx[jobs.machine_group[m]]
                rp[j.id, s] = j.proc_times[m]
        ptr = [0]
        flat = []
        for g in groups:
            flat.extend(jobs.machine_index[m] for m in jobs.group_members[g])
            ptr.append(len(flat))
        return cls(rg, rp, rl, np.array(ptr, dtype=np.int64), np.array(flat, dtype=np.int64), len(jobs.machines))


class Plan:
    """An ordered, duplicate-free sequence of job ids."""

    __slots__ = ("sequence",)

    def __init__(self, sequence: Iterable[int]):
        seq = tuple(int(j) for j in sequence)
        if len(set(seq)) != len(seq):
            raise InstanceError("plan contains duplicate job ids")
        self.sequence = seq

    def __len__(self):
        return len(self.sequence)

    def __iter__(self):
        return iter(self.sequence)

    def __getitem__(self, i):
        return self.sequence[i]

    def __eq__(self, other):
        if isinstance(other, Plan):
            return self.sequence == other.sequence
        return NotImplemented

    def __hash__(self):
        return hash(self.sequence)

    def __repr__(self):
        return f"Plan({list(self.sequence)})"

    def is_complete(self, jobs: JobSet) -> bool:
        return len(self.sequence) == jobs.n and set(self.sequence) == set(range(jobs.n))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.sequence, dtype=np.int64)


PlanLike = Union[Plan, Sequence[int], np.ndarray]


def plan_array(plan: PlanLike, jobs: JobSet, complete: bool = True) -> np.ndarray:
    """Normalise ``plan`` to an int64 array, checking it against ``jobs``."""
    arr = plan.as_array() if isinstance(plan, Plan) else np.asarray(plan, dtype=np.int64).ravel()
    if arr.size and (arr.min() < 0 or arr.max() >= jobs.n):
        raise InstanceError("plan references unknown job ids")
    if complete:
        if arr.size != jobs.n or np.bincount(arr, minlength=jobs.n).max(initial=0) > 1:
            raise InstanceError("plan is not a complete permutation of the job set")
    elif np.unique(arr).size != arr.size:
        raise InstanceError("plan contains duplicate job ids")
    return arr


class Interval(NamedTuple):
    machine: int
    start: int
    end: int


@dataclass(frozen=True)
class Schedule:
    """Per-job route intervals produced by a scheduler."""

    assignments: Mapping[int, tuple] = field(default_factory=dict)

    def start(self, job_id: int) -> int:
        return self.assignments[job_id][0].start

    def completion(self, job_id: int) -> int:
        return self.assignments[job_id][-1].end

    @property
    def job_ids(self) -> list:
        return sorted(self.assignments)

    def completion_times(self, n: Optional[int] = None) -> np.ndarray:
        n = len(self.assignments) if n is None else n
        c = np.zeros(n, dtype=np.int64)
        for j, ivs in self.assignments.items():
            c[j] = ivs[-1].end
        return c

    def intervals(self):
        """Yield ``(job_id, interval)`` pairs in job order."""
        for j in self.job_ids:
            for iv in self.assignments[j]:
                yield j, iv

    def to_csv(self, path: Union[str, Path, None] = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["job_id", "machine", "start", "end"])
        for j, iv in self.intervals():
            w.writerow([j, iv.machine, iv.start, iv.end])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, text: str) -> "Schedule":
        rows: dict = {}
        for r in csv.DictReader(io.StringIO(text)):
            rows.setdefault(int(r["job_id"]), []).append(Interval(int(r["machine"]), int(r["start"]), int(r["end"])))
        return cls({j: tuple(sorted(v, key=lambda iv: iv.start)) for j, v in rows.items()})

    @classmethod
    def from_arrays(cls, jobs: JobSet, starts: np.ndarray, machines: np.ndarray) -> "Schedule":
        """Build a schedule from kernel output (stage start times and machine indices)."""
        assignments = {}
        for job in jobs:
            ivs = []
            for s, m in enumerate(job.route):
                st = int(starts[job.id, s])
                ivs.append(Interval(jobs.machines[int(machines[job.id, s])].id, st, st + job.proc_times[m]))
            assignments[job.id] = tuple(ivs)
        return cls(assignments)


@dataclass(frozen=True)
class Violation:
    kind: str      # machine-overlap | job-overlap | route-order | wrong-duration | wrong-machine | stage-count | negative-start
    job: int
    machine: Optional[int] = None
    detail: str = ""


def validate_schedule(schedule: Schedule, jobs: JobSet) -> list:
    """Check feasibility of ``schedule`` against ``jobs``.

    Returns an empty list when the schedule is feasible, otherwise one
    :class:`Violation` per problem found. References to unknown jobs or
    machines raise :class:`ScheduleStructureError` instead.
    """
    violations = []
    per_machine: dict = {}
    for j, ivs in schedule.assignments.items():
        if not 0 <= j < jobs.n:
            raise ScheduleStructureError(f"unknown job id {j}")
        job = jobs[j]
        for iv in ivs:
            if iv.machine not in jobs.machine_group:
                raise ScheduleStructureError(f"unknown machine id {iv.machine}")
        if len(ivs) != len(job.route):
            violations.append(Violation("stage-count", j, detail=f"{len(ivs)} intervals for {len(job.route)} stages"))
            continue
        for stage, (m, iv) in enumerate(zip(job.route, ivs)):
            if jobs.machine_group[iv.machine] != jobs.machine_group[m]:
                violations.append(Violation("wrong-machine", j, iv.machine, f"stage {stage} belongs on group of {m}"))
            if iv.end - iv.start != job.proc_times[m]:
                violations.append(Violation("wrong-duration", j, iv.machine, f"stage {stage}"))
            if iv.start < 0:
                violations.append(Violation("negative-start", j, iv.machine))
            per_machine.setdefault(iv.machine, []).append((iv.start, iv.end, j))
        for a, b in zip(ivs, ivs[1:]):
            if b.start < a.end:
                kind = "job-overlap" if b.end > a.start else "route-order"
                violations.append(Violation(kind, j, b.machine, f"[{a.start},{a.end}) then [{b.start},{b.end})"))
    for m, items in per_machine.items():
        items.sort()
        reach, owner = items[0][1], items[0][2]
        for s2, e2, j2 in items[1:]:
            if s2 < reach:
                violations.append(Violation("machine-overlap", j2, m, f"job {owner} busy until {reach}, job {j2} starts {s2}"))
            if e2 > reach:
                reach, owner = e2, j2
    return violations
