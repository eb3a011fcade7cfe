"""Key-value experiment configuration.

One ``key = value`` pair per line; ``#`` starts a comment. Lists are
comma-separated, enhancement sets are separated by ``;``. See
:class:`ExperimentConfig` for the keys and their defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Union

ALGORITHMS = ("spt", "lpt", "edd", "random", "flat", "mcts", "nmcs", "hmcts", "hnmcs")
TREE_ALGOS = ("mcts", "hmcts")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    problem: int = 1
    jobs: int = 200
    machines: int = 10
    instances: int = 1
    instance_seed: int = 0
    instance_file: Optional[str] = None
    T: float = 0.2
    R: float = 0.8
    dispatcher: Optional[str] = None      # online | offline | resource; default depends on problem
    objective: str = "makespan"
    algorithms: tuple = ("mcts",)
    enhancements: tuple = ("none",)       # applied to mcts and hmcts only
    seeds: int = 10
    seed_base: int = 0
    budget_ms: Optional[float] = 500.0
    budget_sims: Optional[int] = None
    threads: int = 4
    C: float = 0.5
    W: float = 5.0
    nmcs_level: int = 2
    abstraction: str = "integrated"       # integrated | detached | flat
    abstraction_share: float = 0.2
    workers: int = 1
    figures: bool = False
    expect: tuple = ()
    expect_wins: tuple = ()

    def __post_init__(self):
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ConfigError(f"unknown algorithms {bad}; expected any of {ALGORITHMS}")
        if self.problem not in (1, 2, 3):
            raise ConfigError("problem must be 1, 2 or 3")
        if self.budget_ms is None and self.budget_sims is None:
            raise ConfigError("set budget_ms or budget_sims")
        if self.seeds < 1 or self.instances < 1:
            raise ConfigError("seeds and instances must be >= 1")
        if self.abstraction not in ("integrated", "detached", "flat"):
            raise ConfigError(f"unknown abstraction {self.abstraction!r}")
        if not 0 <= self.abstraction_share < 1:
            raise ConfigError("abstraction_share must lie in [0, 1)")

    @property
    def default_dispatcher(self) -> str:
        if self.dispatcher:
            return self.dispatcher
        return {1: "online", 2: "offline", 3: "resource"}[self.problem]

    def full_scale(self) -> "ExperimentConfig":
        """Full-size instances and 10 s per step."""
        jobs = {1: 2000, 2: 200, 3: 6000}[self.problem]
        return replace(self, jobs=jobs, budget_ms=10000.0, budget_sims=None)

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                v = "none"
            elif f.name in ("enhancements", "expect", "expect_wins"):
                v = "; ".join(v)
            elif isinstance(v, tuple):
                v = ", ".join(map(str, v))
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"


def _convert(name: str, raw: str, ftype):
    raw = raw.strip()
    try:
        if name in ("enhancements", "expect", "expect_wins"):
            return tuple(s.strip() for s in raw.split(";") if s.strip())
        if name == "algorithms":
            return tuple(s.strip().lower() for s in raw.split(",") if s.strip())
        if raw.lower() in ("", "none") and "Optional" in str(ftype):
            return None
        if "bool" in str(ftype):
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if "int" in str(ftype) and "float" not in str(ftype):
            return int(raw)
        if "float" in str(ftype):
            return float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {name}: {raw!r}") from None


def parse_config(text: str) -> ExperimentConfig:
    known = {f.name: f.type for f in fields(ExperimentConfig)}
    values, unknown = {}, []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key = value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in known:
            unknown.append(key)
            continue
        values[key] = _convert(key, raw, known[key])
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    return ExperimentConfig(**values)


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    return parse_config(Path(path).read_text())
