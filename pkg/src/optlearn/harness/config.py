"""Run configuration: a TOML file with ``[problem]``, ``[[policy]]`` and ``[run]``.

Example::

    [problem]
    name = "auf"
    ratio = 0.5          # or in a [problem.auf] sub-table

    [[policy]]
    kind = "kgcb"

    [[policy]]
    kind = "ie"
    z_alpha = 0.969
    belief = "correlated"

    [run]
    budget = 100
    replications = 200
    seed = 7
    output_dir = "out"
"""
from __future__ import annotations

import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..errors import ConfigError, OptLearnError
from ..policies import PolicyKind
from ..problems import make_problem
from .runner import PolicySpec

DEFAULT_REPLICATIONS = 1000
_POLICY_KEYS = {"kind", "name", "belief", "z_alpha", "alpha", "tie_break", "randomized"}
_RUN_KEYS = {"budget", "replications", "seed", "output_dir", "threads", "oc_ratio", "trajectory"}


@dataclass(frozen=True)
class RunConfig:
    problem: str
    problem_params: dict
    policies: tuple
    budget: int
    replications: int = DEFAULT_REPLICATIONS
    seed: int = 0
    output_dir: str = "results"
    threads: Optional[int] = None
    oc_ratio: bool = True
    trajectory: bool = True

    def __post_init__(self):
        if not isinstance(self.budget, int) or self.budget < 1:
            raise ConfigError(f"budget must be an integer >= 1, got {self.budget!r}")
        if not isinstance(self.replications, int) or self.replications < 1:
            raise ConfigError(f"replications must be an integer >= 1, got {self.replications!r}")
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigError(f"seed must be a non-negative integer, got {self.seed!r}")
        if not self.policies:
            raise ConfigError("at least one [[policy]] entry is required")
        names = [p.name for p in self.policies]
        if len(set(names)) != len(names):
            raise ConfigError(f"policy names must be unique, got {names}")

    def build_problem(self):
        try:
            return make_problem(self.problem, **self.problem_params)
        except TypeError as exc:
            raise ConfigError(f"bad parameters for problem {self.problem!r}: {exc}") from None
        except OptLearnError as exc:
            raise ConfigError(str(exc)) from None

    def with_overrides(self, **overrides):
        """Copy with every non-None override applied."""
        clean = {k: v for k, v in overrides.items() if v is not None}
        params = dict(self.problem_params)
        params.update(clean.pop("problem_params", {}))
        try:
            return replace(self, problem_params=params, **clean)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    def to_dict(self):
        return {
            "problem": {"name": self.problem, **self.problem_params},
            "policy": [policy_to_dict(p) for p in self.policies],
            "run": {
                "budget": self.budget,
                "replications": self.replications,
                "seed": self.seed,
                "output_dir": self.output_dir,
                "threads": self.threads,
                "oc_ratio": self.oc_ratio,
                "trajectory": self.trajectory,
            },
        }


def policy_to_dict(spec: PolicySpec):
    cfg = spec.config
    out = {"name": spec.name, "kind": cfg.kind.value, "belief": spec.belief,
           "tie_break": cfg.tie_break.value}
    if cfg.z_alpha is not None:
        out["z_alpha"] = cfg.z_alpha
    if cfg.alpha is not None:
        out["alpha"] = cfg.alpha
    if cfg.randomized:
        out["randomized"] = True
    return out


def parse_policy(entry) -> PolicySpec:
    if not isinstance(entry, dict) or "kind" not in entry:
        raise ConfigError(f"each policy needs a 'kind', got {entry!r}")
    unknown = set(entry) - _POLICY_KEYS
    if unknown:
        raise ConfigError(f"unknown policy keys {sorted(unknown)}")
    params = dict(entry)
    kind = params.pop("kind")
    try:
        PolicyKind(kind)
        return PolicySpec.make(kind, **params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_policy_flag(text: str) -> PolicySpec:
    """Parse ``kind[:key=value,...]``, e.g. ``ie:z_alpha=1.5,belief=correlated``."""
    kind, _, rest = text.partition(":")
    entry = {"kind": kind.strip()}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"policy option {item!r} must look like key=value")
        entry[key.strip()] = coerce_value(value.strip())
    return parse_policy(entry)


def coerce_value(value: str):
    low = value.lower()
    if low in ("true", "false"):
        return low == "true"
    for cast in (int, float):
        try:
            return cast(value)
        except ValueError:
            pass
    return value


def config_from_dict(data) -> RunConfig:
    problem = data.get("problem")
    if not isinstance(problem, dict) or "name" not in problem:
        raise ConfigError("[problem] must set 'name'")
    name = problem["name"]
    params = {k: v for k, v in problem.items() if k != "name" and not isinstance(v, dict)}
    nested = problem.get(name, {})
    if not isinstance(nested, dict):
        raise ConfigError(f"[problem.{name}] must be a table")
    params.update(nested)

    policies = tuple(parse_policy(p) for p in data.get("policy", []))
    run = data.get("run", {})
    unknown = set(run) - _RUN_KEYS
    if unknown:
        raise ConfigError(f"unknown [run] keys {sorted(unknown)}")
    if "budget" not in run:
        raise ConfigError("[run] must set 'budget'")
    return RunConfig(problem=name, problem_params=params, policies=policies, **run)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        with path.open("rb") as fh:
            data = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(data)
