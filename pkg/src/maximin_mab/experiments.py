"""Scenario configuration, instance generators and sweep runners.

Config files are TOML with four optional tables; every key has a default
(the m=6, p=5 affine experiment)::

    [instance]
    family = "bernoulli"        # bernoulli | gaussian | gaussian_truncated
    sigma = 1.0
    generator = "affine"        # affine | explicit
    g = 0.05                    # affine: mean[i][j] = 0.5 - g*(i-j), 1-based i, j
    m = 6                       # affine default 6; explicit: checked if given
    p = 5                       # affine default 5; explicit: checked if given
    # means = [[0.9], [0.1]]    # explicit only

    [run]
    policy = "maximin_ucb"      # maximin_ucb | uniform_random | greedy_maximin | oracle
    oracle_channel = 0          # oracle only, 0-based
    horizon = 50000
    delta_rule = "inverse_horizon"  # inverse_horizon | inverse_horizon_squared | fixed
    delta = 0.01                # fixed only
    replications = 1000
    seed = 0
    checkpoints = []            # empty: 50 log-spaced rounds plus the horizon
    workers = 1

    [sweep]
    gaps = [0.03, 0.04, 0.05, 0.06, 0.07]
    channels = [4, 6, 8]
    nodes = [4, 6, 8]

    [concentration]
    family = "gaussian"
    sample_count = 100
    mu = 0.0
    sigma = 1.0
    epsilon = 0.5
    trials = 10000

Overrides use dotted keys, e.g. ``run.horizon=1000``; values are parsed as
TOML literals, falling back to bare strings.
"""

from __future__ import annotations

import copy
import enum
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .analysis import ExperimentReport, ReportRow, aggregate_runs, combine_rows
from .core import Family, ProblemInstance, make_instance
from .policies import Policy, PolicyKind
from .simulation import SimulationTrace, gap_profile, run_batch

__all__ = [
    "ConfigError",
    "DeltaRule",
    "AffineGrid",
    "Explicit",
    "ScenarioConfig",
    "Config",
    "DEFAULTS",
    "gen_affine_instance",
    "default_checkpoints",
    "load_config",
    "apply_overrides",
    "build_config",
    "run_replications",
    "run_scenario",
    "run_gap_sweep",
    "run_scale_sweep",
]


class ConfigError(Exception):
    """Unreadable or malformed configuration (as opposed to invalid values)."""


class DeltaRule(str, enum.Enum):
    INVERSE_HORIZON = "inverse_horizon"
    INVERSE_HORIZON_SQUARED = "inverse_horizon_squared"
    FIXED = "fixed"


def gen_affine_instance(g: float, m: int, p: int, sigma: float = 1.0, family: Family | str = Family.BERNOULLI) -> ProblemInstance:
    """Instance with ``mean[i][j] = 0.5 - g*(i - j)`` for 1-based ``i``, ``j``.

    Row minima sit in the first column, so channel 0 is optimal and channel
    ``i`` (0-based) has gap ``g*i``.
    """
    if m < 1 or p < 1:
        raise ValueError(f"need m >= 1 and p >= 1, got m={m}, p={p}")
    i = np.arange(1, m + 1)[:, None]
    j = np.arange(1, p + 1)[None, :]
    return make_instance(0.5 - g * (i - j), sigma, family)


@dataclass(frozen=True)
class AffineGrid:
    g: float
    m: int
    p: int


@dataclass(frozen=True)
class Explicit:
    means: tuple[tuple[float, ...], ...]


def default_checkpoints(horizon: int, count: int = 50) -> tuple[int, ...]:
    pts = np.unique(np.round(np.geomspace(1, horizon, count)).astype(np.int64))
    pts = pts[(pts >= 1) & (pts <= horizon)]
    return tuple(int(x) for x in np.union1d(pts, [horizon]))


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to run one scenario's replications."""

    generator: AffineGrid | Explicit = AffineGrid(0.05, 6, 5)
    family: Family = Family.BERNOULLI
    sigma: float = 1.0
    horizon: int = 50_000
    delta_rule: DeltaRule = DeltaRule.INVERSE_HORIZON
    delta_value: float | None = None
    replications: int = 1000
    seed: int = 0
    checkpoints: tuple[int, ...] | None = None
    policy: PolicyKind = field(default_factory=PolicyKind.maximin_ucb)

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        object.__setattr__(self, "delta_rule", DeltaRule(self.delta_rule))
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if self.horizon < 1:
            raise ValueError("horizon must be positive")
        if self.delta_rule is DeltaRule.FIXED and self.delta_value is None:
            raise ValueError("delta_rule 'fixed' needs a delta value")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        inst = self.instance()  # validates the generator's means
        if self.policy.policy in (Policy.MAXIMIN_UCB, Policy.GREEDY_MAXIMIN) and self.horizon < inst.m:
            raise ValueError(f"horizon must be at least m (horizon={self.horizon}, m={inst.m})")
        self.delta()
        if self.checkpoints is not None:
            ck = tuple(sorted(set(int(c) for c in self.checkpoints)))
            if not ck or ck[0] < 1 or ck[-1] > self.horizon:
                raise ValueError("checkpoints must lie in 1..horizon")
            object.__setattr__(self, "checkpoints", ck)

    def instance(self) -> ProblemInstance:
        gen = self.generator
        if isinstance(gen, AffineGrid):
            return gen_affine_instance(gen.g, gen.m, gen.p, self.sigma, self.family)
        return make_instance(gen.means, self.sigma, self.family)

    def delta(self) -> float:
        if self.delta_rule is DeltaRule.INVERSE_HORIZON:
            d = 1.0 / self.horizon
        elif self.delta_rule is DeltaRule.INVERSE_HORIZON_SQUARED:
            d = 1.0 / self.horizon**2
        else:
            d = float(self.delta_value)
        if not 0 < d <= 1:
            raise ValueError(f"delta must lie in (0, 1], got {d}")
        return d

    def resolved_checkpoints(self) -> tuple[int, ...]:
        return self.checkpoints if self.checkpoints is not None else default_checkpoints(self.horizon)


# -- config files -------------------------------------------------------------

DEFAULTS: dict[str, dict[str, Any]] = {
    "instance": {
        "family": "bernoulli",
        "sigma": 1.0,
        "generator": "affine",
        "g": 0.05,
        "m": None,
        "p": None,
        "means": None,
    },
    "run": {
        "policy": "maximin_ucb",
        "oracle_channel": None,
        "horizon": 50_000,
        "delta_rule": "inverse_horizon",
        "delta": None,
        "replications": 1000,
        "seed": 0,
        "checkpoints": [],
        "workers": 1,
    },
    "sweep": {
        "gaps": [0.03, 0.04, 0.05, 0.06, 0.07],
        "channels": [4, 6, 8],
        "nodes": [4, 6, 8],
    },
    "concentration": {
        "family": "gaussian",
        "sample_count": 100,
        "mu": 0.0,
        "sigma": 1.0,
        "epsilon": 0.5,
        "trials": 10_000,
    },
}


@dataclass(frozen=True)
class Config:
    scenario: ScenarioConfig
    workers: int
    sweep: dict[str, list]
    concentration: dict[str, Any]
    raw: dict[str, dict[str, Any]]


def _merge(raw: dict) -> dict:
    merged = copy.deepcopy(DEFAULTS)
    for section, values in raw.items():
        if section not in merged:
            raise ConfigError(f"unknown config section [{section}]")
        if not isinstance(values, dict):
            raise ConfigError(f"[{section}] must be a table")
        for key, value in values.items():
            if key not in merged[section]:
                raise ConfigError(f"unknown config key {section}.{key}")
            merged[section][key] = value
    return merged


def load_config(path: str | Path | None) -> dict[str, dict[str, Any]]:
    """Read a TOML config and merge it over :data:`DEFAULTS`."""
    if path is None:
        return copy.deepcopy(DEFAULTS)
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return _merge(raw)


def _parse_value(text: str) -> Any:
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_overrides(cfg: dict, overrides: Sequence[str]) -> dict:
    cfg = copy.deepcopy(cfg)
    for item in overrides:
        key, sep, value = item.partition("=")
        section, dot, name = key.strip().partition(".")
        if not sep or not dot:
            raise ConfigError(f"override must look like section.key=value, got {item!r}")
        if section not in cfg or name not in cfg[section]:
            raise ConfigError(f"unknown config key {key.strip()}")
        cfg[section][name] = _parse_value(value.strip())
    return cfg


def build_config(cfg: dict) -> Config:
    """Turn a merged config dict into validated dataclasses (raises ValueError)."""
    inst, run = cfg["instance"], cfg["run"]
    gen_name = str(inst["generator"]).lower()
    if gen_name == "affine":
        m = 6 if inst["m"] is None else int(inst["m"])
        p = 5 if inst["p"] is None else int(inst["p"])
        generator: AffineGrid | Explicit = AffineGrid(float(inst["g"]), m, p)
    elif gen_name == "explicit":
        if not inst["means"]:
            raise ValueError("generator 'explicit' needs a means matrix")
        generator = Explicit(tuple(tuple(float(v) for v in r) for r in inst["means"]))
        shape = (len(generator.means), len(generator.means[0]))
        for name, want, got in (("m", inst["m"], shape[0]), ("p", inst["p"], shape[1])):
            if want is not None and int(want) != got:
                raise ValueError(f"dimension mismatch: {name}={want} but means is {shape[0]}x{shape[1]}")
    else:
        raise ValueError(f"unknown generator {inst['generator']!r} (expected affine or explicit)")
    policy = Policy(str(run["policy"]).lower())
    kind = PolicyKind(policy, run["oracle_channel"] if policy is Policy.ORACLE else None)
    checkpoints = tuple(int(c) for c in run["checkpoints"]) or None
    scenario = ScenarioConfig(
        generator=generator,
        family=Family.parse(inst["family"]),
        sigma=float(inst["sigma"]),
        horizon=int(run["horizon"]),
        delta_rule=DeltaRule(str(run["delta_rule"]).lower()),
        delta_value=None if run["delta"] is None else float(run["delta"]),
        replications=int(run["replications"]),
        seed=int(run["seed"]),
        checkpoints=checkpoints,
        policy=kind,
    )
    workers = int(run["workers"])
    if workers < 1:
        raise ValueError("workers must be at least 1")
    return Config(scenario, workers, dict(cfg["sweep"]), dict(cfg["concentration"]), cfg)


# -- runners ------------------------------------------------------------------


def _run_block(args) -> list[SimulationTrace]:
    instance, kind, horizon, delta, seed, ids, checkpoints, sigma = args
    return run_batch(instance, kind, horizon, delta, seed, ids, checkpoints=checkpoints, sigma=sigma)


def _blocks(n: int, k: int) -> list[range]:
    k = max(1, min(k, n))
    edges = np.linspace(0, n, k + 1).round().astype(int)
    return [range(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def run_replications(scenario: ScenarioConfig, workers: int = 1) -> list[SimulationTrace]:
    """Traces for stream ids ``0..R-1``, in stream-id order, at the scenario's checkpoints.

    Each replication's result depends only on its stream id, so the output is
    the same for any ``workers``.
    """
    inst = scenario.instance()
    ck = scenario.resolved_checkpoints()
    jobs = [
        (inst, scenario.policy, scenario.horizon, scenario.delta(), scenario.seed, list(b), ck, scenario.sigma)
        for b in _blocks(scenario.replications, workers)
    ]
    if workers <= 1 or len(jobs) == 1:
        parts = [_run_block(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
            parts = list(pool.map(_run_block, jobs))
    return [t for part in parts for t in part]


def run_scenario(scenario: ScenarioConfig, label: str = "", workers: int = 1) -> ReportRow:
    if scenario.replications < 2:
        raise ValueError("a report needs at least 2 replications")
    traces = run_replications(scenario, workers)
    return aggregate_runs(
        traces,
        scenario.resolved_checkpoints(),
        scenario=label,
        profile=gap_profile(scenario.instance()),
        sigma=scenario.sigma,
    )


def _gap_label(g: float) -> str:
    return f"gap={g:g}"


def run_gap_sweep(gaps: Sequence[float], base: ScenarioConfig, workers: int = 1) -> ExperimentReport:
    """One affine scenario per minimum gap ``g`` on the base scenario's ``m x p`` grid."""
    gen = base.generator
    if not isinstance(gen, AffineGrid):
        raise ValueError("gap sweep needs an affine generator")
    rows = [
        run_scenario(replace(base, generator=AffineGrid(float(g), gen.m, gen.p)), _gap_label(g), workers)
        for g in gaps
    ]
    return combine_rows(rows)


def run_scale_sweep(
    channel_counts: Sequence[int], node_counts: Sequence[int], base: ScenarioConfig, workers: int = 1
) -> ExperimentReport:
    """One affine scenario per ``(m, p)`` pair, channels outermost."""
    gen = base.generator
    if not isinstance(gen, AffineGrid):
        raise ValueError("scale sweep needs an affine generator")
    rows = []
    for m in channel_counts:
        for p in node_counts:
            sc = replace(base, generator=AffineGrid(gen.g, int(m), int(p)))
            rows.append(run_scenario(sc, f"m={int(m)} p={int(p)}", workers))
    return combine_rows(rows)
