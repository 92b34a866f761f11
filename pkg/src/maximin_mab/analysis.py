"""Regret bounds, Monte Carlo aggregation and a concentration checker.

All logarithms are natural.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .core import Family, RngStream
from .simulation import GapProfile, SimulationTrace

__all__ = [
    "theorem1_bound",
    "theorem2_bound",
    "ReportRow",
    "ExperimentReport",
    "aggregate_runs",
    "combine_rows",
    "ConcentrationResult",
    "concentration_check",
    "REPORT_COLUMNS",
]

Z95 = 1.96
REPORT_COLUMNS = ("scenario", "checkpoint", "mean_regret", "ci_halfwidth", "bound_t1", "bound_t2")


def theorem1_bound(profile: GapProfile, sigma: float, n: int) -> float:
    """Gap-dependent bound ``3 sum(gaps) + sum_{gap>0} 16 sigma^2 log(n) / gap``."""
    gaps = np.asarray(profile.gaps, dtype=float)
    pos = gaps[gaps > 0]
    log_n = math.log(n)
    return float(3.0 * math.fsum(gaps) + math.fsum(16.0 * sigma**2 * log_n / pos))


def theorem2_bound(profile: GapProfile, sigma: float, m: int, n: int) -> float:
    """Gap-free bound ``8 sqrt(n m sigma^2 log n) + 3 sum(gaps)``."""
    gaps = np.asarray(profile.gaps, dtype=float)
    return float(8.0 * math.sqrt(n * m * sigma**2 * math.log(n)) + 3.0 * math.fsum(gaps))


@dataclass(frozen=True, eq=False)
class ReportRow:
    """One scenario aggregated over replications."""

    scenario: str
    checkpoints: np.ndarray
    mean_regret: np.ndarray
    ci_halfwidth: np.ndarray
    bound_t1: np.ndarray
    bound_t2: np.ndarray
    replications: int


class ExperimentReport:
    """Scenario-by-checkpoint tables of mean regret, CI half-widths and bounds.

    Equality compares the tabular content only (what the CSV carries), so a
    report read back from CSV equals the one written to JSON.
    """

    def __init__(
        self,
        scenarios: Sequence[str],
        checkpoints: Sequence[int],
        mean_regret,
        ci_halfwidth,
        bound_t1,
        bound_t2,
        replications: int | None = None,
    ):
        self.scenarios = list(scenarios)
        self.checkpoints = np.asarray(checkpoints, dtype=np.int64)
        self.mean_regret = np.asarray(mean_regret, dtype=float).reshape(len(self.scenarios), -1)
        self.ci_halfwidth = np.asarray(ci_halfwidth, dtype=float).reshape(self.mean_regret.shape)
        self.bound_t1 = np.asarray(bound_t1, dtype=float).reshape(self.mean_regret.shape)
        self.bound_t2 = np.asarray(bound_t2, dtype=float).reshape(self.mean_regret.shape)
        self.replications = replications
        if self.mean_regret.shape[1] != self.checkpoints.size:
            raise ValueError("report tables must have one column per checkpoint")
        if np.any(self.ci_halfwidth < 0):
            raise ValueError("confidence half-widths must be non-negative")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExperimentReport):
            return NotImplemented
        return (
            self.scenarios == other.scenarios
            and np.array_equal(self.checkpoints, other.checkpoints)
            and all(
                np.array_equal(getattr(self, k), getattr(other, k), equal_nan=True)
                for k in ("mean_regret", "ci_halfwidth", "bound_t1", "bound_t2")
            )
        )

    def __repr__(self) -> str:
        return f"ExperimentReport(scenarios={self.scenarios}, checkpoints={self.checkpoints.size})"

    def final(self, scenario: str) -> tuple[float, float]:
        """``(mean, half-width)`` at the last checkpoint."""
        k = self.scenarios.index(scenario)
        return float(self.mean_regret[k, -1]), float(self.ci_halfwidth[k, -1])

    # -- serialisation ------------------------------------------------------

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for k, name in enumerate(self.scenarios):
            for c, ck in enumerate(self.checkpoints):
                w.writerow(
                    [
                        name,
                        int(ck),
                        repr(float(self.mean_regret[k, c])),
                        repr(float(self.ci_halfwidth[k, c])),
                        repr(float(self.bound_t1[k, c])),
                        repr(float(self.bound_t2[k, c])),
                    ]
                )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ExperimentReport":
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != REPORT_COLUMNS:
            raise ValueError(f"report CSV must have columns {', '.join(REPORT_COLUMNS)}")
        data: dict[str, list[dict]] = {}
        for rec in reader:
            data.setdefault(rec["scenario"], []).append(rec)
        scenarios = list(data)
        checkpoints = [int(r["checkpoint"]) for r in data[scenarios[0]]] if scenarios else []
        cols = {k: [] for k in REPORT_COLUMNS[2:]}
        for name in scenarios:
            if [int(r["checkpoint"]) for r in data[name]] != checkpoints:
                raise ValueError("every scenario must share the same checkpoints")
            for k in cols:
                cols[k].append([float(r[k]) for r in data[name]])
        return cls(scenarios, checkpoints, **cols)

    def to_json(self) -> str:
        def enc(a):
            return [[None if math.isnan(v) else float(v) for v in row] for row in a]

        doc = {
            "columns": list(REPORT_COLUMNS),
            "replications": self.replications,
            "checkpoints": [int(c) for c in self.checkpoints],
            "scenarios": self.scenarios,
            "mean_regret": enc(self.mean_regret),
            "ci_halfwidth": enc(self.ci_halfwidth),
            "bound_t1": enc(self.bound_t1),
            "bound_t2": enc(self.bound_t2),
        }
        return json.dumps(doc, indent=2) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        doc = json.loads(text)

        def dec(a):
            return [[math.nan if v is None else v for v in row] for row in a]

        return cls(
            doc["scenarios"],
            doc["checkpoints"],
            dec(doc["mean_regret"]),
            dec(doc["ci_halfwidth"]),
            dec(doc["bound_t1"]),
            dec(doc["bound_t2"]),
            replications=doc.get("replications"),
        )


def aggregate_runs(
    traces: Sequence[SimulationTrace],
    checkpoints: Sequence[int],
    scenario: str = "",
    profile: GapProfile | None = None,
    sigma: float = 1.0,
    z: float = Z95,
) -> ReportRow:
    """Mean regret and normal-approximation CI half-width per checkpoint.

    Sums use :func:`math.fsum`, which is exactly rounded, so the row does not
    depend on trace order. Bound curves are filled when ``profile`` is given
    and are NaN otherwise.
    """
    traces = list(traces)
    if len(traces) < 2:
        raise ValueError("aggregate_runs needs at least 2 traces")
    horizons = {t.horizon for t in traces}
    if len(horizons) != 1:
        raise ValueError(f"mismatched horizons: {sorted(horizons)}")
    ck = np.asarray(checkpoints, dtype=np.int64)
    vals = np.stack([t.regret_at(ck) for t in traces])  # (R, C)
    R = vals.shape[0]
    mean = np.empty(ck.size)
    half = np.empty(ck.size)
    for c in range(ck.size):
        col = vals[:, c].tolist()
        mu = math.fsum(col) / R
        var = math.fsum((v - mu) ** 2 for v in col) / (R - 1)
        mean[c] = mu
        half[c] = z * math.sqrt(var) / math.sqrt(R)
    if profile is not None:
        m = profile.gaps.size
        b1 = np.array([theorem1_bound(profile, sigma, int(n)) for n in ck])
        b2 = np.array([theorem2_bound(profile, sigma, m, int(n)) for n in ck])
    else:
        b1 = np.full(ck.size, np.nan)
        b2 = np.full(ck.size, np.nan)
    return ReportRow(scenario, ck, mean, half, b1, b2, R)


def combine_rows(rows: Iterable[ReportRow]) -> ExperimentReport:
    rows = list(rows)
    if not rows:
        raise ValueError("no rows to combine")
    ck = rows[0].checkpoints
    if any(not np.array_equal(r.checkpoints, ck) for r in rows):
        raise ValueError("all rows must share checkpoints")
    reps = {r.replications for r in rows}
    return ExperimentReport(
        [r.scenario for r in rows],
        ck,
        np.stack([r.mean_regret for r in rows]),
        np.stack([r.ci_halfwidth for r in rows]),
        np.stack([r.bound_t1 for r in rows]),
        np.stack([r.bound_t2 for r in rows]),
        replications=reps.pop() if len(reps) == 1 else None,
    )


@dataclass(frozen=True)
class ConcentrationResult:
    observed: float
    bound: float
    trials: int


def concentration_check(
    sample_count: int,
    mu: float,
    sigma: float,
    epsilon: float,
    trials: int,
    rng: RngStream,
    family: Family | str = Family.GAUSSIAN,
) -> ConcentrationResult:
    """Monte Carlo frequency of ``|mean_hat - mu| >= epsilon`` next to ``2 exp(-N eps^2 / (2 sigma^2))``.

    Each trial averages ``sample_count`` i.i.d. draws: ``N(mu, sigma^2)`` for
    the Gaussian family, ``Bernoulli(mu)`` for the Bernoulli family. ``sigma``
    enters only the analytic bound for Bernoulli draws.
    """
    if sample_count < 1 or trials < 1:
        raise ValueError("sample_count and trials must be positive")
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    family = Family.parse(family)
    gen = rng.rewards
    if family is Family.GAUSSIAN:
        x = mu + sigma * gen.standard_normal((trials, sample_count))
    elif family is Family.BERNOULLI:
        if not 0 <= mu <= 1:
            raise ValueError("Bernoulli mean must lie in [0, 1]")
        x = (gen.random((trials, sample_count)) < mu).astype(float)
    else:
        raise ValueError(f"concentration_check does not support the {family.value} family")
    dev = np.abs(x.mean(axis=1) - mu)
    observed = float(np.count_nonzero(dev >= epsilon)) / trials
    bound = 2.0 * math.exp(-sample_count * epsilon**2 / (2.0 * sigma**2))
    return ConcentrationResult(observed=observed, bound=bound, trials=trials)
