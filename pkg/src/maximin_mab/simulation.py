"""Episodes, gap profiles and pseudo-regret traces.

Regret here is pseudo-regret: round ``t`` adds ``mu_star - min_j mu[I_t, j]``
computed from the true means, so a trace's final value equals
``sum_i gap_i * T_i(n)`` up to floating-point summation error.

Two runners are provided. :func:`run_episode` is the reference loop built
from :mod:`maximin_mab.policies`. :func:`run_batch` advances many
replications in lockstep with NumPy and reproduces :func:`run_episode`
bit for bit on each stream.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import Observation, ProblemInstance, RngStream, draw_base, sample_rewards, transform_base
from .policies import (
    Policy,
    PolicyKind,
    exploration_bonus,
    init_state,
    log_inv_delta,
    select_channel,
    update_state,
)

__all__ = [
    "GapProfile",
    "SimulationTrace",
    "gap_profile",
    "run_episode",
    "run_batch",
    "trace_to_csv",
    "write_trace_csv",
]


@dataclass(frozen=True)
class GapProfile:
    """Maximin optimal channel, its value, and every channel's gap."""

    best: int
    best_value: float
    gaps: np.ndarray

    @property
    def min_gap(self) -> float:
        """Smallest positive gap, or 0.0 if every channel is optimal."""
        pos = self.gaps[self.gaps > 0]
        return float(pos.min()) if pos.size else 0.0


def gap_profile(instance: ProblemInstance) -> GapProfile:
    rmin = instance.row_minima
    best = int(np.argmax(rmin))
    value = float(rmin[best])
    gaps = value - rmin
    gaps[best] = 0.0
    gaps.setflags(write=False)
    return GapProfile(best=best, best_value=value, gaps=gaps)


@dataclass(frozen=True, eq=False)
class SimulationTrace:
    """Result of one episode.

    ``regret_curve[k]`` is the cumulative pseudo-regret after round
    ``rounds[k]`` (1-based). A full-resolution trace has
    ``rounds == 1..horizon``; a subsampled trace keeps only checkpoint rounds
    and may drop ``actions``.
    """

    horizon: int
    regret_curve: np.ndarray
    final_counts: np.ndarray
    rounds: np.ndarray
    actions: np.ndarray | None = None

    @property
    def final_regret(self) -> float:
        return float(self.regret_curve[-1])

    def regret_at(self, rounds: Sequence[int]) -> np.ndarray:
        rounds = np.asarray(rounds, dtype=np.int64)
        pos = np.searchsorted(self.rounds, rounds)
        if np.any(pos >= self.rounds.size) or np.any(self.rounds[np.minimum(pos, self.rounds.size - 1)] != rounds):
            raise KeyError("requested rounds were not recorded in this trace")
        return self.regret_curve[pos]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SimulationTrace):
            return NotImplemented
        same_actions = (self.actions is None and other.actions is None) or (
            self.actions is not None and other.actions is not None and np.array_equal(self.actions, other.actions)
        )
        return (
            self.horizon == other.horizon
            and same_actions
            and np.array_equal(self.rounds, other.rounds)
            and np.array_equal(self.regret_curve, other.regret_curve)
            and np.array_equal(self.final_counts, other.final_counts)
        )


def _check_run(instance: ProblemInstance, kind: PolicyKind, horizon: int, delta: float) -> None:
    if horizon < 1:
        raise ValueError("horizon must be positive")
    if kind.policy in (Policy.MAXIMIN_UCB, Policy.GREEDY_MAXIMIN) and horizon < instance.m:
        raise ValueError(f"horizon must be at least m (horizon={horizon}, m={instance.m})")
    if kind.policy is Policy.ORACLE and kind.channel >= instance.m:
        raise ValueError(f"oracle channel {kind.channel} out of range for m={instance.m}")
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")


def run_episode(
    instance: ProblemInstance,
    kind: PolicyKind,
    horizon: int,
    delta: float,
    rng: RngStream,
    sigma: float | None = None,
) -> SimulationTrace:
    """Play ``horizon`` rounds of select, sample, update.

    ``sigma`` defaults to the instance's sub-Gaussian scale.
    """
    _check_run(instance, kind, horizon, delta)
    sigma = instance.sigma if sigma is None else float(sigma)
    gaps = gap_profile(instance).gaps
    state = init_state(instance.m, instance.p, delta, sigma)
    actions = np.empty(horizon, dtype=np.int64)
    curve = np.empty(horizon)
    regret = 0.0
    for t in range(horizon):
        i = select_channel(state, kind, rng)
        x = sample_rewards(instance, i, rng)
        update_state(state, Observation(t + 1, i, x))
        regret = regret + gaps[i]
        actions[t] = i
        curve[t] = regret
    return SimulationTrace(
        horizon=horizon,
        regret_curve=curve,
        final_counts=state.counts.copy(),
        rounds=np.arange(1, horizon + 1, dtype=np.int64),
        actions=actions,
    )


def run_batch(
    instance: ProblemInstance,
    kind: PolicyKind,
    horizon: int,
    delta: float,
    seed: int,
    stream_ids: Sequence[int],
    checkpoints: Sequence[int] | None = None,
    sigma: float | None = None,
    record_actions: bool = False,
    chunk: int = 2048,
) -> list[SimulationTrace]:
    """Run one episode per stream id, vectorised across replications.

    Replication ``r`` uses ``RngStream(seed, stream_ids[r])`` and consumes it
    exactly like :func:`run_episode`, so each returned trace equals the
    reference trace restricted to ``checkpoints`` (every round when None).
    """
    _check_run(instance, kind, horizon, delta)
    sigma = instance.sigma if sigma is None else float(sigma)
    streams = [RngStream(seed, s) for s in stream_ids]
    R, m, p = len(streams), instance.m, instance.p
    if R == 0:
        return []
    if checkpoints is None:
        ck = np.arange(1, horizon + 1, dtype=np.int64)
    else:
        ck = np.unique(np.asarray(checkpoints, dtype=np.int64))
        if ck.size == 0 or ck[0] < 1 or ck[-1] > horizon:
            raise ValueError("checkpoints must lie in 1..horizon")
    # record_pos[t] is the column written after round t+1, or -1.
    record_pos = np.full(horizon, -1, dtype=np.int64)
    record_pos[ck - 1] = np.arange(ck.size)

    gaps = gap_profile(instance).gaps
    log_term = log_inv_delta(delta)
    policy = kind.policy
    rows = np.arange(R)
    counts = np.zeros((R, m), dtype=np.int64)
    emp = np.zeros((R, m, p))
    rmin = np.full((R, m), np.nan)
    regret = np.zeros(R)
    curve = np.empty((R, ck.size))
    actions = np.empty((R, horizon), dtype=np.int64) if record_actions else None

    for start in range(0, horizon, chunk):
        k = min(chunk, horizon - start)
        base = np.stack([draw_base(instance.family, s.rewards, (k, p)) for s in streams])
        if policy is Policy.UNIFORM_RANDOM:
            upol = np.stack([s.policy.random(k) for s in streams])
        for tl in range(k):
            t = start + tl
            if policy is Policy.ORACLE:
                a = np.full(R, kind.channel, dtype=np.int64)
            elif policy is Policy.UNIFORM_RANDOM:
                a = np.minimum((upol[:, tl] * m).astype(np.int64), m - 1)
            elif t < m:
                a = np.full(R, t, dtype=np.int64)
            elif policy is Policy.MAXIMIN_UCB:
                a = np.argmax(rmin + exploration_bonus(counts, sigma, log_term), axis=1)
            else:
                a = np.argmax(rmin, axis=1)
            x = transform_base(instance, a, base[:, tl, :])
            counts[rows, a] += 1
            cur = emp[rows, a]
            cur += (x - cur) / counts[rows, a][:, None]
            emp[rows, a] = cur
            rmin[rows, a] = cur.min(axis=1)
            regret = regret + gaps[a]
            if actions is not None:
                actions[:, t] = a
            c = record_pos[t]
            if c >= 0:
                curve[:, c] = regret

    return [
        SimulationTrace(
            horizon=horizon,
            regret_curve=curve[r].copy(),
            final_counts=counts[r].copy(),
            rounds=ck.copy(),
            actions=None if actions is None else actions[r].copy(),
        )
        for r in range(R)
    ]


def trace_to_csv(trace: SimulationTrace) -> str:
    """Columns ``round, action, cumulative_regret``; actions are 1-based channel numbers."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["round", "action", "cumulative_regret"])
    acts = trace.actions
    full = acts is not None and trace.rounds.size == trace.horizon
    for k, rnd in enumerate(trace.rounds):
        action = int(acts[rnd - 1]) + 1 if full else ""
        w.writerow([int(rnd), action, repr(float(trace.regret_curve[k]))])
    return buf.getvalue()


def write_trace_csv(trace: SimulationTrace, path: str | Path) -> None:
    Path(path).write_text(trace_to_csv(trace))
