"""Channel-selection policies over incremental per-pair statistics.

``MAXIMIN_UCB`` plays every channel once, then picks the channel with the
largest index

    min_j mean_hat[i, j] + sqrt(2 sigma^2 log(1/delta) / T_i).

``GREEDY_MAXIMIN`` (no bonus), ``UNIFORM_RANDOM`` and ``ORACLE`` are
baselines. All argmax ties go to the smallest channel index.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .core import Observation, RngStream

__all__ = [
    "Policy",
    "PolicyKind",
    "PolicyState",
    "init_state",
    "log_inv_delta",
    "exploration_bonus",
    "ucb_index",
    "select_channel",
    "update_state",
]


class Policy(str, enum.Enum):
    MAXIMIN_UCB = "maximin_ucb"
    UNIFORM_RANDOM = "uniform_random"
    ORACLE = "oracle"
    GREEDY_MAXIMIN = "greedy_maximin"


@dataclass(frozen=True)
class PolicyKind:
    """A policy plus its parameter (the fixed channel for ``ORACLE``)."""

    policy: Policy = Policy.MAXIMIN_UCB
    channel: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "policy", Policy(self.policy))
        if self.policy is Policy.ORACLE:
            if self.channel is None or int(self.channel) < 0:
                raise ValueError("ORACLE policy needs a non-negative channel index")
            object.__setattr__(self, "channel", int(self.channel))
        elif self.channel is not None:
            raise ValueError(f"{self.policy.value} takes no channel argument")

    @classmethod
    def maximin_ucb(cls) -> "PolicyKind":
        return cls(Policy.MAXIMIN_UCB)

    @classmethod
    def uniform_random(cls) -> "PolicyKind":
        return cls(Policy.UNIFORM_RANDOM)

    @classmethod
    def greedy(cls) -> "PolicyKind":
        return cls(Policy.GREEDY_MAXIMIN)

    @classmethod
    def oracle(cls, channel: int) -> "PolicyKind":
        return cls(Policy.ORACLE, channel)


def log_inv_delta(delta: float) -> float:
    """``log(1/delta)``, computed once per run so every code path shares the value."""
    return -math.log(delta)


def exploration_bonus(counts, sigma: float, log_term: float):
    """sqrt(2 sigma^2 log(1/delta) / T_i); works on scalars and arrays."""
    return np.sqrt((2.0 * sigma * sigma * log_term) / counts)


@dataclass
class PolicyState:
    """Sufficient statistics of one episode.

    ``emp_means[i]`` is meaningful only once ``counts[i] >= 1``; unobserved
    rows hold NaN and are never read by the index.
    """

    counts: np.ndarray
    emp_means: np.ndarray
    round: int
    delta: float
    sigma: float

    def __post_init__(self):
        self._log_term = log_inv_delta(self.delta)
        self._row_min = np.full(self.counts.shape[0], np.nan)
        seen = self.counts > 0
        if seen.any():
            self._row_min[seen] = self.emp_means[seen].min(axis=1)

    @property
    def m(self) -> int:
        return self.counts.shape[0]

    @property
    def p(self) -> int:
        return self.emp_means.shape[1]

    @property
    def log_term(self) -> float:
        return self._log_term

    @property
    def row_min(self) -> np.ndarray:
        """Per-channel minimum of the empirical means (NaN when unobserved)."""
        return self._row_min


def init_state(m: int, p: int, delta: float, sigma: float) -> PolicyState:
    """Empty statistics for ``m`` channels and ``p`` nodes.

    ``delta`` may equal 1, which zeroes the exploration bonus.
    """
    if m < 1 or p < 1:
        raise ValueError(f"need m >= 1 and p >= 1, got m={m}, p={p}")
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    return PolicyState(
        counts=np.zeros(m, dtype=np.int64),
        emp_means=np.full((m, p), np.nan),
        round=0,
        delta=float(delta),
        sigma=float(sigma),
    )


def ucb_index(state: PolicyState, i: int) -> float:
    if not 0 <= i < state.m:
        raise IndexError(f"channel index {i} out of range for m={state.m}")
    if state.counts[i] == 0:
        raise ValueError(f"channel {i} is unobserved; play every channel once before using the index")
    return float(state.row_min[i] + exploration_bonus(state.counts[i], state.sigma, state.log_term))


def _ucb_indices(state: PolicyState) -> np.ndarray:
    return state.row_min + exploration_bonus(state.counts, state.sigma, state.log_term)


def select_channel(state: PolicyState, kind: PolicyKind, rng: RngStream | None = None) -> int:
    """Choose the channel for round ``state.round + 1``.

    ``MAXIMIN_UCB`` and ``GREEDY_MAXIMIN`` play channel ``round`` (0-based)
    during the first ``m`` rounds. ``UNIFORM_RANDOM`` consumes one uniform
    from ``rng.policy`` per round.
    """
    policy = kind.policy
    if policy is Policy.ORACLE:
        if kind.channel >= state.m:
            raise IndexError(f"oracle channel {kind.channel} out of range for m={state.m}")
        return kind.channel
    if policy is Policy.UNIFORM_RANDOM:
        if rng is None:
            raise ValueError("UNIFORM_RANDOM needs an RngStream")
        return min(int(rng.policy.random() * state.m), state.m - 1)
    if state.round < state.m:
        return state.round
    if policy is Policy.MAXIMIN_UCB:
        return int(np.argmax(_ucb_indices(state)))
    # Greedy may reach here with unobserved channels only if m rounds were
    # skipped; NaN-safe argmax keeps it well defined.
    return int(np.argmax(np.nan_to_num(state.row_min, nan=-np.inf)))


def update_state(state: PolicyState, obs: Observation) -> PolicyState:
    """Fold ``obs`` into ``state`` in place and return it.

    The mean update is ``mean += (x - mean) / T`` after incrementing ``T``.
    """
    i = obs.channel
    if not 0 <= i < state.m:
        raise IndexError(f"channel index {i} out of range for m={state.m}")
    x = np.asarray(obs.rewards, dtype=float)
    if x.shape != (state.p,):
        raise ValueError(f"dimension mismatch: expected {state.p} rewards, got shape {x.shape}")
    state.counts[i] += 1
    n = state.counts[i]
    if n == 1:
        state.emp_means[i] = x
    else:
        state.emp_means[i] += (x - state.emp_means[i]) / n
    state._row_min[i] = state.emp_means[i].min()
    state.round += 1
    return state
