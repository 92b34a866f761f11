"""Problem instances, reward families and seeded random streams.

Channels and nodes are indexed from 0 inside the library. A problem instance
is an ``m x p`` matrix of mean rewards: row ``i`` is channel ``i``, column
``j`` is node ``j``.

Random streams
--------------
Every replication owns an :class:`RngStream` built from ``(seed, stream_id)``.
The generator is NumPy's counter-based ``Philox`` keyed through
``SeedSequence(seed, spawn_key=(stream_id, k))``, with ``k = 0`` for reward
draws and ``k = 1`` for policy randomisation. This choice is part of the
reproducibility contract and must not change silently.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import optimize, stats

__all__ = [
    "Family",
    "ProblemInstance",
    "Observation",
    "RngStream",
    "make_instance",
    "row_min",
    "sample_rewards",
    "draw_base",
    "transform_base",
]

REWARD_SUBSTREAM = 0
POLICY_SUBSTREAM = 1


class Family(str, enum.Enum):
    """Per-pair reward distribution with mean ``means[i, j]``."""

    BERNOULLI = "bernoulli"
    GAUSSIAN = "gaussian"
    GAUSSIAN_TRUNCATED = "gaussian_truncated"

    @classmethod
    def parse(cls, value: "str | Family") -> "Family":
        if isinstance(value, Family):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            names = ", ".join(f.value for f in cls)
            raise ValueError(f"unknown reward family {value!r} (expected one of: {names})") from None


def _truncnorm_mean(loc: float, scale: float) -> float:
    with np.errstate(all="ignore"):
        return float(stats.truncnorm.mean((0.0 - loc) / scale, (1.0 - loc) / scale, loc=loc, scale=scale))


def _truncnorm_location(mean: float, scale: float) -> float:
    """Location of a N(loc, scale) truncated to [0, 1] whose mean is ``mean``."""
    if mean == 0.5:
        return 0.5
    # The truncated mean is increasing in loc; the bracket widens until it
    # contains the target.
    width = 1.0
    while True:
        lo, hi = 0.5 - width * scale, 0.5 + width * scale
        f_lo = _truncnorm_mean(lo, scale) - mean
        f_hi = _truncnorm_mean(hi, scale) - mean
        if f_lo < 0 < f_hi:
            return optimize.brentq(lambda x: _truncnorm_mean(x, scale) - mean, lo, hi, xtol=1e-14)
        if width > 2**20:
            raise ValueError(f"cannot match truncated-Gaussian mean {mean} with sigma={scale}")
        width *= 2


@dataclass(frozen=True, eq=False)
class ProblemInstance:
    """Immutable maximin bandit instance.

    Parameters
    ----------
    means : ndarray, shape (m, p)
        Mean reward of every channel-node pair.
    sigma : float
        Sub-Gaussian scale. It also sets the standard deviation of the
        Gaussian families.
    family : Family
        Reward distribution of each pair.

    Use :func:`make_instance` to build one; it validates the inputs.
    """

    means: np.ndarray
    sigma: float
    family: Family = Family.BERNOULLI
    _trunc_loc: np.ndarray | None = field(default=None, repr=False)

    @property
    def m(self) -> int:
        return self.means.shape[0]

    @property
    def p(self) -> int:
        return self.means.shape[1]

    @property
    def row_minima(self) -> np.ndarray:
        return self.means.min(axis=1)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ProblemInstance):
            return NotImplemented
        return (
            self.family == other.family
            and self.sigma == other.sigma
            and np.array_equal(self.means, other.means)
        )

    __hash__ = None  # type: ignore[assignment]


def make_instance(
    means: Sequence[Sequence[float]] | np.ndarray,
    sigma: float = 1.0,
    family: Family | str = Family.BERNOULLI,
) -> ProblemInstance:
    """Validate ``means`` and return an immutable :class:`ProblemInstance`.

    Raises
    ------
    ValueError
        If the matrix is empty, ragged or non-finite, if ``sigma <= 0``, or if
        a bounded family receives a mean outside ``[0, 1]``.
    """
    family = Family.parse(family)
    rows = [list(r) for r in means] if not isinstance(means, np.ndarray) else None
    if rows is not None:
        if len(rows) == 0 or any(len(r) == 0 for r in rows):
            raise ValueError("means must be a non-empty m x p matrix")
        if len({len(r) for r in rows}) != 1:
            raise ValueError("dimension mismatch: every row of means must have the same length")
        arr = np.array(rows, dtype=float)
    else:
        arr = np.array(means, dtype=float)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"dimension mismatch: means must be 2-D with m, p >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("means must be finite")
    sigma = float(sigma)
    if not (sigma > 0 and math.isfinite(sigma)):
        raise ValueError(f"sigma must be positive, got {sigma}")
    trunc_loc = None
    if family in (Family.BERNOULLI, Family.GAUSSIAN_TRUNCATED):
        bad = (arr < 0) | (arr > 1)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            raise ValueError(
                f"mean outside [0,1] for {family.value} family at channel {i}, node {j}: {arr[i, j]}"
            )
    if family is Family.GAUSSIAN_TRUNCATED:
        trunc_loc = np.full(arr.shape, np.nan)
        interior = (arr > 0) & (arr < 1)
        for i, j in zip(*np.nonzero(interior)):
            trunc_loc[i, j] = _truncnorm_location(float(arr[i, j]), sigma)
        trunc_loc.setflags(write=False)
    arr.setflags(write=False)
    return ProblemInstance(means=arr, sigma=sigma, family=family, _trunc_loc=trunc_loc)


def row_min(instance: ProblemInstance, i: int) -> float:
    """Smallest mean reward across nodes on channel ``i``."""
    if not 0 <= i < instance.m:
        raise IndexError(f"channel index {i} out of range for m={instance.m}")
    return float(instance.means[i].min())


@dataclass(frozen=True)
class Observation:
    """Reward vector observed on ``channel`` in round ``round`` (1-based)."""

    round: int
    channel: int
    rewards: np.ndarray


class RngStream:
    """Reproducible random stream for one replication.

    Two sub-streams are derived from ``(seed, stream_id)``: ``rewards`` feeds
    reward draws and ``policy`` feeds randomised policies, so adding a random
    baseline never perturbs the reward sequence.
    """

    def __init__(self, seed: int, stream_id: int = 0):
        seed = int(seed)
        stream_id = int(stream_id)
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if stream_id < 0:
            raise ValueError("stream_id must be non-negative")
        self.seed = seed
        self.stream_id = stream_id
        self.rewards = _philox(seed, stream_id, REWARD_SUBSTREAM)
        self.policy = _philox(seed, stream_id, POLICY_SUBSTREAM)

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"


def _philox(seed: int, stream_id: int, sub: int) -> np.random.Generator:
    ss = np.random.SeedSequence(seed, spawn_key=(stream_id, sub))
    return np.random.Generator(np.random.Philox(ss))


def draw_base(family: Family, gen: np.random.Generator, size) -> np.ndarray:
    """Draw the family's base variates: standard normals or uniforms."""
    if family is Family.GAUSSIAN:
        return gen.standard_normal(size)
    return gen.random(size)


def transform_base(instance: ProblemInstance, channel, base: np.ndarray) -> np.ndarray:
    """Map base variates to rewards for ``channel``.

    ``channel`` is an int (``base`` has shape ``(p,)``) or an integer array of
    shape ``(R,)`` (``base`` has shape ``(R, p)``). The map is elementwise, so
    the batched and scalar forms agree bit for bit.
    """
    mu = instance.means[channel]
    if instance.family is Family.BERNOULLI:
        return (base < mu).astype(float)
    if instance.family is Family.GAUSSIAN:
        return mu + instance.sigma * base
    loc = instance._trunc_loc[channel]
    s = instance.sigma
    safe = np.where(np.isnan(loc), 0.5, loc)
    x = stats.truncnorm.ppf(base, (0.0 - safe) / s, (1.0 - safe) / s, loc=safe, scale=s)
    # Degenerate pairs (mean exactly 0 or 1) are point masses.
    return np.where(np.isnan(loc), mu, np.clip(x, 0.0, 1.0))


def sample_rewards(instance: ProblemInstance, channel: int, rng: RngStream) -> np.ndarray:
    """Draw one reward per node on ``channel``, consuming ``p`` variates in node order."""
    if not 0 <= channel < instance.m:
        raise IndexError(f"channel index {channel} out of range for m={instance.m}")
    base = draw_base(instance.family, rng.rewards, instance.p)
    return transform_base(instance, channel, base)
