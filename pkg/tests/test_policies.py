import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maximin_mab.core import Observation, RngStream
from maximin_mab.policies import (
    Policy,
    PolicyKind,
    init_state,
    select_channel,
    ucb_index,
    update_state,
)


def _feed(state, channel, rewards):
    return update_state(state, Observation(state.round + 1, channel, np.asarray(rewards, dtype=float)))


def _state_with(rows, counts, delta=0.1, sigma=1.0):
    """State whose channel i has seen ``counts[i]`` copies of ``rows[i]``."""
    st_ = init_state(len(rows), len(rows[0]), delta, sigma)
    for i, (row, c) in enumerate(zip(rows, counts)):
        for _ in range(c):
            _feed(st_, i, row)
    return st_


def test_init_state():
    s = init_state(3, 2, 0.01, 1.0)
    assert s.counts.tolist() == [0, 0, 0]
    assert s.round == 0
    assert np.all(np.isnan(s.emp_means))
    s = init_state(1, 1, 0.5, 1.0)
    assert (s.m, s.p) == (1, 1)


@pytest.mark.parametrize("args", [(3, 2, 1.5, 1.0), (3, 2, 0.0, 1.0), (3, 2, 0.1, 0.0), (0, 2, 0.1, 1.0), (3, 0, 0.1, 1.0)])
def test_init_state_rejects(args):
    with pytest.raises(ValueError):
        init_state(*args)


def test_index_without_bonus_is_row_min():
    s = _state_with([[0.6, 0.4]], [3], delta=1.0)
    assert ucb_index(s, 0) == pytest.approx(0.4, abs=1e-15)


def test_index_hand_value():
    s = _state_with([[0.6, 0.4]], [4], delta=math.exp(-2), sigma=1.0)
    # bonus = sqrt(2 * 1 * 2 / 4) = 1
    assert ucb_index(s, 0) == pytest.approx(1.4, abs=1e-12)
    s16 = _state_with([[0.6, 0.4]], [16], delta=math.exp(-2), sigma=1.0)
    assert ucb_index(s16, 0) - 0.4 == pytest.approx(0.5, abs=1e-12)


def test_index_unobserved_channel_raises():
    s = init_state(2, 2, 0.1, 1.0)
    with pytest.raises(ValueError, match="unobserved"):
        ucb_index(s, 0)
    with pytest.raises(IndexError):
        ucb_index(s, 2)


def test_round_robin_initialisation():
    s = init_state(4, 1, 0.1, 1.0)
    kind = PolicyKind.maximin_ucb()
    assert select_channel(s, kind) == 0
    _feed(s, 0, [1.0])
    _feed(s, 1, [0.0])
    assert select_channel(s, kind) == 2


def test_ties_go_to_smallest_index():
    s = _state_with([[0.5, 0.7], [0.6, 0.5], [0.5, 0.9]], [2, 2, 2])
    assert select_channel(s, PolicyKind.maximin_ucb()) == 0
    assert select_channel(s, PolicyKind.greedy()) == 0


def test_argmax_of_indices():
    # Equal counts, so the argmax follows the row minima (0.5, 0.9, 0.7).
    s = _state_with([[0.5, 0.8], [0.9, 1.0], [0.7, 0.75]], [3, 3, 3])
    idx = [ucb_index(s, i) for i in range(3)]
    brute = max(range(3), key=lambda i: (idx[i], -i))
    assert brute == 1
    assert select_channel(s, PolicyKind.maximin_ucb()) == 1


def test_greedy_ignores_bonus():
    # Channel 1 has the larger raw minimum but many more pulls.
    s = _state_with([[0.4], [0.5]], [1, 200], delta=1e-6)
    assert select_channel(s, PolicyKind.maximin_ucb()) == 0
    assert select_channel(s, PolicyKind.greedy()) == 1


def test_oracle_and_uniform():
    s = init_state(5, 2, 0.1, 1.0)
    assert select_channel(s, PolicyKind.oracle(3)) == 3
    rng = RngStream(1)
    picks = [select_channel(s, PolicyKind.uniform_random(), rng) for _ in range(5000)]
    counts = np.bincount(picks, minlength=5)
    assert counts.min() > 850
    with pytest.raises(ValueError):
        select_channel(s, PolicyKind.uniform_random())
    with pytest.raises(IndexError):
        select_channel(s, PolicyKind.oracle(5))


def test_policy_kind_validation():
    with pytest.raises(ValueError):
        PolicyKind(Policy.ORACLE)
    with pytest.raises(ValueError):
        PolicyKind(Policy.MAXIMIN_UCB, 2)


def test_two_point_average():
    s = _state_with([[0.5]], [1])
    _feed(s, 0, [1.0])
    assert s.emp_means[0, 0] == 0.75
    assert s.counts[0] == 2


def test_update_is_local():
    s = _state_with([[0.25, 0.5], [0.1, 0.2]], [3, 1])
    before = s.emp_means[0].copy()
    _feed(s, 1, [0.9, 0.3])
    assert s.emp_means[0].tobytes() == before.tobytes()
    assert s.counts.tolist() == [3, 2]


def test_update_dimension_mismatch():
    s = init_state(2, 3, 0.1, 1.0)
    with pytest.raises(ValueError, match="dimension mismatch"):
        _feed(s, 0, [1.0, 0.0])
    with pytest.raises(IndexError):
        _feed(s, 2, [1.0, 0.0, 0.0])


def test_incremental_matches_batch_mean_1000():
    rng = np.random.default_rng(0)
    xs = rng.random((1000, 3))
    s = init_state(1, 3, 0.1, 1.0)
    for x in xs:
        _feed(s, 0, x)
    assert np.max(np.abs(s.emp_means[0] - xs.sum(axis=0) / 1000)) <= 1e-12


def test_incremental_matches_batch_random_sequence():
    rng = np.random.default_rng(1)
    m, p = 4, 3
    s = init_state(m, p, 0.1, 1.0)
    seen = [[] for _ in range(m)]
    for _ in range(10_000):
        i = int(rng.integers(m))
        x = rng.normal(0.5, 1.0, p)
        _feed(s, i, x)
        seen[i].append(x)
    assert s.counts.sum() == s.round == 10_000
    for i in range(m):
        batch = np.sum(seen[i], axis=0) / len(seen[i])
        assert np.max(np.abs(s.emp_means[i] - batch)) <= 1e-12


@given(st.lists(st.tuples(st.integers(0, 3), st.lists(st.sampled_from([0.0, 1.0]), min_size=2, max_size=2)), max_size=60))
def test_count_conservation_and_bernoulli_range(updates):
    s = init_state(4, 2, 0.1, 1.0)
    for i, x in updates:
        _feed(s, i, x)
        assert s.counts.sum() == s.round
    seen = s.counts > 0
    assert np.all((s.emp_means[seen] >= 0) & (s.emp_means[seen] <= 1))


# Dyadic rewards and shifts keep every sum exact, so the shift is exact too.
dyadic = st.integers(0, 16).map(lambda k: k / 16)


@given(
    st.lists(st.lists(dyadic, min_size=3, max_size=3), min_size=3, max_size=3),
    st.lists(st.integers(1, 5), min_size=3, max_size=3),
    st.integers(-8, 8).map(lambda k: k / 4),
)
def test_shift_equivariance(rows, counts, c):
    base = _state_with(rows, counts)
    shifted = _state_with([[v + c for v in r] for r in rows], counts)
    for i in range(3):
        assert ucb_index(shifted, i) == pytest.approx(ucb_index(base, i) + c, abs=1e-12)
    kind = PolicyKind.maximin_ucb()
    assert select_channel(shifted, kind) == select_channel(base, kind)


@settings(max_examples=50)
@given(
    st.floats(0.0, 1.0),
    st.floats(0.1, 3.0),
    st.floats(1e-6, 0.9),
    st.integers(1, 50),
)
def test_index_monotonicity(mean, sigma, delta, t):
    def idx(sig, dl, n):
        return ucb_index(_state_with([[mean]], [n], delta=dl, sigma=sig), 0)

    assert idx(sigma * 1.5, delta, t) >= idx(sigma, delta, t)
    assert idx(sigma, delta / 10, t) >= idx(sigma, delta, t)
    assert idx(sigma, delta, t + 1) < idx(sigma, delta, t)
