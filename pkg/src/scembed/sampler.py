"""Constant-time pair sampling.

Random numbers come from SplitMix64 (Steele, Lea & Flood, 2014): the state is
a 64-bit counter advanced by the golden-ratio increment and each output is a
bijective mix of the counter. A stream is just a starting counter, so
independent per-worker streams are derived by mixing ``(seed, stream_id)``.
The generator is implemented here, not borrowed, so that pair sequences are
identical across platforms and numpy versions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .core import SparseAffinity

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_INV53 = 1.0 / 9007199254740992.0


@numba.njit(cache=True, nogil=True)
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@numba.njit(cache=True, nogil=True)
def next_u64(state):
    """Advance the one-element uint64 ``state`` array and return the next output."""
    state[0] += _GOLDEN
    return _mix64(state[0])


@numba.njit(cache=True, nogil=True)
def next_double(state):
    """Uniform double in [0, 1) with 53 random bits."""
    return np.float64(next_u64(state) >> _S11) * _INV53


@numba.njit(cache=True, nogil=True)
def next_index(state, n):
    """Uniform integer in ``[0, n)``."""
    k = np.int64(next_double(state) * n)
    return k if k < n else n - 1


@numba.njit(cache=True)
def _stream_start(seed, stream):
    return _mix64(seed ^ np.uint64(0x6A09E667F3BCC909)) ^ _mix64((stream + np.uint64(1)) * _M2)


def stream_state(seed: int, stream: int = 0) -> np.ndarray:
    """Initial state for stream ``stream`` of generator ``seed``."""
    mask = (1 << 64) - 1
    start = _stream_start(np.uint64(seed & mask), np.uint64(stream & mask))
    return np.array([start], dtype=np.uint64)


class SplitMix64:
    """Seedable 64-bit generator; ``state`` is shared with the numba kernels."""

    def __init__(self, seed: int = 0, stream: int = 0):
        self.state = stream_state(seed, stream)

    def next_u64(self) -> int:
        return int(next_u64(self.state))

    def random(self) -> float:
        return float(next_double(self.state))

    def integers(self, n: int) -> int:
        return int(next_index(self.state, n))


@dataclass(frozen=True)
class AliasTable:
    """Vose alias table over the ordered entries of a SparseAffinity.

    Slot ``k`` keeps itself with probability ``prob[k]`` and otherwise
    yields ``alias[k]``; slots are chosen uniformly.
    """

    prob: np.ndarray
    alias: np.ndarray
    rows: np.ndarray
    cols: np.ndarray

    @property
    def size(self) -> int:
        return int(self.prob.shape[0])

    def probabilities(self) -> np.ndarray:
        """Distribution implied by the table, reconstructed slot by slot."""
        m = self.size
        out = self.prob / m
        np.add.at(out, self.alias, (1.0 - self.prob) / m)
        return out


@numba.njit(cache=True)
def _vose(weights):
    m = weights.shape[0]
    total = 0.0
    for k in range(m):
        total += weights[k]
    scaled = weights * (m / total)
    prob = np.ones(m)
    alias = np.arange(m)
    small = np.empty(m, dtype=np.int64)
    large = np.empty(m, dtype=np.int64)
    ns = 0
    nl = 0
    for k in range(m):
        if scaled[k] < 1.0:
            small[ns] = k
            ns += 1
        else:
            large[nl] = k
            nl += 1
    while ns > 0 and nl > 0:
        ns -= 1
        s = small[ns]
        g = large[nl - 1]
        prob[s] = scaled[s]
        alias[s] = g
        scaled[g] = (scaled[g] + scaled[s]) - 1.0
        if scaled[g] < 1.0:
            nl -= 1
            small[ns] = g
            ns += 1
    # leftovers are 1 up to rounding
    return prob, alias


def build_alias(P: SparseAffinity) -> AliasTable:
    """Alias table for ``Categorical(P)`` over its stored ordered entries."""
    if P.nnz == 0:
        raise ValueError("cannot sample from an empty affinity")
    prob, alias = _vose(P.values)
    return AliasTable(prob, alias, P.rows, P.cols)


@numba.njit(cache=True, nogil=True)
def alias_draw(prob, alias, state):
    k = next_index(state, prob.shape[0])
    if next_double(state) < prob[k]:
        return k
    return alias[k]


@numba.njit(cache=True, nogil=True)
def uniform_pair(n, state):
    """Uniform ordered pair with ``i != j``; the diagonal is rejected and redrawn."""
    while True:
        i = next_index(state, n)
        j = next_index(state, n)
        if i != j:
            return i, j


@numba.njit(cache=True, nogil=True)
def _many_alias(prob, alias, state, size):
    out = np.empty(size, dtype=np.int64)
    for t in range(size):
        out[t] = alias_draw(prob, alias, state)
    return out


@numba.njit(cache=True, nogil=True)
def _many_uniform(n, state, size):
    out = np.empty((size, 2), dtype=np.int64)
    for t in range(size):
        i, j = uniform_pair(n, state)
        out[t, 0] = i
        out[t, 1] = j
    return out


def draw_attraction(table: AliasTable, rng: SplitMix64) -> tuple[int, int]:
    """One ordered pair ``(i, j)`` drawn with probability ``P_ij``."""
    k = alias_draw(table.prob, table.alias, rng.state)
    return int(table.rows[k]), int(table.cols[k])


def draw_repulsion(n: int, rng: SplitMix64) -> tuple[int, int]:
    """One ordered off-diagonal pair drawn uniformly."""
    if n < 2:
        raise ValueError(f"need n >= 2 for off-diagonal pairs, got {n}")
    i, j = uniform_pair(n, rng.state)
    return int(i), int(j)


def sample_entries(table: AliasTable, rng: SplitMix64, size: int) -> np.ndarray:
    """Entry indices of ``size`` consecutive attraction draws (same stream as
    :func:`draw_attraction`)."""
    return _many_alias(table.prob, table.alias, rng.state, size)


def sample_uniform_pairs(n: int, rng: SplitMix64, size: int) -> np.ndarray:
    if n < 2:
        raise ValueError(f"need n >= 2 for off-diagonal pairs, got {n}")
    return _many_uniform(n, rng.state, size)
