"""Stochastic cluster embedding by asynchronous pair updates.

Each epoch runs ``max(nnz(P), N)`` update units, split across workers. A unit
draws one pair from ``Categorical(P)`` and pulls it together, then draws one
uniform off-diagonal pair and pushes it apart. The q values seen along the way
feed a running estimate of the inverse scale, refreshed once per epoch.

Workers are Python threads running GIL-free numba kernels on the same
coordinate array without locks. Lost updates are tolerated, so only
single-worker runs are reproducible bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numba
import numpy as np

from . import objective
from .core import Embedding, OptimizerConfig, ScaleState, SparseAffinity, validate_affinity
from .sampler import AliasTable, alias_draw, build_alias, next_double, stream_state, uniform_pair

INIT_STD = 1e-2
MAX_EXACT_POINTS = 2000
MAX_HALVINGS = 20
MONOTONE_TOL = 1e-7
_INIT_STREAM = 0xFFFFFFFF


class NonFiniteError(RuntimeError):
    """The embedding diverged to inf or nan."""

    def __init__(self, iteration, pair):
        super().__init__(f"non-finite coordinates at iteration {iteration} after updating pair {pair}")
        self.iteration = iteration
        self.pair = pair


class ConvergenceError(RuntimeError):
    pass


class TraceRecord(NamedTuple):
    t: int
    eta: float
    s_inv: float
    i_divergence: Optional[float] = None
    kl_divergence: Optional[float] = None


@dataclass
class TrainingTrace:
    records: list = field(default_factory=list)

    def append(self, *args, **kwargs):
        self.records.append(TraceRecord(*args, **kwargs))

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def to_lines(self) -> list[str]:
        """One ``t eta s_inv [i_divergence kl_divergence]`` line per record."""
        lines = []
        for r in self.records:
            parts = [str(r.t), f"{r.eta:.17g}", f"{r.s_inv:.17g}"]
            if r.i_divergence is not None:
                parts += [f"{r.i_divergence:.17g}", f"{r.kl_divergence:.17g}"]
            lines.append(" ".join(parts))
        return lines


@numba.njit(cache=True, nogil=True)
def _gaussian_fill(out, std, state):
    flat = out.ravel()
    m = flat.shape[0]
    k = 0
    while k < m:
        u1 = 1.0 - next_double(state)
        u2 = next_double(state)
        r = std * math.sqrt(-2.0 * math.log(u1))
        flat[k] = r * math.cos(2.0 * math.pi * u2)
        if k + 1 < m:
            flat[k + 1] = r * math.sin(2.0 * math.pi * u2)
        k += 2


def initialize(n: int, d: int = 2, seed: int = 0, scale_multiplier: float = 1.0):
    """Small random coordinates with variance 1e-4 and ``s_inv = N (N - 1)``.

    ``scale_multiplier`` multiplies the starting ``s_inv`` (``beta`` for the
    exaggerated mode).
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    coords = np.empty((n, d))
    _gaussian_fill(coords, INIT_STD, stream_state(seed, _INIT_STREAM))
    return Embedding(coords), ScaleState(s_inv=scale_multiplier * n * (n - 1.0))


@numba.njit(cache=True, nogil=True)
def _sq_dist(Y, i, j):
    dist = 0.0
    for k in range(Y.shape[1]):
        diff = Y[i, k] - Y[j, k]
        dist += diff * diff
    return dist


@numba.njit(cache=True, nogil=True)
def _move_pair(Y, i, j, c):
    # y_i += c (y_i - y_j), y_j -= c (y_i - y_j)
    for k in range(Y.shape[1]):
        g = c * (Y[i, k] - Y[j, k])
        Y[i, k] += g
        Y[j, k] -= g


@numba.njit(cache=True, nogil=True)
def attraction_step(Y, i, j, eta):
    """Pull ``y_i`` and ``y_j`` together in place; returns the pre-update q."""
    q = 1.0 / (1.0 + _sq_dist(Y, i, j))
    _move_pair(Y, i, j, -2.0 * eta * q)
    return q


@numba.njit(cache=True, nogil=True)
def _repel(Y, i, j, eta, coef):
    q = 1.0 / (1.0 + _sq_dist(Y, i, j))
    _move_pair(Y, i, j, 2.0 * eta * coef * q * q)
    return q


@numba.njit(cache=True, nogil=True)
def repulsion_step(Y, i, j, eta, s, n):
    """Push ``y_i`` and ``y_j`` apart in place with weight ``s N (N - 1)``; returns the pre-update q."""
    return _repel(Y, i, j, eta, s * n * (n - 1.0))


@numba.njit(cache=True, nogil=True)
def _finite_pair(Y, i, j):
    for k in range(Y.shape[1]):
        if not (math.isfinite(Y[i, k]) and math.isfinite(Y[j, k])):
            return False
    return True


@numba.njit(cache=True, nogil=True)
def _worker_units(Y, rows, cols, prob, alias, units, eta, alpha, coef, state, bad):
    n = Y.shape[0]
    xi = 0.0
    omega = 0.0
    for _ in range(units):
        e = alias_draw(prob, alias, state)
        i = rows[e]
        j = cols[e]
        q = attraction_step(Y, i, j, eta)
        xi += alpha * q
        omega += alpha
        if not _finite_pair(Y, i, j):
            bad[0] = i
            bad[1] = j
            break

        i, j = uniform_pair(n, state)
        q = _repel(Y, i, j, eta, coef)
        xi += (1.0 - alpha) * q
        omega += 1.0 - alpha
        if not _finite_pair(Y, i, j):
            bad[0] = i
            bad[1] = j
            break
    return xi, omega


def refresh_scale(state: ScaleState, n: int, multiplier: float = 1.0) -> ScaleState:
    """Mix the epoch's estimate ``multiplier * N (N-1) xi / omega`` into ``s_inv``.

    The forgetting rate is ``N (N-1) / (N (N-1) + omega)``. Accumulators are
    reset either way.
    """
    if state.omega == 0:
        return ScaleState(state.s_inv)
    pairs = n * (n - 1.0)
    rho = pairs / (pairs + state.omega)
    estimate = multiplier * pairs * state.xi / state.omega
    return ScaleState(rho * state.s_inv + (1.0 - rho) * estimate)


def epoch_size(P: SparseAffinity) -> int:
    return max(P.nnz, P.n)


def learning_rate(t: int, config: OptimizerConfig) -> float:
    return config.base_step * (1.0 - t / config.total_iterations)


def worker_streams(config: OptimizerConfig) -> list[np.ndarray]:
    return [stream_state(config.seed, w) for w in range(config.workers)]


def gather_epoch(P, table: AliasTable, Y, state: ScaleState, config: OptimizerConfig, t: int,
                 rngs=None, pool: Optional[ThreadPoolExecutor] = None) -> ScaleState:
    """Run one epoch of pair updates on ``Y`` in place.

    Returns ``state`` with the epoch's ``xi`` and ``omega`` filled in and
    ``s_inv`` untouched. ``rngs`` holds one SplitMix64 state per worker and is
    advanced in place; when omitted, fresh streams for ``config.seed`` are used.
    """
    if not 0 <= t < config.total_iterations:
        raise ValueError(f"epoch {t} outside [0, {config.total_iterations})")
    coords = Y.coords if isinstance(Y, Embedding) else Y
    n = P.n
    eta = learning_rate(t, config)
    alpha = config.effective_alpha
    coef = n * (n - 1.0) / state.s_inv
    if rngs is None:
        rngs = worker_streams(config)

    total = epoch_size(P)
    w = config.workers
    shares = [total // w + (1 if k < total % w else 0) for k in range(w)]
    bads = [np.full(2, -1, dtype=np.int64) for _ in range(w)]

    def work(k):
        return _worker_units(coords, table.rows, table.cols, table.prob, table.alias,
                             shares[k], eta, alpha, coef, rngs[k], bads[k])

    if w == 1:
        partials = [work(0)]
    elif pool is not None:
        partials = list(pool.map(work, range(w)))
    else:
        with ThreadPoolExecutor(max_workers=w) as ex:
            partials = list(ex.map(work, range(w)))

    for bad in bads:
        if bad[0] >= 0:
            raise NonFiniteError(t, (int(bad[0]), int(bad[1])))
    if not np.all(np.isfinite(coords)):
        raise NonFiniteError(t, None)

    xi = sum(p[0] for p in partials)
    omega = sum(p[1] for p in partials)
    if omega == 0:
        return ScaleState(state.s_inv)
    return ScaleState(state.s_inv, xi, omega)


def run_epoch(P, table: AliasTable, Y, state: ScaleState, config: OptimizerConfig, t: int,
              rngs=None, pool: Optional[ThreadPoolExecutor] = None) -> ScaleState:
    """One epoch of pair updates followed by the scale refresh."""
    gathered = gather_epoch(P, table, Y, state, config, t, rngs=rngs, pool=pool)
    return refresh_scale(gathered, P.n, config.scale_multiplier)


def _record(trace, P, Y, t, eta, s_inv, config):
    if config.trace_every and (t + 1) % config.trace_every == 0:
        s = 1.0 / s_inv
        trace.append(t, eta, s_inv, objective.i_divergence(P, Y, s), objective.kl_divergence(P, Y))
    else:
        trace.append(t, eta, s_inv)


def embed(P: SparseAffinity, config: Optional[OptimizerConfig] = None, return_state: bool = False):
    """Embed ``P`` with the stochastic optimizer.

    Returns ``(embedding, trace)``, plus the final ScaleState when
    ``return_state`` is set.
    """
    config = config or OptimizerConfig()
    validate_affinity(P)
    Y, state = initialize(P.n, config.output_dim, config.seed, config.scale_multiplier)
    table = build_alias(P)
    trace = TrainingTrace()
    rngs = worker_streams(config)

    pool = ThreadPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    try:
        for t in range(config.total_iterations):
            state = run_epoch(P, table, Y, state, config, t, rngs=rngs, pool=pool)
            _record(trace, P, Y.coords, t, learning_rate(t, config), state.s_inv, config)
    finally:
        if pool is not None:
            pool.shutdown()

    if return_state:
        return Y, trace, state
    return Y, trace


def exact_scale(P: SparseAffinity, Y, config: OptimizerConfig) -> float:
    """Scale for the configured mode computed from all pairs."""
    if config.mode == "sce":
        return objective.sce_scale_exact(P, Y, config.alpha)
    if config.mode == "exaggerated":
        return objective.exaggerated_scale(Y, config.beta)
    return objective.sne_scale(Y)


def embed_exact(P: SparseAffinity, config: Optional[OptimizerConfig] = None, history: Optional[list] = None):
    """Full-gradient counterpart of :func:`embed`, for checking at small N.

    Each step holds the scale at its exact value for the current coordinates
    and descends the I-divergence. The step is ``eta_t * max(nnz, N)``, the
    expected displacement of one stochastic epoch, halved until the
    objective does not rise by more than ``1e-7``. Only this per-step,
    fixed-scale decrease is guaranteed; re-estimating the scale between steps
    can raise the recorded value (except in ``"sne"`` mode, where the value is
    the KL divergence). ``history``, if given, receives a copy of the
    coordinates before every step.
    """
    config = config or OptimizerConfig()
    validate_affinity(P)
    if P.n > MAX_EXACT_POINTS:
        raise ValueError(f"exact descent refused for n={P.n} > {MAX_EXACT_POINTS}")
    Y, _ = initialize(P.n, config.output_dim, config.seed)
    coords = Y.coords.copy()
    trace = TrainingTrace()
    units = epoch_size(P)

    for t in range(config.total_iterations):
        eta = learning_rate(t, config)
        if history is not None:
            history.append(coords.copy())
        s = exact_scale(P, coords, config)
        before = objective.i_divergence(P, coords, s)
        grad = objective.exact_gradient(P, coords, s)
        step = eta * units
        for _ in range(MAX_HALVINGS + 1):
            trial = coords - step * grad
            after = objective.i_divergence(P, trial, s) if np.all(np.isfinite(trial)) else np.inf
            if after <= before + MONOTONE_TOL:
                break
            step *= 0.5
        else:
            raise ConvergenceError(f"no descent step found at iteration {t} after {MAX_HALVINGS} halvings")
        coords = trial
        trace.append(t, eta, 1.0 / s, after, objective.kl_divergence(P, coords))

    return Embedding(coords), trace
