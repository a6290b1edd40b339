"""Path-guided SGD layout with lock-free asynchronous workers.

Each iteration runs ``10 * total_steps`` (divided by ``srf``) update steps
split statically across worker threads. Workers run compiled kernels that
release the GIL and write straight into one shared record array without
locks; races between workers are tolerated the same way Hogwild! tolerates
them, since two workers rarely touch the same node at once. Workers only
synchronise at iteration boundaries.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from numba import njit

from .errors import DegenerateGraph, InvalidParameter
from .graph import PangenomeGraph, total_update_steps
from .layout import Layout
from .rng import RngState, _below, _coin, _select_step, _uniform, _zipf, seed_worker, seed_workers

#: worker id reserved for the initial-layout stream, outside any worker range
INIT_STREAM_ID = 0xFFFFFFFF

# per-worker counter slots
C_STEPS, C_APPLIED, C_ZERO_DREF, C_SAME_STEP, C_EXTRA_APPLIED, C_EXTRA_ZERO, \
    C_COOLING_BATCHES, C_BATCHES = range(8)
N_COUNTERS = 8

COINCIDENT_EPS = 1e-9


class StepOutcome(enum.IntEnum):
    APPLIED = 0
    SKIPPED_ZERO_DREF = 1
    SKIPPED_SAME_STEP = 2


@dataclass(frozen=True)
class LayoutConfig:
    n_iters: int = 30
    threads: int = 1
    global_seed: int = 42
    batch_size: int = 32
    zipf_theta: float = 0.99
    zipf_space_max: int = 1000
    eta_min_eps: float = 0.01
    drf: int = 1
    srf: int = 1

    def validate(self) -> "LayoutConfig":
        if self.n_iters < 1:
            raise InvalidParameter("n_iters must be >= 1")
        if self.threads < 1:
            raise InvalidParameter("threads must be >= 1")
        if self.batch_size < 1:
            raise InvalidParameter("batch_size must be >= 1")
        if self.drf not in (1, 2, 4):
            raise InvalidParameter("drf must be one of 1, 2, 4")
        if self.srf < 1:
            raise InvalidParameter("srf must be >= 1")
        if not self.zipf_theta > 0:
            raise InvalidParameter("zipf_theta must be > 0")
        if self.zipf_space_max < 1:
            raise InvalidParameter("zipf_space_max must be >= 1")
        if not self.eta_min_eps > 0:
            raise InvalidParameter("eta_min_eps must be > 0")
        return self

    def with_(self, **changes) -> "LayoutConfig":
        return replace(self, **changes)


@dataclass(frozen=True)
class SgdSchedule:
    etas: np.ndarray = field(repr=False)
    eta_max: float
    eta_min: float
    lam: float

    def __len__(self) -> int:
        return len(self.etas)

    def __getitem__(self, t: int) -> float:
        return float(self.etas[t])


def schedule_from_bounds(eta_max: float, eta_min: float, n_iters: int) -> SgdSchedule:
    """Exponential decay from ``eta_max`` at t=0 to ``eta_min`` at t=n_iters-1."""
    if n_iters < 1:
        raise InvalidParameter("n_iters must be >= 1")
    if not eta_max > eta_min > 0:
        raise InvalidParameter(f"need eta_max > eta_min > 0, got {eta_max}, {eta_min}")
    if n_iters == 1:
        return SgdSchedule(np.array([eta_max]), eta_max, eta_min, 0.0)
    lam = math.log(eta_max / eta_min) / (n_iters - 1)
    etas = eta_max * np.exp(-lam * np.arange(n_iters))
    etas[-1] = eta_min
    return SgdSchedule(etas, eta_max, eta_min, lam)


def _check_layoutable(graph: PangenomeGraph) -> None:
    if not any(len(p) >= 2 for p in graph.paths):
        raise DegenerateGraph("no path has two or more steps; nothing to lay out")


def make_schedule(graph: PangenomeGraph, config: LayoutConfig) -> SgdSchedule:
    """Learning rates for weights 1/d_ref**2: from d_max**2 down to eps * 1**2."""
    _check_layoutable(graph)
    d_max = max(p.total_len for p in graph.paths)
    return schedule_from_bounds(float(d_max) ** 2, config.eta_min_eps, config.n_iters)


def init_layout(graph: PangenomeGraph, seed: int) -> Layout:
    """x follows cumulative sequence offset in node-id order; y is random jitter."""
    n = graph.n_nodes
    lengths = graph.node_lengths.astype(np.float64)
    records = np.empty((n, 5))
    records[:, 0] = lengths
    start_x = np.concatenate(([0.0], np.cumsum(lengths)[:-1])) if n else lengths
    records[:, 1] = start_x
    records[:, 3] = start_x + lengths
    spread = math.sqrt(graph.total_nucleotides)
    draws = np.empty(2 * n)
    _fill_jitter(seed_worker(seed, INIT_STREAM_ID).words, draws, spread)
    records[:, 2] = draws[0::2]
    records[:, 4] = draws[1::2]
    return Layout(records)


@njit(nogil=True, cache=True)
def _fill_jitter(s, out, spread):
    for k in range(out.shape[0]):
        out[k] = (2.0 * _uniform(s) - 1.0) * spread


# ---------------------------------------------------------------------------
# compiled kernels


@njit(inline="always")
def _position(step_offset, step_length, step_reverse, g, at_end):
    if at_end != (step_reverse[g] == 1):
        return step_offset[g] + step_length[g]
    return step_offset[g]


@njit(nogil=True, cache=True)
def _displace(records, ni, ci, nj, cj, d_ref, eta, s):
    """Move the two visualization points along their stress gradient.

    ``ci``/``cj`` are the x columns of the chosen endpoints (1=start, 3=end).
    Returns the signed step length applied to each point.
    """
    xi = records[ni, ci]
    yi = records[ni, ci + 1]
    xj = records[nj, cj]
    yj = records[nj, cj + 1]
    dx = xi - xj
    dy = yi - yj
    mag = math.sqrt(dx * dx + dy * dy)
    if mag < COINCIDENT_EPS:
        angle = 2.0 * math.pi * _uniform(s)
        ux = math.cos(angle)
        uy = math.sin(angle)
    else:
        ux = dx / mag
        uy = dy / mag
    mu = eta / (d_ref * d_ref)
    if mu > 1.0:
        mu = 1.0
    delta = mu * (mag - d_ref) * 0.5
    records[ni, ci] = xi - delta * ux
    records[ni, ci + 1] = yi - delta * uy
    records[nj, cj] = xj + delta * ux
    records[nj, cj + 1] = yj + delta * uy
    return delta


@njit(nogil=True, cache=True)
def _step(records, path_start, step_node, step_offset, step_length, step_reverse,
          eta, cooling, theta, space_max, drf, s, counters):
    p, i = _select_step(s, path_start)
    base = path_start[p]
    plen = path_start[p + 1] - base
    if cooling:
        n = plen - 1
        if n > space_max:
            n = space_max
        if n < 1:
            counters[C_SAME_STEP] += 1
            return 2
        k = _zipf(s, n, theta)
        j = i + k if _coin(s) else i - k
        if j < 0 or j >= plen:
            flipped = 2 * i - j
            if 0 <= flipped < plen:
                j = flipped
            elif j < 0:
                j = 0
            else:
                j = plen - 1
    else:
        j = _below(s, plen)
        if j == i:
            j = _below(s, plen)
            if j == i:
                counters[C_SAME_STEP] += 1
                return 2
    gi = base + i
    gj = base + j
    ni = step_node[gi]
    nj = step_node[gj]
    # coin true selects the start point
    ei = not _coin(s)
    ej = not _coin(s)
    d_ref = abs(_position(step_offset, step_length, step_reverse, gi, ei)
                - _position(step_offset, step_length, step_reverse, gj, ej))
    outcome = 1
    if d_ref > 0:
        _displace(records, ni, 1 + 2 * ei, nj, 1 + 2 * ej, float(d_ref), eta, s)
        counters[C_APPLIED] += 1
        outcome = 0
    else:
        counters[C_ZERO_DREF] += 1
    if drf > 1:
        used = 1 << (2 * ei + ej)
        for _ in range(drf - 1):
            remaining = 0
            for c in range(4):
                if not used & (1 << c):
                    remaining += 1
            if remaining == 0:
                break
            pick = _below(s, remaining)
            combo = 0
            for c in range(4):
                if not used & (1 << c):
                    if pick == 0:
                        combo = c
                        break
                    pick -= 1
            used |= 1 << combo
            ai = combo >> 1
            aj = combo & 1
            d_extra = abs(_position(step_offset, step_length, step_reverse, gi, ai == 1)
                          - _position(step_offset, step_length, step_reverse, gj, aj == 1))
            if d_extra > 0:
                _displace(records, ni, 1 + 2 * ai, nj, 1 + 2 * aj, float(d_extra), eta, s)
                counters[C_EXTRA_APPLIED] += 1
            else:
                counters[C_EXTRA_ZERO] += 1
    return outcome


@njit(nogil=True, cache=True)
def _worker_pass(records, path_start, step_node, step_offset, step_length, step_reverse,
                 n_steps, eta, force_cooling, batch_size, theta, space_max, drf, s, counters):
    done = 0
    while done < n_steps:
        # one branch decision per batch
        cooling = force_cooling or _coin(s)
        counters[C_BATCHES] += 1
        if cooling:
            counters[C_COOLING_BATCHES] += 1
        end = done + batch_size
        if end > n_steps:
            end = n_steps
        for _ in range(done, end):
            _step(records, path_start, step_node, step_offset, step_length, step_reverse,
                  eta, cooling, theta, space_max, drf, s, counters)
            counters[C_STEPS] += 1
        done = end


# ---------------------------------------------------------------------------
# Python API


def _graph_arrays(graph: PangenomeGraph):
    return (graph.path_start, graph.step_node, graph.step_offset,
            graph.step_length, graph.step_reverse)


def sgd_update(v_i, v_j, d_ref: float, eta: float, rng: RngState | None = None):
    """Apply one capped stress update to a free-standing pair of points.

    Returns the new ``(v_i, v_j)`` as float arrays.
    """
    if not d_ref > 0:
        raise InvalidParameter("d_ref must be > 0")
    records = np.zeros((2, 5))
    records[0, 1:3] = v_i
    records[1, 1:3] = v_j
    words = rng.words if rng is not None else seed_worker(0, 0).words
    _displace(records, 0, 1, 1, 1, float(d_ref), float(eta), words)
    return records[0, 1:3].copy(), records[1, 1:3].copy()


def layout_step(graph: PangenomeGraph, layout: Layout, rng: RngState, eta: float,
                cooling: bool, zipf_theta: float = 0.99, zipf_space_max: int = 1000,
                drf: int = 1) -> StepOutcome:
    """Run a single update step in place on ``layout``."""
    if not eta > 0:
        raise InvalidParameter("eta must be > 0")
    counters = np.zeros(N_COUNTERS, dtype=np.int64)
    code = _step(layout.records, *_graph_arrays(graph), float(eta), bool(cooling),
                 float(zipf_theta), int(zipf_space_max), int(drf), rng.words, counters)
    return StepOutcome(code)


def worker_budgets(n_steps: int, threads: int) -> list[int]:
    """Static split of the step budget; worker 0 absorbs the remainder."""
    base, rem = divmod(n_steps, threads)
    return [base + rem] + [base] * (threads - 1)


def run_layout(graph: PangenomeGraph, config: LayoutConfig = LayoutConfig(),
               on_iteration=None, initial: Layout | None = None) -> Layout:
    """Lay out ``graph`` with ``config.threads`` lock-free workers.

    ``on_iteration(iteration, eta, layout, counters)`` is called after every
    iteration with the live layout and the ``(threads, N_COUNTERS)`` array of
    that iteration's per-worker counters.
    """
    config.validate()
    schedule = make_schedule(graph, config)
    layout = initial.with_lengths(graph) if initial is not None else init_layout(graph, config.global_seed)
    states = seed_workers(config.global_seed, config.threads)
    budgets = worker_budgets(total_update_steps(graph) // config.srf, config.threads)
    arrays = _graph_arrays(graph)
    records = layout.records

    def work(w, eta, force_cooling, counters):
        _worker_pass(records, *arrays, budgets[w], eta, force_cooling, config.batch_size,
                     float(config.zipf_theta), int(config.zipf_space_max), int(config.drf),
                     states[w], counters[w])

    pool = ThreadPoolExecutor(config.threads) if config.threads > 1 else None
    try:
        for it in range(config.n_iters):
            eta = schedule[it]
            force_cooling = it >= config.n_iters / 2
            counters = np.zeros((config.threads, N_COUNTERS), dtype=np.int64)
            if pool is None:
                work(0, eta, force_cooling, counters)
            else:
                futures = [pool.submit(work, w, eta, force_cooling, counters)
                           for w in range(config.threads)]
                for f in futures:
                    f.result()
            if on_iteration is not None:
                on_iteration(it, eta, layout, counters)
    finally:
        if pool is not None:
            pool.shutdown()
    return layout


def run_layout_reuse(graph: PangenomeGraph, config: LayoutConfig, on_iteration=None) -> Layout:
    """Data-reuse variant: ``drf`` updates per selected pair, ``1/srf`` of the steps."""
    if config.drf not in (2, 4):
        raise InvalidParameter("reuse mode needs drf in {2, 4}")
    if config.srf < 1:
        raise InvalidParameter("srf must be >= 1")
    return run_layout(graph, config, on_iteration=on_iteration)
