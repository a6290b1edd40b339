"""Per-worker xoshiro256+ streams and the samplers used by the layout engine.

The generator core is compiled with numba so the engine kernels can draw
numbers without returning to Python. Python-level wrappers operate on the
same 4-word ``uint64`` state arrays.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

from .errors import EmptyGraph, InvalidParameter

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_WORKER_MUL = 0xD1B54A32D192ED03
#: one cache line per worker state
_CACHE_LINE = 64
_WORDS_PER_SLOT = _CACHE_LINE // 8

_U17 = np.uint64(17)
_U45 = np.uint64(45)
_U19 = np.uint64(19)
_U11 = np.uint64(11)
_U63 = np.uint64(63)
_U1 = np.uint64(1)
_INV53 = 1.0 / 9007199254740992.0


def splitmix64(x: int) -> tuple[int, int]:
    """One splitmix64 step; returns (new counter, output)."""
    x = (x + _GOLDEN) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x, z ^ (z >> 31)


def _mixed_words(global_seed: int, worker_id: int) -> list[int]:
    _, key = splitmix64(global_seed & _MASK64)
    ctr = key ^ ((worker_id * _WORKER_MUL) & _MASK64)
    words = []
    for _ in range(4):
        ctr, out = splitmix64(ctr)
        words.append(out)
    if not any(words):
        words[0] = _GOLDEN
    return words


class RngState:
    """A xoshiro256+ stream owned by one worker.

    ``words`` is a view of 4 ``uint64`` values, possibly living inside a
    cache-line padded buffer shared with other workers' states.
    """

    __slots__ = ("words", "worker_id")

    def __init__(self, words: np.ndarray, worker_id: int = 0):
        self.words = words
        self.worker_id = worker_id

    def copy(self) -> "RngState":
        return RngState(self.words.copy(), self.worker_id)

    def next_u64(self) -> int:
        return int(_next_u64(self.words))

    def next_uniform(self) -> float:
        return _uniform(self.words)

    def flip_coin(self) -> bool:
        return bool(_coin(self.words))

    def __eq__(self, other) -> bool:
        return isinstance(other, RngState) and np.array_equal(self.words, other.words)

    def __repr__(self) -> str:
        hexes = " ".join(f"{int(w):016x}" for w in self.words)
        return f"RngState(worker={self.worker_id}, {hexes})"


def seed_worker(global_seed: int, worker_id: int) -> RngState:
    """Derive an independent stream for ``worker_id`` from one global seed."""
    words = np.array(_mixed_words(int(global_seed), int(worker_id)), dtype=np.uint64)
    return RngState(words, int(worker_id))


def seed_workers(global_seed: int, n_workers: int) -> np.ndarray:
    """States for ``n_workers`` workers, one 64-byte aligned slot each.

    Returns an ``(n_workers, 8)`` ``uint64`` array; row ``w[:4]`` is the
    generator state of worker ``w`` and the rest is padding so that no two
    workers' states share a cache line.
    """
    raw = np.zeros(n_workers * _WORDS_PER_SLOT + _WORDS_PER_SLOT, dtype=np.uint64)
    shift = (-raw.ctypes.data % _CACHE_LINE) // 8
    slots = raw[shift:shift + n_workers * _WORDS_PER_SLOT].reshape(n_workers, _WORDS_PER_SLOT)
    for w in range(n_workers):
        slots[w, :4] = _mixed_words(int(global_seed), w)
    return slots


# ---------------------------------------------------------------------------
# compiled core


@njit(inline="always")
def _rotl(x, k):
    return (x << k) | (x >> (np.uint64(64) - k))


@njit(nogil=True, cache=True)
def _next_u64(s):
    result = s[0] + s[3]
    t = s[1] << _U17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], _U45)
    return result


@njit(nogil=True, cache=True)
def _uniform(s):
    # top 53 bits; the low bits of xoshiro256+ are weak
    return float(_next_u64(s) >> _U11) * _INV53


@njit(nogil=True, cache=True)
def _coin(s):
    return (_next_u64(s) >> _U63) == _U1


@njit(nogil=True, cache=True)
def _below(s, n):
    """Uniform integer in [0, n) for n < 2**53."""
    k = int(_uniform(s) * n)
    return k if k < n else n - 1


@njit(inline="always")
def _helper1(x):
    # log1p(x) / x
    if abs(x) > 1e-8:
        return math.log1p(x) / x
    return 1.0 - x * (0.5 - x * (1.0 / 3.0 - 0.25 * x))


@njit(inline="always")
def _helper2(x):
    # expm1(x) / x
    if abs(x) > 1e-8:
        return math.expm1(x) / x
    return 1.0 + x * 0.5 * (1.0 + x * (1.0 / 3.0) * (1.0 + 0.25 * x))


@njit(inline="always")
def _zipf_h(x, theta):
    return math.exp(-theta * math.log(x))


@njit(inline="always")
def _zipf_h_integral(x, theta):
    log_x = math.log(x)
    return _helper2((1.0 - theta) * log_x) * log_x


@njit(inline="always")
def _zipf_h_integral_inv(x, theta):
    t = x * (1.0 - theta)
    if t < -1.0:
        t = -1.0
    return math.exp(_helper1(t) * x)


@njit(nogil=True, cache=True)
def _zipf(s, n, theta):
    """Rejection-inversion sampling (Hoermann & Derflinger) of k in [1, n]."""
    if n == 1:
        return 1
    h_x1 = _zipf_h_integral(1.5, theta) - 1.0
    h_n = _zipf_h_integral(n + 0.5, theta)
    squeeze = 2.0 - _zipf_h_integral_inv(_zipf_h_integral(2.5, theta) - _zipf_h(2.0, theta), theta)
    while True:
        u = h_n + _uniform(s) * (h_x1 - h_n)
        x = _zipf_h_integral_inv(u, theta)
        k = int(x + 0.5)
        if k < 1:
            k = 1
        elif k > n:
            k = n
        if k - x <= squeeze or u >= _zipf_h_integral(k + 0.5, theta) - _zipf_h(k, theta):
            return k


@njit(nogil=True, cache=True)
def _select_step(s, path_start):
    """Global step uniform over all steps -> (path index, step index in path)."""
    g = _below(s, path_start[-1])
    p = np.searchsorted(path_start, g, side="right") - 1
    return p, g - path_start[p]


@njit(nogil=True, cache=True)
def _fill_uniform(s, out):
    for k in range(out.shape[0]):
        out[k] = _uniform(s)


@njit(nogil=True, cache=True)
def _fill_coin(s, out):
    for k in range(out.shape[0]):
        out[k] = _coin(s)


@njit(nogil=True, cache=True)
def _fill_zipf(s, n, theta, out):
    for k in range(out.shape[0]):
        out[k] = _zipf(s, n, theta)


@njit(nogil=True, cache=True)
def _fill_select(s, path_start, paths, steps):
    for k in range(paths.shape[0]):
        p, i = _select_step(s, path_start)
        paths[k] = p
        steps[k] = i


# ---------------------------------------------------------------------------
# Python API


def next_uniform(state: RngState, size: int | None = None):
    """Uniform real in [0, 1); an array of ``size`` draws if given."""
    if size is None:
        return _uniform(state.words)
    out = np.empty(size, dtype=np.float64)
    _fill_uniform(state.words, out)
    return out


def flip_coin(state: RngState, size: int | None = None):
    if size is None:
        return bool(_coin(state.words))
    out = np.empty(size, dtype=np.bool_)
    _fill_coin(state.words, out)
    return out


def _check_zipf(n: int, theta: float) -> None:
    if n < 1:
        raise InvalidParameter(f"Zipf support size must be >= 1, got {n}")
    if not theta > 0:
        raise InvalidParameter(f"Zipf exponent must be > 0, got {theta}")


def zipf_sample(state: RngState, n: int, theta: float, size: int | None = None):
    """Draw k in [1, n] with P(k) proportional to k**-theta."""
    _check_zipf(n, theta)
    if size is None:
        return int(_zipf(state.words, int(n), float(theta)))
    out = np.empty(size, dtype=np.int64)
    _fill_zipf(state.words, int(n), float(theta), out)
    return out


def zipf_pmf(n: int, theta: float) -> np.ndarray:
    """Exact probabilities for k = 1..n, normalised by H(n, theta)."""
    _check_zipf(n, theta)
    w = np.arange(1, n + 1, dtype=np.float64) ** -theta
    return w / math.fsum(w)


def weighted_step_select(state: RngState, graph, size: int | None = None):
    """Pick a step uniformly over all path steps; paths weighted by length."""
    if graph.total_steps < 1:
        raise EmptyGraph("graph has no path steps")
    if size is None:
        p, i = _select_step(state.words, graph.path_start)
        return int(p), int(i)
    paths = np.empty(size, dtype=np.int64)
    steps = np.empty(size, dtype=np.int64)
    _fill_select(state.words, graph.path_start, paths, steps)
    return paths, steps
