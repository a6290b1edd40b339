"""Layout quality: exact path stress, sampled path stress and their agreement.

Stress of one visualization-point pair is ``((|v_i - v_j| - d_ref) / d_ref)**2``
where ``d_ref`` is the nucleotide distance between the two points along
their shared path. Pairs with ``d_ref == 0`` carry no information and are
left out of every average.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from numba import njit

from .engine import _position
from .errors import CorpusTooLarge, CountMismatch, IndexOutOfRange, ZeroReference
from .graph import Path, PangenomeGraph
from .layout import Layout
from .rng import _below, _coin, seed_worker

Z95 = 1.96
MAX_ZERO_REDRAWS = 8
#: largest graph (total path steps) the correlation harness will take
CORPUS_STEP_LIMIT = 10_000


@dataclass(frozen=True)
class StressReport:
    mean: float
    n: int
    std_dev: float
    ci_low: float
    ci_high: float
    skipped: int = 0

    @classmethod
    def from_terms(cls, terms: np.ndarray, skipped: int = 0) -> "StressReport":
        n = len(terms)
        if n == 0:
            return cls(math.nan, 0, math.nan, math.nan, math.nan, skipped)
        mean = float(np.sum(terms) / n)
        std = float(np.sqrt(np.sum((terms - mean) ** 2) / n))
        half = Z95 * std / math.sqrt(n)
        return cls(mean, n, std, mean - half, mean + half, skipped)

    @property
    def half_width(self) -> float:
        return (self.ci_high - self.ci_low) / 2

    def contains(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high

    def to_tsv(self) -> str:
        fields = (self.mean, self.n, self.std_dev, self.ci_low, self.ci_high, self.skipped)
        return "\t".join(repr(f) for f in fields)

    @classmethod
    def from_tsv(cls, line: str) -> "StressReport":
        mean, n, std, lo, hi, skipped = line.strip().split("\t")
        return cls(float(mean), int(n), float(std), float(lo), float(hi), int(skipped))


def pair_stress(v_i, v_j, d_ref: float) -> float:
    if d_ref == 0:
        raise ZeroReference("stress is undefined for d_ref = 0")
    dist = math.hypot(v_i[0] - v_j[0], v_i[1] - v_j[1])
    return ((dist - d_ref) / d_ref) ** 2


# ---------------------------------------------------------------------------
# compiled kernels


@njit(inline="always")
def _combo_stress(records, step_node, step_offset, step_length, step_reverse, gi, gj, ei, ej):
    """Stress of one endpoint combination, or -1.0 when d_ref is zero."""
    d_ref = abs(_position(step_offset, step_length, step_reverse, gi, ei)
                - _position(step_offset, step_length, step_reverse, gj, ej))
    if d_ref == 0:
        return -1.0
    ni = step_node[gi]
    nj = step_node[gj]
    ci = 1 + 2 * ei
    cj = 1 + 2 * ej
    dx = records[ni, ci] - records[nj, cj]
    dy = records[ni, ci + 1] - records[nj, cj + 1]
    r = (math.sqrt(dx * dx + dy * dy) - d_ref) / d_ref
    return r * r


@njit(nogil=True, cache=True)
def _step_pair(records, step_node, step_offset, step_length, step_reverse, gi, gj):
    """Mean over defined endpoint combinations -> (value, zero-d_ref combos).

    value is -1.0 when no combination is defined.
    """
    total = 0.0
    defined = 0
    for c in range(4):
        t = _combo_stress(records, step_node, step_offset, step_length, step_reverse,
                          gi, gj, c >= 2, (c & 1) == 1)
        if t >= 0.0:
            total += t
            defined += 1
    if defined == 0:
        return -1.0, 4
    return total / defined, 4 - defined


@njit(nogil=True, cache=True)
def _exact_pass(records, path_start, step_node, step_offset, step_length, step_reverse,
                center, squared):
    """Sum of pair terms (or of squared deviations from ``center``)."""
    acc = 0.0
    count = 0
    undefined = 0
    skipped = 0
    for p in range(path_start.shape[0] - 1):
        lo = path_start[p]
        hi = path_start[p + 1]
        for gi in range(lo, hi):
            for gj in range(gi + 1, hi):
                v, zero = _step_pair(records, step_node, step_offset, step_length,
                                     step_reverse, gi, gj)
                skipped += zero
                if v < 0.0:
                    undefined += 1
                    continue
                if squared:
                    acc += (v - center) * (v - center)
                else:
                    acc += v
                count += 1
    return acc, count, undefined, skipped


@njit(nogil=True, cache=True)
def _sample_path(records, step_node, step_offset, step_length, step_reverse,
                 base, plen, n_samples, s, out):
    """Fill ``out`` with sampled terms for one path; NaN marks a skipped sample."""
    skipped = 0
    for k in range(n_samples):
        gi = base + _below(s, plen)
        gj = base + _below(s, plen - 1)
        if gj >= gi:
            gj += 1
        t = -1.0
        for _ in range(MAX_ZERO_REDRAWS + 1):
            t = _combo_stress(records, step_node, step_offset, step_length, step_reverse,
                              gi, gj, not _coin(s), not _coin(s))
            if t >= 0.0:
                break
        if t < 0.0:
            out[k] = np.nan
            skipped += 1
        else:
            out[k] = t
    return skipped


# ---------------------------------------------------------------------------
# Python API


def _arrays(graph):
    return graph.step_node, graph.step_offset, graph.step_length, graph.step_reverse


def _check_layout(graph: PangenomeGraph, layout: Layout) -> None:
    if layout.n_nodes != graph.n_nodes:
        raise CountMismatch(f"layout has {layout.n_nodes} rows, graph has {graph.n_nodes} nodes")


def step_pair_stress(graph: PangenomeGraph, layout: Layout, path, i: int, j: int):
    """Average stress over the four endpoint combinations of steps i and j.

    ``path`` is a path index or a :class:`Path` of ``graph``. Returns ``None``
    when every combination has ``d_ref == 0``.
    """
    _check_layout(graph, layout)
    p = graph.paths.index(path) if isinstance(path, Path) else int(path)
    plen = len(graph.paths[p])
    for k in (i, j):
        if not 0 <= k < plen:
            raise IndexOutOfRange(f"step {k} outside path of {plen} steps")
    if i == j:
        raise IndexOutOfRange("step pair needs two distinct steps")
    base = int(graph.path_start[p])
    v, _ = _step_pair(layout.records, *_arrays(graph), base + i, base + j)
    return None if v < 0 else float(v)


def exact_path_stress(graph: PangenomeGraph, layout: Layout) -> StressReport:
    """Mean stress over every unordered step pair of every path.

    Cost is quadratic in path length; keep to graphs of ~1e5 steps or fewer.
    """
    _check_layout(graph, layout)
    args = (layout.records, graph.path_start, *_arrays(graph))
    total, n, _, skipped = _exact_pass(*args, 0.0, False)
    if n == 0:
        return StressReport(math.nan, 0, math.nan, math.nan, math.nan, skipped)
    mean = total / n
    sq, _, _, _ = _exact_pass(*args, mean, True)
    std = math.sqrt(sq / n)
    half = Z95 * std / math.sqrt(n)
    return StressReport(mean, n, std, mean - half, mean + half, skipped)


def sampled_terms(graph: PangenomeGraph, layout: Layout, seed: int,
                  samples_per_node: int = 100, threads: int = 1):
    """Raw sampled stress terms (skips dropped) and the skip count.

    Path ``k`` draws from its own stream ``seed_worker(seed, k)``, so the
    result does not depend on how paths are spread over ``threads``.
    """
    _check_layout(graph, layout)
    counts = [samples_per_node * len(p) if len(p) >= 2 else 0 for p in graph.paths]
    bounds = np.zeros(len(counts) + 1, dtype=np.int64)
    np.cumsum(counts, out=bounds[1:])
    terms = np.empty(int(bounds[-1]))
    skipped = np.zeros(len(counts), dtype=np.int64)
    arrays = _arrays(graph)

    def one(k):
        if counts[k] == 0:
            return
        s = seed_worker(seed, k).words
        skipped[k] = _sample_path(layout.records, *arrays, int(graph.path_start[k]),
                                  len(graph.paths[k]), counts[k], s,
                                  terms[bounds[k]:bounds[k + 1]])

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            list(pool.map(one, range(len(counts))))
    else:
        for k in range(len(counts)):
            one(k)
    return terms[~np.isnan(terms)], int(skipped.sum())


def sampled_path_stress(graph: PangenomeGraph, layout: Layout, seed: int = 42,
                        samples_per_node: int = 100, threads: int = 1) -> StressReport:
    """Monte Carlo path stress from ``samples_per_node * |p|`` pairs per path."""
    terms, skipped = sampled_terms(graph, layout, seed, samples_per_node, threads)
    return StressReport.from_terms(terms, skipped)


@dataclass(frozen=True)
class CorrelationReport:
    pearson_r: float | None
    max_rel_deviation: float
    exact: tuple
    sampled: tuple
    sampled_reports: tuple = ()

    @property
    def n(self) -> int:
        return len(self.exact)

    @property
    def ci_coverage(self) -> float | None:
        """Fraction of layouts whose sampled 95% CI contains the exact value."""
        if not self.sampled_reports:
            return None
        hits = sum(r.contains(e) for r, e in zip(self.sampled_reports, self.exact))
        return hits / len(self.sampled_reports)


def _rel_dev(sampled: float, exact: float) -> float:
    diff = abs(sampled - exact)
    return diff / abs(exact) if exact != 0 else diff


def correlation_harness(graphs, layouts, seed: int = 42,
                        samples_per_node: int = 100) -> CorrelationReport:
    """Compare sampled against exact path stress over a corpus of layouts.

    ``graphs`` may be a single graph shared by every layout. ``pearson_r`` is
    ``None`` when either series has zero variance.
    """
    layouts = list(layouts)
    if isinstance(graphs, PangenomeGraph):
        graphs = [graphs] * len(layouts)
    graphs = list(graphs)
    if len(graphs) != len(layouts):
        raise CountMismatch(f"{len(graphs)} graphs for {len(layouts)} layouts")
    for g in graphs:
        if g.total_steps > CORPUS_STEP_LIMIT:
            raise CorpusTooLarge(f"graph with {g.total_steps} steps exceeds {CORPUS_STEP_LIMIT}")
    exact, reports = [], []
    for k, (g, lay) in enumerate(zip(graphs, layouts)):
        exact.append(exact_path_stress(g, lay).mean)
        reports.append(sampled_path_stress(g, lay, seed + k, samples_per_node))
    sampled = [r.mean for r in reports]
    e = np.array(exact)
    s = np.array(sampled)
    r = None
    if len(e) >= 2 and e.std() > 0 and s.std() > 0:
        r = float(np.corrcoef(e, s)[0, 1])
    dev = max((_rel_dev(a, b) for a, b in zip(s, e)), default=0.0)
    return CorrelationReport(r, float(dev), tuple(exact), tuple(sampled), tuple(reports))
