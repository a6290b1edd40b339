"""Thread-scaling benchmark for the layout engine."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

from .engine import LayoutConfig, run_layout
from .errors import InvalidParameter
from .metrics import sampled_path_stress


@dataclass(frozen=True)
class BenchRow:
    threads: int
    median_seconds: float
    sps: float

    def to_tsv(self) -> str:
        return f"{self.threads}\t{self.median_seconds:.6f}\t{self.sps!r}"


BENCH_HEADER = "threads\tmedian_seconds\tsps"


def time_layout(graph, config: LayoutConfig, repeats: int = 3):
    """Median wall time of ``repeats`` runs and the last run's layout."""
    times = []
    layout = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        layout = run_layout(graph, config)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), layout


def bench_threads(graph, threads_list, repeats: int = 3,
                  config: LayoutConfig = LayoutConfig(), sps_seed: int = 1) -> list[BenchRow]:
    if not threads_list or any(t < 1 for t in threads_list):
        raise InvalidParameter("threads list must hold positive integers")
    if repeats < 1:
        raise InvalidParameter("repeats must be >= 1")
    # compile kernels outside the timed region
    run_layout(graph, config.with_(n_iters=1, threads=1))
    rows = []
    for t in threads_list:
        seconds, layout = time_layout(graph, config.with_(threads=t), repeats)
        rows.append(BenchRow(t, seconds, sampled_path_stress(graph, layout, sps_seed).mean))
    return rows


def speedups(rows: list[BenchRow]) -> dict[int, float]:
    """Speedup of every row over the single-thread row."""
    base = next(r.median_seconds for r in rows if r.threads == 1)
    return {r.threads: base / r.median_seconds for r in rows}
