"""Pangenome graph layout by path-guided stochastic gradient descent."""

from .engine import (LayoutConfig, SgdSchedule, StepOutcome, init_layout, layout_step,
                     make_schedule, run_layout, run_layout_reuse, sgd_update)
from .formats import parse_gfa, read_layout_tsv, write_gfa, write_layout_tsv
from .graph import (Edge, Endpoint, Orientation, PangenomeGraph, Path, PathStep, build_graph,
                    generate_synthetic_pangenome, path_position, total_update_steps)
from .layout import Layout
from .metrics import (StressReport, correlation_harness, exact_path_stress, pair_stress,
                      sampled_path_stress, step_pair_stress)
from .rng import RngState, flip_coin, next_uniform, seed_worker, weighted_step_select, zipf_sample
from .svg import RenderOptions, render_svg

__version__ = "0.1.0"
