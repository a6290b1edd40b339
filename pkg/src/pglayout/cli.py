"""Command-line front end: ``pglayout {layout,stress,render,gen,bench}``.

Exit codes: 0 success, 1 usage error, 2 input error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import contextlib
import io
import os
import sys
import tempfile
import time

from .bench import BENCH_HEADER, bench_threads
from .engine import LayoutConfig, run_layout
from .errors import InvalidParameter, PangenomeError
from .formats import parse_gfa, read_layout_tsv, write_gfa, write_layout_tsv
from .graph import generate_synthetic_pangenome
from .metrics import exact_path_stress, sampled_path_stress
from .svg import RenderOptions, render_svg

EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_RUNTIME = 0, 1, 2, 3
EXACT_STEP_LIMIT = 100_000
THREADS_ENV = "PGLAYOUT_THREADS"


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


@contextlib.contextmanager
def atomic_output(path: str | None):
    """Text sink that only appears at ``path`` once the block succeeds."""
    if path is None or path == "-":
        buf = io.StringIO()
        yield buf
        sys.stdout.write(buf.getvalue())
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".pglayout-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp)
        raise


def _load_graph(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_gfa(fh)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from e
    except PangenomeError as e:
        raise InputError(f"{path}: {e}") from e


def _load_layout(path: str, graph):
    try:
        with open(path, encoding="utf-8") as fh:
            return read_layout_tsv(fh, graph)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from e
    except PangenomeError as e:
        raise InputError(f"{path}: {e}") from e


def _threads(value: str) -> int:
    if value == "auto":
        value = os.environ.get(THREADS_ENV) or str(os.cpu_count() or 1)
    try:
        n = int(value)
    except ValueError:
        raise UsageError(f"--threads must be an integer or 'auto', got {value!r}") from None
    if n < 1:
        raise UsageError("--threads must be >= 1")
    return n


def cmd_layout(args) -> int:
    config = LayoutConfig(
        n_iters=args.iters, threads=_threads(args.threads), global_seed=args.seed,
        batch_size=args.batch, zipf_theta=args.zipf_theta, zipf_space_max=args.zipf_space_max,
        drf=args.drf, srf=args.srf,
    )
    try:
        config.validate()
    except InvalidParameter as e:
        raise UsageError(str(e)) from e
    if args.checkpoint_every < 0:
        raise UsageError("--checkpoint-every must be >= 0")
    graph = _load_graph(args.gfa)
    ckpt_base = args.out if args.out not in (None, "-") else "layout"
    t0 = time.perf_counter()

    def report(it, eta, layout, _counters):
        _err(f"iter {it + 1}/{config.n_iters}\teta {eta:.6g}\telapsed {time.perf_counter() - t0:.3f}s")
        if args.checkpoint_every and (it + 1) % args.checkpoint_every == 0:
            with atomic_output(f"{ckpt_base}.iter{it + 1}.tsv") as fh:
                write_layout_tsv(layout, fh)

    layout = run_layout(graph, config, on_iteration=report)
    with atomic_output(args.out) as fh:
        write_layout_tsv(layout, fh)
    return EXIT_OK


def cmd_stress(args) -> int:
    graph = _load_graph(args.gfa)
    layout = _load_layout(args.layout, graph)
    if args.exact:
        if graph.total_steps > EXACT_STEP_LIMIT and not args.force:
            raise UsageError(
                f"exact path stress over {graph.total_steps} steps is quadratic and impractical; "
                f"use --sampled, or pass --force to run it anyway")
        report = exact_path_stress(graph, layout)
    else:
        if args.samples_per_node < 1:
            raise UsageError("--samples-per-node must be >= 1")
        report = sampled_path_stress(graph, layout, args.seed, args.samples_per_node)
    sys.stdout.write(report.to_tsv() + "\n")
    return EXIT_OK


def cmd_render(args) -> int:
    if args.width < 1:
        raise UsageError("--width must be >= 1")
    graph = _load_graph(args.gfa)
    layout = _load_layout(args.layout, graph)
    svg = render_svg(graph, layout, RenderOptions(args.width, args.stroke_scale, args.color_by_path))
    with atomic_output(args.out) as fh:
        fh.write(svg)
    return EXIT_OK


def cmd_gen(args) -> int:
    try:
        graph = generate_synthetic_pangenome(args.seed, args.backbone, args.paths, args.variant_rate)
    except InvalidParameter as e:
        raise UsageError(str(e)) from e
    with atomic_output(args.out) as fh:
        write_gfa(graph, fh)
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        threads_list = [int(t) for t in args.threads_list.split(",")]
    except ValueError:
        raise UsageError(f"bad --threads-list {args.threads_list!r}") from None
    graph = _load_graph(args.gfa)
    config = LayoutConfig(n_iters=args.iters, global_seed=args.seed)
    try:
        rows = bench_threads(graph, threads_list, args.repeats, config)
    except InvalidParameter as e:
        raise UsageError(str(e)) from e
    with atomic_output(args.out) as fh:
        fh.write(BENCH_HEADER + "\n")
        for row in rows:
            fh.write(row.to_tsv() + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pglayout", description="Pangenome graph layout by path-guided SGD.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("layout", help="compute a 2D layout of a GFA graph")
    p.add_argument("gfa")
    p.add_argument("--out", "-o", help="layout TSV (default: stdout)")
    p.add_argument("--iters", type=int, default=30)
    p.add_argument("--threads", default="auto", help=f"worker count or 'auto' (${THREADS_ENV} or CPU count)")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--batch", type=int, default=32, help="steps per cooling decision")
    p.add_argument("--zipf-theta", type=float, default=0.99)
    p.add_argument("--zipf-space-max", type=int, default=1000)
    p.add_argument("--drf", type=int, default=1, help="data reuse factor (1, 2 or 4)")
    p.add_argument("--srf", type=int, default=1, help="step reduction factor")
    p.add_argument("--checkpoint-every", type=int, default=0,
                   help="also write <out>.iter<k>.tsv every k iterations")
    p.set_defaults(func=cmd_layout)

    p = sub.add_parser("stress", help="path stress of a layout")
    p.add_argument("gfa")
    p.add_argument("layout")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--sampled", action="store_true", help="(default)")
    p.add_argument("--samples-per-node", type=int, default=100)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--force", action="store_true", help="allow exact mode on large graphs")
    p.set_defaults(func=cmd_stress)

    p = sub.add_parser("render", help="draw a layout as SVG")
    p.add_argument("gfa")
    p.add_argument("layout")
    p.add_argument("--out", "-o", help="SVG file (default: stdout)")
    p.add_argument("--width", type=int, default=1600)
    p.add_argument("--stroke-scale", type=float, default=1.0)
    p.add_argument("--color-by-path", action="store_true")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("gen", help="write a synthetic pangenome GFA")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--backbone", type=int, default=5000)
    p.add_argument("--paths", type=int, default=12)
    p.add_argument("--variant-rate", type=float, default=0.05)
    p.add_argument("--out", "-o", help="GFA file (default: stdout)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("bench", help="thread-scaling benchmark")
    p.add_argument("gfa")
    p.add_argument("--threads-list", default="1,2,4,8")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--iters", type=int, default=30)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", "-o", help="timing TSV (default: stdout)")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as e:
        _err(f"pglayout {args.command}: {e}")
        return EXIT_USAGE
    except InputError as e:
        _err(f"pglayout {args.command}: {e}")
        return EXIT_INPUT
    except PangenomeError as e:
        _err(f"pglayout {args.command}: {e}")
        return EXIT_INPUT
    except Exception as e:  # noqa: BLE001
        _err(f"pglayout {args.command}: internal error: {e!r}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
