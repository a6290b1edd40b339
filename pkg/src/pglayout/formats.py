"""GFA v1 reading/writing and the layout TSV format."""

from __future__ import annotations

import logging
import math

import numpy as np

from .errors import (CountMismatch, MalformedLine, MalformedRow, NoPaths,
                     NonFiniteCoordinate, UnknownSegment, UnsupportedRecord)
from .graph import Edge, Endpoint, Orientation, PangenomeGraph, build_graph
from .layout import Layout

log = logging.getLogger(__name__)

LAYOUT_HEADER = "node_id\tstart_x\tstart_y\tend_x\tend_y"

_MIN_COLUMNS = {"S": 3, "L": 6, "P": 3}


def _lines(stream):
    if isinstance(stream, str):
        return stream.splitlines()
    return stream


def _orient(symbol: str, lineno: int) -> Orientation:
    if symbol == "+":
        return Orientation.FORWARD
    if symbol == "-":
        return Orientation.REVERSE
    raise MalformedLine(f"line {lineno}: bad orientation {symbol!r}")


def _segment_length(cols: list[str], lineno: int) -> int:
    seq = cols[2]
    if seq != "*":
        return len(seq)
    for tag in cols[3:]:
        if tag.startswith("LN:i:"):
            try:
                return int(tag[5:])
            except ValueError:
                break
    raise MalformedLine(f"line {lineno}: segment {cols[1]!r} has no sequence and no LN:i tag")


def parse_gfa(stream) -> PangenomeGraph:
    """Read GFA v1 text (a file object, iterable of lines, or a string).

    Segments get dense ids in the order they appear. Records other than
    H/S/L/P are skipped and counted in a warning; W lines are rejected.
    """
    names: dict[str, int] = {}
    lengths: list[int] = []
    links: list[tuple[int, list[str]]] = []
    walks: list[tuple[int, list[str]]] = []
    skipped = 0
    for lineno, line in enumerate(_lines(stream), 1):
        line = line.rstrip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t") if "\t" in line else line.split()
        kind = cols[0]
        if kind == "W":
            raise UnsupportedRecord(f"line {lineno}: W (walk) records are not supported; use P lines")
        if kind == "H":
            continue
        if kind not in _MIN_COLUMNS:
            skipped += 1
            continue
        if len(cols) < _MIN_COLUMNS[kind]:
            raise MalformedLine(f"line {lineno}: {kind} record needs {_MIN_COLUMNS[kind]} columns, "
                                f"got {len(cols)}")
        if kind == "S":
            if cols[1] in names:
                raise MalformedLine(f"line {lineno}: duplicate segment {cols[1]!r}")
            names[cols[1]] = len(lengths)
            lengths.append(_segment_length(cols, lineno))
        elif kind == "L":
            links.append((lineno, cols))
        else:
            walks.append((lineno, cols))
    if skipped:
        log.warning("skipped %d unsupported GFA records", skipped)

    def resolve(name: str, lineno: int) -> int:
        try:
            return names[name]
        except KeyError:
            raise UnknownSegment(f"line {lineno}: unknown segment {name!r}") from None

    edges = []
    for lineno, cols in links:
        a = resolve(cols[1], lineno)
        b = resolve(cols[3], lineno)
        a_end = Endpoint.END if _orient(cols[2], lineno) is Orientation.FORWARD else Endpoint.START
        b_end = Endpoint.START if _orient(cols[4], lineno) is Orientation.FORWARD else Endpoint.END
        edges.append(Edge(a, a_end, b, b_end))

    if not walks:
        raise NoPaths("GFA has no P lines; a layout needs at least one path")
    paths = []
    for lineno, cols in walks:
        walk = []
        for item in cols[2].split(","):
            if len(item) < 2:
                raise MalformedLine(f"line {lineno}: bad path step {item!r}")
            walk.append((resolve(item[:-1], lineno), _orient(item[-1], lineno)))
        paths.append((cols[1], walk))
    return build_graph(lengths, edges, paths)


def write_gfa(graph: PangenomeGraph, sink) -> None:
    """Minimal GFA v1: segments named ``id + 1`` with ``*`` sequence and LN tags."""
    sink.write("H\tVN:Z:1.0\n")
    for k, n in enumerate(graph.node_lengths):
        sink.write(f"S\t{k + 1}\t*\tLN:i:{int(n)}\n")
    for e in graph.edges:
        a = "+" if e.from_end == Endpoint.END else "-"
        b = "+" if e.to_end == Endpoint.START else "-"
        sink.write(f"L\t{e.from_node + 1}\t{a}\t{e.to_node + 1}\t{b}\t0M\n")
    for p in graph.paths:
        steps = ",".join(f"{int(n) + 1}{'-' if r else '+'}" for n, r in zip(p.node_ids, p.reverse))
        sink.write(f"P\t{p.name}\t{steps}\t*\n")


def write_layout_tsv(layout: Layout, sink) -> None:
    coords = layout.coords
    if not np.isfinite(coords).all():
        bad = int(np.flatnonzero(~np.isfinite(coords).all(axis=1))[0])
        raise NonFiniteCoordinate(f"node {bad} has a non-finite coordinate")
    sink.write(LAYOUT_HEADER + "\n")
    for k, row in enumerate(coords.tolist()):
        sink.write(f"{k}\t{row[0]!r}\t{row[1]!r}\t{row[2]!r}\t{row[3]!r}\n")


def read_layout_tsv(source, graph: PangenomeGraph | None = None) -> Layout:
    """Parse a layout TSV; with ``graph``, row count is checked and lengths filled."""
    lines = iter(_lines(source))
    header = next(lines, None)
    if header is None or header.rstrip("\r\n") != LAYOUT_HEADER:
        raise MalformedRow(f"expected header {LAYOUT_HEADER!r}, got {header!r}")
    rows = []
    for lineno, line in enumerate(lines, 2):
        line = line.rstrip("\r\n")
        if not line:
            continue
        cols = line.split("\t")
        if len(cols) != 5:
            raise MalformedRow(f"line {lineno}: expected 5 columns, got {len(cols)}")
        try:
            node = int(cols[0])
            vals = [float(c) for c in cols[1:]]
        except ValueError:
            raise MalformedRow(f"line {lineno}: unparseable row {line!r}") from None
        if node != len(rows):
            raise MalformedRow(f"line {lineno}: node ids must be dense and ascending, "
                               f"expected {len(rows)} got {node}")
        if not all(math.isfinite(v) for v in vals):
            raise MalformedRow(f"line {lineno}: non-finite coordinate")
        rows.append(vals)
    coords = np.array(rows, dtype=np.float64).reshape(-1, 4)
    if graph is None:
        return Layout.from_coords(coords)
    if len(coords) != graph.n_nodes:
        raise CountMismatch(f"layout has {len(coords)} rows, graph has {graph.n_nodes} nodes")
    return Layout.from_coords(coords, graph.node_lengths)
