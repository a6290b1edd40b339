"""Lean in-memory variation graph with path-position indexing.

Nodes carry only their sequence length. Paths are stored both as small
per-path arrays (for Python-side inspection) and as flat step arrays shared
by every path (for the compiled layout and metric kernels).
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from .errors import EmptyPath, IndexOutOfRange, InvalidParameter, UnknownNode

#: each path step contributes this many SGD updates per iteration
STEPS_PER_PATH_STEP = 10


class Endpoint(enum.IntEnum):
    START = 0
    END = 1


class Orientation(enum.IntEnum):
    FORWARD = 0
    REVERSE = 1

    @classmethod
    def parse(cls, value) -> "Orientation":
        if isinstance(value, Orientation):
            return value
        if value in ("+", "forward", False, 0):
            return cls.FORWARD
        if value in ("-", "reverse", True, 1):
            return cls.REVERSE
        raise InvalidParameter(f"unrecognized orientation {value!r}")

    @property
    def symbol(self) -> str:
        return "+" if self is Orientation.FORWARD else "-"


@dataclass(frozen=True)
class NodeRecord:
    seq_len: int


@dataclass(frozen=True)
class Edge:
    from_node: int
    from_end: Endpoint
    to_node: int
    to_end: Endpoint


@dataclass(frozen=True)
class PathStep:
    node_id: int
    orientation: Orientation
    offset: int


class Path:
    """A named walk over the graph with precomputed nucleotide offsets."""

    __slots__ = ("name", "node_ids", "reverse", "offsets", "lengths", "total_len")

    def __init__(self, name: str, node_ids: np.ndarray, reverse: np.ndarray,
                 node_lengths: np.ndarray):
        if len(node_ids) == 0:
            raise EmptyPath(f"path {name!r} has no steps")
        self.name = name
        self.node_ids = _frozen(np.asarray(node_ids, dtype=np.int64))
        self.reverse = _frozen(np.asarray(reverse, dtype=np.uint8))
        self.lengths = _frozen(node_lengths[self.node_ids])
        offsets = np.zeros(len(node_ids), dtype=np.int64)
        np.cumsum(self.lengths[:-1], out=offsets[1:])
        self.offsets = _frozen(offsets)
        self.total_len = int(offsets[-1] + self.lengths[-1])

    def __len__(self) -> int:
        return len(self.node_ids)

    def __repr__(self) -> str:
        return f"Path({self.name!r}, steps={len(self)}, total_len={self.total_len})"

    @property
    def steps(self) -> list[PathStep]:
        return [
            PathStep(int(n), Orientation(int(r)), int(o))
            for n, r, o in zip(self.node_ids, self.reverse, self.offsets)
        ]


class PangenomeGraph:
    """Immutable variation graph G = (P, V, E).

    ``step_node``, ``step_offset``, ``step_reverse`` and ``step_length`` are
    the concatenation of every path's steps; path ``k`` occupies the slice
    ``path_start[k]:path_start[k + 1]``.
    """

    def __init__(self, node_lengths: np.ndarray, edges: Sequence[Edge],
                 paths: Sequence[Path]):
        self.node_lengths = _frozen(np.asarray(node_lengths, dtype=np.int64))
        self.edges = tuple(edges)
        self.paths = tuple(paths)
        counts = np.array([len(p) for p in self.paths], dtype=np.int64)
        path_start = np.zeros(len(self.paths) + 1, dtype=np.int64)
        np.cumsum(counts, out=path_start[1:])
        self.path_start = _frozen(path_start)
        self.total_steps = int(path_start[-1])
        if self.paths:
            cat = np.concatenate
            self.step_node = _frozen(cat([p.node_ids for p in self.paths]))
            self.step_offset = _frozen(cat([p.offsets for p in self.paths]))
            self.step_reverse = _frozen(cat([p.reverse for p in self.paths]))
        else:
            self.step_node = _frozen(np.zeros(0, dtype=np.int64))
            self.step_offset = _frozen(np.zeros(0, dtype=np.int64))
            self.step_reverse = _frozen(np.zeros(0, dtype=np.uint8))
        self.step_length = _frozen(self.node_lengths[self.step_node])

    @property
    def n_nodes(self) -> int:
        return len(self.node_lengths)

    @property
    def nodes(self) -> list[NodeRecord]:
        return [NodeRecord(int(n)) for n in self.node_lengths]

    @property
    def total_nucleotides(self) -> int:
        return int(self.node_lengths.sum())

    @property
    def average_degree(self) -> float:
        """Edges per node, the convention used for published pangenome statistics."""
        if self.n_nodes == 0:
            return 0.0
        return len(self.edges) / self.n_nodes

    def __repr__(self) -> str:
        return (f"PangenomeGraph(nodes={self.n_nodes}, edges={len(self.edges)}, "
                f"paths={len(self.paths)}, steps={self.total_steps})")


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def build_graph(node_lengths: Sequence[int], edges: Iterable, path_walks) -> PangenomeGraph:
    """Assemble a graph from dense node lengths, edges and oriented walks.

    ``path_walks`` is either a mapping ``name -> walk`` or a sequence of
    ``(name, walk)`` pairs; a walk is a sequence of ``(node_id, orientation)``
    with orientation ``'+'``/``'-'`` or an :class:`Orientation`. ``edges``
    items are :class:`Edge` or ``(from, from_end, to, to_end)`` tuples.
    """
    lengths = np.asarray(list(node_lengths), dtype=np.int64)
    if lengths.size and lengths.min() < 1:
        raise InvalidParameter("node sequence lengths must be >= 1")
    n = len(lengths)

    edge_list = []
    for e in edges:
        if not isinstance(e, Edge):
            a, ae, b, be = e
            e = Edge(int(a), Endpoint(ae), int(b), Endpoint(be))
        for node in (e.from_node, e.to_node):
            if not 0 <= node < n:
                raise UnknownNode(f"edge references undeclared node {node}")
        edge_list.append(e)

    items = path_walks.items() if isinstance(path_walks, Mapping) else path_walks
    paths = []
    for name, walk in items:
        walk = list(walk)
        if not walk:
            raise EmptyPath(f"path {name!r} has no steps")
        ids = np.empty(len(walk), dtype=np.int64)
        rev = np.empty(len(walk), dtype=np.uint8)
        for k, (node, orient) in enumerate(walk):
            if not 0 <= node < n:
                raise UnknownNode(f"path {name!r} references undeclared node {node}")
            ids[k] = node
            rev[k] = Orientation.parse(orient)
        paths.append(Path(str(name), ids, rev, lengths))
    return PangenomeGraph(lengths, edge_list, paths)


def path_position(path: Path, step_index: int, endpoint: Endpoint) -> int:
    """Nucleotide position of one endpoint of a step, measured along the path.

    A reverse step's START lies at the far end of the node as walked.
    """
    if not 0 <= step_index < len(path):
        raise IndexOutOfRange(f"step {step_index} outside path of {len(path)} steps")
    at_end = Endpoint(endpoint) == Endpoint.END
    if at_end != bool(path.reverse[step_index]):
        return int(path.offsets[step_index] + path.lengths[step_index])
    return int(path.offsets[step_index])


def total_update_steps(graph: PangenomeGraph) -> int:
    return STEPS_PER_PATH_STEP * graph.total_steps


def generate_synthetic_pangenome(seed: int, backbone_nodes: int, n_paths: int,
                                 variant_rate: float) -> PangenomeGraph:
    """Linear backbone with SNV, insertion and deletion bubbles.

    Each interior backbone node hosts a bubble with probability
    ``variant_rate``; every path independently takes each bubble's detour
    with probability 1/2. Node ids follow the backbone order so variant nodes
    sit right after the backbone node they belong to.
    """
    if backbone_nodes < 2:
        raise InvalidParameter("backbone_nodes must be >= 2")
    if n_paths < 1:
        raise InvalidParameter("n_paths must be >= 1")
    if not 0.0 <= variant_rate <= 1.0:
        raise InvalidParameter("variant_rate must lie in [0, 1]")

    rng = np.random.default_rng(seed)
    lengths: list[int] = []
    # per backbone position: (backbone id, kind, variant id or -1)
    layout: list[tuple[int, str, int]] = []
    backbone_len = rng.integers(1, 9, size=backbone_nodes)
    has_bubble = rng.random(backbone_nodes) < variant_rate
    kinds = rng.integers(0, 3, size=backbone_nodes)
    for b in range(backbone_nodes):
        bid = len(lengths)
        lengths.append(int(backbone_len[b]))
        kind, vid = "", -1
        if has_bubble[b] and 0 < b < backbone_nodes - 1:
            kind = ("snv", "ins", "del")[kinds[b]]
            if kind == "snv":
                vid = len(lengths)
                lengths.append(int(backbone_len[b]))
            elif kind == "ins":
                vid = len(lengths)
                lengths.append(int(rng.integers(1, 21)))
        layout.append((bid, kind, vid))

    walks = []
    for k in range(n_paths):
        take = rng.random(backbone_nodes) < 0.5
        walk = []
        for b, (bid, kind, vid) in enumerate(layout):
            detour = kind and take[b]
            if kind == "snv" and detour:
                walk.append(vid)
            elif kind == "del" and detour:
                pass
            else:
                walk.append(bid)
                if kind == "ins" and detour:
                    walk.append(vid)
        walks.append((f"sample{k + 1}", [(n, "+") for n in walk]))

    links = {(layout[b][0], layout[b + 1][0]) for b in range(backbone_nodes - 1)}
    for _, walk in walks:
        links.update((walk[s][0], walk[s + 1][0]) for s in range(len(walk) - 1))
    edges = [Edge(a, Endpoint.END, b, Endpoint.START) for a, b in sorted(links)]
    return build_graph(lengths, edges, walks)
