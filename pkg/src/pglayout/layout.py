"""Node layout storage: one packed record per node."""

from __future__ import annotations

import numpy as np

from .errors import CountMismatch

# record columns
LEN, SX, SY, EX, EY = range(5)


class Layout:
    """2D line segments, one per node, packed as an array of records.

    ``records[n]`` is ``(seq_len, start_x, start_y, end_x, end_y)`` so an
    update touching node ``n`` reads a single contiguous 40-byte record.
    """

    __slots__ = ("records",)

    def __init__(self, records: np.ndarray):
        records = np.ascontiguousarray(records, dtype=np.float64)
        if records.ndim != 2 or records.shape[1] != 5:
            raise ValueError(f"layout records must have shape (n, 5), got {records.shape}")
        self.records = records

    @classmethod
    def from_coords(cls, coords, lengths=None) -> "Layout":
        """Build from an ``(n, 4)`` coordinate array; unknown lengths are 0."""
        coords = np.asarray(coords, dtype=np.float64)
        if coords.ndim != 2 or coords.shape[1] != 4:
            raise ValueError(f"coordinates must have shape (n, 4), got {coords.shape}")
        records = np.zeros((len(coords), 5))
        records[:, SX:] = coords
        if lengths is not None:
            if len(lengths) != len(coords):
                raise CountMismatch(f"{len(lengths)} lengths for {len(coords)} nodes")
            records[:, LEN] = lengths
        return cls(records)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def n_nodes(self) -> int:
        return len(self.records)

    @property
    def coords(self) -> np.ndarray:
        """Writable ``(n, 4)`` view: start_x, start_y, end_x, end_y."""
        return self.records[:, SX:]

    @property
    def starts(self) -> np.ndarray:
        return self.records[:, SX:SY + 1]

    @property
    def ends(self) -> np.ndarray:
        return self.records[:, EX:EY + 1]

    def copy(self) -> "Layout":
        return Layout(self.records.copy())

    def is_finite(self) -> bool:
        return bool(np.isfinite(self.coords).all())

    def with_lengths(self, graph) -> "Layout":
        if self.n_nodes != graph.n_nodes:
            raise CountMismatch(f"layout has {self.n_nodes} rows, graph has {graph.n_nodes} nodes")
        out = self.copy()
        out.records[:, LEN] = graph.node_lengths
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, Layout) and np.array_equal(self.records, other.records)

    def __repr__(self) -> str:
        return f"Layout(nodes={self.n_nodes})"
