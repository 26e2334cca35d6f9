"""Online k-step adjacency matrix built from trajectories, plus the training
pair samplers (matrix-based, and the trajectory-pair baseline without a
matrix).

Cells are integer (x, y) goal-space positions; the Key-Chest key flag never
reaches this module. Labels are written symmetrically because the grid
dynamics are reversible, and entries only ever flip 0 -> 1.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Trajectory:
    """Goal-space cells visited in one episode, one entry per step."""

    cells: list
    episode: int = 0

    def __post_init__(self):
        if not self.cells:
            raise ValueError("empty trajectory")

    def __len__(self):
        return len(self.cells)


class TrajectoryBuffer:
    """Holds trajectories between adjacency-matrix updates; cleared after each."""

    def __init__(self):
        self.trajectories = []

    def add(self, traj: Trajectory):
        self.trajectories.append(traj)

    def clear(self):
        self.trajectories = []

    def __len__(self):
        return len(self.trajectories)

    def __iter__(self):
        return iter(self.trajectories)


class AdjacencyMatrix:
    """Growable binary matrix over discovered goal-space cells.

    New cells get a zero row/column (except the diagonal, which is always 1).
    An entry becomes 1 when some trajectory witnesses the two cells within k
    steps of each other.
    """

    def __init__(self, k: int, capacity: int = 64):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.k = k
        self.index = {}          # cell -> row id, insertion-ordered
        self._cells = []
        self._bits = np.zeros((capacity, capacity), dtype=np.uint8)

    @property
    def n_cells(self):
        return len(self._cells)

    @property
    def cells(self):
        return tuple(self._cells)

    @property
    def bits(self) -> np.ndarray:
        n = self.n_cells
        return self._bits[:n, :n]

    def ensure_cell(self, cell) -> int:
        i = self.index.get(cell)
        if i is not None:
            return i
        i = len(self._cells)
        if i >= self._bits.shape[0]:
            grown = np.zeros((2 * self._bits.shape[0],) * 2, dtype=np.uint8)
            grown[:i, :i] = self._bits[:i, :i]
            self._bits = grown
        self.index[cell] = i
        self._cells.append(cell)
        self._bits[i, i] = 1
        return i

    def label(self, cell_a, cell_b) -> int:
        return int(self._bits[self.index[cell_a], self.index[cell_b]])

    def add_trajectory(self, traj: Trajectory):
        ids = np.fromiter((self.ensure_cell(c) for c in traj.cells),
                          dtype=np.int64, count=len(traj.cells))
        for off in range(1, min(self.k, len(ids) - 1) + 1):
            a, b = ids[:-off], ids[off:]
            self._bits[a, b] = 1
            self._bits[b, a] = 1

    def save_snapshot(self, path_prefix: str):
        """Write the matrix as an ascii portable bitmap plus a cell-index
        sidecar (JSON), for offline inspection and plotting."""
        bits = self.bits
        with open(f"{path_prefix}.pbm", "w") as f:
            f.write(f"P1\n{bits.shape[1]} {bits.shape[0]}\n")
            for row in bits:
                f.write(" ".join("1" if v else "0" for v in row) + "\n")
        with open(f"{path_prefix}.json", "w") as f:
            json.dump({"k": self.k, "cells": [list(c) for c in self._cells]},
                      f, sort_keys=True)
            f.write("\n")


def update_matrix(m: AdjacencyMatrix, buf: TrajectoryBuffer) -> AdjacencyMatrix:
    """Fold every buffered trajectory into the matrix. The caller clears the
    buffer afterwards (the harness does so at every update boundary)."""
    for traj in buf:
        m.add_trajectory(traj)
    return m


def matrix_from_perfect(cells, perfect_bits: np.ndarray, k: int) -> AdjacencyMatrix:
    """Adjacency matrix pre-filled from an oracle distance threshold, used by
    the oracle-matrix training variant and the distillation fixtures."""
    m = AdjacencyMatrix(k, capacity=max(64, len(cells)))
    for c in cells:
        m.ensure_cell(c)
    n = len(cells)
    m._bits[:n, :n] = np.asarray(perfect_bits, dtype=np.uint8)
    np.fill_diagonal(m._bits[:n, :n], 1)
    return m


@dataclass(frozen=True)
class LabeledPair:
    g_i: tuple
    g_j: tuple
    label: int


def sample_pairs(m: AdjacencyMatrix, n: int, rng, exclude=None,
                 balanced: bool = False):
    """Draw n cell pairs uniformly (with replacement) over explored cells and
    label them from the matrix.

    exclude is an optional set of unordered id pairs (lo, hi) to skip, used
    for held-out evaluation splits. balanced=True enforces a 50/50 label mix
    (off by default: plain uniform pair sampling is the reference scheme).
    """
    n_cells = m.n_cells
    if n_cells < 2:
        raise ValueError("need at least 2 explored cells to sample pairs")
    bits = m.bits
    cells = m.cells
    out = []
    want_pos = n - n // 2
    n_pos = 0
    attempts = 0
    max_attempts = 1000 * n
    while len(out) < n:
        attempts += 1
        if attempts > max_attempts:
            raise RuntimeError("pair sampling failed; exclusion or balance too strict")
        i = int(rng.integers(n_cells))
        j = int(rng.integers(n_cells))
        if exclude is not None and (min(i, j), max(i, j)) in exclude:
            continue
        label = int(bits[i, j])
        if balanced:
            if label == 1 and n_pos >= want_pos:
                continue
            if label == 0 and (len(out) - n_pos) >= n - want_pos:
                continue
        n_pos += label
        out.append(LabeledPair(cells[i], cells[j], label))
    return out


def sample_pairs_noadj(buf: TrajectoryBuffer, n: int, k: int, rng,
                       gap_factor: int = 4):
    """Trajectory-pair sampler used by the no-matrix baseline.

    Index pairs within one trajectory are positives when their temporal gap
    is at most k and negatives when it is at least gap_factor * k; pairs in
    between are discarded and resampled.
    """
    trajs = [t for t in buf if len(t) >= 1]
    if not trajs:
        raise ValueError("empty trajectory buffer")
    out = []
    attempts = 0
    max_attempts = 1000 * n
    while len(out) < n:
        attempts += 1
        if attempts > max_attempts:
            raise RuntimeError("trajectory pair sampling failed to find labeled pairs")
        traj = trajs[int(rng.integers(len(trajs)))]
        i = int(rng.integers(len(traj)))
        j = int(rng.integers(len(traj)))
        gap = abs(i - j)
        if gap <= k:
            label = 1
        elif gap >= gap_factor * k:
            label = 0
        else:
            continue
        out.append(LabeledPair(traj.cells[i], traj.cells[j], label))
    return out
