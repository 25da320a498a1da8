"""Cosine user-user similarity and ranked top-N neighbor tables."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .graph import BipartiteGraph, gather_rows


@dataclass(frozen=True)
class NeighborTable:
    """Per-user ranked lists of the at-most-N most similar users.

    Lists hold only strictly positive similarities, sorted descending with
    ties broken by ascending user id. Stored as one concatenated ragged
    array; positions within a list are 1-based when ranks matter.
    """

    N: int
    indptr: np.ndarray
    neighbors: np.ndarray
    sims: np.ndarray

    @property
    def n_users(self) -> int:
        return self.indptr.size - 1

    def neighbors_of(self, user: int) -> tuple[np.ndarray, np.ndarray]:
        lo, hi = self.indptr[user], self.indptr[user + 1]
        return self.neighbors[lo:hi], self.sims[lo:hi]

    def list_lengths(self) -> np.ndarray:
        return np.diff(self.indptr)


def cosine(g: BipartiteGraph, i: int, j: int) -> float:
    """Profile overlap normalized by the geometric mean of the degrees.

    Zero when either user has no training links. Self-similarity is not a
    meaningful quantity here, so i == j is rejected.
    """
    if i == j:
        raise ValueError("cosine similarity of a user with herself is undefined")
    if not (0 <= i < g.n and 0 <= j < g.n):
        raise ValueError(f"user ids out of range: {i}, {j}")
    ki, kj = int(g.user_degrees[i]), int(g.user_degrees[j])
    if ki == 0 or kj == 0:
        return 0.0
    overlap = np.intersect1d(g.objects_of(i), g.objects_of(j),
                             assume_unique=True).size
    return overlap / np.sqrt(ki * kj)


def top_n_table(g: BipartiteGraph, N: int) -> NeighborTable:
    """Build every user's ranked top-N neighbor list.

    Candidates are exactly the users sharing at least one object with the
    target (all others have similarity zero and are excluded), found by
    walking the target's objects back to their collectors.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    ku = g.user_degrees.astype(np.float64)
    ids_rows: list[np.ndarray] = []
    sim_rows: list[np.ndarray] = []
    lengths = np.zeros(g.n, dtype=np.int64)
    for i in range(g.n):
        objs = g.objects_of(i)
        if objs.size == 0:
            continue
        gathered, _ = gather_rows(g.object_indptr, g.object_indices, objs)
        counts = np.bincount(gathered, minlength=g.n)
        counts[i] = 0
        cand = np.flatnonzero(counts)
        if cand.size == 0:
            continue
        s = counts[cand] / np.sqrt(ku[i] * ku[cand])
        order = np.lexsort((cand, -s))[:N]
        ids_rows.append(cand[order])
        sim_rows.append(s[order])
        lengths[i] = order.size
    indptr = np.zeros(g.n + 1, dtype=np.int64)
    np.cumsum(lengths, out=indptr[1:])
    neighbors = (np.concatenate(ids_rows) if ids_rows
                 else np.empty(0, dtype=np.int64))
    sims = (np.concatenate(sim_rows) if sim_rows
            else np.empty(0, dtype=np.float64))
    return NeighborTable(N=N, indptr=indptr, neighbors=neighbors, sims=sims)


def dump_table(table: NeighborTable, path) -> None:
    """Text dump: one line per user id, then `neighbor:similarity` in rank order."""
    from .io import atomic_write_text

    lines = []
    for i in range(table.n_users):
        ids, sims = table.neighbors_of(i)
        cells = [str(i)] + [f"{nid}:{s:.12g}" for nid, s in zip(ids, sims)]
        lines.append("\t".join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_table(path, N: int | None = None) -> NeighborTable:
    """Read a dump_table file back; N defaults to the longest stored list."""
    rows: list[tuple[list[int], list[float]]] = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        cells = line.split("\t")
        ids = []
        sims = []
        for cell in cells[1:]:
            nid, _, s = cell.partition(":")
            ids.append(int(nid))
            sims.append(float(s))
        rows.append((ids, sims))
    lengths = np.array([len(ids) for ids, _ in rows], dtype=np.int64)
    indptr = np.zeros(len(rows) + 1, dtype=np.int64)
    np.cumsum(lengths, out=indptr[1:])
    neighbors = np.array([n for ids, _ in rows for n in ids], dtype=np.int64)
    sims = np.array([s for _, ss in rows for s in ss], dtype=np.float64)
    if N is None:
        N = int(lengths.max()) if lengths.size else 1
    return NeighborTable(N=N, indptr=indptr, neighbors=neighbors, sims=sims)
