"""Immutable user-object bipartite graphs, train/probe splitting, user sampling.

The adjacency is binary and stored as CSR index arrays from both sides, so
user-to-objects and object-to-users traversals are both O(degree).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Mapping

import numpy as np

from .errors import EmptyDatasetError, NoEligibleUsersError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class InteractionList:
    """Raw (user token, object token) pairs plus where they came from."""

    pairs: tuple[tuple[str, str], ...]
    provenance: str = ""
    truncated: bool = False
    skipped_lines: tuple[tuple[int, str], ...] = ()

    def __len__(self) -> int:
        return len(self.pairs)


def gather_rows(indptr: np.ndarray, indices: np.ndarray,
                rows: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Concatenate the CSR slices of `rows` without a Python-level loop.

    Returns (gathered, counts) where counts[i] is the slice length of rows[i]
    and gathered lists the slices back to back in the order given.
    """
    rows = np.asarray(rows, dtype=np.int64)
    counts = indptr[rows + 1] - indptr[rows]
    total = int(counts.sum())
    if total == 0:
        return np.empty(0, dtype=indices.dtype), counts
    ends = np.cumsum(counts)
    # map each output slot to its source position inside `indices`
    pos = (np.arange(total, dtype=np.int64)
           - np.repeat(ends - counts, counts)
           + np.repeat(indptr[rows], counts))
    return indices[pos], counts


@dataclass(frozen=True)
class BipartiteGraph:
    """Binary user-object adjacency with cached degrees and token maps.

    Instances are immutable after construction and safe to share across
    threads. Row slices are sorted ascending and duplicate-free.
    """

    n: int
    m: int
    l: int
    user_indptr: np.ndarray
    user_indices: np.ndarray
    object_indptr: np.ndarray
    object_indices: np.ndarray
    user_tokens: tuple[str, ...]
    object_tokens: tuple[str, ...]

    @cached_property
    def user_degrees(self) -> np.ndarray:
        return np.diff(self.user_indptr)

    @cached_property
    def object_degrees(self) -> np.ndarray:
        return np.diff(self.object_indptr)

    @cached_property
    def user_index(self) -> Mapping[str, int]:
        return {tok: i for i, tok in enumerate(self.user_tokens)}

    @cached_property
    def object_index(self) -> Mapping[str, int]:
        return {tok: i for i, tok in enumerate(self.object_tokens)}

    def objects_of(self, user: int) -> np.ndarray:
        return self.user_indices[self.user_indptr[user]:self.user_indptr[user + 1]]

    def users_of(self, obj: int) -> np.ndarray:
        return self.object_indices[self.object_indptr[obj]:self.object_indptr[obj + 1]]

    def links(self) -> tuple[np.ndarray, np.ndarray]:
        """All (user id, object id) links, grouped by user."""
        return (np.repeat(np.arange(self.n, dtype=np.int64), self.user_degrees),
                self.user_indices.copy())


@dataclass(frozen=True)
class SplitPair:
    """A train graph plus the held-out probe links it excludes.

    The train graph keeps the full id universe of the source graph, so user
    and object ids are stable across the split; probe stores only pairs
    absent from train.
    """

    train: BipartiteGraph
    probe: Mapping[int, frozenset[int]]
    seed: int
    ratio: float


def _csr(rows: np.ndarray, cols: np.ndarray, n_rows: int) -> tuple[np.ndarray, np.ndarray]:
    order = np.lexsort((cols, rows))
    counts = np.bincount(rows, minlength=n_rows)
    indptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, np.ascontiguousarray(cols[order])


def _from_links(uids: np.ndarray, oids: np.ndarray,
                user_tokens: tuple[str, ...],
                object_tokens: tuple[str, ...]) -> BipartiteGraph:
    n, m = len(user_tokens), len(object_tokens)
    user_indptr, user_indices = _csr(uids, oids, n)
    object_indptr, object_indices = _csr(oids, uids, m)
    return BipartiteGraph(
        n=n, m=m, l=int(uids.size),
        user_indptr=user_indptr, user_indices=user_indices,
        object_indptr=object_indptr, object_indices=object_indices,
        user_tokens=user_tokens, object_tokens=object_tokens,
    )


def build_graph(interactions: InteractionList) -> BipartiteGraph:
    """Materialize the binary adjacency; duplicate pairs collapse to one link.

    Dense ids are assigned in first-appearance order on both sides, which
    keeps ingestion deterministic regardless of hash ordering.
    """
    if len(interactions.pairs) == 0:
        raise EmptyDatasetError("no interactions to build a graph from")
    user_ids: dict[str, int] = {}
    object_ids: dict[str, int] = {}
    u = np.empty(len(interactions.pairs), dtype=np.int64)
    o = np.empty_like(u)
    for idx, (utok, otok) in enumerate(interactions.pairs):
        if not utok or not otok:
            raise ValueError(f"empty token in interaction pair #{idx}")
        u[idx] = user_ids.setdefault(utok, len(user_ids))
        o[idx] = object_ids.setdefault(otok, len(object_ids))
    m = len(object_ids)
    keys = np.unique(u * m + o)
    return _from_links(keys // m, keys % m,
                       tuple(user_ids), tuple(object_ids))


def split_train_probe(g: BipartiteGraph, ratio: float, seed: int) -> SplitPair:
    """Seeded uniform partition of the link set into train and probe."""
    if not 0.0 < ratio < 1.0:
        raise ValueError(f"split ratio must lie in (0, 1), got {ratio}")
    uids, oids = g.links()
    perm = np.random.default_rng(seed).permutation(g.l)
    n_train = int(round(ratio * g.l))
    train_idx, probe_idx = perm[:n_train], perm[n_train:]
    train = _from_links(uids[train_idx], oids[train_idx],
                        g.user_tokens, g.object_tokens)
    pu, po = uids[probe_idx], oids[probe_idx]
    order = np.argsort(pu, kind="stable")
    pu, po = pu[order], po[order]
    probe: dict[int, frozenset[int]] = {}
    bounds = np.flatnonzero(np.diff(pu)) + 1
    for chunk_u, chunk_o in zip(np.split(pu, bounds), np.split(po, bounds)):
        if chunk_u.size:
            probe[int(chunk_u[0])] = frozenset(chunk_o.tolist())
    return SplitPair(train=train, probe=probe, seed=seed, ratio=ratio)


def sample_users(interactions: InteractionList, min_degree: int,
                 count: int, seed: int) -> InteractionList:
    """Restrict to users with >= min_degree distinct objects, sample `count`.

    Returns every link of the sampled users. When fewer users are eligible
    than requested, all of them are returned and `truncated` is set.
    """
    if min_degree < 1:
        raise ValueError(f"min_degree must be >= 1, got {min_degree}")
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    unique_pairs = list(dict.fromkeys(interactions.pairs))
    degrees: dict[str, int] = {}
    for utok, _ in unique_pairs:
        degrees[utok] = degrees.get(utok, 0) + 1
    eligible = [tok for tok in dict.fromkeys(u for u, _ in unique_pairs)
                if degrees[tok] >= min_degree]
    if not eligible:
        raise NoEligibleUsersError(f"no user has degree >= {min_degree}")
    truncated = count > len(eligible)
    if truncated:
        log.warning("requested %d users but only %d are eligible", count, len(eligible))
    size = min(count, len(eligible))
    idx = np.random.default_rng(seed).choice(len(eligible), size=size, replace=False)
    keep = {eligible[int(i)] for i in idx}
    pairs = tuple(p for p in unique_pairs if p[0] in keep)
    return InteractionList(
        pairs=pairs,
        provenance=f"{interactions.provenance}|sample(min_degree={min_degree},"
                   f"count={count},seed={seed})",
        truncated=truncated,
    )
