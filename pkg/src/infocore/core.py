"""Information-core extraction and core-restricted scoring.

The core is the fraction r of users whose training data alone should drive
recommendation for everyone. Restriction is implemented as masking at
scoring time, never by deleting links, so one training graph is shared
across every core configuration.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph import BipartiteGraph
from .recommend import AlgorithmSpec, ScoreVector, make_scorer
from .similarity import NeighborTable

CORE_METHODS = ("degree", "random", "frequency", "rank")


@dataclass(frozen=True)
class CoreSet:
    """A set of core user ids plus the recipe that produced it.

    `weights` holds the per-user selection score for audit (None for the
    random method); `mask` is the boolean membership array scoring uses.
    """

    members: np.ndarray
    mask: np.ndarray
    method: str
    r: float
    N: int | None = None
    seed: int | None = None
    weights: np.ndarray | None = None

    @property
    def size(self) -> int:
        return int(self.members.size)


def extract_core(g: BipartiteGraph, table: NeighborTable | None,
                 method: str, r: float,
                 seed: int | None = None) -> CoreSet:
    """Select round(r * n) core users by the given method.

    degree ranks by training degree; random draws a uniform seeded sample;
    frequency counts appearances in other users' neighbor lists; rank sums
    1/position over those appearances. Ties always break by ascending user
    id, so cores are nested across increasing r.
    """
    if method not in CORE_METHODS:
        raise ValueError(f"unknown core method {method!r}")
    if not 0.0 < r <= 1.0:
        raise ValueError(f"core ratio must lie in (0, 1], got {r}")
    size = int(round(r * g.n))
    table_n: int | None = None
    weights: np.ndarray | None = None
    if method == "random":
        if seed is None:
            raise ValueError("random core extraction needs a seed")
        members = np.sort(np.random.default_rng(seed).permutation(g.n)[:size])
    else:
        if method == "degree":
            weights = g.user_degrees.astype(np.float64)
        else:
            if table is None:
                raise ValueError(f"{method} core extraction needs a neighbor table")
            table_n = table.N
            if method == "frequency":
                weights = np.bincount(table.neighbors, minlength=g.n).astype(np.float64)
            else:  # rank
                lengths = table.list_lengths()
                pos = (np.arange(table.neighbors.size, dtype=np.int64)
                       - np.repeat(table.indptr[:-1], lengths) + 1)
                weights = np.bincount(table.neighbors, weights=1.0 / pos,
                                      minlength=g.n)
        order = np.lexsort((np.arange(g.n), -weights))
        members = np.sort(order[:size])
    mask = np.zeros(g.n, dtype=bool)
    mask[members] = True
    return CoreSet(members=members, mask=mask, method=method, r=r,
                   N=table_n, seed=seed, weights=weights)


def core_restricted_scores(g: BipartiteGraph, core: CoreSet,
                           spec: AlgorithmSpec, target: int, *,
                           table: NeighborTable | None = None,
                           base_seed: int = 0,
                           all_users_pool: bool = False) -> ScoreVector:
    """Score one target with only core users redistributing or voting.

    Recommendations are still produced for targets outside the core; a
    target with no core co-occurrence simply gets an all-zero vector.
    """
    scorer = make_scorer(g, spec, table=table, core_mask=core.mask,
                         base_seed=base_seed, all_users_pool=all_users_pool)
    return scorer(target)


def dump_core(core: CoreSet, g: BipartiteGraph, path) -> None:
    """Write `token<TAB>weight` for every member, heaviest first."""
    from .io import atomic_write_text

    weights = core.weights if core.weights is not None else np.ones(g.n)
    w = weights[core.members]
    order = np.lexsort((core.members, -w))
    lines = [f"{g.user_tokens[core.members[i]]}\t{w[i]:.12g}" for i in order]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))
