"""Object scoring: diffusion kernels, neighbor selection, user CF, top-L lists.

The diffusion scores are computed as two sparse passes over the adjacency
(objects to users, users back to objects) and never materialize the dense
object-object redistribution matrix, which would be m x m.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import EmptyProfileError
from .graph import BipartiteGraph, gather_rows
from .similarity import NeighborTable

STRATEGIES = ("random", "degree", "resource", "similarity")
ALGORITHMS = ("md", "hybrid", "knnmd", "ucf")

DEFAULT_LAMBDA = 0.8


@dataclass(frozen=True)
class ScoreVector:
    """Per-object recommendation scores for one target user."""

    target: int
    scores: np.ndarray


@dataclass(frozen=True)
class NeighborSelection:
    """The users allowed to redistribute resource for one target."""

    strategy: str
    K: int
    chosen: np.ndarray
    seed: int | None = None


@dataclass(frozen=True)
class RecList:
    """Ordered recommendation list of at most L uncollected objects."""

    target: int
    items: np.ndarray
    L: int
    n_padded: int = 0


@dataclass(frozen=True)
class AlgorithmSpec:
    """One scoring algorithm plus its parameters, parseable from text.

    Accepted forms: `md`, `hybrid:lambda=0.8`,
    `knnmd:strategy=similarity,K=20`, `ucf:K=20`. For knnmd the strategy
    defaults to similarity; for hybrid lambda defaults to 0.8.
    """

    name: str
    lam: float | None = None
    K: int | None = None
    strategy: str | None = None

    @classmethod
    def parse(cls, text: str) -> "AlgorithmSpec":
        head, _, rest = text.strip().partition(":")
        name = head.strip().lower()
        kwargs: dict[str, str] = {}
        if rest:
            for item in rest.split(","):
                key, eq, value = item.partition("=")
                if not eq:
                    raise ValueError(f"bad algorithm parameter {item!r} in {text!r}")
                kwargs[key.strip().lower()] = value.strip()
        if name == "md":
            spec = cls(name="md")
        elif name == "hybrid":
            spec = cls(name="hybrid", lam=float(kwargs.pop("lambda", DEFAULT_LAMBDA)))
        elif name == "knnmd":
            if "k" not in kwargs:
                raise ValueError(f"knnmd needs K=<int>: {text!r}")
            spec = cls(name="knnmd", K=int(kwargs.pop("k")),
                       strategy=kwargs.pop("strategy", "similarity"))
        elif name == "ucf":
            if "k" not in kwargs:
                raise ValueError(f"ucf needs K=<int>: {text!r}")
            spec = cls(name="ucf", K=int(kwargs.pop("k")))
        else:
            raise ValueError(f"unknown algorithm {name!r}")
        if kwargs:
            raise ValueError(f"unexpected parameters {sorted(kwargs)} for {name}")
        spec.validate()
        return spec

    def validate(self, table_n: int | None = None) -> None:
        if self.name not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.name!r}")
        if self.name == "hybrid" and not 0.0 <= float(self.lam) <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")
        if self.name in ("knnmd", "ucf") and (self.K is None or self.K < 1):
            raise ValueError(f"{self.name} needs K >= 1, got {self.K}")
        if self.name == "knnmd" and self.strategy not in STRATEGIES:
            raise ValueError(f"unknown knnmd strategy {self.strategy!r}")
        if table_n is not None and self.needs_table() and self.K > table_n:
            raise ValueError(
                f"{self.label()} needs a neighbor table with N >= {self.K}, "
                f"got N={table_n}")

    def needs_table(self) -> bool:
        return self.name == "ucf" or (self.name == "knnmd"
                                      and self.strategy == "similarity")

    def label(self) -> str:
        if self.name == "md":
            return "md"
        if self.name == "hybrid":
            return f"hybrid(lambda={self.lam:g})"
        if self.name == "knnmd":
            return f"knnmd(strategy={self.strategy},K={self.K})"
        return f"ucf(K={self.K})"


def _safe_inv(x: np.ndarray) -> np.ndarray:
    out = np.zeros(x.size, dtype=np.float64)
    np.divide(1.0, x, out=out, where=x > 0)
    return out


def _safe_pow(x: np.ndarray, p: float) -> np.ndarray:
    out = np.zeros(x.size, dtype=np.float64)
    np.power(x, p, out=out, where=x > 0)
    return out


class DiffusionEngine:
    """Two-pass degree-weighted resource redistribution on one training graph.

    Pass one pushes each collected object's unit resource down to its
    collectors (weight k_obj^-lambda per link); pass two pushes user-side
    resources back to the object side (weight 1/k_user), with an optional
    object-side factor k_obj^(lambda-1). lambda=1 is pure mass diffusion,
    lambda=0 pure heat conduction.

    The degree weight arrays are precomputed once so per-target scoring
    stays cheap inside evaluation loops. Instances are read-only after
    construction and safe to share across threads.
    """

    def __init__(self, g: BipartiteGraph, lam: float = 1.0):
        if not 0.0 <= lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {lam}")
        self.graph = g
        self.lam = lam
        ko = g.object_degrees.astype(np.float64)
        ku = g.user_degrees.astype(np.float64)
        self._inv_ku = _safe_inv(ku)
        if lam == 1.0:
            self._w_obj = _safe_inv(ko)
            self._w_out = None
        else:
            self._w_obj = _safe_pow(ko, -lam)
            self._w_out = _safe_pow(ko, lam - 1.0)

    def resources(self, target: int) -> np.ndarray:
        """User-side resources after the first pass (one entry per user)."""
        g = self.graph
        objs = g.objects_of(target)
        gathered, counts = gather_rows(g.object_indptr, g.object_indices, objs)
        weights = np.repeat(self._w_obj[objs], counts)
        return np.bincount(gathered, weights=weights, minlength=g.n)

    def _push_back(self, active: np.ndarray, h: np.ndarray) -> np.ndarray:
        g = self.graph
        vals = h[active] * self._inv_ku[active]
        gathered, counts = gather_rows(g.user_indptr, g.user_indices, active)
        f = np.bincount(gathered, weights=np.repeat(vals, counts), minlength=g.m)
        if self._w_out is not None:
            f = f * self._w_out
        return f

    def scores(self, target: int) -> np.ndarray:
        """Unrestricted scores: every user holding resource redistributes."""
        h = self.resources(target)
        return self._push_back(np.flatnonzero(h), h)

    def scores_over(self, target: int, users: np.ndarray) -> np.ndarray:
        """Scores with the second pass restricted to the given users."""
        h = self.resources(target)
        return self._push_back(np.asarray(users, dtype=np.int64), h)

    def core_scores(self, target: int, mask: np.ndarray) -> np.ndarray:
        """Scores with only masked-in users redistributing.

        The target never redistributes here; her resource lands only on her
        own collected objects, so the ranking of uncollected objects is
        unaffected either way.
        """
        h = self.resources(target)
        active = np.flatnonzero(h)
        active = active[mask[active]]
        active = active[active != target]
        return self._push_back(active, h)


def _check_target(g: BipartiteGraph, target: int) -> None:
    if not 0 <= target < g.n:
        raise ValueError(f"user id {target} out of range (n={g.n})")


def _require_profile(g: BipartiteGraph, target: int) -> None:
    _check_target(g, target)
    if g.user_degrees[target] == 0:
        raise EmptyProfileError(f"user {target} has no training links")


def md_scores(g: BipartiteGraph, target: int) -> ScoreVector:
    """Mass-diffusion scores for one target user."""
    _require_profile(g, target)
    return ScoreVector(target, DiffusionEngine(g, 1.0).scores(target))


def hybrid_scores(g: BipartiteGraph, target: int, lam: float) -> ScoreVector:
    """Interpolated diffusion/heat-conduction scores; lam=1 reproduces md_scores."""
    _require_profile(g, target)
    return ScoreVector(target, DiffusionEngine(g, lam).scores(target))


def _select_from_pool(g: BipartiteGraph, target: int, K: int, strategy: str,
                      h: np.ndarray, table: NeighborTable | None,
                      seed: int | None, allowed: np.ndarray | None,
                      all_users: bool) -> np.ndarray:
    if strategy == "similarity":
        if table is None:
            raise ValueError("similarity strategy needs a neighbor table")
        if K > table.N:
            raise ValueError(f"K={K} exceeds the table width N={table.N}")
        ids, _ = table.neighbors_of(target)
        if allowed is not None:
            ids = ids[allowed[ids]]
        return ids[:K].copy()
    if all_users:
        pool = np.arange(g.n, dtype=np.int64)
    else:
        pool = np.flatnonzero(h)
    pool = pool[pool != target]
    if allowed is not None:
        pool = pool[allowed[pool]]
    if strategy == "random":
        if seed is None:
            raise ValueError("random strategy needs a seed")
        if pool.size == 0:
            return pool
        size = min(K, pool.size)
        return np.random.default_rng(seed).choice(pool, size=size, replace=False)
    if strategy == "degree":
        key = g.user_degrees[pool]
    else:  # resource
        key = h[pool]
    return pool[np.lexsort((pool, -key))[:K]]


def select_neighbors(g: BipartiteGraph, target: int, K: int, strategy: str,
                     table: NeighborTable | None = None,
                     seed: int | None = None, *,
                     allowed: np.ndarray | None = None,
                     all_users: bool = False) -> NeighborSelection:
    """Pick at most K redistributing neighbors for a target user.

    The candidate pool is the set of users holding nonzero first-pass
    resource, i.e. sharing at least one training object with the target;
    pass all_users=True to widen random/degree selection to the whole user
    universe for sensitivity checks. `allowed` optionally masks the pool
    (used for core-restricted runs). Ties break by ascending user id and a
    pool smaller than K is returned whole.
    """
    _check_target(g, target)
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy == "similarity":
        h = np.empty(0)
    else:
        h = DiffusionEngine(g, 1.0).resources(target)
    chosen = _select_from_pool(g, target, K, strategy, h, table, seed,
                               allowed, all_users)
    return NeighborSelection(strategy=strategy, K=K,
                             chosen=np.sort(chosen), seed=seed)


def knnmd_scores(g: BipartiteGraph, target: int,
                 selection: NeighborSelection) -> ScoreVector:
    """Mass diffusion where only the selected neighbors redistribute."""
    _require_profile(g, target)
    engine = DiffusionEngine(g, 1.0)
    return ScoreVector(target, engine.scores_over(target, selection.chosen))


def ucf_scores(g: BipartiteGraph, target: int, K: int,
               table: NeighborTable, *,
               allowed: np.ndarray | None = None) -> ScoreVector:
    """Similarity-weighted sum of the top-K neighbors' profiles.

    Scores on the target's own collected objects are computed as well; they
    are filtered out at list-construction time, not here.
    """
    _check_target(g, target)
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if K > table.N:
        raise ValueError(f"K={K} exceeds the table width N={table.N}; "
                         "rebuild the table with a larger N")
    ids, sims = table.neighbors_of(target)
    if allowed is not None:
        keep = allowed[ids]
        ids, sims = ids[keep], sims[keep]
    ids, sims = ids[:K], sims[:K]
    gathered, counts = gather_rows(g.user_indptr, g.user_indices, ids)
    scores = np.bincount(gathered, weights=np.repeat(sims, counts), minlength=g.m)
    return ScoreVector(target, scores)


def top_l(scores: ScoreVector, profile, L: int) -> RecList:
    """Rank uncollected objects by score, ids breaking ties, truncated to L.

    Zero-score objects appear only as padding behind every positive score;
    an all-zero vector yields an empty (but valid) list since there is
    nothing to recommend.
    """
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    s = scores.scores
    keep = np.ones(s.size, dtype=bool)
    prof = (profile if isinstance(profile, np.ndarray)
            else np.fromiter(profile, dtype=np.int64, count=-1))
    if prof.size:
        keep[prof.astype(np.int64)] = False
    # only positive scores need sorting; zero scores can at most pad by id
    positive = np.flatnonzero(keep & (s > 0))
    if positive.size == 0:
        return RecList(scores.target, np.empty(0, dtype=np.int64), L, 0)
    order = np.lexsort((positive, -s[positive]))[:L]
    items = positive[order]
    n_padded = 0
    if items.size < L:
        pad = np.flatnonzero(keep & (s == 0))[:L - items.size]
        items = np.concatenate([items, pad])
        n_padded = int(pad.size)
    return RecList(scores.target, items, L, n_padded=n_padded)


def make_scorer(g: BipartiteGraph, spec: AlgorithmSpec, *,
                table: NeighborTable | None = None,
                core_mask: np.ndarray | None = None,
                base_seed: int = 0,
                all_users_pool: bool = False) -> Callable[[int], ScoreVector]:
    """Bind an algorithm spec to a training graph, returning target -> scores.

    Degree weights (and for knnmd the selection machinery) are prepared
    once, so the returned callable is what evaluation loops should use.
    Unlike md_scores/hybrid_scores it does not reject empty-profile targets;
    callers that iterate users are expected to skip them.
    """
    spec.validate(table_n=table.N if table is not None else None)
    if spec.needs_table() and table is None:
        raise ValueError(f"{spec.label()} needs a neighbor table")
    if spec.name in ("md", "hybrid"):
        engine = DiffusionEngine(g, 1.0 if spec.name == "md" else float(spec.lam))
        if core_mask is None:
            return lambda t: ScoreVector(t, engine.scores(t))
        return lambda t: ScoreVector(t, engine.core_scores(t, core_mask))
    if spec.name == "knnmd":
        engine = DiffusionEngine(g, 1.0)

        def score(t: int) -> ScoreVector:
            h = engine.resources(t)
            seed = base_seed * 1_000_003 + t if spec.strategy == "random" else None
            chosen = _select_from_pool(g, t, spec.K, spec.strategy, h, table,
                                       seed, core_mask, all_users_pool)
            return ScoreVector(t, engine._push_back(np.sort(chosen), h))

        return score
    return lambda t: ucf_scores(g, t, spec.K, table, allowed=core_mask)
