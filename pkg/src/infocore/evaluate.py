"""Recall evaluation under the seeded train/probe protocol, plus sweeps.

run_experiment is the single engine behind the evaluate and sweep CLI
commands: for every split seed it builds the artifacts once (split, neighbor
table, cores), evaluates every (algorithm, core, r) cell, and emits one CSV
report with per-seed rows followed by mean/std aggregates.
"""

from __future__ import annotations

import csv
import io as _io
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from time import perf_counter
from typing import Mapping

import numpy as np

from .core import CORE_METHODS, CoreSet, extract_core
from .errors import NoEvaluableUsersError, RecsysError
from .graph import BipartiteGraph, build_graph, split_train_probe
from .io import atomic_write_text, load_edge_list
from .recommend import AlgorithmSpec, RecList, make_scorer, top_l
from .similarity import NeighborTable, top_n_table

log = logging.getLogger(__name__)

WORKERS_ENV = "INFOCORE_WORKERS"

CSV_HEADER = ("seed", "algorithm", "params", "core_method", "N", "r", "K",
              "lambda", "L", "users_evaluated", "users_skipped", "recall",
              "retention_ratio", "scoring_ms")


def recall_user(rec: RecList, probe_items) -> float:
    """Fraction of the user's probe objects that made the recommendation list."""
    if not probe_items:
        raise ValueError("recall is undefined for an empty probe set")
    hits = len(frozenset(rec.items.tolist()) & frozenset(probe_items))
    return hits / len(probe_items)


@dataclass(frozen=True)
class EvalResult:
    """System recall over one (train, probe, algorithm, core) cell."""

    recall: float
    users_evaluated: int
    skipped_no_probe: int
    skipped_no_profile: int
    padded_lists: int
    scoring_seconds: float

    @property
    def users_skipped(self) -> int:
        return self.skipped_no_probe + self.skipped_no_profile


def evaluate_system(train: BipartiteGraph, probe: Mapping[int, frozenset[int]],
                    spec: AlgorithmSpec, L: int, *,
                    table: NeighborTable | None = None,
                    core: CoreSet | None = None,
                    base_seed: int = 0,
                    count_skipped_as_zero: bool = False,
                    all_users_pool: bool = False) -> EvalResult:
    """Average per-user recall over every user with probe and training links.

    Users with an empty probe set or an empty training profile are skipped
    and counted; with count_skipped_as_zero=True they instead enter the
    average as zeros (the divide-by-everyone convention). Scoring time
    covers scoring plus list construction, never table building.
    """
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    scorer = make_scorer(train, spec, table=table,
                         core_mask=core.mask if core is not None else None,
                         base_seed=base_seed, all_users_pool=all_users_pool)
    degrees = train.user_degrees
    total = 0.0
    evaluated = 0
    no_probe = 0
    no_profile = 0
    padded = 0
    seconds = 0.0
    for user in range(train.n):
        items = probe.get(user)
        if not items:
            no_probe += 1
            continue
        if degrees[user] == 0:
            no_profile += 1
            continue
        profile = train.objects_of(user)
        t0 = perf_counter()
        vector = scorer(user)
        rec = top_l(vector, profile, L)
        seconds += perf_counter() - t0
        if rec.n_padded:
            padded += 1
        total += recall_user(rec, items)
        evaluated += 1
    if evaluated == 0:
        raise NoEvaluableUsersError(
            "no user has both probe links and a training profile")
    denom = train.n if count_skipped_as_zero else evaluated
    return EvalResult(recall=total / denom, users_evaluated=evaluated,
                      skipped_no_probe=no_probe, skipped_no_profile=no_profile,
                      padded_lists=padded, scoring_seconds=seconds)


def parse_grid(text: str, cast=float) -> tuple:
    """`start:stop:step` (inclusive) or a `;`/`,` separated list."""
    text = text.strip()
    if ":" in text:
        start, stop, step = (float(x) for x in text.split(":"))
        if step <= 0:
            raise ValueError(f"grid step must be positive in {text!r}")
        steps = int(round((stop - start) / step))
        vals = [round(start + i * step, 12) for i in range(steps + 1)]
        vals = [v for v in vals if v <= stop + 1e-9]
        return tuple(cast(v) for v in vals)
    items = [x.strip() for x in text.replace(",", ";").split(";")]
    return tuple(cast(float(x)) for x in items if x)


def _parse_bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


_CONFIG_KEYS = frozenset({
    "dataset", "output", "ratio", "seeds", "algorithms", "L", "N",
    "core_methods", "r_grid", "k_grid", "lambda_grid",
    "count_skipped_as_zero", "timing", "workers", "all_users_pool",
})

DEFAULT_R_GRID = tuple(round(0.1 * i, 12) for i in range(1, 11))


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one evaluate/sweep run needs, validated up front."""

    dataset: Path
    output: Path = Path("report.csv")
    ratio: float = 0.8
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    algorithms: tuple[AlgorithmSpec, ...] = (AlgorithmSpec(name="md"),)
    L: int = 20
    N: int = 20
    core_methods: tuple[str, ...] = ()
    r_grid: tuple[float, ...] = ()
    count_skipped_as_zero: bool = False
    timing: bool = True
    workers: int = 0
    all_users_pool: bool = False

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, str],
                     overrides: Mapping[str, str] | None = None) -> "ExperimentConfig":
        merged = dict(mapping)
        if overrides:
            merged.update({k: v for k, v in overrides.items() if v is not None})
        unknown = set(merged) - _CONFIG_KEYS
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        if "dataset" not in merged:
            raise ValueError("config needs a `dataset` key")
        algorithms = tuple(
            AlgorithmSpec.parse(item)
            for item in merged.get("algorithms", "md").split(";") if item.strip())
        if "k_grid" in merged:
            ks = parse_grid(merged["k_grid"], cast=lambda v: int(round(v)))
            expanded = []
            for spec in algorithms:
                if spec.name in ("knnmd", "ucf"):
                    expanded.extend(replace(spec, K=k) for k in ks)
                else:
                    expanded.append(spec)
            algorithms = tuple(expanded)
        if "lambda_grid" in merged:
            lams = parse_grid(merged["lambda_grid"], cast=float)
            expanded = []
            for spec in algorithms:
                if spec.name == "hybrid":
                    expanded.extend(replace(spec, lam=lam) for lam in lams)
                else:
                    expanded.append(spec)
            algorithms = tuple(expanded)
        methods = tuple(x.strip() for x in
                        merged.get("core_methods", "").replace(",", ";").split(";")
                        if x.strip())
        r_grid = (parse_grid(merged["r_grid"]) if "r_grid" in merged
                  else (DEFAULT_R_GRID if methods else ()))
        config = cls(
            dataset=Path(merged["dataset"]),
            output=Path(merged.get("output", "report.csv")),
            ratio=float(merged.get("ratio", 0.8)),
            seeds=tuple(int(x) for x in merged.get("seeds", "1,2,3,4,5")
                        .replace(";", ",").split(",") if x.strip()),
            algorithms=algorithms,
            L=int(merged.get("L", 20)),
            N=int(merged.get("N", 20)),
            core_methods=methods,
            r_grid=r_grid,
            count_skipped_as_zero=_parse_bool(merged.get("count_skipped_as_zero", "false")),
            timing=_parse_bool(merged.get("timing", "true")),
            workers=int(merged.get("workers", "0")),
            all_users_pool=_parse_bool(merged.get("all_users_pool", "false")),
        )
        config.validate()
        return config

    def validate(self) -> None:
        if not 0.0 < self.ratio < 1.0:
            raise ValueError(f"ratio must lie in (0, 1), got {self.ratio}")
        if not self.seeds:
            raise ValueError("at least one split seed is required")
        if not self.algorithms:
            raise ValueError("at least one algorithm is required")
        if self.L < 1 or self.N < 1:
            raise ValueError(f"L and N must be >= 1, got L={self.L}, N={self.N}")
        for spec in self.algorithms:
            spec.validate(table_n=self.N if spec.needs_table() else None)
        for method in self.core_methods:
            if method not in CORE_METHODS:
                raise ValueError(f"unknown core method {method!r}")
        if self.core_methods and not self.r_grid:
            raise ValueError("core_methods given but the r grid is empty")
        for r in self.r_grid:
            if not 0.0 < r <= 1.0:
                raise ValueError(f"core ratio must lie in (0, 1], got {r}")
        if self.workers < 0:
            raise ValueError(f"workers must be >= 0, got {self.workers}")

    def effective_workers(self) -> int:
        if self.workers > 0:
            return self.workers
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))


@dataclass
class ReportRow:
    """One CSV row; numeric fields stay unrounded until write time."""

    seed: str
    algorithm: str
    params: str
    core_method: str
    N: int
    r: float | None
    K: int | None
    lam: float | None
    L: int
    users_evaluated: float | None = None
    users_skipped: float | None = None
    recall: float | None = None
    retention: float | None = None
    scoring_ms: float | None = None
    failed: bool = False
    error: str | None = None


@dataclass(frozen=True)
class ExperimentReport:
    """All per-seed rows plus the aggregate rows, as written to the CSV."""

    rows: tuple[ReportRow, ...]
    aggregates: tuple[ReportRow, ...]
    output: Path

    def to_csv_text(self) -> str:
        buf = _io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in self.rows + self.aggregates:
            writer.writerow(_format_row(row))
        return buf.getvalue()


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.6g}"


def _format_row(row: ReportRow) -> list[str]:
    return [row.seed, row.algorithm, row.params, row.core_method,
            _fmt(row.N), _fmt(row.r), _fmt(row.K), _fmt(row.lam), _fmt(row.L),
            _fmt(row.users_evaluated), _fmt(row.users_skipped),
            _fmt(row.recall), _fmt(row.retention), _fmt(row.scoring_ms)]


def _cell_key(row: ReportRow) -> tuple:
    return (row.params, row.core_method, row.r, row.K, row.lam)


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Execute the full sweep described by the config and write its report.

    Per seed: split, build the neighbor table if anything needs it, extract
    every requested core, then evaluate the unrestricted baseline plus one
    cell per (algorithm, core method, r). Retention is each cell's recall
    over the same seed's unrestricted recall for the same algorithm. Every
    source of randomness is derived from the config, so reruns (at any
    worker count) produce identical reports; wall-clock timings are the one
    exception and can be zeroed with `timing = false`.
    """
    config.validate()
    g = build_graph(load_edge_list(config.dataset))
    needs_table = (any(spec.needs_table() for spec in config.algorithms)
                   or any(m in ("frequency", "rank") for m in config.core_methods))
    workers = config.effective_workers()
    rows: list[ReportRow] = []
    for seed in config.seeds:
        split = split_train_probe(g, config.ratio, seed)
        table = top_n_table(split.train, config.N) if needs_table else None
        cores: dict[tuple[str, float], CoreSet] = {}
        for method in config.core_methods:
            for r in config.r_grid:
                cores[(method, r)] = extract_core(split.train, table, method,
                                                  r, seed=seed)
        jobs: list[tuple[AlgorithmSpec, str | None, float | None]] = []
        for spec in config.algorithms:
            jobs.append((spec, None, None))
            for method in config.core_methods:
                for r in config.r_grid:
                    jobs.append((spec, method, r))

        def run_cell(job):
            spec, method, r = job
            core = cores[(method, r)] if method is not None else None
            try:
                result = evaluate_system(
                    split.train, split.probe, spec, config.L, table=table,
                    core=core, base_seed=seed,
                    count_skipped_as_zero=config.count_skipped_as_zero,
                    all_users_pool=config.all_users_pool)
                return result, None
            except RecsysError as exc:
                return None, str(exc)

        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                outcomes = list(pool.map(run_cell, jobs))
        else:
            outcomes = [run_cell(job) for job in jobs]

        for (spec, method, r), (result, error) in zip(jobs, outcomes):
            row = ReportRow(seed=str(seed), algorithm=spec.name,
                            params=spec.label(),
                            core_method=method or "", N=config.N, r=r,
                            K=spec.K, lam=spec.lam, L=config.L)
            if result is None:
                row.failed = True
                row.error = error
                log.warning("cell failed (seed=%s %s core=%s r=%s): %s",
                            seed, spec.label(), method, r, error)
            else:
                row.users_evaluated = result.users_evaluated
                row.users_skipped = result.users_skipped
                row.recall = result.recall
                row.scoring_ms = (result.scoring_seconds * 1e3
                                  if config.timing else 0.0)
            rows.append(row)

    baselines = {(row.seed, row.params): row.recall
                 for row in rows if row.core_method == "" and not row.failed}
    for row in rows:
        if row.failed:
            continue
        if row.core_method == "":
            row.retention = 1.0
        else:
            base = baselines.get((row.seed, row.params))
            row.retention = (row.recall / base) if base else None

    aggregates = _aggregate(rows)
    report = ExperimentReport(rows=tuple(rows), aggregates=tuple(aggregates),
                              output=config.output)
    atomic_write_text(config.output, report.to_csv_text())
    log.info("wrote %d + %d rows to %s", len(rows), len(aggregates), config.output)
    return report


def _aggregate(rows: list[ReportRow]) -> list[ReportRow]:
    groups: dict[tuple, list[ReportRow]] = {}
    for row in rows:
        groups.setdefault(_cell_key(row), []).append(row)
    out: list[ReportRow] = []
    for members in groups.values():
        ok = [m for m in members if not m.failed]
        sample = members[0]
        for stat in ("mean", "std"):
            agg = ReportRow(seed=stat, algorithm=sample.algorithm,
                            params=sample.params, core_method=sample.core_method,
                            N=sample.N, r=sample.r, K=sample.K,
                            lam=sample.lam, L=sample.L)
            if ok:
                fn = np.mean if stat == "mean" else np.std
                agg.users_evaluated = float(fn([m.users_evaluated for m in ok]))
                agg.users_skipped = float(fn([m.users_skipped for m in ok]))
                agg.recall = float(fn([m.recall for m in ok]))
                retentions = [m.retention for m in ok if m.retention is not None]
                agg.retention = float(fn(retentions)) if retentions else None
                agg.scoring_ms = float(fn([m.scoring_ms for m in ok]))
            out.append(agg)
    return out
