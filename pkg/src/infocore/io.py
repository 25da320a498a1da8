"""Edge-list files, token/id sidecars, flat config files, atomic writes."""

from __future__ import annotations

import logging
import os
from pathlib import Path

from .errors import EmptyDatasetError
from .graph import BipartiteGraph, InteractionList

log = logging.getLogger(__name__)


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file and rename so readers never see partial output."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def load_edge_list(path) -> InteractionList:
    """Parse `user<TAB>object` lines; `#` comments and blank lines are skipped.

    Malformed lines are dropped and recorded as (line number, reason) on the
    returned list's skipped_lines, and also logged.
    """
    path = Path(path)
    pairs: list[tuple[str, str]] = []
    skipped: list[tuple[int, str]] = []
    with path.open("r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\r\n")
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                skipped.append((lineno, "expected two tab-separated tokens"))
                continue
            user, obj = parts
            if not user or not obj:
                skipped.append((lineno, "empty token"))
                continue
            pairs.append((user, obj))
    if skipped:
        log.warning("%s: skipped %d malformed line(s): %s", path, len(skipped),
                    ", ".join(str(no) for no, _ in skipped[:10]))
    if not pairs:
        raise EmptyDatasetError(f"{path}: no valid interaction lines")
    return InteractionList(pairs=tuple(pairs), provenance=str(path),
                           skipped_lines=tuple(skipped))


def save_edge_list(interactions: InteractionList, path) -> None:
    atomic_write_text(path, "\n".join(f"{u}\t{o}" for u, o in interactions.pairs) + "\n")


def save_id_maps(g: BipartiteGraph, user_path, object_path) -> None:
    """Persist the token<TAB>dense-id sidecars for both sides."""
    atomic_write_text(user_path,
                      "\n".join(f"{t}\t{i}" for i, t in enumerate(g.user_tokens)) + "\n")
    atomic_write_text(object_path,
                      "\n".join(f"{t}\t{i}" for i, t in enumerate(g.object_tokens)) + "\n")


def graph_links_as_interactions(g: BipartiteGraph, provenance: str = "") -> InteractionList:
    """Token pairs for every link, grouped by user id (for re-export)."""
    uids, oids = g.links()
    pairs = tuple((g.user_tokens[u], g.object_tokens[o])
                  for u, o in zip(uids.tolist(), oids.tolist()))
    return InteractionList(pairs=pairs, provenance=provenance)


def read_config(path) -> dict[str, str]:
    """Flat `key = value` lines; `#` starts a comment; later keys win."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected `key = value`, got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out
