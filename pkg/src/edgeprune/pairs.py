"""Positive/negative training-pair export for Siamese-style consumers.

Positives are exactly the mutual edges of the reduced graph, one record
per unordered pair. Negatives are chosen per point: a point with
positive degree d contributes its d farthest in-row neighbors that are
not graph edges. The counts therefore adapt to local density instead of
being fixed at some k. Selection is deterministic; the seed only breaks
ties among equal distances and drives the fallback sampling used when a
point's neighbor row has no non-edges left.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass

import numpy as np

from .data import Seed, spawn_rng
from .errors import InputError
from .knn import NeighborTable
from .reduce import ReducedGraph

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairSet:
    positives: list[tuple[int, int]]  # unordered mutual edges, each once
    negatives: list[tuple[int, int]]  # (anchor, other); anchor's degree many
    seed: int

    @property
    def total(self) -> int:
        return len(self.positives) + len(self.negatives)


def export_pairs(g: ReducedGraph, nt: NeighborTable, seed: Seed) -> PairSet:
    """Build training pairs from a reduced graph and its neighbor table.

    Both inputs must come from the same point set. Points with zero
    positive degree contribute nothing (logged). When a point's row is
    exhausted (every neighbor is an edge), the remaining negatives are
    sampled uniformly from its non-neighbors; if even those run out the
    point simply gets fewer negatives.
    """
    if g.n != nt.n:
        raise InputError(f"graph has {g.n} vertices but table has {nt.n} rows")
    positives = sorted(g.pairs())
    degrees = g.degrees()
    adjacency: list[set[int]] = [set() for _ in range(g.n)]
    for p, q in zip(g.src.tolist(), g.dst.tolist()):
        adjacency[p].add(q)

    tie_rank = spawn_rng(seed, 0).permutation(g.n)
    negatives: list[tuple[int, int]] = []
    for p in range(g.n):
        need = int(degrees[p])
        if need == 0:
            log.debug("point %d has no mutual edges; contributes no pairs", p)
            continue
        row = nt.indices[p]
        non_edges = [int(q) for q in row.tolist() if q not in adjacency[p]]
        # Farthest first; the row is ascending by distance, equal distances
        # fall back to the seeded rank.
        dist_of = {int(q): float(d) for q, d in zip(row.tolist(), nt.distances[p])}
        non_edges.sort(key=lambda q: (-dist_of[q], tie_rank[q]))
        chosen = non_edges[:need]
        if len(chosen) < need:
            pool = np.array([q for q in range(g.n)
                             if q != p and q not in adjacency[p] and q not in set(chosen)],
                            dtype=np.int64)
            extra = min(need - len(chosen), pool.size)
            if extra > 0:
                rng = spawn_rng(seed, 1, p)
                chosen.extend(int(q) for q in rng.choice(pool, size=extra, replace=False))
            if len(chosen) < need:
                log.warning("point %d: only %d of %d negatives available",
                            p, len(chosen), need)
        negatives.extend((p, q) for q in chosen)
    return PairSet(positives=positives, negatives=negatives, seed=int(seed))


def save_pairs(ps: PairSet, path) -> None:
    """Write pairs as JSON lines: {"p": ..., "q": ..., "label": 1|0}."""
    with open(path, "w", encoding="utf-8") as fh:
        for p, q in ps.positives:
            fh.write(json.dumps({"p": p, "q": q, "label": 1}) + "\n")
        for p, q in ps.negatives:
            fh.write(json.dumps({"p": p, "q": q, "label": 0}) + "\n")
