"""Locally scaled affinities and the adaptive edge-reduction pipeline.

The pipeline turns a point set into a sparse mutual graph in four steps:
exact k-NN table, per-point local scales, pairwise affinities
exp(-d^2 / (sigma_p * sigma_q)) over each point's neighbor row, and a
per-row statistical threshold followed by mutual agreement. A row keeps
its strongest entries: if the row maximum exceeds mean + std the cutoff
is mean + std, otherwise mean - std (population std in both cases);
entries at or above the cutoff survive, so the maximum always does. An
edge enters the final graph only when it survived the rows of both of
its endpoints.

The surviving edge set is invariant under uniform coordinate scaling:
distances and scales stretch together, so the affinities - and hence the
row statistics and thresholds - do not move.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import PointSet
from .errors import InputError
from .knn import NeighborTable, build_knn
from .scale import LocalScales, compute_scales

DEFAULT_K_MAX = 50

BRANCH_HIGH = "high"
BRANCH_LOW = "low"


@dataclass(frozen=True)
class RowThreshold:
    """Cutoff chosen for one affinity row: mu + sd or mu - sd."""

    mu: float
    sd: float
    t: float
    branch: str


@dataclass(frozen=True)
class ReducedGraph:
    """Sparse mutual affinity graph on n vertices.

    Edges are stored as ordered pairs (both directions of every mutual
    edge), lexicographically sorted. The directed survivor set from
    before mutual agreement is kept for diagnostics.
    """

    n: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    directed_src: np.ndarray
    directed_dst: np.ndarray
    directed_weight: np.ndarray

    def __post_init__(self):
        for arr in (self.src, self.dst, self.weight,
                    self.directed_src, self.directed_dst, self.directed_weight):
            arr.setflags(write=False)

    @property
    def edge_count(self) -> int:
        """Number of ordered surviving pairs (mutual edges count twice)."""
        return int(self.src.shape[0])

    def edge_set(self) -> set[tuple[int, int]]:
        return set(zip(self.src.tolist(), self.dst.tolist()))

    def pairs(self) -> list[tuple[int, int]]:
        """Unordered mutual edges, each once, as sorted (p, q) with p < q."""
        mask = self.src < self.dst
        return list(zip(self.src[mask].tolist(), self.dst[mask].tolist()))

    def degrees(self) -> np.ndarray:
        return np.bincount(self.src, minlength=self.n)

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=np.float64)
        a[self.src, self.dst] = self.weight
        return a

    def to_sparse(self):
        from scipy.sparse import csr_matrix

        return csr_matrix((self.weight, (self.src, self.dst)), shape=(self.n, self.n))


def affinity(d: float, sigma_p: float, sigma_q: float) -> float:
    """Similarity of two points: exp(-d^2 / (sigma_p * sigma_q)), in (0, 1]."""
    if not (np.isfinite(d) and np.isfinite(sigma_p) and np.isfinite(sigma_q)):
        raise InputError("affinity: inputs must be finite")
    if sigma_p <= 0 or sigma_q <= 0:
        raise InputError(f"affinity: scales must be positive, got {sigma_p}, {sigma_q}")
    return float(np.exp(-(d * d) / (sigma_p * sigma_q)))


def affinity_rows(nt: NeighborTable, ls: LocalScales) -> np.ndarray:
    """Affinity of every (point, neighbor) cell of the table, shape (N, k_max)."""
    if ls.sigma.shape[0] != nt.n:
        raise InputError("affinity_rows: scales and table disagree on N")
    if np.any(ls.sigma <= 0):
        raise InputError("affinity_rows: scales must be positive")
    sigma_p = ls.sigma[:, None]
    sigma_q = ls.sigma[nt.indices]
    return np.exp(-(nt.distances * nt.distances) / (sigma_p * sigma_q))


def threshold_row(row) -> tuple[np.ndarray, RowThreshold]:
    """Indices of surviving entries of one affinity row, plus the cutoff used.

    Branch selection is strict (max > mu + sd chooses the high branch);
    retention keeps entries >= cutoff, so the kept set is never empty.
    """
    row = np.asarray(row, dtype=np.float64).ravel()
    if row.size == 0:
        raise InputError("threshold_row: empty row")
    mu = float(row.mean())
    sd = float(row.std())
    if float(row.max()) > mu + sd:
        t, branch = mu + sd, BRANCH_HIGH
    else:
        t, branch = mu - sd, BRANCH_LOW
    kept = np.nonzero(row >= t)[0]
    return kept, RowThreshold(mu=mu, sd=sd, t=t, branch=branch)


def _lexsorted(src, dst, weight):
    order = np.lexsort((dst, src))
    return src[order], dst[order], weight[order]


def mutualize(n: int, src, dst, weight) -> ReducedGraph:
    """Keep a directed survivor (p, q) only when (q, p) also survived.

    The inputs are parallel arrays of directed survivor edges; the output
    stores both directions of every mutual edge, each with the weight the
    forward survivor carried.
    """
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    weight = np.asarray(weight, dtype=np.float64)
    if src.shape != dst.shape or src.shape != weight.shape:
        raise InputError("mutualize: survivor arrays must have equal length")
    if src.size and (min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n):
        raise InputError("mutualize: vertex id out of range")
    keep = src != dst  # drop self-loops defensively
    src, dst, weight = src[keep], dst[keep], weight[keep]
    key = src * n + dst
    mutual = np.isin(key, dst * n + src)
    m_src, m_dst, m_w = _lexsorted(src[mutual], dst[mutual], weight[mutual])
    d_src, d_dst, d_w = _lexsorted(src, dst, weight)
    return ReducedGraph(n=n, src=m_src, dst=m_dst, weight=m_w,
                        directed_src=d_src, directed_dst=d_dst, directed_weight=d_w)


def threshold_survivors(affinities: np.ndarray, nt: NeighborTable):
    """Directed survivor arrays (src, dst, weight) from per-row thresholding."""
    src_parts, dst_parts, w_parts = [], [], []
    for p in range(nt.n):
        kept, _ = threshold_row(affinities[p])
        src_parts.append(np.full(kept.size, p, dtype=np.int64))
        dst_parts.append(nt.indices[p, kept])
        w_parts.append(affinities[p, kept])
    return (np.concatenate(src_parts), np.concatenate(dst_parts),
            np.concatenate(w_parts))


def reduce_graph(ps: PointSet, k_max: int | None = None) -> ReducedGraph:
    """Full reduction pipeline: k-NN -> scales -> affinities -> threshold -> mutual.

    k_max defaults to min(N - 1, 50); the reduction, not k_max, decides
    which edges survive, so the default only needs to be generous.
    """
    if k_max is None:
        k_max = min(ps.n - 1, DEFAULT_K_MAX)
    nt = build_knn(ps, k_max)
    ls = compute_scales(nt)
    a = affinity_rows(nt, ls)
    src, dst, w = threshold_survivors(a, nt)
    return mutualize(ps.n, src, dst, w)


def component_labels(g: ReducedGraph) -> np.ndarray:
    """Connected-component label per vertex, by union-find."""
    parent = np.arange(g.n, dtype=np.int64)

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for p, q in zip(g.src.tolist(), g.dst.tolist()):
        rp, rq = find(p), find(q)
        if rp != rq:
            parent[rq] = rp
    roots = np.array([find(i) for i in range(g.n)], dtype=np.int64)
    _, labels = np.unique(roots, return_inverse=True)
    return labels


def n_components(g: ReducedGraph) -> int:
    return int(component_labels(g).max()) + 1 if g.n else 0


def save_graph(g: ReducedGraph, path, k_max: int | None = None,
               seed: int | None = None) -> None:
    """Write a graph as a JSON header line followed by 'p q w' edge lines.

    Weights carry 17 significant digits, so a load reproduces them
    bit-exactly. Directed survivors are diagnostics and are not stored.
    """
    header = {"n": g.n, "edges": g.edge_count, "k_max": k_max, "seed": seed}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for p, q, w in zip(g.src.tolist(), g.dst.tolist(), g.weight.tolist()):
            fh.write(f"{p} {q} {w:.17g}\n")


def load_graph(path) -> tuple[ReducedGraph, dict]:
    """Read a graph written by save_graph; returns (graph, header).

    The loaded graph's directed survivor set is set equal to its edge
    set, which preserves every stored invariant.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            header = json.loads(fh.readline())
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}: missing JSON header line") from exc
        src, dst, weight = [], [], []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 3:
                raise InputError(f"{path}: line {lineno}: expected 'p q w'")
            src.append(int(parts[0]))
            dst.append(int(parts[1]))
            weight.append(float(parts[2]))
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    weight = np.asarray(weight, dtype=np.float64)
    if header.get("edges") != len(src):
        raise InputError(f"{path}: header edge count {header.get('edges')} "
                         f"does not match {len(src)} edge lines")
    g = ReducedGraph(n=int(header["n"]), src=src, dst=dst, weight=weight,
                     directed_src=src, directed_dst=dst, directed_weight=weight)
    return g, header
