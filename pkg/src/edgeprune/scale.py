"""Per-point local scale estimation from neighbor-distance histograms.

Each point gets a bandwidth sigma_p describing the density around it:
the mean distance to its first K neighbors, where K is chosen by looking
for the first density break in a histogram of the point's neighbor
distances. All per-point histograms share one global bin width obtained
from the Freedman-Diaconis rule over every distance in the neighbor
table, and are anchored at distance zero so bins are comparable across
points.

The density break is detected by smoothing the histogram with a moving
weighted average that divides the usual 3-bin window sum by the window's
bin ranks, which discounts far bins. The first bin whose raw count
strictly exceeds its own smoothed value is read as a spike of neighbors
with different surrounding density; only neighbors in earlier bins enter
sigma_p. When no spike exists, or when it sits in the very first bin (so
no earlier neighbors exist), the whole row is used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .knn import NeighborTable


@dataclass(frozen=True)
class Histogram:
    """Fixed-width histogram anchored at 0, with 1-based bin ranks."""

    bin_width: float
    edges: np.ndarray   # nbins + 1 ascending boundaries, edges[0] == 0
    counts: np.ndarray  # per-bin value counts
    ranks: np.ndarray   # 1..nbins; rank 1 holds the closest values


@dataclass(frozen=True)
class LocalScales:
    """sigma[p] > 0 is the mean distance to the first kth[p] neighbors of p."""

    sigma: np.ndarray
    kth: np.ndarray

    def __post_init__(self):
        self.sigma.setflags(write=False)
        self.kth.setflags(write=False)


def fd_bin_width(values) -> float:
    """Freedman-Diaconis bin width: 2 * IQR * n^(-1/3).

    Quantiles use linear interpolation. Degenerate inputs fall back to
    (max - min) / ceil(sqrt(n)) when the IQR is zero, and to a unit width
    of 1 when all values are equal.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise InputError("fd_bin_width: empty input")
    if not np.all(np.isfinite(v)):
        raise InputError("fd_bin_width: values must be finite")
    vmin, vmax = float(v.min()), float(v.max())
    if vmax == vmin:
        return 1.0
    q25, q75 = np.quantile(v, [0.25, 0.75])
    iqr = float(q75 - q25)
    if iqr == 0.0:
        return (vmax - vmin) / math.ceil(math.sqrt(v.size))
    return 2.0 * iqr * v.size ** (-1.0 / 3.0)


def build_histogram(values, bin_width: float) -> Histogram:
    """Bin non-negative values into [0, w), [w, 2w), ... with the last bin
    closed on the right."""
    if bin_width <= 0 or not math.isfinite(bin_width):
        raise InputError(f"bin width must be positive, got {bin_width}")
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise InputError("histogram needs at least one value")
    if np.any(v < 0):
        raise InputError("histogram values must be non-negative")
    nbins = max(1, math.ceil(float(v.max()) / bin_width))
    idx = np.minimum((v // bin_width).astype(np.int64), nbins - 1)
    counts = np.bincount(idx, minlength=nbins)
    edges = np.arange(nbins + 1, dtype=np.float64) * bin_width
    ranks = np.arange(1, nbins + 1, dtype=np.int64)
    return Histogram(bin_width=float(bin_width), edges=edges, counts=counts, ranks=ranks)


def mwa_smooth(h: Histogram) -> np.ndarray:
    """Rank-weighted moving average of bin counts.

    MWA_i = (v_{i-1} + v_i + v_{i+1}) / (r_{i-1} + r_i + r_{i+1}); at the
    boundaries the missing neighbor terms drop out of both sums.
    """
    v = np.asarray(h.counts, dtype=np.float64)
    r = np.asarray(h.ranks, dtype=np.float64)
    num = v.copy()
    den = r.copy()
    num[1:] += v[:-1]
    den[1:] += r[:-1]
    num[:-1] += v[1:]
    den[:-1] += r[1:]
    return num / den


def local_scale_row(row_distances, bin_width: float) -> tuple[float, int]:
    """Scale and neighbor cutoff for one point's ascending distance row.

    Returns (sigma_p, K). K counts the neighbors that fall before the
    first histogram bin whose raw count strictly exceeds its smoothed
    value; if there is no such bin, if it is the first bin, or if no
    neighbor precedes it, K falls back to the full row. A zero mean
    (duplicate points) falls back to the smallest positive distance in
    the row, or to the bin width when every distance is zero.
    """
    row = np.asarray(row_distances, dtype=np.float64).ravel()
    if row.size == 0:
        raise InputError("local_scale_row: empty row")
    k_max = row.size
    hist = build_histogram(row, bin_width)
    mwa = mwa_smooth(hist)
    spikes = np.nonzero(hist.counts > mwa)[0]
    if spikes.size == 0 or spikes[0] == 0:
        k = k_max
    else:
        k = int(hist.counts[: spikes[0]].sum())
        if k == 0:
            k = k_max
    sigma = float(row[:k].mean())
    if sigma == 0.0:
        positive = row[row > 0]
        sigma = float(positive.min()) if positive.size else float(bin_width)
    return sigma, k


def compute_scales(nt: NeighborTable) -> LocalScales:
    """Local scales for every point of a neighbor table.

    The Freedman-Diaconis width is computed once over all N * k_max
    distances and shared by the per-point histograms.
    """
    width = fd_bin_width(nt.distances)
    n = nt.n
    sigma = np.empty(n, dtype=np.float64)
    kth = np.empty(n, dtype=np.int64)
    for p in range(n):
        sigma[p], kth[p] = local_scale_row(nt.distances[p], width)
    return LocalScales(sigma=sigma, kth=kth)
