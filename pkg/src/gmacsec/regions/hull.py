"""Rate points, region traces, and hull operations.

Regions are stored as finite generator sets.  A region is the convex hull of
its generators, closed downward toward the origin (lowering any rate keeps a
point achievable) and intersected with the constraints R1e <= R1 and R2e <= R2.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

COORDS = ("R0", "R1", "R2", "R1e", "R2e")
POINT_TOL = 1e-12
PROVENANCES = ("inner", "outer", "secrecy", "mac")


class RatePointError(ValueError):
    pass


@dataclass(frozen=True)
class RatePoint:
    R0: float = 0.0
    R1: float = 0.0
    R2: float = 0.0
    R1e: float = 0.0
    R2e: float = 0.0

    def __post_init__(self):
        vals = self.as_array()
        if np.any(~np.isfinite(vals)) or np.any(vals < -POINT_TOL):
            raise RatePointError(f"negative or non-finite rate in {tuple(vals)}")
        if self.R1e > self.R1 + POINT_TOL or self.R2e > self.R2 + POINT_TOL:
            raise RatePointError("equivocation exceeds its message rate")

    def as_array(self) -> np.ndarray:
        return np.array([self.R0, self.R1, self.R2, self.R1e, self.R2e], dtype=float)

    @classmethod
    def from_array(cls, a: Sequence[float]) -> "RatePoint":
        return cls(*(float(x) for x in a))


@dataclass(frozen=True)
class RegionTrace:
    """Generator points of a region, the grid ids that produced them, and the
    distributions behind those ids so every point can be re-checked."""

    points: np.ndarray
    ids: tuple[str, ...]
    provenance: str
    grid: str
    distributions: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        pts = np.array(self.points, dtype=float).reshape(-1, len(COORDS))
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if len(self.ids) != len(pts):
            raise ValueError("one id per point required")
        pts = np.maximum(pts, 0.0)
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "ids", tuple(self.ids))

    def __len__(self) -> int:
        return len(self.points)

    def rate_points(self) -> list[RatePoint]:
        return [RatePoint.from_array(p) for p in self.points]

    def records(self) -> list[dict]:
        return [dict(zip(COORDS, map(float, p)), provenance=self.provenance, grid_point=i)
                for p, i in zip(self.points, self.ids)]


def _as_matrix(points) -> np.ndarray:
    if isinstance(points, np.ndarray):
        return np.asarray(points, dtype=float).reshape(-1, len(COORDS))
    rows = [p.as_array() if isinstance(p, RatePoint) else np.asarray(p, dtype=float) for p in points]
    return np.array(rows, dtype=float).reshape(-1, len(COORDS))


def _hull_vertices(x: np.ndarray) -> np.ndarray:
    """Indices of the extreme points of conv(x), handling flat point sets."""
    n = len(x)
    if n <= 2:
        return np.arange(n)
    center = x.mean(axis=0)
    _, s, vt = np.linalg.svd(x - center, full_matrices=False)
    scale = max(1.0, float(np.abs(x).max()))
    rank = int(np.sum(s > 1e-10 * scale * np.sqrt(n)))
    if rank == 0:
        return np.array([0])
    y = (x - center) @ vt[:rank].T
    if rank == 1:
        return np.unique([int(np.argmin(y[:, 0])), int(np.argmax(y[:, 0]))])
    if n <= rank + 1:
        return np.arange(n)
    try:
        return np.sort(ConvexHull(y).vertices)
    except QhullError:
        return np.sort(ConvexHull(y, qhull_options="QJ").vertices)


def _dominated_by_mix(x: np.ndarray, i: int, others: np.ndarray, tol: float) -> bool:
    """Is x[i] <= some convex combination of x[others], coordinatewise?"""
    if len(others) == 0:
        return False
    a = x[others]
    res = linprog(np.zeros(len(others)), A_ub=-a.T, b_ub=-(x[i] - tol),
                  A_eq=np.ones((1, len(others))), b_eq=[1.0], bounds=[(0, None)] * len(others),
                  method="highs")
    return res.status == 0


def generator_indices(points, tol: float = 1e-12) -> np.ndarray:
    """Indices of a minimal generator set for the downward-closed convex hull.

    A point is kept iff it is a vertex of the hull and no convex combination of
    the other points dominates it coordinatewise.  Among duplicates the first
    occurrence is kept.
    """
    x = _as_matrix(points)
    if len(x) == 0:
        return np.array([], dtype=np.intp)
    _, first = np.unique(np.round(x, 13), axis=0, return_index=True)
    first = np.sort(first)
    cand = first[_hull_vertices(x[first])]
    # cheap pass: drop points dominated by a single other candidate
    xc = x[cand]
    ge = np.all(xc[:, None, :] >= xc[None, :, :] - tol, axis=2)
    gt = np.any(xc[:, None, :] > xc[None, :, :] + tol, axis=2)
    single = np.any(ge & gt, axis=0)
    cand = cand[~single]
    keep = []
    for pos, i in enumerate(cand):
        rest = np.concatenate([cand[:pos], cand[pos + 1:]])
        if not _dominated_by_mix(x, i, rest, tol):
            keep.append(i)
    return np.array(sorted(keep), dtype=np.intp)


def convexify(points: Iterable[RatePoint] | np.ndarray) -> list[RatePoint]:
    """Generators of the convex hull of the cloud together with its down-set."""
    x = _as_matrix(points)
    if len(x) == 0:
        raise ValueError("convexify needs at least one point")
    return [RatePoint.from_array(x[i]) for i in generator_indices(x)]


def prune_trace(trace: RegionTrace) -> RegionTrace:
    keep = generator_indices(trace.points)
    ids = tuple(trace.ids[i] for i in keep)
    dists = {k: v for k, v in trace.distributions.items() if k in set(ids)}
    return RegionTrace(trace.points[keep], ids, trace.provenance, trace.grid, dists)


def _shortfall(gens: np.ndarray, target: np.ndarray) -> float:
    """min over convex weights of max_c (target_c - mix_c)_+ ."""
    m = len(gens)
    c = np.zeros(m + 1)
    c[-1] = 1.0
    a_ub = np.hstack([-gens.T, -np.ones((gens.shape[1], 1))])
    a_eq = np.concatenate([np.ones(m), [0.0]])[None]
    res = linprog(c, A_ub=a_ub, b_ub=-target, A_eq=a_eq, b_eq=[1.0],
                  bounds=[(0, None)] * (m + 1), method="highs")
    if res.status != 0:
        raise RuntimeError(f"membership LP failed: {res.message}")
    return float(res.x[-1])


def contains(trace: RegionTrace, p: RatePoint, tol: float = 1e-9) -> bool:
    """Whether ``p`` lies within ``tol`` of the trace's downward-closed hull."""
    if len(trace) == 0:
        raise ValueError("empty trace")
    return _shortfall(trace.points, p.as_array()) <= tol


def slice_max(trace: RegionTrace, coord: str, fixed: Mapping[str, float]) -> float | None:
    """Largest value of ``coord`` over the region with the ``fixed`` coordinates
    held at the given values; None when the slice is empty."""
    pts = trace.points
    j = COORDS.index(coord)
    rows = [COORDS.index(k) for k in fixed]
    vals = np.array([fixed[k] for k in fixed], dtype=float)
    m = len(pts)
    res = linprog(-pts[:, j], A_ub=-pts[:, rows].T if rows else None,
                  b_ub=-vals if rows else None, A_eq=np.ones((1, m)), b_eq=[1.0],
                  bounds=[(0, None)] * m, method="highs")
    if res.status == 2:
        return None
    if res.status != 0:
        raise RuntimeError(f"slice LP failed: {res.message}")
    return float(-res.fun) + 0.0


def merge_traces(traces: Sequence[RegionTrace], provenance: str | None = None) -> RegionTrace:
    pts = np.concatenate([t.points for t in traces])
    ids = sum((t.ids for t in traces), ())
    dists: dict = {}
    for t in traces:
        dists.update(t.distributions)
    grid = "; ".join(dict.fromkeys(t.grid for t in traces))
    return prune_trace(RegionTrace(pts, ids, provenance or traces[0].provenance, grid, dists))
