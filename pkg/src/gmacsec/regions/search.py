"""Region computations over grids of auxiliary distributions."""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..channel_model import GmacChannel, find_stochastic_degradation
from .bounds import (FEAS_TOL, equivocation_set_explicit, geometry_case, in_mac, inner_generators,
                     OUTER_A, inner_polygon, inner_slice, mac_vertices, outer_polygon, outer_rhs,
                     polytope_vertices_batch,
                     outer_slice, secrecy_generators, secrecy_two_caps, secrecy_two_generators)
from .bundles import (OneMessageBundle, TwoMessageBundle, mi_bundle_one_message,
                      mi_bundle_two_message, one_message_terms, two_message_terms)
from .distributions import (LatticeGrid, OneMessageDist, TwoMessageDist, degraded_grid,
                            dist_from_kernels, one_message_grid, refine, stack_kernels,
                            two_message_grid)
from .hull import RatePoint, RegionTrace, prune_trace

CHUNK = 20000


class DegradednessWarning(UserWarning):
    pass


@dataclass
class _Evaluated:
    """Information terms for every point of a grid, plus a way back to the kernels."""

    family: str
    grid: LatticeGrid | None
    dists: list | None
    bundle: OneMessageBundle | TwoMessageBundle
    description: str

    def kernels(self, i: int):
        if self.grid is not None:
            return self.grid.kernels(np.array([i]))
        return self.dists[i].kernels()

    def dist(self, i: int):
        return self.grid[i] if self.grid is not None else self.dists[i]

    def step(self) -> float:
        if self.grid is None:
            return 1.0 / 16
        k = int(self.description.rsplit("1/", 1)[1])
        return 1.0 / k


def _concat(bundles, cls):
    names = [f for f in cls.__dataclass_fields__]
    out = {}
    for n in names:
        vals = [getattr(b, n) for b in bundles]
        out[n] = None if vals[0] is None else np.concatenate([np.atleast_1d(v) for v in vals])
    return cls(**out)


def _evaluate(ch: GmacChannel, grid, family: str) -> _Evaluated:
    terms = two_message_terms if family == "two" else one_message_terms
    cls = TwoMessageBundle if family == "two" else OneMessageBundle
    if isinstance(grid, LatticeGrid):
        if (grid.family == "two") != (family == "two"):
            raise ValueError(f"grid family {grid.family!r} does not fit this region")
        parts = [terms(ch, k) for _, k in grid.batches(CHUNK)]
        return _Evaluated(family, grid, None, _concat(parts, cls), grid.description)
    dists = list(grid)
    if not dists:
        raise ValueError("empty distribution list")
    parts = [terms(ch, stack_kernels(dists[i:i + CHUNK])) for i in range(0, len(dists), CHUNK)]
    return _Evaluated(family, None, dists, _concat(parts, cls), f"explicit list of {len(dists)} distributions")


def default_grid(ch: GmacChannel, family: str, step: int | None = None, q: int = 2) -> LatticeGrid:
    s = ch.sizes
    if family == "one":
        return one_message_grid(s["x1"], s["x2"], q=q, step=step or 4)
    if family == "degraded":
        return degraded_grid(s["x1"], s["x2"], q=q, step=step or 16)
    if family == "two":
        return two_message_grid(s["x1"], s["x2"], q=q, step=step or 2)
    raise ValueError(family)


def _pts5(r0, r1, re, r2=None, r2e=None) -> np.ndarray:
    z = np.zeros_like(r0)
    return np.stack([r0, r1, z if r2 is None else r2, re, z if r2e is None else r2e], axis=-1)


def _gid(i: int) -> str:
    return f"g{i}"


def _pruned(points: np.ndarray, ids: list[str], provenance: str, ev: _Evaluated,
            extra: dict | None = None) -> RegionTrace:
    trace = prune_trace(RegionTrace(points, tuple(ids), provenance, ev.description, {}))
    dists = {}
    for i in trace.ids:
        if extra and i in extra:
            dists[i] = extra[i]
        elif i.startswith("g"):
            dists[i] = ev.dist(int(i[1:]))
    return RegionTrace(trace.points, trace.ids, provenance, trace.grid, dists)


# ---------------------------------------------------------------- one message

def inner_bound_one(ch: GmacChannel, d: OneMessageDist, R0_grid: Sequence[float]) -> list[RatePoint]:
    """Vertices of the (R1, Re) polygon of the inner bound at each R0."""
    mi = mi_bundle_one_message(ch, d)
    return [p for r0 in R0_grid for p in inner_polygon(mi, float(r0))]


def outer_bound_one(ch: GmacChannel, d: OneMessageDist, R0_grid: Sequence[float]) -> list[RatePoint]:
    """Vertices of the outer-bound polygon at each R0 for one distribution with a V kernel."""
    if d.p_v_q is None:
        raise ValueError("outer bound needs a p(v|q) kernel")
    mi = mi_bundle_one_message(ch, d)
    return [p for r0 in R0_grid for p in outer_polygon(mi, float(r0))]


def _secrecy_objective(ch, R0):
    def f(kern):
        b = one_message_terms(ch, kern)
        return np.stack([b.i_u_y - b.i_u_y2, b.i_sum - b.i_u_y2 - R0])
    return f


def _best_secrecy(ch, ev: _Evaluated, R0: float, do_refine: bool):
    b = ev.bundle
    vals = np.minimum(b.i_u_y - b.i_u_y2, b.i_sum - b.i_u_y2 - R0)
    i = int(np.argmax(vals))
    best = float(vals[i])
    kern = ev.kernels(i)
    if do_refine and ev.grid is not None:
        family = "degraded" if ev.family == "degraded" else "one"
        kern, best = refine(family, kern, _secrecy_objective(ch, R0), ev.step())
        return best, kern, True
    return best, kern, False


def secrecy_capacity_at_R0(ch: GmacChannel, R0: float, grid=None, refine: bool = True) -> float:
    """max over the grid of min{I(U;Y|X2,Q) - I(U;Y2|X2,Q), I(U,X2,Q;Y) - I(U;Y2|X2,Q) - R0}, at least 0."""
    if R0 < 0:
        raise ValueError("R0 must be nonnegative")
    ev = _evaluate(ch, grid if grid is not None else default_grid(ch, "one"), "one")
    best, _, _ = _best_secrecy(ch, ev, float(R0), refine)
    return max(best, 0.0)


def _secrecy_trace(ch, ev: _Evaluated, refine_r0, do_refine: bool, degraded: bool) -> RegionTrace:
    b = ev.bundle
    n = len(b.i_sum)
    if degraded:
        top, end = inner_generators(b.i_u_y, b.i_u_y2, b.i_sum)
        pts = np.concatenate([_pts5(top[:, 0], top[:, 1], top[:, 2]),
                              _pts5(end[:, 0], end[:, 1], end[:, 2])])
        ids = [_gid(i) for i in range(n)] * 2
        provenance = "inner"
    else:
        top, end, ok = secrecy_generators(b.i_u_y, b.i_u_y2, b.i_sum)
        top, end = top[ok], end[ok]
        idx = np.flatnonzero(ok)
        pts = np.concatenate([_pts5(top[:, 0], top[:, 1], top[:, 1]),
                              _pts5(end[:, 0], end[:, 1], end[:, 1])])
        ids = [_gid(i) for i in idx] * 2
        provenance = "secrecy"
    if len(pts) == 0:
        pts = np.zeros((1, 5))
        ids = ["origin"]
    extra = {}
    if do_refine and ev.grid is not None:
        if refine_r0 is None:
            hi = float(np.max(b.i_sum - b.i_u_y2)) if n else 0.0
            refine_r0 = np.linspace(0.0, max(hi, 0.0), 9)
        more, more_ids = [], []
        for r0 in refine_r0:
            val, kern, _ = _best_secrecy(ch, ev, float(r0), True)
            if val < 0:
                continue
            rb = one_message_terms(ch, kern)
            key = f"r{len(extra)}"
            extra[key] = dist_from_kernels("one", kern)
            if degraded:
                t, e = inner_generators(rb.i_u_y, rb.i_u_y2, rb.i_sum)
                more += [_pts5(t[:, 0], t[:, 1], t[:, 2]), _pts5(e[:, 0], e[:, 1], e[:, 2])]
            else:
                t, e, _ = secrecy_generators(rb.i_u_y, rb.i_u_y2, rb.i_sum)
                more += [_pts5(t[:, 0], t[:, 1], t[:, 1]), _pts5(e[:, 0], e[:, 1], e[:, 1])]
            more_ids += [key, key]
        if more:
            pts = np.concatenate([pts] + more)
            ids = list(ids) + more_ids
    return _pruned(pts, ids, provenance, ev, extra)


def secrecy_capacity_region_one(ch: GmacChannel, grid=None, refine: bool = True,
                                refine_r0: Sequence[float] | None = None) -> RegionTrace:
    """Union over the grid of the perfect-secrecy pentagons, convexified; points
    carry R1e = R1."""
    ev = _evaluate(ch, grid if grid is not None else default_grid(ch, "one"), "one")
    return _secrecy_trace(ch, ev, refine_r0, refine, degraded=False)


def degraded_region(ch: GmacChannel, grid=None, refine: bool = True,
                    refine_r0: Sequence[float] | None = None) -> RegionTrace:
    """Union over p(q, x2) p(x1|q) of the rate-equivocation polytopes with U = X1."""
    rep = find_stochastic_degradation(ch)
    if not rep.stochastically_degraded:
        warnings.warn("channel is not degraded; the region is only an inner bound",
                      DegradednessWarning, stacklevel=2)
    grid = grid if grid is not None else default_grid(ch, "degraded")
    ev = _evaluate(ch, grid, "one")
    if isinstance(grid, LatticeGrid):
        ev.family = grid.family
    return _secrecy_trace(ch, ev, refine_r0, refine, degraded=True)


def inner_region_one(ch: GmacChannel, grid=None) -> RegionTrace:
    """Convexified union of the one-message inner bound over a grid."""
    ev = _evaluate(ch, grid if grid is not None else default_grid(ch, "one"), "one")
    b = ev.bundle
    top, end = inner_generators(b.i_u_y, b.i_u_y2, b.i_sum)
    pts = np.concatenate([_pts5(top[:, 0], top[:, 1], top[:, 2]), _pts5(end[:, 0], end[:, 1], end[:, 2])])
    ids = [_gid(i) for i in range(len(b.i_sum))] * 2
    return _pruned(pts, ids, "inner", ev)


def outer_evaluations(ch: GmacChannel, grid=None) -> RegionTrace:
    """Per-distribution outer-bound polytopes with V = Q.  Their union over a
    finite grid is NOT an outer bound; this is an evaluator only."""
    ev = _evaluate(ch, grid if grid is not None else default_grid(ch, "one"), "one")
    b = ev.bundle
    # with V = Q the bound on R1 is I(U;Y|X2,Q) itself
    x, ok = polytope_vertices_batch(OUTER_A, outer_rhs(b.i_u_y, b.i_sum, b.i_u_y - b.i_u_y2,
                                                       b.i_sum - b.i_u_y2))
    rows, cols = np.nonzero(ok)
    if len(rows) == 0:
        pts, ids = np.zeros((1, 5)), ["origin"]
    else:
        v = x[rows, cols]
        pts = _pts5(v[:, 0], v[:, 1], v[:, 2])
        ids = [_gid(i) for i in rows]
    trace = _pruned(pts, ids, "outer", ev)
    dists = {i: d.with_v_equal_q() for i, d in trace.distributions.items()}
    return RegionTrace(trace.points, trace.ids, "outer", trace.grid, dists)


# ---------------------------------------------------------------- two messages

def pareto_indices(values: np.ndarray, decimals: int = 12) -> np.ndarray:
    """Lowest index of each distinct row that no other row dominates (>= everywhere,
    > somewhere).  Rows are information terms oriented so that larger is better."""
    v = np.round(np.asarray(values, dtype=float), decimals)
    _, first = np.unique(v, axis=0, return_index=True)
    first = np.sort(first)
    u = v[first]
    keep = np.ones(len(u), bool)
    for start in range(0, len(u), 512):
        block = u[start:start + 512]
        ge = np.all(u[None, :, :] >= block[:, None, :], axis=2)
        gt = np.any(u[None, :, :] > block[:, None, :], axis=2)
        keep[start:start + len(block)] = ~np.any(ge & gt, axis=1)
    return first[keep]


def _two_message_front(b: TwoMessageBundle) -> np.ndarray:
    """Distributions whose region is not contained in another's: every bound grows
    with the four rate terms and shrinks with the two leaks."""
    return pareto_indices(np.column_stack([b.i_u, b.i_v, b.i_uv, b.i_all, -b.leak1, -b.leak2]))


def default_rate_grid(mi: TwoMessageBundle, m: int = 5) -> np.ndarray:
    """Rate triples in the MAC polytope: an m-point lattice per axis plus, at each
    R0 level, the vertices of the (R1, R2) section."""
    r0s = np.linspace(0.0, mi.i_all, m)
    r1s = np.linspace(0.0, mi.i_u, m)
    r2s = np.linspace(0.0, mi.i_v, m)
    g = np.array(np.meshgrid(r0s, r1s, r2s, indexing="ij")).reshape(3, -1).T
    keep = (g[:, 1] + g[:, 2] <= mi.i_uv + 1e-12) & (g.sum(axis=1) <= mi.i_all + 1e-12)
    extra = [np.column_stack([np.full(len(v), r0), v]) for r0 in r0s for v in [mac_vertices(mi, r0)] if len(v)]
    return np.concatenate([g[keep]] + extra) if extra else g[keep]


def two_message_points(mi: TwoMessageBundle, rate_grid=None) -> np.ndarray:
    triples = default_rate_grid(mi) if rate_grid is None else np.asarray(rate_grid, float).reshape(-1, 3)
    rows = []
    for r0, r1, r2 in triples:
        s = equivocation_set_explicit(float(r0), float(r1), float(r2), mi)
        for e1, e2 in s.corners():
            rows.append((r0, r1, r2, e1, e2))
    return np.array(rows, dtype=float).reshape(-1, 5)


def two_message_inner_bound(ch: GmacChannel, d: TwoMessageDist, rate_grid=None) -> RegionTrace:
    """Rate-equivocation tuples of one two-message distribution, convexified."""
    mi = mi_bundle_two_message(ch, d)
    pts = two_message_points(mi, rate_grid)
    if len(pts) == 0:
        pts = np.zeros((1, 5))
    trace = RegionTrace(pts, tuple(["d"] * len(pts)), "inner", "single distribution", {"d": d})
    return prune_trace(trace)


def inner_region_two(ch: GmacChannel, grid=None, rate_points: int = 4) -> RegionTrace:
    """Convexified union of the two-message inner bound over a grid."""
    ev = _evaluate(ch, grid if grid is not None else default_grid(ch, "two"), "two")
    pts, ids = [], []
    for i in _two_message_front(ev.bundle):
        mi = ev.bundle.item(i)
        p = two_message_points(mi, default_rate_grid(mi, rate_points))
        if len(p):
            keep = prune_trace(RegionTrace(p, tuple(["x"] * len(p)), "inner", "")).points
            pts.append(keep)
            ids += [_gid(i)] * len(keep)
    if not pts:
        pts, ids = [np.zeros((1, 5))], ["origin"]
    return _pruned(np.concatenate(pts), ids, "inner", ev)


def secrecy_rate_region_two(ch: GmacChannel, grid=None) -> RegionTrace:
    """Union over the grid of the three perfect-secrecy sub-regions, convexified."""
    ev = _evaluate(ch, grid if grid is not None else default_grid(ch, "two"), "two")
    pts, ids = [], []
    for i in _two_message_front(ev.bundle):
        v = secrecy_two_generators(ev.bundle.item(i))
        if len(v):
            pts.append(_pts5(v[:, 0], v[:, 1], v[:, 1], v[:, 2], v[:, 2]))
            ids += [_gid(i)] * len(v)
    if not pts:
        pts, ids = [np.zeros((1, 5))], ["origin"]
    return _pruned(np.concatenate(pts), ids, "secrecy", ev)


def positive_secrecy_possible(ch: GmacChannel, grid=None, tol: float = 1e-12) -> tuple[bool, bool]:
    """(user 1, user 2): does some grid distribution give I(U;Y|V,Q) > I(U;Y2|X2,V,Q)
    (resp. I(V;Y|U,Q) > I(V;Y1|X1,U,Q))?  The witnesses may differ."""
    ev = _evaluate(ch, grid if grid is not None else default_grid(ch, "two"), "two")
    b = ev.bundle
    return bool(np.any(b.i_u - b.leak1 > tol)), bool(np.any(b.i_v - b.leak2 > tol))


def case_witnesses(ch: GmacChannel, grid=None) -> dict[int, int]:
    """Lowest grid index exhibiting each region-geometry case, among distributions
    where both users have positive secrecy rates and the joint sub-region is nonempty."""
    ev = _evaluate(ch, grid if grid is not None else default_grid(ch, "two"), "two")
    b = ev.bundle
    good = ((b.i_u - b.leak1 > 1e-9) & (b.i_v - b.leak2 > 1e-9)
            & (b.i_uv - b.leak1 - b.leak2 > 1e-9))
    v_ok = b.i_v_q > b.leak2
    u_ok = b.i_u_q > b.leak1
    cases = np.where(v_ok & u_ok, 1, np.where(u_ok, 2, np.where(v_ok, 3, 4)))
    out = {}
    for c in (1, 2, 3, 4):
        hit = np.flatnonzero(good & (cases == c))
        if len(hit):
            out[c] = int(hit[0])
    return out


# ---------------------------------------------------------------- helpers

def superposition_dist(alpha: float) -> OneMessageDist:
    """Q uniform, X2 = 1, U = X1 = Q xor Bern(alpha) on binary inputs."""
    if not 0 <= alpha <= 0.5:
        raise ValueError("alpha outside [0, 1/2]")
    return OneMessageDist(np.array([[0.0, 0.5], [0.0, 0.5]]),
                          np.array([[1 - alpha, alpha], [alpha, 1 - alpha]]), np.eye(2))


def _in_two_secrecy(p, mi: TwoMessageBundle, tol: float) -> bool:
    r0, r1, r2 = p[0], p[1], p[2]
    k = secrecy_two_caps(mi)
    joint = r1 <= k["r1"] + tol and r2 <= k["r2"] + tol and r1 + r2 <= k["sum"] + tol \
        and r0 + r1 + r2 <= k["all"] + tol
    only1 = r2 <= tol and r1 <= k["r1"] + tol and r0 + r1 <= k["only1_all"] + tol
    only2 = r1 <= tol and r2 <= k["r2"] + tol and r0 + r2 <= k["only2_all"] + tol
    return joint or only1 or only2


def recheck(ch: GmacChannel, trace: RegionTrace, tol: float = 1e-9) -> list[int]:
    """Indices of trace points that do NOT satisfy their generating inequalities
    for the distribution recorded with them."""
    bad = []
    for k, (p, i) in enumerate(zip(trace.points, trace.ids)):
        r0, r1, r2, e1, e2 = p
        if i == "origin":
            if np.any(np.abs(p) > tol):
                bad.append(k)
            continue
        d = trace.distributions.get(i)
        if d is None:
            bad.append(k)
            continue
        if e1 > r1 + tol or e2 > r2 + tol:
            bad.append(k)
            continue
        if isinstance(d, TwoMessageDist):
            mi = mi_bundle_two_message(ch, d)
            if trace.provenance == "secrecy":
                ok = _in_two_secrecy(p, mi, tol) and abs(e1 - r1) <= tol and abs(e2 - r2) <= tol
            else:
                ok = in_mac(r0, r1, r2, mi, tol) and bool(
                    equivocation_set_explicit(r0, r1, r2, _relax(mi, tol)).contains(e1, e2, tol))
        else:
            mi = mi_bundle_one_message(ch, d)
            if r2 > tol or e2 > tol:
                ok = False
            elif trace.provenance == "secrecy":
                ok = (r1 <= mi.i_u_y - mi.i_u_y2 + tol and r0 + r1 <= mi.i_sum - mi.i_u_y2 + tol
                      and abs(e1 - r1) <= tol)
            else:
                slicer = outer_slice if trace.provenance == "outer" else inner_slice
                s = slicer(mi, max(r0 - tol, 0.0))
                ok = s is not None and r1 <= s[0] + tol and e1 <= min(r1, s[1]) + tol
        if not ok:
            bad.append(k)
    return bad


def _relax(mi: TwoMessageBundle, tol: float) -> TwoMessageBundle:
    return TwoMessageBundle(mi.i_u + tol, mi.i_v + tol, mi.i_uv + 2 * tol, mi.i_all + 3 * tol,
                            mi.leak1, mi.leak2, mi.i_u_q, mi.i_v_q)


__all__ = [
    "superposition_dist", "recheck",
    "inner_bound_one", "outer_bound_one", "secrecy_capacity_region_one", "secrecy_capacity_at_R0",
    "degraded_region", "inner_region_one", "outer_evaluations", "two_message_inner_bound",
    "inner_region_two", "secrecy_rate_region_two", "positive_secrecy_possible", "case_witnesses",
    "default_grid", "geometry_case", "DegradednessWarning",
]
