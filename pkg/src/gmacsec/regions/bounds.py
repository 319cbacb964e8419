"""Inequality systems of the rate-equivocation regions for fixed information terms."""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .bundles import OneMessageBundle, TwoMessageBundle
from .hull import RatePoint

FEAS_TOL = 1e-12


def _pos(x):
    return np.maximum(x, 0.0)


# ---------------------------------------------------------------- one message

def one_message_constants(mi: OneMessageBundle, outer: bool = False) -> dict[str, float]:
    """Right-hand sides shared by the one-message inner and outer bounds.

    r1: R1 <= r1;  sum: R0 + R1 <= sum;  re: Re <= re;  sum_re: R0 + Re <= sum_re.
    The inner bound clamps ``re`` and ``sum_re - R0`` at zero, the outer bound does not.
    """
    if outer and mi.i_u_y_v is None:
        raise ValueError("outer bound needs I(U;Y|X2,V)")
    return {"r1": mi.i_u_y_v if outer else mi.i_u_y, "sum": mi.i_sum,
            "re": mi.i_u_y - mi.i_u_y2, "sum_re": mi.i_sum - mi.i_u_y2}


def _polygon(R0: float, r1max: float, remax: float) -> list[RatePoint]:
    verts = [(0.0, 0.0), (r1max, 0.0), (r1max, remax), (remax, remax)]
    out = []
    for r1, re in dict.fromkeys(verts):
        out.append(RatePoint(R0=R0, R1=r1, R1e=re))
    return out


def inner_slice(mi: OneMessageBundle, R0: float) -> tuple[float, float] | None:
    """(max R1, max Re) of the inner-bound polygon at this R0, or None if empty."""
    k = one_message_constants(mi)
    r1max = min(k["r1"], k["sum"] - R0)
    if R0 < 0 or r1max < -FEAS_TOL:
        return None
    r1max = max(r1max, 0.0)
    remax = min(r1max, _pos(k["re"]), _pos(k["sum_re"] - R0))
    return r1max, float(remax)


def outer_slice(mi: OneMessageBundle, R0: float) -> tuple[float, float] | None:
    k = one_message_constants(mi, outer=True)
    r1max = min(k["r1"], k["sum"] - R0)
    remax = min(r1max, k["re"], k["sum_re"] - R0)
    if R0 < 0 or r1max < -FEAS_TOL or remax < -FEAS_TOL:
        return None
    return max(r1max, 0.0), max(float(remax), 0.0)


def inner_polygon(mi: OneMessageBundle, R0: float) -> list[RatePoint]:
    s = inner_slice(mi, R0)
    return [] if s is None else _polygon(R0, *s)


def outer_polygon(mi: OneMessageBundle, R0: float) -> list[RatePoint]:
    s = outer_slice(mi, R0)
    return [] if s is None else _polygon(R0, *s)


def inner_generators(a, b, c) -> tuple[np.ndarray, np.ndarray]:
    """Generators (R0, R1, Re) of the convexified one-message inner region of a
    single distribution: (c - a, a, [a - b]+) and (c, 0, 0).  Vectorized."""
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    top = np.stack([c - a, a, _pos(a - b)], axis=-1)
    end = np.stack([c, np.zeros_like(c), np.zeros_like(c)], axis=-1)
    return top, end


def secrecy_generators(a, b, c) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Generators (R0, R1) of {R1 <= a - b, R0 + R1 <= c - b}: (c - a, a - b) and
    (c - b, 0); the mask marks distributions whose region is nonempty."""
    a, b, c = (np.asarray(v, dtype=float) for v in (a, b, c))
    ok = a - b >= -FEAS_TOL
    top = np.stack([c - a, _pos(a - b)], axis=-1)
    end = np.stack([c - b, np.zeros_like(c)], axis=-1)
    return top, end, ok


def polytope_vertices(A: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Vertices of {x : A x <= b} by brute-force enumeration of active sets."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    d = A.shape[1]
    verts = []
    for rows in itertools.combinations(range(len(A)), d):
        sub = A[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, b[list(rows)])
        if np.all(A @ x <= b + tol):
            verts.append(x)
    if not verts:
        return np.zeros((0, d))
    return np.unique(np.round(np.array(verts), 12), axis=0) + 0.0


def polytope_vertices_batch(A: np.ndarray, B: np.ndarray, tol: float = 1e-10
                            ) -> tuple[np.ndarray, np.ndarray]:
    """Vertices of {x : A x <= b} for every row b of ``B`` at once.

    Returns candidate points (N, K, d) and a feasibility mask (N, K); the same
    vertex may appear under several active sets.
    """
    A = np.asarray(A, dtype=float)
    B = np.atleast_2d(np.asarray(B, dtype=float))
    d = A.shape[1]
    combos = [list(r) for r in itertools.combinations(range(len(A)), d)
              if abs(np.linalg.det(A[list(r)])) >= 1e-12]
    inv = np.stack([np.linalg.inv(A[r]) for r in combos])          # (K, d, d)
    rhs = np.stack([B[:, r] for r in combos], axis=1)                # (N, K, d)
    x = np.einsum("kij,nkj->nki", inv, rhs)
    ok = np.all(np.einsum("md,nkd->nkm", A, x) <= B[:, None, :] + tol, axis=2)
    return x, ok


OUTER_A = np.array([[-1, 0, 0], [0, -1, 0], [0, 0, -1], [0, 1, 0], [1, 1, 0],
                    [0, -1, 1], [0, 0, 1], [1, 0, 1]], dtype=float)


def outer_rhs(r1, total, re, sum_re) -> np.ndarray:
    z = np.zeros_like(np.asarray(r1, dtype=float))
    return np.stack([z, z, z, r1, total, z, re, sum_re], axis=-1)


def outer_generators(mi: OneMessageBundle) -> np.ndarray:
    """Vertices (R0, R1, Re) of the outer-bound polytope of one distribution."""
    k = one_message_constants(mi, outer=True)
    return polytope_vertices(OUTER_A, outer_rhs(k["r1"], k["sum"], k["re"], k["sum_re"]))


# ---------------------------------------------------------------- two messages

def in_mac(R0: float, R1: float, R2: float, mi: TwoMessageBundle, tol: float = FEAS_TOL) -> bool:
    return (min(R0, R1, R2) >= -tol and R1 <= mi.i_u + tol and R2 <= mi.i_v + tol
            and R1 + R2 <= mi.i_uv + tol and R0 + R1 + R2 <= mi.i_all + tol)


def mac_vertices(mi: TwoMessageBundle, R0: float | None = None) -> np.ndarray:
    """Vertices of the MAC polytope over (R0, R1, R2), or over (R1, R2) at fixed R0."""
    if R0 is None:
        A = np.array([[-1, 0, 0], [0, -1, 0], [0, 0, -1], [0, 1, 0], [0, 0, 1],
                      [0, 1, 1], [1, 1, 1]], dtype=float)
        b = np.array([0, 0, 0, mi.i_u, mi.i_v, mi.i_uv, mi.i_all])
        return polytope_vertices(A, b)
    A = np.array([[-1, 0], [0, -1], [1, 0], [0, 1], [1, 1]], dtype=float)
    b = np.array([0, 0, mi.i_u, mi.i_v, min(mi.i_uv, mi.i_all - R0)])
    return polytope_vertices(A, b)


class MacPreconditionError(ValueError):
    """Rate triple outside the MAC polytope."""


def _require_mac(R0, R1, R2, mi):
    if not in_mac(R0, R1, R2, mi):
        raise MacPreconditionError(f"rates ({R0}, {R1}, {R2}) outside the MAC polytope")


@dataclass(frozen=True)
class ExplicitEquivocationSet:
    """Union of three inequality-defined sets over (R1e, R2e).

    joint: both equivocations positive, with the individual and the two sum
    constraints; only1: R2e = 0 and the R1e constraints; only2: symmetric.
    """

    r1_cap: float   # min of R1 and the three clamped R1e bounds
    r2_cap: float
    sum_cap: float  # min of the two clamped sum bounds

    def contains(self, r1e, r2e, tol: float = FEAS_TOL) -> np.ndarray:
        r1e, r2e = np.broadcast_arrays(np.asarray(r1e, float), np.asarray(r2e, float))
        nonneg = (r1e >= -tol) & (r2e >= -tol)
        joint = (r1e <= self.r1_cap + tol) & (r2e <= self.r2_cap + tol) & (r1e + r2e <= self.sum_cap + tol)
        only1 = (r1e <= self.r1_cap + tol) & (np.abs(r2e) <= tol)
        only2 = (r2e <= self.r2_cap + tol) & (np.abs(r1e) <= tol)
        return nonneg & (joint | only1 | only2)

    def corners(self) -> np.ndarray:
        """Generator points of the set for the downward-closed hull."""
        s = self.sum_cap
        pts = [(self.r1_cap, 0.0), (0.0, self.r2_cap)]
        a = min(self.r1_cap, s)
        pts.append((a, min(self.r2_cap, max(s - a, 0.0))))
        b = min(self.r2_cap, s)
        pts.append((min(self.r1_cap, max(s - b, 0.0)), b))
        return np.unique(np.array(pts), axis=0)


def equivocation_set_explicit(R0: float, R1: float, R2: float,
                              mi: TwoMessageBundle) -> ExplicitEquivocationSet:
    _require_mac(R0, R1, R2, mi)
    e1, e2 = mi.leak1, mi.leak2
    r1_cap = min(R1, _pos(mi.i_u - e1), _pos(mi.i_uv - R2 - e1), _pos(mi.i_all - R0 - R2 - e1))
    r2_cap = min(R2, _pos(mi.i_v - e2), _pos(mi.i_uv - R1 - e2), _pos(mi.i_all - R0 - R1 - e2))
    sum_cap = min(_pos(mi.i_uv - e1 - e2), _pos(mi.i_all - R0 - e1 - e2))
    return ExplicitEquivocationSet(float(max(r1_cap, 0.0)), float(max(r2_cap, 0.0)), float(sum_cap))


def widened_index_set(R0: float, R1: float, R2: float, mi: TwoMessageBundle, r1p, r2p,
                      tol: float = FEAS_TOL) -> np.ndarray:
    """Membership of (R1', R2') in the widened index set used by the union form."""
    r1p, r2p = np.broadcast_arrays(np.asarray(r1p, float), np.asarray(r2p, float))
    return ((r1p <= mi.i_u + tol) & (r1p + R2 <= mi.i_uv + tol) & (R0 + r1p + R2 <= mi.i_all + tol)
            & (r2p <= mi.i_v + tol) & (R1 + r2p <= mi.i_uv + tol) & (R0 + R1 + r2p <= mi.i_all + tol)
            & (r1p + r2p <= mi.i_uv + tol) & (R0 + r1p + r2p <= mi.i_all + tol)
            & (r1p >= -tol) & (r2p >= -tol))


@dataclass(frozen=True)
class UnionFormEquivocationSet:
    """Union over sampled (R1', R2') of the boxes
    R1e <= min(R1, [R1' - leak1]+), R2e <= min(R2, [R2' - leak2]+)."""

    box_r1: np.ndarray
    box_r2: np.ndarray
    resolution: int

    def contains(self, r1e, r2e, tol: float = FEAS_TOL) -> np.ndarray:
        r1e, r2e = np.broadcast_arrays(np.asarray(r1e, float), np.asarray(r2e, float))
        if len(self.box_r1) == 0:
            return np.zeros(r1e.shape, bool)
        # staircase: best R2e reach among boxes whose R1e reach is at least x
        order = np.argsort(-self.box_r1, kind="stable")
        b1 = self.box_r1[order]
        best2 = np.maximum.accumulate(self.box_r2[order])
        k = np.searchsorted(-b1, -(r1e - tol), side="right")  # boxes with b1 >= r1e - tol
        reach = np.where(k > 0, best2[np.maximum(k - 1, 0)], -np.inf)
        return (r1e >= -tol) & (r2e >= -tol) & (r2e <= reach + tol)


def equivocation_set_union_form(R0: float, R1: float, R2: float, mi: TwoMessageBundle,
                                resolution: int = 256, r1e_probe=(), r2e_probe=()
                                ) -> UnionFormEquivocationSet:
    """Brute-force union over a lattice of (R1', R2') in the widened index set.

    The lattice has ``resolution`` steps over each coordinate's range.  Values
    R1' = leak1 + r for r in ``r1e_probe`` (and likewise for R2') are added so
    that membership at those probe coordinates is decided exactly rather than
    up to the lattice step.
    """
    _require_mac(R0, R1, R2, mi)
    hi1 = max(0.0, min(mi.i_u, mi.i_uv - R2, mi.i_all - R0 - R2))
    hi2 = max(0.0, min(mi.i_v, mi.i_uv - R1, mi.i_all - R0 - R1))
    c1 = np.union1d(np.linspace(0.0, hi1, resolution + 1), mi.leak1 + np.asarray(r1e_probe, float))
    c2 = np.union1d(np.linspace(0.0, hi2, resolution + 1), mi.leak2 + np.asarray(r2e_probe, float))
    g1, g2 = np.meshgrid(c1, c2, indexing="ij")
    ok = widened_index_set(R0, R1, R2, mi, g1, g2)
    b1 = np.minimum(R1, _pos(g1[ok] - mi.leak1))
    b2 = np.minimum(R2, _pos(g2[ok] - mi.leak2))
    return UnionFormEquivocationSet(b1, b2, resolution)


def membership_axes(R1: float, R2: float, n: int = 64) -> tuple[np.ndarray, np.ndarray]:
    return np.linspace(0.0, R1, n), np.linspace(0.0, R2, n)


def membership_grid(region, R1: float, R2: float, n: int = 64, tol: float = FEAS_TOL) -> np.ndarray:
    a1, a2 = membership_axes(R1, R2, n)
    g1, g2 = np.meshgrid(a1, a2, indexing="ij")
    return region.contains(g1, g2, tol)


def secrecy_two_caps(mi: TwoMessageBundle) -> dict[str, float]:
    e1, e2 = mi.leak1, mi.leak2
    return {"r1": mi.i_u - e1, "r2": mi.i_v - e2, "sum": mi.i_uv - e1 - e2,
            "all": mi.i_all - e1 - e2, "only1_all": mi.i_all - e1, "only2_all": mi.i_all - e2}


def secrecy_two_generators(mi: TwoMessageBundle) -> np.ndarray:
    """Vertices (R0, R1, R2) of the three perfect-secrecy sub-regions of one distribution."""
    k = secrecy_two_caps(mi)
    out = []
    if min(k["r1"], k["r2"], k["sum"], k["all"]) >= -FEAS_TOL:
        A = np.array([[-1, 0, 0], [0, -1, 0], [0, 0, -1], [0, 1, 0], [0, 0, 1],
                      [0, 1, 1], [1, 1, 1]], dtype=float)
        b = np.array([0, 0, 0, k["r1"], k["r2"], k["sum"], k["all"]])
        out.append(polytope_vertices(A, np.maximum(b, 0.0)))
    if min(k["r1"], k["only1_all"]) >= -FEAS_TOL:
        r1 = max(k["r1"], 0.0)
        s = max(k["only1_all"], 0.0)
        out.append(np.array([[0, 0, 0], [s, 0, 0], [max(s - r1, 0.0), min(r1, s), 0], [0, min(r1, s), 0]]))
    if min(k["r2"], k["only2_all"]) >= -FEAS_TOL:
        r2 = max(k["r2"], 0.0)
        s = max(k["only2_all"], 0.0)
        out.append(np.array([[0, 0, 0], [s, 0, 0], [max(s - r2, 0.0), 0, min(r2, s)], [0, 0, min(r2, s)]]))
    if not out:
        return np.zeros((0, 3))
    return np.unique(np.round(np.concatenate(out), 14), axis=0) + 0.0


def geometry_case(mi: TwoMessageBundle) -> int:
    """1..4 according to whether I(V;Y|Q) > leak2 and I(U;Y|Q) > leak1."""
    v_ok = mi.i_v_q > mi.leak2
    u_ok = mi.i_u_q > mi.leak1
    if v_ok and u_ok:
        return 1
    if u_ok:
        return 2
    if v_ok:
        return 3
    return 4
