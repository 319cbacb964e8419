"""Closed-form regions for the binary and Gaussian channels with one confidential message set.

Binary channel: Y = X1 * X2 at the destination and Y2 = Y xor Bern(p) at user 2.  Gaussian channel: Y = X1 + X2 + Z, Y2 = Y + Z' with noise
variances N at the destination and N2 > N at user 2.  All rates in bits.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .info_core import BISECT_ITERS, BISECT_TOL, binary_entropy, inverse_binary_entropy, star

INF_NOISE = 1e12


@dataclass(frozen=True)
class SliceBounds:
    """Active bounds at one (alpha, R0).

    r1: cap on R1 alone; sum: cap on R0 + R1; re: cap on Re alone;
    sum_re: cap on R0 + Re.  ``r1_max`` and ``re_max`` are the resulting
    largest R1 and Re at this R0 (Re <= R1 included), or None if R0 is infeasible.
    """

    R0: float
    r1: float
    sum: float
    re: float
    sum_re: float
    r1_max: float | None
    re_max: float | None


def _slice(R0: float, r1: float, total: float, re: float, sum_re: float) -> SliceBounds:
    if R0 > total + 1e-15:
        return SliceBounds(R0, r1, total, re, sum_re, None, None)
    r1_max = max(min(r1, total - R0), 0.0)
    re_max = max(min(r1_max, re, sum_re - R0), 0.0)
    return SliceBounds(R0, r1, total, re, sum_re, r1_max, re_max)


def _check_binary(p: float, R0: float | None = None, alpha: float | None = None):
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"crossover p={p!r} outside [0, 1/2]")
    if alpha is not None and not 0.0 <= alpha <= 0.5:
        raise ValueError(f"alpha={alpha!r} outside [0, 1/2]")
    if R0 is not None and not 0.0 <= R0 <= 1.0:
        raise ValueError(f"R0={R0!r} outside [0, 1]")


def binary_leak(p: float, alpha: float) -> float:
    """h(p * alpha) - h(p): what user 2 learns about the superposed layer."""
    return binary_entropy(star(p, alpha)) - binary_entropy(p)


def binary_region_slice(p: float, alpha: float, R0: float) -> SliceBounds:
    _check_binary(p, R0 if R0 <= 1.0 else None, alpha)
    if R0 < 0:
        raise ValueError("R0 must be nonnegative")
    leak = binary_leak(p, alpha)
    h = binary_entropy(alpha)
    return _slice(R0, h, 1.0, h - leak, 1.0 - leak)


def binary_secrecy_capacity(p: float, R0: float) -> float:
    """Largest perfectly secret R1 at common rate R0, via alpha* = h^-1(1 - R0)."""
    _check_binary(p, R0)
    a = inverse_binary_entropy(1.0 - R0)
    if p == 0.0:
        return 0.0
    return max(binary_entropy(a) + binary_entropy(p) - binary_entropy(star(p, a)), 0.0)


def binary_time_sharing_secrecy(p: float, R0: float) -> float:
    """Chord from (0, h(p)) to (1, 0): alternating the two extreme secret operating points."""
    _check_binary(p, R0)
    return (1.0 - R0) * binary_entropy(p)


@dataclass(frozen=True)
class GaussianParams:
    P1: float
    P2: float
    N: float
    N2: float

    def __post_init__(self):
        if not (self.P1 > 0 and self.P2 > 0):
            raise ValueError("powers must be positive")
        if not self.N > 0:
            raise ValueError("noise variance N must be positive")
        if math.isinf(self.N2):
            warnings.warn(f"infinite N2 replaced by {INF_NOISE:g}", stacklevel=3)
            object.__setattr__(self, "N2", INF_NOISE)
        if not self.N2 >= self.N:
            raise ValueError("user-2 noise N2 must be at least N")

    @property
    def threshold(self) -> float:
        """Largest R0 at which full power on the private layer is still optimal."""
        return 0.5 * math.log2((self.P1 + self.P2 + self.N) / (self.P1 + self.N))

    @property
    def r0_max(self) -> float:
        """Largest feasible R0: fully correlated inputs."""
        return 0.5 * math.log2(1 + (self.P1 + self.P2 + 2 * math.sqrt(self.P1 * self.P2)) / self.N)


def _g_sum(pr: GaussianParams, alpha: float) -> float:
    return 0.5 * math.log2(1 + (pr.P1 + pr.P2 + 2 * math.sqrt((1 - alpha) * pr.P1 * pr.P2)) / pr.N)


def _g_private(pr: GaussianParams, alpha: float) -> float:
    return 0.5 * math.log2(1 + alpha * pr.P1 / pr.N)


def _g_leak(pr: GaussianParams, alpha: float) -> float:
    return 0.5 * math.log2(1 + alpha * pr.P1 / pr.N2)


def gaussian_region_slice(params: GaussianParams, alpha: float, R0: float) -> SliceBounds:
    """Bounds at (alpha, R0); alpha = 1 is admitted as the closure of the union."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha={alpha!r} outside [0, 1]")
    if R0 < 0:
        raise ValueError("R0 must be nonnegative")
    r1 = _g_private(params, alpha)
    total = _g_sum(params, alpha)
    leak = _g_leak(params, alpha)
    return _slice(R0, r1, total, r1 - leak, total - leak)


def common_rate_at(params: GaussianParams, alpha: float) -> float:
    """Common rate at which private power fraction ``alpha`` meets the sum-rate bound."""
    pr = params
    return 0.5 * math.log2((pr.P1 + pr.P2 + 2 * math.sqrt((1 - alpha) * pr.P1 * pr.P2) + pr.N)
                           / (alpha * pr.P1 + pr.N))


def solve_alpha_star(params: GaussianParams, R0: float) -> float:
    """Root of common_rate_at(alpha) = R0 on [0, 1] by bisection (the map is decreasing)."""
    lo, hi = 0.0, 1.0
    for _ in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if common_rate_at(params, mid) > R0:
            lo = mid
        else:
            hi = mid
        if hi - lo < BISECT_TOL:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class GaussianCapacity:
    value: float
    alpha: float
    branch: str          # "flat", "correlated" or "infeasible"
    infeasible: bool = False
    notes: tuple[str, ...] = field(default=())


def _secrecy_at(params, alpha, leak=True):
    v = _g_private(params, alpha) - (_g_leak(params, alpha) if leak else 0.0)
    return max(v, 0.0)


def gaussian_secrecy_capacity(params: GaussianParams, R0: float, full_output: bool = False):
    """Largest perfectly secret R1 at common rate R0."""
    return _gaussian_boundary(params, R0, True, full_output)


def gaussian_mac_boundary(params: GaussianParams, R0: float, full_output: bool = False):
    """Largest R1 at common rate R0 without a secrecy constraint."""
    return _gaussian_boundary(params, R0, False, full_output)


def _gaussian_boundary(params, R0, leak, full_output):
    if R0 < 0:
        raise ValueError("R0 must be nonnegative")
    if R0 <= params.threshold:
        res = GaussianCapacity(_secrecy_at(params, 1.0, leak), 1.0, "flat")
    elif R0 > params.r0_max:
        res = GaussianCapacity(0.0, 0.0, "infeasible", True, ("R0 exceeds the largest feasible common rate",))
    else:
        a = solve_alpha_star(params, R0)
        res = GaussianCapacity(_secrecy_at(params, a, leak), a, "correlated")
    return res if full_output else res.value


@dataclass
class FigureTable:
    """Series sampled on a shared R0 grid; ``columns[0]`` is R0."""

    name: str
    columns: list[str]
    rows: np.ndarray
    meta: dict = field(default_factory=dict)


FIG5_P = (0.1, 0.2, 0.35, 0.5)
FIG6_P = 0.11
FIG7_PARAMS = dict(P1=10.0, P2=10.0, N=1.0)
FIG7_N2 = (2.0, 5.0, 10.0)


def figure_trace(which: str, params: dict | None = None, points: int = 101,
                 r0: np.ndarray | None = None) -> FigureTable:
    """Data behind the one-message secrecy capacity figures.

    fig5: binary Cs(R0) for several p.  fig6: binary Cs(R0) against the
    time-sharing chord.  fig7: Gaussian Cs(R0) for several N2 and the MAC boundary.
    """
    params = dict(params or {})
    if r0 is None and points < 2:
        raise ValueError("need at least two grid points")
    grid = None if r0 is None else np.asarray(r0, dtype=float)
    if which == "fig5":
        ps = tuple(params.get("p", FIG5_P))
        r0 = np.linspace(0.0, 1.0, points) if grid is None else grid
        cols = [[binary_secrecy_capacity(p, x) for x in r0] for p in ps]
        names = [f"Cs_p={p:g}" for p in ps]
        meta = {"p": list(ps)}
    elif which == "fig6":
        p = float(params.get("p", FIG6_P))
        r0 = np.linspace(0.0, 1.0, points) if grid is None else grid
        cols = [[binary_secrecy_capacity(p, x) for x in r0],
                [binary_time_sharing_secrecy(p, x) for x in r0]]
        names = [f"Cs_p={p:g}", f"time_sharing_p={p:g}"]
        meta = {"p": p}
    elif which == "fig7":
        base = {k: float(params.get(k, v)) for k, v in FIG7_PARAMS.items()}
        n2s = tuple(params.get("N2", FIG7_N2))
        mac = GaussianParams(N2=INF_NOISE, **base)
        r0 = np.linspace(0.0, mac.r0_max, points) if grid is None else grid
        cols = [[gaussian_secrecy_capacity(GaussianParams(N2=n2, **base), x) for x in r0] for n2 in n2s]
        cols.append([gaussian_mac_boundary(mac, x) for x in r0])
        names = [f"Cs_N2={n2:g}" for n2 in n2s] + ["MAC"]
        meta = {**base, "N2": list(n2s)}
    else:
        raise ValueError(f"unknown figure {which!r}")
    rows = np.column_stack([r0] + [np.asarray(c) for c in cols])
    return FigureTable(which, ["R0"] + names, rows, meta)
