"""Randomized check that the explicit and union forms of the two-message
equivocation set agree."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bounds import (equivocation_set_explicit, equivocation_set_union_form, membership_axes,
                     membership_grid)
from .bundles import TwoMessageBundle


def random_bundle(rng: np.random.Generator) -> TwoMessageBundle:
    """Information terms consistent with independent U, V given Q:
    max(i_u, i_v) <= i_uv <= i_u + i_v <= ..., i_uv <= i_all; arbitrary leaks.
    About one draw in eight has an exactly degenerate feature."""
    i_u, i_v = rng.uniform(0, 1, 2)
    i_uv = rng.uniform(max(i_u, i_v), i_u + i_v)
    i_all = i_uv + rng.uniform(0, 0.5)
    leak1, leak2 = rng.uniform(0, 1.2, 2) * [i_u, i_v]
    kind = rng.integers(8)
    if kind == 0:
        i_u = i_v = i_uv = i_all = leak1 = leak2 = 0.0
    elif kind == 1:
        leak1 = leak2 = 0.0
    elif kind == 2:
        i_all = i_uv
    elif kind == 3:
        leak1 = i_u + rng.uniform(0, 0.2)
    return TwoMessageBundle(*(float(v) for v in (i_u, i_v, i_uv, i_all, leak1, leak2)))


def random_mac_rates(mi: TwoMessageBundle, rng: np.random.Generator) -> tuple[float, float, float]:
    """Uniform draw from the MAC polytope (rejection from its bounding box),
    occasionally snapped onto a face."""
    for _ in range(10_000):
        r0 = rng.uniform(0, mi.i_all)
        r1 = rng.uniform(0, mi.i_u)
        r2 = rng.uniform(0, mi.i_v)
        if r1 + r2 <= mi.i_uv and r0 + r1 + r2 <= mi.i_all:
            break
    else:
        r0 = r1 = r2 = 0.0
    if rng.integers(4) == 0:
        r0 = max(mi.i_all - r1 - r2, 0.0)
    return float(r0), float(r1), float(r2)


@dataclass
class EquivalenceReport:
    instances: int
    grid: int
    resolution: int
    disagreements: int = 0
    counterexamples: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.disagreements == 0


def compare_forms(R0, R1, R2, mi: TwoMessageBundle, n: int = 64, resolution: int = 256):
    """Membership grids of the two forms on an n x n lattice over [0, R1] x [0, R2]."""
    a1, a2 = membership_axes(R1, R2, n)
    explicit = equivocation_set_explicit(R0, R1, R2, mi)
    union = equivocation_set_union_form(R0, R1, R2, mi, resolution, a1, a2)
    return membership_grid(explicit, R1, R2, n), membership_grid(union, R1, R2, n)


def verify_equivalence(instances: int = 1000, seed: int = 0, n: int = 64,
                       resolution: int = 256) -> EquivalenceReport:
    rng = np.random.default_rng(seed)
    rep = EquivalenceReport(instances, n, resolution)
    for k in range(instances):
        mi = random_bundle(rng)
        rates = random_mac_rates(mi, rng)
        ge, gu = compare_forms(*rates, mi, n, resolution)
        bad = int(np.count_nonzero(ge != gu))
        if bad:
            rep.disagreements += bad
            rep.counterexamples.append({"instance": k, "rates": list(rates),
                                        "bundle": {f: getattr(mi, f) for f in
                                                   ("i_u", "i_v", "i_uv", "i_all", "leak1", "leak2")},
                                        "cells": bad})
    return rep
