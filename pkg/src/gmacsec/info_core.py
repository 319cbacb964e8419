"""Finite-alphabet entropy and mutual information primitives (base-2).

The array functions accept an optional number of leading batch axes so
that whole families of distributions can be evaluated in one call.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

MASS_TOL = 1e-12
ZERO_MASS = 1e-15
MI_CLAMP = 1e-9
BISECT_ITERS = 200
BISECT_TOL = 1e-12


class InconsistentInformationError(ArithmeticError):
    """A mutual information came out negative by more than rounding."""


@dataclass(frozen=True)
class FiniteDist:
    """Joint pmf over a product of finite alphabets, one axis per variable."""

    mass: np.ndarray
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        m = np.asarray(self.mass, dtype=float)
        if m.ndim == 0:
            raise ValueError("distribution needs at least one variable")
        if np.any(m < 0):
            raise ValueError("negative probability mass")
        if abs(m.sum() - 1.0) > MASS_TOL:
            raise ValueError(f"total mass {m.sum()!r} differs from 1")
        if self.names is not None and len(self.names) != m.ndim:
            raise ValueError("one name per axis required")
        m.setflags(write=False)
        object.__setattr__(self, "mass", m)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.mass.shape

    def axes(self, vars: Sequence[int | str]) -> tuple[int, ...]:
        out = []
        for v in vars:
            if isinstance(v, str):
                if self.names is None or v not in self.names:
                    raise KeyError(v)
                v = self.names.index(v)
            if not 0 <= v < self.mass.ndim:
                raise IndexError(f"variable index {v} out of range")
            out.append(int(v))
        return tuple(out)


def _xlog2x(p: np.ndarray) -> np.ndarray:
    safe = np.where(p > ZERO_MASS, p, 1.0)
    return np.where(p > ZERO_MASS, p * np.log2(safe), 0.0)


def marginal(mass: np.ndarray, keep: Sequence[int], batch: int = 0) -> np.ndarray:
    """Sum out every non-batch axis not listed in ``keep`` (axes counted after the batch)."""
    keep = {batch + k for k in keep}
    drop = tuple(ax for ax in range(batch, mass.ndim) if ax not in keep)
    return mass.sum(axis=drop) if drop else mass


def entropy_array(mass: np.ndarray, keep: Sequence[int], batch: int = 0) -> np.ndarray:
    """Entropy of the marginal over ``keep``; one value per batch element."""
    if len(keep) == 0:
        return np.zeros(mass.shape[:batch])
    m = marginal(mass, keep, batch)
    terms = _xlog2x(m)
    return -terms.sum(axis=tuple(range(batch, m.ndim)))


def cond_mi_array(mass: np.ndarray, a: Sequence[int], b: Sequence[int],
                  c: Sequence[int] = (), batch: int = 0) -> np.ndarray:
    """I(A;B|C) for every batch element, clamped at zero when within rounding."""
    a, b, c = tuple(a), tuple(b), tuple(c)
    if not a or not b:
        raise ValueError("a and b must be nonempty")
    sets = [set(a), set(b), set(c)]
    if sets[0] & sets[1] or sets[0] & sets[2] or sets[1] & sets[2]:
        raise ValueError("variable subsets overlap")
    val = (entropy_array(mass, a + c, batch) + entropy_array(mass, b + c, batch)
           - entropy_array(mass, a + b + c, batch) - entropy_array(mass, c, batch))
    worst = np.min(val) if np.size(val) else 0.0
    if worst < -MI_CLAMP:
        raise InconsistentInformationError(f"mutual information {worst!r} < 0")
    return np.maximum(val, 0.0)


def entropy(dist: FiniteDist, vars: Sequence[int | str]) -> float:
    """Shannon entropy in bits of the marginal over ``vars``."""
    ax = dist.axes(vars)
    if not ax:
        raise ValueError("vars must be nonempty")
    return float(entropy_array(dist.mass, ax))


def cond_mutual_info(dist: FiniteDist, a: Sequence[int | str], b: Sequence[int | str],
                     c: Sequence[int | str] = ()) -> float:
    """I(A;B|C) = H(A|C) + H(B|C) - H(A,B|C) in bits."""
    return float(cond_mi_array(dist.mass, dist.axes(a), dist.axes(b), dist.axes(c)))


def binary_entropy(x: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"probability {x!r} outside [0, 1]")
    if x <= ZERO_MASS or x >= 1.0 - ZERO_MASS:
        return 0.0
    return float(-x * np.log2(x) - (1.0 - x) * np.log2(1.0 - x))


def inverse_binary_entropy(c: float) -> float:
    """The unique a in [0, 1/2] with h(a) = c, by bisection."""
    if not 0.0 <= c <= 1.0:
        raise ValueError(f"entropy value {c!r} outside [0, 1]")
    if c == 0.0 or c == 1.0:
        return 0.5 * c
    lo, hi = 0.0, 0.5
    for _ in range(BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < c:
            lo = mid
        else:
            hi = mid
        if hi - lo < BISECT_TOL:
            break
    return 0.5 * (lo + hi)


def star(a: float, b: float) -> float:
    """Binary convolution a(1-b) + (1-a)b."""
    for v in (a, b):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"probability {v!r} outside [0, 1]")
    return a * (1.0 - b) + (1.0 - a) * b


def binary_epi_floor(v: float, p0: float) -> float:
    """Per-symbol lower bound h(p0 * h^-1(v)) on the output entropy of a BSC(p0)."""
    if not 0.0 < p0 <= 0.5:
        raise ValueError(f"crossover {p0!r} outside (0, 1/2]")
    return binary_entropy(star(p0, inverse_binary_entropy(v)))


def xor_noise_output(mass: np.ndarray, p0: float) -> np.ndarray:
    """Law of Y = X xor Z for a binary vector X (pmf indexed by the integer
    whose bits are the components) and i.i.d. Bernoulli(p0) noise Z."""
    px = np.asarray(mass, dtype=float).reshape(-1)
    n = int(round(np.log2(len(px))))
    if 2 ** n != len(px):
        raise ValueError("pmf length must be a power of two")
    idx = np.arange(len(px))
    ones = np.array([bin(z).count("1") for z in idx])
    weights = p0 ** ones * (1.0 - p0) ** (n - ones)
    return sum(w * px[idx ^ z] for z, w in zip(idx, weights))
