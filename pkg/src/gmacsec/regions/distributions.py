"""Auxiliary input distributions, lattice grids over them, and local refinement.

Two factorizations are used:

* one-message  p(q, x2) p(u|q) p(x1|u), optionally with p(v|q) for the outer bound;
* two-message  p(q) p(u|q) p(x1|u) p(v|q) p(x2|v).

Kernels are stored row-stochastic (one row per conditioning value).  Batched
kernels carry a leading batch axis and are passed around as plain dicts.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Mapping

import numpy as np
from scipy.optimize import minimize

KERNEL_TOL = 1e-12
DEFAULT_BUDGET = 2_000_000

Kernels = dict[str, np.ndarray]


def _check_rows(name: str, k: np.ndarray, ndim: int) -> np.ndarray:
    k = np.array(k, dtype=float)
    if k.ndim != ndim:
        raise ValueError(f"{name} must have {ndim} axes, got shape {k.shape}")
    if np.any(k < -KERNEL_TOL):
        raise ValueError(f"{name} has negative entries")
    if np.max(np.abs(k.sum(axis=-1) - 1.0)) > KERNEL_TOL:
        raise ValueError(f"{name} is not stochastic")
    k = np.clip(k, 0.0, None)
    k.setflags(write=False)
    return k


@dataclass(frozen=True)
class OneMessageDist:
    """p(q, x2) p(u|q) p(x1|u), with an optional p(v|q) for the outer-bound evaluator."""

    p_qx2: np.ndarray
    p_u_q: np.ndarray
    p_x1_u: np.ndarray
    p_v_q: np.ndarray | None = None

    def __post_init__(self):
        qx2 = np.array(self.p_qx2, dtype=float)
        if qx2.ndim != 2 or abs(qx2.sum() - 1.0) > KERNEL_TOL or np.any(qx2 < -KERNEL_TOL):
            raise ValueError("p_qx2 must be a joint pmf over (q, x2)")
        qx2 = np.clip(qx2, 0.0, None)
        qx2.setflags(write=False)
        object.__setattr__(self, "p_qx2", qx2)
        object.__setattr__(self, "p_u_q", _check_rows("p_u_q", self.p_u_q, 2))
        object.__setattr__(self, "p_x1_u", _check_rows("p_x1_u", self.p_x1_u, 2))
        if self.p_u_q.shape[0] != qx2.shape[0] or self.p_x1_u.shape[0] != self.p_u_q.shape[1]:
            raise ValueError("kernel shapes do not chain")
        if self.p_v_q is not None:
            object.__setattr__(self, "p_v_q", _check_rows("p_v_q", self.p_v_q, 2))
            if self.p_v_q.shape[0] != qx2.shape[0]:
                raise ValueError("p_v_q must have one row per q")

    @property
    def cards(self) -> dict[str, int]:
        c = {"q": self.p_qx2.shape[0], "u": self.p_u_q.shape[1]}
        if self.p_v_q is not None:
            c["v"] = self.p_v_q.shape[1]
        return c

    def kernels(self) -> Kernels:
        out = {"p_qx2": self.p_qx2[None], "p_u_q": self.p_u_q[None], "p_x1_u": self.p_x1_u[None]}
        if self.p_v_q is not None:
            out["p_v_q"] = self.p_v_q[None]
        return out

    def joint(self) -> np.ndarray:
        """p(q, u, x1, x2)."""
        return np.einsum("qx,qu,uk->qukx", self.p_qx2, self.p_u_q, self.p_x1_u)

    def with_v(self, p_v_q: np.ndarray) -> "OneMessageDist":
        return OneMessageDist(self.p_qx2, self.p_u_q, self.p_x1_u, p_v_q)

    def with_v_equal_q(self) -> "OneMessageDist":
        return self.with_v(np.eye(self.p_qx2.shape[0]))

    def as_two_message(self) -> "TwoMessageDist":
        """Same joint law written in the two-message form with V = X2."""
        p_q = self.p_qx2.sum(axis=1)
        nx2 = self.p_qx2.shape[1]
        safe = np.where(p_q > 0, p_q, 1.0)[:, None]
        p_x2_q = np.where(p_q[:, None] > 0, self.p_qx2 / safe, 1.0 / nx2)
        return TwoMessageDist(p_q, self.p_u_q, self.p_x1_u, p_x2_q, np.eye(nx2))


@dataclass(frozen=True)
class TwoMessageDist:
    """p(q) p(u|q) p(x1|u) p(v|q) p(x2|v)."""

    p_q: np.ndarray
    p_u_q: np.ndarray
    p_x1_u: np.ndarray
    p_v_q: np.ndarray
    p_x2_v: np.ndarray

    def __post_init__(self):
        p_q = np.array(self.p_q, dtype=float)
        if p_q.ndim != 1 or abs(p_q.sum() - 1.0) > KERNEL_TOL or np.any(p_q < -KERNEL_TOL):
            raise ValueError("p_q must be a pmf")
        p_q = np.clip(p_q, 0.0, None)
        p_q.setflags(write=False)
        object.__setattr__(self, "p_q", p_q)
        for name in ("p_u_q", "p_x1_u", "p_v_q", "p_x2_v"):
            object.__setattr__(self, name, _check_rows(name, getattr(self, name), 2))
        nq = p_q.shape[0]
        if (self.p_u_q.shape[0] != nq or self.p_v_q.shape[0] != nq
                or self.p_x1_u.shape[0] != self.p_u_q.shape[1]
                or self.p_x2_v.shape[0] != self.p_v_q.shape[1]):
            raise ValueError("kernel shapes do not chain")

    @property
    def cards(self) -> dict[str, int]:
        return {"q": self.p_q.shape[0], "u": self.p_u_q.shape[1], "v": self.p_v_q.shape[1]}

    def kernels(self) -> Kernels:
        return {k: getattr(self, k)[None] for k in ("p_q", "p_u_q", "p_x1_u", "p_v_q", "p_x2_v")}

    def joint(self) -> np.ndarray:
        """p(q, u, v, x1, x2)."""
        return np.einsum("q,qu,uk,qv,vx->quvkx", self.p_q, self.p_u_q, self.p_x1_u,
                         self.p_v_q, self.p_x2_v)


def dist_from_kernels(family: str, kern: Mapping[str, np.ndarray], i: int = 0):
    """Pick element ``i`` of a batch of kernels and wrap it as a distribution."""
    if family in ("one", "degraded"):
        return OneMessageDist(kern["p_qx2"][i], kern["p_u_q"][i], kern["p_x1_u"][i],
                              kern["p_v_q"][i] if "p_v_q" in kern else None)
    if family == "two":
        return TwoMessageDist(*(kern[k][i] for k in ("p_q", "p_u_q", "p_x1_u", "p_v_q", "p_x2_v")))
    raise ValueError(f"unknown family {family!r}")


def stack_kernels(dists) -> Kernels:
    ks = [d.kernels() for d in dists]
    return {name: np.concatenate([k[name] for k in ks]) for name in ks[0]}


@lru_cache(maxsize=None)
def simplex_lattice(m: int, k: int) -> np.ndarray:
    """All points of the m-simplex with coordinates in {0, 1/k, ..., 1}, lexicographic."""
    def comps(total, parts):
        if parts == 1:
            yield (total,)
            return
        for first in range(total + 1):
            for rest in comps(total - first, parts - 1):
                yield (first,) + rest
    pts = np.array(list(comps(k, m)), dtype=float) / k
    pts.setflags(write=False)
    return pts


def row_multisets(rows: np.ndarray, r: int, ordered: bool = False) -> np.ndarray:
    """Stack r rows drawn from ``rows``; unordered (non-decreasing index) unless ``ordered``."""
    idx = (itertools.product(range(len(rows)), repeat=r) if ordered
           else itertools.combinations_with_replacement(range(len(rows)), r))
    idx = np.array(list(idx), dtype=np.intp).reshape(-1, r)
    return rows[idx]


class LatticeGrid:
    """Cartesian product of per-kernel lattices, addressed by a flat index.

    Relabelling symmetries of Q, U and V are factored out by drawing the rows
    of p(u|q) (or the (u, v) row pairs) and of p(x1|u), p(x2|v) as unordered
    multisets; the remaining factors are closed under the relabelling, so no
    distinct joint law is lost.
    """

    def __init__(self, family: str, factors: dict[str, np.ndarray], build: Callable,
                 description: str):
        self.family = family
        self.factors = factors
        self._build = build
        self.description = description
        self.shape = tuple(len(v) for v in factors.values())
        self.size = int(np.prod(self.shape))

    def __len__(self) -> int:
        return self.size

    def kernels(self, ids: np.ndarray) -> Kernels:
        ids = np.asarray(ids, dtype=np.int64)
        if ids.size and (ids.min() < 0 or ids.max() >= self.size):
            raise IndexError("grid index out of range")
        multi = np.unravel_index(ids, self.shape)
        picked = {name: vals[m] for (name, vals), m in zip(self.factors.items(), multi)}
        return self._build(picked)

    def __getitem__(self, i: int):
        return dist_from_kernels(self.family, self.kernels(np.array([i])))

    def batches(self, chunk: int = 20000) -> Iterator[tuple[np.ndarray, Kernels]]:
        for start in range(0, self.size, chunk):
            ids = np.arange(start, min(start + chunk, self.size))
            yield ids, self.kernels(ids)


class GridBudgetError(ValueError):
    """The requested lattice is larger than the enumeration budget."""


def _check_budget(size: int, budget: int):
    if size > budget:
        raise GridBudgetError(f"grid has {size} points, budget is {budget}; use a coarser step")


def one_message_grid(nx1: int, nx2: int, q: int = 2, u: int | None = None, step: int = 4,
                     budget: int = DEFAULT_BUDGET) -> LatticeGrid:
    """Lattice over p(q, x2) p(u|q) p(x1|u); ``step`` k means resolution 1/k."""
    u = nx1 + 1 if u is None else u
    factors = {
        "p_qx2": simplex_lattice(q * nx2, step),
        "p_u_q": row_multisets(simplex_lattice(u, step), q),
        "p_x1_u": row_multisets(simplex_lattice(nx1, step), u),
    }

    def build(f):
        return {"p_qx2": f["p_qx2"].reshape(-1, q, nx2), "p_u_q": f["p_u_q"], "p_x1_u": f["p_x1_u"]}

    g = LatticeGrid("one", factors, build, f"one-message |Q|={q} |U|={u} step=1/{step}")
    _check_budget(g.size, budget)
    return g


def degraded_grid(nx1: int, nx2: int, q: int = 2, step: int = 16,
                  budget: int = DEFAULT_BUDGET) -> LatticeGrid:
    """Lattice over p(q, x2) p(x1|q), stored in one-message form with U = X1."""
    factors = {
        "p_qx2": simplex_lattice(q * nx2, step),
        "p_x1_q": row_multisets(simplex_lattice(nx1, step), q),
    }
    eye = np.eye(nx1)

    def build(f):
        n = len(f["p_qx2"])
        return {"p_qx2": f["p_qx2"].reshape(-1, q, nx2), "p_u_q": f["p_x1_q"],
                "p_x1_u": np.broadcast_to(eye, (n, nx1, nx1))}

    g = LatticeGrid("degraded", factors, build, f"U=X1 |Q|={q} step=1/{step}")
    _check_budget(g.size, budget)
    return g


def two_message_grid(nx1: int, nx2: int, q: int = 2, u: int | None = None, v: int | None = None,
                     step: int = 2, budget: int = DEFAULT_BUDGET) -> LatticeGrid:
    """Lattice over p(q) p(u|q) p(x1|u) p(v|q) p(x2|v)."""
    u = nx1 + 1 if u is None else u
    v = nx2 + 1 if v is None else v
    su, sv = simplex_lattice(u, step), simplex_lattice(v, step)
    pairs = np.concatenate([np.repeat(su, len(sv), axis=0), np.tile(sv, (len(su), 1))], axis=1)
    factors = {
        "p_q": simplex_lattice(q, step),
        "p_uv_q": row_multisets(pairs, q),
        "p_x1_u": row_multisets(simplex_lattice(nx1, step), u),
        "p_x2_v": row_multisets(simplex_lattice(nx2, step), v),
    }

    def build(f):
        return {"p_q": f["p_q"], "p_u_q": f["p_uv_q"][..., :u], "p_v_q": f["p_uv_q"][..., u:],
                "p_x1_u": f["p_x1_u"], "p_x2_v": f["p_x2_v"]}

    g = LatticeGrid("two", factors, build, f"two-message |Q|={q} |U|={u} |V|={v} step=1/{step}")
    _check_budget(g.size, budget)
    return g


FREE_KERNELS = {
    "one": ("p_qx2", "p_u_q", "p_x1_u"),
    "degraded": ("p_qx2", "p_u_q"),
    "two": ("p_q", "p_u_q", "p_x1_u", "p_v_q", "p_x2_v"),
}


def _moves(kern: Kernels, free: tuple[str, ...], delta: float) -> Kernels:
    """All single transfers of up to ``delta`` mass between two cells of one row."""
    cands = []
    for name in free:
        k = kern[name][0]
        rows = k.reshape(1, -1) if name in ("p_qx2", "p_q") else k.reshape(-1, k.shape[-1])
        for r in range(rows.shape[0]):
            for i in range(rows.shape[1]):
                amt = min(delta, rows[r, i])
                if amt <= 0:
                    continue
                for j in range(rows.shape[1]):
                    if j == i:
                        continue
                    new = rows.copy()
                    new[r, i] -= amt
                    new[r, j] += amt
                    cands.append((name, new.reshape(k.shape)))
    out = {name: np.repeat(val, len(cands), axis=0) for name, val in kern.items()}
    for c, (name, new) in enumerate(cands):
        out[name][c] = new
    return out


def _polish(free: tuple[str, ...], best: Kernels, objective, best_val: float) -> tuple[Kernels, float]:
    """Maximize the smallest component of ``objective`` by SLSQP in epigraph form."""
    shapes = [best[name][0].shape for name in free]
    sizes = [int(np.prod(sh)) for sh in shapes]
    cuts = np.cumsum(sizes)[:-1]

    def unpack(x):
        out = dict(best)
        for name, sh, part in zip(free, shapes, np.split(x[:-1], cuts)):
            out[name] = np.clip(part, 0.0, 1.0).reshape((1,) + sh)
        return out

    eqs = []
    for name, sh, off in zip(free, shapes, np.concatenate([[0], cuts])):
        rows = 1 if name in ("p_qx2", "p_q") else sh[0]
        width = sizes[free.index(name)] // rows
        for r in range(rows):
            a = np.zeros(sum(sizes) + 1)
            a[off + r * width: off + (r + 1) * width] = 1.0
            eqs.append(a)
    a_eq = np.array(eqs)
    x0 = np.concatenate([best[name][0].ravel() for name in free] + [[best_val]])
    cons = [{"type": "eq", "fun": lambda x: a_eq @ x - 1.0},
            {"type": "ineq", "fun": lambda x: objective(unpack(x))[:, 0] - x[-1]}]
    bounds = [(0.0, 1.0)] * sum(sizes) + [(None, None)]
    try:
        res = minimize(lambda x: -x[-1], x0, method="SLSQP", bounds=bounds, constraints=cons,
                       options={"maxiter": 200, "ftol": 1e-12})
    except (ValueError, ArithmeticError):
        return best, best_val
    cand = unpack(res.x)
    for name in free:
        k = cand[name]
        k = k / (k.sum() if name in ("p_qx2", "p_q") else k.sum(axis=-1, keepdims=True))
        cand[name] = k
    try:
        val = float(objective(cand).min(axis=0)[0])
    except (ValueError, ArithmeticError):
        return best, best_val
    return (cand, val) if val > best_val else (best, best_val)


def refine(family: str, start: Kernels, objective: Callable[[Kernels], np.ndarray],
           step: float, halvings: int = 6, max_moves: int = 200) -> tuple[Kernels, float]:
    """Maximize the smallest row of ``objective`` (shape (terms, batch)) from ``start``.

    Coordinate ascent over single mass transfers with step halving, then an
    SLSQP polish that can follow ridges where two terms are tied.  Returns
    (kernels, value)."""
    free = FREE_KERNELS[family]
    best = {k: np.array(v[:1], dtype=float) for k, v in start.items()}
    best_val = float(objective(best).min(axis=0)[0])
    delta = step
    for _ in range(halvings + 1):
        for _ in range(max_moves):
            cand = _moves(best, free, delta)
            if not len(next(iter(cand.values()))):
                break
            vals = objective(cand).min(axis=0)
            j = int(np.argmax(vals))
            if vals[j] <= best_val + 1e-13:
                break
            best = {k: v[j:j + 1].copy() for k, v in cand.items()}
            best_val = float(vals[j])
        delta /= 2.0
    return _polish(free, best, objective, best_val)
