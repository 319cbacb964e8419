"""Discrete memoryless two-user channels with three receivers.

A channel is a tensor p(y, y1, y2 | x1, x2) stored with axes
(x1, x2, y, y1, y2).  Y is the destination output, Y1 and Y2 the outputs
overheard by user 1 and user 2.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

import numpy as np
from scipy.optimize import linprog
from scipy.stats import norm

SLICE_TOL = 1e-10
LOAD_TOL = 1e-8
DEGRADE_TOL = 1e-9

RECEIVERS = ("destination", "user1", "user2")
ALPHABETS = ("x1", "x2", "y", "y1", "y2")


class ChannelSpecError(ValueError):
    """Malformed or non-stochastic channel description."""


@dataclass(frozen=True)
class GmacChannel:
    transition: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        t = np.array(self.transition, dtype=float)
        if t.ndim != 5:
            raise ChannelSpecError("transition must have axes (x1, x2, y, y1, y2)")
        if np.any(t < 0):
            raise ChannelSpecError("negative transition probability")
        sums = t.sum(axis=(2, 3, 4))
        if np.max(np.abs(sums - 1.0)) > SLICE_TOL:
            raise ChannelSpecError("an (x1, x2) slice does not sum to 1")
        t.setflags(write=False)
        object.__setattr__(self, "transition", t)

    @property
    def sizes(self) -> dict[str, int]:
        return dict(zip(ALPHABETS, self.transition.shape))

    def to_document(self) -> dict[str, Any]:
        return {"alphabets": self.sizes, "transition": self.transition.tolist()}


@dataclass(frozen=True)
class MarginalChannel:
    receiver: str
    tensor: np.ndarray  # axes (x1, x2, output)

    def __post_init__(self):
        if self.receiver not in RECEIVERS:
            raise ValueError(f"unknown receiver {self.receiver!r}")
        t = np.asarray(self.tensor, dtype=float)
        if np.max(np.abs(t.sum(axis=2) - 1.0)) > SLICE_TOL:
            raise ValueError("marginal channel is not stochastic")
        t.setflags(write=False)
        object.__setattr__(self, "tensor", t)


@dataclass(frozen=True)
class DegradednessReport:
    physically_degraded: bool
    stochastically_degraded: bool
    degrading_kernel: np.ndarray | None  # axes (x2, y, y2)
    residual: float


def load_channel(source: Mapping[str, Any] | str | Path) -> GmacChannel:
    """Build a validated channel from a document or a JSON file path."""
    if isinstance(source, (str, Path)):
        try:
            source = json.loads(Path(source).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ChannelSpecError(f"cannot read channel file: {exc}") from exc
    if not isinstance(source, Mapping) or "alphabets" not in source or "transition" not in source:
        raise ChannelSpecError("channel document needs 'alphabets' and 'transition'")
    alph = source["alphabets"]
    try:
        shape = tuple(int(alph[k]) for k in ALPHABETS)
    except (KeyError, TypeError, ValueError) as exc:
        raise ChannelSpecError(f"bad alphabet sizes: {exc}") from exc
    if min(shape) < 1:
        raise ChannelSpecError("alphabet sizes must be positive")
    try:
        t = np.array(source["transition"], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ChannelSpecError(f"transition is not a numeric array: {exc}") from exc
    if t.shape != shape:
        raise ChannelSpecError(f"transition shape {t.shape} does not match alphabets {shape}")
    if np.any(t < 0):
        raise ChannelSpecError("negative transition probability")
    sums = t.sum(axis=(2, 3, 4))
    if np.max(np.abs(sums - 1.0)) > LOAD_TOL:
        raise ChannelSpecError("an (x1, x2) slice does not sum to 1")
    t = t / sums[:, :, None, None, None]
    return GmacChannel(t, name=str(source.get("name", "custom")))


def marginal(ch: GmacChannel, receiver: str) -> MarginalChannel:
    t = ch.transition
    if receiver == "destination":
        m = t.sum(axis=(3, 4))
    elif receiver == "user1":
        m = t.sum(axis=(2, 4))
    elif receiver == "user2":
        m = t.sum(axis=(2, 3))
    else:
        raise ValueError(f"unknown receiver {receiver!r}")
    return MarginalChannel(receiver, m)


def _joint_y_y2(ch: GmacChannel) -> np.ndarray:
    return ch.transition.sum(axis=3)  # (x1, x2, y, y2)


def is_physically_degraded(ch: GmacChannel, tol: float = DEGRADE_TOL) -> bool:
    """True iff p(y2 | y, x2, x1) does not depend on x1 wherever p(y|x1,x2) > tol."""
    joint = _joint_y_y2(ch)
    py = joint.sum(axis=3)
    nx1, nx2, ny, _ = joint.shape
    for x2 in range(nx2):
        for y in range(ny):
            rows = [joint[x1, x2, y] / py[x1, x2, y] for x1 in range(nx1) if py[x1, x2, y] > tol]
            if rows and np.max(np.ptp(np.array(rows), axis=0)) > tol:
                return False
    return True


def _conditional_kernel(ch: GmacChannel) -> np.ndarray:
    """p(y2 | y, x2) averaged over x1; uniform rows where y is unreachable."""
    joint = _joint_y_y2(ch)
    agg = joint.sum(axis=0)  # (x2, y, y2)
    tot = agg.sum(axis=2, keepdims=True)
    uniform = np.full_like(agg, 1.0 / agg.shape[2])
    return np.where(tot > 0, agg / np.where(tot > 0, tot, 1.0), uniform)


def degradation_residual(ch: GmacChannel, kernel: np.ndarray) -> float:
    """max |sum_y p(y|x1,x2) K(y2|y,x2) - p(y2|x1,x2)| over (x1, x2, y2)."""
    py = marginal(ch, "destination").tensor
    py2 = marginal(ch, "user2").tensor
    pred = np.einsum("abk,bkl->abl", py, kernel)
    return float(np.max(np.abs(pred - py2)))


def _chebyshev_kernel(py: np.ndarray, py2: np.ndarray) -> np.ndarray:
    """Kernel K (y -> y2) minimizing the max violation of py @ K = py2, by LP."""
    nx1, ny = py.shape
    ny2 = py2.shape[1]
    nk = ny * ny2
    nvar = nk + 1
    c = np.zeros(nvar)
    c[-1] = 1.0
    a_ub, b_ub = [], []
    for x1 in range(nx1):
        for l in range(ny2):
            row = np.zeros(nvar)
            row[[k * ny2 + l for k in range(ny)]] = py[x1]
            a_ub.append(np.concatenate([row[:-1], [-1.0]]))
            b_ub.append(py2[x1, l])
            a_ub.append(np.concatenate([-row[:-1], [-1.0]]))
            b_ub.append(-py2[x1, l])
    a_eq = np.zeros((ny, nvar))
    for k in range(ny):
        a_eq[k, k * ny2:(k + 1) * ny2] = 1.0
    res = linprog(c, A_ub=np.array(a_ub), b_ub=np.array(b_ub), A_eq=a_eq, b_eq=np.ones(ny),
                  bounds=[(0, None)] * nvar, method="highs",
                  options={"primal_feasibility_tolerance": 1e-10,
                           "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise RuntimeError(f"kernel search failed: {res.message}")
    k = np.clip(res.x[:nk].reshape(ny, ny2), 0.0, None)
    return k / k.sum(axis=1, keepdims=True)


def find_stochastic_degradation(ch: GmacChannel, tol: float = DEGRADE_TOL) -> DegradednessReport:
    """Search, per x2, for p(y2|y,x2) reproducing p(y2|x1,x2) from p(y|x1,x2)."""
    physical = is_physically_degraded(ch, tol)
    kernel = _conditional_kernel(ch)
    residual = degradation_residual(ch, kernel)
    if residual > tol:
        py = marginal(ch, "destination").tensor
        py2 = marginal(ch, "user2").tensor
        lp = np.stack([_chebyshev_kernel(py[:, x2], py2[:, x2]) for x2 in range(py.shape[1])])
        lp_res = degradation_residual(ch, lp)
        if lp_res < residual:
            kernel, residual = lp, lp_res
    stochastic = residual <= tol or physical
    return DegradednessReport(physical, stochastic, kernel if stochastic else None, residual)


def _check_crossover(p: float, name: str = "p") -> float:
    p = float(p)
    if not 0.0 <= p <= 0.5:
        raise ValueError(f"{name} = {p!r} outside [0, 1/2]")
    return p


def _multiplier_bias() -> np.ndarray:
    t = np.zeros((2, 2, 2, 1, 2))
    for x1 in range(2):
        for x2 in range(2):
            t[x1, x2, x1 * x2, 0, int(x1 <= x2)] = 1.0
    return t


def _degraded_binary(p: float) -> np.ndarray:
    p = _check_crossover(p)
    t = np.zeros((2, 2, 2, 1, 2))
    for x1 in range(2):
        for x2 in range(2):
            y = x1 * x2
            t[x1, x2, y, 0, y] += 1.0 - p
            t[x1, x2, y, 0, 1 - y] += p
    return t


def _adder_bsc(p1: float, p2: float) -> np.ndarray:
    """Y = X1 + X2 in {0,1,2}; user 1 hears X2 through BSC(p1), user 2 hears X1 through BSC(p2)."""
    p1 = _check_crossover(p1, "p1")
    p2 = _check_crossover(p2, "p2")
    t = np.zeros((2, 2, 3, 2, 2))
    for x1 in range(2):
        for x2 in range(2):
            for y1 in range(2):
                for y2 in range(2):
                    w1 = 1.0 - p1 if y1 == x2 else p1
                    w2 = 1.0 - p2 if y2 == x1 else p2
                    t[x1, x2, x1 + x2, y1, y2] = w1 * w2
    return t


def _quantized_levels(mean: float, var: float, edges: np.ndarray) -> np.ndarray:
    cdf = norm.cdf(edges, loc=mean, scale=np.sqrt(var))
    cdf = np.concatenate([[0.0], cdf, [1.0]])
    return np.diff(cdf)


def _quantized_gaussian(P1: float, P2: float, N: float, N2: float, levels: int) -> np.ndarray:
    """Antipodal inputs, destination output quantized to ``levels`` cells, and an
    eavesdropper output that adds independent quantized noise to the quantized
    destination output.  Outputs are drawn independently given the inputs, so the
    pair is stochastically but not physically degraded."""
    if min(P1, P2, N) <= 0 or N2 <= N:
        raise ValueError("need P1, P2, N > 0 and N2 > N")
    span = np.sqrt(P1) + np.sqrt(P2)
    edges = np.linspace(-span, span, levels + 1)[1:-1]
    centers = np.linspace(-span, span, levels)
    amp1 = np.array([-np.sqrt(P1), np.sqrt(P1)])
    amp2 = np.array([-np.sqrt(P2), np.sqrt(P2)])
    py = np.array([[_quantized_levels(a + b, N, edges) for b in amp2] for a in amp1])
    extra = np.array([_quantized_levels(c, N2 - N, edges) for c in centers])
    py2 = np.einsum("abk,kl->abl", py, extra)
    t = np.einsum("abk,abl->abkl", py, py2)[:, :, :, None, :]
    return t


def builtin(name: str, **params: float) -> GmacChannel:
    """Named example channels.

    multiplier_bias   Y = X1*X2, Y2 = 1{X1 <= X2}
    degraded_binary   Y = X1*X2, Y2 = Y xor Bern(p)
    adder_bsc         Y = X1 + X2, Y1 = X2 xor Bern(p1), Y2 = X1 xor Bern(p2)
    quantized_gaussian  binary antipodal inputs, quantized Gaussian outputs
    """
    if name == "multiplier_bias":
        return GmacChannel(_multiplier_bias(), name=name)
    if name == "degraded_binary":
        return GmacChannel(_degraded_binary(params.get("p", 0.1)), name=name)
    if name == "adder_bsc":
        return GmacChannel(_adder_bsc(params.get("p1", 0.1), params.get("p2", 0.1)), name=name)
    if name == "quantized_gaussian":
        t = _quantized_gaussian(params.get("P1", 1.0), params.get("P2", 1.0), params.get("N", 1.0),
                                params.get("N2", 2.0), int(params.get("levels", 4)))
        return GmacChannel(t, name=name)
    raise ValueError(f"unknown builtin channel {name!r}")


BUILTINS = ("multiplier_bias", "degraded_binary", "adder_bsc", "quantized_gaussian")
