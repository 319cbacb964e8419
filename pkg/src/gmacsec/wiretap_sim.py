"""Finite-blocklength simulation of the binning scheme for the generalized MAC.

A codebook has cloud centers q_i, user-1 words x1[i, a, b] and user-2 words
x2[i, s, t].  The row index a (resp. s) carries secret payload, the column
index b (resp. t) is partly random and saturates what the other user can
resolve.  Error rates are Monte Carlo frequencies; equivocation is computed
exactly per trial by enumerating the posterior of the message.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .channel_model import GmacChannel, marginal
from .info_core import FiniteDist, cond_mi_array

SAMPLE_BUDGET = 1_000_000
ENUM_BUDGET = 1 << 20
TYPE_TOL = 1e-12
Z95 = 1.959963984540054

PARTITION = "partition"   # w = (row, cell), column drawn uniformly from the cell
ROW = "row"               # w = row, column drawn uniformly from all columns


class SamplingError(RuntimeError):
    """Rejection sampling ran out of attempts."""


class EnumerationBudgetError(RuntimeError):
    """Exact enumeration over the codebook would be too large."""


def default_eps(n: int) -> float:
    """0.1 up to n = 16, halved per doubling of n beyond that."""
    if n <= 16:
        return 0.1
    return 0.1 / 2 ** math.floor(math.log2(n / 16))


def trial_rng(seed: int, stream: int, index: int = 0) -> np.random.Generator:
    """Independent counter-based generator for (seed, stream, index)."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=(stream, index))
    return np.random.Generator(np.random.Philox(ss))


# ---------------------------------------------------------------- typical sampling

def _pmf(dist) -> np.ndarray:
    if isinstance(dist, FiniteDist):
        if dist.mass.ndim != 1:
            raise ValueError("sample_typical needs a single-variable distribution")
        return np.asarray(dist.mass)
    p = np.asarray(dist, dtype=float)
    if p.ndim != 1 or np.any(p < 0) or abs(p.sum() - 1) > 1e-9:
        raise ValueError("invalid pmf")
    return p


def _draw(p: np.ndarray, u: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(p, axis=-1)
    cdf[..., -1] = 1.0
    if p.ndim == 1:
        return np.searchsorted(cdf, u, side="right")
    return (u[..., None] >= cdf).sum(axis=-1)


def is_typical(seq: np.ndarray, p: np.ndarray, eps: float) -> bool:
    n = len(seq)
    counts = np.bincount(seq, minlength=len(p))
    return bool(np.all(np.abs(counts / n - p) <= eps + TYPE_TOL) and np.all(counts[p == 0] == 0))


def sample_typical(dist, n: int, eps: float, rng: np.random.Generator,
                   budget: int = SAMPLE_BUDGET) -> np.ndarray:
    """i.i.d. draws rejected until every letter frequency is within ``eps`` of its probability."""
    if n < 1 or eps <= 0:
        raise ValueError("need n >= 1 and eps > 0")
    p = _pmf(dist)
    tried = 0
    chunk = 256
    while tried < budget:
        m = min(chunk, budget - tried)
        cand = _draw(p, rng.random((m, n)))
        counts = np.stack([(cand == x).sum(axis=1) for x in range(len(p))], axis=1)
        ok = np.all(np.abs(counts / n - p) <= eps + TYPE_TOL, axis=1)
        hit = np.flatnonzero(ok)
        if len(hit):
            return cand[hit[0]]
        tried += m
        chunk = min(chunk * 2, 1 << 14)
    raise SamplingError(f"no {eps}-typical sequence of length {n} in {budget} attempts")


def sample_conditional_typical(p_x_given_c: np.ndarray, cond: np.ndarray, eps: float,
                               rng: np.random.Generator, budget: int = SAMPLE_BUDGET) -> np.ndarray:
    """Draw x_i ~ p(.|c_i) until |N(c, x)/n - p(x|c) N(c)/n| <= eps for every (c, x)."""
    p = np.asarray(p_x_given_c, dtype=float)
    cond = np.asarray(cond)
    n = len(cond)
    nc, nx = p.shape
    target = np.bincount(cond, minlength=nc)[:, None] * p / n
    rows = p[cond]
    tried = 0
    chunk = 256
    while tried < budget:
        m = min(chunk, budget - tried)
        cand = _draw(rows[None], rng.random((m, n)))
        joint = cond[None, :] * nx + cand
        counts = np.stack([(joint == z).sum(axis=1) for z in range(nc * nx)], axis=1) / n
        ok = np.all(np.abs(counts - target.reshape(-1)) <= eps + TYPE_TOL, axis=1)
        hit = np.flatnonzero(ok)
        if len(hit):
            return cand[hit[0]]
        tried += m
        chunk = min(chunk * 2, 1 << 14)
    raise SamplingError(f"no conditionally {eps}-typical sequence of length {n} in {budget} attempts")


# ---------------------------------------------------------------- inputs and codebooks

@dataclass(frozen=True)
class InputDistribution:
    """p(q) p(x1|q) p(x2|q)."""

    p_q: np.ndarray
    p_x1_q: np.ndarray
    p_x2_q: np.ndarray

    def __post_init__(self):
        for name in ("p_q", "p_x1_q", "p_x2_q"):
            a = np.asarray(getattr(self, name), dtype=float)
            if np.any(a < 0) or np.max(np.abs(a.sum(axis=-1) - 1)) > 1e-12:
                raise ValueError(f"{name} is not a probability kernel")
            a.setflags(write=False)
            object.__setattr__(self, name, a)
        if self.p_x1_q.shape[0] != len(self.p_q) or self.p_x2_q.shape[0] != len(self.p_q):
            raise ValueError("kernel rows must match |Q|")

    def joint(self, ch: GmacChannel) -> np.ndarray:
        """Mass over (q, x1, x2, y, y1, y2)."""
        if (ch.sizes["x1"], ch.sizes["x2"]) != (self.p_x1_q.shape[1], self.p_x2_q.shape[1]):
            raise ValueError("input alphabets do not match the channel")
        return np.einsum("q,qa,qb,abxyz->qabxyz", self.p_q, self.p_x1_q, self.p_x2_q, ch.transition)

    def information(self, ch: GmacChannel) -> dict[str, float]:
        """Leak and MAC terms: leak1 = I(X1;Y2|X2,Q), leak2 = I(X2;Y1|X1,Q),
        i1 = I(X1;Y|X2,Q), i2 = I(X2;Y|X1,Q), i12 = I(X1,X2;Y|Q), i_all = I(X1,X2;Y)."""
        j = self.joint(ch)
        mi = lambda a, b, c=(): float(cond_mi_array(j, a, b, c))
        return {"leak1": mi((1,), (5,), (2, 0)), "leak2": mi((2,), (4,), (1, 0)),
                "i1": mi((1,), (3,), (2, 0)), "i2": mi((2,), (3,), (1, 0)),
                "i12": mi((1, 2), (3,), (0,)), "i_all": mi((1, 2), (3,))}


def superposition_inputs(alpha: float) -> InputDistribution:
    """Q uniform, X2 = 1, X1 = Q xor Bern(alpha): the optimizer for the degraded binary channel."""
    if not 0 <= alpha <= 0.5:
        raise ValueError("alpha outside [0, 1/2]")
    return InputDistribution(np.array([0.5, 0.5]),
                             np.array([[1 - alpha, alpha], [alpha, 1 - alpha]]),
                             np.array([[0.0, 1.0], [0.0, 1.0]]))


@dataclass(frozen=True)
class PartitionMap:
    domain: int
    range: int
    assignment: np.ndarray

    def cell(self, j: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == j)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.range)

    def balance(self) -> float:
        s = self.sizes()
        return float(s.max() / s.min())


def _round_robin(domain: int, rng_size: int) -> PartitionMap:
    if not 1 <= rng_size <= domain:
        raise ValueError(f"cannot split {domain} items into {rng_size} nonempty cells")
    a = np.arange(domain) % rng_size
    a.setflags(write=False)
    return PartitionMap(domain, rng_size, a)


def make_partitions(B: int, J: int, T: int, K: int) -> tuple[PartitionMap, PartitionMap]:
    """Round-robin maps of columns onto cells; cell sizes differ by at most one."""
    return _round_robin(B, J), _round_robin(T, K)


@dataclass(frozen=True)
class UserCode:
    """Message structure of one user's part of the codebook."""

    rows: int          # A (or S)
    cols: int          # B (or T)
    cells: int         # J (or K); 1 for the row scheme
    messages: int      # number of distinct messages
    scheme: str        # PARTITION or ROW
    regime: str        # "binning", "row", or "no_secrecy"

    def split(self, w: int) -> tuple[int, int]:
        """(row, cell) addressed by message w."""
        if not 0 <= w < self.messages:
            raise IndexError(f"message {w} out of range")
        if self.scheme == PARTITION:
            return w // self.cells, w % self.cells
        return w, 0


def _user_code(n: int, r_msg: float, r_code: float, leak: float) -> UserCode:
    size = lambda r: max(1, int(round(2.0 ** (n * r))))
    if r_msg > r_code + 1e-12:
        raise ValueError("message rate exceeds codebook rate")
    if r_code <= leak:
        rows = size(r_code)
        return UserCode(rows, 1, 1, min(size(r_msg), rows), ROW, "no_secrecy")
    rows, cols = size(r_code - leak), size(leak)
    if r_msg <= r_code - leak:
        return UserCode(rows, cols, 1, min(size(r_msg), rows), ROW, "row")
    cells = min(size(r_msg - (r_code - leak)), cols)
    return UserCode(rows, cols, cells, rows * cells, PARTITION, "binning")


@dataclass(frozen=True)
class Codebook:
    n: int
    q: np.ndarray          # (M0, n)
    x1: np.ndarray         # (M0, A, B, n)
    x2: np.ndarray         # (M0, S, T, n)
    user1: UserCode
    user2: UserCode
    eps: float | None = None
    info: dict = field(default_factory=dict)
    p_joint: np.ndarray | None = None   # (q, x1, x2, y, y1, y2) law used for typicality decoding

    def __post_init__(self):
        m0 = self.q.shape[0]
        if self.x1.shape[:3] != (m0, self.user1.rows, self.user1.cols) or self.x1.shape[3] != self.n:
            raise ValueError("user-1 words do not match the message structure")
        if self.x2.shape[:3] != (m0, self.user2.rows, self.user2.cols) or self.x2.shape[3] != self.n:
            raise ValueError("user-2 words do not match the message structure")
        for a in (self.q, self.x1, self.x2):
            a.setflags(write=False)

    @property
    def M0(self) -> int:
        return self.q.shape[0]

    @property
    def A(self) -> int:
        return self.user1.rows

    @property
    def B(self) -> int:
        return self.user1.cols

    @property
    def S(self) -> int:
        return self.user2.rows

    @property
    def T(self) -> int:
        return self.user2.cols

    def realized_rates(self) -> dict[str, float]:
        n = self.n
        return {"R0": math.log2(self.M0) / n,
                "R1": math.log2(self.user1.messages) / n,
                "R2": math.log2(self.user2.messages) / n,
                "R1_code": math.log2(self.A * self.B) / n,
                "R2_code": math.log2(self.S * self.T) / n}

    @classmethod
    def from_words(cls, q, x1, x2, cells1: int = 1, cells2: int = 1, scheme1: str = PARTITION,
                   scheme2: str = PARTITION, messages1: int | None = None,
                   messages2: int | None = None, info: dict | None = None) -> "Codebook":
        """Wrap hand-made words; shapes (M0, n), (M0, A, B, n), (M0, S, T, n)."""
        q, x1, x2 = (np.array(v, dtype=np.int64) for v in (q, x1, x2))
        n = q.shape[1]

        def code(words, cells, scheme, messages):
            rows, cols = words.shape[1:3]
            if scheme == PARTITION:
                return UserCode(rows, cols, cells, rows * cells, PARTITION, "binning")
            return UserCode(rows, cols, 1, messages or rows, ROW, "row")

        return cls(n, q, x1, x2, code(x1, cells1, scheme1, messages1),
                   code(x2, cells2, scheme2, messages2), None, dict(info or {}))


def build_codebook(ch: GmacChannel, d: InputDistribution, n: int, R0: float, R1p: float,
                   R2p: float, eps: float | None = None, seed: int = 0, R1: float | None = None,
                   R2: float | None = None) -> Codebook:
    """Random typical codebook with codebook rates R1p, R2p and message rates R1, R2
    (default: equal to the codebook rates)."""
    if n < 1:
        raise ValueError("blocklength must be positive")
    eps = default_eps(n) if eps is None else eps
    info = d.information(ch)
    R1 = R1p if R1 is None else R1
    R2 = R2p if R2 is None else R2
    u1 = _user_code(n, R1, R1p, info["leak1"])
    u2 = _user_code(n, R2, R2p, info["leak2"])
    m0 = max(1, int(round(2.0 ** (n * R0))))
    words = m0 * (1 + u1.rows * u1.cols + u2.rows * u2.cols)
    if words > ENUM_BUDGET:
        raise EnumerationBudgetError(f"{words} codewords exceed the enumeration budget")
    rng = trial_rng(seed, 0)
    q = np.stack([sample_typical(d.p_q, n, eps, rng) for _ in range(m0)])
    x1 = np.empty((m0, u1.rows, u1.cols, n), dtype=np.int64)
    x2 = np.empty((m0, u2.rows, u2.cols, n), dtype=np.int64)
    for i in range(m0):
        for a in range(u1.rows):
            for b in range(u1.cols):
                x1[i, a, b] = sample_conditional_typical(d.p_x1_q, q[i], eps, rng)
        for s in range(u2.rows):
            for t in range(u2.cols):
                x2[i, s, t] = sample_conditional_typical(d.p_x2_q, q[i], eps, rng)
    return Codebook(n, q, x1, x2, u1, u2, eps, info, d.joint(ch))


# ---------------------------------------------------------------- encoding and channel

def encode(cb: Codebook, g1: PartitionMap, g2: PartitionMap, w0: int, w1: int, w2: int,
           rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, tuple[int, int, int, int, int]]:
    """Codewords for (w0, w1, w2) and the index tuple (i, a, b, s, t) actually used."""
    if not 0 <= w0 < cb.M0:
        raise IndexError(f"common message {w0} out of range")
    a, j = cb.user1.split(w1)
    s, k = cb.user2.split(w2)
    b = _pick(cb.user1, g1, j, rng)
    t = _pick(cb.user2, g2, k, rng)
    return cb.x1[w0, a, b], cb.x2[w0, s, t], (w0, a, b, s, t)


def _pick(code: UserCode, g: PartitionMap, cell: int, rng) -> int:
    if code.scheme == PARTITION:
        members = g.cell(cell)
        return int(members[rng.integers(len(members))])
    return int(rng.integers(code.cols))


def transmit(ch: GmacChannel, x1: np.ndarray, x2: np.ndarray,
             rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Memoryless channel use per symbol; returns (y, y1, y2)."""
    t = ch.transition
    ny, ny1, ny2 = t.shape[2:]
    rows = t.reshape(t.shape[0], t.shape[1], -1)[x1, x2]
    idx = _draw(rows, rng.random(len(x1)))
    idx = np.minimum(idx, ny * ny1 * ny2 - 1)
    y, y1, y2 = np.unravel_index(idx, (ny, ny1, ny2))
    return y, y1, y2


# ---------------------------------------------------------------- decoders

def _log(p: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore"):
        return np.log(p)


class _Scorer:
    """Log-likelihoods of candidate word pairs against an output sequence."""

    def __init__(self, ch: GmacChannel, receiver: str):
        t = marginal(ch, receiver).tensor
        self.nx2 = t.shape[1]
        self.logtab = _log(t.reshape(-1, t.shape[2]))  # (x1 * |X2| + x2, output)

    def score(self, pairs: np.ndarray, out: np.ndarray) -> np.ndarray:
        lp = self.logtab[:, out]                          # (pairs, n)
        return lp[pairs, np.arange(len(out))].sum(axis=-1)


def _pair_index(x1: np.ndarray, x2: np.ndarray, nx2: int) -> np.ndarray:
    return x1 * nx2 + x2


def _typical_mask(cb: Codebook, q: np.ndarray, x1: np.ndarray, x2: np.ndarray, out: np.ndarray,
                  receiver_axis: int, eps: float) -> np.ndarray:
    """Joint typicality of (q, x1, x2, out) for broadcast candidate words."""
    if cb.p_joint is None:
        raise ValueError("typicality decoding needs the codebook's input law")
    keep = (0, 1, 2, receiver_axis)
    drop = tuple(ax for ax in range(6) if ax not in keep)
    p = cb.p_joint.sum(axis=drop)
    nq, n1, n2, no = p.shape
    z = ((q * n1 + x1) * n2 + x2) * no + out
    n = z.shape[-1]
    flat = z.reshape(-1, n)
    counts = np.zeros((flat.shape[0], p.size))
    np.add.at(counts, (np.arange(flat.shape[0])[:, None], flat), 1.0)
    pf = p.reshape(-1)
    ok = np.all(np.abs(counts / n - pf) <= eps + TYPE_TOL, axis=1) & np.all(counts[:, pf == 0] == 0, axis=1)
    return ok.reshape(z.shape[:-1])


def _ml_or_typical(scores: np.ndarray, typical: np.ndarray | None) -> int | None:
    if typical is None:
        return int(np.argmax(scores))
    hits = np.flatnonzero(typical.reshape(-1))
    return int(hits[0]) if len(hits) == 1 else None


def decode_destination(cb: Codebook, ch: GmacChannel, y: np.ndarray, mode: str = "map",
                       eps: float | None = None, _scorer: _Scorer | None = None):
    """Index tuple (i, a, b, s, t) from the destination output, or None on a
    typicality failure.  ``map`` is exact maximum likelihood with ties to the
    lowest index."""
    rows1 = cb.user1.messages if cb.user1.scheme == ROW else cb.A
    rows2 = cb.user2.messages if cb.user2.scheme == ROW else cb.S
    x1 = cb.x1[:, :rows1][:, :, :, None, None, :]     # (M0, A, B, 1, 1, n)
    x2 = cb.x2[:, :rows2][:, None, None, :, :, :]     # (M0, 1, 1, S, T, n)
    size = cb.M0 * rows1 * cb.B * rows2 * cb.T
    if size > ENUM_BUDGET:
        raise EnumerationBudgetError(f"{size} index tuples exceed the decoding budget")
    shape = (cb.M0, rows1, cb.B, rows2, cb.T)
    if mode == "map":
        sc = _scorer or _Scorer(ch, "destination")
        scores = sc.score(_pair_index(x1, x2, sc.nx2), y)
        flat = _ml_or_typical(scores, None)
    elif mode == "typicality":
        q = cb.q[:, None, None, None, None, :]
        x1b, x2b = np.broadcast_arrays(x1, x2)
        mask = _typical_mask(cb, np.broadcast_to(q, x1b.shape), x1b, x2b,
                             np.broadcast_to(y, x1b.shape), 3, eps or cb.eps or default_eps(cb.n))
        flat = _ml_or_typical(None, mask)
    else:
        raise ValueError(f"unknown decoding mode {mode!r}")
    return None if flat is None else tuple(int(v) for v in np.unravel_index(flat, shape))


def decode_eavesdropper(cb: Codebook, ch: GmacChannel, y2: np.ndarray, known: tuple[int, int, int, int],
                        mode: str = "map", eps: float | None = None, _scorer: _Scorer | None = None):
    """Column index b of user 1's word, decoded by user 2 from y2 knowing (i, a, s, t)."""
    i, a, s, t = known
    return _decode_column(cb, ch, "user2", y2, cb.x1[i, a], cb.x2[i, s, t][None], cb.q[i], mode, eps,
                          swap=False, scorer=_scorer)


def decode_user1_side(cb: Codebook, ch: GmacChannel, y1: np.ndarray, known: tuple[int, int, int, int],
                      mode: str = "map", eps: float | None = None, _scorer: _Scorer | None = None):
    """Column index t of user 2's word, decoded by user 1 from y1 knowing (i, a, b, s)."""
    i, a, b, s = known
    return _decode_column(cb, ch, "user1", y1, cb.x2[i, s], cb.x1[i, a, b][None], cb.q[i], mode, eps,
                          swap=True, scorer=_scorer)


def _decode_column(cb, ch, receiver, out, cands, other, q, mode, eps, swap, scorer):
    if len(cands) == 1:
        return 0
    x1, x2 = (other, cands) if swap else (cands, other)
    if mode == "map":
        sc = scorer or _Scorer(ch, receiver)
        return _ml_or_typical(sc.score(_pair_index(x1, x2, sc.nx2), out), None)
    if mode == "typicality":
        x1b, x2b = np.broadcast_arrays(x1, x2)
        axis = 4 if receiver == "user1" else 5
        mask = _typical_mask(cb, np.broadcast_to(q, x1b.shape), x1b, x2b, np.broadcast_to(out, x1b.shape),
                             axis, eps or cb.eps or default_eps(cb.n))
        return _ml_or_typical(None, mask)
    raise ValueError(f"unknown decoding mode {mode!r}")


# ---------------------------------------------------------------- equivocation

def _posterior_entropy(loglik: np.ndarray, code: UserCode, g: PartitionMap) -> float:
    """Entropy in bits of the message posterior, given log-likelihoods of every
    (row, column) word of the known cloud; the random column choice is marginalized."""
    rows = code.messages if code.scheme == ROW else code.rows
    ll = loglik[:rows]
    if code.scheme == PARTITION:
        sizes = g.sizes()
        w = ll - np.log(sizes[g.assignment])[None, :]
        top = np.max(w)
        if not np.isfinite(top):
            raise ArithmeticError("observed output has zero likelihood under every message")
        cellsum = np.zeros((ll.shape[0], code.cells))
        np.add.at(cellsum, (slice(None), g.assignment), np.exp(w - top))
        post = cellsum.reshape(-1)
    else:
        top = np.max(ll)
        if not np.isfinite(top):
            raise ArithmeticError("observed output has zero likelihood under every message")
        post = np.exp(ll - top).sum(axis=1)
    post = post / post.sum()
    nz = post[post > 0]
    return float(-(nz * np.log2(nz)).sum()) + 0.0


@dataclass
class SimStats:
    trials: int
    lam: float
    lam1: float | None
    lam2: float | None
    equivocation1: float
    equivocation2: float
    lam_hw: float
    lam1_hw: float | None
    lam2_hw: float | None
    equivocation1_hw: float
    equivocation2_hw: float
    meta: dict = field(default_factory=dict)

    def record(self) -> dict[str, Any]:
        keys = ("trials", "lam", "lam1", "lam2", "equivocation1", "equivocation2", "lam_hw",
                "lam1_hw", "lam2_hw", "equivocation1_hw", "equivocation2_hw")
        return {**{k: getattr(self, k) for k in keys}, **self.meta}


def _prop(k: int, m: int) -> tuple[float, float]:
    p = k / m
    return p, Z95 * math.sqrt(p * (1 - p) / m)


def _mean(v: list[float]) -> tuple[float, float]:
    a = np.asarray(v)
    sd = float(a.std(ddof=1)) if len(a) > 1 else 0.0
    return float(a.mean()), Z95 * sd / math.sqrt(len(a))


def measure_equivocation(cb: Codebook, g1: PartitionMap, g2: PartitionMap, ch: GmacChannel,
                         trials: int, seed: int, mode: str = "map", eps: float | None = None) -> SimStats:
    """Run ``trials`` independent transmissions with per-trial generator streams.

    Reports destination error rate lam, the column-decoding error rates lam1
    (user 2 on user 1's column) and lam2, and the exact per-symbol equivocations
    H(W1 | Y2^n, X2^n, W0, W2)/n and H(W2 | Y1^n, X1^n, W0, W1)/n.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    for code, g in ((cb.user1, g1), (cb.user2, g2)):
        if code.scheme == PARTITION and (g.domain != code.cols or g.range != code.cells):
            raise ValueError("partition map does not match the codebook")
        if code.rows * code.cols > ENUM_BUDGET:
            raise EnumerationBudgetError("posterior enumeration exceeds the budget")
    dest, s1, s2 = _Scorer(ch, "destination"), _Scorer(ch, "user1"), _Scorer(ch, "user2")
    err = err1 = err2 = 0
    eq1, eq2 = [], []
    n = cb.n
    for k in range(trials):
        rng = trial_rng(seed, 1, k)
        w0 = int(rng.integers(cb.M0))
        w1 = int(rng.integers(cb.user1.messages))
        w2 = int(rng.integers(cb.user2.messages))
        x1, x2, (i, a, b, s, t) = encode(cb, g1, g2, w0, w1, w2, rng)
        y, y1, y2 = transmit(ch, x1, x2, rng)
        if decode_destination(cb, ch, y, mode, eps, dest) != (i, a, b, s, t):
            err += 1
        if decode_eavesdropper(cb, ch, y2, (i, a, s, t), mode, eps, s2) != b:
            err1 += 1
        if decode_user1_side(cb, ch, y1, (i, a, b, s), mode, eps, s1) != t:
            err2 += 1
        ll1 = s2.score(_pair_index(cb.x1[i], x2, s2.nx2), y2)
        eq1.append(_posterior_entropy(ll1, cb.user1, g1) / n)
        ll2 = s1.score(_pair_index(x1, cb.x2[i], s1.nx2), y1)
        eq2.append(_posterior_entropy(ll2, cb.user2, g2) / n)
    lam, lam_hw = _prop(err, trials)
    lam1, lam1_hw = _prop(err1, trials) if cb.user1.regime != "no_secrecy" else (None, None)
    lam2, lam2_hw = _prop(err2, trials) if cb.user2.regime != "no_secrecy" else (None, None)
    e1, e1_hw = _mean(eq1)
    e2, e2_hw = _mean(eq2)
    rates = cb.realized_rates()
    meta = {"seed": seed, "n": n, "mode": mode, "realized_rates": rates,
            "regimes": {"user1": cb.user1.regime, "user2": cb.user2.regime},
            "sizes": {"M0": cb.M0, "A": cb.A, "B": cb.B, "S": cb.S, "T": cb.T,
                      "J": cb.user1.cells, "K": cb.user2.cells},
            "equivocation1_max": max(eq1), "equivocation2_max": max(eq2),
            "equivocation1_min": min(eq1), "equivocation2_min": min(eq2)}
    if cb.info:
        meta["info"] = dict(cb.info)
        meta["target1"] = (max(rates["R1_code"] - cb.info["leak1"], 0.0)
                           if cb.user1.regime != "no_secrecy" else 0.0)
        meta["target2"] = (max(rates["R2_code"] - cb.info["leak2"], 0.0)
                           if cb.user2.regime != "no_secrecy" else 0.0)
    return SimStats(trials, lam, lam1, lam2, e1, e2, lam_hw, lam1_hw, lam2_hw, e1_hw, e2_hw, meta)


def check_invariants(stats: SimStats, tol: float = 1e-9) -> list[str]:
    """Violations of the hard guarantees (empty when all hold)."""
    bad = []
    r = stats.meta.get("realized_rates", {})
    for key, rate in (("equivocation1", "R1"), ("equivocation2", "R2")):
        if rate in r and stats.meta.get(f"{key}_max", 0.0) > r[rate] + tol:
            bad.append(f"{key} exceeds the message rate {r[rate]}")
        if getattr(stats, key) < -tol:
            bad.append(f"{key} is negative")
    for key in ("lam", "lam1", "lam2"):
        v = getattr(stats, key)
        if v is not None and not 0 <= v <= 1:
            bad.append(f"{key} outside [0, 1]")
    return bad


def corner_codebook() -> tuple[Codebook, PartitionMap, PartitionMap]:
    """Single-letter code for the multiplier/bias channel: W1 = 0 sends
    (x1, x2) = (0, 1), W1 = 1 sends (1, 1).  User 2 always sees Y2 = 1."""
    cb = Codebook.from_words(q=[[0]], x1=[[[[0]], [[1]]]], x2=[[[[1]]]])
    g1, g2 = make_partitions(1, 1, 1, 1)
    return cb, g1, g2


def simulate(ch: GmacChannel, d: InputDistribution, n: int, R0: float, R1p: float, R2p: float,
             trials: int, seed: int, R1: float | None = None, R2: float | None = None,
             eps: float | None = None, mode: str = "map") -> tuple[SimStats, Codebook]:
    """Build a codebook from ``seed``, partition it, and measure it."""
    cb = build_codebook(ch, d, n, R0, R1p, R2p, eps, seed, R1, R2)
    g1, g2 = make_partitions(cb.B, cb.user1.cells, cb.T, cb.user2.cells)
    return measure_equivocation(cb, g1, g2, ch, trials, seed, mode, eps), cb
