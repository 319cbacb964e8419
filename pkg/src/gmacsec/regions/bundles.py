"""Mutual-information terms of the region formulas, evaluated over batches."""
from __future__ import annotations

from dataclasses import dataclass, fields

import numpy as np

from ..channel_model import GmacChannel, marginal
from ..info_core import cond_mi_array
from .distributions import Kernels, OneMessageDist, TwoMessageDist


def _check_alphabets(ch: GmacChannel, nx1: int, nx2: int):
    s = ch.sizes
    if (s["x1"], s["x2"]) != (nx1, nx2):
        raise ValueError(f"distribution inputs ({nx1}, {nx2}) do not match channel ({s['x1']}, {s['x2']})")


@dataclass(frozen=True)
class OneMessageBundle:
    """i_u_y = I(U;Y|X2,Q), i_u_y2 = I(U;Y2|X2,Q), i_sum = I(U,X2,Q;Y),
    i_u_y_v = I(U;Y|X2,V) when a V kernel is present."""

    i_u_y: np.ndarray
    i_u_y2: np.ndarray
    i_sum: np.ndarray
    i_u_y_v: np.ndarray | None = None

    def item(self, i: int = 0) -> "OneMessageBundle":
        return OneMessageBundle(*(None if getattr(self, f.name) is None
                                  else float(np.atleast_1d(getattr(self, f.name))[i]) for f in fields(self)))


@dataclass(frozen=True)
class TwoMessageBundle:
    """i_u = I(U;Y|V,Q), i_v = I(V;Y|U,Q), i_uv = I(U,V;Y|Q), i_all = I(U,V,Q;Y),
    leak1 = I(U;Y2|X2,V,Q), leak2 = I(V;Y1|X1,U,Q), plus i_u_q = I(U;Y|Q) and
    i_v_q = I(V;Y|Q) used to classify the region geometry."""

    i_u: np.ndarray
    i_v: np.ndarray
    i_uv: np.ndarray
    i_all: np.ndarray
    leak1: np.ndarray
    leak2: np.ndarray
    i_u_q: np.ndarray | None = None
    i_v_q: np.ndarray | None = None

    def item(self, i: int = 0) -> "TwoMessageBundle":
        return TwoMessageBundle(*(None if getattr(self, f.name) is None
                                  else float(np.atleast_1d(getattr(self, f.name))[i]) for f in fields(self)))


def one_message_terms(ch: GmacChannel, kern: Kernels) -> OneMessageBundle:
    p_qx2, p_u_q, p_x1_u = kern["p_qx2"], kern["p_u_q"], kern["p_x1_u"]
    _check_alphabets(ch, p_x1_u.shape[-1], p_qx2.shape[-1])
    py = marginal(ch, "destination").tensor
    py2 = marginal(ch, "user2").tensor
    joint = np.einsum("bqx,bqu,buk->bqukx", p_qx2, p_u_q, p_x1_u)
    jy = np.einsum("bqukx,kxy->bquxy", joint, py)      # (q, u, x2, y)
    jy2 = np.einsum("bqukx,kxz->bquxz", joint, py2)    # (q, u, x2, y2)
    i_u_y = cond_mi_array(jy, [1], [3], [0, 2], batch=1)
    i_u_y2 = cond_mi_array(jy2, [1], [3], [0, 2], batch=1)
    i_sum = cond_mi_array(jy, [0, 1, 2], [3], batch=1)
    i_u_y_v = None
    if "p_v_q" in kern:
        jv = np.einsum("bquxy,bqv->bqvuxy", jy, kern["p_v_q"])  # (q, v, u, x2, y)
        i_u_y_v = cond_mi_array(jv, [2], [4], [3, 1], batch=1)
    return OneMessageBundle(i_u_y, i_u_y2, i_sum, i_u_y_v)


def two_message_terms(ch: GmacChannel, kern: Kernels) -> TwoMessageBundle:
    _check_alphabets(ch, kern["p_x1_u"].shape[-1], kern["p_x2_v"].shape[-1])
    py = marginal(ch, "destination").tensor
    py1 = marginal(ch, "user1").tensor
    py2 = marginal(ch, "user2").tensor
    joint = np.einsum("bq,bqu,buk,bqv,bvx->bquvkx", kern["p_q"], kern["p_u_q"], kern["p_x1_u"],
                      kern["p_v_q"], kern["p_x2_v"], optimize=True)
    jy = np.einsum("bquvkx,kxy->bquvy", joint, py, optimize=True)       # (q, u, v, y)
    jy2 = np.einsum("bquvkx,kxz->bquvxz", joint, py2, optimize=True)    # (q, u, v, x2, y2)
    jy1 = np.einsum("bquvkx,kxz->bquvkz", joint, py1, optimize=True)    # (q, u, v, x1, y1)
    return TwoMessageBundle(
        i_u=cond_mi_array(jy, [1], [3], [0, 2], batch=1),
        i_v=cond_mi_array(jy, [2], [3], [0, 1], batch=1),
        i_uv=cond_mi_array(jy, [1, 2], [3], [0], batch=1),
        i_all=cond_mi_array(jy, [0, 1, 2], [3], batch=1),
        leak1=cond_mi_array(jy2, [1], [4], [0, 2, 3], batch=1),
        leak2=cond_mi_array(jy1, [2], [4], [0, 1, 3], batch=1),
        i_u_q=cond_mi_array(jy, [1], [3], [0], batch=1),
        i_v_q=cond_mi_array(jy, [2], [3], [0], batch=1),
    )


def mi_bundle_one_message(ch: GmacChannel, d: OneMessageDist) -> OneMessageBundle:
    return one_message_terms(ch, d.kernels()).item()


def mi_bundle_two_message(ch: GmacChannel, d: TwoMessageDist) -> TwoMessageBundle:
    return two_message_terms(ch, d.kernels()).item()
