"""Curvature tensors of the canonical connections.

The three curvatures of a connection with horizontal coefficients H, vertical
coefficients V, and nonlinear part N are the horizontal-horizontal (R),
horizontal-vertical (P), and vertical-vertical (S) blocks of the curvature
operator with the sign convention

    K(X, Y) rho(Z) = -D_X D_Y rho(Z) + D_Y D_X rho(Z) + D_[X,Y] rho(Z).

Slot order repository-wide: [value, transported(Z), first arg(X), second arg(Y)].

Two evaluation routes are provided.  ``curvature_at`` uses the expanded index
formulas (the fast path).  ``curvature_defining`` pushes coordinate lifts
through the definition verbatim — nested covariant derivatives plus a Lie
bracket computed numerically from the actual lifted vector fields — and is the
semantic anchor the fast path is tested against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .connection import KINDS
from .geometry import get_bundle, spray_jets
from .jets import Point, VectorFieldTM, const_jet, jt_stack, lie_bracket
from .metric import FinslerStructure, MetricAtPoint

_MIN_ORDER = {"cartan": 4, "chern": 4, "berwald": 5, "hashiguchi": 5}


@dataclass(frozen=True)
class CurvaturePack:
    """All curvature data of one connection kind at one point."""

    kind: str
    R: np.ndarray       # (n,n,n,n) horizontal-horizontal
    P: np.ndarray       # (n,n,n,n) mixed
    S: np.ndarray       # (n,n,n,n) vertical-vertical
    Rhat: np.ndarray    # (n,n,n)  R contracted with y in the transported slot
    Phat: np.ndarray
    Shat: np.ndarray
    Ric_h: np.ndarray   # (n,n)
    Ric_v: np.ndarray
    Sc_h: float
    Sc_v: float
    R_low: np.ndarray   # (n,n,n,n) fully lowered, slots (X, Y, Z, W)
    P_low: np.ndarray
    S_low: np.ndarray


def _curvature_jets(bundle, kind: str):
    """R, P, S as value arrays from the index formulas, via bundle jets."""
    n = bundle.n
    H = bundle.horizontal_jet(kind)
    V = bundle.vertical_jet(kind)
    N = bundle.N

    dH = bundle.delta(H)            # [i][j][l][c] = delta_c H^i_jl
    dH_v = dH.value
    Hv = H.value
    R = (-dH_v.transpose(0, 1, 3, 2) + dH_v
         - np.einsum("mjl,imk->ijkl", Hv, Hv)
         + np.einsum("mjk,iml->ijkl", Hv, Hv))
    dyH = H.grad(bundle.ys).value   # [i][j][k][l] = dot-partial_l H^i_jk
    dyN = bundle.Gder.value         # [m][k][l] = dot-partial_l N^m_k

    if V is None:
        P = dyH
        S = np.zeros((n,) * 4)
    else:
        Vv = V.value
        rr = bundle.rr.value        # [m][k][l]
        R = R - np.einsum("mkl,ijm->ijkl", rr, Vv)
        dV = bundle.delta(V).value  # [i][j][l][c] = delta_c V^i_jl
        P = (-dV.transpose(0, 1, 3, 2) + dyH
             - np.einsum("mjl,imk->ijkl", Vv, Hv)
             + np.einsum("mjk,iml->ijkl", Hv, Vv)
             + np.einsum("mkl,ijm->ijkl", dyN, Vv))
        dyV = V.grad(bundle.ys).value
        S = (-dyV.transpose(0, 1, 3, 2) + dyV
             - np.einsum("mjl,imk->ijkl", Vv, Vv)
             + np.einsum("mjk,iml->ijkl", Vv, Vv))
    return R, P, S


def ricci_scalars(pack_or_tensors, m: MetricAtPoint):
    """Ricci tensors and scalar curvatures from curvature tensors and a metric.

    The vertical Ricci tensor realizes the trace over the second curvature
    argument: Ric_v[a][b] = sum_m S[m][b][a][m] with a the first argument and
    b the transported vector; the horizontal one does the same with R.  The
    scalars raise with the inverse metric.
    """
    if isinstance(pack_or_tensors, CurvaturePack):
        R, S = pack_or_tensors.R, pack_or_tensors.S
    else:
        R, S = pack_or_tensors
    Ric_v = np.einsum("mbam->ab", S)
    Ric_h = np.einsum("mbam->ab", R)
    Sc_v = float(np.einsum("ab,ab->", m.g_inv, Ric_v))
    Sc_h = float(np.einsum("ab,ab->", m.g_inv, Ric_h))
    return Ric_v, Ric_h, Sc_v, Sc_h


def pack_from_tensors(kind: str, R: np.ndarray, P: np.ndarray, S: np.ndarray,
                      m: MetricAtPoint, y: np.ndarray) -> CurvaturePack:
    g = m.g
    Ric_v, Ric_h, Sc_v, Sc_h = ricci_scalars((R, S), m)

    def lower(K):
        # K[i][j][k][l] with args (X=k, Y=l, Z=j) -> K_low[a][b][c][d] = g_id K^i_cab
        return np.einsum("id,icab->abcd", g, K)

    return CurvaturePack(
        kind=kind, R=R, P=P, S=S,
        Rhat=np.einsum("ijkl,j->ikl", R, y),
        Phat=np.einsum("ijkl,j->ikl", P, y),
        Shat=np.einsum("ijkl,j->ikl", S, y),
        Ric_h=Ric_h, Ric_v=Ric_v, Sc_h=Sc_h, Sc_v=Sc_v,
        R_low=lower(R), P_low=lower(P), S_low=lower(S))


def curvature_at(F: FinslerStructure, kind: str, p: Point,
                 order: int | None = None) -> CurvaturePack:
    """Curvature pack of one canonical connection at a point (fast path)."""
    if kind not in KINDS:
        raise ValueError(f"unknown connection kind {kind!r}; expected one of {KINDS}")
    if order is None:
        order = _MIN_ORDER[kind]
    bundle = get_bundle(F, p, max(order, _MIN_ORDER[kind]))
    R, P, S = _curvature_jets(bundle, kind)
    return pack_from_tensors(kind, R, P, S, bundle.metric_point,
                             np.asarray(p.y, dtype=np.float64))


# ------------------------------------------------------------- defining path


def _delta_lift(F: FinslerStructure, k: int) -> VectorFieldTM:
    """The k-th horizontal coordinate lift as an actual vector field."""
    n = F.n

    def comps(jet_vars):
        _, _, _, _, Njet = spray_jets(F.lsq_field, jet_vars, n)
        space = jet_vars[0].space
        parts = [const_jet(space, 1.0 if a == k else 0.0) for a in range(n)]
        parts += [-Njet[m, k] for m in range(n)]
        return jt_stack(parts)

    return VectorFieldTM(comps)


def _vertical_lift(n: int, l: int) -> VectorFieldTM:
    direction = np.zeros(2 * n)
    direction[n + l] = 1.0
    return VectorFieldTM.constant(direction)


def _split_bracket(vec: np.ndarray, N_val: np.ndarray, n: int):
    """Decompose a tangent vector of the total space in the adapted frame."""
    a = vec[:n]
    vert = vec[n:] + N_val @ a
    return a, vert


def curvature_defining(F: FinslerStructure, kind: str, p: Point):
    """R, P, S straight from the bracket definition on coordinate lifts.

    Slow, loop-heavy, and deliberately independent of the expanded index
    formulas in how the pieces are composed: the frame brackets come from
    numerical Lie brackets of the actual lifted vector fields.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown connection kind {kind!r}; expected one of {KINDS}")
    n = F.n
    bundle = get_bundle(F, p, _MIN_ORDER[kind] + 1)
    H = bundle.horizontal_jet(kind)
    V = bundle.vertical_jet(kind)
    Hv = H.value
    Vv = V.value if V is not None else np.zeros((n,) * 3)
    N_val = bundle.N.value
    dH = bundle.delta(H).value        # [i][j][l][c]
    dyH = H.grad(bundle.ys).value     # [i][j][k][l]
    if V is not None:
        dV = bundle.delta(V).value
        dyV = V.grad(bundle.ys).value
    else:
        dV = np.zeros((n,) * 4)
        dyV = np.zeros((n,) * 4)

    deltas = [_delta_lift(F, k) for k in range(n)]
    verts = [_vertical_lift(n, l) for l in range(n)]

    def d_along(vec_split, j):
        a, vert = vec_split
        return np.einsum("k,ijk->ij", a, Hv)[:, j] + np.einsum("m,ijm->ij", vert, Vv)[:, j]

    R = np.zeros((n,) * 4)
    P = np.zeros((n,) * 4)
    S = np.zeros((n,) * 4)
    for k in range(n):
        for l in range(n):
            br_hh = _split_bracket(lie_bracket(deltas[k], deltas[l], p, order=4), N_val, n)
            br_hv = _split_bracket(lie_bracket(deltas[k], verts[l], p, order=4), N_val, n)
            br_vv = _split_bracket(lie_bracket(verts[k], verts[l], p, order=4), N_val, n)
            for j in range(n):
                # -D_X(D_Y rhoZ) + D_Y(D_X rhoZ) + D_[X,Y](rhoZ), X = delta_k:
                R[:, j, k, l] = (
                    -(dH[:, j, l, k] + Hv[:, :, k] @ Hv[:, j, l])
                    + (dH[:, j, k, l] + Hv[:, :, l] @ Hv[:, j, k])
                    + d_along(br_hh, j))
                P[:, j, k, l] = (
                    -(dV[:, j, l, k] + Hv[:, :, k] @ Vv[:, j, l])
                    + (dyH[:, j, k, l] + Vv[:, :, l] @ Hv[:, j, k])
                    + d_along(br_hv, j))
                S[:, j, k, l] = (
                    -(dyV[:, j, l, k] + Vv[:, :, k] @ Vv[:, j, l])
                    + (dyV[:, j, k, l] + Vv[:, :, l] @ Vv[:, j, k])
                    + d_along(br_vv, j))
    return R, P, S
