"""Conformal rescaling of a Finsler structure and its deformation calculus.

Scaling the norm by a positive factor e^{s(x)} (s a function of position
only) deforms every object built from the metric.  This module constructs
the scaled structure, computes all deformation fields in closed form from
base-metric data, and — the point of the exercise — verifies each
transformation law by computing both of its sides independently:

* the left side directly on the scaled structure (its own spray, adapted
  frame, connections, curvatures; no deformation fields involved),
* the right side from the base structure plus the deformation fields.

The residual between the two sides is the ground truth the package reports.

Key deformation fields, with component slot conventions:

    Lt[m][k]                nonlinear-connection deformation (scaled N = N + Lt)
    B[i][k][j]              Cartan horizontal deformation, args (X=k, Y=j)
    Bc/B0/Bstar[i][k][j]    Chern / Berwald / Hashiguchi counterparts
    V[i][j][k][l]           mixed-curvature deformation, slots as P
    H[i][j][k][l]           h-curvature deformation, slots as R
    Atensor[i][a][j][k]     the obstruction 3-form A(X=a, Y=j, Z=k)
    iotaA[i][j][k]          A with y inserted in its first argument
    A0[k]                   trace of iotaA

The nonlinear deformation uses the vertical-endomorphism bracket with the
convention [J, W](X) = [JX, W] - J[X, W]; the opposite overall sign is
available behind ``fn_bracket_sign=-1`` (the default is validated by the
two-sided nonlinear-connection test).
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .curvature import _curvature_jets
from .dsl import Expression, parse_expression
from .errors import UnknownIdError, ValidationError
from .geometry import GeometryBundle, get_bundle, jet_cov_deriv
from .jets import (JetTensor, Point, VectorFieldTM, const_jet, jet_einsum,
                   jet_matrix_inverse, jt_stack, lie_bracket)
from .metric import FinslerStructure, conformal_lift

THEOREM_IDS = (
    "barthel-change",
    "cartan-change",
    "cartan-curvatures",
    "berwald-change",
    "berwald-curvatures",
    "chern-change",
    "chern-curvatures",
    "hashiguchi-change",
    "hashiguchi-curvatures",
    "nablaT-change",
    "landsberg-criterion",
)

_THEOREM_ORDER = {
    "barthel-change": 4,
    "cartan-change": 4,
    "cartan-curvatures": 4,
    "berwald-change": 4,
    "berwald-curvatures": 5,
    "chern-change": 4,
    "chern-curvatures": 4,
    "hashiguchi-change": 4,
    "hashiguchi-curvatures": 5,
    "nablaT-change": 4,
    "landsberg-criterion": 4,
}


class ConformalChange:
    """A base structure together with a positional scale factor."""

    def __init__(self, base: FinslerStructure, sigma: Expression,
                 fn_bracket_sign: int = 1):
        sigma.validate(base.n, allow_y=False)
        self.base = base
        self.sigma = sigma
        self.sigma_field = sigma.bind(base.n, allow_y=False)
        self.fn_bracket_sign = 1 if fn_bracket_sign >= 0 else -1
        self.lifted = conformal_lift(base, self.sigma_field)
        self._states: OrderedDict = OrderedDict()
        self._lock = threading.Lock()

    def state(self, p: Point, order: int) -> "DeformationState":
        key = (p.x, p.y, order)
        with self._lock:
            got = self._states.get(key)
            if got is not None:
                self._states.move_to_end(key)
                return got
        st = DeformationState(self, get_bundle(self.base, p, order))
        with self._lock:
            self._states[key] = st
            self._states.move_to_end(key)
            while len(self._states) > 64:
                self._states.popitem(last=False)
        return st

    def lifted_bundle(self, p: Point, order: int) -> GeometryBundle:
        return get_bundle(self.lifted, p, order)

    def sigma_value(self, p: Point) -> float:
        from .jetspace import get_space
        from .jets import coordinate_jets
        vars0 = coordinate_jets(get_space(2 * self.base.n, 0), p.coords())
        return float(self.sigma_field(vars0).value)


class DeformationState:
    """All deformation jets of one conformal change at one point."""

    def __init__(self, cc: ConformalChange, bundle: GeometryBundle):
        self.cc = cc
        self.b = bundle
        self.n = bundle.n
        self._cache: dict = {}
        self._lock = threading.RLock()

    def _get(self, name, builder):
        got = self._cache.get(name)
        if got is not None:
            return got
        with self._lock:
            got = self._cache.get(name)
            if got is None:
                got = builder()
                self._cache[name] = got
        return got

    # ------------------------------------------------------------- scalar data

    @property
    def sj(self) -> JetTensor:
        return self._get("sj", lambda: self.cc.sigma_field(self.b.jet_vars))

    @property
    def sk(self) -> JetTensor:
        """Position partials of the scale function."""
        return self._get("sk", lambda: self.sj.grad(self.b.xs))

    @property
    def sigma1(self) -> JetTensor:
        return self._get("sigma1", lambda: jet_einsum("k,k->", self.sk, self.b.y_jet))

    @property
    def pbar(self) -> JetTensor:
        """Fiberwise metric gradient of the scale function, g^{ij} s_j."""
        return self._get("pbar", lambda: jet_einsum("ij,j->i", self.b.ginv, self.sk))

    # ------------------------------------------------------------- deformations

    @property
    def ident(self) -> JetTensor:
        return self._get("ident", lambda: const_jet(self.b.space, np.eye(self.n)))

    @property
    def Lt(self) -> JetTensor:
        """Nonlinear-connection deformation Lt[m][k] (scaled N = N + Lt)."""
        def build():
            b = self.b
            t1 = jet_einsum("m,k->mk", b.y_jet, self.sk)
            t2 = self.sigma1 * self.ident
            t3 = -jet_einsum("m,k->mk", self.pbar, b.L * b.ell)
            fterm = float(self.cc.fn_bracket_sign) * self.pbar.grad(b.ys)
            t4 = -0.5 * jet_einsum(",mk->mk", b.E, fterm)
            return t1 + t2 + t3 + t4
        return self._get("Lt", build)

    @property
    def B(self) -> JetTensor:
        """Cartan horizontal deformation B[i][k][j], args (X=k, Y=j)."""
        def build():
            b = self.b
            t1 = jet_einsum("k,ij->ikj", self.sk, self.ident)
            t2 = jet_einsum("j,ik->ikj", self.sk, self.ident)
            t3 = -jet_einsum("kj,i->ikj", b.g, self.pbar)
            t4 = -jet_einsum("mj,imk->ikj", self.Lt, b.T)
            return t1 + t2 + t3 + t4 + self.Tprime
        return self._get("B", build)

    @property
    def Tprime(self) -> JetTensor:
        """The transposed-cubic correction term of B (metric-defined)."""
        def build():
            W = jet_einsum("ia,ma->im", self.b.ginv, self.Lt)
            return jet_einsum("im,mjk->ikj", W, self.b.C_low)
        return self._get("Tprime", build)

    @property
    def Bc(self) -> JetTensor:
        """Chern horizontal deformation; also the auxiliary field U."""
        def build():
            return self.B - jet_einsum("mk,imj->ikj", self.Lt, self.b.T)
        return self._get("Bc", build)

    @property
    def B0(self) -> JetTensor:
        """Berwald deformation: fiber derivative of Lt, B0[i][k][j] = d_j Lt[i][k]."""
        return self._get("B0", lambda: self.Lt.grad(self.b.ys))

    @property
    def Bstar(self) -> JetTensor:
        """Hashiguchi deformation B*[i][k][j]."""
        def build():
            return self.B0 + jet_einsum("imj,mk->ikj", self.b.T, self.Lt)
        return self._get("Bstar", build)

    @property
    def Atensor(self) -> JetTensor:
        """Obstruction tensor A[i][a][j][k], args (X=a, Y=j, Z=k).

        The third and fourth summands realize -U(X, T(Y,Z)) acting on the
        variable components of T: the plain product with U's components plus
        the transported fiber derivative of T.
        """
        def build():
            b = self.b
            U = self.Bc
            a1 = jet_einsum("imk,maj->iajk", b.T, U)
            a2 = jet_einsum("imj,mak->iajk", b.T, U)
            a3 = -jet_einsum("iam,mjk->iajk", U, b.T)
            a4 = jet_einsum("ra,ijkr->iajk", self.Lt, b.T.grad(b.ys))
            return a1 + a2 + a3 + a4
        return self._get("Atensor", build)

    # --------------------------------------------------------------- values

    @property
    def y(self) -> np.ndarray:
        return np.asarray(self.b.p.y, dtype=np.float64)

    def iota_A(self) -> np.ndarray:
        return np.einsum("a,iajk->ijk", self.y, self.Atensor.value)

    def A0(self) -> np.ndarray:
        return np.einsum("a,maxm->x", self.y, self.Atensor.value)

    def cartan_RPS(self):
        return self._get("cartan_RPS", lambda: _curvature_jets(self.b, "cartan"))

    def V_deform(self) -> np.ndarray:
        """Mixed-curvature deformation, slots as P: scaled P = P + V."""
        def build():
            b = self.b
            DvB = jet_cov_deriv(b, self.B, 1, 2, "v", "cartan").value
            Tv = b.T.value
            Bv = self.B.value
            _, _, S = self.cartan_RPS()
            out = DvB.transpose(0, 2, 1, 3)
            out = out + np.einsum("mlk,imj->ijkl", Tv, Bv)
            out = out - np.einsum("mk,ijml->ijkl", self.Lt.value, S)
            return out
        return self._get("V_deform", build)

    def H_deform(self) -> np.ndarray:
        """h-curvature deformation, slots as R: scaled R = R + H."""
        def build():
            b = self.b
            Ltv = self.Lt.value
            Bv = self.B.value
            Tv = b.T.value
            _, P, S = self.cartan_RPS()
            DhB = jet_cov_deriv(b, self.B, 1, 2, "h", "cartan").value
            DvB = jet_cov_deriv(b, self.B, 1, 2, "v", "cartan").value
            f = (np.einsum("iljk->ijkl", DhB)
                 - np.einsum("rk,iljr->ijkl", Ltv, DvB)
                 + np.einsum("ml,ijkm->ijkl", Ltv, P)
                 + np.einsum("ikm,mlj->ijkl", Bv, Bv)
                 - np.einsum("rk,mrl,imj->ijkl", Ltv, Tv, Bv))
            sterm = np.einsum("mk,rl,ijmr->ijkl", Ltv, Ltv, S)
            return sterm - (f - f.transpose(0, 1, 3, 2))
        return self._get("H_deform", build)


@dataclass(frozen=True)
class DeformationFields:
    """Every deformation field of one conformal change at one point (values)."""

    sigma_value: float
    sigma_partials: np.ndarray   # (n,)
    sigma1: float
    gradv: np.ndarray            # (n,) raised gradient of the scale function
    Ltensor: np.ndarray          # (n, n)
    B: np.ndarray                # (n, n, n) Cartan, [i][k][j]
    A: np.ndarray                # (n, n, n) vertical-argument deformation (two-sided)
    B0: np.ndarray               # Berwald
    Bc: np.ndarray               # Chern
    Bstar: np.ndarray            # Hashiguchi
    Tprime: np.ndarray           # (n, n, n)
    U: np.ndarray                # (n, n, n), equals Bc componentwise
    H: np.ndarray                # (n, n, n, n) h-curvature deformation
    V: np.ndarray                # (n, n, n, n) mixed-curvature deformation
    Atensor: np.ndarray          # (n, n, n, n)
    iotaA: np.ndarray            # (n, n, n)
    A0: np.ndarray               # (n,)
    N: np.ndarray                # (n, n): B with y inserted in the Y slot
    N0: np.ndarray               # (n,)


def lift(base: FinslerStructure, sigma, fn_bracket_sign: int = 1) -> ConformalChange:
    """Attach a positional scale factor to a structure.

    ``sigma`` is an expression string (or parsed Expression) over x-variables
    only; referencing a fiber variable raises a validation error.
    """
    expr = sigma if isinstance(sigma, Expression) else parse_expression(sigma)
    return ConformalChange(base, expr, fn_bracket_sign)


def L_tensor(cc: ConformalChange, p: Point) -> np.ndarray:
    """Nonlinear-connection deformation assembled from its intrinsic formula.

    Each of the four summands is evaluated locally; the endomorphism-bracket
    summand comes from numerical Lie brackets of the actual vector fields
    rather than from its expanded analytic form.  Independently, the scaled
    nonlinear connection must equal base N plus this matrix.
    """
    n = cc.base.n
    bundle = get_bundle(cc.base, p, 3)
    st = cc.state(p, 3)
    y = np.asarray(p.y, dtype=np.float64)
    sk = st.sk.value
    sigma1 = float(y @ sk)
    pbar = st.pbar.value
    L = float(bundle.L.value)
    ell = bundle.ell.value
    E = 0.5 * L * L

    # vertical-gradient field of the scale function, as an actual field
    def grad_comps(jet_vars: Sequence[JetTensor]):
        space = jet_vars[0].space
        E_j = cc.base.lsq_field(jet_vars)
        ys = slice(n, 2 * n)
        g_j = 0.5 * E_j.grad(ys).grad(ys)
        ginv_j = jet_matrix_inverse(g_j)
        sk_j = cc.sigma_field(jet_vars).grad(slice(0, n))
        pbar_j = jet_einsum("ij,j->i", ginv_j, sk_j)
        zero = const_jet(space, 0.0)
        return jt_stack([zero] * n + [pbar_j[m] for m in range(n)])

    gradv_field = VectorFieldTM(grad_comps)
    Fmat = np.zeros((n, n))
    for k in range(n):
        e_h = np.zeros(2 * n)
        e_h[k] = 1.0
        e_v = np.zeros(2 * n)
        e_v[n + k] = 1.0
        br_v = lie_bracket(VectorFieldTM.constant(e_v), gradv_field, p, order=3)
        br_h = lie_bracket(VectorFieldTM.constant(e_h), gradv_field, p, order=3)
        # [J d_k, W] - J[d_k, W]: the second bracket's x-part gets verticalized
        Fmat[:, k] = cc.fn_bracket_sign * (br_v[n:] - br_h[:n])

    return (np.outer(y, sk) + sigma1 * np.eye(n)
            - np.outer(pbar, L * ell) - E * Fmat)


def deformation_fields(cc: ConformalChange, p: Point) -> DeformationFields:
    """All deformation fields at one point, as plain arrays."""
    st = cc.state(p, 4)
    lifted_b = cc.lifted_bundle(p, 4)
    y = st.y
    Bv = st.B.value
    Av_vert = lifted_b.T.value - st.b.T.value  # two-sided vertical deformation
    Ncomp = np.einsum("ikj,j->ik", Bv, y)
    return DeformationFields(
        sigma_value=float(st.sj.value),
        sigma_partials=st.sk.value,
        sigma1=float(st.sigma1.value),
        gradv=st.pbar.value,
        Ltensor=st.Lt.value,
        B=Bv,
        A=Av_vert,
        B0=st.B0.value,
        Bc=st.Bc.value,
        Bstar=st.Bstar.value,
        Tprime=st.Tprime.value,
        U=st.Bc.value,
        H=st.H_deform(),
        V=st.V_deform(),
        Atensor=st.Atensor.value,
        iotaA=st.iota_A(),
        A0=st.A0(),
        N=Ncomp,
        N0=Ncomp @ y,
    )


# ----------------------------------------------------------------- theorems


def _rel(lhs: np.ndarray, rhs: np.ndarray) -> float:
    lhs = np.asarray(lhs, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    denom = 1.0 + np.abs(lhs).max(initial=0.0) + np.abs(rhs).max(initial=0.0)
    return float(np.abs(lhs - rhs).max(initial=0.0) / denom)


def _parts_barthel(cc, p) -> dict:
    st = cc.state(p, 4)
    lifted_b = cc.lifted_bundle(p, 4)
    lhs = lifted_b.N.value
    rhs = st.b.N.value + st.Lt.value
    return {"N": _rel(lhs, rhs)}


def _parts_cartan_change(cc, p) -> dict:
    st = cc.state(p, 4)
    b = st.b
    lifted_b = cc.lifted_bundle(p, 4)
    Ltv, Bv, Tv = st.Lt.value, st.B.value, b.T.value
    rhs_h = (b.F_cartan.value
             - np.einsum("mk,ijm->ijk", Ltv, Tv)
             + np.einsum("ikj->ijk", Bv))
    lhs_h = lifted_b.F_cartan.value
    return {"horizontal": _rel(lhs_h, rhs_h),
            "vertical": _rel(lifted_b.T.value, Tv)}


def _parts_cartan_curvatures(cc, p) -> dict:
    st = cc.state(p, 4)
    lifted_b = cc.lifted_bundle(p, 4)
    R, P, S = st.cartan_RPS()
    Rt, Pt, St = _curvature_jets(lifted_b, "cartan")
    return {"R": _rel(Rt, R + st.H_deform()),
            "P": _rel(Pt, P + st.V_deform()),
            "S": _rel(St, S)}


def _parts_berwald_change(cc, p) -> dict:
    st = cc.state(p, 4)
    lifted_b = cc.lifted_bundle(p, 4)
    rhs = st.b.Gder.value + np.einsum("ikj->ijk", st.B0.value)
    return {"horizontal": _rel(lifted_b.Gder.value, rhs)}


def _parts_chern_change(cc, p) -> dict:
    st = cc.state(p, 4)
    lifted_b = cc.lifted_bundle(p, 4)
    rhs = st.b.F_cartan.value + np.einsum("ikj->ijk", st.Bc.value)
    return {"horizontal": _rel(lifted_b.F_cartan.value, rhs)}


def _parts_hashiguchi_change(cc, p) -> dict:
    st = cc.state(p, 4)
    b = st.b
    lifted_b = cc.lifted_bundle(p, 4)
    Ltv, Tv = st.Lt.value, b.T.value
    rhs = (b.Gder.value
           - np.einsum("mk,ijm->ijk", Ltv, Tv)
           + np.einsum("ikj->ijk", st.Bstar.value))
    return {"horizontal": _rel(lifted_b.Gder.value, rhs),
            "vertical": _rel(lifted_b.T.value, Tv)}


def _flat_curvature_deform(st, B_jet, kind: str, P_base: np.ndarray):
    """Common h-curvature deformation shape for the flat-vertical kinds.

    Assembles the alternated correction for connections whose vertical
    coefficients vanish (Berwald, Chern): transported-derivative term,
    horizontal covariant derivative of the deformation, curvature reinsertion,
    and the quadratic self-term.
    """
    b = st.b
    Ltv = st.Lt.value
    Bv = B_jet.value
    dyB = B_jet.grad(b.ys).value                              # [i][k][j][l]
    DhB = jet_cov_deriv(b, B_jet, 1, 2, "h", kind).value      # [i][k][j][c]
    f = (np.einsum("rk,iljr->ijkl", Ltv, dyB)
         - np.einsum("iljk->ijkl", DhB)
         + np.einsum("mk,ijlm->ijkl", Ltv, P_base)
         - np.einsum("ikm,mlj->ijkl", Bv, Bv))
    return f - f.transpose(0, 1, 3, 2), dyB


def _parts_berwald_curvatures(cc, p) -> dict:
    st = cc.state(p, 5)
    lifted_b = cc.lifted_bundle(p, 5)
    R, P, S = _curvature_jets(st.b, "berwald")
    Rt, Pt, St = _curvature_jets(lifted_b, "berwald")
    Hdef, dyB = _flat_curvature_deform(st, st.B0, "berwald", P)
    return {"R": _rel(Rt, R + Hdef),
            "P": _rel(Pt, P + dyB.transpose(0, 2, 1, 3)),
            "S-zero": max(float(np.abs(S).max()), float(np.abs(St).max()))}


def _parts_chern_curvatures(cc, p) -> dict:
    st = cc.state(p, 5)
    lifted_b = cc.lifted_bundle(p, 5)
    R, P, S = _curvature_jets(st.b, "chern")
    Rt, Pt, St = _curvature_jets(lifted_b, "chern")
    Hdef, dyB = _flat_curvature_deform(st, st.Bc, "chern", P)
    return {"R": _rel(Rt, R + Hdef),
            "P": _rel(Pt, P + dyB.transpose(0, 2, 1, 3)),
            "S-zero": max(float(np.abs(S).max()), float(np.abs(St).max()))}


def _parts_hashiguchi_curvatures(cc, p) -> dict:
    st = cc.state(p, 5)
    b = st.b
    lifted_b = cc.lifted_bundle(p, 5)
    R, P, S = _curvature_jets(b, "hashiguchi")
    Rt, Pt, St = _curvature_jets(lifted_b, "hashiguchi")
    Ltv = st.Lt.value
    Bsv = st.Bstar.value
    Tv = b.T.value
    DvBs = jet_cov_deriv(b, st.Bstar, 1, 2, "v", "hashiguchi").value
    DhBs = jet_cov_deriv(b, st.Bstar, 1, 2, "h", "hashiguchi").value
    P_rhs = (P
             - np.einsum("mk,ijml->ijkl", Ltv, S)
             + DvBs.transpose(0, 2, 1, 3)
             + np.einsum("mlk,imj->ijkl", Tv, Bsv))
    f = (np.einsum("ml,ijkm->ijkl", Ltv, P)
         + np.einsum("iljk->ijkl", DhBs)
         - np.einsum("rk,iljr->ijkl", Ltv, DvBs)
         + np.einsum("ikm,mlj->ijkl", Bsv, Bsv)
         - np.einsum("rk,mrl,imj->ijkl", Ltv, Tv, Bsv))
    R_rhs = (R + np.einsum("mk,rl,ijmr->ijkl", Ltv, Ltv, S)
             - (f - f.transpose(0, 1, 3, 2)))
    return {"R": _rel(Rt, R_rhs), "P": _rel(Pt, P_rhs), "S": _rel(St, S)}


def _parts_nablaT(cc, p) -> dict:
    st = cc.state(p, 4)
    b = st.b
    lifted_b = cc.lifted_bundle(p, 4)
    lhs = jet_cov_deriv(lifted_b, lifted_b.T, 1, 2, "h", "cartan").value
    DhT = jet_cov_deriv(b, b.T, 1, 2, "h", "cartan").value
    rhs = DhT - st.Atensor.value.transpose(0, 2, 3, 1)
    parts = {"nablaT": _rel(lhs, rhs)}
    # structural: A contracted with y in its last argument vanishes.  The
    # contraction is a cancelling sum, so measure what is left against the
    # magnitude the sum had to cancel (same spirit as the relative residual
    # used everywhere else; near-degenerate metrics make the raw entries of
    # A arbitrarily large, which an absolute measure would misreport).
    Av = st.Atensor.value
    Ay = np.einsum("iajk,k->iaj", Av, st.y)
    scale = np.einsum("iajk,k->iaj", np.abs(Av), np.abs(st.y))
    parts["A-eta"] = float(np.max(np.abs(Ay) / (1.0 + scale)))
    return parts


def _parts_landsberg(cc, p) -> dict:
    st = cc.state(p, 4)
    lifted_b = cc.lifted_bundle(p, 4)
    _, P, _ = st.cartan_RPS()
    _, Pt, _ = _curvature_jets(lifted_b, "cartan")
    y = st.y
    Phat = np.einsum("ijkl,j->ikl", P, y)
    Phat_t = np.einsum("ijkl,j->ikl", Pt, y)
    return {"Phat": _rel(Phat_t, Phat - st.iota_A())}


_THEOREMS = {
    "barthel-change": _parts_barthel,
    "cartan-change": _parts_cartan_change,
    "cartan-curvatures": _parts_cartan_curvatures,
    "berwald-change": _parts_berwald_change,
    "berwald-curvatures": _parts_berwald_curvatures,
    "chern-change": _parts_chern_change,
    "chern-curvatures": _parts_chern_curvatures,
    "hashiguchi-change": _parts_hashiguchi_change,
    "hashiguchi-curvatures": _parts_hashiguchi_curvatures,
    "nablaT-change": _parts_nablaT,
    "landsberg-criterion": _parts_landsberg,
}


def verify_theorem(theorem_id: str, cc: ConformalChange,
                   samples: Sequence[Point], tol: float = 1e-8) -> dict:
    """Two-sided check of one transformation law over sample points.

    Returns a record with the maximal relative residual over all samples and
    sub-parts, the worst sample index, and a pass/fail status against ``tol``.
    Per-sample evaluation errors are captured in the record, not raised.
    """
    if theorem_id not in _THEOREMS:
        raise UnknownIdError(
            f"unknown theorem id {theorem_id!r}; expected one of {THEOREM_IDS}")
    fn = _THEOREMS[theorem_id]
    worst = -1.0
    worst_sample = None
    part_max: dict[str, float] = {}
    errors: list[str] = []
    evaluated = 0
    for idx, p in enumerate(samples):
        try:
            parts = fn(cc, p)
        except Exception as exc:  # per-sample failures are data, not crashes
            errors.append(f"sample {idx}: {type(exc).__name__}: {exc}")
            continue
        evaluated += 1
        for name, res in parts.items():
            part_max[name] = max(part_max.get(name, 0.0), res)
            if res > worst:
                worst = res
                worst_sample = idx
    status = "pass" if (evaluated > 0 and worst <= tol and not errors) else "fail"
    if evaluated == 0:
        status = "error"
    return {
        "id": theorem_id,
        "status": status,
        "max_residual": worst if evaluated else None,
        "worst_sample": worst_sample,
        "parts": {k: part_max[k] for k in sorted(part_max)},
        "samples_evaluated": evaluated,
        "errors": errors,
        "tolerance": tol,
    }
