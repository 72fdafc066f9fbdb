"""Residual-based classification of special Finsler structures.

Each predicate transcribes one defining identity of a special class of
Finsler spaces into a residual: the defining equation's two sides are
evaluated at sample points, any quantified auxiliary (a recurrence form, the
scalars of a reducibility decomposition, a curvature scale) is fitted by
per-sample linear least squares, and the predicate holds when the maximal
relative residual stays below tolerance.

Statuses are three-valued.  ``holds`` and ``fails`` report the residual
test; ``inapplicable`` is reserved for documented degeneracies — a dimension
below the definition's floor, a vanishing torsion norm where a recurrence is
undefined, or a vanishing ``C^2`` where the definition divides by it — and is
never conflated with failure.

Conventions (shared repository-wide): mixed curvature-type tensors carry
slots (value, Z, X, Y); lowered ones carry (X, Y, Z, W); covariant
derivatives append the direction slot last.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .curvature import _curvature_jets, ricci_scalars
from .errors import DegenerateTensorError, UnknownIdError
from .geometry import get_bundle, jet_cov_deriv
from .jets import Point, const_jet, jet_einsum

PREDICATES = (
    "riemannian",
    "locally-minkowskian",
    "berwald",
    "ch-recurrent",
    "p-star",
    "cv-recurrent",
    "c0-recurrent",
    "semi-c-reducible",
    "c-reducible",
    "c2-like",
    "quasi-c-reducible",
    "s3-like",
    "s4-like",
    "sv-recurrent",
    "landsberg",
    "general-landsberg",
    "p-symmetric",
    "p2-like",
    "p-reducible",
    "h-isotropic",
    "scalar-curvature",
    "constant-curvature",
    "r3-like",
    "p-scalar-curvature",
    "s-ps-curvature",
    "symmetric",
)

HYPOTHESES = (
    "A-vanishes",
    "iota-A-vanishes",
    "A0-vanishes",
    "H-eta-vanishes",
    "minkowski-hyp",
    "homothety",
)

#: Properties invariant under every conformal change, no hypothesis needed.
UNCONDITIONAL_INVARIANT = (
    "riemannian",
    "semi-c-reducible",
    "c-reducible",
    "c2-like",
    "quasi-c-reducible",
    "cv-recurrent",
    "c0-recurrent",
    "sv-recurrent",
    "s3-like",
    "s4-like",
)

#: (predicate, hypothesis or None).  None means unconditional invariance.
#: "homothety" rows additionally require the scale function to be constant.
PROPOSITIONS = (
    ("riemannian", None),
    ("locally-minkowskian", "minkowski-hyp"),
    ("berwald", "A-vanishes"),
    ("ch-recurrent", "A-vanishes"),
    ("p-star", "iota-A-vanishes"),
    ("cv-recurrent", None),
    ("c0-recurrent", None),
    ("semi-c-reducible", None),
    ("c-reducible", None),
    ("c2-like", None),
    ("quasi-c-reducible", None),
    ("landsberg", "iota-A-vanishes"),
    ("general-landsberg", "A0-vanishes"),
    ("p-reducible", "iota-A-vanishes"),
    ("s3-like", None),
    ("s4-like", None),
    ("sv-recurrent", None),
    ("scalar-curvature", "H-eta-vanishes"),
    ("p2-like", "homothety"),
    ("h-isotropic", "homothety"),
    ("constant-curvature", "homothety"),
    ("p-scalar-curvature", "homothety"),
    ("s-ps-curvature", "homothety"),
    ("r3-like", "homothety"),
    ("symmetric", "homothety"),
    ("p-symmetric", "homothety"),
)

STRUCTURAL_TOL = 1e-10
FITTED_TOL = 1e-7

_STRUCTURAL = {
    "riemannian", "locally-minkowskian", "berwald", "landsberg",
    "general-landsberg", "p-symmetric", "symmetric",
}

# Dimension floors.  The scalar/constant-curvature floor is 2: the defining
# identity is evaluable in dimension 2 and the flat-vs-hyperbolic sanity checks
# depend on it there.
_FLOORS = {
    "semi-c-reducible": 3, "c-reducible": 3, "quasi-c-reducible": 3,
    "s3-like": 4, "s4-like": 5, "r3-like": 4,
    "p2-like": 3, "p-reducible": 3, "h-isotropic": 3,
}

_ORDERS = {"locally-minkowskian": 5, "sv-recurrent": 5, "symmetric": 6}

_DEGENERATE_TOL = 1e-12


class _SampleInapplicable(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


@dataclass(frozen=True)
class Verdict:
    predicate: str
    status: str                      # holds | fails | inapplicable
    max_residual: Optional[float]
    residuals: tuple
    fitted: dict
    tolerance: float
    samples_evaluated: int
    samples_skipped: int = 0
    reason: Optional[str] = None


def relative_residual(lhs, rhs) -> float:
    lhs = np.asarray(lhs, dtype=np.float64)
    rhs = np.asarray(rhs, dtype=np.float64)
    denom = 1.0 + np.abs(lhs).max(initial=0.0) + np.abs(rhs).max(initial=0.0)
    return float(np.abs(lhs - rhs).max(initial=0.0) / denom)


def fit_recurrence(T: np.ndarray, DT: np.ndarray, tol: float = _DEGENERATE_TOL):
    """Least-squares recurrence form for DT ~ lambda (x) T.

    ``DT`` carries one extra trailing direction axis; the returned ``lam`` has
    one entry per direction minimizing the Frobenius misfit in that direction.
    The residual is ``|DT - T (x) lam|`` relative to ``|DT| + |T|``.
    """
    T = np.asarray(T, dtype=np.float64)
    DT = np.asarray(DT, dtype=np.float64)
    tnorm = float(np.linalg.norm(T))
    if tnorm <= tol:
        raise DegenerateTensorError(
            f"recurrence undefined: tensor norm {tnorm:.3e} <= {tol:.3e}")
    dirs = DT.shape[-1]
    Tf = T.reshape(-1)
    DTf = DT.reshape(-1, dirs)
    lam = (Tf @ DTf) / (Tf @ Tf)
    misfit = DTf - np.outer(Tf, lam)
    residual = float(np.linalg.norm(misfit)
                     / (np.linalg.norm(DTf) + tnorm))
    return lam, residual


# ------------------------------------------------------------- sample context


class _Ctx:
    """Per-sample computation context; memoizes on the shared bundle cache."""

    def __init__(self, F, p: Point, order: int):
        self.b = get_bundle(F, p, order)
        self.n = self.b.n
        self.y = np.asarray(p.y, dtype=np.float64)

    def _memo(self, key: str, builder: Callable):
        return self.b._get("classify:" + key, builder)

    @property
    def mp(self):
        return self.b.metric_point

    def rps(self, kind: str):
        return self._memo("rps-" + kind, lambda: _curvature_jets(self.b, kind))

    def DhT(self) -> np.ndarray:
        return self._memo("DhT", lambda: jet_cov_deriv(
            self.b, self.b.T, 1, 2, "h", "cartan").value)

    def DvT(self) -> np.ndarray:
        return self._memo("DvT", lambda: jet_cov_deriv(
            self.b, self.b.T, 1, 2, "v", "cartan").value)

    def dyT(self) -> np.ndarray:
        """Berwald vertical covariant derivative of T (no vertical coefficients)."""
        return self._memo("dyT", lambda: jet_cov_deriv(
            self.b, self.b.T, 1, 2, "v", "berwald").value)

    def C_jet(self):
        def build():
            ident = const_jet(self.b.space, np.eye(self.n))
            return jet_einsum("mxk,mk->x", self.b.T, ident)
        return self._memo("C_jet", build)

    def nabla_eta_C(self) -> np.ndarray:
        def build():
            DhC = jet_cov_deriv(self.b, self.C_jet(), 0, 1, "h", "cartan").value
            return DhC @ self.y
        return self._memo("nabla_eta_C", build)

    def nabla_eta_T(self) -> np.ndarray:
        return self._memo("nabla_eta_T", lambda: self.DhT() @ self.y)

    def Phat(self) -> np.ndarray:
        _, P, _ = self.rps("cartan")
        return np.einsum("ijkl,j->ikl", P, self.y)

    def lowered(self, K: np.ndarray) -> np.ndarray:
        return np.einsum("id,icab->abcd", self.mp.g, K)

    def S_jet(self):
        def build():
            V = self.b.T
            dyV = V.grad(self.b.ys)
            return (dyV - dyV.transpose(0, 1, 3, 2)
                    - jet_einsum("mjl,imk->ijkl", V, V)
                    + jet_einsum("mjk,iml->ijkl", V, V))
        return self._memo("S_jet", build)

    def R_berwald_jet(self):
        def build():
            H = self.b.Gder
            dH = self.b.delta(H)
            return (dH - dH.transpose(0, 1, 3, 2)
                    - jet_einsum("mjl,imk->ijkl", H, H)
                    + jet_einsum("mjk,iml->ijkl", H, H))
        return self._memo("R_berwald_jet", build)


# -------------------------------------------------------- predicate functions


def _pred_riemannian(ctx):
    return relative_residual(ctx.mp.C3, 0.0), {}


def _pred_locally_minkowskian(ctx):
    R, _, _ = ctx.rps("cartan")
    _, Pb, _ = ctx.rps("berwald")
    Rhat = np.einsum("ijkl,j->ikl", R, ctx.y)
    direct = max(relative_residual(ctx.DhT(), 0.0), relative_residual(R, 0.0))
    contracted = max(relative_residual(Rhat, 0.0), relative_residual(Pb, 0.0))
    return max(direct, contracted), {"route_direct": direct,
                                     "route_contracted": contracted}


def _pred_berwald(ctx):
    return relative_residual(ctx.DhT(), 0.0), {}


def _recurrence(ctx, DT):
    T = ctx.b.T.value
    if np.linalg.norm(T) <= _DEGENERATE_TOL:
        raise _SampleInapplicable("vanishing torsion: recurrence undefined")
    lam, residual = fit_recurrence(T, DT)
    return residual, {"lambda": [float(v) for v in lam]}


def _pred_ch_recurrent(ctx):
    return _recurrence(ctx, ctx.DhT())


def _pred_cv_recurrent(ctx):
    return _recurrence(ctx, ctx.DvT())


def _pred_c0_recurrent(ctx):
    return _recurrence(ctx, ctx.dyT())


def _pred_p_star(ctx):
    mp = ctx.mp
    if abs(mp.C2norm) <= _DEGENERATE_TOL:
        raise _SampleInapplicable("C^2 = 0: defining scalar undefined")
    lam = float(mp.g_inv @ ctx.nabla_eta_C() @ mp.C1) / mp.C2norm
    residual = relative_residual(ctx.nabla_eta_T(), lam * ctx.b.T.value)
    return residual, {"lambda": lam}


def _cyclic_hC(hbar, Cv):
    return (np.einsum("ab,c->abc", hbar, Cv)
            + np.einsum("bc,a->abc", hbar, Cv)
            + np.einsum("ca,b->abc", hbar, Cv))


def _pred_semi_c_reducible(ctx):
    mp = ctx.mp
    if abs(mp.C2norm) <= _DEGENERATE_TOL:
        raise _SampleInapplicable("C^2 = 0: decomposition divides by C^2")
    n = ctx.n
    Mh = _cyclic_hC(mp.hbar, mp.C1) / (n + 1)
    Mc = np.einsum("a,b,c->abc", mp.C1, mp.C1, mp.C1) / mp.C2norm
    diff = Mh - Mc
    dn = float(np.vdot(diff, diff))
    if dn <= 1e-30:
        mu = 1.0
    else:
        mu = float(np.vdot(mp.C3 - Mc, diff) / dn)
    tau = 1.0 - mu
    residual = relative_residual(mp.C3, mu * Mh + tau * Mc)
    return residual, {"mu": mu, "tau": tau}


def _pred_c_reducible(ctx):
    mp = ctx.mp
    rhs = _cyclic_hC(mp.hbar, mp.C1) / (ctx.n + 1)
    return relative_residual(mp.C3, rhs), {}


def _pred_c2_like(ctx):
    mp = ctx.mp
    if abs(mp.C2norm) <= _DEGENERATE_TOL:
        raise _SampleInapplicable("C^2 = 0: definition divides by C^2")
    rhs = np.einsum("a,b,c->abc", mp.C1, mp.C1, mp.C1) / mp.C2norm
    return relative_residual(mp.C3, rhs), {}


def _pred_quasi_c_reducible(ctx):
    mp = ctx.mp
    n = ctx.n
    Cv = mp.C1
    pairs = [(a, b) for a in range(n) for b in range(a, n)]
    cols = []
    for a, b in pairs:
        E = np.zeros((n, n))
        E[a, b] = 1.0
        E[b, a] = 1.0
        cols.append(_cyclic_hC_general(E, Cv).reshape(-1))
    D = np.stack(cols, axis=1)
    coef, *_ = np.linalg.lstsq(D, mp.C3.reshape(-1), rcond=None)
    A = np.zeros((n, n))
    for (a, b), c in zip(pairs, coef):
        A[a, b] = c
        A[b, a] = c
    # impose the indicatory constraint A(., eta) = 0 by projection
    phi = np.eye(n) - np.outer(ctx.y, mp.ell) / mp.L
    A = phi.T @ A @ phi
    rhs = _cyclic_hC_general(A, Cv)
    residual = relative_residual(mp.C3, rhs)
    return residual, {"A_form": A.tolist()}


def _cyclic_hC_general(A, Cv):
    return (np.einsum("ab,c->abc", A, Cv)
            + np.einsum("bc,a->abc", A, Cv)
            + np.einsum("ca,b->abc", A, Cv))


def _pred_s3_like(ctx):
    mp = ctx.mp
    n = ctx.n
    _, _, S = ctx.rps("cartan")
    S_low = ctx.lowered(S)
    _, _, Sc_v, _ = _riccis(ctx)
    M = (np.einsum("ac,bd->abcd", mp.hbar, mp.hbar)
         - np.einsum("ad,bc->abcd", mp.hbar, mp.hbar))
    rhs = Sc_v / ((n - 1) * (n - 2)) * M
    return relative_residual(S_low, rhs), {"Sc_v": float(Sc_v)}


def _pred_s4_like(ctx):
    mp = ctx.mp
    n = ctx.n
    _, _, S = ctx.rps("cartan")
    S_low = ctx.lowered(S)
    Ric_v, _, Sc_v, _ = _riccis(ctx)
    F = (Ric_v - Sc_v * mp.hbar / (2 * (n - 2))) / (n - 3)
    rhs = (np.einsum("ac,bd->abcd", mp.hbar, F)
           - np.einsum("bc,ad->abcd", mp.hbar, F)
           + np.einsum("bd,ac->abcd", mp.hbar, F)
           - np.einsum("ad,bc->abcd", mp.hbar, F))
    return relative_residual(S_low, rhs), {"F_form": F.tolist()}


def _riccis(ctx):
    def build():
        R, _, S = ctx.rps("cartan")
        return ricci_scalars((R, S), ctx.mp)
    return ctx._memo("riccis", build)


def _pred_sv_recurrent(ctx):
    S_jet = ctx.S_jet()
    S = S_jet.value
    if np.linalg.norm(S) <= _DEGENERATE_TOL:
        raise _SampleInapplicable("vanishing v-curvature: recurrence undefined")
    DvS = jet_cov_deriv(ctx.b, S_jet, 1, 3, "v", "cartan").value
    lam, residual = fit_recurrence(S, DvS)
    return residual, {"lambda": [float(v) for v in lam]}


def _pred_landsberg(ctx):
    r1 = relative_residual(ctx.Phat(), 0.0)
    r2 = relative_residual(ctx.nabla_eta_T(), 0.0)
    return max(r1, r2), {"route_phat": r1, "route_nablaT": r2}


def _pred_general_landsberg(ctx):
    tr = np.einsum("mxm->x", ctx.Phat())
    r1 = relative_residual(tr, 0.0)
    r2 = relative_residual(ctx.nabla_eta_C(), 0.0)
    return max(r1, r2), {"route_trace": r1, "route_nablaC": r2}


def _pred_p_symmetric(ctx):
    _, P, _ = ctx.rps("cartan")
    return relative_residual(P, P.transpose(0, 1, 3, 2)), {}


def _pred_p2_like(ctx):
    mp = ctx.mp
    n = ctx.n
    _, P, _ = ctx.rps("cartan")
    P_low = ctx.lowered(P)
    eye = np.eye(n)
    M = (np.einsum("ce,abd->eabcd", eye, mp.C3)
         - np.einsum("de,abc->eabcd", eye, mp.C3))
    D = M.reshape(n, -1).T
    alpha, *_ = np.linalg.lstsq(D, P_low.reshape(-1), rcond=None)
    rhs = np.einsum("e,eabcd->abcd", alpha, M)
    residual = relative_residual(P_low, rhs)
    return residual, {"alpha": [float(v) for v in alpha]}


def _pred_p_reducible(ctx):
    mp = ctx.mp
    n = ctx.n
    delta = ctx.nabla_eta_C() / (n + 1)
    Phat_low = np.einsum("iz,ixy->xyz", mp.g, ctx.Phat())
    rhs = (np.einsum("x,yz->xyz", delta, mp.hbar)
           + np.einsum("y,zx->xyz", delta, mp.hbar)
           + np.einsum("z,xy->xyz", delta, mp.hbar))
    residual = relative_residual(Phat_low, rhs)
    return residual, {"delta": [float(v) for v in delta]}


def _pred_h_isotropic(ctx):
    mp = ctx.mp
    n = ctx.n
    R, _, _ = ctx.rps("cartan")
    eye = np.eye(n)
    M = (np.einsum("kj,il->ijkl", mp.g, eye)
         - np.einsum("lj,ik->ijkl", mp.g, eye))
    mm = float(np.vdot(M, M))
    k0 = float(np.vdot(R, M) / mm) if mm > 1e-30 else 0.0
    return relative_residual(R, k0 * M), {"k0": k0}


def _scalar_curvature_fit(ctx):
    mp = ctx.mp
    R, _, _ = ctx.rps("cartan")
    R_low = ctx.lowered(R)
    Rbb = np.einsum("abcd,a,c->bd", R_low, ctx.y, ctx.y)
    L2 = mp.L * mp.L
    w, V = np.linalg.eigh(mp.hbar)
    keep = w > 1e-6 * max(1.0, float(w.max()))
    if not np.any(keep):
        raise _SampleInapplicable("angular metric numerically rank-0")
    ks = [float(V[:, i] @ Rbb @ V[:, i]) / (L2 * float(w[i]))
          for i in range(ctx.n) if keep[i]]
    k = float(np.mean(ks))
    spread = (max(ks) - min(ks)) / (1.0 + abs(k))
    residual = max(relative_residual(Rbb, k * L2 * mp.hbar), spread)
    return residual, k


def _pred_scalar_curvature(ctx):
    residual, k = _scalar_curvature_fit(ctx)
    return residual, {"k": k}


def _pred_constant_curvature(ctx):
    # per-sample part; the cross-sample constancy is enforced in classify()
    residual, k = _scalar_curvature_fit(ctx)
    return residual, {"k": k}


def _pred_r3_like(ctx):
    mp = ctx.mp
    n = ctx.n
    R, _, _ = ctx.rps("cartan")
    R_low = ctx.lowered(R)
    _, Ric_h, _, Sc_h = _riccis(ctx)
    F = (Ric_h - Sc_h * mp.g / (2 * (n - 1))) / (n - 2)
    rhs = (np.einsum("ac,bd->abcd", mp.g, F)
           - np.einsum("bc,ad->abcd", mp.g, F)
           + np.einsum("bd,ac->abcd", mp.g, F)
           - np.einsum("ad,bc->abcd", mp.g, F))
    return relative_residual(R_low, rhs), {"F_form": F.tolist()}


def _pred_p_scalar_curvature(ctx):
    mp = ctx.mp
    R, _, _ = ctx.rps("cartan")
    R_low = ctx.lowered(R)
    phi = np.eye(ctx.n) - np.outer(ctx.y, mp.ell) / mp.L
    Rphi = np.einsum("abcd,ax,by,cz,dw->xyzw", R_low, phi, phi, phi, phi)
    M = (np.einsum("xz,yw->xyzw", mp.hbar, mp.hbar)
         - np.einsum("xw,yz->xyzw", mp.hbar, mp.hbar))
    mm = float(np.vdot(M, M))
    R0 = float(np.vdot(Rphi, M) / mm) if mm > 1e-30 else 0.0
    return relative_residual(Rphi, R0 * M), {"R0": R0}


def _pred_s_ps_curvature(ctx):
    r1, f1 = _pred_scalar_curvature(ctx)
    r2, f2 = _pred_p_scalar_curvature(ctx)
    return max(r1, r2), {**f1, **f2}


def _pred_symmetric(ctx):
    R_jet = ctx.R_berwald_jet()
    DhR = jet_cov_deriv(ctx.b, R_jet, 1, 3, "h", "berwald").value
    return relative_residual(DhR, 0.0), {}


_PREDICATE_FNS = {
    "riemannian": _pred_riemannian,
    "locally-minkowskian": _pred_locally_minkowskian,
    "berwald": _pred_berwald,
    "ch-recurrent": _pred_ch_recurrent,
    "p-star": _pred_p_star,
    "cv-recurrent": _pred_cv_recurrent,
    "c0-recurrent": _pred_c0_recurrent,
    "semi-c-reducible": _pred_semi_c_reducible,
    "c-reducible": _pred_c_reducible,
    "c2-like": _pred_c2_like,
    "quasi-c-reducible": _pred_quasi_c_reducible,
    "s3-like": _pred_s3_like,
    "s4-like": _pred_s4_like,
    "sv-recurrent": _pred_sv_recurrent,
    "landsberg": _pred_landsberg,
    "general-landsberg": _pred_general_landsberg,
    "p-symmetric": _pred_p_symmetric,
    "p2-like": _pred_p2_like,
    "p-reducible": _pred_p_reducible,
    "h-isotropic": _pred_h_isotropic,
    "scalar-curvature": _pred_scalar_curvature,
    "constant-curvature": _pred_constant_curvature,
    "r3-like": _pred_r3_like,
    "p-scalar-curvature": _pred_p_scalar_curvature,
    "s-ps-curvature": _pred_s_ps_curvature,
    "symmetric": _pred_symmetric,
}


def default_tolerance(predicate: str) -> float:
    return STRUCTURAL_TOL if predicate in _STRUCTURAL else FITTED_TOL


def classify(F, predicate: str, samples: Sequence[Point],
             tol: Optional[float] = None) -> Verdict:
    """Evaluate one special-space predicate over sample points."""
    if predicate not in _PREDICATE_FNS:
        raise UnknownIdError(
            f"unknown predicate {predicate!r}; expected one of {PREDICATES}")
    if tol is None:
        tol = default_tolerance(predicate)
    floor = _FLOORS.get(predicate, 2)
    if F.n < floor:
        return Verdict(predicate=predicate, status="inapplicable",
                       max_residual=None, residuals=(), fitted={},
                       tolerance=tol, samples_evaluated=0,
                       samples_skipped=len(samples),
                       reason=f"dimension {F.n} below definition floor {floor}")
    order = _ORDERS.get(predicate, 4)
    fn = _PREDICATE_FNS[predicate]
    residuals: list[float] = []
    fitted: dict[str, list] = {}
    skipped = 0
    reason = None
    for p in samples:
        try:
            res, fit = fn(_Ctx(F, p, order))
        except _SampleInapplicable as exc:
            skipped += 1
            reason = exc.reason
            continue
        residuals.append(res)
        for key, val in fit.items():
            fitted.setdefault(key, []).append(val)
    if not residuals:
        return Verdict(predicate=predicate, status="inapplicable",
                       max_residual=None, residuals=(), fitted={},
                       tolerance=tol, samples_evaluated=0,
                       samples_skipped=skipped, reason=reason)
    max_res = max(residuals)
    if predicate == "constant-curvature":
        ks = fitted.get("k", [])
        k_mean = float(np.mean(ks))
        k_spread = (max(ks) - min(ks)) / (1.0 + abs(k_mean))
        fitted["k_mean"] = k_mean
        fitted["k_spread"] = k_spread
        max_res = max(max_res, k_spread)
    status = "holds" if max_res <= tol else "fails"
    return Verdict(predicate=predicate, status=status, max_residual=max_res,
                   residuals=tuple(residuals), fitted=fitted, tolerance=tol,
                   samples_evaluated=len(residuals), samples_skipped=skipped,
                   reason=reason)


# ------------------------------------------------------------- hypotheses


def _hyp_fields(cc, p: Point):
    return cc.state(p, 4)


def _hyp_A(cc, p):
    return relative_residual(_hyp_fields(cc, p).Atensor.value, 0.0)


def _hyp_iota_A(cc, p):
    return relative_residual(_hyp_fields(cc, p).iota_A(), 0.0)


def _hyp_A0(cc, p):
    return relative_residual(_hyp_fields(cc, p).A0(), 0.0)


def _hyp_H_eta(cc, p):
    st = _hyp_fields(cc, p)
    H = st.H_deform()
    val = np.einsum("ijkl,j,k->il", H, st.y, st.y)
    return relative_residual(val, 0.0)


def _hyp_minkowski(cc, p):
    st = _hyp_fields(cc, p)
    dB0 = st.B0.grad(st.b.ys).value      # Berwald D-gamma of B0 is plain d-dot
    H = st.H_deform()
    Heta = np.einsum("ijkl,j->ikl", H, st.y)
    return max(relative_residual(dB0, 0.0), relative_residual(Heta, 0.0))


def _hyp_homothety(cc, p):
    return relative_residual(_hyp_fields(cc, p).sk.value, 0.0)


_HYPOTHESIS_FNS = {
    "A-vanishes": _hyp_A,
    "iota-A-vanishes": _hyp_iota_A,
    "A0-vanishes": _hyp_A0,
    "H-eta-vanishes": _hyp_H_eta,
    "minkowski-hyp": _hyp_minkowski,
    "homothety": _hyp_homothety,
}


def check_hypothesis(cc, name: str, samples: Sequence[Point],
                     tol: float = STRUCTURAL_TOL) -> Verdict:
    """Residual of one invariance-proposition hypothesis over samples."""
    if name not in _HYPOTHESIS_FNS:
        raise UnknownIdError(
            f"unknown hypothesis {name!r}; expected one of {HYPOTHESES}")
    fn = _HYPOTHESIS_FNS[name]
    residuals = tuple(fn(cc, p) for p in samples)
    max_res = max(residuals) if residuals else None
    status = "holds" if (residuals and max_res <= tol) else "fails"
    return Verdict(predicate=name, status=status, max_residual=max_res,
                   residuals=residuals, fitted={}, tolerance=tol,
                   samples_evaluated=len(residuals))
