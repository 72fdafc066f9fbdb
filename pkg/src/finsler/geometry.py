"""Per-point jet geometry: every tensor the engine needs, computed lazily.

A :class:`GeometryBundle` fixes a structure, an admissible point, and a
truncation order, then materializes the tower of jets on demand:

    L² → g, g⁻¹, cubic tensor → spray → nonlinear connection → horizontal
    coefficients → curvature inputs

Everything downstream (connections, curvatures, conformal deformations,
classification) pulls from one bundle per point so that shared subexpressions
are computed once.  Bundles are immutable once built and cached per
(structure, point, order) behind a lock, which keeps multi-threaded sweeps
over sample points cheap and safe.

Index conventions used throughout the repository:

* ``N[i][j]``            nonlinear connection, d(spray)/dy with derivative slot last
* ``H[i][j][k]``         linear horizontal coefficients: value, transported, direction
* ``delta`` appends the horizontal-derivative slot as the LAST axis
* ``grad``  appends the plain-derivative slot as the LAST axis
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from typing import Sequence

import numpy as np

from .jets import (JetTensor, Point, coordinate_jets, jet_einsum,
                   jet_matrix_inverse, jt_stack)
from .jetspace import get_space

_KINDS = ("cartan", "berwald", "chern", "hashiguchi")


def spray_jets(lsq_field, jet_vars: Sequence[JetTensor], n: int):
    """Spray and nonlinear-connection jets from a squared-norm field.

    Works over arbitrary coordinate jets, so the same code serves both the
    per-point bundle and vector-field closures that need the connection at
    whatever point they are evaluated.
    """
    E = lsq_field(jet_vars)
    xs, ys = slice(0, n), slice(n, 2 * n)
    dEy = E.grad(ys)
    g = 0.5 * dEy.grad(ys)
    ginv = jet_matrix_inverse(g)
    y_jet = jt_stack([jet_vars[n + i] for i in range(n)])
    mixed = dEy.grad(xs)                       # [l][k] = d²E/dy^l dx^k
    rhs = jet_einsum("lk,k->l", mixed, y_jet) - E.grad(xs)
    G = 0.25 * jet_einsum("il,l->i", ginv, rhs)
    N = G.grad(ys)
    return E, g, ginv, G, N


class GeometryBundle:
    """All jets of one structure at one point, at one truncation order."""

    def __init__(self, structure, p: Point, order: int):
        self.structure = structure
        self.p = p
        self.n = structure.n
        self.order = order
        self.space = get_space(2 * self.n, order)
        self.jet_vars = coordinate_jets(self.space, p.coords())
        self.xs = slice(0, self.n)
        self.ys = slice(self.n, 2 * self.n)
        self._cache: dict[str, JetTensor] = {}
        self._lock = threading.RLock()

    def _get(self, name: str, builder):
        got = self._cache.get(name)
        if got is not None:
            return got
        with self._lock:
            got = self._cache.get(name)
            if got is None:
                got = builder()
                self._cache[name] = got
        return got

    # ----------------------------------------------------------- base tensors

    @property
    def E(self) -> JetTensor:
        """Squared norm L² as a scalar jet."""
        return self._get("E", lambda: self.structure.lsq_field(self.jet_vars))

    @property
    def L(self) -> JetTensor:
        return self._get("L", lambda: self.E.sqrt())

    @property
    def y_jet(self) -> JetTensor:
        return self._get("y_jet", lambda: jt_stack(
            [self.jet_vars[self.n + i] for i in range(self.n)]))

    @property
    def g(self) -> JetTensor:
        return self._get("g", lambda: 0.5 * self.E.grad(self.ys).grad(self.ys))

    @property
    def ginv(self) -> JetTensor:
        return self._get("ginv", lambda: jet_matrix_inverse(self.g))

    @property
    def C_low(self) -> JetTensor:
        """Totally symmetric cubic tensor, all slots down: 1/4 d³L²/dy³."""
        return self._get("C_low", lambda: 0.5 * self.g.grad(self.ys))

    @property
    def T(self) -> JetTensor:
        """Cubic tensor with the value slot raised: T^i_jk."""
        return self._get("T", lambda: jet_einsum("il,ljk->ijk", self.ginv, self.C_low))

    @property
    def ell(self) -> JetTensor:
        return self._get("ell", lambda: self.L.grad(self.ys))

    @property
    def hbar(self) -> JetTensor:
        return self._get("hbar", lambda: self.g - jet_einsum("i,j->ij", self.ell, self.ell))

    # ----------------------------------------------------------- connection data

    @property
    def G_spray(self) -> JetTensor:
        def build():
            mixed = self.E.grad(self.ys).grad(self.xs)
            rhs = jet_einsum("lk,k->l", mixed, self.y_jet) - self.E.grad(self.xs)
            return 0.25 * jet_einsum("il,l->i", self.ginv, rhs)
        return self._get("G_spray", build)

    @property
    def N(self) -> JetTensor:
        return self._get("N", lambda: self.G_spray.grad(self.ys))

    @property
    def Gder(self) -> JetTensor:
        """Berwald coefficients: second fiber derivative of the spray."""
        return self._get("Gder", lambda: self.N.grad(self.ys))

    def delta(self, A: JetTensor) -> JetTensor:
        """Horizontal derivative d/dx^k - N^m_k d/dy^m, slot appended last."""
        dxA = A.grad(self.xs)
        dyA = A.grad(self.ys)
        sub = "".join(chr(ord("a") + i) for i in range(len(A.shape)))
        corr = jet_einsum(f"{sub}m,mk->{sub}k", dyA, self.N)
        return dxA - corr

    @property
    def F_cartan(self) -> JetTensor:
        """Metric horizontal coefficients F^i_jk of the Cartan connection."""
        def build():
            dg = self.delta(self.g)  # [a][b][c] = delta_c g_ab
            # sym[l][j][k] = delta_j g_lk + delta_k g_jl - delta_l g_jk
            sym = (dg.transpose(0, 2, 1) + dg.transpose(1, 0, 2)
                   - dg.transpose(2, 0, 1))
            return 0.5 * jet_einsum("il,ljk->ijk", self.ginv, sym)
        return self._get("F_cartan", build)

    @property
    def rr(self) -> JetTensor:
        """Curvature of the nonlinear connection: rr[m][k][l] = delta_k N^m_l - delta_l N^m_k."""
        def build():
            dN = self.delta(self.N)  # [m][l][c] = delta_c N^m_l
            return dN.transpose(0, 2, 1) - dN
        return self._get("rr", build)

    def horizontal_jet(self, kind: str) -> JetTensor:
        if kind in ("cartan", "chern"):
            return self.F_cartan
        if kind in ("berwald", "hashiguchi"):
            return self.Gder
        raise ValueError(f"unknown connection kind {kind!r}; expected one of {_KINDS}")

    def vertical_jet(self, kind: str) -> JetTensor | None:
        if kind in ("cartan", "hashiguchi"):
            return self.T
        if kind in ("berwald", "chern"):
            return None
        raise ValueError(f"unknown connection kind {kind!r}; expected one of {_KINDS}")

    # ----------------------------------------------------------- point values

    @property
    def metric_point(self):
        def build():
            from .metric import tensors_from_energy_jet
            return tensors_from_energy_jet(self.E, self.n)
        return self._get("metric_point", build)


def jet_cov_deriv(bundle: GeometryBundle, W: JetTensor, n_upper: int, n_lower: int,
                  mode: str, kind: str) -> JetTensor:
    """Covariant derivative of π-tensor components, new slot appended last.

    ``W`` has ``n_upper`` raised axes followed by ``n_lower`` lowered axes.
    Horizontal mode differentiates along the adapted frame and corrects with
    the kind's horizontal coefficients; vertical mode uses plain fiber
    derivatives with the kind's vertical coefficients.
    """
    if mode not in ("h", "v"):
        raise ValueError("mode must be 'h' or 'v'")
    rank = n_upper + n_lower
    if len(W.shape) != rank:
        raise ValueError("valence does not match component shape")
    letters = [chr(ord("a") + i) for i in range(rank)]
    sub = "".join(letters)
    if mode == "h":
        out = bundle.delta(W)
        coeff = bundle.horizontal_jet(kind)
    else:
        out = W.grad(bundle.ys)
        coeff = bundle.vertical_jet(kind)
    if coeff is not None:
        for t in range(rank):
            swapped = sub[:t] + "m" + sub[t + 1:]
            if t < n_upper:
                term = jet_einsum(f"{letters[t]}mk,{swapped}->{sub}k", coeff, W)
                out = out + term
            else:
                term = jet_einsum(f"m{letters[t]}k,{swapped}->{sub}k", coeff, W)
                out = out - term
    return out


# --------------------------------------------------------------- bundle cache

_BUNDLE_LOCK = threading.Lock()
_BUNDLE_CACHE: OrderedDict = OrderedDict()
_BUNDLE_CAPACITY = 128


def get_bundle(structure, p: Point, order: int) -> GeometryBundle:
    """Shared per-(structure, point, order) bundle with LRU caching."""
    key = (id(structure), p.x, p.y, order)
    with _BUNDLE_LOCK:
        got = _BUNDLE_CACHE.get(key)
        if got is not None:
            _BUNDLE_CACHE.move_to_end(key)
            return got
    bundle = GeometryBundle(structure, p, order)
    with _BUNDLE_LOCK:
        _BUNDLE_CACHE[key] = bundle
        _BUNDLE_CACHE.move_to_end(key)
        while len(_BUNDLE_CACHE) > _BUNDLE_CAPACITY:
            _BUNDLE_CACHE.popitem(last=False)
    return bundle
