"""Geodesic spray, nonlinear connection, and the four canonical connections.

The spray comes from the squared norm by the variational formula

    G^i = 1/4 g^il ( y^k d²L²/dy^l dx^k - dL²/dx^l ),

the nonlinear connection is its fiber derivative N^i_j = dG^i/dy^j, and the
Berwald coefficients are one more fiber derivative.  The four canonical linear
connections share that nonlinear connection and differ only in their
horizontal/vertical coefficient pair:

    cartan     (F, T)      chern      (F, 0)
    hashiguchi (dN/dy, T)  berwald    (dN/dy, 0)

where F^i_jk is the metric horizontal coefficient built from the adapted-frame
derivatives of g and T is the mixed cubic tensor.  Covariant differentiation
of arbitrary π-tensor components happens in the adapted frame: horizontal mode
along delta/delta x^k with H-corrections, vertical mode along d/dy^k with
V-corrections.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .geometry import GeometryBundle, get_bundle, jet_cov_deriv
from .jets import JetTensor, Point
from .metric import FinslerStructure

KINDS = ("cartan", "berwald", "chern", "hashiguchi")


@dataclass(frozen=True)
class SprayAtPoint:
    """Spray, nonlinear connection, and Berwald coefficients at one point."""

    G: np.ndarray      # (n,)
    N: np.ndarray      # (n, n), derivative slot last
    Gder: np.ndarray   # (n, n, n), symmetric in the last two slots


@dataclass(frozen=True)
class RegularConnection:
    """A canonical linear connection at one point (shared nonlinear part)."""

    kind: str
    N: np.ndarray            # (n, n)
    H: np.ndarray            # (n, n, n): value, transported, direction
    V: np.ndarray            # (n, n, n): zero array for chern/berwald
    _bundle: GeometryBundle = field(repr=False, compare=False)

    @property
    def point(self) -> Point:
        return self._bundle.p


@dataclass(frozen=True)
class PiTensorField:
    """Components of a π-tensor field, jet-evaluable at any admissible point.

    ``valence = (r, s)``: the component array has r raised axes then s lowered
    axes.  The callable receives a GeometryBundle and must return a JetTensor
    of that shape; it is how fields like g, T, or a curvature contraction are
    handed to covariant differentiation.
    """

    valence: tuple[int, int]
    components: Callable[[GeometryBundle], JetTensor]
    name: str = ""


def spray_at(F: FinslerStructure, p: Point) -> SprayAtPoint:
    """Spray data of ``F`` at an admissible point."""
    bundle = get_bundle(F, p, 4)
    return SprayAtPoint(G=np.array(bundle.G_spray.value),
                        N=np.array(bundle.N.value),
                        Gder=np.array(bundle.Gder.value))


def connection_at(F: FinslerStructure, kind: str, p: Point,
                  order: int = 4) -> RegularConnection:
    """One of the four canonical connections at a point."""
    if kind not in KINDS:
        raise ValueError(f"unknown connection kind {kind!r}; expected one of {KINDS}")
    bundle = get_bundle(F, p, order)
    H = bundle.horizontal_jet(kind).value
    V_jet = bundle.vertical_jet(kind)
    V = V_jet.value if V_jet is not None else np.zeros((F.n,) * 3)
    return RegularConnection(kind=kind, N=np.array(bundle.N.value),
                             H=np.array(H), V=np.array(V), _bundle=bundle)


def cov_deriv(conn: RegularConnection, T: PiTensorField, mode: str,
              p: Point | None = None) -> np.ndarray:
    """Covariant derivative components, one extra lowered slot appended last."""
    bundle = conn._bundle
    if p is not None and (p.x, p.y) != (bundle.p.x, bundle.p.y):
        bundle = get_bundle(bundle.structure, p, bundle.order)
    W = T.components(bundle)
    r, s = T.valence
    out = jet_cov_deriv(bundle, W, r, s, mode, conn.kind)
    return np.array(out.value)
