"""Finsler structures: built-in metric families, parsing, and pointwise tensors.

A structure is defined by its squared norm L² as a jet-evaluable scalar field
on the slit tangent bundle, together with an admissibility test for its cone.
The pointwise layer realizes the standard localizations

    g_ij = 1/2 d²L²/dy^i dy^j        (fundamental tensor)
    C_ijk = 1/4 d³L²/dy^i dy^j dy^k  (totally symmetric cubic tensor)
    T^i_jk = g^il C_ljk              (its metrically mixed form)

along with the unit covector ell_i = dL/dy^i, the angular metric
hbar = g - ell⊗ell, and the trace data C_i, Cvec^i, C² = C_i Cvec^i.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dsl import Expression, parse_expression
from .errors import (ConvexityError, DomainError, ParseError, SchemaError,
                     SingularMetricError, ValidationError)
from .jets import JetTensor, Point, const_jet, eval_jet, jt_stack

FAMILIES = ("euclidean", "riemannian", "randers", "kropina", "quartic", "expression")

_TOP_KEYS = {"family", "n", "params", "domain", "L", "a", "b"}
_FAMILY_PARAMS = {
    "euclidean": set(),
    "riemannian": {"a"},
    "randers": {"a", "b"},
    "kropina": {"a", "b"},
    "quartic": set(),
    "expression": {"L"},
}


class FinslerStructure:
    """An immutable, jet-evaluable Finsler metric on an n-manifold chart."""

    def __init__(self, n: int, family: str, params: dict,
                 lsq_field: Callable[[Sequence[JetTensor]], JetTensor],
                 cone: Callable[[np.ndarray, np.ndarray], bool],
                 domain: Expression | None = None):
        self.n = n
        self.family = family
        self.params = params
        self._lsq_field = lsq_field
        self._cone = cone
        self.domain = domain
        self._frozen = True

    def __setattr__(self, name, value):
        if getattr(self, "_frozen", False):
            raise AttributeError("FinslerStructure is immutable")
        super().__setattr__(name, value)

    def lsq_field(self, jet_vars: Sequence[JetTensor]) -> JetTensor:
        """The squared norm L² as a scalar jet field."""
        return self._lsq_field(jet_vars)

    def energy_jet(self, p: Point, order: int) -> JetTensor:
        """Taylor expansion of L² at an admissible point."""
        if p.n != self.n:
            raise DomainError(f"point dimension {p.n} != structure dimension {self.n}")
        if not self.admissible(np.asarray(p.x), np.asarray(p.y)):
            raise DomainError("point lies outside the admissible cone")
        return eval_jet(self._lsq_field, p, order)

    def admissible(self, x: np.ndarray, y: np.ndarray) -> bool:
        """Whether (x, y) lies in the structure's cone (y != 0 and family rules)."""
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if x.shape != (self.n,) or y.shape != (self.n,):
            return False
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            return False
        if not (y != 0.0).any():
            return False
        if not self._cone(x, y):
            return False
        if self.domain is not None:
            val = _eval_expression_at(self.domain, self.n, x, y)
            if not (np.isfinite(val) and val > 0.0):
                return False
        return True

    def __repr__(self) -> str:
        return f"FinslerStructure(family={self.family!r}, n={self.n})"


@dataclass(frozen=True)
class MetricAtPoint:
    """All zeroth-layer tensors of a Finsler structure at one point."""

    n: int
    L: float
    g: np.ndarray        # (n, n)
    g_inv: np.ndarray    # (n, n)
    ell: np.ndarray      # (n,)
    hbar: np.ndarray     # (n, n)
    C3: np.ndarray       # (n, n, n), fully symmetric, lowered
    T_mixed: np.ndarray  # (n, n, n), first slot raised
    C1: np.ndarray       # (n,), trace covector
    Cvec: np.ndarray     # (n,), raised trace
    C2norm: float        # scalar square norm of the trace


# ------------------------------------------------------------------ evaluation


def _eval_expression_at(expr: Expression, n: int, x: np.ndarray, y: np.ndarray) -> float:
    from .jetspace import get_space
    from .jets import coordinate_jets

    field = expr.bind(n, allow_y=True)
    space = get_space(2 * n, 0)
    jet_vars = coordinate_jets(space, np.concatenate([x, y]))
    try:
        return float(field(jet_vars).value)
    except DomainError:
        return float("nan")


def _value_of_lsq(structure: FinslerStructure, x: np.ndarray, y: np.ndarray) -> float:
    from .jetspace import get_space
    from .jets import coordinate_jets

    space = get_space(2 * structure.n, 0)
    jet_vars = coordinate_jets(space, np.concatenate([x, y]))
    return float(structure.lsq_field(jet_vars).value)


# ------------------------------------------------------------------ families


def _build_euclidean(n: int, params: dict) -> FinslerStructure:
    def lsq(v: Sequence[JetTensor]) -> JetTensor:
        acc = v[n] * v[n]
        for i in range(1, n):
            acc = acc + v[n + i] * v[n + i]
        return acc

    return FinslerStructure(n, "euclidean", {}, lsq, lambda x, y: True)


def _compile_matrix(entries, n: int, what: str) -> list[list]:
    if (not isinstance(entries, (list, tuple)) or len(entries) != n
            or any(not isinstance(row, (list, tuple)) or len(row) != n for row in entries)):
        raise SchemaError(f"{what} must be an {n}x{n} matrix")
    compiled = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            e = entries[i][j]
            if isinstance(e, (int, float)):
                compiled[i][j] = float(e)
            elif isinstance(e, str):
                expr = parse_expression(e)
                expr.validate(n, allow_y=False)
                compiled[i][j] = expr
            else:
                raise SchemaError(f"{what}[{i}][{j}] must be a number or expression string")
    for i in range(n):
        for j in range(i):
            a, b = entries[i][j], entries[j][i]
            if a != b:
                raise ValidationError(f"{what} must be given symmetrically: "
                                      f"entries ({i},{j}) and ({j},{i}) differ")
    return compiled


def _build_riemannian(n: int, params: dict) -> FinslerStructure:
    if "a" not in params:
        raise SchemaError("riemannian family requires coefficient matrix 'a'")
    compiled = _compile_matrix(params["a"], n, "a")
    bound = [[c.bind(n, allow_y=False) if isinstance(c, Expression) else c
              for c in row] for row in compiled]

    def lsq(v: Sequence[JetTensor]) -> JetTensor:
        acc = None
        for i in range(n):
            for j in range(n):
                aij = bound[i][j]
                coeff = aij(v) if callable(aij) else aij
                term = coeff * (v[n + i] * v[n + j])
                acc = term if acc is None else acc + term
        return acc

    return FinslerStructure(n, "riemannian", {"a": params["a"]}, lsq, lambda x, y: True)


def _constant_matrix(params: dict, n: int) -> np.ndarray:
    a = params.get("a")
    if a is None:
        return np.eye(n)
    arr = np.asarray(a, dtype=np.float64)
    if arr.shape != (n, n):
        raise SchemaError(f"'a' must be an {n}x{n} numeric matrix for this family")
    if not np.allclose(arr, arr.T, atol=0.0):
        raise ValidationError("'a' must be symmetric")
    if np.linalg.eigvalsh(arr).min() <= 0.0:
        raise ValidationError("'a' must be positive-definite")
    return arr


def _build_randers(n: int, params: dict) -> FinslerStructure:
    if "b" not in params:
        raise SchemaError("randers family requires drift covector 'b'")
    b = np.asarray(params["b"], dtype=np.float64)
    if b.shape != (n,):
        raise SchemaError(f"'b' must be a list of {n} numbers")
    a = _constant_matrix(params, n)

    def lsq(v: Sequence[JetTensor]) -> JetTensor:
        quad = None
        for i in range(n):
            for j in range(n):
                term = (a[i, j]) * (v[n + i] * v[n + j])
                quad = term if quad is None else quad + term
        drift = None
        for i in range(n):
            term = b[i] * v[n + i]
            drift = term if drift is None else drift + term
        root = quad.sqrt()
        lin = root + drift
        return lin * lin

    # Default cone is all y != 0: for |b| < 1 the norm is positive there, and
    # a drift that is too long must surface as a failed convexity sweep rather
    # than be hidden by a silently shrunken cone.
    return FinslerStructure(n, "randers", {"a": a.tolist(), "b": b.tolist()}, lsq,
                            lambda x, y: True)


def _build_kropina(n: int, params: dict) -> FinslerStructure:
    if "b" not in params:
        raise SchemaError("kropina family requires covector 'b'")
    b = np.asarray(params["b"], dtype=np.float64)
    if b.shape != (n,):
        raise SchemaError(f"'b' must be a list of {n} numbers")
    if not (b != 0.0).any():
        raise ValidationError("'b' must be nonzero for the kropina family")
    a = _constant_matrix(params, n)

    def lsq(v: Sequence[JetTensor]) -> JetTensor:
        quad = None
        for i in range(n):
            for j in range(n):
                term = (a[i, j]) * (v[n + i] * v[n + j])
                quad = term if quad is None else quad + term
        drift = None
        for i in range(n):
            term = b[i] * v[n + i]
            drift = term if drift is None else drift + term
        ratio = quad / drift
        return ratio * ratio

    def cone(x: np.ndarray, y: np.ndarray) -> bool:
        return float(b @ y) > 0.0

    return FinslerStructure(n, "kropina", {"a": a.tolist(), "b": b.tolist()}, lsq, cone)


def _build_quartic(n: int, params: dict) -> FinslerStructure:
    def lsq(v: Sequence[JetTensor]) -> JetTensor:
        acc = None
        for i in range(n):
            sq = v[n + i] * v[n + i]
            term = sq * sq
            acc = term if acc is None else acc + term
        return acc.sqrt()

    return FinslerStructure(n, "quartic", {}, lsq, lambda x, y: True)


def _build_expression(n: int, params: dict) -> FinslerStructure:
    if "L" not in params:
        raise SchemaError("expression family requires an 'L' expression string")
    if not isinstance(params["L"], str):
        raise SchemaError("'L' must be an expression string")
    expr = parse_expression(params["L"])
    expr.validate(n, allow_y=True)
    bound = expr.bind(n, allow_y=True)

    def lsq(v: Sequence[JetTensor]) -> JetTensor:
        L = bound(v)
        return L * L

    def cone(x: np.ndarray, y: np.ndarray) -> bool:
        from .jetspace import get_space
        from .jets import coordinate_jets

        space = get_space(2 * n, 0)
        jet_vars = coordinate_jets(space, np.concatenate([x, y]))
        try:
            val = float(bound(jet_vars).value)
        except (DomainError, ZeroDivisionError, FloatingPointError, OverflowError):
            return False
        return bool(np.isfinite(val) and val > 0.0)

    return FinslerStructure(n, "expression", {"L": params["L"]}, lsq, cone)


_BUILDERS = {
    "euclidean": _build_euclidean,
    "riemannian": _build_riemannian,
    "randers": _build_randers,
    "kropina": _build_kropina,
    "quartic": _build_quartic,
    "expression": _build_expression,
}


# ------------------------------------------------------------------ parsing


def parse_metric(spec) -> FinslerStructure:
    """Build an executable structure from a metric document (dict or JSON text)."""
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"metric document is not valid JSON: {exc}") from exc
    if not isinstance(spec, dict):
        raise SchemaError("metric document must be a JSON object")

    unknown = set(spec) - _TOP_KEYS
    if unknown:
        raise SchemaError(f"unknown keys in metric document: {sorted(unknown)}")
    if "family" not in spec:
        raise SchemaError("metric document requires 'family'")
    family = spec["family"]
    if family not in FAMILIES:
        raise SchemaError(f"unknown family {family!r}; expected one of {FAMILIES}")
    if "n" not in spec:
        raise SchemaError("metric document requires dimension 'n'")
    n = spec["n"]
    if not isinstance(n, int) or n < 2:
        raise SchemaError("'n' must be an integer >= 2")

    params = dict(spec.get("params") or {})
    if not isinstance(params, dict):
        raise SchemaError("'params' must be an object")
    for short in ("a", "b", "L"):
        if short in spec:
            if short in params and params[short] != spec[short]:
                raise SchemaError(f"key {short!r} given both at top level and in params")
            params[short] = spec[short]
    allowed = _FAMILY_PARAMS[family]
    extra = set(params) - allowed
    if extra:
        raise SchemaError(f"family {family!r} does not accept params {sorted(extra)}")

    structure = _BUILDERS[family](n, params)

    if "domain" in spec and spec["domain"] is not None:
        dom = spec["domain"]
        if isinstance(dom, dict):
            unknown_dom = set(dom) - {"cone"}
            if unknown_dom:
                raise SchemaError(f"unknown keys in domain: {sorted(unknown_dom)}")
            dom = dom.get("cone")
        if not isinstance(dom, str):
            raise SchemaError("'domain' must be a cone expression string "
                              "or {\"cone\": string}")
        expr = parse_expression(dom)
        expr.validate(n, allow_y=True)
        object.__setattr__(structure, "domain", expr)

    _validate_homogeneity(structure)
    return structure


def _validate_homogeneity(structure: FinslerStructure) -> None:
    """Probe the degree-2 Euler relation y·d_y L² = 2 L² numerically."""
    n = structure.n
    rng = np.random.default_rng(20240915)
    checked = 0
    for _ in range(64):
        x = rng.uniform(-0.5, 0.5, n)
        y = rng.uniform(-1.0, 1.0, n)
        if not structure.admissible(x, y):
            continue
        p = Point(x, y)
        try:
            j = structure.energy_jet(p, 1)
        except (DomainError, FloatingPointError):
            continue
        lsq = float(j.value)
        if not np.isfinite(lsq) or lsq <= 0.0:
            continue
        euler = 0.0
        for i in range(n):
            alpha = np.zeros(2 * n, dtype=np.int64)
            alpha[n + i] = 1
            euler += p.y[i] * j.coefficient(alpha)
        if abs(euler - 2.0 * lsq) > 1e-8 * max(1.0, abs(lsq)):
            raise ValidationError(
                f"norm is not positively 2-homogeneous at x={x.tolist()}, "
                f"y={y.tolist()}: y·d_y L² = {euler}, 2L² = {2*lsq}")
        checked += 1
        if checked >= 8:
            return
    if checked == 0:
        raise ValidationError("could not find admissible probe points for validation")


# ------------------------------------------------------------------ pointwise tensors


def tensors_from_energy_jet(j: JetTensor, n: int) -> MetricAtPoint:
    """Realize the zeroth-layer tensors from an order >= 3 jet of L²."""
    if j.order < 3:
        raise ValueError("need an order-3 jet of the squared norm")
    yslice = slice(n, 2 * n)
    dE = j.grad(yslice)              # (n,)   dL²/dy
    ddE = dE.grad(yslice)            # (n,n)
    dddE = ddE.grad(yslice)          # (n,n,n)

    lsq = float(j.value)
    if not np.isfinite(lsq) or lsq <= 0.0:
        raise DomainError(f"squared norm must be positive at the point, got {lsq}")
    L = float(np.sqrt(lsq))
    g = 0.5 * ddE.value
    C3 = 0.25 * dddE.value

    try:
        g_inv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise SingularMetricError(f"fundamental tensor is singular: {exc}") from exc
    eigs = np.linalg.eigvalsh(0.5 * (g + g.T))
    if eigs.min() <= 0.0:
        raise ConvexityError(f"fundamental tensor has non-positive eigenvalue "
                             f"{eigs.min():.3e}")

    ell = dE.value / (2.0 * L)
    hbar = g - np.outer(ell, ell)
    T_mixed = np.einsum("il,ljk->ijk", g_inv, C3)
    C1 = np.einsum("jk,ijk->i", g_inv, C3)
    Cvec = g_inv @ C1
    C2 = float(C1 @ Cvec)
    return MetricAtPoint(n=n, L=L, g=g, g_inv=g_inv, ell=ell, hbar=hbar,
                         C3=C3, T_mixed=T_mixed, C1=C1, Cvec=Cvec, C2norm=C2)


def metric_at(F: FinslerStructure, p: Point) -> MetricAtPoint:
    """All pointwise metric tensors of ``F`` at an admissible point."""
    return tensors_from_energy_jet(F.energy_jet(p, 3), F.n)


def conformal_lift(base: FinslerStructure, scale_field) -> FinslerStructure:
    """Structure with squared norm e^{2s(x)} L², sharing the base's cone.

    ``scale_field`` is a bound x-only scalar field (jet vars in, scalar jet
    out).  The admissible cone is unchanged: a positive factor cannot open or
    close it.
    """

    def lsq(v: Sequence[JetTensor]) -> JetTensor:
        return (2.0 * scale_field(v)).exp() * base.lsq_field(v)

    return FinslerStructure(base.n, f"conformal:{base.family}", dict(base.params),
                            lsq, base._cone, base.domain)


@dataclass(frozen=True)
class ConvexityReport:
    """Outcome of a strong-convexity sweep over sample points."""

    passed: bool
    min_eigenvalue: float
    worst_point: Point | None
    samples_checked: int


def strong_convexity_check(F: FinslerStructure, sample_points: Sequence[Point]) -> ConvexityReport:
    """Minimum eigenvalue of the fundamental tensor over the samples."""
    best = np.inf
    worst = None
    checked = 0
    for p in sample_points:
        j = F.energy_jet(p, 2)
        g = 0.5 * j.grad(slice(F.n, 2 * F.n)).grad(slice(F.n, 2 * F.n)).value
        eig = float(np.linalg.eigvalsh(0.5 * (g + g.T)).min())
        checked += 1
        if eig < best:
            best = eig
            worst = p
    return ConvexityReport(passed=bool(checked > 0 and best > 0.0),
                           min_eigenvalue=float(best) if checked else float("nan"),
                           worst_point=worst, samples_checked=checked)
