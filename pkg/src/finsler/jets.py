"""Jet arithmetic: tensors whose entries are truncated Taylor expansions.

A ``JetTensor`` stores coefficients in an array of shape ``(ncoef, *shape)``
over a shared :class:`~finsler.jetspace.JetSpace`; ``shape`` is the tensor
shape, and entry 0 along the leading axis is the value at the expansion point.
Every instance is immutable (the data buffer is frozen), so jets can be cached
and shared between threads freely.

Each jet carries an exactness ``order``: coefficients of higher total degree
are zero and carry no information.  Binary operations propagate the minimum of
the operand orders; differentiation lowers it by one.  This is what lets one
evaluation at a generous truncation order serve every downstream consumer
without re-deriving how many derivatives each formula actually needs.

The module also provides the point/vector-field layer used by the geometry
code: admissible points of the slit tangent bundle, scalar-field jet
evaluation, Lie brackets of vector fields on the total space, and an
independent central finite-difference oracle used by the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, comb, cos, exp, factorial, log, log2, sin, sqrt
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, OrderError, SingularMetricError
from .jetspace import JetSpace, get_space

MAX_ORDER = 10


# --------------------------------------------------------------------------- points


@dataclass(frozen=True)
class Point:
    """A point of the slit tangent bundle: chart coordinates x and fiber y."""

    x: tuple[float, ...]
    y: tuple[float, ...]

    def __init__(self, x: Sequence[float], y: Sequence[float]):
        xt = tuple(float(v) for v in x)
        yt = tuple(float(v) for v in y)
        if len(xt) != len(yt):
            raise ValueError("x and y must have the same dimension")
        if len(xt) < 2:
            raise ValueError("dimension must be at least 2")
        if not all(np.isfinite(xt)) or not all(np.isfinite(yt)):
            raise DomainError("point has non-finite coordinates")
        if not any(v != 0.0 for v in yt):
            raise DomainError("fiber coordinate y must be nonzero")
        object.__setattr__(self, "x", xt)
        object.__setattr__(self, "y", yt)

    @property
    def n(self) -> int:
        return len(self.x)

    def coords(self) -> np.ndarray:
        """All 2n coordinates, x-block first."""
        return np.array(self.x + self.y, dtype=np.float64)


# --------------------------------------------------------------------------- jets


class JetTensor:
    """Immutable tensor of truncated Taylor expansions over a shared space."""

    __slots__ = ("space", "data", "order")

    def __init__(self, space: JetSpace, data: np.ndarray, order: int | None = None):
        arr = np.array(data, dtype=np.float64)
        if arr.shape[0] != space.ncoef:
            raise ValueError("leading axis must match the space coefficient count")
        arr.setflags(write=False)
        object.__setattr__(self, "space", space)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "order", space.order if order is None else min(order, space.order))

    def __setattr__(self, name, value):
        raise AttributeError("JetTensor is immutable")

    @classmethod
    def _wrap(cls, space: JetSpace, data: np.ndarray, order: int) -> "JetTensor":
        obj = object.__new__(cls)
        data.setflags(write=False)
        object.__setattr__(obj, "space", space)
        object.__setattr__(obj, "data", data)
        object.__setattr__(obj, "order", min(order, space.order))
        return obj

    # ------------------------------------------------------------ inspection

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape[1:]

    @property
    def value(self):
        """Value at the expansion point: float for scalars, array otherwise."""
        v = self.data[0]
        return float(v) if v.ndim == 0 else np.array(v)

    def coefficient(self, exponent) -> float:
        """Taylor coefficient (derivative / alpha!) of a scalar jet."""
        if self.shape != ():
            raise ValueError("coefficient() applies to scalar jets")
        return float(self.data[self.space.index_of(exponent)])

    def __getitem__(self, idx) -> "JetTensor":
        """Slice tensor components (the coefficient axis is kept whole)."""
        if not isinstance(idx, tuple):
            idx = (idx,)
        return JetTensor._wrap(self.space, np.ascontiguousarray(self.data[(slice(None),) + idx]),
                               self.order)

    def transpose(self, *axes: int) -> "JetTensor":
        """Permute tensor axes (the coefficient axis stays first)."""
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        perm = (0,) + tuple(a + 1 for a in axes)
        return JetTensor._wrap(self.space, np.ascontiguousarray(self.data.transpose(perm)),
                               self.order)

    # ------------------------------------------------------------ arithmetic

    def _coerce(self, other) -> "JetTensor":
        if isinstance(other, JetTensor):
            return other
        arr = np.asarray(other, dtype=np.float64)
        return const_jet(self.space, arr, order=self.space.order)

    def __add__(self, other):
        o = self._coerce(other)
        return JetTensor._wrap(self.space, self.data + o.data, min(self.order, o.order))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return JetTensor._wrap(self.space, self.data - o.data, min(self.order, o.order))

    def __rsub__(self, other):
        o = self._coerce(other)
        return JetTensor._wrap(self.space, o.data - self.data, min(self.order, o.order))

    def __neg__(self):
        return JetTensor._wrap(self.space, -self.data, self.order)

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return JetTensor._wrap(self.space, self.data * float(other), self.order)
        o = self._coerce(other)
        if self.shape == o.shape:
            eff = min(self.order, o.order)
            if self.shape == ():
                out = self.space.convolve(self.data, o.data, eff)
            else:
                m = int(np.prod(self.shape))
                a = np.ascontiguousarray(self.data.reshape(self.space.ncoef, m))
                b = np.ascontiguousarray(o.data.reshape(self.space.ncoef, m))
                out = self.space.convolve(a, b, eff).reshape(self.space.ncoef, *self.shape)
            return JetTensor._wrap(self.space, out, eff)
        if self.shape == ():
            return jet_einsum(",...->...", self, o)
        if o.shape == ():
            return jet_einsum(",...->...", o, self)
        raise ValueError("shape mismatch in jet product; use jet_einsum for contractions")

    def __rmul__(self, other):
        return self.__mul__(other)

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            return self * (1.0 / float(other))
        o = self._coerce(other)
        if o.shape != ():
            raise ValueError("can only divide by a scalar jet")
        return self * o.reciprocal()

    def __rtruediv__(self, other):
        if self.shape != ():
            raise ValueError("can only divide by a scalar jet")
        return self._coerce(other) * self.reciprocal()

    def __pow__(self, exponent):
        if isinstance(exponent, int) or (isinstance(exponent, float) and exponent.is_integer()):
            k = int(exponent)
            if k < 0:
                return self.reciprocal() ** (-k)
            result = const_jet(self.space, np.ones(self.shape), order=self.order)
            base = self
            while k:
                if k & 1:
                    result = result * base
                base = base * base if k > 1 else base
                k >>= 1
            return result
        return self._compose_power(float(exponent))

    # ------------------------------------------------------------ calculus

    def d(self, var: int) -> "JetTensor":
        """Partial derivative with respect to variable ``var``."""
        src, dst, fac = self.space.deriv_tables[var]
        out = np.zeros_like(self.data)
        f = fac.reshape((-1,) + (1,) * len(self.shape))
        out[dst] = self.data[src] * f
        return JetTensor._wrap(self.space, out, self.order - 1)

    def grad(self, var_slice: slice) -> "JetTensor":
        """Stack partials over a variable range as a new trailing tensor slot."""
        varlist = range(*var_slice.indices(self.space.nv))
        parts = [self.d(v).data for v in varlist]
        out = np.stack(parts, axis=-1)
        return JetTensor._wrap(self.space, out, self.order - 1)

    # ------------------------------------------------------------ composition

    def _series(self, coeffs: np.ndarray) -> "JetTensor":
        """Analytic composition: sum of coeffs[j] * (self - value)^j by Horner."""
        if self.shape != ():
            raise ValueError("analytic functions apply to scalar jets")
        e = self.order
        h_data = np.array(self.data)
        h_data[0] = 0.0
        h = JetTensor._wrap(self.space, h_data, e)
        acc = const_jet(self.space, coeffs[e], order=e)
        for j in range(e - 1, -1, -1):
            acc = acc * h + coeffs[j]
        return acc

    def _value_for_compose(self, what: str, positive: bool = True) -> float:
        v = float(self.data[0])
        if positive and v <= 0.0:
            raise DomainError(f"{what} requires a positive value, got {v}")
        if not positive and v == 0.0:
            raise DomainError(f"{what} requires a nonzero value")
        return v

    def reciprocal(self) -> "JetTensor":
        v = self._value_for_compose("reciprocal", positive=False)
        j = np.arange(self.order + 1)
        coeffs = (-1.0) ** j / v ** (j + 1)
        return self._series(coeffs)

    def sqrt(self) -> "JetTensor":
        return self._compose_power(0.5)

    def _compose_power(self, c: float) -> "JetTensor":
        v = self._value_for_compose(f"power {c}")
        coeffs = np.empty(self.order + 1)
        binom = 1.0
        for j in range(self.order + 1):
            coeffs[j] = binom * v ** (c - j)
            binom *= (c - j) / (j + 1)
        return self._series(coeffs)

    def exp(self) -> "JetTensor":
        v = float(self.data[0])
        ev = exp(v)
        coeffs = np.array([ev / factorial(j) for j in range(self.order + 1)])
        return self._series(coeffs)

    def log(self) -> "JetTensor":
        v = self._value_for_compose("log")
        coeffs = np.empty(self.order + 1)
        coeffs[0] = log(v)
        for j in range(1, self.order + 1):
            coeffs[j] = (-1.0) ** (j + 1) / (j * v**j)
        return self._series(coeffs)

    def sin(self) -> "JetTensor":
        v = float(self.data[0])
        cycle = [sin(v), cos(v), -sin(v), -cos(v)]
        coeffs = np.array([cycle[j % 4] / factorial(j) for j in range(self.order + 1)])
        return self._series(coeffs)

    def cos(self) -> "JetTensor":
        v = float(self.data[0])
        cycle = [cos(v), -sin(v), -cos(v), sin(v)]
        coeffs = np.array([cycle[j % 4] / factorial(j) for j in range(self.order + 1)])
        return self._series(coeffs)

    def absolute(self) -> "JetTensor":
        v = float(self.data[0])
        if v > 0.0:
            return self
        if v < 0.0:
            return -self
        raise DomainError("abs is not smooth at zero")


def const_jet(space: JetSpace, value, order: int | None = None) -> JetTensor:
    """Constant jet (all derivatives zero)."""
    arr = np.asarray(value, dtype=np.float64)
    data = np.zeros((space.ncoef, *arr.shape))
    data[0] = arr
    return JetTensor._wrap(space, data, space.order if order is None else order)


def coordinate_jets(space: JetSpace, values: Sequence[float]) -> list[JetTensor]:
    """One linear jet per variable: value plus unit first-order coefficient."""
    if len(values) != space.nv:
        raise ValueError("need one value per variable")
    out = []
    for v, val in enumerate(values):
        data = np.zeros(space.ncoef)
        data[0] = float(val)
        if space.order >= 1:
            exp_v = np.zeros(space.nv, dtype=np.int64)
            exp_v[v] = 1
            data[space.index_of(exp_v)] = 1.0
        out.append(JetTensor._wrap(space, data, space.order))
    return out


def jet_einsum(subscripts: str, a: JetTensor, b: JetTensor) -> JetTensor:
    """Tensor contraction where scalar multiplication is jet convolution.

    ``subscripts`` uses einsum syntax over the tensor axes only; the leading
    coefficient axis is handled internally via the multiplication table.
    """
    if a.space is not b.space:
        raise ValueError("operands live in different jet spaces")
    space = a.space
    if "z" in subscripts:
        raise ValueError("subscript letter 'z' is reserved")
    ins, out_sub = subscripts.split("->")
    sub_a, sub_b = ins.split(",")
    eff = min(a.order, b.order)
    if eff < 0:
        shape = np.einsum(subscripts, a.data[0], b.data[0]).shape
        return JetTensor._wrap(space, np.zeros((space.ncoef, *shape)), 0)
    r = int(space.row_limit[eff])
    ag = a.data[space.tab_ia[:r]]
    bg = b.data[space.tab_ib[:r]]
    prod = np.einsum(f"z{sub_a},z{sub_b}->z{out_sub}", ag, bg)
    out = space.reduce_rows(prod, eff, prod.shape[1:])
    return JetTensor._wrap(space, out, eff)


def jt_stack(parts: Sequence[JetTensor], axis: int = -1) -> JetTensor:
    """Stack jets along a new tensor axis (coefficient axis excluded)."""
    space = parts[0].space
    order = min(p.order for p in parts)
    ax = axis if axis < 0 else axis + 1
    data = np.stack([p.data for p in parts], axis=ax)
    return JetTensor._wrap(space, data, order)


def jet_matrix_inverse(g: JetTensor) -> JetTensor:
    """Inverse of a square matrix of jets by Newton iteration on coefficients."""
    n = g.shape[0]
    if g.shape != (n, n):
        raise ValueError("expected a square jet matrix")
    try:
        x0 = np.linalg.inv(g.data[0])
    except np.linalg.LinAlgError as exc:
        raise SingularMetricError(f"matrix of values is singular: {exc}") from exc
    ident = np.eye(n)
    x = const_jet(g.space, x0, order=g.order)
    steps = max(1, ceil(log2(g.order + 1)))
    for _ in range(steps):
        gx = jet_einsum("ij,jk->ik", g, x)
        x = jet_einsum("ij,jk->ik", x, 2.0 * const_jet(g.space, ident, order=g.order) - gx)
    return x


# --------------------------------------------------------------------- field layer

ScalarField = Callable[[Sequence[JetTensor]], JetTensor]


class VectorFieldTM:
    """Vector field on the slit tangent bundle given by 2n coordinate components.

    The wrapped callable receives the 2n coordinate jets (x-block first) and
    returns a JetTensor of shape (2n,).
    """

    def __init__(self, components: Callable[[Sequence[JetTensor]], JetTensor]):
        self._components = components

    def __call__(self, jet_vars: Sequence[JetTensor]) -> JetTensor:
        comp = self._components(jet_vars)
        if not isinstance(comp, JetTensor):
            comp = jt_stack(list(comp))
        if comp.shape != (len(jet_vars),):
            raise ValueError("component callable must produce a (2n,) jet")
        return comp

    @classmethod
    def from_arrays(cls, fn: Callable[[Sequence[JetTensor]], Sequence[JetTensor]]) -> "VectorFieldTM":
        return cls(lambda v: jt_stack(list(fn(v))))

    @classmethod
    def constant(cls, direction: Sequence[float]) -> "VectorFieldTM":
        vec = np.asarray(direction, dtype=np.float64)
        return cls(lambda v: const_jet(v[0].space, vec))

    def bracket(self, other: "VectorFieldTM") -> "VectorFieldTM":
        """Lie bracket as a new field (costs one jet order per nesting)."""

        def components(jet_vars: Sequence[JetTensor]) -> JetTensor:
            return _bracket_jets(self, other, jet_vars)

        return VectorFieldTM(components)


def _bracket_jets(xf: VectorFieldTM, yf: VectorFieldTM,
                  jet_vars: Sequence[JetTensor]) -> JetTensor:
    xc = xf(jet_vars)
    yc = yf(jet_vars)
    nv = len(jet_vars)
    dy = jt_stack([yc.d(b) for b in range(nv)])  # [a, b] = d_b Y^a
    dx = jt_stack([xc.d(b) for b in range(nv)])
    return jet_einsum("ab,b->a", dy, xc) - jet_einsum("ab,b->a", dx, yc)


def eval_jet(field: ScalarField, p: Point, order: int) -> JetTensor:
    """Truncated Taylor expansion of a scalar field at an admissible point."""
    if order > MAX_ORDER:
        raise OrderError(f"order {order} exceeds the supported maximum {MAX_ORDER}")
    space = get_space(2 * p.n, order)
    jet_vars = coordinate_jets(space, p.coords())
    result = field(jet_vars)
    if not isinstance(result, JetTensor) or result.shape != ():
        raise ValueError("scalar field must produce a scalar jet")
    return result


def lie_bracket(xf: VectorFieldTM, yf: VectorFieldTM, p: Point,
                order: int = 2) -> np.ndarray:
    """Components of [X, Y] at ``p`` in the coordinate frame (2n reals).

    ``order`` is the jet depth the component closures are evaluated at; raise
    it when the fields' components themselves consume derivatives (e.g. lifts
    built from the nonlinear connection).
    """
    space = get_space(2 * p.n, order)
    jet_vars = coordinate_jets(space, p.coords())
    return _bracket_jets(xf, yf, jet_vars).value


def fd_oracle(field: ScalarField, p: Point, direction, h: float = 1e-3,
              richardson: bool = False) -> float:
    """Central finite-difference estimate of a partial derivative.

    ``direction`` is a multi-index over the 2n coordinates; the total
    derivative order must not exceed 3.  Returns the raw derivative (not
    Taylor-normalized), with O(h^2) error, or O(h^4) with Richardson
    extrapolation.
    """
    alpha = np.asarray(direction, dtype=np.int64)
    if alpha.shape != (2 * p.n,) or (alpha < 0).any():
        raise ValueError("direction must be a non-negative multi-index of length 2n")
    if alpha.sum() > 3:
        raise OrderError("finite-difference oracle supports derivative order <= 3")

    space0 = get_space(2 * p.n, 0)

    def value_at(coords: np.ndarray) -> float:
        jet_vars = coordinate_jets(space0, coords)
        return float(field(jet_vars).value)

    def estimate(step: float) -> float:
        def rec(coords: np.ndarray, remaining: np.ndarray) -> float:
            nz = np.flatnonzero(remaining)
            if len(nz) == 0:
                return value_at(coords)
            v = nz[0]
            rem = remaining.copy()
            rem[v] -= 1
            up = coords.copy()
            up[v] += step
            dn = coords.copy()
            dn[v] -= step
            return (rec(up, rem) - rec(dn, rem)) / (2.0 * step)

        return rec(p.coords(), alpha.copy())

    if not richardson:
        return estimate(h)
    full, half = estimate(h), estimate(h / 2.0)
    return (4.0 * half - full) / 3.0
