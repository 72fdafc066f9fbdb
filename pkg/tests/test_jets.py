"""Taylor-jet core: expansion correctness, arithmetic, brackets, FD oracle."""

from __future__ import annotations

import numpy as np
import pytest

from finsler import (OrderError, Point, VectorFieldTM, const_jet, fd_oracle,
                     jet_einsum, jet_matrix_inverse, lie_bracket)
from finsler.jets import MAX_ORDER, coordinate_jets, eval_jet
from finsler.jetspace import get_space

from conftest import samples, structure


def test_point_requires_nonzero_direction():
    with pytest.raises(Exception):
        Point((0.0, 0.0), (0.0, 0.0))


def test_point_requires_dimension_two():
    with pytest.raises(Exception):
        Point((0.0,), (1.0,))


def test_cubic_taylor_coefficients():
    # (2+h)^3 = 8 + 12h + 6h^2 + h^3
    p = Point((2.0, 0.0), (1.0, 0.0))
    jet = eval_jet(lambda v: v[0] * v[0] * v[0], p, 3)
    assert jet.value == pytest.approx(8.0, abs=1e-13)
    assert jet.coefficient((1, 0, 0, 0)) == pytest.approx(12.0, abs=1e-12)
    assert jet.coefficient((2, 0, 0, 0)) == pytest.approx(6.0, abs=1e-12)
    assert jet.coefficient((3, 0, 0, 0)) == pytest.approx(1.0, abs=1e-12)


def test_constant_field_has_no_higher_terms():
    p = Point((0.3, -0.4), (1.0, 2.0))
    space = get_space(4, 2)
    jet = eval_jet(lambda v: const_jet(v[0].space, 5.0), p, 2)
    assert jet.value == 5.0
    data = np.asarray(jet.data)
    assert np.all(data[1:] == 0.0)
    assert space.ncoef == data.shape[0]


def test_exponential_taylor_coefficients():
    p = Point((0.0, 0.0), (1.0, 0.0))
    jet = eval_jet(lambda v: v[0].exp(), p, 2)
    assert jet.value == pytest.approx(1.0, abs=1e-12)
    assert jet.coefficient((1, 0, 0, 0)) == pytest.approx(1.0, abs=1e-12)
    assert jet.coefficient((2, 0, 0, 0)) == pytest.approx(0.5, abs=1e-12)


def test_polynomial_arithmetic_is_exact():
    # (x1 + 2*y2)^4 expanded at (1, ..., 1): check a mixed coefficient
    # against the multinomial expansion  C(4,k) * 2^k * x1^(4-k) y2^k.
    p = Point((1.0, 1.0), (1.0, 1.0))
    f = lambda v: (v[0] + 2.0 * v[3]) ** 4
    jet = eval_jet(f, p, 4)
    base = 1.0 + 2.0
    assert jet.value == pytest.approx(base ** 4, rel=1e-13)
    # d^2/dx1^2: 12*(x1+2y2)^2 -> Taylor coeff 12*9/2! = 54
    assert jet.coefficient((2, 0, 0, 0)) == pytest.approx(54.0, rel=1e-13)
    # d^2/dx1 dy2: 24*(x1+2y2)^2 -> coeff 24*9 = 216
    assert jet.coefficient((1, 0, 0, 1)) == pytest.approx(216.0, rel=1e-13)
    # d^4/dy2^4: 16*4! -> Taylor coeff 16
    assert jet.coefficient((0, 0, 0, 4)) == pytest.approx(16.0, rel=1e-13)


def test_division_and_sqrt_round_trip():
    p = Point((0.5, -0.2), (1.3, 0.7))
    f = lambda v: ((v[2] * v[2] + v[3] * v[3]).sqrt() ** 2
                   / (v[2] * v[2] + v[3] * v[3]))
    jet = eval_jet(f, p, 3)
    assert jet.value == pytest.approx(1.0, rel=1e-12)
    data = np.asarray(jet.data)
    assert np.max(np.abs(data[1:])) < 1e-11


def test_order_cap_enforced():
    p = Point((0.0, 0.0), (1.0, 0.0))
    with pytest.raises(OrderError):
        eval_jet(lambda v: v[0], p, MAX_ORDER + 1)


def test_jet_data_is_immutable():
    p = Point((0.0, 0.0), (1.0, 0.0))
    jet = eval_jet(lambda v: v[0] * v[1], p, 2)
    with pytest.raises(Exception):
        jet.data[0] = 99.0


@pytest.mark.parametrize("label", ["euclid2", "hyperb2", "randers2-05",
                                   "quartic2", "randers3-02"])
def test_jet_vs_fd_oracle_on_metric_energy(label):
    """Jet derivatives of L^2 match central finite differences, orders 1-3."""
    import math

    F = structure(label)
    n = F.n
    field = F.lsq_field
    step = {1: 1e-3, 2: 1e-3, 3: 5e-3}  # balances truncation vs roundoff
    for p in samples(label, count=5, seed=11):
        jet = eval_jet(field, p, 3)
        rng = np.random.default_rng(3)
        for _ in range(6):
            alpha = np.zeros(2 * n, dtype=int)
            total = int(rng.integers(1, 4))
            for _ in range(total):
                alpha[rng.integers(0, 2 * n)] += 1
            fd = fd_oracle(field, p, alpha, h=step[total], richardson=True)
            norm = math.prod(math.factorial(int(a)) for a in alpha)
            exact = jet.coefficient(tuple(alpha)) * norm
            assert abs(exact - fd) <= 1e-6 * (1.0 + abs(exact) + abs(fd))


def test_fd_oracle_trivia():
    p = Point((0.0, 0.0), (1.0, 1.0))
    # exp: second derivative at 0 is 1
    d2 = fd_oracle(lambda v: v[0].exp(), p, (2, 0, 0, 0), h=1e-3)
    assert d2 == pytest.approx(1.0, abs=1e-6)
    # linear field: second derivative vanishes
    lin = fd_oracle(lambda v: 3.0 * v[1] - v[2], p, (0, 2, 0, 0))
    assert abs(lin) < 1e-9
    # |y|^2: second derivative in y1 is 2
    quad = fd_oracle(lambda v: v[2] * v[2] + v[3] * v[3], p, (0, 0, 2, 0))
    assert quad == pytest.approx(2.0, abs=1e-8)


def test_fd_oracle_rejects_order_four():
    p = Point((0.0, 0.0), (1.0, 1.0))
    with pytest.raises(OrderError):
        fd_oracle(lambda v: v[0], p, (4, 0, 0, 0))


def test_lie_bracket_coordinate_fields():
    # X = d/dx1, Y = x1 d/dx2  =>  [X, Y] = d/dx2 everywhere.
    from finsler.jets import jt_stack
    X = VectorFieldTM.constant((1.0, 0.0, 0.0, 0.0))

    def ycomp(v):
        zero = const_jet(v[0].space, 0.0)
        return jt_stack([zero, v[0], zero, zero])

    Y = VectorFieldTM(ycomp)
    for pt in [Point((0.1, 0.2), (1.0, 0.5)), Point((-1.0, 3.0), (0.5, 2.0))]:
        br = lie_bracket(X, Y, pt)
        assert np.allclose(br, [0.0, 1.0, 0.0, 0.0], atol=1e-12)


def test_lie_bracket_antisymmetry_and_self():
    def mk(seed):
        rng = np.random.default_rng(seed)
        coef = rng.uniform(-1, 1, (4, 4))

        def comp(v):
            from finsler.jets import jt_stack
            rows = []
            for i in range(4):
                acc = const_jet(v[0].space, 0.0)
                for j in range(4):
                    acc = acc + coef[i, j] * (v[j] * v[(i + j) % 4])
                rows.append(acc)
            return jt_stack(rows)

        return VectorFieldTM(comp)

    X, Y = mk(1), mk(2)
    p = Point((0.4, -0.3), (1.1, 0.6))
    assert np.allclose(lie_bracket(X, X, p), 0.0, atol=1e-12)
    assert np.allclose(lie_bracket(X, Y, p), -lie_bracket(Y, X, p),
                       atol=1e-12)


def test_lie_bracket_vertical_rotation_fields():
    # X = y1 d/dy2, Y = y2 d/dy1 at y=(1,2): [X,Y] = y1 d/dy1 - y2 d/dy2
    from finsler.jets import jt_stack

    def xcomp(v):
        zero = const_jet(v[0].space, 0.0)
        return jt_stack([zero, zero, zero, v[2]])

    def ycomp(v):
        zero = const_jet(v[0].space, 0.0)
        return jt_stack([zero, zero, v[3], zero])

    X, Y = VectorFieldTM(xcomp), VectorFieldTM(ycomp)
    p = Point((0.0, 0.0), (1.0, 2.0))
    br = lie_bracket(X, Y, p)
    assert np.allclose(br, [0.0, 0.0, 1.0, -2.0], atol=1e-12)


def test_lie_bracket_jacobi_identity(rng):
    from finsler.jets import jt_stack

    def mk(seed):
        r = np.random.default_rng(seed)
        a = r.uniform(-0.5, 0.5, 4)
        b = r.uniform(-0.5, 0.5, (4, 4))

        def comp(v):
            rows = []
            for i in range(4):
                acc = const_jet(v[0].space, float(a[i]))
                for j in range(4):
                    acc = acc + float(b[i, j]) * (v[j] * v[j])
                rows.append(acc)
            return jt_stack(rows)

        return VectorFieldTM(comp)

    X, Y, Z = mk(5), mk(6), mk(7)
    p = Point((0.2, 0.1), (0.9, -0.4))
    total = (lie_bracket(X.bracket(Y), Z, p, order=3)
             + lie_bracket(Y.bracket(Z), X, p, order=3)
             + lie_bracket(Z.bracket(X), Y, p, order=3))
    assert np.max(np.abs(total)) < 1e-8


def test_jet_einsum_matches_numpy_on_values():
    p = Point((0.3, 0.7), (1.0, -0.5))
    space = get_space(4, 2)
    jets = coordinate_jets(space, p.coords())
    from finsler.jets import jt_stack
    A = jt_stack([jt_stack([jets[0], jets[1]]), jt_stack([jets[2], jets[3]])])
    B = jt_stack([jets[3], jets[0]])
    out = jet_einsum("ij,j->i", A, B)
    expect = np.einsum("ij,j->i", np.asarray(A.value), np.asarray(B.value))
    assert np.allclose(out.value, expect, atol=1e-14)


def test_jet_einsum_rejects_reserved_letter():
    p = Point((0.3, 0.7), (1.0, -0.5))
    space = get_space(4, 2)
    jets = coordinate_jets(space, p.coords())
    from finsler.jets import jt_stack
    v = jt_stack([jets[0], jets[1]])
    with pytest.raises(ValueError):
        jet_einsum("z,z->", v, v)


def test_jet_matrix_inverse():
    p = Point((0.2, -0.1), (1.0, 0.4))
    space = get_space(4, 3)
    jets = coordinate_jets(space, p.coords())
    from finsler.jets import jt_stack
    one = const_jet(space, 1.0)
    g = jt_stack([jt_stack([one + jets[2] * jets[2], jets[2] * jets[3]]),
                  jt_stack([jets[2] * jets[3], one + jets[3] * jets[3]])])
    ginv = jet_matrix_inverse(g)
    ident = jet_einsum("ik,kj->ij", g, ginv)
    data = np.asarray(ident.data)
    eye = np.zeros_like(data)
    eye[0] = np.eye(2)
    assert np.max(np.abs(data - eye)) < 1e-12


def test_backend_selection_env():
    import os
    import subprocess
    import sys

    import finsler.jetspace as js
    assert js.BACKEND_NAME in ("cython", "numpy")
    env = dict(os.environ)
    env["FINSLER_JET_BACKEND"] = "numpy"
    out = subprocess.run(
        [sys.executable, "-c",
         "import finsler.jetspace as js; print(js.BACKEND_NAME)"],
        capture_output=True, text=True, env=env)
    assert out.stdout.strip() == "numpy"


def test_numpy_kernel_agrees_with_active_backend():
    from finsler import _kernels_py
    space = get_space(4, 4)
    rng = np.random.default_rng(9)
    a = rng.uniform(-1, 1, space.ncoef)
    b = rng.uniform(-1, 1, space.ncoef)
    fast = space.convolve(a, b, 4)
    slow = np.zeros_like(a)
    _kernels_py.conv_scalar(a, b, slow, space.tab_ia, space.tab_ib,
                            space.tab_io, int(space.row_limit[4]))
    assert np.allclose(fast, slow, atol=1e-14)
