"""Curvature tensors: defining-formula agreement, oracles, symmetries."""

from __future__ import annotations

import math

import numpy as np
import pytest

from finsler import (KINDS, Point, connection_at, cov_deriv, curvature_at,
                     curvature_defining, metric_at, ricci_scalars)
from finsler.connection import PiTensorField
from finsler.geometry import get_bundle

from conftest import samples, structure


def test_euclidean_curvature_vanishes(euclid2):
    for p in samples("euclid2", 3, 1):
        pack = curvature_at(euclid2, "cartan", p)
        for tensor in (pack.R, pack.P, pack.S):
            assert np.max(np.abs(tensor)) < 1e-12


def test_quartic_is_locally_flat(quartic2):
    """x-independence: R = 0 and the h-derivative of T vanishes."""
    T_field = PiTensorField(valence=(1, 2), components=lambda b: b.T)
    for p in samples("quartic2", 3, 2):
        pack = curvature_at(quartic2, "cartan", p)
        assert np.max(np.abs(pack.R)) < 1e-12
        conn = connection_at(quartic2, "berwald", p)
        assert np.max(np.abs(cov_deriv(conn, T_field, "h"))) < 1e-11


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("label", ["randers2-02", "hyperb2", "quartic2"])
def test_fast_path_matches_defining_formula(kind, label):
    """The index-formula curvatures equal the bracket-definition route."""
    F = structure(label)
    for p in samples(label, 2, 3):
        pack = curvature_at(F, kind, p)
        R, P, S = curvature_defining(F, kind, p)
        scale = 1.0 + max(np.max(np.abs(R)), np.max(np.abs(P)),
                          np.max(np.abs(S)))
        assert np.max(np.abs(pack.R - R)) <= 1e-8 * scale
        assert np.max(np.abs(pack.P - P)) <= 1e-8 * scale
        assert np.max(np.abs(pack.S - S)) <= 1e-8 * scale


def test_hyperbolic_sectional_curvature_is_minus_one(hyperb2):
    """R-flat of diag(1, e^{2x1}): constant sectional curvature -1.

    Oracle: for a Riemannian surface, R_low(y, X, y, X) with the stated slot
    order equals k (g(y,y)g(X,X) - g(y,X)^2); tested with k = -1.
    """
    for p in samples("hyperb2", 4, 5):
        m = metric_at(hyperb2, p)
        pack = curvature_at(hyperb2, "cartan", p)
        y = np.asarray(p.y)
        rng = np.random.default_rng(11)
        for _ in range(3):
            X = rng.uniform(-1, 1, 2)
            num = np.einsum("abcd,a,b,c,d->", pack.R_low, y, X, y, X)
            gyy = y @ m.g @ y
            gxx = X @ m.g @ X
            gyx = y @ m.g @ X
            denom = gyy * gxx - gyx ** 2
            assert num / denom == pytest.approx(-1.0, abs=1e-8)


def test_vertical_curvature_antisymmetries(randers3):
    for p in samples("randers3-05", 3, 7):
        pack = curvature_at(randers3, "cartan", p)
        # antisymmetry in the argument pair (X, Y): last two slots
        assert np.allclose(pack.S, -pack.S.transpose(0, 1, 3, 2), atol=1e-11)
        assert np.allclose(pack.R, -pack.R.transpose(0, 1, 3, 2), atol=1e-10)
        # v-torsion contraction vanishes for every canonical connection
        assert np.max(np.abs(pack.Shat)) < 1e-11


@pytest.mark.parametrize("kind", ["berwald", "chern"])
def test_flat_vertical_curvature_for_gder_kinds(kind, randers3):
    for p in samples("randers3-05", 3, 8):
        pack = curvature_at(randers3, kind, p)
        assert np.max(np.abs(pack.S)) < 1e-12


def test_contracted_torsions_consistency(randers2):
    for p in samples("randers2-05", 3, 9):
        pack = curvature_at(randers2, "cartan", p)
        y = np.asarray(p.y)
        assert np.allclose(pack.Rhat, np.einsum("ijkl,j->ikl", pack.R, y),
                           atol=1e-11)
        assert np.allclose(pack.Phat, np.einsum("ijkl,j->ikl", pack.P, y),
                           atol=1e-11)


def test_phat_equals_horizontal_derivative_of_torsion_along_spray(randers2):
    """The contracted mixed curvature of the Cartan connection."""
    T_field = PiTensorField(valence=(1, 2), components=lambda b: b.T)
    for p in samples("randers2-05", 3, 10):
        pack = curvature_at(randers2, "cartan", p)
        conn = connection_at(randers2, "cartan", p, order=5)
        DhT = cov_deriv(conn, T_field, "h")          # [i][j][k][dir]
        y = np.asarray(p.y)
        nabla_beta_T = np.einsum("ijkd,d->ijk", DhT, y)
        assert np.allclose(pack.Phat, nabla_beta_T, atol=1e-9)


def test_ricci_and_scalar_traces(quartic3):
    for p in samples("quartic3", 2, 11):
        m = metric_at(quartic3, p)
        pack = curvature_at(quartic3, "cartan", p)
        Ric_v, Ric_h, Sc_v, Sc_h = ricci_scalars((pack.R, pack.S), m)
        assert np.allclose(Ric_v, np.einsum("mbam->ab", pack.S), atol=1e-12)
        assert np.allclose(Ric_h, np.einsum("mbam->ab", pack.R), atol=1e-12)
        assert Sc_v == pytest.approx(float(np.einsum("ab,ab->", m.g_inv, Ric_v)),
                                     rel=1e-10, abs=1e-12)
        assert Sc_h == pytest.approx(float(np.einsum("ab,ab->", m.g_inv, Ric_h)),
                                     rel=1e-10, abs=1e-12)
        # Riemannian structures have zero vertical Ricci data
        assert isinstance(Sc_v, float) and isinstance(Sc_h, float)


def test_riemannian_vertical_data_vanishes(hyperb2):
    p = samples("hyperb2", 1, 13)[0]
    m = metric_at(hyperb2, p)
    pack = curvature_at(hyperb2, "cartan", p)
    Ric_v, _, Sc_v, _ = ricci_scalars((pack.R, pack.S), m)
    assert np.max(np.abs(Ric_v)) < 1e-12
    assert abs(Sc_v) < 1e-12


def test_quartic_scalar_vertical_curvature_brute_force(quartic3):
    """Sc_v re-derived with an independent contraction order."""
    p = samples("quartic3", 1, 14)[0]
    m = metric_at(quartic3, p)
    pack = curvature_at(quartic3, "cartan", p)
    _, _, Sc_v, _ = ricci_scalars((pack.R, pack.S), m)
    S_low = np.einsum("id,icab->abcd", m.g, pack.S)  # slots (X, Y, Z, W)
    brute = float(np.einsum("ik,jl,ijkl->", m.g_inv, m.g_inv, S_low))
    assert Sc_v == pytest.approx(brute, rel=1e-9, abs=1e-12)


def test_lowered_pack_slots(randers2):
    p = samples("randers2-05", 1, 15)[0]
    m = metric_at(randers2, p)
    pack = curvature_at(randers2, "cartan", p)
    expect = np.einsum("id,icab->abcd", m.g, pack.R)
    assert np.allclose(pack.R_low, expect, atol=1e-12)
