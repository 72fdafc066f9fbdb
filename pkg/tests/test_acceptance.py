"""Acceptance suite: one test per shipped guarantee.

Each test below is a complete, independently runnable statement of one
guarantee the package makes, evaluated over the full verification grid
(nine metrics x four scale functions x twenty seeded sample points).
``pytest -v tests/test_acceptance.py`` prints one pass/fail line per
guarantee.  Shared per-pair computations (theorem records, classifier
verdicts, hypothesis checks) are cached at module level so the whole
suite stays well under the two-minute budget.
"""

from __future__ import annotations

import json
import math
from functools import lru_cache

import numpy as np

from conftest import GRID_METRICS, GRID_SIGMAS, samples, structure
from finsler import (Point, RunConfig, THEOREM_IDS, check_hypothesis,
                     classify, connection_at, cov_deriv, curvature_at,
                     deformation_fields, fd_oracle, L_tensor, lift,
                     metric_at, run_suite, spray_at, verify_theorem)
from finsler.classify import (PROPOSITIONS, UNCONDITIONAL_INVARIANT,
                              default_tolerance)
from finsler.connection import PiTensorField
from finsler.geometry import get_bundle
from finsler.jets import eval_jet, jet_einsum

GRID = tuple(GRID_METRICS)
SIGMAS = GRID_SIGMAS
NON_EUCLIDEAN = tuple(label for label in GRID if not label.startswith("euclid"))
HOMOTHETY_GROUP = tuple(p for p, h in PROPOSITIONS if h == "homothety")
CONDITIONAL = tuple((p, h) for p, h in PROPOSITIONS if h is not None)


@lru_cache(maxsize=None)
def change(label: str, sigma: str):
    return lift(structure(label), sigma)


@lru_cache(maxsize=None)
def records(label: str, sigma: str) -> dict:
    """All transformation-law records for one (metric, scale) grid pair."""
    cc = change(label, sigma)
    pts = samples(label)
    return {tid: verify_theorem(tid, cc, pts) for tid in THEOREM_IDS}


@lru_cache(maxsize=None)
def verdict(label: str, sigma: str | None, predicate: str,
            tol: float | None = None):
    """Classifier verdict on the base (sigma=None) or lifted structure."""
    F = structure(label) if sigma is None else change(label, sigma).lifted
    return classify(F, predicate, samples(label), tol=tol)


@lru_cache(maxsize=None)
def hypothesis_holds(label: str, sigma: str, name: str) -> bool:
    v = check_hypothesis(change(label, sigma), name, samples(label))
    return v.status == "holds"


def _sound(rec: dict) -> None:
    """A record only counts if every sample evaluated cleanly."""
    assert rec["errors"] == [], rec["errors"]
    assert rec["samples_evaluated"] == 20


def test_criterion_01_jet_derivatives_match_fd_oracle():
    """Squared-norm derivatives of orders 1-3 agree with central differences
    to 1e-6 relative at every grid sample."""
    step = {1: 1e-3, 2: 1e-3, 3: 5e-3}  # balances truncation vs roundoff
    for label in GRID:
        F = structure(label)
        n = F.n
        field = F.lsq_field
        rng = np.random.default_rng(101)
        for p in samples(label):
            jet = eval_jet(field, p, 3)
            probes = [tuple(int(i == k) for i in range(2 * n))
                      for k in range(2 * n)]
            for _ in range(6):
                alpha = np.zeros(2 * n, dtype=int)
                total = int(rng.integers(2, 4))
                for _ in range(total):
                    alpha[rng.integers(0, 2 * n)] += 1
                probes.append(tuple(int(a) for a in alpha))
            for alpha in probes:
                total = sum(alpha)
                fd = fd_oracle(field, p, alpha, h=step[total], richardson=True)
                norm = math.prod(math.factorial(a) for a in alpha)
                exact = jet.coefficient(alpha) * norm
                assert abs(exact - fd) <= 1e-6 * (1.0 + abs(exact) + abs(fd)), \
                    (label, p, alpha)


def test_criterion_02_metric_axioms():
    """Radial (Euler) identity, zero-homogeneity of g in y, and the radial
    annihilation of the Cartan tensor and angular metric, all below 1e-9."""
    for label in GRID:
        F = structure(label)
        for p in samples(label):
            m = metric_at(F, p)
            y = np.asarray(p.y)
            # 1-homogeneity of the norm: ell . y == L
            assert abs(float(m.ell @ y) - m.L) < 1e-9 * (1.0 + m.L)
            # 0-homogeneity of g in y
            for lam in (0.5, 2.0):
                q = Point(p.x, tuple(lam * v for v in p.y))
                assert np.max(np.abs(metric_at(F, q).g - m.g)) < 1e-9
            # radial annihilation
            assert np.max(np.abs(np.einsum("ijk,k->ij", m.C3, y))) < 1e-9
            assert np.max(np.abs(m.hbar @ y)) < 1e-9


def test_criterion_03_canonical_nonlinear_connection():
    """The spray-induced nonlinear connection conserves the energy along
    horizontal directions, is 1-homogeneous, and has symmetric derivative
    coefficients — residuals below 1e-9."""
    for label in GRID:
        F = structure(label)
        n = F.n
        for p in samples(label):
            b = get_bundle(F, p, 3)
            dx = b.E.grad(slice(0, n))
            dy = b.E.grad(slice(n, 2 * n))
            dh = dx - jet_einsum("j,jk->k", dy, b.N)
            assert np.max(np.abs(dh.value)) < 1e-9, label
            sp = spray_at(F, p)
            for lam in (0.5, 3.0):
                q = Point(p.x, tuple(lam * v for v in p.y))
                assert np.allclose(spray_at(F, q).N, lam * sp.N,
                                   rtol=1e-9, atol=1e-9)
            assert np.max(np.abs(sp.Gder - sp.Gder.transpose(0, 2, 1))) < 1e-9


def test_criterion_04_connection_table_and_metricity():
    """Pairwise differences of the four canonical connections equal the
    Cartan-tensor and hv-torsion corrections (below 1e-8), and the Cartan
    connection is metrical in both modes (below 1e-9)."""
    g_field = PiTensorField(valence=(0, 2), components=lambda b: b.g, name="g")
    for label in GRID:
        F = structure(label)
        for p in samples(label):
            conns = {kind: connection_at(F, kind, p)
                     for kind in ("cartan", "chern", "hashiguchi", "berwald")}
            T = get_bundle(F, p, 4).T.value
            Phat = np.asarray(curvature_at(F, "cartan", p).Phat)
            Hc = np.asarray(conns["cartan"].H)
            # horizontal parts: chern shares cartan's, berwald shares
            # hashiguchi's, and the two groups differ by the hv-torsion
            assert np.max(np.abs(np.asarray(conns["chern"].H) - Hc)) < 1e-8
            assert np.max(np.abs(np.asarray(conns["berwald"].H)
                                 - np.asarray(conns["hashiguchi"].H))) < 1e-8
            assert np.max(np.abs(np.asarray(conns["hashiguchi"].H)
                                 - Hc - Phat)) < 1e-8, label
            # vertical parts: cartan and hashiguchi carry the Cartan tensor,
            # chern and berwald carry none
            assert np.max(np.abs(np.asarray(conns["cartan"].V) - T)) < 1e-8
            assert np.max(np.abs(np.asarray(conns["hashiguchi"].V) - T)) < 1e-8
            assert np.max(np.abs(np.asarray(conns["chern"].V))) < 1e-8
            assert np.max(np.abs(np.asarray(conns["berwald"].V))) < 1e-8
        for p in samples(label)[:6]:
            conn = connection_at(F, "cartan", p)
            for mode in ("h", "v"):
                dg = cov_deriv(conn, g_field, mode)
                assert np.max(np.abs(dg)) < 1e-9, (label, mode)


def test_criterion_05_nonlinear_connection_change():
    """Two-sided check of the nonlinear-connection transformation on every
    non-Euclidean grid pair (residual < 1e-8), plus the exact flat-space
    deformation value 0.1*I for sigma = 0.1*x1 at x=0, y=(1,0)."""
    for label in NON_EUCLIDEAN:
        for sigma in SIGMAS:
            rec = records(label, sigma)["barthel-change"]
            _sound(rec)
            assert rec["max_residual"] < 1e-8, (label, sigma, rec)
    cc = change("euclid2", "0.1*x1")
    Lt = L_tensor(cc, Point((0.0, 0.0), (1.0, 0.0)))
    assert np.allclose(Lt, 0.1 * np.eye(2), atol=1e-12)


def test_criterion_06_cartan_change_and_curvatures():
    """The metrical connection's transformation law holds to 1e-8 in both
    frames; its v-curvature is invariant to 1e-8 and the h-/hv-curvature
    changes close to 1e-7, on every grid pair."""
    for label in GRID:
        for sigma in SIGMAS:
            recs = records(label, sigma)
            rec = recs["cartan-change"]
            _sound(rec)
            assert rec["parts"]["horizontal"] < 1e-8, (label, sigma)
            assert rec["parts"]["vertical"] < 1e-8, (label, sigma)
            rec = recs["cartan-curvatures"]
            _sound(rec)
            assert rec["parts"]["S"] < 1e-8, (label, sigma)
            assert rec["parts"]["P"] < 1e-7, (label, sigma)
            assert rec["parts"]["R"] < 1e-7, (label, sigma)


def test_criterion_07_other_connection_changes_and_curvatures():
    """Transformation laws for the remaining three canonical connections and
    their curvatures close to 1e-7 on every grid pair; the v-curvatures of
    the torsion-free pair vanish identically (below 1e-12)."""
    for label in GRID:
        for sigma in SIGMAS:
            recs = records(label, sigma)
            for tid in ("berwald-change", "chern-change", "hashiguchi-change",
                        "berwald-curvatures", "chern-curvatures",
                        "hashiguchi-curvatures"):
                rec = recs[tid]
                _sound(rec)
                for part, res in rec["parts"].items():
                    assert res < 1e-7, (label, sigma, tid, part, res)
            for tid in ("berwald-curvatures", "chern-curvatures"):
                assert recs[tid]["parts"]["S-zero"] < 1e-12, (label, sigma)


def test_criterion_08_cartan_tensor_derivative_change():
    """The horizontal-derivative law for the Cartan tensor and its radial
    contraction close to 1e-8 on every grid pair, and the change tensor
    annihilates the radial direction to 1e-10."""
    for label in GRID:
        for sigma in SIGMAS:
            recs = records(label, sigma)
            rec = recs["nablaT-change"]
            _sound(rec)
            assert rec["parts"]["nablaT"] < 1e-8, (label, sigma)
            assert rec["parts"]["A-eta"] < 1e-10, (label, sigma)
            rec = recs["landsberg-criterion"]
            _sound(rec)
            assert rec["parts"]["Phat"] < 1e-8, (label, sigma)


def test_criterion_09_homothety_degeneration():
    """A constant scale function kills every deformation field (below 1e-12)
    and preserves the verdict of every homothety-conditional predicate."""
    names = ("sigma_partials", "sigma1", "gradv", "Ltensor", "B", "A", "B0",
             "Bc", "Bstar", "Tprime", "U", "H", "V", "Atensor", "iotaA",
             "A0", "N", "N0")
    for label in GRID:
        cc = change(label, "0.3")
        for p in samples(label):
            f = deformation_fields(cc, p)
            for name in names:
                field = np.asarray(getattr(f, name))
                assert np.max(np.abs(field)) < 1e-12, (label, name)
        for pred in HOMOTHETY_GROUP:
            base = verdict(label, None, pred)
            lifted = verdict(label, "0.3", pred)
            assert base.status == lifted.status, (label, pred, base, lifted)


def test_criterion_10_unconditional_invariants():
    """The ten structurally invariant predicates give the same verdict on the
    base and lifted structure for every grid pair."""
    mismatches = []
    for pred in UNCONDITIONAL_INVARIANT:
        for label in GRID:
            base = verdict(label, None, pred)
            for sigma in SIGMAS:
                lifted = verdict(label, sigma, pred)
                if base.status != lifted.status:
                    mismatches.append((pred, label, sigma,
                                       base.status, lifted.status))
    assert not mismatches, mismatches


def test_criterion_11_conditional_invariants():
    """For every hypothesis-gated predicate, on every grid pair where the
    hypothesis holds: if the base structure has the property, the lifted one
    keeps it at ten times the predicate tolerance."""
    failures = []
    for pred, hyp in CONDITIONAL:
        tol10 = 10.0 * default_tolerance(pred)
        for label in GRID:
            base = verdict(label, None, pred)
            if base.status != "holds":
                continue
            for sigma in SIGMAS:
                if not hypothesis_holds(label, sigma, hyp):
                    continue
                lifted = verdict(label, sigma, pred, tol10)
                if lifted.status != "holds":
                    failures.append((pred, hyp, label, sigma, lifted))
    assert not failures, failures


def test_criterion_12_classifier_sanity():
    """Known structures land in the expected classes: flat norms are
    Riemannian and locally Minkowskian, the exp(2*x1) surface has constant
    curvature -1, quartic norms are non-Riemannian Landsberg, and the
    three-dimensional Randers metrics are C-reducible."""
    for label in ("euclid2", "euclid3"):
        assert verdict(label, None, "riemannian").status == "holds"
        assert verdict(label, None, "locally-minkowskian").status == "holds"
    assert verdict("hyperb2", None, "riemannian").status == "holds"
    cc_verdict = verdict("hyperb2", None, "constant-curvature")
    assert cc_verdict.status == "holds"
    assert abs(cc_verdict.fitted["k_mean"] - (-1.0)) < 1e-6
    for label in ("quartic2", "quartic3"):
        assert verdict(label, None, "locally-minkowskian").status == "holds"
        assert verdict(label, None, "landsberg").status == "holds"
        assert verdict(label, None, "riemannian").status == "fails"
    for label in ("randers3-02", "randers3-05"):
        v = verdict(label, None, "c-reducible")
        assert v.status == "holds"
        assert v.max_residual <= 1e-7


def test_criterion_13_deterministic_reports():
    """Two runs with an identical configuration produce byte-identical
    reports, for both the verification and the classification commands."""
    metric = json.dumps(GRID_METRICS["randers2-02"])
    configs = (
        RunConfig(command="verify", metric=metric, sigma="0.1*x1",
                  theorems=("all",), samples=6, seed=7),
        RunConfig(command="classify", metric=metric,
                  predicates=("all",), samples=6, seed=7),
    )
    for config in configs:
        first = run_suite(config).to_json().encode()
        second = run_suite(config).to_json().encode()
        assert first == second
