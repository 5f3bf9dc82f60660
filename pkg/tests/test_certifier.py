import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from swmoment.certifier import (
    AmbiguousProjection,
    EmptyConstraint,
    NotOnCone,
    c_split_from_sigma,
    certify_criterion,
    certify_quadratic_estimate,
    certify_su2_criterion,
    cone_project,
    criterion_ratio,
    estimate_sigma_adhm12,
    evaluate_witness,
    gauge_rotate,
    haydys_decompose,
    min_mu_on_unit_psi,
    rotate_imh,
    singular_value_mu_norm,
    split_violations,
    su2_criterion_sweep,
    su3_failure_search,
    tangent_basis,
)
from swmoment.quat_core import su_basis
from swmoment.representation import builtin_rep, moment, moment_norm, moment_polarized, rep_adjoint

SU2 = rep_adjoint(su_basis(2))
BUDGET = dict(samples=600, multistarts=4, seed=2)
seeds = st.integers(0, 2**32 - 1)


@pytest.fixture(scope="module")
def su2_report():
    return certify_su2_criterion(**BUDGET)


@pytest.fixture(scope="module")
def sigma_report():
    return estimate_sigma_adhm12(**BUDGET)


# -- cone geometry ------------------------------------------------------------


def test_singular_value_oracle(rng):
    xi = rng.standard_normal((10_000, 12))
    ref = moment_norm(moment(SU2, xi))
    np.testing.assert_allclose(singular_value_mu_norm(xi), ref, rtol=1e-9)


def test_cone_project_rank_one_is_fixed():
    zeta = np.outer([1.0, 2.0, -1.0], [0.5, 0.0, 1.0, 1.0])
    d = cone_project(zeta)
    np.testing.assert_allclose(d.zeta, zeta, atol=1e-14)
    assert d.distance < 1e-14
    assert d.xi_hat_ratio < 10  # ratio of two rounding-level quantities, bounded near the cone


@given(seed=seeds)
def test_cone_project_properties(seed):
    rng = np.random.default_rng(seed)
    xi = rng.standard_normal(12)
    d = cone_project(xi)
    assert d.zeta.shape == (12,)
    np.testing.assert_allclose(d.zeta + d.xi_hat, xi, atol=1e-13)
    assert singular_value_mu_norm(d.zeta) < 1e-12 * np.sum(xi**2)
    # xi_hat is normal to the cone at zeta
    assert np.abs(tangent_basis(d.zeta) @ d.xi_hat).max() < 1e-12
    # nearest point: no random rank-one point is closer
    for _ in range(20):
        z = np.outer(rng.standard_normal(3), rng.standard_normal(4)).ravel()
        assert np.linalg.norm(xi - z) >= d.distance - 1e-12


def test_cone_project_ambiguous():
    with pytest.raises(AmbiguousProjection):
        cone_project(np.zeros(12))
    m = np.zeros((3, 4))
    m[0, 0] = m[1, 1] = 1.0
    with pytest.raises(AmbiguousProjection):
        cone_project(m)
    with pytest.raises(ValueError):
        cone_project(np.ones(7))


def test_cone_project_records_band_position():
    # a point well outside any narrow band is still projected
    m = np.diag([1.0, 0.5, 0.0])
    m = np.hstack([m, np.zeros((3, 1))])
    d = cone_project(m)
    assert d.mu_ratio == pytest.approx(float(singular_value_mu_norm(m)) / 1.25)
    assert d.distance == pytest.approx(0.5)


@given(seed=seeds)
def test_tangent_basis(seed):
    rng = np.random.default_rng(seed)
    zeta = np.outer(rng.standard_normal(3), rng.standard_normal(4)).ravel()
    T = tangent_basis(zeta)
    np.testing.assert_allclose(T @ T.T, np.eye(6), atol=1e-12)
    # mu vanishes on the cone, so its derivative vanishes on tangent vectors
    for t in T:
        assert moment_norm(moment_polarized(SU2, zeta, t)) < 1e-12 * np.linalg.norm(zeta)


def test_haydys_examples():
    tau, nu = haydys_decompose(np.outer([1, 0, 0], [1, 1, 0, 0]))
    np.testing.assert_allclose(tau, [1, 0, 0])
    np.testing.assert_allclose(nu, [1, 1, 0, 0])
    tau, nu = haydys_decompose(-np.outer([1, 0, 0], [0, 0, 1, 0]))
    np.testing.assert_allclose(tau, [1, 0, 0])
    np.testing.assert_allclose(nu, [0, 0, -1, 0])
    with pytest.raises(NotOnCone):
        haydys_decompose(np.eye(3, 4))
    with pytest.raises(NotOnCone):
        haydys_decompose(np.zeros(12))


@given(seed=seeds)
def test_haydys_round_trip(seed):
    rng = np.random.default_rng(seed)
    zeta = np.outer(rng.standard_normal(3), rng.standard_normal(4))
    tau, nu = haydys_decompose(zeta)
    assert np.linalg.norm(tau) == pytest.approx(1.0)
    np.testing.assert_allclose(np.outer(tau, nu), zeta, atol=1e-12)


# -- ratios and invariances ---------------------------------------------------


def test_criterion_ratio_basics(rng):
    assert criterion_ratio(SU2, np.outer([1, 0, 0], [1, 0, 0, 0]).ravel()) == 0.0
    phi = rng.standard_normal(12)
    assert criterion_ratio(SU2, 3.7 * phi) == pytest.approx(criterion_ratio(SU2, phi), rel=1e-12)
    ms = builtin_rep("multispinor-2")
    assert criterion_ratio(ms, rng.standard_normal(8)) == pytest.approx(1.0, rel=1e-12)


@given(seed=seeds)
def test_criterion_ratio_symmetries(seed):
    rng = np.random.default_rng(seed)
    phi = rng.standard_normal(12)
    base = criterion_ratio(SU2, phi)
    assert criterion_ratio(SU2, rotate_imh(rng.standard_normal(4), phi)) == pytest.approx(base, rel=1e-10)
    assert criterion_ratio(SU2, gauge_rotate(SU2, rng.standard_normal(3), phi)) == pytest.approx(base, rel=1e-10)


# -- estimators ---------------------------------------------------------------


def test_su2_criterion(su2_report):
    r = su2_report
    assert np.isfinite(r.estimate) and 0.4 < r.estimate < 0.6
    assert r.stability_ratio < 0.10 and r.spread < 0.25
    assert evaluate_witness(r) == pytest.approx(r.estimate, rel=1e-10)
    d = r.to_dict()
    for key in ("rep", "estimator", "constraint", "estimate", "witness_coeffs", "samples", "multistarts", "seed", "stability_ratio"):
        assert key in d


def test_su2_witness_symmetry_invariance(su2_report, rng):
    w = np.array(su2_report.witness_coeffs)
    q = rng.standard_normal(4)
    moved = rotate_imh(q, gauge_rotate(SU2, rng.standard_normal(3), w))
    assert evaluate_witness(su2_report, moved) == pytest.approx(su2_report.estimate, rel=1e-9)


def test_su2_criterion_deterministic(su2_report):
    again = certify_su2_criterion(**BUDGET)
    assert again.estimate == su2_report.estimate
    assert again.witness_coeffs == su2_report.witness_coeffs


def test_sweep_is_nondecreasing():
    reps = su2_criterion_sweep((0.1, 0.01, 0.05), samples=400, multistarts=4, seed=3, check_stability=False)
    est = [r.estimate for r in reps]
    assert [r.constraint["delta_mu"] for r in reps] == [0.01, 0.05, 0.1]
    assert est == sorted(est)


def test_multispinor_criterion_is_one():
    r = certify_criterion("multispinor-2", **BUDGET)
    assert r.estimate == pytest.approx(1.0, abs=1e-9)


def test_classical_band_is_empty():
    with pytest.raises(EmptyConstraint):
        certify_criterion("classical", **BUDGET)


def test_sigma(sigma_report):
    r = sigma_report
    assert r.estimate < 0.999
    assert r.stability_ratio < 0.10 and r.spread < 0.25
    assert r.extras["stratum"] in ("interior", "boundary")
    assert evaluate_witness(r) == pytest.approx(r.estimate, rel=1e-9)


def test_c_split_validates(sigma_report):
    c = c_split_from_sigma(sigma_report.estimate)
    assert c == pytest.approx(np.sqrt(2 / (1 - sigma_report.estimate)))
    out = split_violations(c, 20_000, seed=11)
    assert out["violations"] == 0 and out["worst_ratio"] <= 1
    assert c_split_from_sigma(1.0) == np.inf


def test_split_violations_detects_too_small_constant():
    assert split_violations(0.5, 2000, seed=1)["violations"] > 0


def test_min_mu_positive_and_nonincreasing():
    r = min_mu_on_unit_psi(**BUDGET)
    rows = r.extras["per_radius"]
    assert [row["radius"] for row in rows] == [0.0, 1.0, 10.0]
    est = [row["estimate"] for row in rows]
    assert all(e > 0 for e in est)
    assert est == sorted(est, reverse=True)
    assert est[0] == pytest.approx(0.5, rel=1e-6)
    assert all(row["stability_ratio"] < 0.10 for row in rows)
    assert evaluate_witness(r) == pytest.approx(r.estimate, rel=1e-9)


def test_quadratic_estimate():
    r = certify_quadratic_estimate(**BUDGET)
    assert 0 < r.estimate < np.inf
    assert r.extras["negative_denominators"] == 0
    assert r.stability_ratio < 0.10
    assert evaluate_witness(r) == pytest.approx(r.estimate, rel=1e-9)


def test_quadratic_rejects_bad_band():
    with pytest.raises(ValueError):
        certify_quadratic_estimate(1.5, **BUDGET)


def test_su3_failure_exceeds_su2(su2_report):
    r = su3_failure_search(c_su2=su2_report.estimate, **BUDGET)
    assert r.extras["success"]
    assert r.estimate > 10 * su2_report.estimate
    assert evaluate_witness(r) == pytest.approx(r.estimate, rel=1e-9)
