"""
Numerical certification of the pointwise constants behind compactness.

Everything here estimates a supremum (or infimum) of a scale-invariant
ratio by stratified sampling followed by multistart projected gradient
ascent (see :mod:`swmoment.sphere_search`). Every estimate comes with the
point that attains it, so it can be re-evaluated independently, and with a
stability ratio obtained by rerunning with doubled samples and multistarts.

For ``su(2) (x) H`` a point is a 3x4 real matrix (rows: the ``tau_a`` basis,
columns: ``1, i, j, k``). Its moment map vanishes exactly on rank <= 1
matrices, so the nearest point of the cone is a truncated SVD.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .quat_core import su_basis
from .representation import (
    QuatRep,
    builtin_rep,
    gamma_phi,
    moment,
    moment_inner,
    moment_norm,
    moment_polarized,
    rep_adhm,
    rep_adjoint,
)
from .sphere_search import EmptyConstraint, NonConvergence, SearchResult, normalize_blocks, sphere_search

__all__ = [
    "DELTA_MU",
    "AMBIGUITY_GAP",
    "AmbiguousProjection",
    "NotOnCone",
    "NonConvergence",
    "EmptyConstraint",
    "ConeDecomposition",
    "CertReport",
    "singular_value_mu_norm",
    "cone_project",
    "tangent_basis",
    "haydys_decompose",
    "criterion_ratio",
    "certify_criterion",
    "certify_su2_criterion",
    "su2_criterion_sweep",
    "estimate_sigma_adhm12",
    "c_split_from_sigma",
    "split_violations",
    "min_mu_on_unit_psi",
    "certify_quadratic_estimate",
    "su3_failure_search",
    "evaluate_witness",
    "rotate_imh",
    "gauge_rotate",
]

DELTA_MU = 0.05
AMBIGUITY_GAP = 1e-9
# Ratios of quantities below this (relative to |phi|^2) are dominated by
# rounding, so the searches stay above it; the limit is approached, not hit.
MU_FLOOR = 1e-6
STABILITY_GATE = 0.10


class AmbiguousProjection(ValueError):
    """The top two singular values coincide, so the nearest cone point is not unique."""


class NotOnCone(ValueError):
    """The input is not (numerically) a zero of the moment map."""


# -- the su(2) (x) H cone ---------------------------------------------------


def _as_matrix(xi) -> np.ndarray:
    m = np.asarray(xi, dtype=float)
    if m.shape == (12,):
        return m.reshape(3, 4)
    if m.shape == (3, 4):
        return m
    raise ValueError(f"expected a point of su(2) (x) H as shape (12,) or (3, 4), got {m.shape}")


def singular_value_mu_norm(xi) -> np.ndarray:
    """
    ``|mu(xi)|`` on su(2) (x) H from the singular values of the 3x4 matrix.

    ``|mu|^2 = 4 (s1^2 s2^2 + s1^2 s3^2 + s2^2 s3^2)`` in the tau basis. This
    is an independent oracle for the moment map of the su(2) adjoint
    representation; it broadcasts over leading axes of shape (..., 12).
    """
    m = np.asarray(xi, dtype=float)
    m = m.reshape(*m.shape[:-1], 3, 4) if m.shape[-1] == 12 else m
    s2 = np.linalg.svd(m, compute_uv=False) ** 2
    e2 = s2[..., 0] * s2[..., 1] + s2[..., 0] * s2[..., 2] + s2[..., 1] * s2[..., 2]
    return 2 * np.sqrt(e2)


@dataclass(frozen=True, eq=False)
class ConeDecomposition:
    """
    ``xi = zeta + xi_hat`` with ``zeta`` the nearest rank-one point.

    Attributes
    ----------
    zeta, xi_hat : ndarray
        Same shape as the input.
    distance : float
        ``|xi_hat|``.
    singular_values : ndarray, shape (3,)
    mu_ratio : float
        ``|mu(xi)| / |xi|^2``, the position inside the band.
    xi_hat_ratio : float
        ``|xi_hat| |xi| / |mu(xi)|`` (0 on the cone); bounded near the cone.
    """

    zeta: np.ndarray
    xi_hat: np.ndarray
    distance: float
    singular_values: np.ndarray
    mu_ratio: float
    xi_hat_ratio: float
    u1: np.ndarray = field(repr=False)
    v1: np.ndarray = field(repr=False)

    def tangent_basis(self) -> np.ndarray:
        return tangent_basis(self.zeta, u1=self.u1, v1=self.v1)


def cone_project(xi) -> ConeDecomposition:
    """
    Nearest point of the cone ``mu^{-1}(0)`` in su(2) (x) H.

    The cone is the set of rank <= 1 matrices, so the projection keeps the
    top singular triple. Unlike the band ``|mu| <= delta |xi|^2`` used by the
    estimators, no band is enforced here; ``mu_ratio`` records where the
    input sits.

    Raises
    ------
    AmbiguousProjection
        If ``(s1 - s2) / s1 < 1e-9`` (including ``xi = 0``).
    """
    shape = np.shape(xi)
    m = _as_matrix(xi)
    u, s, vt = np.linalg.svd(m)
    if s[0] == 0 or (s[0] - s[1]) / s[0] < AMBIGUITY_GAP:
        raise AmbiguousProjection(f"top singular values {s[0]:.17g} and {s[1]:.17g} coincide")
    zeta = s[0] * np.outer(u[:, 0], vt[0])
    xi_hat = m - zeta
    mu = float(singular_value_mu_norm(m))
    n = float(np.linalg.norm(m))
    dist = float(np.linalg.norm(xi_hat))
    return ConeDecomposition(
        zeta=zeta.reshape(shape),
        xi_hat=xi_hat.reshape(shape),
        distance=dist,
        singular_values=s,
        mu_ratio=mu / n**2,
        xi_hat_ratio=0.0 if mu == 0 else dist * n / mu,
        u1=u[:, 0],
        v1=vt[0],
    )


def tangent_basis(zeta, u1=None, v1=None) -> np.ndarray:
    """
    Orthonormal basis of the tangent space of the cone at a rank-one ``zeta``.

    ``T = {u1 a^T + b v1^T}`` has dimension 6; rows of the result are
    flattened 3x4 matrices.
    """
    m = _as_matrix(zeta)
    if u1 is None or v1 is None:
        u, s, vt = np.linalg.svd(m)
        if s[0] == 0:
            raise ValueError("zeta must be non-zero")
        u1, v1 = u[:, 0], vt[0]
    # complete u1 to an orthonormal basis of R^3
    q, _ = np.linalg.qr(np.column_stack([u1, np.eye(3)]))
    q[:, 0] = u1
    out = [np.outer(u1, e).ravel() for e in np.eye(4)]
    out += [np.outer(q[:, c], v1).ravel() for c in (1, 2)]
    return np.array(out)


def haydys_decompose(xi, tol: float = 1e-8):
    """
    Factor a point of the cone as ``tau (x) nu``.

    ``tau`` is a unit vector in su(2) (tau-basis coefficients) whose first
    non-zero coefficient is positive, and ``nu`` is a quaternion.

    Raises
    ------
    NotOnCone
        If ``|mu(xi)| > tol |xi|^2`` or ``xi = 0``.
    """
    m = _as_matrix(xi)
    n2 = float(np.sum(m * m))
    mu = float(singular_value_mu_norm(m))
    if n2 == 0 or mu > tol * n2:
        raise NotOnCone(f"|mu(xi)| = {mu:.3g} exceeds {tol:g} |xi|^2 = {tol * n2:.3g}")
    u, s, vt = np.linalg.svd(m)
    tau, nu = u[:, 0], s[0] * vt[0]
    first = tau[np.flatnonzero(np.abs(tau) > 1e-12)[0]]
    if first < 0:
        tau, nu = -tau, -nu
    return tau, nu


# -- ratios -----------------------------------------------------------------


def criterion_ratio(rep: QuatRep, phi) -> float:
    """
    ``|phi| |mu(phi)| / |Gamma_phi mu(phi)|``.

    Scale invariant, so ``|phi| = 1`` is not required. Returns 0 when
    ``mu(phi) = 0``.

    Raises
    ------
    ZeroDivisionError
        If ``mu(phi) != 0`` but ``Gamma_phi mu(phi)`` vanishes numerically.
    """
    phi = np.asarray(phi, dtype=float)
    r = float(np.linalg.norm(phi))
    mu = moment(rep, phi)
    num = float(moment_norm(mu))
    if num <= 1e-15 * r**2:
        return 0.0
    den = float(np.linalg.norm(gamma_phi(rep, phi, mu)))
    if den <= 1e-15 * r**3:
        raise ZeroDivisionError("Gamma_phi mu(phi) = 0 with mu(phi) != 0: criterion counterexample candidate")
    return r * num / den


def _criterion_values(rep: QuatRep, delta_mu: float | None):
    def f(x):
        r = np.linalg.norm(x, axis=-1)
        mu = moment(rep, x)
        num = moment_norm(mu)
        den = np.linalg.norm(gamma_phi(rep, x, mu), axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = np.where(num <= 1e-15 * r**2, 0.0, r * num / den)
        if delta_mu is not None:
            val = np.where((num <= delta_mu * r**2) & (num >= MU_FLOOR * r**2), val, np.nan)
        return val

    return f


def _flow_sampler(rep: QuatRep, max_steps: int = 60, eta: float = 0.1):
    """
    Points spread in ``|mu|/|phi|^2`` from uniform draws to near the zero set.

    Each sample runs a random number of normalised gradient steps on
    ``|mu|^2`` (gradient ``2 Gamma_phi mu(phi)``); step counts are drawn
    log-uniformly so every scale of ``|mu|`` near the cone is populated.
    """

    def sample(rng, n):
        x = rng.standard_normal((n, rep.dim_S))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        steps = np.floor(np.exp(rng.uniform(0, np.log(max_steps + 1), n))).astype(int) - 1
        steps[: n // 8] = 0
        for s in range(max_steps):
            live = steps > s
            if not live.any():
                break
            y = x[live]
            g = 2 * gamma_phi(rep, y, moment(rep, y))
            y = y - eta * g
            x[live] = y / np.linalg.norm(y, axis=1, keepdims=True)
        return x

    return sample


def _near_cone_su2(rng, n, t_range=(1e-5, 1.0)):
    """``zeta + t xi_hat`` with zeta rank one, xi_hat normal, log-uniform t; shape (n, 12)."""
    tau = rng.standard_normal((n, 3))
    tau /= np.linalg.norm(tau, axis=1, keepdims=True)
    v = rng.standard_normal((n, 4))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    m = rng.standard_normal((n, 3, 4))
    pt = np.eye(3) - np.einsum("na,nb->nab", tau, tau)
    pv = np.eye(4) - np.einsum("na,nb->nab", v, v)
    hat = pt @ m @ pv
    hat /= np.linalg.norm(hat, axis=(1, 2), keepdims=True)
    t = np.exp(rng.uniform(*np.log(t_range), n))
    return (np.einsum("na,nb->nab", tau, v) + t[:, None, None] * hat).reshape(n, 12)


# -- reports ----------------------------------------------------------------


@dataclass(frozen=True)
class CertReport:
    """
    Outcome of one certification run.

    ``estimate`` is the objective at ``witness_coeffs`` (re-evaluate with
    :func:`evaluate_witness`). ``stability_ratio`` is the relative change of
    the estimate when samples and multistarts are doubled, ``spread`` the
    relative disagreement between multistart finals.
    """

    rep: str
    estimator: str
    constraint: dict
    estimate: float
    witness_coeffs: list
    samples: int
    multistarts: int
    seed: int
    stability_ratio: float | None = None
    spread: float = 0.0
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rep": self.rep,
            "estimator": self.estimator,
            "constraint": self.constraint,
            "estimate": self.estimate,
            "witness_coeffs": list(self.witness_coeffs),
            "samples": self.samples,
            "multistarts": self.multistarts,
            "seed": self.seed,
            "stability_ratio": self.stability_ratio,
            "spread": self.spread,
            "extras": self.extras,
        }


def _stability(a: float, b: float) -> float:
    if a == b:
        return 0.0
    if not (np.isfinite(a) and np.isfinite(b)):
        return float("inf")
    return float(abs(b - a) / max(abs(a), abs(b)))


def _run_with_doubling(search, samples, multistarts, check_stability):
    """Run ``search(samples, multistarts)`` and optionally the doubled run."""
    base = search(samples, multistarts)
    if not check_stability:
        return base, None, None
    doubled = search(2 * samples, 2 * multistarts)
    return base, doubled, _stability(base.estimate, doubled.estimate)


def _report(rep, estimator, constraint, res: SearchResult, seed, stability, doubled, extras=None):
    extras = dict(extras or {})
    extras.update(
        feasible_samples=res.feasible,
        sample_best=res.sample_best,
        multistart_finals=[float(v) for v in res.finals],
        iterations=res.iterations,
    )
    if doubled is not None:
        extras["doubled_estimate"] = doubled.estimate
    return CertReport(
        rep=rep,
        estimator=estimator,
        constraint=constraint,
        estimate=res.estimate,
        witness_coeffs=[float(v) for v in res.witness],
        samples=res.samples,
        multistarts=res.multistarts,
        seed=seed,
        stability_ratio=stability,
        spread=res.spread,
        extras=extras,
    )


# -- geometric criterion ----------------------------------------------------


def certify_criterion(
    rep: QuatRep | str,
    delta_mu: float = DELTA_MU,
    samples: int = 2000,
    multistarts: int = 8,
    seed: int = 0,
    *,
    check_stability: bool = True,
    extra_starts=None,
    max_spread: float | None = 0.25,
) -> CertReport:
    """
    Estimate ``sup |phi| |mu(phi)| / |Gamma_phi mu(phi)|`` on the band
    ``{|phi| = 1, MU_FLOOR <= |mu(phi)| <= delta_mu}``.

    Raises
    ------
    NonConvergence
        If the multistart spread exceeds ``max_spread``.
    EmptyConstraint
        If no sample lies in the band (e.g. the classical representation,
        where ``|mu(phi)| = |phi|^2 / 2`` identically).
    """
    if not 0 < delta_mu < 1:
        raise ValueError("delta_mu must lie in (0, 1)")
    rep = builtin_rep(rep) if isinstance(rep, str) else rep
    f = _criterion_values(rep, delta_mu)
    project = normalize_blocks([(0, rep.dim_S)])
    flow = _flow_sampler(rep)
    su2 = rep.alg.name == "su(2)" and rep.dim_S == 12

    def sampler(rng, n):
        if not su2:
            return flow(rng, n)
        half = n // 2
        return np.vstack([_near_cone_su2(rng, half), flow(rng, n - half)])

    def search(s, m):
        return sphere_search(f, sampler, project, s, m, seed, extra_starts=extra_starts, max_spread=max_spread)

    base, doubled, stab = _run_with_doubling(search, samples, multistarts, check_stability)
    return _report(
        rep.name, "criterion", {"delta_mu": delta_mu, "mu_floor": MU_FLOOR, "norm": 1.0}, base, seed, stab, doubled
    )


def certify_su2_criterion(
    delta_mu: float = DELTA_MU,
    samples: int = 2000,
    multistarts: int = 8,
    seed: int = 0,
    **kw,
) -> CertReport:
    """:func:`certify_criterion` on the adjoint representation of su(2)."""
    return certify_criterion(rep_adjoint(su_basis(2)), delta_mu, samples, multistarts, seed, **kw)


def su2_criterion_sweep(
    deltas=(0.01, 0.05, 0.1),
    samples: int = 2000,
    multistarts: int = 8,
    seed: int = 0,
    **kw,
) -> list[CertReport]:
    """
    Criterion constant for increasing band widths.

    Witnesses of narrower bands seed the searches of wider ones, so the
    estimates are non-decreasing in ``delta_mu`` by construction as the
    true suprema are.
    """
    out = []
    starts = []
    for d in sorted(deltas):
        rep = certify_su2_criterion(d, samples, multistarts, seed, extra_starts=np.array(starts) if starts else None, **kw)
        starts.append(rep.witness_coeffs)
        out.append(rep)
    return out


# -- ADHM_{1,2} -------------------------------------------------------------

_ADHM12 = None


def _adhm12() -> QuatRep:
    global _ADHM12
    if _ADHM12 is None:
        _ADHM12 = rep_adhm(1, 2)
    return _ADHM12


def _split_psi_xi(x):
    """``(n, 20) -> (n, 24)`` ADHM_{1,2} spinors for psi and xi separately."""
    rep = _adhm12()
    n = len(x)
    psi = np.zeros((n, rep.dim_S))
    xi = np.zeros((n, rep.dim_S))
    psi[:, rep.blocks["psi"]] = x[:, :8]
    xi[:, rep.blocks["xi"]] = x[:, 8:20]
    return psi, xi


def _embed_xi(x12):
    rep = _adhm12()
    out = np.zeros((len(x12), rep.dim_S))
    out[:, rep.blocks["xi"]] = x12
    return out


def _neg_cos(a, b):
    na, nb = moment_norm(a), moment_norm(b)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = -moment_inner(a, b) / (na * nb)
    return np.where((na < MU_FLOOR) | (nb < MU_FLOOR), np.nan, v)


def _sigma_interior(x):
    rep = _adhm12()
    psi, xi = _split_psi_xi(x)
    return _neg_cos(moment(rep, psi), moment(rep, xi))


def _boundary_parts(x):
    """``x = (psi 8, tau 3, v 4, m 12)`` -> psi, zeta and xi_hat (normal part of m)."""
    tau = x[:, 8:11] / np.linalg.norm(x[:, 8:11], axis=1, keepdims=True)
    v = x[:, 11:15] / np.linalg.norm(x[:, 11:15], axis=1, keepdims=True)
    m = x[:, 15:27].reshape(-1, 3, 4)
    pt = np.eye(3) - np.einsum("na,nb->nab", tau, tau)
    pv = np.eye(4) - np.einsum("na,nb->nab", v, v)
    hat = (pt @ m @ pv).reshape(-1, 12)
    zeta = np.einsum("na,nb->nab", tau, v).reshape(-1, 12)
    return x[:, :8], zeta, hat


def _sigma_boundary(x):
    rep = _adhm12()
    psi8, zeta, hat = _boundary_parts(x)
    psi = np.zeros((len(x), rep.dim_S))
    psi[:, rep.blocks["psi"]] = psi8
    dmu = 2 * moment_polarized(rep, _embed_xi(zeta), _embed_xi(hat))
    return _neg_cos(moment(rep, psi), dmu)


def _sphere(rng, n, d):
    x = rng.standard_normal((n, d))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def _sigma_interior_sampler(rng, n):
    psi = _sphere(rng, n, 8)
    half = n // 2
    xi = np.vstack([_near_cone_su2(rng, half), _sphere(rng, n - half, 12)])
    return np.hstack([psi, xi])


def _sigma_boundary_sampler(rng, n):
    return np.hstack([_sphere(rng, n, 8), _sphere(rng, n, 3), _sphere(rng, n, 4), rng.standard_normal((n, 12))])


def estimate_sigma_adhm12(
    samples: int = 2000,
    multistarts: int = 8,
    seed: int = 0,
    *,
    check_stability: bool = True,
    max_spread: float | None = 0.25,
) -> CertReport:
    """
    ``sigma = sup -<mu(Psi), mu(xi)> / (|mu(Psi)| |mu(xi)|)`` for ADHM_{1,2}.

    Two strata are searched: honest pairs ``(Psi, xi)`` and the boundary
    stratum where ``mu(xi)`` is replaced by its limiting direction
    ``d_zeta mu(xi_hat) = 2 mu(zeta, xi_hat)`` at a cone point. The
    estimate is the larger of the two; ``extras`` carries both, the
    stratum of the witness and ``c_split = sqrt(2 / (1 - sigma))``.
    """
    interior_project = normalize_blocks([(0, 8), (8, 20)])
    boundary_project = normalize_blocks([(0, 8), (8, 11), (11, 15), (15, 27)])

    def search(s, m):
        a = sphere_search(_sigma_interior, _sigma_interior_sampler, interior_project, s, m, seed, max_spread=max_spread)
        b = sphere_search(_sigma_boundary, _sigma_boundary_sampler, boundary_project, s, m, seed + 1, max_spread=max_spread)
        return a, b

    a, b = search(samples, multistarts)
    stab = doubled = None
    if check_stability:
        a2, b2 = search(2 * samples, 2 * multistarts)
        doubled = a2 if a2.estimate >= b2.estimate else b2
        stab = _stability(max(a.estimate, b.estimate), doubled.estimate)
    best, stratum = (a, "interior") if a.estimate >= b.estimate else (b, "boundary")
    sigma = best.estimate
    extras = {
        "stratum": stratum,
        "interior_estimate": a.estimate,
        "boundary_estimate": b.estimate,
        "margin": 1.0 - sigma,
        "c_split": c_split_from_sigma(sigma),
    }
    return _report("adhm12", "sigma", {"psi_norm": 1.0, "xi_norm": 1.0}, best, seed, stab, doubled, extras)


def c_split_from_sigma(sigma: float) -> float:
    """
    Constant ``c`` with ``|a| + |b| <= c |a + b|`` whenever ``-<a, b> <= sigma |a| |b|``.

    ``|a + b|^2 >= (1 - sigma)(|a|^2 + |b|^2) >= (1 - sigma)(|a| + |b|)^2 / 2``.
    """
    if sigma >= 1:
        return float("inf")
    return float(np.sqrt(2.0 / (1.0 - max(sigma, -1.0))))


def split_violations(c_split: float, samples: int, seed: int) -> dict:
    """
    Count pairs with ``|mu(Psi)| + |mu(xi)| > c_split |mu(Psi, xi)|``.

    Half of the pairs have ``xi`` drawn close to the cone, where the
    inequality is tightest.
    """
    rep = _adhm12()
    rng = np.random.default_rng(seed)
    x = _sigma_interior_sampler(rng, samples)
    scale = np.exp(rng.uniform(np.log(1e-2), np.log(1e2), samples))
    x[:, 8:] *= scale[:, None]
    psi, xi = _split_psi_xi(x)
    a, b = moment(rep, psi), moment(rep, xi)
    lhs = moment_norm(a) + moment_norm(b)
    rhs = c_split * moment_norm(a + b)
    ratio = lhs / rhs
    return {"samples": samples, "violations": int(np.sum(lhs > rhs * (1 + 1e-12))), "worst_ratio": float(ratio.max())}


def min_mu_on_unit_psi(
    samples: int = 2000,
    multistarts: int = 8,
    seed: int = 0,
    radii=(0.0, 1.0, 10.0),
    *,
    check_stability: bool = True,
    max_spread: float | None = 0.25,
) -> CertReport:
    """
    ``inf |mu(Psi, xi)|`` over ``|Psi| = 1, |xi| <= R`` for each ``R``.

    Radii are processed in increasing order and each search is seeded with
    the witnesses of the smaller balls, so the reported infima are
    non-increasing in ``R`` as the true ones are. ``extras["per_radius"]``
    lists every radius; the headline estimate is that of the largest.
    """
    rep = _adhm12()
    radii = sorted(float(r) for r in radii)

    def make(radius):
        def project(x):
            x = np.array(x, dtype=float, copy=True)
            n = np.linalg.norm(x[:, :8], axis=1, keepdims=True)
            x[:, :8] /= np.where(n == 0, 1.0, n)
            m = np.linalg.norm(x[:, 8:], axis=1, keepdims=True)
            x[:, 8:] *= np.minimum(1.0, radius / np.where(m == 0, 1.0, m))
            return x

        def f(x):
            psi, xi = _split_psi_xi(x)
            return moment_norm(moment(rep, psi + xi))

        def sampler(rng, n):
            psi = _sphere(rng, n, 8)
            dirs = np.vstack([_near_cone_su2(rng, n // 2), _sphere(rng, n - n // 2, 12)])
            dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
            r = radius * rng.uniform(0, 1, n) ** 0.5
            return np.hstack([psi, dirs * r[:, None]])

        return f, sampler, project

    per_radius = []
    starts: list = []
    headline = None
    for radius in radii:
        f, sampler, project = make(radius)
        extra = np.array(starts) if starts else None

        def search(s, m):
            return sphere_search(
                f, sampler, project, s, m, seed, maximize=False, extra_starts=extra, max_spread=max_spread
            )

        base, doubled, stab = _run_with_doubling(search, samples, multistarts, check_stability)
        starts.append(base.witness)
        per_radius.append({
            "radius": radius,
            "estimate": base.estimate,
            "stability_ratio": stab,
            "spread": base.spread,
            "witness_coeffs": [float(v) for v in base.witness],
        })
        headline = (base, doubled, stab)
    base, doubled, stab = headline
    return _report(
        "adhm12", "min_mu", {"psi_norm": 1.0, "xi_radius": radii[-1]}, base, seed, stab, doubled,
        {"per_radius": per_radius},
    )


def _quadratic_parts(x):
    rep = _adhm12()
    psi, xi = _split_psi_xi(x)
    mu_psi = moment(rep, psi)
    mu = mu_psi + moment(rep, xi)
    num = moment_inner(mu, mu)
    den = moment_inner(mu, mu_psi) + np.linalg.norm(gamma_phi(rep, xi, mu), axis=-1) ** 2
    return mu, num, den


def certify_quadratic_estimate(
    delta_mu: float = DELTA_MU,
    samples: int = 2000,
    multistarts: int = 8,
    seed: int = 0,
    *,
    check_stability: bool = True,
    max_spread: float | None = 0.25,
) -> CertReport:
    """
    Constant of the quadratic estimate for ADHM_{1,2} on the band.

    Estimates ``sup |mu|^2 / (<mu, mu(Psi)> + |Gamma_xi mu|^2)`` with
    ``mu = mu(Psi, xi)`` over ``|Psi|^2 + |xi|^2 = 1, MU_FLOOR <= |mu| <= delta_mu``.
    Samples with a negative denominator are counterexample candidates; they
    are counted in ``extras["negative_denominators"]`` and excluded.
    """
    if not 0 < delta_mu < 1:
        raise ValueError("delta_mu must lie in (0, 1)")
    project = normalize_blocks([(0, 20)])
    audit = {"negative": 0, "worst": None}

    def f(x):
        mu, num, den = _quadratic_parts(x)
        band = (np.sqrt(num) <= delta_mu) & (np.sqrt(num) >= MU_FLOOR)
        with np.errstate(divide="ignore", invalid="ignore"):
            val = num / den
        neg = band & (den < 0)
        if neg.any():
            audit["negative"] += int(neg.sum())
            audit["worst"] = x[np.flatnonzero(neg)[0]].tolist()
        return np.where(band & (den >= 0), val, np.nan)

    def sampler(rng, n):
        s = np.exp(rng.uniform(np.log(2e-2), np.log(0.5), n))
        psi = _sphere(rng, n, 8) * s[:, None]
        xi = _near_cone_su2(rng, n, (1e-5, 0.1))
        xi *= (np.sqrt(1 - s**2) / np.linalg.norm(xi, axis=1))[:, None]
        return np.hstack([psi, xi])

    def search(s, m):
        return sphere_search(f, sampler, project, s, m, seed, max_spread=max_spread)

    base, doubled, stab = _run_with_doubling(search, samples, multistarts, check_stability)
    return _report(
        "adhm12", "quadratic", {"delta_mu": delta_mu, "mu_floor": MU_FLOOR, "norm": 1.0}, base, seed, stab, doubled,
        {"negative_denominators": audit["negative"], "negative_witness": audit["worst"]},
    )


# -- su(3) ------------------------------------------------------------------


def _su3_wall_sampler(rng, n):
    """
    ``h (x) v + eps eta`` in su(3) (x) H with h on a Weyl wall.

    ``h`` is a conjugate of ``diag(1, 1, -2) i`` and ``eta`` lies in its
    centraliser ``u(2)``; then ``mu = eps^2 mu(eta)`` while
    ``Gamma mu = O(eps^3)``.
    """
    alg = su_basis(3)
    h0 = np.diag([1j, 1j, -2j]) / np.sqrt(3)
    block = alg.basis[[0, 1, 6]]  # the su(2) in the upper-left corner
    out = np.empty((n, 32))
    for i in range(n):
        z = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        g, _ = np.linalg.qr(z)
        conj = lambda a: g @ a @ g.conj().T
        v = rng.standard_normal(4)
        v /= np.linalg.norm(v)
        eta = rng.standard_normal((3, 4))
        eps = np.exp(rng.uniform(np.log(1e-3), np.log(0.3)))
        h = alg.from_matrix(conj(h0))
        etas = np.stack([alg.from_matrix(conj(np.tensordot(eta[:, p], block, 1))) for p in range(4)], axis=1)
        xi = np.outer(h, v) + eps * etas
        out[i] = (xi / np.linalg.norm(xi)).ravel()
    return out


def su3_failure_search(
    samples: int = 2000,
    multistarts: int = 8,
    seed: int = 0,
    *,
    c_su2: float | None = None,
    delta_mu: float = DELTA_MU,
    factor: float = 10.0,
) -> CertReport:
    """
    Search su(3) (x) H for points violating the geometric criterion.

    Maximises the criterion ratio on the band near the cone. Succeeds when
    the maximum exceeds ``factor * c_su2`` (``c_su2`` defaults to a fresh
    :func:`certify_su2_criterion` run with the same budget) or when a point
    with ``mu != 0`` and ``Gamma mu = 0`` turns up.
    """
    rep = rep_adjoint(su_basis(3))
    if c_su2 is None:
        c_su2 = certify_su2_criterion(delta_mu, samples, multistarts, seed, check_stability=False).estimate
    raw = _criterion_values(rep, delta_mu)
    zero_gamma = {"witness": None}

    def f(x):
        r = np.linalg.norm(x, axis=-1)
        mu = moment(rep, x)
        num = moment_norm(mu)
        den = np.linalg.norm(gamma_phi(rep, x, mu), axis=-1)
        hit = (num > 1e-12) & (den <= 1e-15)
        if hit.any() and zero_gamma["witness"] is None:
            zero_gamma["witness"] = x[np.flatnonzero(hit)[0]].tolist()
        return raw(x)

    flow = _flow_sampler(rep)

    def sampler(rng, n):
        half = n // 2
        return np.vstack([_su3_wall_sampler(rng, half), flow(rng, n - half)])

    project = normalize_blocks([(0, rep.dim_S)])
    res = sphere_search(f, sampler, project, samples, multistarts, seed, max_spread=None)
    threshold = factor * c_su2
    success = bool(res.estimate > threshold or zero_gamma["witness"] is not None)
    extras = {
        "c_su2": c_su2,
        "threshold": threshold,
        "success": success,
        "zero_gamma_witness": zero_gamma["witness"],
    }
    return _report(rep.name, "su3_failure", {"delta_mu": delta_mu, "mu_floor": MU_FLOOR, "norm": 1.0}, res, seed, None, None, extras)


# -- re-evaluation and symmetries --------------------------------------------


def evaluate_witness(report: CertReport, coeffs=None) -> float:
    """
    Recompute a report's objective at its witness (or at ``coeffs``).

    Uses the scalar routines (:func:`criterion_ratio`, direct moment map
    evaluation) rather than the vectorised search objectives.
    """
    x = np.asarray(report.witness_coeffs if coeffs is None else coeffs, dtype=float)
    est = report.estimator
    if est in ("criterion", "su3_failure"):
        return criterion_ratio(builtin_rep(_cli_name(report.rep)), x)
    rep = _adhm12()
    if est == "sigma":
        if report.extras.get("stratum") == "boundary":
            return float(_sigma_boundary(x[None])[0])
        return float(_sigma_interior(x[None])[0])
    if est == "min_mu":
        psi, xi = _split_psi_xi(x[None])
        return float(moment_norm(moment(rep, (psi + xi)[0])))
    if est == "quadratic":
        _, num, den = _quadratic_parts(x[None])
        return float(num[0] / den[0])
    raise ValueError(f"unknown estimator {est!r}")


def _cli_name(rep_name: str) -> str:
    return {"adjoint-su(2)": "su2-adjoint", "adjoint-su(3)": "su3-adjoint"}.get(rep_name, rep_name)


def rotate_imh(q, phi) -> np.ndarray:
    """
    Left-multiply every quaternion slot of ``phi`` by the unit quaternion ``q``.

    This realises the rotation ``v -> q v q^-1`` of Im H on spinors; moment
    norms and all certified ratios are invariant under it.
    """
    from .quat_core import quat_mul

    phi = np.asarray(phi, dtype=float)
    q = np.asarray(q, dtype=float) / np.linalg.norm(q)
    return quat_mul(q, phi.reshape(*phi.shape[:-1], -1, 4)).reshape(phi.shape)


def gauge_rotate(rep: QuatRep, x, phi) -> np.ndarray:
    """Apply ``exp(rho(x))`` for a Lie algebra coefficient vector ``x``."""
    g = expm(np.tensordot(np.asarray(x, dtype=float), rep.rho, 1))
    return np.asarray(phi, dtype=float) @ g.T
