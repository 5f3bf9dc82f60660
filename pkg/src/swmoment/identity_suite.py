"""
Seeded randomized checks of the pointwise algebraic identities.

Every check draws all randomness for one sample from a single row of a
standard-normal block, so the first ``n`` samples of a larger run are the
samples of an ``n``-sample run. Rows are evaluated in fixed-size blocks so
that BLAS sees the same shapes whatever the sample count and each row's
residual is bitwise reproducible. Worst residuals are therefore monotone
in the sample count and the worst witness is the lowest-index maximiser.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .quat_core import su_basis
from .representation import (
    QuatRep,
    builtin_rep,
    gamma_bold,
    gamma_phi,
    gamma_phi_matrix,
    moment,
    moment_norm,
    moment_polarized,
    rep_adjoint,
)

__all__ = [
    "IdentityCheck",
    "check_mu_gamma_identity",
    "check_commutator_norm",
    "check_dmu_orthogonality",
    "check_dirac_moment_compatibility",
    "dirac_moment_residual",
    "adjoint_block",
    "su2_block",
    "dirac_kernel_projector",
    "run_all",
    "DEFAULT_TOLERANCE",
]

DEFAULT_TOLERANCE = 1e-8


@dataclass(frozen=True)
class IdentityCheck:
    name: str
    rep: str
    samples: int
    seed: int
    tolerance: float
    worst_residual: float
    worst_witness: list

    @property
    def passed(self) -> bool:
        return bool(self.worst_residual <= self.tolerance)

    def record(self) -> dict:
        d = asdict(self)
        d["pass"] = self.passed
        del d["worst_witness"]
        return d


def _draw(seed: int, samples: int, width: int) -> np.ndarray:
    if samples < 1:
        raise ValueError("samples must be >= 1")
    return np.random.default_rng(seed).standard_normal((samples, width))


BLOCK = 256


def _blockwise(kernel, raw, block: int = BLOCK):
    """
    Apply ``kernel(rows) -> (residuals, witnesses)`` to fixed-size blocks.

    The last block is padded with copies of its first row and the padding
    is dropped from the output.
    """
    res, wit = [], []
    for start in range(0, len(raw), block):
        chunk = raw[start:start + block]
        k = len(chunk)
        if k < block:
            chunk = np.vstack([chunk, np.repeat(chunk[:1], block - k, axis=0)])
        r, w = kernel(chunk)
        res.append(r[:k])
        wit.append(w[:k])
    return np.concatenate(res), np.concatenate(wit)


def _unit(x):
    n = np.linalg.norm(x, axis=-1, keepdims=True)
    return x / np.where(n == 0, 1.0, n)


def _scale(col):
    # log-normal radius in roughly [0.3, 3]
    return np.exp(0.4 * col)[:, None]


def _finish(name, rep_name, samples, seed, tol, residuals, witnesses) -> IdentityCheck:
    residuals = np.nan_to_num(residuals, nan=np.inf)
    i = int(np.argmax(residuals))
    return IdentityCheck(name, rep_name, samples, seed, tol, float(residuals[i]), np.asarray(witnesses[i]).tolist())


def check_mu_gamma_identity(rep: QuatRep, samples: int, seed: int, tol: float = DEFAULT_TOLERANCE) -> IdentityCheck:
    """
    ``mu(gamma(mu(phi)) phi, phi) = 1/2 Gamma_phi^* Gamma_phi mu(phi)``.

    Both sides are homogeneous of degree 4 in phi; residuals are divided by
    ``|phi|^4``.
    """

    def kernel(raw):
        r = _scale(raw[:, -1])
        phi = _unit(raw[:, :-1]) * r
        mu = moment(rep, phi)
        lhs = moment_polarized(rep, np.einsum("nij,nj->ni", gamma_bold(rep, mu), phi), phi)
        G = gamma_phi_matrix(rep, phi)
        rhs = 0.5 * np.einsum("nji,nj->ni", G, np.einsum("nij,nj->ni", G, mu.reshape(len(raw), -1)))
        return moment_norm(lhs - rhs.reshape(mu.shape)) / r[:, 0] ** 4, phi

    res, wit = _blockwise(kernel, _draw(seed, samples, rep.dim_S + 1))
    return _finish("mu_gamma_identity", rep.name, samples, seed, tol, res, wit)


def adjoint_block(rep: QuatRep) -> slice:
    """Coordinates of the summand of ``rep`` that is the adjoint representation g (x) H."""
    if "u" in rep.blocks:
        return rep.blocks["u"]
    if rep.name.startswith("adjoint-"):
        return slice(0, rep.dim_S)
    raise ValueError(f"{rep.name} has no adjoint summand")


def su2_block(rep: QuatRep) -> slice:
    """Coordinates of an su(2) (x) H summand whose rows are the first three basis elements of g."""
    if "xi" in rep.blocks:
        return rep.blocks["xi"]
    if rep.alg.name == "su(2)" and rep.name.startswith("adjoint-"):
        return slice(0, rep.dim_S)
    raise ValueError(f"{rep.name} has no su(2) (x) H summand")


def _embed(rep: QuatRep, block: slice, x):
    out = np.zeros((len(x), rep.dim_S))
    out[:, block] = x
    return out


def _commutator_sum(alg, comps):
    """1/2 sum_{i,j} |[xi_i, xi_j]|^2 for comps of shape (n, dim_g, 4)."""
    c = alg.structure_constants
    total = np.zeros(len(comps))
    for p in range(4):
        for q in range(4):
            b = np.einsum("na,nb,abe->ne", comps[..., p], comps[..., q], c)
            total += 0.5 * np.einsum("ne,ne->n", b, b)
    return total


def check_commutator_norm(
    samples: int,
    seed: int,
    tol: float = DEFAULT_TOLERANCE,
    reps: list[QuatRep] | None = None,
) -> IdentityCheck:
    """
    ``|mu(xi)|^2 = 1/2 sum_{i,j} |[xi_i, xi_j]|^2`` on g (x) H.

    Runs on the adjoint representations of su(2) and su(3) unless ``reps``
    is given; for representations with an adjoint summand (ADHM) xi ranges
    over that summand. The reported residual is the worst over all of
    them, relative to ``|xi|^4``.
    """
    if reps is None:
        reps = [rep_adjoint(su_basis(2)), rep_adjoint(su_basis(3))]
    worst, witness = -1.0, None
    for k, rep in enumerate(reps):
        block = adjoint_block(rep)

        def kernel(raw, rep=rep, block=block):
            r = _scale(raw[:, -1])
            xi = _unit(raw[:, :-1]) * r
            lhs = moment_norm(moment(rep, _embed(rep, block, xi))) ** 2
            rhs = _commutator_sum(rep.alg, xi.reshape(len(raw), rep.dim_g, 4))
            return np.abs(lhs - rhs) / r[:, 0] ** 4, xi

        res, xi = _blockwise(kernel, _draw(seed + k, samples, 4 * rep.dim_g + 1))
        i = int(np.argmax(res))
        if res[i] > worst:
            worst, witness = float(res[i]), xi[i]
    return IdentityCheck(
        "commutator_norm", "+".join(r.name for r in reps), samples, seed, tol, worst, witness.tolist()
    )


def _rank_one_normal_pair(raw):
    """Unit tau in R^3, unit v in R^4 and a normal direction from 12 more entries."""
    tau = _unit(raw[:, 0:3])
    v = _unit(raw[:, 3:7])
    m = raw[:, 7:19].reshape(-1, 3, 4)
    ptau = np.eye(3) - np.einsum("na,nb->nab", tau, tau)
    pv = np.eye(4) - np.einsum("na,nb->nab", v, v)
    xi_hat = ptau @ m @ pv
    return tau, v, xi_hat


def check_dmu_orthogonality(
    samples: int,
    seed: int,
    tol: float = DEFAULT_TOLERANCE,
    rep: QuatRep | None = None,
) -> IdentityCheck:
    """
    Splitting of mu near a rank-one point of the su(2) cone.

    For ``zeta = tau (x) v`` and ``xi_hat`` normal to the cone at zeta,
    the residual collects the four statements used to control mu near the
    cone: ``2 mu(zeta, xi_hat)`` has no tau component, ``mu(xi_hat)`` lies
    in ``span(tau) (x) Im H``, ``Gamma_zeta mu(xi_hat) = 0`` and
    ``|Gamma_zeta mu(zeta, xi_hat)| = s |zeta| |mu(zeta, xi_hat)|`` where
    ``s`` is the su(2) structure constant in the basis used (2 for the
    tau basis). Works on any representation with an su(2) (x) H summand.
    """
    rep = rep or rep_adjoint(su_basis(2))
    block = su2_block(rep)
    s = float(np.linalg.norm(rep.alg.structure_constants[0, 1]))

    def kernel(raw):
        n = len(raw)
        tau, v, xi_hat = _rank_one_normal_pair(raw)
        r = _scale(raw[:, -1])
        zeta = _embed(rep, block, np.einsum("na,nb->nab", tau, v).reshape(n, 12) * r)
        xi_hat = _embed(rep, block, xi_hat.reshape(n, 12))
        tau_g = np.zeros((n, rep.dim_g))
        tau_g[:, :3] = tau
        dmu = 2 * moment_polarized(rep, zeta, xi_hat)
        mu_hat = moment(rep, xi_hat)
        proj = np.einsum("na,nb->nab", tau_g, tau_g)
        along = np.einsum("nkb,nba->nka", dmu, proj)
        across = mu_hat - np.einsum("nkb,nba->nka", mu_hat, proj)
        kill = np.linalg.norm(gamma_phi(rep, zeta, mu_hat), axis=-1)
        half = dmu / 2
        zn = np.linalg.norm(zeta, axis=-1)
        norm_gap = np.abs(np.linalg.norm(gamma_phi(rep, zeta, half), axis=-1) - s * zn * moment_norm(half))
        xn = np.linalg.norm(xi_hat, axis=-1)
        safe = np.where(xn == 0, 1.0, xn)
        res = (moment_norm(along) + norm_gap) / (r[:, 0] * safe) + (moment_norm(across) + kill / r[:, 0]) / safe**2
        return np.where(xn == 0, 0.0, res), np.hstack([zeta, xi_hat])

    res, wit = _blockwise(kernel, _draw(seed, samples, 20))
    return _finish("dmu_orthogonality", rep.name, samples, seed, tol, res, wit)


def dirac_kernel_projector(rep: QuatRep) -> np.ndarray:
    """Orthogonal projector of S^3 onto ``{(psi_1, psi_2, psi_3) : sum gamma(e_i) psi_i = 0}``."""
    D = np.hstack(list(rep.gammas))
    # D D^T = 3 id because each gamma(e_i) is orthogonal
    return np.eye(3 * rep.dim_S) - D.T @ D / 3.0


def _codifferential_fd(rep: QuatRep, phi, psis, h):
    """
    Codifferential of ``x -> mu(phi + sum x_i psi_i)`` at 0 by central differences.

    Under the duality ``e_1 <-> dx_2 ^ dx_3`` (cyclic) the moment map is a
    vector field ``u`` with values in g, and the codifferential of the
    corresponding 2-form is ``curl u``. Also returns ``div u``.
    """
    grads = []
    for i in range(3):
        plus = moment(rep, phi + h * psis[:, i])
        minus = moment(rep, phi - h * psis[:, i])
        grads.append((plus - minus) / (2 * h))
    g = np.stack(grads, axis=1)  # (n, i = derivative, a = component, b)
    curl = np.stack([
        g[:, 1, 2] - g[:, 2, 1],
        g[:, 2, 0] - g[:, 0, 2],
        g[:, 0, 1] - g[:, 1, 0],
    ], axis=1)
    div = g[:, 0, 0] + g[:, 1, 1] + g[:, 2, 2]
    return curl, div


def _rho_star(rep: QuatRep, phi, psis):
    """``rho^*(psi_i phi^*)_b = <rho(xi_b) phi, psi_i>`` with shape (n, 3, dim_g)."""
    rphi = np.einsum("bij,nj->nbi", rep.rho, phi)
    return np.einsum("nbi,nki->nkb", rphi, psis)


def dirac_moment_residual(rep: QuatRep, phi, psis, h: float = 1e-4) -> float:
    """
    Residual of ``d^* mu(Phi) = -rho^*(nabla Phi Phi^*)`` at the origin.

    ``Phi(x) = phi + sum x_i psi_i`` must satisfy the pointwise Dirac
    equation ``sum gamma(e_i) psi_i = 0``; otherwise ValueError.
    """
    phi = np.atleast_2d(np.asarray(phi, float))
    psis = np.asarray(psis, float).reshape(len(phi), 3, rep.dim_S)
    dirac = np.einsum("kij,nkj->ni", rep.gammas, psis)
    scale = max(1.0, float(np.abs(psis).max()))
    if np.abs(dirac).max() > 1e-10 * scale:
        raise ValueError("psi_i violate the pointwise Dirac equation sum gamma(e_i) psi_i = 0")
    curl, div = _codifferential_fd(rep, phi, psis, h)
    rhs = -_rho_star(rep, phi, psis)
    return float(np.max(moment_norm(curl - rhs) + np.linalg.norm(div, axis=-1)))


def check_dirac_moment_compatibility(
    rep: QuatRep, samples: int, seed: int, tol: float = DEFAULT_TOLERANCE, h: float = 1e-4
) -> IdentityCheck:
    """
    Pointwise form of ``d^*_A mu(Phi) = -rho^*(nabla_A Phi Phi^*)``.

    Linear fields ``phi + sum x_i psi_i`` with ``(psi_i)`` drawn from the
    kernel of the symbol of the Dirac operator. The codifferential is taken
    by central differences at step ``h``; the map is quadratic, so the
    difference quotient is exact up to rounding. The divergence, which
    vanishes for the same reason, is added to the residual.
    """
    n = rep.dim_S
    P = dirac_kernel_projector(rep)

    def kernel(raw):
        phi = _unit(raw[:, :n])
        psis = _unit(raw[:, n:] @ P).reshape(len(raw), 3, n)
        curl, div = _codifferential_fd(rep, phi, psis, h)
        rhs = -_rho_star(rep, phi, psis)
        res = moment_norm(curl - rhs) + np.linalg.norm(div, axis=-1)
        return res, np.hstack([phi, psis.reshape(len(raw), -1)])

    res, wit = _blockwise(kernel, _draw(seed, samples, 4 * n))
    return _finish("dirac_moment_compatibility", rep.name, samples, seed, tol, res, wit)


def run_all(rep_name: str, samples: int, seed: int, tol: float = DEFAULT_TOLERANCE) -> list[IdentityCheck]:
    """All identity checks relevant to one built-in representation."""
    rep = builtin_rep(rep_name)
    checks = [
        check_mu_gamma_identity(rep, samples, seed, tol),
        check_dirac_moment_compatibility(rep, samples, seed, tol),
    ]
    try:
        adjoint_block(rep)
        checks.append(check_commutator_norm(samples, seed, tol, reps=[rep]))
    except ValueError:
        pass
    try:
        su2_block(rep)
        checks.append(check_dmu_orthogonality(samples, seed, tol, rep=rep))
    except ValueError:
        pass
    return checks
