"""
Quaternionic representations and their hyperkaehler moment maps.

Spinors are real arrays of shape ``(..., dim_S)`` and moment values are
real arrays of shape ``(..., 3, dim_g)``: rows are the ``i, j, k``
components in Im H, columns the orthonormal basis of the gauge algebra.
``(Im H (x) g)*`` is identified with ``Im H (x) g`` through these bases, so
the pairing of two moment values is the plain Frobenius product.

With ``M[a, b] = gamma(e_a) rho(xi_b)`` (a symmetric matrix, being a
product of two commuting skew-symmetric ones)::

    moment(phi)[a, b]            = 1/2 <M[a, b] phi, phi>
    moment_polarized(phi, psi)   = 1/4 (<M phi, psi> + <M psi, phi>)
    gamma_phi(phi, zeta)         = sum_ab zeta[a, b] M[a, b] phi

so that ``<gamma_phi(phi, zeta), psi> = 2 <zeta, moment_polarized(phi, psi)>``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .quat_core import (
    LieAlg,
    left_matrix,
    right_matrix,
    su_basis,
    trivial_alg,
    u_basis,
)

__all__ = [
    "QuatRep",
    "gamma",
    "gamma_bold",
    "moment",
    "moment_polarized",
    "moment_inner",
    "moment_norm",
    "gamma_phi",
    "gamma_phi_matrix",
    "rep_classical",
    "rep_multispinor",
    "rep_adjoint",
    "rep_adhm",
    "rep_trivial",
    "classical_matrix_form",
    "classical_complex_matrix",
    "adjoint_mu_explicit",
    "diagonal_torus",
    "pi_torus",
    "describe",
    "builtin_rep",
    "BUILTIN_REPS",
]

_UNITS = np.eye(4)


@dataclass(frozen=True, eq=False)
class QuatRep:
    """
    A quaternionic representation ``rho: g -> sp(S)`` with ``S = R^dim_S``.

    ``I, J, K`` are left multiplication by ``i, j, k``. ``rho`` holds one
    skew-symmetric operator per basis element of ``alg``; generators of a
    flavour symmetry live in ``flavor`` and never enter the moment map.
    ``blocks`` names coordinate ranges of direct summands.
    """

    name: str
    alg: LieAlg
    I: np.ndarray
    J: np.ndarray
    K: np.ndarray
    rho: np.ndarray
    flavor: dict = field(default_factory=dict)
    blocks: dict = field(default_factory=dict)
    gamma_rho: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = self.I.shape[0]
        if n % 4:
            raise ValueError("dim_S must be a multiple of 4")
        rho = np.asarray(self.rho, dtype=float).reshape(self.alg.dim, n, n)
        object.__setattr__(self, "rho", rho)
        gr = np.einsum("aij,bjk->abik", np.stack([self.I, self.J, self.K]), rho)
        object.__setattr__(self, "gamma_rho", gr)
        for arr in (self.I, self.J, self.K, self.rho, self.gamma_rho):
            arr.setflags(write=False)

    @property
    def dim_S(self) -> int:
        return self.I.shape[0]

    @property
    def dim_g(self) -> int:
        return self.alg.dim

    @property
    def gammas(self) -> np.ndarray:
        return np.stack([self.I, self.J, self.K])

    def axiom_residuals(self) -> dict:
        """Worst violations of the quaternionic-representation axioms."""
        eye = np.eye(self.dim_S)
        I, J, K = self.I, self.J, self.K
        res = {
            "quaternion_relations": max(
                np.abs(I @ I + eye).max(),
                np.abs(J @ J + eye).max(),
                np.abs(K @ K + eye).max(),
                np.abs(I @ J - K).max(),
            ),
            "isometry": max(np.abs(X.T @ X - eye).max() for X in (I, J, K)),
            "rho_skew": 0.0,
            "rho_h_linear": 0.0,
            "rho_homomorphism": 0.0,
        }
        if self.dim_g:
            rho = self.rho
            res["rho_skew"] = np.abs(rho + rho.transpose(0, 2, 1)).max()
            res["rho_h_linear"] = max(
                np.abs(np.einsum("aij,jk->aik", rho, X) - np.einsum("ij,ajk->aik", X, rho)).max()
                for X in (I, J, K)
            )
            comm = np.einsum("aij,bjk->abik", rho, rho)
            comm = comm - comm.transpose(1, 0, 2, 3)
            target = np.einsum("abe,eik->abik", self.alg.structure_constants, rho)
            res["rho_homomorphism"] = np.abs(comm - target).max()
        return res

    def with_rho(self, rho, name=None) -> "QuatRep":
        """Copy with replaced generators; used to build corrupted test fixtures."""
        return QuatRep(
            name or self.name, self.alg, self.I, self.J, self.K,
            np.array(rho, dtype=float), dict(self.flavor), dict(self.blocks),
        )


def _check(rep: QuatRep, *arrays):
    for a in arrays:
        if np.shape(a)[-1] != rep.dim_S:
            raise ValueError(f"spinor length {np.shape(a)[-1]} does not match dim_S={rep.dim_S}")


def _check_moment(rep: QuatRep, zeta):
    if np.shape(zeta)[-2:] != (3, rep.dim_g):
        raise ValueError(f"moment value must have trailing shape (3, {rep.dim_g})")


def gamma(rep: QuatRep, v, phi) -> np.ndarray:
    """Clifford multiplication ``gamma(v) phi = v phi`` for ``v`` in Im H."""
    phi = np.asarray(phi, dtype=float)
    _check(rep, phi)
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != 3:
        raise ValueError("v must be purely imaginary: three coefficients (i, j, k)")
    op = np.einsum("...a,aij->...ij", v, rep.gammas)
    return np.einsum("...ij,...j->...i", op, phi)


def gamma_bold(rep: QuatRep, zeta) -> np.ndarray:
    """The operator ``sum_ab zeta[a, b] gamma(e_a) rho(xi_b)`` on S."""
    zeta = np.asarray(zeta, dtype=float)
    _check_moment(rep, zeta)
    return np.einsum("...ab,abij->...ij", zeta, rep.gamma_rho)


def _apply_all(rep: QuatRep, phi) -> np.ndarray:
    """``M[a, b] phi`` for every (a, b): shape (..., 3, dim_g, dim_S)."""
    n = rep.dim_S
    flat = rep.gamma_rho.reshape(-1, n)
    out = np.asarray(phi, dtype=float) @ flat.T
    return out.reshape(*np.shape(phi)[:-1], 3, rep.dim_g, n)


def moment(rep: QuatRep, phi) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    _check(rep, phi)
    return 0.5 * np.einsum("...abi,...i->...ab", _apply_all(rep, phi), phi)


def moment_polarized(rep: QuatRep, phi, psi) -> np.ndarray:
    """Symmetric bilinear form with ``moment_polarized(phi, phi) == moment(phi)``."""
    phi = np.asarray(phi, dtype=float)
    psi = np.asarray(psi, dtype=float)
    _check(rep, phi, psi)
    a = np.einsum("...abi,...i->...ab", _apply_all(rep, phi), psi)
    b = np.einsum("...abi,...i->...ab", _apply_all(rep, psi), phi)
    return 0.25 * (a + b)


def moment_inner(zeta, eta) -> np.ndarray:
    return np.einsum("...ab,...ab->...", np.asarray(zeta, float), np.asarray(eta, float))


def moment_norm(zeta) -> np.ndarray:
    return np.sqrt(np.maximum(moment_inner(zeta, zeta), 0.0))


def gamma_phi(rep: QuatRep, phi, zeta) -> np.ndarray:
    phi = np.asarray(phi, dtype=float)
    _check(rep, phi)
    _check_moment(rep, zeta)
    return np.einsum("...ab,...abi->...i", np.asarray(zeta, float), _apply_all(rep, phi))


def gamma_phi_matrix(rep: QuatRep, phi) -> np.ndarray:
    """
    Matrix of ``zeta -> gamma_phi(phi, zeta)``: shape (..., dim_S, 3 * dim_g).

    Columns are ordered like ``zeta.reshape(3 * dim_g)``; the transpose is
    the adjoint ``Gamma_phi^*``.
    """
    phi = np.asarray(phi, dtype=float)
    _check(rep, phi)
    cols = _apply_all(rep, phi)
    return np.swapaxes(cols.reshape(*cols.shape[:-3], 3 * rep.dim_g, rep.dim_S), -1, -2)


def _block_diag(mats):
    n = sum(m.shape[0] for m in mats)
    out = np.zeros((n, n))
    i = 0
    for m in mats:
        k = m.shape[0]
        out[i:i + k, i:i + k] = m
        i += k
    return out


def _left_ijk(n_quats: int):
    return [np.kron(np.eye(n_quats), left_matrix(_UNITS[a])) for a in (1, 2, 3)]


def _complex_right(c: complex) -> np.ndarray:
    return right_matrix([c.real, c.imag, 0.0, 0.0])


def _unitary_action(x: np.ndarray, copies: int) -> np.ndarray:
    """
    Real matrix of a complex k x k matrix acting C-linearly on ``(H^k)^copies``.

    The complex structure on each H slot is right multiplication by i, and
    ``(x . psi)_m = sum_n psi_n x_mn``.
    """
    k = x.shape[0]
    blk = np.zeros((4 * k, 4 * k))
    for m in range(k):
        for n in range(k):
            blk[4 * m:4 * m + 4, 4 * n:4 * n + 4] = _complex_right(complex(x[m, n]))
    return np.kron(np.eye(copies), blk)


def rep_trivial(n_quats: int = 1) -> QuatRep:
    """H^n with no gauge symmetry; the moment map vanishes identically."""
    I, J, K = _left_ijk(n_quats)
    return QuatRep(f"trivial-{n_quats}", trivial_alg(), I, J, K, np.zeros((0, 4 * n_quats, 4 * n_quats)))


def rep_multispinor(n: int) -> QuatRep:
    """U(1) acting on H^n by right multiplication with e^{i alpha} in every slot."""
    if n < 1:
        raise ValueError("n must be >= 1")
    I, J, K = _left_ijk(n)
    rho = np.kron(np.eye(n), _complex_right(1j))[None]
    name = "classical" if n == 1 else f"multispinor-{n}"
    return QuatRep(name, su_basis(1), I, J, K, rho)


def rep_classical() -> QuatRep:
    """S = H, u(1) acting by right multiplication by i."""
    return rep_multispinor(1)


def rep_adjoint(alg: LieAlg) -> QuatRep:
    """
    S = g (x) H with ``rho(xi) = ad_xi (x) id``.

    Coordinates are row-major in a ``(dim_g, 4)`` coefficient matrix: row b
    is the quaternion multiplying the b-th basis element of g.
    """
    d = alg.dim
    I, J, K = _left_ijk(d)
    rho = np.stack([np.kron(alg.ad(np.eye(d)[b]), np.eye(4)) for b in range(d)])
    return QuatRep(f"adjoint-{alg.name}", alg, I, J, K, rho)


def rep_adhm(r: int, k: int) -> QuatRep:
    """
    ADHM representation ``Hom_C(C^r, H (x)_C C^k) + H* (x)_R u(k)`` of U(k).

    Coordinates: first ``4 r k`` entries are the quaternion slots (s, m) of
    the Hom part, ordered by s then m; the remaining ``4 k^2`` are the
    ``(k^2, 4)`` coefficient matrix of the u(k) part in the ``u_basis(k)``
    basis. The flavour ``su(r)`` and ``sp(1)`` generators are stored in
    ``flavor``. For k = 2 the blocks ``psi``, ``xi`` (su(2) part) and
    ``eta`` (centre) are named; U(k) acts trivially on ``eta``.
    """
    if r < 1 or k < 1:
        raise ValueError("r and k must be >= 1")
    alg = u_basis(k)
    n_hom = r * k
    d = alg.dim
    I, J, K = _left_ijk(n_hom + d)
    rho = np.stack([
        _block_diag([
            _unitary_action(alg.basis[b], r),
            np.kron(alg.ad(np.eye(d)[b]), np.eye(4)),
        ])
        for b in range(d)
    ])
    flavor = {}
    if r > 1:
        su_r = su_basis(r)
        gens = []
        for x in su_r.basis:
            # precomposition with exp(-t x) on the C^r index
            act = np.zeros((4 * n_hom, 4 * n_hom))
            for s in range(r):
                for t in range(r):
                    c = complex(-x[t, s])
                    for m in range(k):
                        act[4 * (s * k + m):4 * (s * k + m) + 4, 4 * (t * k + m):4 * (t * k + m) + 4] = _complex_right(c)
            gens.append(_block_diag([act, np.zeros((4 * d, 4 * d))]))
        flavor[su_r.name] = np.stack(gens)
    flavor["sp(1)"] = np.stack([
        _block_diag([np.zeros((4 * n_hom, 4 * n_hom)), np.kron(np.eye(d), right_matrix(-_UNITS[a]))])
        for a in (1, 2, 3)
    ])
    blocks = {"hom": slice(0, 4 * n_hom), "u": slice(4 * n_hom, 4 * (n_hom + d))}
    if k == 2:
        o = 4 * n_hom
        blocks.update(psi=slice(0, o), xi=slice(o, o + 12), eta=slice(o + 12, o + 16))
    return QuatRep(f"adhm-{r}-{k}", alg, I, J, K, rho, flavor, blocks)


def classical_complex_matrix(op: np.ndarray) -> np.ndarray:
    """
    Complex 2x2 matrix of a C-linear operator on H = C + jC.

    H is a right C-module (scalars act by right multiplication) with basis
    ``{1, j}``; ``q = z + j w`` has coordinates ``(z, w)``.
    """
    op = np.asarray(op, dtype=float)
    out = np.zeros((2, 2), complex)
    for col, e in enumerate((_UNITS[0], _UNITS[2])):
        img = op @ e
        out[:, col] = _quat_to_c2(img)
    return out


def _quat_to_c2(q) -> np.ndarray:
    # q = z + j w with w = c + d i  =>  j w = c j - d k
    return np.array([q[0] + 1j * q[1], q[2] - 1j * q[3]])


def classical_matrix_form(q) -> np.ndarray:
    """
    ``q <q, .>_C - 1/2 |q|^2 id`` on C^2 for ``q = z + j w`` in H.

    This is the closed form of ``gamma_bold(moment(q))`` for the classical
    representation, ``1/2 [[|z|^2-|w|^2, 2 z conj(w)], [2 conj(z) w, |w|^2-|z|^2]]``.
    """
    z, w = _quat_to_c2(np.asarray(q, dtype=float))
    return 0.5 * np.array([
        [abs(z) ** 2 - abs(w) ** 2, 2 * z * np.conj(w)],
        [2 * np.conj(z) * w, abs(w) ** 2 - abs(z) ** 2],
    ])


def adjoint_mu_explicit(alg: LieAlg, xi) -> np.ndarray:
    """
    Moment map of g (x) H from brackets of the quaternionic components.

    For ``xi = xi_0 + xi_1 i + xi_2 j + xi_3 k`` the Im H components are
    ``[xi_0, xi_a] + [xi_b, xi_c]`` with (a, b, c) cyclic.
    """
    xi = np.asarray(xi, dtype=float)
    c = alg.structure_constants
    comps = xi.reshape(*xi.shape[:-1], alg.dim, 4)

    def br(p, q):
        return np.einsum("...a,...b,abe->...e", comps[..., p], comps[..., q], c)

    return np.stack([
        br(0, 1) + br(2, 3),
        br(0, 2) + br(3, 1),
        br(0, 3) + br(1, 2),
    ], axis=-2)


def diagonal_torus(alg: LieAlg) -> np.ndarray:
    """Orthonormal coefficient vectors spanning the diagonal torus of u(k)."""
    k = alg.matrix_size
    vecs = []
    for m in range(k):
        e = np.zeros((k, k), complex)
        e[m, m] = 1j
        vecs.append(alg.from_matrix(e))
    t = np.array(vecs)
    # orthonormalise inside the span (only needed for non-Frobenius metrics)
    q, _ = np.linalg.qr(t.T)
    return q.T if not np.allclose(t @ t.T, np.eye(k)) else t


def pi_torus(t, m) -> np.ndarray:
    """
    Orthogonal projection of a moment value onto ``Im H (x) t``.

    ``t`` is an orthonormal family of g-coefficient vectors, shape (r, dim_g).
    """
    t = np.atleast_2d(np.asarray(t, dtype=float))
    if not np.allclose(t @ t.T, np.eye(len(t)), atol=1e-10):
        raise ValueError("torus basis is not orthonormal")
    m = np.asarray(m, dtype=float)
    return m @ (t.T @ t)


def describe(rep: QuatRep) -> dict:
    """Structured description of a representation (plain JSON types)."""
    return {
        "name": rep.name,
        "dim_S": rep.dim_S,
        "algebra": rep.alg.name,
        "dim_g": rep.dim_g,
        "blocks": {k: [v.start, v.stop] for k, v in rep.blocks.items()},
        "I": rep.I.tolist(),
        "J": rep.J.tolist(),
        "K": rep.K.tolist(),
        "rho": rep.rho.tolist(),
        "flavor": {k: v.tolist() for k, v in rep.flavor.items()},
        "axiom_residuals": {k: float(v) for k, v in rep.axiom_residuals().items()},
    }


def builtin_rep(name: str) -> QuatRep:
    """Look up a built-in representation by its CLI identifier."""
    if name == "classical":
        return rep_classical()
    if name == "su2-adjoint":
        return rep_adjoint(su_basis(2))
    if name == "su3-adjoint":
        return rep_adjoint(su_basis(3))
    if name == "adhm12":
        return rep_adhm(1, 2)
    if name.startswith("multispinor-"):
        return rep_multispinor(int(name.split("-", 1)[1]))
    if name.startswith("adhm-"):
        r, k = name.split("-")[1:]
        return rep_adhm(int(r), int(k))
    raise ValueError(f"unknown representation {name!r}")


BUILTIN_REPS = ("classical", "su2-adjoint", "su3-adjoint", "adhm12", "multispinor-2")
