"""
Quaternion arithmetic and compact Lie algebras with orthonormal bases.

Quaternions are stored as length-4 real arrays ``(w, x, y, z)`` for
``w + x i + y j + z k``; every function here broadcasts over leading axes.
Lie algebras are matrix algebras (u(k), su(k)) described by an orthonormal
basis and the structure constants in that basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

__all__ = [
    "Quat",
    "ImQuat",
    "LieAlg",
    "quat_mul",
    "quat_conj",
    "quat_norm",
    "left_matrix",
    "right_matrix",
    "bracket",
    "su_basis",
    "u_basis",
    "trivial_alg",
    "jacobi_residual",
    "ad_invariance_residual",
]

# Hamilton product table: _MUL[p, q, r] is the e_r coefficient of e_p e_q.
_MUL = np.zeros((4, 4, 4))
for _p, _q, _r, _s in [
    (0, 0, 0, 1), (0, 1, 1, 1), (0, 2, 2, 1), (0, 3, 3, 1),
    (1, 0, 1, 1), (1, 1, 0, -1), (1, 2, 3, 1), (1, 3, 2, -1),
    (2, 0, 2, 1), (2, 1, 3, -1), (2, 2, 0, -1), (2, 3, 1, 1),
    (3, 0, 3, 1), (3, 1, 2, 1), (3, 2, 1, -1), (3, 3, 0, -1),
]:
    _MUL[_p, _q, _r] = _s


class Quat(NamedTuple):
    """A single quaternion ``w + x i + y j + z k``."""

    w: float
    x: float
    y: float
    z: float

    def __mul__(self, other):
        return quat_mul(self, other)

    def conj(self) -> "Quat":
        return Quat(self.w, -self.x, -self.y, -self.z)

    def norm(self) -> float:
        return float(np.sqrt(self.w**2 + self.x**2 + self.y**2 + self.z**2))

    @classmethod
    def imag(cls, x: float, y: float, z: float) -> "Quat":
        return cls(0.0, x, y, z)


class ImQuat(NamedTuple):
    """A purely imaginary quaternion ``x i + y j + z k``."""

    x: float
    y: float
    z: float

    def to_quat(self) -> Quat:
        return Quat(0.0, self.x, self.y, self.z)


def quat_mul(a, b):
    """
    Hamilton product ``a b``.

    Accepts ``Quat`` instances or arrays of shape ``(..., 4)``; returns a
    ``Quat`` when both arguments are ``Quat``.

    >>> quat_mul(Quat(0, 1, 0, 0), Quat(0, 0, 1, 0))
    Quat(w=0.0, x=0.0, y=0.0, z=1.0)
    """
    out = np.einsum("...p,...q,pqr->...r", np.asarray(a, float), np.asarray(b, float), _MUL)
    if isinstance(a, Quat) and isinstance(b, Quat):
        return Quat(*map(float, out))
    return out


def quat_conj(q):
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_norm(q):
    return np.linalg.norm(np.asarray(q, dtype=float), axis=-1)


def left_matrix(q) -> np.ndarray:
    """4x4 real matrix of ``p -> q p``."""
    return np.einsum("p,pqr->rq", np.asarray(q, float), _MUL)


def right_matrix(q) -> np.ndarray:
    """4x4 real matrix of ``p -> p q``."""
    return np.einsum("q,pqr->rp", np.asarray(q, float), _MUL)


@dataclass(frozen=True, eq=False)
class LieAlg:
    """
    A compact matrix Lie algebra with an orthonormal basis.

    Attributes
    ----------
    name : str
        Human readable name, e.g. ``"su(2)"``.
    basis : ndarray, shape (dim, n, n)
        Complex skew-Hermitian matrices forming an orthonormal basis for the
        inner product ``trace_scale * Re tr(X^* Y)``.
    structure_constants : ndarray, shape (dim, dim, dim)
        ``[X_a, X_b] = sum_e c[a, b, e] X_e``.
    trace_scale : float
        Normalisation of the invariant inner product.
    """

    name: str
    basis: np.ndarray
    structure_constants: np.ndarray
    trace_scale: float = 1.0
    gram: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "gram", np.eye(self.dim))
        self.basis.setflags(write=False)
        self.structure_constants.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.structure_constants.shape[0]

    @property
    def matrix_size(self) -> int:
        return self.basis.shape[-1] if self.dim else 0

    def ad(self, x) -> np.ndarray:
        """Matrix of ``y -> [x, y]`` in the basis."""
        return np.einsum("a,abe->eb", np.asarray(x, float), self.structure_constants)

    def to_matrix(self, x) -> np.ndarray:
        return np.einsum("...a,aij->...ij", np.asarray(x, float), self.basis)

    def from_matrix(self, m) -> np.ndarray:
        """Coefficients of the orthogonal projection of ``m`` onto the algebra."""
        m = np.asarray(m)
        return self.trace_scale * np.einsum("aji,...ji->...a", self.basis.conj(), m).real

    def __repr__(self):
        return f"LieAlg({self.name!r}, dim={self.dim})"


def _from_matrices(name, mats, trace_scale) -> LieAlg:
    mats = np.asarray(mats, dtype=complex)
    gram = trace_scale * np.einsum("aji,bji->ab", mats.conj(), mats).real
    if not np.allclose(gram, np.eye(len(mats)), atol=1e-12):
        raise ValueError(f"basis of {name} is not orthonormal")
    comm = np.einsum("aij,bjk->abik", mats, mats)
    comm = comm - comm.transpose(1, 0, 2, 3)
    c = trace_scale * np.einsum("eji,abji->abe", mats.conj(), comm).real
    return LieAlg(name, mats, c, trace_scale)


def _gell_mann(k: int) -> list[np.ndarray]:
    """Hermitian generalised Gell-Mann matrices with ``tr(l_a l_b) = 2 delta``."""
    out = []
    for m in range(k):
        for n in range(m + 1, k):
            s = np.zeros((k, k), complex)
            s[m, n] = s[n, m] = 1
            a = np.zeros((k, k), complex)
            a[m, n], a[n, m] = -1j, 1j
            out += [s, a]
    for l in range(1, k):
        d = np.zeros((k, k), complex)
        d[np.arange(l), np.arange(l)] = 1
        d[l, l] = -l
        out.append(d * np.sqrt(2.0 / (l * (l + 1))))
    return out


def _su2_tau() -> list[np.ndarray]:
    sx = np.array([[0, 1], [1, 0]], complex)
    sy = np.array([[0, -1j], [1j, 0]])
    sz = np.array([[1, 0], [0, -1]], complex)
    return [-1j * sx, -1j * sy, -1j * sz]


def su_basis(k: int) -> LieAlg:
    """
    su(k) with orthonormal basis for ``<X, Y> = 1/2 Re tr(X^* Y)``.

    For ``k = 2`` the basis is ``tau_a = -i sigma_a`` and satisfies
    ``[tau_0, tau_1] = 2 tau_2`` cyclically. ``k = 1`` returns u(1) spanned
    by ``i`` with unit norm.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return _from_matrices("u(1)", [np.array([[1j]])], 1.0)
    if k == 2:
        return _from_matrices("su(2)", _su2_tau(), 0.5)
    return _from_matrices(f"su({k})", [-1j * g for g in _gell_mann(k)], 0.5)


def u_basis(k: int) -> LieAlg:
    """
    u(k) with orthonormal basis for the Frobenius product ``Re tr(X^* Y)``.

    The basis lists su(k) first (scaled su_basis elements) and then the
    centre ``i 1 / sqrt(k)``, so ``u(2) = su(2) + u(1)`` is a split basis.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if k == 1:
        return su_basis(1)
    if k == 2:
        su = [t / np.sqrt(2) for t in _su2_tau()]
    else:
        su = [-1j * g / np.sqrt(2) for g in _gell_mann(k)]
    centre = 1j * np.eye(k) / np.sqrt(k)
    return _from_matrices(f"u({k})", su + [centre], 1.0)


def trivial_alg() -> LieAlg:
    return LieAlg("trivial", np.zeros((0, 1, 1), complex), np.zeros((0, 0, 0)))


def bracket(alg: LieAlg, x, y) -> np.ndarray:
    """Lie bracket of coefficient vectors; broadcasts over leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != alg.dim or y.shape[-1] != alg.dim:
        raise ValueError(f"expected coefficient vectors of length {alg.dim}")
    return np.einsum("...a,...b,abe->...e", x, y, alg.structure_constants)


def jacobi_residual(alg: LieAlg, x, y, z) -> np.ndarray:
    j = (
        bracket(alg, x, bracket(alg, y, z))
        + bracket(alg, y, bracket(alg, z, x))
        + bracket(alg, z, bracket(alg, x, y))
    )
    return np.linalg.norm(j, axis=-1)


def ad_invariance_residual(alg: LieAlg, x, y, z) -> np.ndarray:
    """``|<[x,y],z> + <y,[x,z]>|``."""
    return np.abs(
        np.einsum("...a,...a->...", bracket(alg, x, y), z)
        + np.einsum("...a,...a->...", y, bracket(alg, x, z))
    )
