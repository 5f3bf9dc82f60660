"""
Discrete fields on flat boxes: residuals, frequency function, regularity scale.

A :class:`Domain` is a uniform cubic grid around a centre that covers the
closed ball ``B_R(centre)`` with two layers of padding, so second-order
stencils are available at every node of the ball. Bundles are trivial and
the metric is Euclidean. Two-forms on R^3 are identified with one-forms by
``e_1 <-> dx_2 ^ dx_3`` (cyclically), so curvature lands in the same
``(3, dim_g)`` shape as moment map values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import lebedev_rule
from scipy.interpolate import RegularGridInterpolator
from scipy.signal import fftconvolve

from .quat_core import LieAlg
from .representation import QuatRep, builtin_rep, moment, moment_norm, rep_trivial

__all__ = [
    "Domain",
    "LatticeField",
    "FrequencyProfile",
    "ball_integral",
    "dirac",
    "curvature",
    "residual_sw",
    "residual_flat_gc",
    "weitzenbock_defect",
    "weitzenbock_convergence",
    "sphere_mean",
    "frequency_profile",
    "monotonicity_report",
    "regularity_scale",
    "covering_number",
    "default_covering_delta",
    "regularity_scale_field",
    "covering_check",
    "harmonic_polynomial",
    "save_grid",
    "load_grid",
    "profile_csv",
]

PAD = 2
SUBSAMPLE = 4


@dataclass(frozen=True)
class Domain:
    """
    Uniform grid ``center + h * (k - n)`` for ``k = 0 .. 2n`` on every axis.

    ``n = ceil(R / h) + 2`` so the ball ``B_R(center)`` sits two nodes away
    from the edge.
    """

    center: tuple
    R: float
    h: float

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("h must be positive")
        if self.R / self.h < 8 - 1e-12:
            raise ValueError(f"R/h = {self.R / self.h:.3g} < 8")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def n(self) -> int:
        return int(math.ceil(self.R / self.h - 1e-9)) + PAD

    @property
    def dims(self) -> tuple:
        return (2 * self.n + 1,) * 3

    @property
    def axes(self) -> list[np.ndarray]:
        k = np.arange(-self.n, self.n + 1) * self.h
        return [c + k for c in self.center]

    def coords(self) -> np.ndarray:
        """Node coordinates, shape ``dims + (3,)``."""
        return np.stack(np.meshgrid(*self.axes, indexing="ij"), axis=-1)


@dataclass(frozen=True, eq=False)
class LatticeField:
    """
    Configuration ``(A, Phi, eps)`` sampled at the nodes of a domain.

    ``phi`` has shape ``dims + (dim_S,)`` and ``A`` shape
    ``dims + (3, dim_g)`` (the three components ``A_i`` as g-coefficients).
    """

    domain: Domain
    rep: QuatRep
    phi: np.ndarray
    A: np.ndarray = None
    eps: float = 1.0

    def __post_init__(self):
        dims = self.domain.dims
        phi = np.asarray(self.phi, dtype=float)
        if phi.shape != dims + (self.rep.dim_S,):
            raise ValueError(f"phi must have shape {dims + (self.rep.dim_S,)}, got {phi.shape}")
        A = np.zeros(dims + (3, self.rep.dim_g)) if self.A is None else np.asarray(self.A, dtype=float)
        if A.shape != dims + (3, self.rep.dim_g):
            raise ValueError(f"A must have shape {dims + (3, self.rep.dim_g)}, got {A.shape}")
        if not (np.all(np.isfinite(phi)) and np.all(np.isfinite(A))):
            raise ValueError("field values must be finite")
        if not self.eps > 0:
            raise ValueError("eps must be positive")
        object.__setattr__(self, "phi", phi)
        object.__setattr__(self, "A", A)

    @classmethod
    def from_function(cls, domain: Domain, rep: QuatRep, phi_fn: Callable, A_fn: Callable | None = None, eps=1.0):
        """Sample ``phi_fn(x)`` (and ``A_fn(x)``) at the node coordinates ``x``, shape (..., 3)."""
        x = domain.coords()
        phi = np.broadcast_to(phi_fn(x), domain.dims + (rep.dim_S,))
        A = None if A_fn is None else np.broadcast_to(A_fn(x), domain.dims + (3, rep.dim_g))
        return cls(domain, rep, np.array(phi), None if A is None else np.array(A), eps)

    def scaled(self, lam: float) -> "LatticeField":
        """``(A, lam Phi, lam eps)``: the rescaling under which the frequency is invariant."""
        return LatticeField(self.domain, self.rep, lam * self.phi, self.A, lam * self.eps)


# -- stencils ---------------------------------------------------------------


def _d(f, axis, h):
    """Central difference along a grid axis; valid away from the first/last node."""
    return np.gradient(f, h, axis=axis)


def _interior(shape, margin):
    return tuple(slice(margin, s - margin) for s in shape[:3])


def _rho_apply(rep: QuatRep, a, phi):
    """``rho(a) phi`` for g-coefficients ``a`` (..., dim_g)."""
    if rep.dim_g == 0 or not np.any(a):
        return np.zeros_like(phi)
    rp = np.tensordot(phi, rep.rho, axes=([-1], [2]))  # (..., b, i) = (rho_b phi)_i
    return np.einsum("...b,...bi->...i", a, rp)


def covariant_derivatives(fld: LatticeField) -> np.ndarray:
    """``nabla_{A,i} Phi = d_i Phi + rho(A_i) Phi``, shape ``dims + (3, dim_S)``."""
    h = fld.domain.h
    return np.stack([_d(fld.phi, i, h) + _rho_apply(fld.rep, fld.A[..., i, :], fld.phi) for i in range(3)], axis=-2)


def dirac(fld: LatticeField) -> np.ndarray:
    """``sum_i gamma(e_i) nabla_{A,i} Phi`` at every node (edges are one-sided)."""
    nab = covariant_derivatives(fld)
    return np.tensordot(nab, fld.rep.gammas, axes=([-2, -1], [0, 2]))


def _bracket(alg: LieAlg, x, y):
    return np.einsum("...a,...b,abe->...e", x, y, alg.structure_constants)


def curvature(fld: LatticeField) -> np.ndarray:
    """
    ``F_A`` as a one-form: component ``k`` is ``F_{k+1, k+2}`` (indices mod 3).

    ``F_ij = d_i A_j - d_j A_i + [A_i, A_j]``; shape ``dims + (3, dim_g)``.
    """
    h = fld.domain.h
    A = fld.A
    out = np.zeros_like(A)
    if fld.rep.dim_g == 0:
        return out
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        out[..., k, :] = _d(A[..., j, :], i, h) - _d(A[..., i, :], j, h) + _bracket(fld.rep.alg, A[..., i, :], A[..., j, :])
    return out


def residual_sw(fld: LatticeField):
    """
    Pointwise norms of ``D_A Phi`` and ``eps^2 F_A - mu(Phi)`` on interior nodes.

    Interior means at least one node away from the grid edge.

    Raises
    ------
    ValueError
        If the grid has fewer than three nodes per axis.
    """
    if min(fld.domain.dims) < 3:
        raise ValueError("domain too small for the central-difference stencil")
    inner = _interior(fld.domain.dims, 1)
    dr = np.linalg.norm(dirac(fld)[inner], axis=-1)
    cr = moment_norm(fld.eps**2 * curvature(fld)[inner] - moment(fld.rep, fld.phi[inner]))
    return dr, cr


def residual_flat_gc(domain: Domain, alg: LieAlg, A, a, xi) -> dict:
    """
    Pointwise residual norms of the stable flat ``G^C`` system.

    ``d_A^* a = 0``, ``*d_A a + d_A xi = 0`` and
    ``F_A = 1/2 [a ^ a] + *[xi, a]``, with ``A, a`` of shape
    ``dims + (3, dim_g)`` and ``xi`` of shape ``dims + (dim_g,)``.
    Evaluated on interior nodes.
    """
    h = domain.h
    A, a, xi = (np.asarray(v, dtype=float) for v in (A, a, xi))

    def dA(f, i):
        return _d(f, i, h) + _bracket(alg, A[..., i, :], f)

    inner = _interior(domain.dims, 1)
    div = -sum(dA(a[..., i, :], i) for i in range(3))
    second = np.zeros_like(a)
    third = np.zeros_like(a)
    for k in range(3):
        i, j = (k + 1) % 3, (k + 2) % 3
        curl = dA(a[..., j, :], i) - dA(a[..., i, :], j)
        second[..., k, :] = curl + dA(xi, k)
        F = _d(A[..., j, :], i, h) - _d(A[..., i, :], j, h) + _bracket(alg, A[..., i, :], A[..., j, :])
        third[..., k, :] = F - _bracket(alg, a[..., i, :], a[..., j, :]) - _bracket(alg, xi, a[..., k, :])
    return {
        "codifferential": np.linalg.norm(div[inner], axis=-1),
        "dirac": np.linalg.norm(second[inner].reshape(*second[inner].shape[:3], -1), axis=-1),
        "curvature": np.linalg.norm(third[inner].reshape(*third[inner].shape[:3], -1), axis=-1),
    }


# -- Weitzenboeck -----------------------------------------------------------


def weitzenbock_defect(fld: LatticeField) -> float:
    """
    ``max |D^2 Phi - nabla^* nabla Phi|`` over nodes of the ball, with ``A = 0``.

    ``D^2`` applies the discrete Dirac operator twice (a wide stencil) and
    ``nabla^* nabla`` is minus the 7-point Laplacian; both are exact on
    quadratics and differ by ``O(h^2)`` on smooth fields.
    """
    if np.any(fld.A):
        raise ValueError("weitzenbock_defect expects A = 0")
    d = fld.domain
    h = d.h
    once = dirac(fld)
    twice = dirac(LatticeField(d, fld.rep, once, None, fld.eps))
    lap = sum(
        (np.roll(fld.phi, -1, i) - 2 * fld.phi + np.roll(fld.phi, 1, i)) / h**2 for i in range(3)
    )
    defect = np.linalg.norm(twice + lap, axis=-1)
    inside = np.linalg.norm(d.coords() - np.array(d.center), axis=-1) <= d.R + 1e-12
    return float(defect[inside].max())


def weitzenbock_convergence(rep: QuatRep, phi_fn: Callable, R: float, hs, center=(0.0, 0.0, 0.0)) -> dict:
    """Defects over a sequence of spacings and observed orders ``log2`` of successive ratios."""
    hs = list(hs)
    defects = [weitzenbock_defect(LatticeField.from_function(Domain(center, R, h), rep, phi_fn)) for h in hs]
    orders = [
        float(np.log(defects[k] / defects[k + 1]) / np.log(hs[k] / hs[k + 1]))
        if defects[k + 1] > 0 else float("inf")
        for k in range(len(hs) - 1)
    ]
    return {"h": hs, "defect": defects, "order": orders}


# -- integrals --------------------------------------------------------------


def _sub_offsets(sub):
    o = (np.arange(sub) + 0.5) / sub - 0.5
    return np.stack(np.meshgrid(o, o, o, indexing="ij"), axis=-1).reshape(-1, 3)


def _window(domain: Domain, center, r: float, margin: int = 1):
    """Index slices of the smallest node box containing ``B_r(center)`` plus ``margin`` nodes."""
    sl, axes = [], []
    for ax, c in zip(domain.axes, center):
        lo = max(int(np.floor((c - r - ax[0]) / domain.h)) - margin, 0)
        hi = min(int(np.ceil((c + r - ax[0]) / domain.h)) + margin + 1, len(ax))
        sl.append(slice(lo, hi))
        axes.append(ax[lo:hi])
    return tuple(sl), axes


def _coords(axes):
    return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)


def ball_integral(domain: Domain, values, center, r: float, sub: int = SUBSAMPLE) -> float:
    """
    ``int_{B_r(center)} f`` for a nodal scalar field.

    Cells entirely inside the ball contribute ``h^3 f(node)``. For cells cut
    by the sphere the inside volume fraction and its first moment are found
    from ``sub^3`` sub-cell midpoints, and ``f`` is expanded to first order
    about the node, which keeps the rule second-order accurate.
    """
    h = domain.h
    c = np.asarray(center, dtype=float)
    sl, axes = _window(domain, c, r)
    values = np.asarray(values, dtype=float)[sl]
    coords = _coords(axes)
    dist = np.linalg.norm(coords - c, axis=-1)
    half = np.sqrt(3) / 2 * h
    inside = dist + half <= r
    cut = (dist - half < r) & ~inside
    total = float(values[inside].sum()) * h**3
    if cut.any():
        grad = np.stack(np.gradient(values, h), axis=-1)[cut]
        off = h * _sub_offsets(sub)
        pts = coords[cut][:, None, :] + off[None] - c
        w = (np.einsum("npi,npi->np", pts, pts) < r * r).astype(float)
        frac = w.mean(axis=1)
        moment1 = (w @ off) / len(off)
        total += float(np.sum(values[cut] * frac + np.einsum("ni,ni->n", grad, moment1))) * h**3
    return total


@lru_cache(maxsize=8)
def _lebedev(order):
    x, w = lebedev_rule(order)
    return x.T, w


def _lebedev_order(domain: Domain) -> int:
    return 13 if domain.R / domain.h >= 32 - 1e-9 else 7


def sphere_mean(domain: Domain, values, center, r: float) -> float:
    """``(1 / 4 pi r^2) int_{|y - center| = r} f`` by Lebedev quadrature of the trilinear interpolant."""
    pts, w = _lebedev(_lebedev_order(domain))
    c = np.asarray(center, dtype=float)
    sl, axes = _window(domain, c, r)
    interp = RegularGridInterpolator(axes, np.asarray(values, dtype=float)[sl])
    return float(w @ interp(c + r * pts)) / (4 * np.pi)


@dataclass(frozen=True)
class FrequencyProfile:
    """``m``, ``D`` and ``N = D / m`` (``nan`` where ``m = 0``) at a list of radii."""

    radii: np.ndarray
    m: np.ndarray
    D: np.ndarray
    N: np.ndarray
    quadrature: dict = field(default_factory=dict)

    @property
    def defined(self) -> np.ndarray:
        return self.m > 0


def _energy_density(fld: LatticeField) -> np.ndarray:
    nab = covariant_derivatives(fld)
    dens = np.sum(nab * nab, axis=(-2, -1))
    if fld.rep.dim_g:
        dens = dens + 2 * fld.eps**-2 * moment_norm(moment(fld.rep, fld.phi)) ** 2
    return dens


def frequency_profile(fld: LatticeField, x=None, radii=None) -> FrequencyProfile:
    """
    ``m(r) = mean of |Phi|^2 over the sphere``,
    ``D(r) = (1 / 4 pi r) int_{B_r} |nabla_A Phi|^2 + 2 eps^-2 |mu(Phi)|^2``
    and ``N = D / m``.

    Parameters
    ----------
    x : array_like, optional
        Centre; defaults to the domain centre.
    radii : sequence of float
        Each in ``(4h, R - 2h]``; default eight evenly spaced radii from
        ``R/4`` (below about ``10 h`` the second-order stencils cost a few
        percent of accuracy on cubic fields).

    Raises
    ------
    ValueError
        For a radius outside ``(4h, R - 2h]`` or a ball leaving the domain.
    """
    d = fld.domain
    h = d.h
    x = np.asarray(d.center if x is None else x, dtype=float)
    offset = float(np.linalg.norm(x - np.asarray(d.center)))
    rmax = d.R - 2 * h - offset
    if radii is None:
        radii = np.linspace(max(d.R / 4, 4 * h * 1.01), rmax, 8)
    radii = np.asarray(radii, dtype=float)
    bad = (radii <= 4 * h) | (radii > rmax + 1e-12)
    if bad.any():
        raise ValueError(f"radii must lie in (4h, R - 2h - |x - center|] = ({4 * h:g}, {rmax:g}]; got {radii[bad].tolist()}")
    sq = np.sum(fld.phi**2, axis=-1)
    dens = _energy_density(fld)
    m = np.array([sphere_mean(d, sq, x, r) for r in radii])
    D = np.array([ball_integral(d, dens, x, r) / (4 * np.pi * r) for r in radii])
    with np.errstate(divide="ignore", invalid="ignore"):
        N = np.where(m > 0, D / m, np.nan)
    meta = {
        "sphere_rule": "lebedev",
        "sphere_points": len(_lebedev(_lebedev_order(d))[1]),
        "ball_rule": "cell sum with sub-sampled boundary cells",
        "subsample": SUBSAMPLE,
        "h": h,
    }
    return FrequencyProfile(radii, m, D, N, meta)


def monotonicity_report(profile: FrequencyProfile, tol: float = 0.05) -> dict:
    """
    Empirical almost-monotonicity of ``N`` and the growth of ``m`` it controls.

    For all pairs ``s < r`` the smallest ``C >= 0`` with
    ``N(s) <= (1 + C r^2) N(r) + C r^2`` is fitted. With that ``C`` every
    doubling exponent ``log(m(r)/m(s)) / log(r/s)`` is checked against
    ``[(2 - C r^2) N(s) - C r^2, (2 + C r^2) N(r) + C r^2]`` widened by
    ``tol`` (quadrature tolerance).

    Raises
    ------
    ValueError
        With fewer than four radii or undefined ``N``.
    """
    r = profile.radii
    if len(r) < 4:
        raise ValueError("need at least four radii")
    if not np.all(profile.defined):
        raise ValueError("N is undefined (m = 0) at some radius")
    N, m = profile.N, profile.m
    pairs = []
    C = 0.0
    for i in range(len(r)):
        for j in range(i + 1, len(r)):
            need = (N[i] - N[j]) / (r[j] ** 2 * (N[j] + 1))
            C = max(C, float(need))
    ok = True
    for i in range(len(r)):
        for j in range(i + 1, len(r)):
            s_, r_ = r[i], r[j]
            expo = float(np.log(m[j] / m[i]) / np.log(r_ / s_)) if m[i] > 0 and m[j] > 0 else float("nan")
            lo = (2 - C * r_**2) * N[i] - C * r_**2 - tol
            hi = (2 + C * r_**2) * N[j] + C * r_**2 + tol
            passed = bool(lo <= expo <= hi)
            ok &= passed
            pairs.append({"s": float(s_), "r": float(r_), "exponent": expo, "lower": lo, "upper": hi, "pass": passed})
    return {"C": C, "tolerance": tol, "pairs": pairs, "all_pass": bool(ok)}


# -- regularity scale and covering ------------------------------------------


def regularity_scale(domain: Domain, density, c_F: float, r0: float, x=None) -> float:
    """
    ``sup {r in [0, r0] : r int_{B_r(x)} density <= c_F}`` on the radius grid ``{k h / 2} + {r0}``.

    The constraint is monotone in ``r``, so bisection over the candidate
    list returns the largest admissible grid radius.
    """
    density = np.asarray(density, dtype=float)
    if np.any(density < 0):
        raise ValueError("density must be non-negative")
    x = domain.center if x is None else x
    cand = np.arange(1, int(np.floor(r0 / (domain.h / 2) + 1e-9)) + 1) * domain.h / 2
    cand = np.unique(np.append(cand[cand < r0], r0))

    def ok(r):
        return r * ball_integral(domain, density, x, r) <= c_F

    if ok(cand[-1]):
        return float(cand[-1])
    lo, hi = -1, len(cand) - 1  # invariant: cand[lo] ok (or lo = -1), cand[hi] not ok
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if ok(cand[mid]):
            lo = mid
        else:
            hi = mid
    return 0.0 if lo < 0 else float(cand[lo])


@lru_cache(maxsize=4)
def covering_number(fraction: float = 0.125, spacing: float = 1 / 40) -> int:
    """
    Number of balls of radius ``fraction`` centred in the unit ball that cover it.

    Centres start on the cubic lattice whose cells are inscribed in such
    balls (centres outside the unit ball are pulled back onto it); any
    point of a fine test grid still uncovered gets a ball of its own.
    """
    a = 2 * fraction / np.sqrt(3)
    k = np.arange(-int(np.ceil(1 / a)) - 1, int(np.ceil(1 / a)) + 2)
    c = np.stack(np.meshgrid(k, k, k, indexing="ij"), -1).reshape(-1, 3) * a
    c = c[np.linalg.norm(c, axis=1) - np.sqrt(3) / 2 * a < 1]
    n = np.linalg.norm(c, axis=1, keepdims=True)
    c = np.where(n > 1, c / np.maximum(n, 1.0), c)
    g = np.arange(-1, 1 + spacing / 2, spacing)
    pts = np.stack(np.meshgrid(g, g, g, indexing="ij"), -1).reshape(-1, 3)
    pts = pts[np.linalg.norm(pts, axis=1) <= 1]
    from scipy.spatial import cKDTree

    tree = cKDTree(c)
    dist, _ = tree.query(pts)
    uncovered = pts[dist > fraction]
    extra = 0
    while len(uncovered):
        p = uncovered[0]
        uncovered = uncovered[np.linalg.norm(uncovered - p, axis=1) > fraction]
        extra += 1
    return int(len(c) + extra)


def default_covering_delta() -> dict:
    """Both readings of the covering threshold: ``1 / (16 N_c)`` and ``N_c / 16``."""
    nc = covering_number()
    return {"N_c": nc, "delta": 1.0 / (16 * nc), "delta_literal": nc / 16.0}


@lru_cache(maxsize=64)
def _ball_kernel(radius_in_h: float, sub: int = SUBSAMPLE) -> np.ndarray:
    """Fraction of each unit cell inside the ball of the given radius around node 0."""
    k = int(np.ceil(radius_in_h + 1))
    g = np.arange(-k, k + 1)
    nodes = np.stack(np.meshgrid(g, g, g, indexing="ij"), -1)
    pts = nodes[..., None, :] + _sub_offsets(sub)
    frac = (np.linalg.norm(pts, axis=-1) < radius_in_h).mean(axis=-1)
    frac.setflags(write=False)
    return frac


def _ball_integrals(domain: Domain, f, s: float) -> np.ndarray:
    return fftconvolve(f, _ball_kernel(round(s / domain.h, 9)), mode="same") * domain.h**3


def regularity_scale_field(domain: Domain, f, x=None, r=None) -> np.ndarray:
    """
    ``r_f(y) = sup {s >= 0 : s int_{B_s(y) cap B_r(x)} f <= 1}`` for nodes ``y`` in ``B_r(x)``.

    Radii run over ``{k h / 2}`` up to ``2 r``; beyond that ``B_s(y)``
    contains ``B_r(x)`` and the sup is ``1 / int_{B_r(x)} f`` in closed
    form (``inf`` if that integral vanishes). Nodes outside the ball get
    ``nan``.
    """
    x = np.asarray(domain.center if x is None else x, dtype=float)
    r = domain.R if r is None else r
    f = np.asarray(f, dtype=float)
    dist = np.linalg.norm(domain.coords() - x, axis=-1)
    restricted = f * (dist < r)
    total = float(restricted.sum()) * domain.h**3
    out = np.full(f.shape, np.nan)
    inside = dist < r
    best = np.zeros(f.shape)
    done = np.zeros(f.shape, dtype=bool)
    for s in np.arange(1, int(np.ceil(4 * r / domain.h)) + 1) * domain.h / 2:
        ok = s * _ball_integrals(domain, restricted, s) <= 1 + 1e-12
        best = np.where(~done & ok, s, best)
        done |= ~ok
    tail = np.inf if total == 0 else max(1.0 / total, 2 * r)
    best = np.where(done, best, tail)
    out[inside] = best[inside]
    return out


def covering_check(domain: Domain, f, delta: float | None = None, x=None, r=None, s_step=None) -> dict:
    """
    Exhaustive check of the decay-implies-interior-bound lemma on the grid.

    Hypothesis: for every node ``y`` and radius ``s`` (multiples of
    ``s_step``, at least ``4h``) with ``B_s(y)`` inside ``B_r(x)``,
    ``s int_{B_s(y)} f <= 1`` implies ``(s/4) int_{B_{s/4}(y)} f <= delta``.
    Conclusion: ``(r/2) int_{B_{r/2}(x)} f <= 1``. ``delta`` defaults to
    ``1 / (16 N_c)``. Tested radii start at ``4h``; below ``r = 16 h`` they
    would never reach ``r / 4`` and the premise can be vacuous at every
    tested pair, so such grids are rejected.

    Returns
    -------
    dict
        ``hypothesis_holds``, ``conclusion_holds``, ``implication_holds``,
        ``worst_pair`` (node and ``s`` with the largest decay excess among
        pairs satisfying the premise), ``conclusion_value`` and the
        threshold readings, and ``premise_pairs``, the number of tested pairs
        at which the premise held.

    Raises
    ------
    ValueError
        If ``f`` is negative somewhere or ``r < 16 h``.
    """
    f = np.asarray(f, dtype=float)
    if np.any(f < 0):
        raise ValueError("f must be non-negative")
    x = np.asarray(domain.center if x is None else x, dtype=float)
    r = domain.R if r is None else float(r)
    h = domain.h
    if r < 16 * h - 1e-12:
        raise ValueError(f"r / h = {r / h:.3g} < 16: tested radii would not reach r / 4")
    thresholds = default_covering_delta()
    delta = thresholds["delta"] if delta is None else float(delta)
    s_step = h if s_step is None else s_step
    coords = domain.coords()
    dist = np.linalg.norm(coords - x, axis=-1)
    worst = {"excess": -np.inf, "y": None, "s": None, "premise": None, "decay": None}
    tested = premised = 0
    for s in np.arange(4 * h, r + 1e-9, s_step):
        fits = dist + s <= r + 1e-12
        if not fits.any():
            continue
        big = s * _ball_integrals(domain, f, s)
        small = (s / 4) * _ball_integrals(domain, f, s / 4)
        premise = fits & (big <= 1)
        tested += int(fits.sum())
        premised += int(premise.sum())
        if premise.any():
            ex = np.where(premise, small - delta, -np.inf)
            i = np.unravel_index(int(np.argmax(ex)), ex.shape)
            if ex[i] > worst["excess"]:
                worst = {
                    "excess": float(ex[i]),
                    "y": coords[i].tolist(),
                    "s": float(s),
                    "premise": float(big[i]),
                    "decay": float(small[i]),
                }
    hyp = not (worst["excess"] > 0)
    concl_value = (r / 2) * ball_integral(domain, f, x, r / 2)
    concl = bool(concl_value <= 1)
    return {
        "hypothesis_holds": bool(hyp),
        "conclusion_holds": concl,
        "implication_holds": bool((not hyp) or concl),
        "conclusion_value": float(concl_value),
        "worst_pair": worst,
        "pairs_tested": tested,
        "premise_pairs": premised,
        "delta": delta,
        "N_c": thresholds["N_c"],
        "delta_literal_reading": thresholds["delta_literal"],
    }


# -- oracles and I/O --------------------------------------------------------


def harmonic_polynomial(d: int, center=(0.0, 0.0, 0.0)) -> Callable:
    """Homogeneous harmonic polynomial of degree 0..3 around ``center`` as a one-component field."""
    polys = {
        0: lambda y: np.ones(y.shape[:-1]),
        1: lambda y: y[..., 0],
        2: lambda y: y[..., 0] ** 2 - y[..., 1] ** 2,
        3: lambda y: y[..., 0] ** 3 - 3 * y[..., 0] * y[..., 1] ** 2,
    }
    if d not in polys:
        raise ValueError("degree must be 0, 1, 2 or 3")
    c = np.asarray(center, dtype=float)

    def fn(x):
        out = np.zeros(x.shape[:-1] + (4,))
        out[..., 0] = polys[d](x - c)
        return out

    return fn


_MAGIC = "# swmoment-grid v1"


def save_grid(path, fld: LatticeField, rep_id: str) -> None:
    """
    Write a field as text.

    Header lines: magic, ``dims nx ny nz``, ``h``, ``R``, ``center``,
    ``rep``, ``eps``, ``components n_phi n_A``. Body: one node per line in
    row-major (C) order, the ``phi`` coefficients followed by ``A``.
    """
    d = fld.domain
    n_a = 3 * fld.rep.dim_g
    nodes = int(np.prod(d.dims))
    body = np.concatenate([fld.phi.reshape(nodes, fld.rep.dim_S), fld.A.reshape(nodes, n_a)], axis=1)
    with open(path, "w") as fh:
        fh.write(f"{_MAGIC}\n")
        fh.write("dims " + " ".join(map(str, d.dims)) + "\n")
        fh.write(f"h {d.h!r}\nR {d.R!r}\n")
        fh.write("center " + " ".join(repr(c) for c in d.center) + "\n")
        fh.write(f"rep {rep_id}\neps {fld.eps!r}\ncomponents {fld.rep.dim_S} {n_a}\n")
        np.savetxt(fh, body, fmt="%.17g")


def load_grid(path) -> tuple[LatticeField, str]:
    """Read a file written by :func:`save_grid`; returns the field and its rep id."""
    head = {}
    with open(path) as fh:
        if fh.readline().strip() != _MAGIC:
            raise ValueError(f"{path}: not a swmoment grid file")
        for _ in range(7):
            key, *vals = fh.readline().split()
            head[key] = vals
        body = np.loadtxt(fh, ndmin=2)
    rep_id = head["rep"][0]
    rep = rep_trivial(1) if rep_id == "trivial" else builtin_rep(rep_id)
    dims = tuple(int(v) for v in head["dims"])
    domain = Domain(tuple(float(c) for c in head["center"]), float(head["R"][0]), float(head["h"][0]))
    if domain.dims != dims:
        raise ValueError(f"{path}: dims {dims} do not match h and R (expected {domain.dims})")
    n_phi, n_a = (int(v) for v in head["components"])
    if n_phi != rep.dim_S or n_a != 3 * rep.dim_g or body.shape != (int(np.prod(dims)), n_phi + n_a):
        raise ValueError(f"{path}: body does not match header")
    phi = body[:, :n_phi].reshape(dims + (n_phi,))
    A = body[:, n_phi:].reshape(dims + (3, rep.dim_g))
    return LatticeField(domain, rep, phi, A, float(head["eps"][0])), rep_id


PROFILE_COLUMNS = ("radius", "m", "D", "N")


def profile_csv(profile: FrequencyProfile) -> str:
    """CSV text with columns ``radius, m, D, N`` (empty ``N`` where undefined)."""
    lines = [",".join(PROFILE_COLUMNS)]
    for r, m, D, N in zip(profile.radii, profile.m, profile.D, profile.N):
        lines.append(f"{float(r)!r},{float(m)!r},{float(D)!r},{'' if np.isnan(N) else repr(float(N))}")
    return "\n".join(lines) + "\n"
