"""
Multistart maximisation of scale-invariant ratios over products of spheres.

The search is deliberately simple: draw a stratified cloud of candidate
points, split it into ``multistarts`` contiguous strata, start one projected
gradient ascent from the best feasible point of every stratum and keep the
largest final value. Gradients are central differences of ``f o project`` so
they are automatically tangent to the constraint manifold. Infeasible
points are encoded by the objective returning ``nan`` or ``-inf``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = ["SearchResult", "NonConvergence", "EmptyConstraint", "sphere_search", "normalize_blocks", "MAX_ITER"]

MAX_ITER = 200


class NonConvergence(RuntimeError):
    """Multistart results disagree by more than the allowed spread."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class EmptyConstraint(ValueError):
    """No sampled point satisfies the constraint."""


@dataclass(frozen=True)
class SearchResult:
    estimate: float
    witness: np.ndarray
    finals: np.ndarray
    spread: float
    feasible: int
    samples: int
    multistarts: int
    iterations: int
    sample_best: float


def normalize_blocks(blocks: list[tuple[int, int]], radii=None) -> Callable:
    """
    Retraction onto a product of spheres.

    ``blocks`` are ``(start, stop)`` coordinate ranges; each is rescaled to
    the matching radius (default 1). Zero blocks are left alone.
    """
    radii = [1.0] * len(blocks) if radii is None else list(radii)

    def project(x):
        x = np.array(x, dtype=float, copy=True)
        for (a, b), r in zip(blocks, radii):
            n = np.linalg.norm(x[..., a:b], axis=-1, keepdims=True)
            x[..., a:b] *= r / np.where(n == 0, 1.0, n)
        return x

    return project


def _clean(v, maximize):
    v = np.asarray(v, dtype=float)
    bad = ~np.isfinite(v) & ~(v == np.inf if maximize else v == -np.inf)
    v = np.where(bad, np.nan, v)
    return v if maximize else -v


def _gradient(f, project, x, step):
    n, d = x.shape
    eye = np.eye(d) * step
    plus = project((x[:, None, :] + eye).reshape(-1, d))
    minus = project((x[:, None, :] - eye).reshape(-1, d))
    fp = f(plus).reshape(n, d)
    fm = f(minus).reshape(n, d)
    g = (fp - fm) / (2 * step)
    # one-sided fallback where one side is infeasible
    f0 = f(x)[:, None]
    g = np.where(np.isnan(fp) & ~np.isnan(fm), (f0 - fm) / step, g)
    g = np.where(np.isnan(fm) & ~np.isnan(fp), (fp - f0) / step, g)
    return np.nan_to_num(g, nan=0.0, posinf=0.0, neginf=0.0)


def _ascend(f, project, x, max_iter, step0, fd_step):
    """
    Projected gradient ascent with Barzilai-Borwein step lengths.

    A trial step that does not increase ``f`` is halved and retried on the
    next iteration; accepted steps refresh the gradient and the BB length
    ``|s|^2 / |<s, y>|``. Every start stops independently once its step
    falls below 1e-13 or ``max_iter`` iterations have run.
    """
    x = project(x)
    val = f(x)
    g = _gradient(f, project, x, fd_step)
    gn = np.linalg.norm(g, axis=1)
    alpha = step0 / np.where(gn == 0, 1.0, gn)
    alpha[gn == 0] = 0.0
    it = 0
    for it in range(1, max_iter + 1):
        active = alpha * np.linalg.norm(g, axis=1) > 1e-13
        if not active.any():
            break
        idx = np.flatnonzero(active)
        trial = project(x[idx] + alpha[idx, None] * g[idx])
        tv = f(trial)
        better = tv > val[idx]
        rej = idx[~better]
        alpha[rej] /= 2
        acc = idx[better]
        if len(acc):
            new_g = _gradient(f, project, trial[better], fd_step)
            s_ = trial[better] - x[acc]
            y_ = new_g - g[acc]
            sy = np.abs(np.einsum("ij,ij->i", s_, y_))
            ss = np.einsum("ij,ij->i", s_, s_)
            ngn = np.linalg.norm(new_g, axis=1)
            cap = 4 * step0 / np.where(ngn == 0, 1.0, ngn)
            bb = np.where(sy > 0, ss / np.where(sy == 0, 1.0, sy), cap)
            alpha[acc] = np.minimum(bb, cap)
            x[acc] = trial[better]
            val[acc] = tv[better]
            g[acc] = new_g
    return x, val, it


def sphere_search(
    objective: Callable[[np.ndarray], np.ndarray],
    sampler: Callable[[np.random.Generator, int], np.ndarray],
    project: Callable[[np.ndarray], np.ndarray],
    samples: int,
    multistarts: int,
    seed: int,
    *,
    maximize: bool = True,
    max_iter: int = MAX_ITER,
    step: float = 0.05,
    fd_step: float = 1e-6,
    extra_starts: np.ndarray | None = None,
    max_spread: float | None = 0.25,
    starts_per_stratum: int = 3,
) -> SearchResult:
    """
    Estimate ``sup objective`` (or ``inf`` with ``maximize=False``).

    Parameters
    ----------
    objective : callable
        Vectorised ``(n, d) -> (n,)``; ``nan`` marks infeasible points.
    sampler : callable
        ``(rng, n) -> (n, d)`` candidate points, already feasible or not.
    project : callable
        Retraction onto the constraint manifold.
    samples, multistarts, seed : int
        Cloud size, number of strata and RNG seed.
    extra_starts : ndarray, optional
        Points appended to every stratum's candidate pool (e.g. witnesses
        from a smaller constraint set), which makes nested searches monotone.
    max_spread : float or None
        Raise :class:`NonConvergence` when ``(best - worst) / |best|`` over
        the stratum finals exceeds this.
    starts_per_stratum : int
        Number of ascents launched from each stratum.

    Returns
    -------
    SearchResult
    """
    if samples < multistarts or multistarts < 1:
        raise ValueError("need samples >= multistarts >= 1")
    rng = np.random.default_rng(seed)
    cloud = project(sampler(rng, samples))

    def f(x):
        return _clean(objective(x), maximize)

    vals = f(cloud)
    n_feasible = int(np.sum(~np.isnan(vals)))
    if n_feasible == 0:
        raise EmptyConstraint("no sampled point satisfies the constraint")
    strata = np.array_split(np.arange(samples), multistarts)
    starts, owner = [], []
    for k, s in enumerate(strata):
        v = np.where(np.isnan(vals[s]), -np.inf, vals[s])
        order = np.argsort(-v, kind="stable")[:starts_per_stratum]
        for j in order:
            if np.isfinite(v[j]):
                starts.append(cloud[s[j]])
                owner.append(k)
    if extra_starts is not None and len(extra_starts):
        extra = project(np.atleast_2d(np.asarray(extra_starts, dtype=float)))
        ev = f(extra)
        for x, v in zip(extra, ev):
            if not np.isnan(v):
                starts.append(x)
                owner.append(-1)
    owner = np.array(owner)
    xs, finals, iters = _ascend(f, project, np.array(starts), max_iter, step, fd_step)
    finals = np.where(np.isnan(finals), -np.inf, finals)
    strata_finals = np.array([finals[owner == k].max() for k in np.unique(owner[owner >= 0])])
    i = int(np.argmax(finals))
    best = finals[i]
    worst = float(np.min(strata_finals))
    spread = float((best - worst) / abs(best)) if np.isfinite(best) and best != 0 else 0.0
    sign = 1.0 if maximize else -1.0
    result = SearchResult(
        estimate=float(sign * best),
        witness=xs[i],
        finals=sign * strata_finals,
        spread=spread,
        feasible=n_feasible,
        samples=samples,
        multistarts=multistarts,
        iterations=iters,
        sample_best=float(sign * np.nanmax(vals)),
    )
    if max_spread is not None and spread > max_spread:
        raise NonConvergence(f"multistart spread {spread:.3f} exceeds {max_spread}", result)
    return result
