"""
Walk through the built-in quaternionic representations and check the
moment-map identities on each of them.

Run with ``python demos/identities_tour.py``.
"""

import numpy as np

from swmoment import identity_suite as ids
from swmoment.representation import (
    BUILTIN_REPS,
    builtin_rep,
    diagonal_torus,
    moment,
    moment_norm,
    pi_torus,
    rep_adhm,
)

# every built-in rep, with its dimensions
for name in BUILTIN_REPS:
    rep = builtin_rep(name)
    print(f"{name:14s} dim S = {rep.dim_S:3d}   dim g = {rep.dim_g}")

# the identity suite at a modest sample count
print()
for name in BUILTIN_REPS:
    for chk in ids.run_all(name, 2000, 0, 1e-8):
        flag = "ok " if chk.passed else "BAD"
        print(f"{flag} {name:14s} {chk.name:28s} worst residual {chk.worst_residual:.2e}")

# torus projection on the Hom block of ADHM(1, k): the norm is a quarter of
# the sum of fourth powers of the slot norms, so it only equals |Psi|^2 / 2
# when there is a single slot
print()
rng = np.random.default_rng(0)
for k in (1, 2, 3):
    rep = rep_adhm(1, k)
    x = np.zeros((5000, rep.dim_S))
    x[:, : 4 * k] = rng.standard_normal((5000, 4 * k))
    p = moment_norm(pi_torus(diagonal_torus(rep.alg), moment(rep, x)))
    slots = np.sum(x[:, : 4 * k].reshape(-1, k, 4) ** 2, axis=-1)
    quartic = 0.5 * np.sqrt(np.sum(slots**2, axis=1))
    half = 0.5 * np.sum(x * x, axis=1)
    print(f"k={k}: |p - quartic| = {np.abs(p - quartic).max():.1e}   |p - |Psi|^2/2| = {np.abs(p - half).max():.2f}"
          f"   min p/(|Psi|^2/2) = {np.min(p / half):.3f} (bound 1/sqrt(k) = {1 / np.sqrt(k):.3f})")
