"""
Frequency function on a lattice: harmonic polynomials recover their degree,
the doubling exponents stay near 2d and the frequency is blind to the
rescaling (lam Phi, lam eps). Ends with the covering check on a few fields.
"""

import numpy as np

from swmoment import frequency_lab as fl
from swmoment.representation import builtin_rep, rep_trivial

center = (0.1, -0.2, 0.05)
# h = R/32 keeps the demo quick; at this spacing the cubic is already
# slightly under-resolved near the centre and the monotonicity test may
# trip (at R/64 all four degrees pass)
dom = fl.Domain(center, 1.0, 1 / 32)

for d in range(4):
    fld = fl.LatticeField.from_function(dom, rep_trivial(1), fl.harmonic_polynomial(d, center))
    prof = fl.frequency_profile(fld)
    mono = fl.monotonicity_report(prof)
    print(f"degree {d}: N(r) = " + " ".join(f"{v:.3f}" for v in prof.N) + f"   monotone: {mono['all_pass']}")

print("\nradius, m, D, N for degree 2:")
fld = fl.LatticeField.from_function(dom, rep_trivial(1), fl.harmonic_polynomial(2, center))
print(fl.profile_csv(fl.frequency_profile(fld)))

# rescaling a nonabelian configuration
rep = builtin_rep("su2-adjoint")
rng = np.random.default_rng(1)
C, D = rng.standard_normal((3, 12)), rng.standard_normal((3, 9))
g = fl.LatticeField.from_function(fl.Domain((0, 0, 0), 1.0, 1 / 16), rep, lambda x: np.sin(x @ C),
                                  lambda x: np.cos(x @ D).reshape(x.shape[:-1] + (3, 3)), eps=0.5)
base = fl.frequency_profile(g).N
for lam in (0.1, 10.0):
    print(f"lam = {lam:>4}: max |dN| = {np.abs(fl.frequency_profile(g.scaled(lam)).N - base).max():.1e}")

# covering check: smooth bump versus a concentrated shell
cdom = fl.Domain((0, 0, 0), 1.0, 1 / 16)
X = cdom.coords()
bump = 5.0 * np.exp(-np.sum(X**2, -1) / 0.02)
dist = np.linalg.norm(X, axis=-1)
shell = (np.abs(dist - 0.25) < 1.5 * cdom.h).astype(float)
shell *= 8.0 / fl.ball_integral(cdom, shell, (0, 0, 0), 0.5)
print(f"\ncovering delta: {fl.default_covering_delta()}")
for label, f in (("bump", bump), ("shell", shell)):
    out = fl.covering_check(cdom, f)
    print(f"{label:5s}: hypothesis {out['hypothesis_holds']}, conclusion {out['conclusion_holds']}, "
          f"implication {out['implication_holds']}")
