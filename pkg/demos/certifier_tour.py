"""
Numerical certification of the algebraic constants: the su(2) criterion,
sigma for ADHM(1,2) together with the split constant, the lower bound on
|mu| and the failure of the criterion for su(3).

The budgets below are small so the script finishes in a few seconds; the
CLI defaults are larger.
"""

from swmoment import certifier as cert

SAMPLES, STARTS, SEED = 800, 4, 0

crit = cert.certify_su2_criterion(cert.DELTA_MU, SAMPLES, STARTS, SEED)
print(f"su(2) criterion constant  c = {crit.estimate:.6f}   spread {crit.spread:.1e}   drift {crit.stability_ratio:.1e}")

for r in cert.su2_criterion_sweep((0.01, 0.05, 0.1), SAMPLES, STARTS, SEED):
    print(f"  band delta_mu = {r.constraint['delta_mu']:<5g} -> c = {r.estimate:.6f}")

sig = cert.estimate_sigma_adhm12(SAMPLES, STARTS, SEED)
c_split = cert.c_split_from_sigma(sig.estimate)
split = cert.split_violations(c_split, 20_000, SEED)
print(f"\nADHM(1,2): sigma = {sig.estimate:.7f} ({sig.extras['stratum']} stratum), sqrt(2/3) = {(2 / 3) ** 0.5:.7f}")
print(f"  c_split = {c_split:.4f}; {split['violations']} violations in 20000 draws, worst ratio {split['worst_ratio']:.3f}")

mm = cert.min_mu_on_unit_psi(SAMPLES, STARTS, SEED)
for row in mm.extras["per_radius"]:
    print(f"  inf |mu| over |Psi| = 1, |xi| <= {row['radius']:<4g}: {row['estimate']:.6f}")

quad = cert.certify_quadratic_estimate(cert.DELTA_MU, SAMPLES, STARTS, SEED)
print(f"\nquadratic estimate constant: {quad.estimate:.4f}")

fail = cert.su3_failure_search(SAMPLES, STARTS, SEED, c_su2=crit.estimate)
print(f"su(3): criterion ratio reaches {fail.estimate:.1f}, against 10 c = {10 * crit.estimate:.1f}")
