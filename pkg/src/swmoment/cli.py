"""
Command line entry point: ``swmoment <subcommand> ...``.

Every run writes one JSON report (``--out`` or stdout). Reports are
byte-stable across invocations except for the ``timestamp`` field; output
paths are not echoed into them. Exit codes: 0 when every check passes,
1 when a check fails, 2 for usage errors (including empty constraint
sets), 3 when a multistart search does not converge (a partial report is
still written).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from datetime import datetime, timezone

import numpy as np

from . import certifier as cert
from . import frequency_lab as fl
from . import identity_suite as ids
from .representation import BUILTIN_REPS, builtin_rep, describe, rep_trivial
from .sphere_search import EmptyConstraint, NonConvergence

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NONCONVERGENCE = 0, 1, 2, 3

ESTIMATORS = ("criterion", "sigma", "min_mu", "quadratic", "su3_failure")
ADHM_ONLY = ("sigma", "min_mu", "quadratic")
COVERING_ORACLES = ("zero", "constant", "mixture", "shell")


class UsageError(Exception):
    pass


# -- JSON ---------------------------------------------------------------------


def _plain(obj):
    """Recursively convert numpy scalars/arrays and non-finite floats to JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_plain(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _emit(report: dict, out: str | None) -> None:
    text = dumps(report)
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


# -- argument parsing -----------------------------------------------------------


def _positive_int(s):
    v = int(s)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {s}")
    return v


def _nonneg_int(s):
    v = int(s)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {s}")
    return v


def _positive_float(s):
    v = float(s)
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {s}")
    return v


def _rep_id(s):
    try:
        builtin_rep(s)
    except (ValueError, IndexError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return s


def _floats(s):
    try:
        return [float(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _common(p, out_help="JSON report path (default: stdout)"):
    p.add_argument("--seed", type=_nonneg_int, required=True, help="RNG seed (mandatory)")
    p.add_argument("--out", default=None, help=out_help)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swmoment",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        description="Moment-map identities, compactness certificates and discrete frequency analysis.",
        epilog=(
            "Exit codes: 0 all checks pass, 1 a check failed, 2 usage error, 3 nonconvergence "
            "(partial report written). SWMOMENT_THREADS caps BLAS/FFT threads. "
            f"Built-in representations: {', '.join(BUILTIN_REPS)}, multispinor-N, adhm-R-K."
        ),
    )
    sub = parser.add_subparsers(dest="command", metavar="{describe,identities,certify,frequency,covering,residual}")
    sub.required = True

    p = sub.add_parser("describe", help="print a representation descriptor")
    p.add_argument("--rep", type=_rep_id, required=True)
    _common(p)

    p = sub.add_parser("identities", help="randomised algebraic identity checks")
    p.add_argument("--rep", type=_rep_id, required=True)
    p.add_argument("--samples", type=_positive_int, default=10_000)
    p.add_argument("--tol", type=_positive_float, default=ids.DEFAULT_TOLERANCE)
    _common(p)

    p = sub.add_parser(
        "certify",
        help="multistart estimate of a compactness constant",
        epilog=(
            "Estimators: criterion (any rep), su3_failure (su3-adjoint), sigma / min_mu / quadratic (adhm12). "
            "Checks: stability_ratio < 0.10 and spread < 0.25, plus estimator specific gates."
        ),
    )
    p.add_argument("--rep", type=_rep_id, required=True)
    p.add_argument("--estimator", choices=ESTIMATORS, default=None, help="default: sigma for adhm12, else criterion")
    p.add_argument("--delta-mu", type=_positive_float, default=cert.DELTA_MU)
    p.add_argument("--samples", type=_positive_int, default=2000)
    p.add_argument("--multistarts", type=_positive_int, default=8)
    p.add_argument("--radii", type=_floats, default=[0.0, 1.0, 10.0], help="xi radii for min_mu (comma-separated)")
    p.add_argument("--split-samples", type=_positive_int, default=100_000, help="fresh samples validating c_split (sigma)")
    _common(p)

    p = sub.add_parser(
        "frequency",
        help="frequency profile (m, D, N) of a field",
        epilog=f"CSV columns, in order: {', '.join(fl.PROFILE_COLUMNS)} (N empty where m = 0).",
    )
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--field", help="grid file written by save-field")
    src.add_argument("--oracle", type=int, choices=(0, 1, 2, 3), help="harmonic polynomial of this degree")
    p.add_argument("--R", type=_positive_float, default=1.0, help="ball radius (oracle)")
    p.add_argument("--h", type=_positive_float, default=None, help="grid spacing (oracle, default R/64)")
    p.add_argument("--center", type=_floats, default=[0.0, 0.0, 0.0], help="grid centre x,y,z (oracle)")
    p.add_argument("--eps", type=_positive_float, default=1.0, help="scale epsilon (oracle)")
    p.add_argument("--radii", type=_floats, default=None, help="comma-separated radii (default: 8 from R/4)")
    p.add_argument("--tol", type=_positive_float, default=0.05, help="quadrature tolerance for exponents")
    p.add_argument("--csv", default=None, help="write the profile as CSV")
    p.add_argument("--save-field", default=None, help="write the oracle field as a grid file")
    _common(p)

    p = sub.add_parser("covering", help="covering lemma check and regularity scale")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--field", help="grid file; density from --density")
    src.add_argument("--oracle", choices=COVERING_ORACLES)
    p.add_argument("--density", choices=("curvature", "energy"), default="curvature", help="density of a grid field")
    p.add_argument("--R", type=_positive_float, default=1.0)
    p.add_argument("--h", type=_positive_float, default=None, help="grid spacing (oracle, default R/16)")
    p.add_argument("--delta", type=_positive_float, default=None, help="decay threshold (default 1/(16 N_c))")
    p.add_argument("--c-F", dest="c_F", type=_positive_float, default=1.0)
    p.add_argument("--r0", type=_positive_float, default=None, help="regularity scale cap (default R/2)")
    _common(p)

    p = sub.add_parser("residual", help="equation residuals or Weitzenbock convergence")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--field", help="grid file")
    src.add_argument("--weitzenbock", action="store_true", help="mesh convergence of D^2 = nabla* nabla")
    p.add_argument("--rep", type=_rep_id, default="su2-adjoint", help="representation (weitzenbock)")
    p.add_argument("--h", type=_floats, default=[1 / 8, 1 / 16, 1 / 32, 1 / 64], help="spacings (weitzenbock)")
    p.add_argument("--tol", type=_positive_float, default=1e-8, help="residual tolerance (field)")
    p.add_argument("--min-order", type=_positive_float, default=1.9)
    _common(p)

    lines = ["subcommands and flags:"]
    for name, sp in sub.choices.items():
        flags = [a.option_strings[-1] for a in sp._actions if a.option_strings and a.dest != "help"]
        lines.append(f"  {name}: {' '.join(flags)}")
    lines.append(f"frequency CSV columns: {', '.join(fl.PROFILE_COLUMNS)}")
    parser.epilog = "\n".join(lines) + "\n\n" + parser.epilog
    return parser


# -- subcommands ------------------------------------------------------------------


def _cmd_describe(a):
    return {"descriptor": describe(builtin_rep(a.rep))}, True


def _cmd_identities(a):
    checks = ids.run_all(a.rep, a.samples, a.seed, a.tol)
    records = [c.record() for c in checks]
    return {"records": records, "all_pass": all(r["pass"] for r in records)}, all(r["pass"] for r in records)


def _certify_checks(rep: dict) -> dict:
    checks = {}
    stab = rep.get("stability_ratio")
    if stab is not None:
        checks["stability"] = stab < cert.STABILITY_GATE
    checks["spread"] = rep["spread"] < 0.25
    checks["finite"] = math.isfinite(rep["estimate"])
    return checks


def _cmd_certify(a):
    est = a.estimator or ("sigma" if a.rep == "adhm12" else "criterion")
    if est in ADHM_ONLY and a.rep != "adhm12":
        raise UsageError(f"estimator {est} requires --rep adhm12")
    if est == "su3_failure" and a.rep != "su3-adjoint":
        raise UsageError("estimator su3_failure requires --rep su3-adjoint")
    if not 0 < a.delta_mu < 1:
        raise UsageError("--delta-mu must lie in (0, 1)")
    if a.samples < a.multistarts:
        raise UsageError("--samples must be at least --multistarts")
    kw = dict(samples=a.samples, multistarts=a.multistarts, seed=a.seed)
    if est == "criterion":
        report = cert.certify_criterion(a.rep, a.delta_mu, **kw)
    elif est == "sigma":
        report = cert.estimate_sigma_adhm12(**kw)
    elif est == "min_mu":
        if any(r < 0 for r in a.radii) or not a.radii:
            raise UsageError("--radii must be non-negative")
        report = cert.min_mu_on_unit_psi(radii=tuple(a.radii), **kw)
    elif est == "quadratic":
        report = cert.certify_quadratic_estimate(a.delta_mu, **kw)
    else:
        report = cert.su3_failure_search(delta_mu=a.delta_mu, **kw)
    out = report.to_dict()
    checks = _certify_checks(out)
    if est == "sigma":
        c_split = cert.c_split_from_sigma(report.estimate)
        split = cert.split_violations(c_split, a.split_samples, a.seed + 1)
        out["c_split"] = c_split
        out["split_validation"] = split
        checks["sigma_below_one"] = report.estimate < 0.999
        checks["split_zero_violations"] = split["violations"] == 0
    elif est == "min_mu":
        for row in report.extras["per_radius"]:
            checks[f"positive_R={row['radius']!r}"] = row["estimate"] > 0
            checks[f"stability_R={row['radius']!r}"] = row["stability_ratio"] < cert.STABILITY_GATE
    elif est == "quadratic":
        checks["no_negative_denominators"] = report.extras["negative_denominators"] == 0
    elif est == "su3_failure":
        checks = {"finite": checks["finite"], "exceeds_threshold": bool(report.extras["success"])}
    out["checks"] = checks
    return out, all(checks.values())


def _oracle_field(a):
    R = a.R
    h = a.h if a.h is not None else R / 64
    if len(a.center) != 3:
        raise UsageError("--center needs three coordinates")
    dom = fl.Domain(tuple(a.center), R, h)
    return fl.LatticeField.from_function(dom, rep_trivial(1), fl.harmonic_polynomial(a.oracle, a.center), eps=a.eps)


def _cmd_frequency(a):
    if a.field is not None:
        fld, rep_id = fl.load_grid(a.field)
    else:
        fld, rep_id = _oracle_field(a), "trivial"
        if a.save_field:
            fl.save_grid(a.save_field, fld, rep_id)
    prof = fl.frequency_profile(fld, radii=a.radii)
    out = {
        "rep": rep_id,
        "domain": {"center": list(fld.domain.center), "R": fld.domain.R, "h": fld.domain.h, "dims": list(fld.domain.dims)},
        "eps": fld.eps,
        "profile": {"radius": prof.radii, "m": prof.m, "D": prof.D, "N": prof.N},
        "quadrature": prof.quadrature,
    }
    checks = {"m_positive": bool(np.all(prof.m > 0))}
    if len(prof.radii) >= 4 and np.all(prof.defined):
        mono = fl.monotonicity_report(prof, a.tol)
        out["monotonicity"] = mono
        checks["monotonicity"] = mono["all_pass"]
    if a.oracle is not None:
        err = float(np.max(np.abs(prof.N - a.oracle)))
        out["oracle"] = {"degree": a.oracle, "max_abs_error": err}
        checks["oracle_within_2pct"] = err <= 0.02 * max(a.oracle, 1)
    if a.csv:
        with open(a.csv, "w") as fh:
            fh.write(fl.profile_csv(prof))
    out["checks"] = checks
    return out, all(checks.values())


def _covering_density(a, rng):
    if a.field is not None:
        fld, rep_id = fl.load_grid(a.field)
        dom = fld.domain
        if a.density == "energy":
            f = fl._energy_density(fld)
        else:
            F = fl.curvature(fld)
            f = np.sum(F * F, axis=(-2, -1))
        return dom, f, {"field": rep_id, "density": a.density}
    h = a.h if a.h is not None else a.R / 16
    dom = fl.Domain((0.0, 0.0, 0.0), a.R, h)
    X = dom.coords()
    dist = np.linalg.norm(X, axis=-1)
    if a.oracle == "zero":
        f = np.zeros(dom.dims)
    elif a.oracle == "constant":
        f = np.full(dom.dims, 0.01)
    elif a.oracle == "mixture":
        f = np.zeros(dom.dims)
        for _ in range(int(rng.integers(1, 4))):
            c = rng.uniform(-0.6, 0.6, 3) * a.R
            w = rng.uniform(0.05, 0.3) * a.R
            f += 10 ** rng.uniform(-5, 2) * np.exp(-np.sum((X - c) ** 2, -1) / (2 * w * w))
    else:
        # thin shell at radius R/4 carrying (R/2) * int_{B_{R/2}} f = 4
        f = (np.abs(dist - a.R / 4) < 1.5 * h).astype(float)
        f *= 4 / (a.R / 2) / fl.ball_integral(dom, f, (0.0, 0.0, 0.0), a.R / 2)
    return dom, f, {"oracle": a.oracle}


def _cmd_covering(a):
    rng = np.random.default_rng(a.seed)
    dom, f, source = _covering_density(a, rng)
    verdict = fl.covering_check(dom, f, delta=a.delta)
    r0 = a.r0 if a.r0 is not None else dom.R / 2
    r_reg = fl.regularity_scale(dom, f, a.c_F, r0)
    out = {
        "source": source,
        "domain": {"center": list(dom.center), "R": dom.R, "h": dom.h},
        "verdict": verdict,
        "regularity_scale": {"c_F": a.c_F, "r0": r0, "value": r_reg},
        "checks": {"implication": verdict["implication_holds"]},
    }
    return out, verdict["implication_holds"]


def _cmd_residual(a):
    if a.weitzenbock:
        rep = builtin_rep(a.rep)
        phi0 = np.random.default_rng(a.seed).standard_normal(rep.dim_S)
        conv = fl.weitzenbock_convergence(rep, lambda x: np.sin(x[..., :1]) * phi0, 1.0, a.h)
        orders = [float(o) for o in conv["order"]]
        out = {"rep": a.rep, "weitzenbock": conv, "checks": {"order": bool(orders and min(orders) >= a.min_order)}}
        return out, out["checks"]["order"]
    fld, rep_id = fl.load_grid(a.field)
    dres, cres = fl.residual_sw(fld)
    out = {"rep": rep_id, "dirac_max": float(dres.max()), "curvature_max": float(cres.max())}
    checks = {"dirac": out["dirac_max"] <= a.tol, "curvature": out["curvature_max"] <= a.tol}
    if rep_id == "su2-adjoint" and fld.eps == 1.0:
        P = fld.phi.reshape(fld.phi.shape[:-1] + (3, 4))
        gc = fl.residual_flat_gc(fld.domain, fld.rep.alg, fld.A, np.moveaxis(P[..., 1:], -1, -2), P[..., 0])
        out["flat_gc_max"] = {k: float(v.max()) for k, v in gc.items()}
    out["checks"] = checks
    return out, all(checks.values())


COMMANDS = {
    "describe": _cmd_describe,
    "identities": _cmd_identities,
    "certify": _cmd_certify,
    "frequency": _cmd_frequency,
    "covering": _cmd_covering,
    "residual": _cmd_residual,
}

_UNECHOED = {"out", "csv", "save_field", "command"}


def _config(a) -> dict:
    return {k: v for k, v in sorted(vars(a).items()) if k not in _UNECHOED}


def _threads():
    raw = os.environ.get("SWMOMENT_THREADS")
    if raw is None:
        return None
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise UsageError(f"SWMOMENT_THREADS must be a positive integer, got {raw!r}")
    return n


def run(a) -> int:
    """Execute a parsed configuration; returns the exit code."""
    from threadpoolctl import threadpool_limits

    base = {"command": a.command, "config": _config(a)}
    try:
        n = _threads()
        with threadpool_limits(limits=n):
            body, ok = COMMANDS[a.command](a)
        code = EXIT_OK if ok else EXIT_FAIL
        report = {**base, **body, "status": "pass" if ok else "fail"}
    except (UsageError, EmptyConstraint) as exc:
        print(f"swmoment {a.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergence as exc:
        res = exc.result
        partial = None
        if res is not None:
            partial = {
                "estimate": res.estimate,
                "spread": res.spread,
                "multistart_finals": res.finals,
                "witness_coeffs": res.witness,
                "samples": res.samples,
                "multistarts": res.multistarts,
            }
        report = {**base, "status": "nonconvergence", "message": str(exc), "partial": partial}
        code = EXIT_NONCONVERGENCE
    report["exit_code"] = code
    report["timestamp"] = datetime.now(timezone.utc).isoformat()
    _emit(report, a.out)
    return code


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)  # exits 2 on unknown flags or bad values
    try:
        return run(a)
    except (OSError, ValueError) as exc:
        # malformed grid files, unreadable paths, out-of-range radii
        print(f"swmoment {a.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
