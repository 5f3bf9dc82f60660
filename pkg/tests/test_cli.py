import json
import subprocess
import sys

import numpy as np
import pytest

from swmoment import certifier, cli
from swmoment.sphere_search import NonConvergence, SearchResult


def run(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = cli.main(argv + ["--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def strip(text):
    d = json.loads(text)
    d.pop("timestamp")
    return d


def test_missing_seed_is_usage_error(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["identities", "--rep", "su2-adjoint"])
    assert e.value.code == 2
    assert "--seed" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["identities", "--rep", "su2-adjoint", "--seed", "1", "--bogus"],
    ["identities", "--rep", "so(3)", "--seed", "1"],
    ["identities", "--rep", "classical", "--seed", "-1"],
    ["certify", "--rep", "adhm12", "--seed", "1", "--samples", "0"],
    ["frequency", "--seed", "1"],
    [],
])
def test_bad_arguments(argv):
    with pytest.raises(SystemExit) as e:
        cli.main(argv)
    assert e.value.code == 2


@pytest.mark.parametrize("argv", [
    ["certify", "--rep", "su2-adjoint", "--estimator", "sigma", "--seed", "1"],
    ["certify", "--rep", "adhm12", "--estimator", "su3_failure", "--seed", "1"],
    ["certify", "--rep", "su2-adjoint", "--delta-mu", "2", "--seed", "1"],
    ["certify", "--rep", "classical", "--seed", "1", "--samples", "200"],
    ["frequency", "--oracle", "1", "--radii", "0.01", "--seed", "0"],
])
def test_semantic_usage_errors(argv, tmp_path):
    code, report = run(argv, tmp_path)
    assert code == 2 and report is None


def test_identities_report(tmp_path):
    code, rep = run(["identities", "--rep", "su2-adjoint", "--samples", "500", "--seed", "7"], tmp_path)
    assert code == 0 and rep["status"] == "pass" and rep["exit_code"] == 0
    assert {r["name"] for r in rep["records"]} == {
        "mu_gamma_identity", "dirac_moment_compatibility", "commutator_norm", "dmu_orthogonality"}
    for r in rep["records"]:
        assert set(r) == {"name", "rep", "samples", "seed", "tolerance", "worst_residual", "pass"}
    assert "out" not in rep["config"]


def test_identities_failing_tolerance(tmp_path):
    code, rep = run(["identities", "--rep", "classical", "--samples", "50", "--seed", "7", "--tol", "1e-30"], tmp_path)
    assert code == 1 and rep["status"] == "fail"


def test_certify_sigma(tmp_path):
    code, rep = run(["certify", "--rep", "adhm12", "--seed", "1", "--samples", "600", "--multistarts", "4",
                     "--split-samples", "5000"], tmp_path)
    assert code == 0
    assert rep["estimator"] == "sigma" and rep["estimate"] < 0.999
    assert rep["split_validation"]["violations"] == 0
    assert all(rep["checks"].values())


@pytest.mark.parametrize("rep_id,est", [
    ("su2-adjoint", "criterion"), ("multispinor-2", "criterion"), ("adhm12", "min_mu"),
    ("adhm12", "quadratic"), ("su3-adjoint", "su3_failure"),
])
def test_certify_estimators(rep_id, est, tmp_path):
    code, rep = run(["certify", "--rep", rep_id, "--estimator", est, "--seed", "2", "--samples", "400",
                     "--multistarts", "4"], tmp_path)
    assert code == 0, rep["checks"]
    assert rep["estimator"] == est


def test_nonconvergence_exit_3(tmp_path, monkeypatch):
    partial = SearchResult(0.7, np.zeros(12), np.array([0.7, 0.2]), 0.71, 10, 10, 2, 5, 0.6)

    def boom(*a, **k):
        raise NonConvergence("multistart spread 0.710 exceeds 0.25", partial)

    monkeypatch.setattr(certifier, "certify_criterion", boom)
    code, rep = run(["certify", "--rep", "su2-adjoint", "--seed", "1"], tmp_path)
    assert code == 3 and rep["status"] == "nonconvergence"
    assert rep["partial"]["estimate"] == 0.7 and rep["partial"]["multistart_finals"] == [0.7, 0.2]


def test_frequency_oracle_and_files(tmp_path):
    csv, grid = tmp_path / "p.csv", tmp_path / "f.grid"
    code, rep = run(["frequency", "--oracle", "1", "--h", "0.03125", "--seed", "0", "--csv", str(csv),
                     "--save-field", str(grid)], tmp_path)
    assert code == 0 and rep["oracle"]["max_abs_error"] < 0.02
    lines = csv.read_text().splitlines()
    assert lines[0] == "radius,m,D,N" and len(lines) == 9
    code2, rep2 = run(["frequency", "--field", str(grid), "--seed", "0"], tmp_path, "b.json")
    assert code2 == 0
    assert rep2["profile"]["N"] == rep["profile"]["N"]


def test_covering_oracles(tmp_path):
    for oracle in ("zero", "constant", "shell"):
        code, rep = run(["covering", "--oracle", oracle, "--seed", "0"], tmp_path)
        assert code == 0 and rep["verdict"]["implication_holds"]
    assert rep["verdict"]["hypothesis_holds"] is False


def test_covering_too_coarse(tmp_path):
    code, rep = run(["covering", "--oracle", "shell", "--h", "0.125", "--seed", "0"], tmp_path)
    assert code == 2 and rep is None


def test_covering_from_field(tmp_path):
    grid = tmp_path / "f.grid"
    cli.main(["frequency", "--oracle", "2", "--R", "0.5", "--h", "0.03125", "--seed", "0", "--save-field", str(grid),
              "--out", str(tmp_path / "x.json")])
    code, rep = run(["covering", "--field", str(grid), "--density", "energy", "--seed", "0"], tmp_path)
    assert code == 0 and rep["source"] == {"field": "trivial", "density": "energy"}


def test_residual_modes(tmp_path):
    grid = tmp_path / "f.grid"
    cli.main(["frequency", "--oracle", "0", "--R", "0.5", "--h", "0.0625", "--seed", "0", "--save-field", str(grid),
              "--out", str(tmp_path / "x.json")])
    code, rep = run(["residual", "--field", str(grid), "--seed", "0"], tmp_path)
    assert code == 0 and rep["dirac_max"] == 0
    code, rep = run(["residual", "--weitzenbock", "--rep", "classical", "--h", "0.125,0.0625,0.03125", "--seed", "0"], tmp_path)
    assert code == 0 and min(rep["weitzenbock"]["order"]) >= 1.9


def test_missing_field_file(tmp_path):
    assert cli.main(["residual", "--field", str(tmp_path / "nope"), "--seed", "0"]) == 2


def test_describe_stdout(capsys):
    assert cli.main(["describe", "--rep", "classical", "--seed", "0"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["descriptor"]["dim_S"] == 4


def test_threads_env(tmp_path, monkeypatch):
    monkeypatch.setenv("SWMOMENT_THREADS", "zero")
    code, _ = run(["describe", "--rep", "classical", "--seed", "0"], tmp_path)
    assert code == 2
    monkeypatch.setenv("SWMOMENT_THREADS", "1")
    code, _ = run(["describe", "--rep", "classical", "--seed", "0"], tmp_path)
    assert code == 0


def test_json_sanitises_non_finite():
    text = cli.dumps({"a": float("nan"), "b": np.inf, "c": np.float64(1.5), "d": np.arange(2)})
    assert json.loads(text) == {"a": None, "b": "inf", "c": 1.5, "d": [0, 1]}


def test_help_lists_everything():
    out = subprocess.run([sys.executable, "-m", "swmoment", "--help"], capture_output=True, text=True, check=True).stdout
    for word in ("describe", "identities", "certify", "frequency", "covering", "residual", "--delta-mu",
                 "--multistarts", "--c-F", "--r0", "--weitzenbock", "radius, m, D, N"):
        assert word in out


def test_subprocess_byte_stable(tmp_path):
    cmd = [sys.executable, "-m", "swmoment", "certify", "--rep", "su2-adjoint", "--seed", "4", "--samples", "300",
           "--multistarts", "3"]
    a = subprocess.run(cmd, capture_output=True, text=True)
    b = subprocess.run(cmd, capture_output=True, text=True)
    assert a.returncode == b.returncode == 0
    assert strip(a.stdout) == strip(b.stdout)
    ta = [l for l in a.stdout.splitlines() if '"timestamp"' not in l]
    tb = [l for l in b.stdout.splitlines() if '"timestamp"' not in l]
    assert ta == tb
