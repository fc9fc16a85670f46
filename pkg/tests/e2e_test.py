import json
import os
import subprocess
import sys
from pathlib import Path
from unittest.mock import patch

import pytest
import yaml

from qsearch import qsearch_run
from qsearch.errors import WitnessDisagreementError

PROJECT_ROOT = Path(__file__).parent.parent


@pytest.fixture
def isolated_home(tmp_path):
    """No user defaults file and no QSEARCH_* variables."""
    home = tmp_path / "home"
    home.mkdir()
    env = {k: v for k, v in os.environ.items() if not k.startswith("QSEARCH_")}
    env["HOME"] = str(home)
    with patch.dict(os.environ, env, clear=True):
        yield env


def run_cli(args, env):
    command = [sys.executable, "-m", "qsearch.qsearch_run", *args]
    print(f"Command: {' '.join(command)}")
    return subprocess.run(command, capture_output=True, text=True, cwd=PROJECT_ROOT, env=env)


def test_end_to_end_bv_json(isolated_home, tmp_path):
    out = tmp_path / "bv.json"
    result = run_cli(["--algorithm", "bv", "--n", "1", "--n-max", "4", "--answer", "exhaustive",
                      "--out", str(out)], isolated_home)
    print(result.stderr)
    assert result.returncode == 0
    document = json.loads(out.read_text())
    assert document["meta"]["config"]["n_max"] == 4
    assert {claim["verdict"] for claim in document["claims"]} == {"pass"}
    assert "bv n=4 a=15" in document["ledgers"]


def test_end_to_end_csv_to_stdout(isolated_home):
    result = run_cli(["--algorithm", "classical-naive", "--n", "3", "--format", "csv"], isolated_home)
    assert result.returncode == 0
    assert result.stdout.splitlines()[0] == "claim_id,anchor,measured,expected,verdict,runtime_ms"


def test_end_to_end_usage_error(isolated_home):
    result = run_cli(["--algorithm", "bv", "--n", "13", "--answer", "exhaustive"], isolated_home)
    assert result.returncode == 2
    assert "12" in result.stderr


def test_end_to_end_is_deterministic(isolated_home):
    args = ["--algorithm", "grover", "--n", "2", "--n-max", "4", "--trials", "2", "--seed", "3"]
    first, second = run_cli(args, isolated_home), run_cli(args, isolated_home)
    assert first.returncode == second.returncode == 0
    strip = lambda doc: [{k: v for k, v in c.items() if k != "runtime_ms"} for c in doc["claims"]]
    first_doc, second_doc = json.loads(first.stdout), json.loads(second.stdout)
    assert strip(first_doc) == strip(second_doc)
    assert first_doc["points"] == second_doc["points"]


def test_flags_override_config_file(isolated_home, tmp_path):
    config_path = tmp_path / "experiment.yaml"
    config_path.write_text(yaml.safe_dump({"algorithm": "bv", "n": 2, "seed": 4,
                                           "tolerances": {"purity": 1e-9}}))
    out = tmp_path / "report.json"
    code = qsearch_run.main(["--config", str(config_path), "--n", "3", "--claims-only",
                             "--out", str(out)])
    assert code == 0
    meta = json.loads(out.read_text())["meta"]
    assert meta["config"]["n"] == 3
    assert meta["seed"] == 4
    assert meta["config"]["tolerances"]["purity"] == 1e-9
    assert meta["config"]["claims_only"] is True


def test_user_defaults_apply_below_flags(isolated_home, tmp_path):
    out = tmp_path / "report.json"
    with patch.dict(os.environ, {"QSEARCH_SEED": "21", "QSEARCH_DETUNING_EXPONENT": "2.0"}):
        code = qsearch_run.main(["--algorithm", "qudit-bv", "--n", "2", "--out", str(out)])
    assert code == 0
    document = json.loads(out.read_text())
    assert document["meta"]["seed"] == 21
    assert document["precision"][0]["detuning_exponent"] == 2.0


def test_missing_algorithm_is_a_usage_error(isolated_home):
    assert qsearch_run.main(["--n", "2"]) == 2


def test_failing_claim_exits_one(isolated_home, tmp_path):
    original = qsearch_run.run_experiment

    def failing(config):
        result = original(config)
        result.claims[0] = result.claims[0].model_copy(update={"verdict": "fail"})
        return result

    with patch("qsearch.qsearch_run.run_experiment", side_effect=failing):
        code = qsearch_run.main(["--algorithm", "bv", "--n", "2", "--out", str(tmp_path / "r.json")])
    assert code == 1


def test_witness_disagreement_exits_three(isolated_home):
    with patch("qsearch.qsearch_run.run_experiment",
               side_effect=WitnessDisagreementError("purity and rank disagree")):
        assert qsearch_run.main(["--algorithm", "bv", "--n", "2"]) == 3


def test_unwritable_output_exits_two(isolated_home, tmp_path):
    out = tmp_path / "missing" / "report.json"
    assert qsearch_run.main(["--algorithm", "bv", "--n", "2", "--out", str(out)]) == 2


def test_precision_past_float_range_is_reported_as_null(isolated_home, tmp_path):
    out = tmp_path / "report.json"
    code = qsearch_run.main(["--algorithm", "qudit-bv", "--n", "11", "--detuning-exponent", "100",
                             "--out", str(out)])
    assert code == 0
    row = json.loads(out.read_text())["precision"][0]
    assert row["resolution_bits"] == 1100.0
    assert row["required_resolution"] is None
    assert row["min_level_spacing"] == 0.0


def test_save_defaults_then_run_with_them(isolated_home, tmp_path):
    assert qsearch_run.main(["--save-defaults", "--seed", "13", "--tol-purity", "1e-9"]) == 0
    stored = json.loads(qsearch_run.get_config_file().read_text())
    assert stored == {"seed": 13, "tol_purity": 1e-9}

    assert qsearch_run.main(["--save-defaults", "--detuning-exponent", "2.5"]) == 0
    stored = json.loads(qsearch_run.get_config_file().read_text())
    assert stored == {"seed": 13, "tol_purity": 1e-9, "detuning_exponent": 2.5}

    out = tmp_path / "report.json"
    assert qsearch_run.main(["--algorithm", "bv", "--n", "2", "--out", str(out)]) == 0
    meta = json.loads(out.read_text())["meta"]
    assert meta["seed"] == 13
    assert meta["config"]["tolerances"]["purity"] == 1e-9


def test_save_defaults_rejects_bad_tolerance(isolated_home):
    assert qsearch_run.main(["--save-defaults", "--tol-purity", "2"]) == 2
    assert not qsearch_run.get_config_file().exists()
