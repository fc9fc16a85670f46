import json
from dataclasses import replace
from unittest.mock import patch

import pytest

from qsearch.algorithms import run_bv
from qsearch.config import load_claims
from qsearch.errors import UsageError
from qsearch.entanglement import analyze_trajectory
from qsearch.experiment import ExperimentConfig, ExperimentPipeline, Tolerances, run_experiment


def verdicts(result):
    return {claim.claim_id: claim.verdict for claim in result.claims}


def test_config_defaults():
    config = ExperimentConfig(algorithm="bv", n=3)
    assert config.answer == "random"
    assert config.tolerances.purity == 1e-10
    assert config.detuning_exponent == 3.0
    assert list(config.widths) == [3]


@pytest.mark.parametrize("settings", [
    {"algorithm": "bv", "n": 0},
    {"algorithm": "bv", "n": 4, "n_max": 3},
    {"algorithm": "bv", "n": 2, "n_max": 13, "answer": "exhaustive"},
    {"algorithm": "bv", "n": 2, "answer": "fixed"},
    {"algorithm": "bv", "n": 2, "answer": "fixed", "answer_value": 4},
    {"algorithm": "bv", "n": 2, "iterations": 3},
    {"algorithm": "teleport", "n": 2},
    {"algorithm": "bv", "n": 2, "detuning_exponent": 0},
])
def test_invalid_configs(settings):
    with pytest.raises(ValueError):
        ExperimentConfig(**settings)


def test_exhaustive_limit_names_the_cap():
    with pytest.raises(ValueError) as info:
        ExperimentConfig(algorithm="bv", n=13, answer="exhaustive")
    assert "12" in str(info.value)


@pytest.mark.parametrize("suffix", [".json", ".yaml"])
def test_config_file_round_trip(tmp_path, suffix):
    config = ExperimentConfig(algorithm="grover", n=2, n_max=5, seed=42, iterations=2,
                              format="csv", out=tmp_path / "report.csv", claims_only=True)
    path = tmp_path / f"config{suffix}"
    config.to_file(path)
    assert ExperimentConfig.from_file(path) == config


def test_read_file_rejects_non_mapping(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps([1, 2]))
    with pytest.raises(UsageError):
        ExperimentConfig.read_file(path)


def test_bv_exhaustive_sweep_passes_every_claim():
    result = run_experiment(ExperimentConfig(algorithm="bv", n=1, n_max=8, answer="exhaustive"))
    assert verdicts(result) == {
        "bv.single_query": "pass",
        "bv.probability_one": "pass",
        "bv.no_entanglement": "pass",
        "bv.local_unitary_invariance": "pass",
        "bv.orthogonal_outputs": "pass",
    }
    assert result.all_pass
    probability = next(c for c in result.claims if c.claim_id == "bv.probability_one")
    assert probability.runs == sum(1 << n for n in range(1, 9))
    orthogonal = next(c for c in result.claims if c.claim_id == "bv.orthogonal_outputs")
    assert orthogonal.runs == 8
    assert orthogonal.measured < 1e-12
    assert "bv n=3 a=5" in result.series
    assert result.ledgers["bv n=3 a=5"]["quantum_queries"] == 1


def test_grover_random_sweep_matches_analytic_curve():
    config = ExperimentConfig(algorithm="grover", n=2, n_max=6, trials=3, seed=11)
    result = run_experiment(config)
    assert result.all_pass, [c for c in result.claims if c.verdict == "fail"]
    analytic = next(c for c in result.claims if c.claim_id == "grover.analytic_agreement")
    assert analytic.measured < 1e-9
    assert {p["n"] for p in result.points} == {2, 3, 4, 5, 6}


def test_grover_n1_reports_product_everywhere():
    result = run_experiment(ExperimentConfig(algorithm="grover", n=1, answer="exhaustive"))
    assert verdicts(result)["grover.entanglement_onset"] == "pass"
    # N = 2 is outside the near-orthogonality claim
    assert "grover.near_orthogonal" not in verdicts(result)


def test_grover_near_orthogonal_at_n4():
    result = run_experiment(ExperimentConfig(algorithm="grover", n=4, answer="exhaustive"))
    overlap = next(c for c in result.claims if c.claim_id == "grover.near_orthogonal")
    assert overlap.verdict == "pass"
    assert overlap.measured < 0.2


def test_grover_iteration_override_is_honored():
    result = run_experiment(ExperimentConfig(algorithm="grover", n=4, answer="fixed",
                                             answer_value=3, iterations=1))
    assert verdicts(result)["grover.iteration_count"] == "pass"
    assert result.points[0]["iterations"] == 1
    assert result.ledgers["grover n=4 a=3"]["quantum_queries"] == 1


def test_classical_baselines():
    naive = run_experiment(ExperimentConfig(algorithm="classical-naive", n=1, n_max=6))
    assert verdicts(naive) == {"classical.naive_queries": "pass"}
    assert [p["classical_queries"] for p in naive.points] == [(1 << n) - 1 for n in range(1, 7)]

    sophisticated = run_experiment(ExperimentConfig(
        algorithm="classical-sophisticated", n=1, n_max=6, answer="exhaustive"))
    assert verdicts(sophisticated) == {"classical.sophisticated_queries": "pass"}


@pytest.mark.parametrize("algorithm", ["qudit-bv", "qudit-grover"])
def test_qudit_sweeps(algorithm):
    result = run_experiment(ExperimentConfig(algorithm=algorithm, n=1, n_max=6, trials=2))
    assert verdicts(result) == {
        "qudit.distribution_equivalence": "pass",
        "qudit.not_applicable": "pass",
        "precision.exponential": "pass",
        "precision.specification_gap": "pass",
    }
    assert [row["n"] for row in result.precision] == list(range(1, 7))
    assert all(p["entanglement"] == "not applicable" for p in result.points)


def test_failing_claim_is_reported():
    # a registry that expects two queries per run
    registry = load_claims()
    registry["bv.single_query"] = {**registry["bv.single_query"], "bound": 2}
    result = ExperimentPipeline(ExperimentConfig(algorithm="bv", n=2), claims=registry).run()
    assert verdicts(result)["bv.single_query"] == "fail"
    assert not result.all_pass


def test_runs_are_deterministic():
    config = ExperimentConfig(algorithm="grover", n=2, n_max=4, trials=2, seed=5)
    first, second = run_experiment(config), run_experiment(config)
    assert first.points == second.points
    assert [c.measured for c in first.claims] == [c.measured for c in second.claims]


def test_claims_only_skips_series():
    result = run_experiment(ExperimentConfig(algorithm="bv", n=2, claims_only=True))
    assert result.series == {}
    assert result.claims


def test_every_claim_has_anchor_from_registry():
    registry = load_claims()
    result = run_experiment(ExperimentConfig(algorithm="bv", n=2, answer="exhaustive"))
    for claim in result.claims:
        assert claim.anchor == registry[claim.claim_id]["anchor"]


def test_configured_tolerances_reach_the_witnesses():
    tolerances = Tolerances(purity=1e-9, entropy_bits=1e-7, eigen=1e-9)
    config = ExperimentConfig(algorithm="bv", n=2, tolerances=tolerances)
    with patch("qsearch.experiment.analyze_trajectory", wraps=analyze_trajectory) as analyze:
        result = run_experiment(config)
    assert result.all_pass
    assert analyze.call_args.kwargs == {"tol": 1e-9, "entropy_tol": 1e-7, "eigen_tol": 1e-9}


def test_norm_tolerance_guards_probability_claims():
    def leaky_bv(n, oracle):
        result = run_bv(n, oracle)
        distribution = result.distribution.copy()
        distribution[(oracle._reveal_answer() + 1) % distribution.size] += 1e-6
        return replace(result, distribution=distribution)

    for norm, verdict in ((1e-12, "fail"), (1e-3, "pass")):
        config = ExperimentConfig(algorithm="bv", n=3, tolerances=Tolerances(norm=norm))
        with patch("qsearch.experiment.run_bv", side_effect=leaky_bv):
            assert verdicts(run_experiment(config))["bv.probability_one"] == verdict


def test_precision_sweep_past_float_range_still_passes():
    result = run_experiment(ExperimentConfig(algorithm="qudit-bv", n=10, n_max=11,
                                             detuning_exponent=100.0))
    assert result.all_pass
    assert result.precision[-1]["resolution_bits"] == 1100.0


def test_success_probability_comes_from_the_sealed_answer():
    result = run_experiment(ExperimentConfig(algorithm="bv", n=3, answer="fixed", answer_value=6))
    assert result.points[0]["success_probability"] == pytest.approx(1.0, abs=1e-12)
    assert result.points[0]["top_guess"] == 6
