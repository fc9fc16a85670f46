import numpy as np
import pytest

from dense_reference import grover_state
from qsearch.algorithms import (
    CircuitRun,
    Trajectory,
    classical_naive_search,
    classical_sophisticated_search,
    default_grover_iterations,
    grover_analytic_success,
    run_bv,
    run_grover,
)
from qsearch.errors import DomainError
from qsearch.linalg_core import make_basis_state
from qsearch.oracles import AdversarialNaiveOracle, NaiveOracle, SophisticatedOracle


@pytest.mark.parametrize("n, expected", [(1, 1), (2, 1), (4, 3), (6, 6), (8, 12), (10, 25)])
def test_default_grover_iterations(n, expected):
    assert default_grover_iterations(n) == expected


def test_psi1_is_uniform_times_minus():
    run = CircuitRun(2).prepare()
    expected = np.kron(np.full(4, 0.5), np.array([1, -1]) / np.sqrt(2))
    assert np.allclose(run.trajectory["psi1"].amplitudes, expected, atol=1e-12)
    assert np.allclose(run.trajectory["psi0"].amplitudes, make_basis_state(3, 0).amplitudes)


@pytest.mark.parametrize("a", range(4))
def test_grover_n2_finds_answer_with_certainty(a):
    result = run_grover(2, NaiveOracle(2, a))
    assert result.probability_of(a) == pytest.approx(1.0, abs=1e-12)
    assert result.top_guess == a
    assert result.ledger.quantum_queries == 1
    assert result.ledger.reflection_applications == 1
    assert result.global_phase == -1


def test_grover_n1_is_a_coin_flip():
    result = run_grover(1, NaiveOracle(1, 1))
    assert result.probability_of(1) == pytest.approx(0.5, abs=1e-12)


def test_grover_labels():
    result = run_grover(4, NaiveOracle(4, 9))
    assert result.trajectory.labels[:3] == ["psi0", "psi1", "iter 1: post-oracle"]
    assert result.trajectory.labels[-1] == "iter 3: post-diffusion"
    assert len(result.trajectory) == 2 + 2 * 3


@pytest.mark.parametrize("n", [2, 4, 6, 8, 10])
def test_grover_matches_analytic_success_for_every_round_count(n):
    a = (1 << n) // 3
    for k in range(default_grover_iterations(n) + 1):
        result = run_grover(n, NaiveOracle(n, a), iterations=k)
        expected = grover_analytic_success(1 << n, k)
        assert abs(result.probability_of(a) - expected) < 1e-9, k
        assert result.ledger.quantum_queries == k


def test_grover_analytic_values():
    assert grover_analytic_success(4, 1) == pytest.approx(1.0, abs=1e-12)
    assert grover_analytic_success(2, 1) == pytest.approx(0.5)
    assert grover_analytic_success(16, 3) == pytest.approx(0.9613, abs=1e-4)
    assert grover_analytic_success(16, 0) == pytest.approx(1 / 16)
    with pytest.raises(DomainError):
        grover_analytic_success(1, 1)
    with pytest.raises(DomainError):
        grover_analytic_success(4, -1)


@pytest.mark.parametrize("n, a, k", [(2, 3, 1), (3, 5, 2), (4, 0, 3), (4, 7, 5)])
def test_grover_matches_dense_reference_up_to_phase(n, a, k):
    result = run_grover(n, NaiveOracle(n, a), iterations=k)
    reference = grover_state(n, a, k)
    assert np.allclose(result.trajectory.final.amplitudes, reference, atol=1e-12)
    assert result.global_phase == (-1) ** k


def test_grover_iteration_override_zero():
    result = run_grover(3, NaiveOracle(3, 2), iterations=0)
    assert result.probability_of(2) == pytest.approx(1 / 8)
    assert result.ledger.quantum_queries == 0
    with pytest.raises(DomainError):
        run_grover(3, NaiveOracle(3, 2), iterations=-1)


def test_width_mismatch():
    with pytest.raises(DomainError):
        run_grover(3, NaiveOracle(2, 0))
    with pytest.raises(DomainError):
        run_bv(3, SophisticatedOracle(2, 0))


@pytest.mark.parametrize("n", range(1, 9))
def test_bv_single_query_probability_one(n):
    for a in range(1 << n):
        result = run_bv(n, SophisticatedOracle(n, a))
        assert result.ledger.quantum_queries == 1
        assert abs(1 - result.probability_of(a)) <= 1e-12
        assert result.top_guess == a


@pytest.mark.parametrize("seed", range(50))
def test_bv_probability_one_at_larger_widths(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(9, 17))
    a = int(rng.integers(0, 1 << n))
    result = run_bv(n, SophisticatedOracle(n, a))
    assert abs(1 - result.probability_of(a)) <= 1e-12
    assert result.top_guess == a


def test_probability_of_rejects_unknown_guess():
    result = run_bv(2, SophisticatedOracle(2, 1))
    with pytest.raises(DomainError):
        result.probability_of(4)


def test_bv_psi3_is_answer_times_minus():
    result = run_bv(2, SophisticatedOracle(2, 0b10))
    expected = np.zeros(8)
    expected[2 * 0b10], expected[2 * 0b10 + 1] = 1 / np.sqrt(2), -1 / np.sqrt(2)
    assert np.allclose(result.trajectory["psi3"].amplitudes, expected, atol=1e-12)
    assert result.trajectory.labels == ["psi0", "psi1", "psi2", "psi3"]


def test_bv_psi2_phase_pattern():
    # psi2 = 1/2 sum_x (-1)^{x.a} |x> (x) |->
    result = run_bv(2, SophisticatedOracle(2, 0b11))
    guess = result.trajectory["psi2"].amplitudes.reshape(4, 2)[:, 0] * np.sqrt(2)
    assert np.allclose(guess, [0.5, -0.5, -0.5, 0.5], atol=1e-12)


def test_trajectory_rejects_duplicate_labels():
    trajectory = Trajectory()
    trajectory.record("psi0", make_basis_state(1, 0))
    with pytest.raises(DomainError):
        trajectory.record("psi0", make_basis_state(1, 1))
    with pytest.raises(KeyError):
        trajectory["psi9"]


@pytest.mark.parametrize("n", [1, 3, 6])
def test_classical_naive_search_worst_case(n):
    oracle = AdversarialNaiveOracle(n)
    answer, queries = classical_naive_search(oracle)
    assert queries == (1 << n) - 1
    assert answer == oracle._reveal_answer()


def test_classical_naive_search_stops_at_hit():
    answer, queries = classical_naive_search(NaiveOracle(3, 2))
    assert (answer, queries) == (2, 3)


@pytest.mark.parametrize("n", range(1, 7))
def test_classical_sophisticated_search_exhaustive(n):
    for a in range(1 << n):
        answer, queries = classical_sophisticated_search(SophisticatedOracle(n, a))
        assert answer == a
        assert queries == n


def test_near_orthogonality_claim_only_from_n2():
    # N = 2 success is 1/2, so the final states for a = 0 and a = 1 overlap strongly
    zero = run_grover(1, NaiveOracle(1, 0)).trajectory.final.amplitudes
    one = run_grover(1, NaiveOracle(1, 1)).trajectory.final.amplitudes
    assert abs(np.vdot(zero, one)) > 0.2
