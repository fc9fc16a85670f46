import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Literal, Optional

import numpy as np
import yaml
from pydantic import BaseModel, Field

from qsearch import __version__
from qsearch.algorithms import (
    SearchResult,
    classical_naive_search,
    classical_sophisticated_search,
    default_grover_iterations,
    grover_analytic_success,
    run_bv,
    run_grover,
)
from qsearch.config import (
    DEFAULT_DETUNING_EXPONENT,
    ENTROPY_TOL_BITS,
    EIGEN_TOL,
    EXHAUSTIVE_MAX_N,
    NORM_TOL,
    PURITY_TOL,
    load_claims,
)
from qsearch.entanglement import (
    EntanglementReport,
    analyze_state,
    analyze_trajectory,
    local_unitary_invariance_check,
)
from qsearch.errors import UsageError
from qsearch.linalg_core import (
    HADAMARD,
    IDENTITY,
    PureState,
    apply_local_gates,
    random_local_gate,
)
from qsearch.oracles import AdversarialNaiveOracle, NaiveOracle, SophisticatedOracle
from qsearch.qudit import EntanglementStatus, precision_cost, run_on_qudit

ALGORITHMS = (
    "grover",
    "bv",
    "classical-naive",
    "classical-sophisticated",
    "qudit-grover",
    "qudit-bv",
)


class Tolerances(BaseModel):
    purity: float = Field(PURITY_TOL, gt=0, lt=1)
    norm: float = Field(NORM_TOL, gt=0)
    entropy_bits: float = Field(ENTROPY_TOL_BITS, gt=0)
    eigen: float = Field(EIGEN_TOL, gt=0)


class ExperimentConfig(BaseModel):
    algorithm: Literal[
        "grover", "bv", "classical-naive", "classical-sophisticated", "qudit-grover", "qudit-bv"
    ]
    n: int = Field(ge=1)
    n_max: Optional[int] = None
    answer: Literal["random", "fixed", "exhaustive"] = "random"
    answer_value: Optional[int] = None
    seed: int = 0
    trials: int = Field(1, ge=1)
    iterations: Optional[int] = Field(None, ge=0)
    tolerances: Tolerances = Field(default_factory=Tolerances)
    detuning_exponent: float = Field(DEFAULT_DETUNING_EXPONENT, gt=0)
    format: Literal["json", "csv", "text"] = "json"
    out: Optional[Path] = None
    claims_only: bool = False

    def model_post_init(self, __context):
        if self.n_max is not None and self.n_max < self.n:
            raise UsageError(f"n_max={self.n_max} is smaller than n={self.n}")
        if self.answer == "exhaustive" and self.last_n > EXHAUSTIVE_MAX_N:
            raise UsageError(
                f"Exhaustive answers need n <= {EXHAUSTIVE_MAX_N}, sweep reaches n={self.last_n}"
            )
        if self.answer == "fixed":
            if self.answer_value is None:
                raise UsageError("answer 'fixed' needs answer_value")
            if not 0 <= self.answer_value < (1 << self.n):
                raise UsageError(f"answer_value {self.answer_value} out of range for n={self.n}")
        if self.iterations is not None and self.algorithm not in ("grover", "qudit-grover"):
            raise UsageError("iterations only applies to Grover runs")

    @property
    def last_n(self) -> int:
        return self.n if self.n_max is None else self.n_max

    @property
    def widths(self) -> range:
        return range(self.n, self.last_n + 1)

    def to_file(self, path: Path) -> None:
        path = Path(path)
        data = self.model_dump(mode="json")
        with open(path, "w", encoding="utf-8") as f:
            if path.suffix in (".yaml", ".yml"):
                yaml.safe_dump(data, f, sort_keys=False)
            else:
                json.dump(data, f, indent=2)

    @classmethod
    def read_file(cls, path: Path) -> dict:
        """Raw settings from a JSON or YAML config file."""
        path = Path(path)
        with open(path, encoding="utf-8") as f:
            if path.suffix in (".yaml", ".yml"):
                data = yaml.safe_load(f) or {}
            else:
                data = json.load(f)
        if not isinstance(data, dict):
            raise UsageError(f"Config file {path} must contain a mapping")
        return data

    @classmethod
    def from_file(cls, path: Path) -> "ExperimentConfig":
        return cls.model_validate(cls.read_file(path))


class ClaimReport(BaseModel):
    claim_id: str
    anchor: str
    measured: Optional[float]
    expected: str
    bound: float
    verdict: Literal["pass", "fail"]
    runtime_ms: float
    runs: int
    detail: str = ""


@dataclass
class _ClaimTally:
    """Running worst case of one claim over the sweep."""
    claim_id: str
    worst: str  # "max" or "min"
    measured: Optional[float] = None
    passed: bool = True
    runs: int = 0
    runtime: float = 0.0
    failures: List[str] = field(default_factory=list)

    def observe(self, value: Optional[float], passed: bool, where: str) -> None:
        self.runs += 1
        if value is not None:
            value = float(value)
            if self.measured is None:
                self.measured = value
            elif self.worst == "max":
                self.measured = max(self.measured, value)
            else:
                self.measured = min(self.measured, value)
        if not passed:
            self.passed = False
            self.failures.append(where)
            logging.warning(f"Claim {self.claim_id} failed at {where} (measured {value!r})")


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    claims: List[ClaimReport]
    series: Dict[str, dict] = field(default_factory=dict)
    ledgers: Dict[str, dict] = field(default_factory=dict)
    points: List[dict] = field(default_factory=list)
    precision: List[dict] = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return all(claim.verdict == "pass" for claim in self.claims)

    @property
    def version(self) -> str:
        return __version__


def answer_probability(result, oracle) -> float:
    """Weight a finished run puts on the oracle's sealed answer. Harness only."""
    return result.probability_of(oracle._reveal_answer())


def final_state_overlaps(states: List[PureState]) -> float:
    """Largest |<psi_i|psi_j>| over i != j."""
    if len(states) < 2:
        return 0.0
    matrix = np.stack([state.amplitudes for state in states])
    gram = np.abs(matrix.conj() @ matrix.T)
    np.fill_diagonal(gram, 0.0)
    return float(gram.max())


class ExperimentPipeline:
    """Runs every sweep point of a config and folds the checks into claim reports."""

    def __init__(self, config: ExperimentConfig, claims: Optional[dict] = None):
        self.config = config
        self.registry = claims if claims is not None else load_claims()
        self.rng = np.random.default_rng(config.seed)
        self.tallies: Dict[str, _ClaimTally] = {}
        self.series: Dict[str, dict] = {}
        self.ledgers: Dict[str, dict] = {}
        self.points: List[dict] = []
        self.precision: List[dict] = []
        self._final_states: Dict[int, Dict[int, PureState]] = {}
        tolerances = config.tolerances
        self.witness = {
            "tol": tolerances.purity,
            "entropy_tol": tolerances.entropy_bits,
            "eigen_tol": tolerances.eigen,
        }

    def bound(self, claim_id: str) -> float:
        return float(self.registry[claim_id]["bound"])

    def tally(self, claim_id: str, worst: str = "max") -> _ClaimTally:
        if claim_id not in self.tallies:
            if claim_id not in self.registry:
                raise UsageError(f"Claim {claim_id} is missing from the claims registry")
            self.tallies[claim_id] = _ClaimTally(claim_id, worst)
        return self.tallies[claim_id]

    def answers(self, n: int) -> List[int]:
        """Answers for width n under the configured policy; random draws share one seeded stream."""
        if self.config.answer == "exhaustive":
            return list(range(1 << n))
        if self.config.answer == "fixed":
            if self.config.answer_value >= (1 << n):
                raise UsageError(f"answer_value {self.config.answer_value} out of range for n={n}")
            return [self.config.answer_value]
        return [int(a) for a in self.rng.integers(0, 1 << n, size=self.config.trials)]

    def run(self) -> ExperimentResult:
        algorithm = self.config.algorithm
        logging.info(f"Running {algorithm} for n in {list(self.config.widths)} "
                     f"({self.config.answer} answers, seed={self.config.seed})")
        point = {
            "grover": self._grover_point,
            "bv": self._bv_point,
            "classical-sophisticated": self._classical_sophisticated_point,
            "qudit-grover": self._qudit_point,
            "qudit-bv": self._qudit_point,
        }.get(algorithm)
        for n in self.config.widths:
            if algorithm == "classical-naive":
                self._timed(self._classical_naive_point, n)
                continue
            if algorithm.startswith("qudit"):
                self._timed(self._precision_point, n)
            for a in self.answers(n):
                self._timed(point, n, a)
            self._timed(self._finish_width, n)
        if algorithm.startswith("qudit"):
            self._check_precision_monotonic()
        return ExperimentResult(
            config=self.config,
            claims=self._claim_reports(),
            series=self.series,
            ledgers=self.ledgers,
            points=self.points,
            precision=self.precision,
        )

    def _timed(self, step, *args) -> None:
        touched_before = {key: tally.runs for key, tally in self.tallies.items()}
        start = time.perf_counter()
        step(*args)
        elapsed = time.perf_counter() - start
        for key, tally in self.tallies.items():
            if tally.runs != touched_before.get(key, 0):
                tally.runtime += elapsed

    def _record_run(self, key: str, result: SearchResult, report: Optional[EntanglementReport]):
        self.ledgers[key] = result.ledger.model_dump()
        if report is not None and not self.config.claims_only:
            series = report.series()
            ancilla = f"q{result.trajectory.final.num_qubits - 1}"
            for entry in report.ancilla_series:
                series[entry.label][ancilla]["minus_fidelity"] = entry.minus_fidelity
            self.series[key] = series

    # Sweep points

    def _grover_point(self, n: int, a: int) -> None:
        N = 1 << n
        oracle = NaiveOracle(n, a)
        expected_k = self.config.iterations
        if expected_k is None:
            expected_k = default_grover_iterations(n)
        result = run_grover(n, oracle, self.config.iterations)
        report = analyze_trajectory(result.trajectory, **self.witness)
        key = f"grover n={n} a={a}"
        self._record_run(key, result, report)

        queries = result.ledger.quantum_queries
        self.tally("grover.iteration_count").observe(
            abs(queries - expected_k), queries == expected_k, key)

        success = answer_probability(result, oracle)
        analytic = grover_analytic_success(N, expected_k)
        deviation = abs(success - analytic)
        normalized = self._normalized(result.distribution)
        self.tally("grover.analytic_agreement").observe(
            deviation, deviation < self.bound("grover.analytic_agreement") and normalized, key)

        initial = min(report["psi0"].min_purity, report["psi1"].min_purity)
        self.tally("grover.initial_product", "min").observe(
            initial, initial >= 1 - self.bound("grover.initial_product"), key)

        later = [s for s in report.snapshots if s.label not in ("psi0", "psi1")]
        onset = self.tally("grover.entanglement_onset")
        if n == 1:
            onset.observe(None, all(s.fully_product for s in report.snapshots), key)
        elif later:
            lowest = min(s.min_purity for s in later)
            onset.observe(lowest, lowest < 1 - self.bound("grover.entanglement_onset"), key)

        ancilla = [entry.verdict.purity for entry in report.ancilla_series[1:]]
        lowest_ancilla = min(ancilla)
        self.tally("grover.ancilla_unentangled", "min").observe(
            lowest_ancilla, lowest_ancilla >= 1 - self.bound("grover.ancilla_unentangled"), key)

        self._final_states.setdefault(n, {})[a] = result.trajectory.final
        self.points.append({
            "algorithm": "grover", "n": n, "answer": a, "iterations": expected_k,
            "success_probability": success, "analytic": analytic,
            "top_guess": result.top_guess, "quantum_queries": queries,
        })

    def _bv_point(self, n: int, a: int) -> None:
        oracle = SophisticatedOracle(n, a)
        result = run_bv(n, oracle)
        report = analyze_trajectory(result.trajectory, **self.witness)
        key = f"bv n={n} a={a}"
        self._record_run(key, result, report)

        queries = result.ledger.quantum_queries
        self.tally("bv.single_query").observe(
            queries, queries == self.bound("bv.single_query"), key)

        success = answer_probability(result, oracle)
        miss = abs(1.0 - success)
        found = result.top_guess == a and self._normalized(result.distribution)
        self.tally("bv.probability_one").observe(
            miss, miss <= self.bound("bv.probability_one") and found, key)

        lowest = min(s.min_purity for s in report.snapshots)
        self.tally("bv.no_entanglement", "min").observe(
            lowest, lowest >= 1 - self.bound("bv.no_entanglement"), key)

        # psi3 is psi2 under local gates: H on the guess qubits, identity on the ancilla
        psi2 = result.trajectory["psi2"]
        final_layer = [HADAMARD] * n + [IDENTITY]
        via_layer = analyze_state(apply_local_gates(psi2, final_layer), **self.witness)
        change = max(abs(p.purity - q.purity) for p, q in zip(via_layer, report["psi3"].cuts))
        random_gates = [random_local_gate(self.rng) for _ in range(n + 1)]
        invariant = local_unitary_invariance_check(psi2, random_gates, **self.witness)
        invariant = invariant and local_unitary_invariance_check(psi2, final_layer, **self.witness)
        self.tally("bv.local_unitary_invariance").observe(
            change, invariant and change <= self.bound("bv.local_unitary_invariance"), key)

        self._final_states.setdefault(n, {})[a] = result.trajectory.final
        self.points.append({
            "algorithm": "bv", "n": n, "answer": a, "success_probability": success,
            "top_guess": result.top_guess, "quantum_queries": queries,
        })

    def _classical_naive_point(self, n: int) -> None:
        oracle = AdversarialNaiveOracle(n)
        answer, queries = classical_naive_search(oracle)
        N = 1 << n
        key = f"classical-naive n={n}"
        self.ledgers[key] = oracle.ledger().model_dump()
        correct = answer == oracle._reveal_answer()
        gap = abs(queries - (N - 1))
        self.tally("classical.naive_queries").observe(
            gap, gap <= self.bound("classical.naive_queries") and correct, key)
        self.points.append({
            "algorithm": "classical-naive", "n": n, "answer": answer,
            "classical_queries": queries, "correct": correct,
        })

    def _classical_sophisticated_point(self, n: int, a: int) -> None:
        oracle = SophisticatedOracle(n, a)
        answer, queries = classical_sophisticated_search(oracle)
        key = f"classical-sophisticated n={n} a={a}"
        self.ledgers[key] = oracle.ledger().model_dump()
        gap = abs(queries - n)
        self.tally("classical.sophisticated_queries").observe(
            gap, gap <= self.bound("classical.sophisticated_queries") and answer == a, key)
        self.points.append({
            "algorithm": "classical-sophisticated", "n": n, "answer": a,
            "classical_queries": queries, "correct": answer == a,
        })

    def _qudit_point(self, n: int, a: int) -> None:
        if self.config.algorithm == "qudit-grover":
            qubit_oracle, qudit_oracle = NaiveOracle(n, a), NaiveOracle(n, a)
            qubit = run_grover(n, qubit_oracle, self.config.iterations)
            qudit = run_on_qudit("grover", n, qudit_oracle, self.config.iterations)
        else:
            qubit_oracle, qudit_oracle = SophisticatedOracle(n, a), SophisticatedOracle(n, a)
            qubit = run_bv(n, qubit_oracle)
            qudit = run_on_qudit("bv", n, qudit_oracle)
        key = f"{self.config.algorithm} n={n} a={a}"
        self.ledgers[key] = qudit.ledger.model_dump()

        gap = float(np.max(np.abs(qubit.distribution - qudit.distribution)))
        self.tally("qudit.distribution_equivalence").observe(
            gap, gap <= self.bound("qudit.distribution_equivalence"), key)
        wrong_status = int(qudit.entanglement is not EntanglementStatus.NOT_APPLICABLE)
        self.tally("qudit.not_applicable").observe(
            wrong_status, wrong_status <= self.bound("qudit.not_applicable"), key)
        self.points.append({
            "algorithm": self.config.algorithm, "n": n, "answer": a,
            "success_probability": answer_probability(qudit, qudit_oracle),
            "qubit_success_probability": answer_probability(qubit, qubit_oracle),
            "max_distribution_gap": gap, "entanglement": qudit.entanglement.value,
            "quantum_queries": qudit.ledger.quantum_queries,
        })

    def _precision_point(self, n: int) -> None:
        p = self.config.detuning_exponent
        report = precision_cost(n, p)
        self.precision.append(report.model_dump(mode="json"))
        where = f"precision n={n}"
        error = abs(report.resolution_bits - p * n)
        reciprocal = True
        if math.isfinite(report.required_resolution) and report.min_level_spacing > 0:
            product = report.required_resolution * report.min_level_spacing
            reciprocal = abs(product - 1.0) <= self.config.tolerances.norm
        self.tally("precision.exponential").observe(
            error, error <= self.bound("precision.exponential") and reciprocal, where)
        ratio = report.specification_ratio / (1 << n)
        self.tally("precision.specification_gap", "min").observe(
            ratio, ratio > self.bound("precision.specification_gap"), where)

    def _check_precision_monotonic(self) -> None:
        resolutions = [row["resolution_bits"] for row in self.precision]
        increasing = all(b > a for a, b in zip(resolutions, resolutions[1:]))
        if not increasing:
            self.tally("precision.exponential").observe(None, False, "monotonicity in n")

    def _normalized(self, distribution: np.ndarray) -> bool:
        return abs(float(distribution.sum()) - 1.0) <= self.config.tolerances.norm

    def _finish_width(self, n: int) -> None:
        states = list(self._final_states.pop(n, {}).values())
        if len(states) < 2:
            return
        overlap = final_state_overlaps(states)
        where = f"n={n}, {len(states)} answers"
        if self.config.algorithm == "bv":
            self.tally("bv.orthogonal_outputs").observe(
                overlap, overlap < self.bound("bv.orthogonal_outputs"), where)
        elif self.config.algorithm == "grover" and n >= 2 and self.config.iterations is None:
            self.tally("grover.near_orthogonal").observe(
                overlap, overlap <= self.bound("grover.near_orthogonal"), where)

    def _claim_reports(self) -> List[ClaimReport]:
        reports = []
        for claim_id, tally in self.tallies.items():
            entry = self.registry[claim_id]
            verdict = "pass" if tally.passed else "fail"
            logging.info(f"Claim {claim_id}: {verdict} (measured {tally.measured!r}, {tally.runs} runs)")
            reports.append(ClaimReport(
                claim_id=claim_id,
                anchor=entry["anchor"],
                measured=tally.measured,
                expected=entry["expected"],
                bound=float(entry["bound"]),
                verdict=verdict,
                runtime_ms=round(tally.runtime * 1000, 3),
                runs=tally.runs,
                detail="; ".join(tally.failures[:5]),
            ))
        return reports



def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """Execute the sweep described by `config`; deterministic given the config and its seed."""
    return ExperimentPipeline(config).run()
