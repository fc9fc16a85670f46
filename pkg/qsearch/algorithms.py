import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from qsearch.errors import DomainError
from qsearch.linalg_core import (
    PAULI_X,
    PureState,
    apply_hadamard_layer,
    apply_one_qubit_gate,
    make_basis_state,
    measurement_distribution,
)
from qsearch.oracles import (
    NaiveOracle,
    Oracle,
    QueryLedger,
    SophisticatedOracle,
    zero_reflection_apply,
)


@dataclass(frozen=True)
class Snapshot:
    label: str
    state: PureState


@dataclass
class Trajectory:
    """Labeled states captured after each circuit layer, in execution order."""
    snapshots: List[Snapshot] = field(default_factory=list)

    def record(self, label: str, state: PureState) -> None:
        if label in self.labels:
            raise DomainError(f"Duplicate snapshot label: {label}")
        self.snapshots.append(Snapshot(label, state))

    @property
    def labels(self) -> List[str]:
        return [snapshot.label for snapshot in self.snapshots]

    def __getitem__(self, label: str) -> PureState:
        for snapshot in self.snapshots:
            if snapshot.label == label:
                return snapshot.state
        raise KeyError(label)

    def __iter__(self):
        return iter(self.snapshots)

    def __len__(self):
        return len(self.snapshots)

    @property
    def final(self) -> PureState:
        return self.snapshots[-1].state


@dataclass
class SearchResult:
    distribution: np.ndarray
    top_guess: int
    ledger: QueryLedger
    trajectory: Trajectory
    # Global phase picked up by the diffusion convention, (-1)^k for Grover
    global_phase: complex = 1.0

    def probability_of(self, guess: int) -> float:
        """Weight the output distribution puts on `guess`."""
        if not 0 <= guess < self.distribution.size:
            raise DomainError(f"Guess {guess} out of range for N={self.distribution.size}")
        return float(self.distribution[guess])


def default_grover_iterations(n: int) -> int:
    """floor(pi/4 sqrt(N)) with N = 2^n."""
    return math.floor(math.pi / 4 * math.sqrt(1 << n))


class CircuitRun:
    """Drives a register of n guess qubits plus one ancilla through a search circuit.

    Each step returns the run itself so circuits read as a chain:
    CircuitRun(n).prepare().query(oracle, "psi2").hadamard_guess("psi3")
    """

    def __init__(self, n: int):
        if n < 1:
            raise DomainError(f"Guess width n must be positive, got {n}")
        self.n = n
        self.guess = range(n)
        self.ancilla = n
        self.state = make_basis_state(n + 1, 0)
        self.trajectory = Trajectory()
        self.reflections = 0
        self.trajectory.record("psi0", self.state)

    def prepare(self) -> 'CircuitRun':
        """X then H on the ancilla, H on every guess qubit: psi0 -> psi1."""
        self.state = apply_one_qubit_gate(self.state, PAULI_X, self.ancilla)
        self.state = apply_hadamard_layer(self.state, [self.ancilla])
        self.state = apply_hadamard_layer(self.state, self.guess)
        self.trajectory.record("psi1", self.state)
        return self

    def query(self, oracle: Oracle, label: str) -> 'CircuitRun':
        self.state = oracle.quantum_apply(self.state)
        self.trajectory.record(label, self.state)
        return self

    def diffuse(self, label: str) -> 'CircuitRun':
        """H^n, the f_0-controlled-NOT, H^n on the guess register."""
        self.state = apply_hadamard_layer(self.state, self.guess)
        self.state = zero_reflection_apply(self.state)
        self.reflections += 1
        self.state = apply_hadamard_layer(self.state, self.guess)
        self.trajectory.record(label, self.state)
        return self

    def hadamard_guess(self, label: str) -> 'CircuitRun':
        self.state = apply_hadamard_layer(self.state, self.guess)
        self.trajectory.record(label, self.state)
        return self

    def finish(self, oracle: Oracle, global_phase: complex = 1.0) -> SearchResult:
        """Measure the top n qubits."""
        distribution = measurement_distribution(self.state, list(self.guess))
        ledger = oracle.ledger().model_copy(update={"reflection_applications": self.reflections})
        return SearchResult(
            distribution=distribution,
            top_guess=int(np.argmax(distribution)),
            ledger=ledger,
            trajectory=self.trajectory,
            global_phase=global_phase,
        )


def _check_width(n: int, oracle: Oracle) -> None:
    if oracle.n != n:
        raise DomainError(f"Oracle width {oracle.n} does not match n={n}")


def run_grover(n: int, oracle: NaiveOracle, iterations: Optional[int] = None) -> SearchResult:
    """Grover search: prepare, then `iterations` rounds of query and diffusion."""
    _check_width(n, oracle)
    if iterations is None:
        iterations = default_grover_iterations(n)
    if iterations < 0:
        raise DomainError(f"iterations must be nonnegative, got {iterations}")
    logging.debug(f"Grover: n={n}, iterations={iterations}")

    run = CircuitRun(n).prepare()
    for k in range(1, iterations + 1):
        run.query(oracle, f"iter {k}: post-oracle").diffuse(f"iter {k}: post-diffusion")
    # each diffusion is I - 2|s><s|, the negative of the textbook operator
    return run.finish(oracle, global_phase=(-1) ** iterations)


def run_bv(n: int, oracle: SophisticatedOracle) -> SearchResult:
    """Bernstein-Vazirani: one query between two Hadamard layers."""
    _check_width(n, oracle)
    logging.debug(f"Bernstein-Vazirani: n={n}")
    return (CircuitRun(n)
            .prepare()
            .query(oracle, "psi2")
            .hadamard_guess("psi3")
            .finish(oracle))


def grover_analytic_success(N: int, k: int) -> float:
    """sin^2((2k+1) arcsin(1/sqrt N)): the closed form used to cross-check run_grover."""
    if N < 2:
        raise DomainError(f"N must be at least 2, got {N}")
    if k < 0:
        raise DomainError(f"k must be nonnegative, got {k}")
    theta = math.asin(1 / math.sqrt(N))
    return math.sin((2 * k + 1) * theta) ** 2


def classical_naive_search(oracle: NaiveOracle) -> Tuple[int, int]:
    """Query records 0, 1, 2, ...; after N-1 misses the last record must be the answer."""
    for x in range(oracle.size - 1):
        if oracle.classical_query(x, 0) == 1:
            return x, oracle.ledger().classical_queries
    return oracle.size - 1, oracle.ledger().classical_queries


def classical_sophisticated_search(oracle: SophisticatedOracle) -> Tuple[int, int]:
    """Query each unit string e_i; the response is bit i of the answer."""
    answer = 0
    for i in range(oracle.n):
        # e_i has qubit i set, i.e. bit n-1-i of the integer
        bit_position = oracle.n - 1 - i
        if oracle.classical_query(1 << bit_position, 0):
            answer |= 1 << bit_position
    return answer, oracle.ledger().classical_queries
