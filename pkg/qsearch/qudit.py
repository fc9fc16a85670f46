"""Search on a single 2^n-level system, and what that costs.

A QuditState has levels, not qubits: nothing here accepts a qubit index, so
no entanglement question can be asked of it. Every circuit layer is applied as
one dense dim x dim transform, the way a single-particle implementation has to
realize it.
"""
import enum
import logging
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, computed_field

from qsearch.algorithms import default_grover_iterations
from qsearch.config import DEFAULT_DETUNING_EXPONENT, NORM_TOL, PURITY_TOL
from qsearch.errors import ContractViolationError, DomainError
from qsearch.linalg_core import HADAMARD, PureState, partial_trace, purity
from qsearch.oracles import NaiveOracle, Oracle, QueryLedger, SophisticatedOracle


class EntanglementStatus(str, enum.Enum):
    PRODUCT = "product"
    ENTANGLED = "entangled"
    NOT_APPLICABLE = "not applicable"


class Algorithm(str, enum.Enum):
    GROVER = "grover"
    BV = "bv"


@dataclass(frozen=True)
class QuditState:
    """Normalized amplitudes over the levels 0..dim-1 of one system."""
    dim: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=np.complex128)
        if self.dim < 2 or amplitudes.shape != (self.dim,):
            raise DomainError(f"Expected {self.dim} level amplitudes, got shape {amplitudes.shape}")
        norm = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ContractViolationError(f"Qudit state is not normalized: {norm!r}")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def level(cls, dim: int, index: int) -> "QuditState":
        if not 0 <= index < dim:
            raise DomainError(f"Level {index} out of range for dim={dim}")
        amplitudes = np.zeros(dim, dtype=np.complex128)
        amplitudes[index] = 1.0
        return cls(dim, amplitudes)

    def distribution(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def apply(self, unitary: np.ndarray) -> "QuditState":
        return QuditState(self.dim, unitary @ self.amplitudes)


@dataclass
class QuditSearchResult:
    distribution: np.ndarray
    top_guess: int
    ledger: QueryLedger
    trajectory: List = field(default_factory=list)
    # nothing to analyze without tensor structure
    entanglement: EntanglementStatus = EntanglementStatus.NOT_APPLICABLE

    def probability_of(self, level: int) -> float:
        if not 0 <= level < self.distribution.size:
            raise DomainError(f"Level {level} out of range for dim={self.distribution.size}")
        return float(self.distribution[level])


class PrecisionReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    detuning_exponent: float
    min_level_spacing: float
    required_resolution: float
    resolution_bits: float
    nontrivial_amplitude_count: int
    poly_local_gate_count: int
    poly_local_entry_count: int
    unmodeled_resources: tuple = ("energy",)

    @computed_field
    @property
    def specification_ratio(self) -> float:
        """Monolithic nontrivial entries per single-qubit gate of the qubit circuit."""
        return self.nontrivial_amplitude_count / self.poly_local_gate_count

    @computed_field
    @property
    def entry_ratio(self) -> float:
        """Monolithic nontrivial entries per 2x2 gate entry of the qubit circuit."""
        return self.nontrivial_amplitude_count / self.poly_local_entry_count


def embed_as_qudit(state: PureState, has_ancilla: bool = True,
                   tol: float = PURITY_TOL) -> QuditState:
    """Map a qubit register onto one 2^n-level system, level x <-> basis string x.

    With `has_ancilla`, the last qubit must be in a product with the rest. The
    state is factored as guess (x) ancilla with the heavier ancilla component
    real and positive, so any other phase, global phase included, stays on the
    returned guess state.
    """
    if not has_ancilla:
        return QuditState(state.dim, state.amplitudes)
    if state.num_qubits < 2:
        raise DomainError("A register with an ancilla needs at least two qubits")
    ancilla = state.num_qubits - 1
    if purity(partial_trace(state, [ancilla])) < 1 - tol:
        raise DomainError("The ancilla is entangled with the guess register; cannot factor")
    pairs = state.amplitudes.reshape(-1, 2)
    column_weights = np.sum(np.abs(pairs) ** 2, axis=0)
    b = int(np.argmax(column_weights))
    guess = pairs[:, b]
    return QuditState(guess.size, guess / np.linalg.norm(guess))


def hadamard_image(n: int) -> np.ndarray:
    """The dense N x N matrix of H^n in the level basis."""
    return reduce(np.kron, [HADAMARD.entries] * n)


def zero_reflection_image(dim: int) -> np.ndarray:
    """I - 2|0><0| as a dense dim x dim matrix."""
    reflection = np.eye(dim, dtype=np.complex128)
    reflection[0, 0] = -1.0
    return reflection


def run_on_qudit(algorithm: Union[Algorithm, str], n: int, oracle: Oracle,
                 iterations: Optional[int] = None) -> QuditSearchResult:
    """Run Grover or Bernstein-Vazirani with the guess register as one 2^n-level system."""
    algorithm = Algorithm(algorithm)
    if oracle.n != n:
        raise DomainError(f"Oracle width {oracle.n} does not match n={n}")
    dim = 1 << n
    hadamard = hadamard_image(n)
    state = QuditState.level(dim, 0)
    trajectory = [("psi0", state)]
    state = state.apply(hadamard)
    trajectory.append(("psi1", state))

    if algorithm is Algorithm.BV:
        if not isinstance(oracle, SophisticatedOracle):
            raise DomainError("Bernstein-Vazirani needs the sophisticated database")
        state = QuditState(dim, oracle.phase_apply(state.amplitudes))
        trajectory.append(("psi2", state))
        state = state.apply(hadamard)
        trajectory.append(("psi3", state))
    else:
        if not isinstance(oracle, NaiveOracle):
            raise DomainError("Grover search needs the naive database")
        if iterations is None:
            iterations = default_grover_iterations(n)
        diffusion = hadamard @ zero_reflection_image(dim) @ hadamard
        for k in range(1, iterations + 1):
            state = QuditState(dim, oracle.phase_apply(state.amplitudes))
            trajectory.append((f"iter {k}: post-oracle", state))
            state = state.apply(diffusion)
            trajectory.append((f"iter {k}: post-diffusion", state))

    distribution = state.distribution()
    logging.debug(f"Qudit {algorithm.value} run finished: n={n}, dim={dim}")
    return QuditSearchResult(
        distribution=distribution,
        top_guess=int(np.argmax(distribution)),
        ledger=oracle.ledger(),
        trajectory=trajectory,
    )


def specification_census(algorithm: Union[Algorithm, str], n: int,
                         iterations: Optional[int] = None) -> dict:
    """Count what must be specified to run the circuit each way.

    Monolithic: nontrivial entries of every dense N x N layer on the single
    system (N^2 per Hadamard image, N per diagonal oracle or reflection).
    Poly-local: single-qubit gates of the qubit circuit, each a 2x2 matrix.
    Oracle calls are queries and appear in neither count's gate list beyond
    their diagonal on the monolithic side.
    """
    algorithm = Algorithm(algorithm)
    if n < 1:
        raise DomainError(f"n must be positive, got {n}")
    N = 1 << n
    preparation_gates = n + 2  # H on each guess qubit, X and H on the ancilla
    if algorithm is Algorithm.BV:
        monolithic = 2 * N * N + N
        gates = preparation_gates + n
    else:
        if iterations is None:
            iterations = default_grover_iterations(n)
        monolithic = N * N + iterations * (2 * N * N + 2 * N)
        # per round: 2n H, 2n X inside the f_0 reflection
        gates = preparation_gates + iterations * 4 * n
    return {
        "nontrivial_amplitude_count": monolithic,
        "poly_local_gate_count": gates,
        "poly_local_entry_count": 4 * gates,
    }


def _power_of_two(exponent: float) -> float:
    try:
        return 2.0 ** exponent
    except OverflowError:
        return math.inf


def precision_cost(n: int, p: float = DEFAULT_DETUNING_EXPONENT) -> PrecisionReport:
    """Resolution needed to address N = 2^n levels whose spacing shrinks as N^-p.

    Spacings are in relative units; only the scaling is meaningful.
    resolution_bits = p n is always exact. Past the float range
    required_resolution saturates to inf and min_level_spacing to 0.0.
    """
    if n < 1:
        raise DomainError(f"n must be at least 1, got {n}")
    if p <= 0:
        raise DomainError(f"Detuning exponent must be positive, got {p}")
    resolution_bits = p * n
    census = specification_census(Algorithm.BV, n)
    return PrecisionReport(
        n=n,
        detuning_exponent=p,
        min_level_spacing=_power_of_two(-resolution_bits),
        required_resolution=_power_of_two(resolution_bits),
        resolution_bits=resolution_bits,
        **census,
    )
