"""Pure-state linear algebra on registers of qubits.

Basis ordering: qubit 0 is the top wire and the most significant bit of the
composite index. For the search circuits the guess register x occupies qubits
0..n-1 and the ancilla b is qubit n, so the index of |x, b> is 2x + b.
"""
import logging
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from qsearch.config import EIGEN_TOL, NORM_TOL
from qsearch.errors import ContractViolationError, DomainError


@dataclass(frozen=True)
class Gate2:
    """A 2x2 single-qubit gate."""
    entries: np.ndarray
    name: str = "U"

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.complex128)
        if entries.shape != (2, 2):
            raise DomainError(f"Gate {self.name} must be 2x2, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise ContractViolationError(f"Gate {self.name} has non-finite entries")
        object.__setattr__(self, "entries", entries)

    def is_unitary(self, tol: float = NORM_TOL) -> bool:
        product = self.entries.conj().T @ self.entries
        return bool(np.all(np.abs(product - np.eye(2)) <= tol))

    def dagger(self) -> "Gate2":
        return Gate2(self.entries.conj().T, name=f"{self.name}^dagger")


HADAMARD = Gate2(np.array([[1, 1], [1, -1]]) / np.sqrt(2), name="H")
PAULI_X = Gate2(np.array([[0, 1], [1, 0]]), name="X")
IDENTITY = Gate2(np.eye(2), name="I")


@dataclass(frozen=True)
class PureState:
    """Normalized amplitude vector of a register of `num_qubits` qubits."""
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.num_qubits < 1:
            raise DomainError(f"num_qubits must be positive, got {self.num_qubits}")
        amplitudes = np.array(self.amplitudes, dtype=np.complex128)
        if amplitudes.shape != (1 << self.num_qubits,):
            raise DomainError(
                f"Expected {1 << self.num_qubits} amplitudes for {self.num_qubits} qubits, "
                f"got shape {amplitudes.shape}"
            )
        if not np.all(np.isfinite(amplitudes)):
            raise ContractViolationError("State has non-finite amplitudes")
        norm = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm - 1.0) > NORM_TOL:
            raise ContractViolationError(f"State is not normalized: |psi|^2 = {norm!r}")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def tensor(self) -> np.ndarray:
        """View the amplitudes as a rank-num_qubits tensor with one axis per qubit."""
        return self.amplitudes.reshape((2,) * self.num_qubits)

    @classmethod
    def from_vector(cls, vector: Sequence[complex]) -> "PureState":
        """Build a state from an arbitrary nonzero vector, normalizing it."""
        vector = np.asarray(vector, dtype=np.complex128)
        num_qubits = int(vector.size).bit_length() - 1
        if vector.size < 2 or (1 << num_qubits) != vector.size:
            raise DomainError(f"Vector length {vector.size} is not a power of two >= 2")
        norm = np.linalg.norm(vector)
        if norm == 0:
            raise DomainError("Cannot normalize the zero vector")
        return cls(num_qubits, vector / norm)


@dataclass(frozen=True)
class DensityMatrix:
    """Reduced density matrix over the kept `qubits`."""
    entries: np.ndarray
    qubits: tuple = ()

    def __post_init__(self):
        entries = np.array(self.entries, dtype=np.complex128)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise DomainError(f"Density matrix must be square, got shape {entries.shape}")
        if np.max(np.abs(entries - entries.conj().T)) > NORM_TOL:
            raise ContractViolationError("Density matrix is not Hermitian")
        trace = np.trace(entries).real
        if abs(trace - 1.0) > NORM_TOL:
            raise ContractViolationError(f"Density matrix trace is {trace!r}, expected 1")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def eigenvalues(self, tol: float = EIGEN_TOL) -> np.ndarray:
        """Eigenvalues in descending order; raises if any is below -tol."""
        values = np.linalg.eigvalsh(self.entries)[::-1]
        if values[-1] < -tol:
            raise ContractViolationError(
                f"Density matrix is not positive semidefinite: min eigenvalue {values[-1]!r}"
            )
        return values


def _check_qubits(num_qubits: int, qubits: Sequence[int], what: str = "qubit") -> tuple:
    qubits = tuple(int(q) for q in qubits)
    for q in qubits:
        if not 0 <= q < num_qubits:
            raise DomainError(f"{what} index {q} out of range for {num_qubits} qubits")
    if len(set(qubits)) != len(qubits):
        raise DomainError(f"Duplicate {what} indices in {qubits}")
    return qubits


def make_basis_state(num_qubits: int, index: int) -> PureState:
    """Return the computational basis state |index> on `num_qubits` qubits."""
    if num_qubits < 1:
        raise DomainError(f"num_qubits must be positive, got {num_qubits}")
    if not 0 <= index < (1 << num_qubits):
        raise DomainError(f"Basis index {index} out of range for {num_qubits} qubits")
    amplitudes = np.zeros(1 << num_qubits, dtype=np.complex128)
    amplitudes[index] = 1.0
    return PureState(num_qubits, amplitudes)


def _apply_kernel(amplitudes: np.ndarray, num_qubits: int, gate: np.ndarray, target: int) -> None:
    # Pairs (i, i + stride) differ only in the target bit.
    stride = 1 << (num_qubits - 1 - target)
    pairs = amplitudes.reshape(-1, 2, stride)
    low = pairs[:, 0, :].copy()
    high = pairs[:, 1, :]
    pairs[:, 0, :] = gate[0, 0] * low + gate[0, 1] * high
    pairs[:, 1, :] = gate[1, 0] * low + gate[1, 1] * high


def apply_one_qubit_gate(state: PureState, gate: Gate2, target: int) -> PureState:
    """Apply `gate` to qubit `target` and return the new state."""
    if not 0 <= target < state.num_qubits:
        raise DomainError(f"Target {target} out of range for {state.num_qubits} qubits")
    if not gate.is_unitary():
        raise ContractViolationError(f"Gate {gate.name} is not unitary")
    amplitudes = state.amplitudes.copy()
    _apply_kernel(amplitudes, state.num_qubits, gate.entries, target)
    return PureState(state.num_qubits, amplitudes)


def apply_gate_layer(state: PureState, gate: Gate2, targets: Iterable[int]) -> PureState:
    """Apply the same single-qubit gate to every qubit in `targets`."""
    targets = _check_qubits(state.num_qubits, list(targets), "target")
    if not gate.is_unitary():
        raise ContractViolationError(f"Gate {gate.name} is not unitary")
    if not targets:
        return state
    amplitudes = state.amplitudes.copy()
    for target in targets:
        _apply_kernel(amplitudes, state.num_qubits, gate.entries, target)
    logging.debug(f"Applied {gate.name} layer on qubits {targets}")
    return PureState(state.num_qubits, amplitudes)


def apply_hadamard_layer(state: PureState, targets: Iterable[int]) -> PureState:
    """Apply H to each qubit in `targets`; the empty set is the identity."""
    return apply_gate_layer(state, HADAMARD, targets)


def apply_local_gates(state: PureState, gates: Sequence[Gate2]) -> PureState:
    """Apply gates[q] to qubit q for every qubit of the register."""
    if len(gates) != state.num_qubits:
        raise DomainError(f"Expected {state.num_qubits} local gates, got {len(gates)}")
    for gate in gates:
        if not gate.is_unitary():
            raise ContractViolationError(f"Gate {gate.name} is not unitary")
    amplitudes = state.amplitudes.copy()
    for target, gate in enumerate(gates):
        _apply_kernel(amplitudes, state.num_qubits, gate.entries, target)
    return PureState(state.num_qubits, amplitudes)


def inner_product(left: PureState, right: PureState) -> complex:
    """<left|right>."""
    if left.num_qubits != right.num_qubits:
        raise DomainError(f"Width mismatch: {left.num_qubits} vs {right.num_qubits} qubits")
    return complex(np.vdot(left.amplitudes, right.amplitudes))


def fidelity(left: PureState, right: PureState) -> float:
    return abs(inner_product(left, right)) ** 2


def measurement_distribution(state: PureState, subset: Sequence[int]) -> np.ndarray:
    """Exact outcome probabilities of measuring the qubits in `subset`.

    Entry y of the result is the probability of reading the bit string y, with
    subset[0] as its most significant bit.
    """
    subset = _check_qubits(state.num_qubits, subset)
    probabilities = np.abs(state.tensor()) ** 2
    if not subset:
        return np.array([probabilities.sum()])
    others = tuple(q for q in range(state.num_qubits) if q not in subset)
    marginal = probabilities.sum(axis=others) if others else probabilities
    # sum() keeps the remaining axes in ascending qubit order
    kept_order = sorted(subset)
    marginal = np.transpose(marginal, [kept_order.index(q) for q in subset])
    return marginal.reshape(-1)


def sample_outcomes(state: PureState, subset: Sequence[int], shots: int,
                    seed: Optional[int] = None) -> Counter:
    """Draw `shots` measurement outcomes of `subset`; for demonstration output only."""
    if shots < 0:
        raise DomainError(f"shots must be nonnegative, got {shots}")
    distribution = measurement_distribution(state, subset)
    rng = np.random.default_rng(seed)
    draws = rng.choice(distribution.size, size=shots, p=distribution / distribution.sum())
    return Counter(int(outcome) for outcome in draws)


def _split(state: PureState, keep: Sequence[int]) -> np.ndarray:
    """Reshape the amplitudes into a (2^|keep|, 2^rest) matrix."""
    rest = [q for q in range(state.num_qubits) if q not in keep]
    matrix = np.transpose(state.tensor(), list(keep) + rest)
    return matrix.reshape(1 << len(keep), -1)


def _check_cut(state: PureState, side: Iterable[int]) -> tuple:
    side = tuple(sorted(_check_qubits(state.num_qubits, list(side))))
    if not side or len(side) == state.num_qubits:
        raise DomainError(f"Cut {side} must be a nonempty proper subset of {state.num_qubits} qubits")
    return side


def partial_trace(state: PureState, keep: Iterable[int]) -> DensityMatrix:
    """Reduced density matrix on `keep`, tracing out every other qubit."""
    keep = _check_cut(state, keep)
    matrix = _split(state, keep)
    rho = matrix @ matrix.conj().T
    # enforce exact Hermiticity against rounding
    rho = (rho + rho.conj().T) / 2
    return DensityMatrix(rho, qubits=keep)


def purity(rho: DensityMatrix) -> float:
    """Tr(rho^2)."""
    return float(np.sum(np.abs(rho.entries) ** 2))


def schmidt_coefficients(state: PureState, cut: Iterable[int],
                         eigen_tol: float = EIGEN_TOL) -> np.ndarray:
    """Schmidt coefficients across the bipartition `cut` | complement, descending.

    Computed from the eigenvalues of the reduced density matrix of the smaller side.
    """
    side = _check_cut(state, cut)
    if 2 * len(side) > state.num_qubits:
        side = tuple(q for q in range(state.num_qubits) if q not in side)
    weights = partial_trace(state, side).eigenvalues(eigen_tol)
    weights = np.clip(weights, 0.0, None)
    return np.sqrt(weights / weights.sum())


def schmidt_rank(coefficients: np.ndarray, tol: float = EIGEN_TOL) -> int:
    """Number of squared coefficients above tol / 2."""
    return int(np.count_nonzero(coefficients ** 2 > tol / 2))


def entropy_bits(weights: np.ndarray) -> float:
    """Von Neumann entropy in bits of a probability vector of Schmidt weights."""
    weights = weights[weights > 1e-300]
    return float(max(0.0, -np.sum(weights * np.log2(weights))))


def random_local_gate(rng: np.random.Generator) -> Gate2:
    """Haar-random single-qubit unitary."""
    z = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diag(r) / np.abs(np.diag(r))
    return Gate2(q * phases, name="U_rand")


def random_state(num_qubits: int, rng: np.random.Generator) -> PureState:
    """Uniformly random pure state."""
    dim = 1 << num_qubits
    return PureState.from_vector(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


def random_product_state(num_qubits: int, rng: np.random.Generator) -> PureState:
    """Tensor product of independent random single-qubit states."""
    vector = np.ones(1, dtype=np.complex128)
    for _ in range(num_qubits):
        factor = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        vector = np.kron(vector, factor / np.linalg.norm(factor))
    return PureState.from_vector(vector)
