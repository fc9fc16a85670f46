"""Query-counting databases.

Each oracle seals its answer a. Algorithms only see the public interface:
classical queries on (x, b) pairs, the quantum controlled-NOT action on a
register of n + 1 qubits, and the phase action on a single 2^n-level system.
Every one of those calls is one query on the ledger. Nothing public reads a
back; `_reveal_answer` is reserved for the verification harness.
"""
import logging
from abc import ABC, abstractmethod

import numpy as np
from pydantic import BaseModel, ConfigDict

from qsearch.errors import DomainError
from qsearch.linalg_core import PAULI_X, PureState, apply_gate_layer


class QueryLedger(BaseModel):
    """Read-only snapshot of how often a database was consulted."""
    model_config = ConfigDict(frozen=True)

    classical_queries: int = 0
    quantum_queries: int = 0
    # f_0 reflections applied by an algorithm; public, never counted as queries
    reflection_applications: int = 0

    @property
    def total_queries(self) -> int:
        return self.classical_queries + self.quantum_queries


class Oracle(ABC):
    """A database over records 0..N-1 with N = 2^n."""

    def __init__(self, n: int, answer: int):
        if n < 1:
            raise DomainError(f"Guess width n must be positive, got {n}")
        if not 0 <= answer < (1 << n):
            raise DomainError(f"Answer {answer} out of range for n={n}")
        self.n = n
        self.__answer = answer
        self._classical_queries = 0
        self._quantum_queries = 0

    @property
    def size(self) -> int:
        return 1 << self.n

    @property
    def query_count(self) -> int:
        return self._classical_queries + self._quantum_queries

    @abstractmethod
    def _response(self, x: int, answer: int) -> int:
        """The database function evaluated on one guess."""

    @abstractmethod
    def _response_table(self, answer: int) -> np.ndarray:
        """Boolean array over all N guesses, True where the database adds 1 to b."""

    def ledger(self) -> QueryLedger:
        return QueryLedger(
            classical_queries=self._classical_queries,
            quantum_queries=self._quantum_queries,
        )

    def _check_guess(self, x: int) -> None:
        if not 0 <= x < self.size:
            raise DomainError(f"Guess {x} out of range for N={self.size}")

    def _check_register(self, state: PureState) -> None:
        if state.num_qubits != self.n + 1:
            raise DomainError(
                f"Oracle acts on {self.n + 1} qubits, state has {state.num_qubits}"
            )

    def classical_query(self, x: int, b: int) -> int:
        """(x, b) -> b XOR f(x)."""
        self._check_guess(x)
        if b not in (0, 1):
            raise DomainError(f"Response bit must be 0 or 1, got {b}")
        self._classical_queries += 1
        return b ^ self._response(x, self.__answer)

    def quantum_apply(self, state: PureState) -> PureState:
        """|x, b> -> |x, b XOR f(x)>, one query however wide the superposition."""
        self._check_register(state)
        self._quantum_queries += 1
        pairs = state.amplitudes.copy().reshape(self.size, 2)
        flip = self._response_table(self.__answer)
        pairs[flip] = pairs[flip][:, ::-1]
        logging.debug(f"{self.__class__.__name__}: quantum query #{self._quantum_queries}")
        return PureState(state.num_qubits, pairs.reshape(-1))

    def phase_apply(self, amplitudes: np.ndarray) -> np.ndarray:
        """Apply the oracle to a single 2^n-level system as one dense N x N unitary.

        With no ancilla the database acts as the phase flip (-1)^f(x) on level x.
        """
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        if amplitudes.shape != (self.size,):
            raise DomainError(f"Oracle acts on {self.size} levels, got shape {amplitudes.shape}")
        self._quantum_queries += 1
        signs = np.where(self._response_table(self.__answer), -1.0, 1.0)
        return np.diag(signs).astype(np.complex128) @ amplitudes

    def _reveal_answer(self) -> int:
        """Unseal a. Reserved for the verification harness and tests."""
        return self.__answer


class NaiveOracle(Oracle):
    """Membership database: f_a(x) = 1 when x = a and 0 otherwise."""

    def _response(self, x: int, answer: int) -> int:
        return int(x == answer)

    def _response_table(self, answer: int) -> np.ndarray:
        table = np.zeros(self.size, dtype=bool)
        table[answer] = True
        return table


def dot_parity(x, a: int, n: int):
    """x . a mod 2 over n-bit strings; x may be an int or an integer array."""
    parity = np.zeros_like(x) if isinstance(x, np.ndarray) else 0
    for bit in range(n):
        if (a >> bit) & 1:
            parity = parity ^ ((x >> bit) & 1)
    return parity


class SophisticatedOracle(Oracle):
    """Relevance database: g_a(x) = x . a mod 2."""

    def _response(self, x: int, answer: int) -> int:
        return int(dot_parity(x, answer, self.n))

    def _response_table(self, answer: int) -> np.ndarray:
        guesses = np.arange(self.size, dtype=np.int64)
        return dot_parity(guesses, answer, self.n).astype(bool)


class AdversarialNaiveOracle(NaiveOracle):
    """Membership database that commits to a only when forced.

    Every query on a record is answered "no" while at least one other record
    is still unqueried, so the answer ends up being the last record left. This
    realizes the worst case of classical search. Classical queries only.
    """

    def __init__(self, n: int):
        super().__init__(n, 0)
        self._candidates = set(range(self.size))

    def classical_query(self, x: int, b: int) -> int:
        self._check_guess(x)
        if b not in (0, 1):
            raise DomainError(f"Response bit must be 0 or 1, got {b}")
        self._classical_queries += 1
        if x in self._candidates and len(self._candidates) == 1:
            return b ^ 1
        self._candidates.discard(x)
        return b

    def quantum_apply(self, state: PureState) -> PureState:
        raise DomainError("The adversarial database answers classical queries only")

    def phase_apply(self, amplitudes: np.ndarray) -> np.ndarray:
        raise DomainError("The adversarial database answers classical queries only")

    def _reveal_answer(self) -> int:
        if len(self._candidates) != 1:
            raise DomainError(
                f"Adversary has not committed yet: {len(self._candidates)} records remain"
            )
        return next(iter(self._candidates))


def naive_classical_query(oracle: NaiveOracle, x: int, b: int) -> int:
    return oracle.classical_query(x, b)


def sophisticated_classical_query(oracle: SophisticatedOracle, x: int, b: int) -> int:
    return oracle.classical_query(x, b)


def naive_quantum_apply(oracle: NaiveOracle, state: PureState) -> PureState:
    return oracle.quantum_apply(state)


def sophisticated_quantum_apply(oracle: SophisticatedOracle, state: PureState) -> PureState:
    return oracle.quantum_apply(state)


def query_count(oracle: Oracle) -> QueryLedger:
    return oracle.ledger()


def _ones_controlled_not(state: PureState) -> PureState:
    # flips the ancilla iff every guess qubit is 1
    amplitudes = state.amplitudes.copy()
    last = amplitudes.size - 1
    amplitudes[last - 1], amplitudes[last] = amplitudes[last], amplitudes[last - 1]
    return PureState(state.num_qubits, amplitudes)


def zero_reflection_apply(state: PureState) -> PureState:
    """The f_0-controlled-NOT: |x, b> -> |x, b XOR [x = 0]>.

    Realized as an all-ones-controlled NOT conjugated by X on every guess
    qubit. The answer 0 is public, so this is not a database query.
    """
    if state.num_qubits < 2:
        raise DomainError("The f_0 reflection needs a guess register and an ancilla")
    guess = range(state.num_qubits - 1)
    state = apply_gate_layer(state, PAULI_X, guess)
    state = _ones_controlled_not(state)
    return apply_gate_layer(state, PAULI_X, guess)
