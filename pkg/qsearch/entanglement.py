"""Product-state certification for trajectory snapshots.

For a pure state, being a full tensor product is equivalent to every
single-qubit reduction being pure, so only the n single-qubit-vs-rest cuts are
analyzed. Each cut is judged by three witnesses (purity, Schmidt rank,
entanglement entropy) that must agree.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict

from qsearch.algorithms import Trajectory
from qsearch.config import EIGEN_TOL, ENTROPY_TOL_BITS, PURITY_TOL
from qsearch.errors import DomainError, WitnessDisagreementError
from qsearch.linalg_core import (
    Gate2,
    PureState,
    apply_local_gates,
    entropy_bits,
    partial_trace,
    purity,
    schmidt_coefficients,
    schmidt_rank,
)

MINUS_STATE = np.array([1.0, -1.0]) / np.sqrt(2)


class CutVerdict(BaseModel):
    model_config = ConfigDict(frozen=True)

    cut: tuple
    purity: float
    schmidt_rank: int
    entropy: float
    is_product: bool


@dataclass
class SnapshotVerdicts:
    label: str
    cuts: List[CutVerdict]

    @property
    def fully_product(self) -> bool:
        return all(verdict.is_product for verdict in self.cuts)

    @property
    def min_purity(self) -> float:
        return min(verdict.purity for verdict in self.cuts)


@dataclass
class AncillaEntry:
    label: str
    verdict: CutVerdict
    # overlap of the reduced ancilla state with (|0> - |1>)/sqrt(2)
    minus_fidelity: float


@dataclass
class EntanglementReport:
    snapshots: List[SnapshotVerdicts] = field(default_factory=list)
    ancilla_series: List[AncillaEntry] = field(default_factory=list)

    def __getitem__(self, label: str) -> SnapshotVerdicts:
        for snapshot in self.snapshots:
            if snapshot.label == label:
                return snapshot
        raise KeyError(label)

    @property
    def fully_product(self) -> Dict[str, bool]:
        return {snapshot.label: snapshot.fully_product for snapshot in self.snapshots}

    def series(self) -> Dict[str, Dict[str, dict]]:
        """{snapshot label -> {cut -> purity/entropy/rank}} for report emission."""
        return {
            snapshot.label: {
                f"q{verdict.cut[0]}": {
                    "purity": verdict.purity,
                    "entropy": verdict.entropy,
                    "rank": verdict.schmidt_rank,
                }
                for verdict in snapshot.cuts
            }
            for snapshot in self.snapshots
        }


def binary_entropy(weight: float) -> float:
    """Entropy in bits of the weights (weight, 1 - weight)."""
    if weight <= 0.0 or weight >= 1.0:
        return 0.0
    return float(-weight * np.log2(weight) - (1 - weight) * np.log2(1 - weight))


def analyze_cut(state: PureState, qubit: int, tol: float = PURITY_TOL,
                entropy_tol: float = ENTROPY_TOL_BITS,
                eigen_tol: float = EIGEN_TOL) -> CutVerdict:
    """Judge the cut {qubit} | rest with all three witnesses.

    A cut is product when its smaller Schmidt weight is at most tol / 2. Each
    witness tests its own quantity against the image of that one bound:
    purity >= 1 - 2w(1 - w), no second squared coefficient above w, and
    entropy <= h(w), with w = tol / 2. A product cut whose entropy is within
    `entropy_tol` bits reports exactly zero.
    """
    weight = tol / 2
    rho = partial_trace(state, [qubit])
    cut_purity = purity(rho)
    coefficients = schmidt_coefficients(state, [qubit], eigen_tol)
    rank = schmidt_rank(coefficients, tol)
    entropy = entropy_bits(coefficients ** 2)

    by_purity = cut_purity >= 1 - 2 * weight * (1 - weight)
    by_rank = rank == 1
    by_entropy = entropy <= binary_entropy(weight)
    if not by_purity == by_rank == by_entropy:
        logging.error(
            f"Witness disagreement on cut {qubit}: purity={cut_purity!r}, rank={rank}, "
            f"entropy={entropy!r}"
        )
        raise WitnessDisagreementError(
            f"Cut {qubit}: purity says {by_purity}, Schmidt rank says {by_rank}, "
            f"entropy says {by_entropy}"
        )
    if by_purity and entropy <= entropy_tol:
        entropy = 0.0
    return CutVerdict(cut=(qubit,), purity=cut_purity, schmidt_rank=rank,
                      entropy=entropy, is_product=by_purity)


def analyze_state(state: PureState, tol: float = PURITY_TOL,
                  entropy_tol: float = ENTROPY_TOL_BITS,
                  eigen_tol: float = EIGEN_TOL) -> List[CutVerdict]:
    """One verdict per single-qubit-vs-rest cut."""
    if state.num_qubits < 2:
        raise DomainError("Entanglement needs at least two qubits")
    return [analyze_cut(state, qubit, tol, entropy_tol, eigen_tol)
            for qubit in range(state.num_qubits)]


def minus_fidelity(state: PureState, qubit: int) -> float:
    """<-| rho_qubit |->."""
    rho = partial_trace(state, [qubit]).entries
    return float(np.real(MINUS_STATE @ rho @ MINUS_STATE))


def ancilla_fidelity(state: PureState) -> float:
    """How close the ancilla (the last qubit) is to (|0> - |1>)/sqrt(2)."""
    return minus_fidelity(state, state.num_qubits - 1)


def analyze_trajectory(trajectory: Trajectory, tol: float = PURITY_TOL,
                       entropy_tol: float = ENTROPY_TOL_BITS,
                       eigen_tol: float = EIGEN_TOL) -> EntanglementReport:
    """Analyze every snapshot; the last qubit's cut is also collected as its own series."""
    widths = {snapshot.state.num_qubits for snapshot in trajectory}
    if len(widths) > 1:
        raise DomainError(f"Snapshots have different widths: {sorted(widths)}")

    report = EntanglementReport()
    for snapshot in trajectory:
        cuts = analyze_state(snapshot.state, tol, entropy_tol, eigen_tol)
        report.snapshots.append(SnapshotVerdicts(snapshot.label, cuts))
        ancilla = snapshot.state.num_qubits - 1
        report.ancilla_series.append(AncillaEntry(
            label=snapshot.label,
            verdict=cuts[ancilla],
            minus_fidelity=ancilla_fidelity(snapshot.state),
        ))
    logging.debug(f"Analyzed {len(report.snapshots)} snapshots")
    return report


def local_unitary_invariance_check(state: PureState, gates: Sequence[Gate2],
                                   tol: float = PURITY_TOL,
                                   entropy_tol: float = ENTROPY_TOL_BITS,
                                   eigen_tol: float = EIGEN_TOL) -> bool:
    """True iff every single-qubit-cut purity survives gates[q] applied to each qubit q."""
    before = analyze_state(state, tol, entropy_tol, eigen_tol)
    after = analyze_state(apply_local_gates(state, gates), tol, entropy_tol, eigen_tol)
    return all(
        abs(b.purity - a.purity) <= tol and b.is_product == a.is_product
        for b, a in zip(before, after)
    )
