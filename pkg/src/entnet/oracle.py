"""Dense density-matrix ground truth for the closed forms.

Small-scale brute-force engine: Werner link construction, hub-side GHZ
projections, phase imprinting, QFI matrices from an eigendecomposition,
SLD operators and the Fisher information of explicit POVMs.  Everything
here is a pure function of its inputs and is meant as a test oracle, not
a production simulator; the qubit count is capped at 12.

Qubit convention: qubit 0 is the leftmost tensor factor (most significant
bit of the computational-basis index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import EigenSpec, GhzPartition
from .errors import SizeLimitError

__all__ = [
    "MAX_QUBITS",
    "DenseState",
    "PhaseVector",
    "build_werner",
    "ghz_project",
    "build_probe",
    "apply_phases",
    "phase_diagonal",
    "qfim",
    "qfi_theta",
    "sld_operator",
    "measurement_cfi",
]

MAX_QUBITS = 12

_HERMITICITY_TOL = 1e-12
_TRACE_TOL = 1e-12
_EIGENVALUE_TOL = 1e-12
_DEGENERACY_TOL = 1e-14
_FD_STEP = 1e-5


@dataclass(frozen=True)
class DenseState:
    """A validated density matrix on a register of qubits."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        mat = np.ascontiguousarray(np.asarray(self.matrix, dtype=complex))
        object.__setattr__(self, "matrix", mat)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {mat.shape}")
        dim = mat.shape[0]
        if dim & (dim - 1) or dim < 2:
            raise ValueError(f"dimension must be a power of two, got {dim}")
        if dim > 2**MAX_QUBITS:
            raise SizeLimitError(f"dense engine is capped at {MAX_QUBITS} qubits")
        if np.max(np.abs(mat - mat.conj().T)) > _HERMITICITY_TOL:
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(mat).real - 1.0) > _TRACE_TOL or abs(np.trace(mat).imag) > _TRACE_TOL:
            raise ValueError("density matrix must have unit trace")
        if np.linalg.eigvalsh(mat).min() < -_EIGENVALUE_TOL:
            raise ValueError("density matrix has a negative eigenvalue")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_qubits(self) -> int:
        return self.dim.bit_length() - 1


@dataclass(frozen=True)
class PhaseVector:
    """The per-sensor phases; the estimated quantity is their mean."""

    phis: tuple[float, ...]

    def __post_init__(self) -> None:
        vals = tuple(float(p) for p in self.phis)
        if not all(math.isfinite(p) for p in vals):
            raise ValueError("phases must be finite")
        object.__setattr__(self, "phis", vals)

    def __len__(self) -> int:
        return len(self.phis)

    @property
    def theta(self) -> float:
        return sum(self.phis) / len(self.phis)

    @classmethod
    def zeros(cls, sensors: int) -> "PhaseVector":
        return cls((0.0,) * sensors)


def _ghz_vector(n: int) -> np.ndarray:
    vec = np.zeros(2**n, dtype=complex)
    vec[0] = vec[-1] = 1.0 / math.sqrt(2.0)
    return vec


_PLUS_PROJECTOR = np.full((2, 2), 0.5, dtype=complex)


def build_werner(x: float) -> DenseState:
    """Two-qubit Werner state x * Phi + (1 - x)/4 * I, sensor qubit first."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"Werner parameter must be in [0, 1], got {x}")
    bell = np.zeros(4, dtype=complex)
    bell[0b00] = bell[0b11] = 1.0 / math.sqrt(2.0)
    mat = x * np.outer(bell, bell.conj()) + (1.0 - x) / 4.0 * np.eye(4)
    return DenseState(mat)


def ghz_project(links: Sequence[DenseState], n: int) -> DenseState:
    """Project the hub halves of n links onto the n-GHZ state.

    Each link is a two-qubit state ordered (sensor, hub).  The returned
    state lives on the n sensor qubits and is normalised by its trace,
    i.e. it is the conditional state given the corrected GHZ outcome.
    General two-qubit inputs are accepted, not only Werner states.
    """
    if n < 2:
        raise ValueError(f"a GHZ projection needs n >= 2 links, got {n}")
    if len(links) != n:
        raise ValueError(f"expected {n} links, got {len(links)}")
    if n > MAX_QUBITS:
        raise SizeLimitError(f"dense engine is capped at {MAX_QUBITS} qubits")
    for link in links:
        if link.dim != 4:
            raise ValueError("each link must be a two-qubit state")
    # The GHZ bra/ket touches only the all-zero and all-one hub strings, so
    # the projection factorises into per-link 2x2 sensor-side blocks
    # M[b, b'] = <b|_hub beta |b'>_hub and sigma = (1/2) sum_{b,b'} kron(M_i[b,b']).
    sigma = np.zeros((2**n, 2**n), dtype=complex)
    for b in (0, 1):
        for bp in (0, 1):
            acc = np.ones((1, 1), dtype=complex)
            for link in links:
                block = link.matrix.reshape(2, 2, 2, 2)[:, b, :, bp]
                acc = np.kron(acc, block)
            sigma += 0.5 * acc
    norm = np.trace(sigma).real
    if norm <= 0.0:
        raise ValueError("GHZ projection has zero probability for these links")
    return DenseState(sigma / norm)


def build_probe(
    sensors: int,
    partition: GhzPartition,
    fidelities_per_group: Sequence[Sequence[float]],
) -> DenseState:
    """Assemble the snapshot probe: projected groups tensored with |+> locals.

    Group order follows the canonical (non-increasing) partition order, so
    group nu occupies the sensor slots given by ``partition.offsets()``.
    """
    if partition.total_sensors != sensors:
        raise ValueError("partition sized for a different sensor count")
    if sensors > MAX_QUBITS:
        raise SizeLimitError(f"dense engine is capped at {MAX_QUBITS} qubits")
    groups = [tuple(g) for g in fidelities_per_group]
    if tuple(sorted((len(g) for g in groups), reverse=True)) != partition.group_sizes:
        raise ValueError("fidelity groups do not match the partition sizes")
    groups.sort(key=len, reverse=True)
    probe = np.ones((1, 1), dtype=complex)
    for group in groups:
        links = [build_werner((4.0 * f - 1.0) / 3.0) for f in group]
        sigma = ghz_project(links, len(group))
        probe = np.kron(probe, sigma.matrix)
    for _ in range(partition.local_count):
        probe = np.kron(probe, _PLUS_PROJECTOR)
    return DenseState(probe)


def phase_diagonal(phis: PhaseVector, eig: EigenSpec = EigenSpec()) -> np.ndarray:
    """Diagonal of the phase-imprinting unitary U(phi).

    Per qubit the generator is h = -(gap/2) Z; the identity component is
    dropped because it cancels under conjugation.
    """
    sensors = len(phis)
    half = 0.5 * eig.delta_lambda
    diag = np.ones(1, dtype=complex)
    for phi in phis.phis:
        qubit = np.array([np.exp(1j * half * phi), np.exp(-1j * half * phi)])
        diag = np.einsum("i,j->ij", diag, qubit).reshape(-1)
    assert diag.shape[0] == 2**sensors
    return diag


def apply_phases(
    state: DenseState, phis: PhaseVector, eig: EigenSpec = EigenSpec()
) -> DenseState:
    """Conjugate a state by the local phase unitaries."""
    if state.num_qubits != len(phis):
        raise ValueError(
            f"state has {state.num_qubits} qubits but {len(phis)} phases were given"
        )
    diag = phase_diagonal(phis, eig)
    return DenseState((diag[:, None] * state.matrix) * diag.conj()[None, :])


def _generator_diagonals(sensors: int, eig: EigenSpec) -> np.ndarray:
    """Row s holds the diagonal of the local generator acting on qubit s."""
    dim = 2**sensors
    idx = np.arange(dim)
    out = np.empty((sensors, dim))
    for s in range(sensors):
        bit = (idx >> (sensors - 1 - s)) & 1
        out[s] = np.where(bit == 0, eig.lambda0, eig.lambda1)
    return out


def qfim(probe: DenseState, phis: PhaseVector, eig: EigenSpec = EigenSpec()) -> np.ndarray:
    """QFI matrix of the phase-imprinted probe, one row/column per sensor.

    Uses the eigendecomposition formula with weights
    4 E_g ((E_g' - E_g) / (E_g' + E_g))^2; pairs whose eigenvalue sum falls
    below 1e-14 contribute nothing.  Because the local generators commute
    with the imprinting unitary the result is independent of the phases.
    """
    sensors = probe.num_qubits
    if len(phis) != sensors:
        raise ValueError("phase vector length must match the qubit count")
    evals, evecs = np.linalg.eigh(probe.matrix)
    gens = _generator_diagonals(sensors, eig)
    esum = evals[:, None] + evals[None, :]
    ediff = evals[:, None] - evals[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(esum > _DEGENERACY_TOL, ediff / esum, 0.0)
    # weight[gp, g] = 4 E_g ((E_gp - E_g)/(E_gp + E_g))^2
    weight = 4.0 * evals[None, :] * ratio**2
    mats = [evecs.conj().T @ (gens[s][:, None] * evecs) for s in range(sensors)]
    out = np.empty((sensors, sensors))
    for a in range(sensors):
        for b in range(a, sensors):
            val = np.sum(weight * mats[a] * mats[b].conj()).real
            out[a, b] = out[b, a] = val
    return out


def qfi_theta(qfi_matrix: np.ndarray) -> float:
    """Scalar QFI for the mean phase: contraction with J = (1/S, ..., 1/S)."""
    mat = np.asarray(qfi_matrix, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("QFI matrix must be square")
    sensors = mat.shape[0]
    return float(mat.sum()) / (sensors * sensors)


def sld_operator(
    probe: DenseState, phis: PhaseVector, eig: EigenSpec = EigenSpec()
) -> np.ndarray:
    """Symmetric logarithmic derivative of the evolved state w.r.t. the mean phase.

    Satisfies d_theta rho = (L rho + rho L) / 2 with d_theta realised as the
    averaged phase derivative (1/S) sum_s d_phi_s; its eigenbasis is a
    QFI-attaining measurement.
    """
    sensors = probe.num_qubits
    if len(phis) != sensors:
        raise ValueError("phase vector length must match the qubit count")
    evolved = apply_phases(probe, phis, eig)
    evals, evecs = np.linalg.eigh(evolved.matrix)
    hbar = _generator_diagonals(sensors, eig).mean(axis=0)
    hmat = evecs.conj().T @ (hbar[:, None] * evecs)
    esum = evals[:, None] + evals[None, :]
    ediff = evals[None, :] - evals[:, None]  # E_g' - E_g for entry [g, g']
    with np.errstate(divide="ignore", invalid="ignore"):
        coeff = np.where(esum > _DEGENERACY_TOL, -2j * ediff / esum, 0.0)
    return evecs @ (coeff * hmat) @ evecs.conj().T


def _validate_povm(povm: Sequence[np.ndarray], dim: int) -> list[np.ndarray]:
    elements = [np.asarray(m, dtype=complex) for m in povm]
    if not elements:
        raise ValueError("POVM must have at least one element")
    total = np.zeros((dim, dim), dtype=complex)
    for elem in elements:
        if elem.shape != (dim, dim):
            raise ValueError(f"POVM element has shape {elem.shape}, expected {(dim, dim)}")
        if np.max(np.abs(elem - elem.conj().T)) > 1e-10:
            raise ValueError("POVM element is not Hermitian")
        if np.linalg.eigvalsh(elem).min() < -1e-10:
            raise ValueError("POVM element is not positive semidefinite")
        total += elem
    if np.max(np.abs(total - np.eye(dim))) > 1e-10:
        raise ValueError("POVM elements do not sum to the identity")
    return elements


def measurement_cfi(
    probe: DenseState,
    phis: PhaseVector,
    povm: Sequence[np.ndarray],
    eig: EigenSpec = EigenSpec(),
) -> float:
    """Classical Fisher information of a POVM's outcomes w.r.t. the mean phase.

    The derivative is taken by central finite differences (step 1e-5) along
    a common shift of every phase, scaled by 1/S to match the mean-phase
    convention.  When any outcome probability falls below 1e-9 a Richardson
    step-halving pass refines the derivative; outcomes below 1e-12 are
    excluded from the quotient.
    """
    sensors = probe.num_qubits
    if len(phis) != sensors:
        raise ValueError("phase vector length must match the qubit count")
    elements = _validate_povm(povm, probe.dim)

    def outcome_probs(shift: float) -> np.ndarray:
        shifted = PhaseVector(tuple(p + shift for p in phis.phis))
        rho = apply_phases(probe, shifted, eig).matrix
        return np.array([np.trace(elem @ rho).real for elem in elements])

    p0 = outcome_probs(0.0)
    d_full = (outcome_probs(_FD_STEP) - outcome_probs(-_FD_STEP)) / (2.0 * _FD_STEP)
    if np.any((p0 > 0.0) & (p0 < 1e-9)):
        half = _FD_STEP / 2.0
        d_half = (outcome_probs(half) - outcome_probs(-half)) / (2.0 * half)
        d_full = (4.0 * d_half - d_full) / 3.0
    keep = p0 > 1e-12
    dtheta = d_full[keep] / sensors
    return float(np.sum(dtheta * dtheta / p0[keep]))
