"""Measuring the probes: local-basis Fisher information and the optimal POVM.

Local |+>/|-> measurements on every sensor are cheap but parameter
dependent: each GHZ group contributes through the sine of its summed
phases, and only perfect links make the dependence cancel.  The
QFI-attaining projective measurement comes from the eigenbasis of the
symmetric logarithmic derivative and needs the phases as an input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np

from .core import EigenSpec, GhzPartition
from .errors import SizeLimitError
from .oracle import MAX_QUBITS, PhaseVector, phase_diagonal

__all__ = [
    "LocalCfiInput",
    "local_cfi",
    "local_cfi_max",
    "cfi_threshold",
    "sld_povm",
]


@dataclass(frozen=True)
class LocalCfiInput:
    """Arguments of the local-measurement CFI.

    ``werner_params_per_group`` lists one Werner parameter per link, one
    sequence per GHZ group, aligned with the canonical (non-increasing)
    partition order; group nu reads its phases from the contiguous sensor
    slots starting at ``partition.offsets()[nu]``.
    """

    sensors: int
    partition: GhzPartition
    werner_params_per_group: tuple[tuple[float, ...], ...]
    phis: PhaseVector
    eig: EigenSpec = EigenSpec()

    def __post_init__(self) -> None:
        groups = tuple(tuple(float(x) for x in g) for g in self.werner_params_per_group)
        object.__setattr__(self, "werner_params_per_group", groups)
        if self.partition.total_sensors != self.sensors:
            raise ValueError("partition sized for a different sensor count")
        if len(self.phis) != self.sensors:
            raise ValueError("need one phase per sensor")
        sizes = tuple(len(g) for g in groups)
        if sizes != self.partition.group_sizes:
            raise ValueError(
                f"Werner-parameter groups of sizes {sizes} do not match "
                f"partition {self.partition.group_sizes}"
            )
        for g in groups:
            for x in g:
                if not -1.0 / 3.0 <= x <= 1.0:
                    raise ValueError(f"Werner parameter must be in [-1/3, 1], got {x}")


def _group_term(x_sq_product: float, phase_sum: float, n: int, gap: float) -> float:
    if x_sq_product == 1.0:
        # Perfect links: the phase dependence cancels, sin^2/(1 - cos^2) = 1.
        return float(n * n)
    s = math.sin(gap * phase_sum) ** 2
    c = math.cos(gap * phase_sum) ** 2
    return n * n * x_sq_product * s / (1.0 - x_sq_product * c)


def local_cfi(inp: LocalCfiInput) -> float:
    """Fisher information of measuring every sensor in the |+>/|-> basis."""
    gap = inp.eig.delta_lambda
    offsets = inp.partition.offsets()
    acc = float(inp.partition.local_count)
    for nu, group in enumerate(inp.werner_params_per_group):
        n = len(group)
        x_sq = 1.0
        for x in group:
            x_sq *= x * x
        phase_sum = sum(inp.phis.phis[offsets[nu] : offsets[nu] + n])
        acc += _group_term(x_sq, phase_sum, n, gap)
    return inp.eig.gap_squared * acc / (inp.sensors * inp.sensors)


def local_cfi_max(
    sensors: int,
    partition: GhzPartition,
    werner_params_per_group: Sequence[Sequence[float]],
    eig: EigenSpec = EigenSpec(),
) -> float:
    """Local-measurement CFI at its best phases.

    Maximised when every group's summed phase sits at a half-integer
    multiple of pi over the gap, where sin^2 = 1 and cos^2 = 0.
    """
    groups = tuple(tuple(float(x) for x in g) for g in werner_params_per_group)
    sizes = tuple(sorted((len(g) for g in groups), reverse=True))
    if sizes != partition.group_sizes:
        raise ValueError(
            f"Werner-parameter groups of sizes {sizes} do not match partition "
            f"{partition.group_sizes}"
        )
    if partition.total_sensors != sensors:
        raise ValueError("partition sized for a different sensor count")
    acc = float(partition.local_count)
    for group in groups:
        x_sq = 1.0
        for x in group:
            if not -1.0 / 3.0 <= x <= 1.0:
                raise ValueError(f"Werner parameter must be in [-1/3, 1], got {x}")
            x_sq *= x * x
        acc += len(group) ** 2 * x_sq
    return eig.gap_squared * acc / (sensors * sensors)


def cfi_threshold(n: int) -> float:
    """Fidelity where an n-group's best local-measurement CFI ties n local probes.

    Solving x^(2n) n^2 = n gives x = n^(-1/(2n)); returns the matching
    fidelity (3x + 1)/4.  Sits above the QFI usefulness threshold: local
    measurements need better links than the probe itself does.
    """
    if n < 2:
        raise ValueError(f"a GHZ group needs n >= 2, got {n}")
    x = n ** (-1.0 / (2.0 * n))
    return (3.0 * x + 1.0) / 4.0


def _conditioned_vector(n: int, d: int) -> np.ndarray:
    """The SLD eigenvector on an n-qubit group: equal-weight all-zeros and
    all-ones components with a +/- i relative phase."""
    vec = np.zeros(2**n, dtype=complex)
    sign = -1.0 if d else 1.0
    vec[0] = (1.0 + sign * 1j) / 2.0
    vec[-1] = (1.0 - sign * 1j) / 2.0
    return vec


def sld_povm(
    partition: GhzPartition,
    phis: PhaseVector,
    eig: EigenSpec = EigenSpec(),
) -> list[np.ndarray]:
    """QFI-attaining projective measurement for a snapshot probe.

    Per GHZ group (and per local sensor) the SLD eigenbasis splits into
    the two phase-sensitive vectors above plus the group's orthogonal
    complement, on which the SLD vanishes.  The returned elements are all
    products of these per-block projectors, conjugated by the phase
    unitary; they sum to the identity exactly.  A single lumped completion
    would merge complement sectors with unequal SLD eigenvalues and fall
    short of the QFI on mixed multi-group probes, so the completion is
    kept block-resolved.  The measurement depends on the phases;
    sequential self-referential estimation is out of scope.
    """
    sensors = partition.total_sensors
    if sensors > MAX_QUBITS:
        raise SizeLimitError(f"dense engine is capped at {MAX_QUBITS} qubits")
    if len(phis) != sensors:
        raise ValueError("need one phase per sensor")
    blocks = list(partition.group_sizes) + [1] * partition.local_count
    per_block: list[list[np.ndarray]] = []
    for n in blocks:
        c0 = _conditioned_vector(n, 0)
        c1 = _conditioned_vector(n, 1)
        options = [np.outer(c0, c0.conj()), np.outer(c1, c1.conj())]
        if n >= 2:
            options.append(np.eye(2**n) - options[0] - options[1])
        per_block.append(options)
    diag = phase_diagonal(phis, eig)
    elements: list[np.ndarray] = []
    for choice in product(*per_block):
        proj = np.ones((1, 1), dtype=complex)
        for block_proj in choice:
            proj = np.kron(proj, block_proj)
        elements.append((diag[:, None] * proj) * diag.conj()[None, :])
    return elements
