"""Closed-form quantum Fisher information for GHZ-diagonal probe states.

Probe states are built from Werner links shared between sensors and a
central hub: the hub projects disjoint groups of links into GHZ-diagonal
states held by the sensors, and every sensor without a grouped link probes
with a local |+> state.  The estimated quantity is the average of the
per-sensor phases, so the scalar QFI is the Jacobian contraction of the
QFI matrix with the uniform weight vector (1/S, ..., 1/S).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

__all__ = [
    "EigenSpec",
    "WernerLink",
    "GhzPartition",
    "GhzDiagonalCoeffs",
    "werner_from_fidelity",
    "fidelity_from_werner",
    "ghz_coeffs_equal",
    "ghz_coeffs_mixed",
    "coefficient_c",
    "coefficient_c_uniform",
    "snapshot_qfi_pure",
    "snapshot_qfi_werner",
    "snapshot_qfi_uniform",
]

# Werner parameter range reachable from fidelities in [0, 1].
_X_MIN = -1.0 / 3.0


@dataclass(frozen=True)
class EigenSpec:
    """Eigenvalues of the per-qubit generator h = diag(lambda0, lambda1).

    Only the gap ``delta_lambda`` enters any Fisher-information formula:
    the identity component of h cancels under conjugation.  lambda0 is
    retained so callers can state their Hamiltonian explicitly.  The
    default gap is 1, the constant scaling used throughout.
    """

    lambda0: float = 0.0
    lambda1: float = 1.0

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lambda0) and math.isfinite(self.lambda1)):
            raise ValueError("eigenvalues must be finite")
        if self.lambda1 == self.lambda0:
            raise ValueError("eigenvalue gap must be nonzero (zero gap makes every QFI zero)")

    @property
    def delta_lambda(self) -> float:
        return self.lambda1 - self.lambda0

    @property
    def gap_squared(self) -> float:
        return self.delta_lambda * self.delta_lambda


@dataclass(frozen=True)
class WernerLink:
    """A sensor-hub link modelled as a Werner state of given fidelity."""

    fidelity: float
    werner_param: float = field(init=False)

    def __post_init__(self) -> None:
        if not 0.0 <= self.fidelity <= 1.0:
            raise ValueError(f"fidelity must be in [0, 1], got {self.fidelity}")
        object.__setattr__(self, "werner_param", (4.0 * self.fidelity - 1.0) / 3.0)


def werner_from_fidelity(fidelity: float) -> WernerLink:
    """Build a Werner link, mapping fidelity F to parameter x = (4F - 1)/3."""
    return WernerLink(fidelity)


def fidelity_from_werner(x: float) -> float:
    """Inverse map from Werner parameter to fidelity, F = (3x + 1)/4."""
    if not _X_MIN <= x <= 1.0:
        raise ValueError(f"Werner parameter must be in [-1/3, 1], got {x}")
    return (3.0 * x + 1.0) / 4.0


@dataclass(frozen=True)
class GhzPartition:
    """Sizes of the disjoint GHZ groups formed from successful links.

    ``group_sizes`` is stored canonically sorted non-increasing, so
    equality is multiset equality.  Sensors not covered by any group
    (``local_count`` of them) use local probes.  Group nu occupies the
    contiguous sensor slots starting at ``offsets()[nu]``.
    """

    group_sizes: tuple[int, ...]
    total_sensors: int

    def __post_init__(self) -> None:
        sizes = tuple(sorted((int(n) for n in self.group_sizes), reverse=True))
        object.__setattr__(self, "group_sizes", sizes)
        if any(n < 2 for n in sizes):
            raise ValueError(f"every GHZ group needs at least 2 links, got {sizes}")
        if self.total_sensors < 0:
            raise ValueError("total_sensors must be non-negative")
        if sum(sizes) > self.total_sensors:
            raise ValueError(
                f"groups {sizes} need {sum(sizes)} sensors but only "
                f"{self.total_sensors} are available"
            )

    @property
    def num_groups(self) -> int:
        return len(self.group_sizes)

    @property
    def grouped_count(self) -> int:
        return sum(self.group_sizes)

    @property
    def local_count(self) -> int:
        """Number of sensors probing locally (u = S - sum of group sizes)."""
        return self.total_sensors - self.grouped_count

    def offsets(self) -> tuple[int, ...]:
        """Starting sensor index of each group (cumulative size prefix)."""
        out = []
        acc = 0
        for n in self.group_sizes:
            out.append(acc)
            acc += n
        return tuple(out)

    def resize(self, total_sensors: int) -> "GhzPartition":
        """Same group sizes embedded in a network of ``total_sensors``."""
        return GhzPartition(self.group_sizes, total_sensors)


@dataclass(frozen=True)
class GhzDiagonalCoeffs:
    """The two GHZ-basis weights that drive the QFI of a projected group.

    ``e00`` weighs the GHZ projector itself and ``e10`` its Z-flipped
    partner; all other GHZ-basis weights cancel pairwise in the QFI.
    """

    e00: float
    e10: float


def _validate_werner_params(xs: Sequence[float]) -> None:
    for x in xs:
        if not _X_MIN <= x <= 1.0:
            raise ValueError(f"Werner parameter must be in [-1/3, 1], got {x}")


def _product_identities(xs: Sequence[float]) -> tuple[float, float]:
    """Return (e00 - e10, e00 + e10) for a projected group of links.

    The difference is the product of the Werner parameters and the sum is
    prod((1 + x)/2) + prod((1 - x)/2); both reduce to the uniform-x closed
    forms when all parameters coincide.
    """
    diff = 1.0
    plus = 1.0
    minus = 1.0
    for x in xs:
        diff *= x
        plus *= (1.0 + x) / 2.0
        minus *= (1.0 - x) / 2.0
    return diff, plus + minus


def ghz_coeffs_equal(x: float, n: int) -> GhzDiagonalCoeffs:
    """GHZ-basis weights for n links sharing one Werner parameter x."""
    if n < 2:
        raise ValueError(f"a GHZ group needs n >= 2, got {n}")
    _validate_werner_params([x])
    spread = ((1.0 + x) ** n + (1.0 - x) ** n) / 2.0**n
    return GhzDiagonalCoeffs(0.5 * (x**n + spread), 0.5 * (-(x**n) + spread))


def ghz_coeffs_mixed(xs: Sequence[float], n: int) -> GhzDiagonalCoeffs:
    """GHZ-basis weights for n links with per-link Werner parameters."""
    if n < 2:
        raise ValueError(f"a GHZ group needs n >= 2, got {n}")
    if len(xs) != n:
        raise ValueError(f"expected {n} Werner parameters, got {len(xs)}")
    _validate_werner_params(xs)
    diff, total = _product_identities(xs)
    return GhzDiagonalCoeffs(0.5 * (total + diff), 0.5 * (total - diff))


def coefficient_c(xs: Sequence[float], n: int) -> float:
    """QFI prefactor of an n-link GHZ group, C = (e00 - e10)^2 / (e00 + e10).

    Equals 1 for perfect links and decays with link mixedness; an n-group
    beats n local probes exactly when C > 1/n.
    """
    if n < 2:
        raise ValueError(f"a GHZ group needs n >= 2, got {n}")
    if len(xs) != n:
        raise ValueError(f"expected {n} Werner parameters, got {len(xs)}")
    _validate_werner_params(xs)
    diff, total = _product_identities(xs)
    # total >= 2 * 2**-n > 0 for x in [0, 1]^n; stays positive on the full
    # Werner range because prod((1 +/- x)/2) >= 0 for |x| <= 1.
    assert total > 0.0, "GHZ weight normalisation must be positive"
    return diff * diff / total


def coefficient_c_uniform(x: float, n: int) -> float:
    """Uniform-fidelity C coefficient, 2^n x^(2n) / ((1-x)^n + (1+x)^n)."""
    if n < 2:
        raise ValueError(f"a GHZ group needs n >= 2, got {n}")
    _validate_werner_params([x])
    return 2.0**n * x ** (2 * n) / ((1.0 - x) ** n + (1.0 + x) ** n)


def _check_partition(sensors: int, partition: GhzPartition) -> None:
    if partition.total_sensors != sensors:
        raise ValueError(
            f"partition is sized for {partition.total_sensors} sensors, not {sensors}"
        )


def snapshot_qfi_pure(
    sensors: int, partition: GhzPartition, eig: EigenSpec = EigenSpec()
) -> float:
    """QFI of a snapshot probe built from perfect links.

    Every group of size n contributes n^2 - n on top of the S baseline of
    the all-local probe; the empty partition therefore gives gap^2 / S.
    """
    _check_partition(sensors, partition)
    acc = float(sensors)
    for n in partition.group_sizes:
        acc += n * n - n
    return eig.gap_squared * acc / (sensors * sensors)


def snapshot_qfi_werner(
    sensors: int,
    partition: GhzPartition,
    fidelities_per_group: Sequence[Sequence[float]],
    eig: EigenSpec = EigenSpec(),
) -> float:
    """QFI of a snapshot probe built from Werner links.

    ``fidelities_per_group`` holds one fidelity per link, one sequence per
    GHZ group; group order is irrelevant (the QFI is a sum over groups)
    but the multiset of group lengths must match the partition.
    """
    _check_partition(sensors, partition)
    lengths = tuple(sorted((len(g) for g in fidelities_per_group), reverse=True))
    if lengths != partition.group_sizes:
        raise ValueError(
            f"fidelity groups of sizes {lengths} do not match partition {partition.group_sizes}"
        )
    acc = float(sensors)
    for group in fidelities_per_group:
        for f in group:
            if not 0.0 <= f <= 1.0:
                raise ValueError(f"fidelity must be in [0, 1], got {f}")
        n = len(group)
        xs = [(4.0 * f - 1.0) / 3.0 for f in group]
        acc += coefficient_c(xs, n) * n * n - n
    return eig.gap_squared * acc / (sensors * sensors)


def snapshot_qfi_uniform(
    sensors: int,
    partition: GhzPartition,
    fidelity: float,
    eig: EigenSpec = EigenSpec(),
) -> float:
    """Snapshot QFI when every link shares the same fidelity."""
    groups = [[fidelity] * n for n in partition.group_sizes]
    return snapshot_qfi_werner(sensors, partition, groups, eig)
