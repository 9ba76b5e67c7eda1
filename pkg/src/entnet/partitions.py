"""Choosing the GHZ grouping that maximises snapshot QFI.

Given m successful links, the hub must decide how to partition them into
GHZ groups (leaving the rest local).  This module provides the exhaustive
search over integer partitions with parts >= 2, the cheaper near-uniform
heuristic family, and an exhaustive set-partition search for links with
unequal fidelities.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterator, Sequence

from .core import EigenSpec, GhzPartition, snapshot_qfi_uniform, snapshot_qfi_werner
from .errors import SizeLimitError

__all__ = [
    "SearchMethod",
    "PartitionSearchResult",
    "enumerate_partitions",
    "optimal_partition",
    "heuristic_partition",
    "optimal_partition_mixed",
]

# Exhaustive integer-partition search stays fast up to here; beyond it use
# the heuristic.  The set-partition search is Bell-number bounded.
MAX_EXHAUSTIVE_LINKS = 40
MAX_MIXED_LINKS = 10


class SearchMethod(Enum):
    EXHAUSTIVE = "exhaustive"
    HEURISTIC = "heuristic"


@dataclass(frozen=True)
class PartitionSearchResult:
    best: GhzPartition
    qfi: float
    candidates_evaluated: int
    method: SearchMethod
    # Link indices per group, canonically ordered; only set by the
    # mixed-fidelity search where the assignment matters.
    group_members: tuple[tuple[int, ...], ...] | None = None


def _parts_descending(remaining: int, max_part: int) -> Iterator[tuple[int, ...]]:
    yield ()
    for part in range(min(remaining, max_part), 1, -1):
        for rest in _parts_descending(remaining - part, part):
            yield (part,) + rest


def enumerate_partitions(m: int, *, total_sensors: int | None = None) -> list[GhzPartition]:
    """All GHZ groupings of at most m links: multisets of parts >= 2, sum <= m.

    Includes the empty (all-local) grouping.  Output order is canonical:
    by group count, then lexicographically.
    """
    if m < 0:
        raise ValueError(f"link count must be non-negative, got {m}")
    total = m if total_sensors is None else total_sensors
    sizes = sorted(set(_parts_descending(m, m)), key=lambda s: (len(s), s))
    return [GhzPartition(s, total) for s in sizes]


def _pick_best(
    sizes_list: Sequence[tuple[int, ...]],
    sensors: int,
    fidelity: float,
    eig: EigenSpec,
    method: SearchMethod,
) -> PartitionSearchResult:
    best_sizes: tuple[int, ...] | None = None
    best_key: tuple[float, int, tuple[int, ...]] | None = None
    best_qfi = 0.0
    for sizes in sizes_list:
        part = GhzPartition(sizes, sensors)
        qfi = snapshot_qfi_uniform(sensors, part, fidelity, eig)
        # Ties: fewer groups first, then lexicographically largest sizes.
        key = (qfi, -len(sizes), sizes)
        if best_key is None or key > best_key:
            best_key, best_sizes, best_qfi = key, sizes, qfi
    assert best_sizes is not None
    return PartitionSearchResult(
        best=GhzPartition(best_sizes, sensors),
        qfi=best_qfi,
        candidates_evaluated=len(sizes_list),
        method=method,
    )


def optimal_partition(
    m: int,
    sensors: int,
    fidelity: float,
    eig: EigenSpec = EigenSpec(),
) -> PartitionSearchResult:
    """Exhaustive argmax of the snapshot QFI over all groupings of m links."""
    if not 0 <= m <= sensors:
        raise ValueError(f"need 0 <= m <= sensors, got m={m}, sensors={sensors}")
    if m > MAX_EXHAUSTIVE_LINKS:
        raise SizeLimitError(
            f"exhaustive search is capped at m={MAX_EXHAUSTIVE_LINKS}; "
            "use heuristic_partition beyond that"
        )
    if not 0.0 <= fidelity <= 1.0:
        raise ValueError(f"fidelity must be in [0, 1], got {fidelity}")
    sizes_list = [p.group_sizes for p in enumerate_partitions(m)]
    return _pick_best(sizes_list, sensors, fidelity, eig, SearchMethod.EXHAUSTIVE)


def _heuristic_family(m: int) -> list[tuple[int, ...]]:
    """Near-uniform groupings: alpha copies of z plus beta copies of z - 1.

    Augmented with the (3, ..., 3, 2) ladder relevant when m mod 3 == 2,
    the lone pair (2), and the all-local option.
    """
    sizes: set[tuple[int, ...]] = {(), (2,)}
    reps = 1
    while 3 * reps + 2 <= m:
        sizes.add((3,) * reps + (2,))
        reps += 1
    for z in range(3, m + 1):
        for alpha in range(1, m // z + 1):
            used = alpha * z
            for beta in range((m - used) // (z - 1) + 1):
                sizes.add((z,) * alpha + (z - 1,) * beta)
    return sorted(sizes, key=lambda s: (len(s), s))


def heuristic_partition(
    m: int,
    fidelity: float,
    sensors: int | None = None,
    eig: EigenSpec = EigenSpec(),
) -> PartitionSearchResult:
    """Best grouping within the near-uniform heuristic family.

    The winning sizes do not depend on the sensor count, which only
    rescales the reported QFI; ``sensors`` defaults to m.
    """
    if m < 2:
        raise ValueError(f"heuristic search needs m >= 2, got {m}")
    if not 0.0 <= fidelity <= 1.0:
        raise ValueError(f"fidelity must be in [0, 1], got {fidelity}")
    total = m if sensors is None else sensors
    if total < m:
        raise ValueError(f"sensors={total} cannot host m={m} links")
    return _pick_best(_heuristic_family(m), total, fidelity, eig, SearchMethod.HEURISTIC)


def _set_partitions(count: int) -> Iterator[list[list[int]]]:
    """All set partitions of range(count), in a deterministic order."""
    if count == 0:
        yield []
        return
    first = count - 1
    for blocks in _set_partitions(count - 1):
        for i in range(len(blocks)):
            yield blocks[:i] + [blocks[i] + [first]] + blocks[i + 1 :]
        yield blocks + [[first]]


def optimal_partition_mixed(
    fidelities: Sequence[float],
    sensors: int,
    eig: EigenSpec = EigenSpec(),
) -> PartitionSearchResult:
    """Exhaustive search over set partitions of links with unequal fidelities.

    Singleton blocks drop their link (the sensor probes locally); larger
    blocks become GHZ groups carrying their links' fidelities.  Bounded at
    10 links by the Bell-number growth; beyond that fall back to Monte
    Carlo or the uniform heuristic.
    """
    m = len(fidelities)
    if m > MAX_MIXED_LINKS:
        raise SizeLimitError(
            f"set-partition search is capped at {MAX_MIXED_LINKS} links, got {m}; "
            "use Monte Carlo or heuristic_partition instead"
        )
    if m > sensors:
        raise ValueError(f"sensors={sensors} cannot host {m} links")
    fids = [float(f) for f in fidelities]
    for f in fids:
        if not 0.0 <= f <= 1.0:
            raise ValueError(f"fidelity must be in [0, 1], got {f}")

    best_key: tuple[float, int, tuple[int, ...]] | None = None
    best_qfi = 0.0
    best_members: tuple[tuple[int, ...], ...] = ()
    evaluated = 0
    for blocks in _set_partitions(m):
        groups = [sorted(b) for b in blocks if len(b) >= 2]
        groups.sort(key=lambda b: (-len(b), b))
        sizes = tuple(len(b) for b in groups)
        part = GhzPartition(sizes, sensors)
        qfi = snapshot_qfi_werner(sensors, part, [[fids[i] for i in b] for b in groups], eig)
        evaluated += 1
        key = (qfi, -len(sizes), sizes)
        if best_key is None or key > best_key:
            best_key = key
            best_qfi = qfi
            best_members = tuple(tuple(b) for b in groups)
    return PartitionSearchResult(
        best=GhzPartition(tuple(len(b) for b in best_members), sensors),
        qfi=best_qfi,
        candidates_evaluated=evaluated,
        method=SearchMethod.EXHAUSTIVE,
        group_members=best_members,
    )
