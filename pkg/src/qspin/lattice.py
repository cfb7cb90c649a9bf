"""Finite site sets and their split into a small system plus reservoirs."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .backend import site_strides
from .errors import CapacityError, CoverageError, EmptyRegionError, OverlapError

#: Largest full-space dimension accepted at construction.  Dense
#: eigendecomposition is the engine here, and it is already impractical well
#: below this; failing early beats exhausting memory later.
CAPACITY_LIMIT = 2 ** 24


class LatticeSpec:
    """Ordered finite set of sites 0..n-1 with a local Hilbert dimension each.

    The full space is the tensor product over sites in increasing site index,
    site 0 being the leftmost (most significant) factor; every embedding and
    partial trace in the package uses this one convention.
    """

    __slots__ = ("local_dims", "dim", "strides")

    def __init__(self, local_dims: Sequence[int]):
        dims = tuple(int(d) for d in local_dims)
        if not dims:
            raise ValueError("lattice needs at least one site")
        for x, d in enumerate(dims):
            if d < 2:
                raise ValueError(f"site {x}: local dimension must be >= 2, got {d}")
        total = 1
        for d in dims:
            total *= d
            if total > CAPACITY_LIMIT:
                raise CapacityError(
                    f"full-space dimension exceeds capacity limit {CAPACITY_LIMIT}"
                    f" ({len(dims)} sites, partial product {total})"
                )
        self.local_dims = dims
        self.dim = total
        self.strides = site_strides(dims)

    @classmethod
    def uniform(cls, n_sites: int, local_dim: int = 2) -> "LatticeSpec":
        """Chain of ``n_sites`` identical sites (qubits by default)."""
        return cls([local_dim] * n_sites)

    @property
    def n_sites(self) -> int:
        return len(self.local_dims)

    @property
    def sites(self) -> range:
        return range(self.n_sites)

    def __eq__(self, other) -> bool:
        return isinstance(other, LatticeSpec) and self.local_dims == other.local_dims

    def __hash__(self) -> int:
        return hash(self.local_dims)

    def __repr__(self) -> str:
        return f"LatticeSpec(local_dims={self.local_dims})"


class Partition:
    """Grouping of a lattice's sites into regions; region 0 is the small system.

    Regions may be non-contiguous site sets.  Construction normalizes and
    stores; :func:`validate_partition` performs the disjoint-cover checks and
    records the region dimensions.
    """

    __slots__ = ("lattice", "regions", "_dims")

    def __init__(self, lattice: LatticeSpec, regions: Sequence[Sequence[int]]):
        if not regions:
            raise ValueError("partition needs at least one region")
        self.lattice = lattice
        self.regions = tuple(tuple(sorted(int(s) for s in r)) for r in regions)
        self._dims: tuple[int, ...] | None = None

    @property
    def n_regions(self) -> int:
        return len(self.regions)

    @property
    def validated(self) -> bool:
        return self._dims is not None

    def __repr__(self) -> str:
        return f"Partition(regions={self.regions})"


def validate_partition(lattice: LatticeSpec, partition: Partition) -> Partition:
    """Check that the regions disjointly cover the lattice; record dimensions.

    Returns the same object, so validating twice is a no-op.
    """
    if partition.lattice != lattice:
        raise ValueError("partition was built for a different lattice")
    if partition.validated:
        return partition

    for a, region in enumerate(partition.regions):
        if not region:
            raise EmptyRegionError(f"region {a} is empty")

    seen: dict[int, int] = {}
    for a, region in enumerate(partition.regions):
        for s in region:
            if s in seen:
                raise OverlapError(f"site {s} appears in regions {seen[s]} and {a}")
            if not 0 <= s < lattice.n_sites:
                raise CoverageError(f"region {a} names site {s} outside the lattice")
            seen[s] = a
    missing = [s for s in lattice.sites if s not in seen]
    if missing:
        raise CoverageError(f"sites {missing} belong to no region")

    dims = []
    for region in partition.regions:
        d = 1
        for s in region:
            d *= lattice.local_dims[s]
        dims.append(d)
    partition._dims = tuple(dims)
    return partition


def region_dimensions(partition: Partition) -> list[int]:
    """Hilbert dimension of each region of a validated partition."""
    if not partition.validated:
        validate_partition(partition.lattice, partition)
    assert partition._dims is not None
    return list(partition._dims)


def complement_sites(partition: Partition, a: int) -> tuple[int, ...]:
    """Ascending site list of everything outside region ``a``."""
    inside = set(partition.regions[a])
    return tuple(s for s in partition.lattice.sites if s not in inside)


def region_subindices(partition: Partition, a: int) -> tuple[np.ndarray, np.ndarray]:
    """Full-space offset tables (region, complement) for region ``a``."""
    from .backend import subspace_indices  # local import keeps module load light

    lat = partition.lattice
    keep = subspace_indices(partition.regions[a], lat.local_dims, lat.strides)
    env = subspace_indices(complement_sites(partition, a), lat.local_dims, lat.strides)
    return keep, env
