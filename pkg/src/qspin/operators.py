"""Full-space operators from local terms: assembly, splitting, commutators, fluxes."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .backend import embed_dense, subspace_indices
from .errors import DimensionMismatch
from .lattice import LatticeSpec, Partition, complement_sites, validate_partition

HERMITICITY_TOL = 1e-12

SI = np.eye(2, dtype=np.complex128)
SX = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SY = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SZ = np.array([[1, 0], [0, -1]], dtype=np.complex128)


def max_abs(a: np.ndarray) -> float:
    """Max-entry norm; 0 for empty arrays."""
    return float(np.max(np.abs(a))) if a.size else 0.0


def hermiticity_defect(a: np.ndarray) -> float:
    return max_abs(a - a.conj().T)


def require_hermitian(a: np.ndarray, tol: float = HERMITICITY_TOL, what: str = "matrix") -> None:
    defect = hermiticity_defect(a)
    if defect > tol:
        raise ValueError(f"{what} is not self-adjoint (defect {defect:.3e} > {tol:.1e})")


class LocalTerm:
    """A self-adjoint matrix supported on a finite set of sites.

    The matrix axes follow the support's sites in increasing site index,
    consistent with the global ordering convention.  The stored matrix is
    symmetrized, so sums of terms stay exactly self-adjoint entrywise.
    """

    __slots__ = ("support", "matrix")

    def __init__(self, support: Iterable[int], matrix: np.ndarray):
        self.support = tuple(sorted(int(s) for s in support))
        if len(set(self.support)) != len(self.support):
            raise ValueError(f"duplicate sites in support {self.support}")
        mat = np.ascontiguousarray(matrix, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"term matrix must be square, got shape {mat.shape}")
        require_hermitian(mat, what=f"term on {self.support}")
        self.matrix = (mat + mat.conj().T) / 2.0

    def __repr__(self) -> str:
        return f"LocalTerm(support={self.support}, dim={self.matrix.shape[0]})"


class Interaction:
    """A finite list of local terms; duplicate supports simply add."""

    __slots__ = ("terms",)

    def __init__(self, terms: Iterable[LocalTerm]):
        self.terms = tuple(terms)

    def __iter__(self):
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __repr__(self) -> str:
        return f"Interaction({len(self.terms)} terms)"


# ---------------------------------------------------------------------------
# Embedding and assembly
# ---------------------------------------------------------------------------

def _check_support(term: LocalTerm, lattice: LatticeSpec) -> None:
    for s in term.support:
        if not 0 <= s < lattice.n_sites:
            raise DimensionMismatch(
                f"term support {term.support} names site {s} outside the lattice"
            )
    expected = 1
    for s in term.support:
        expected *= lattice.local_dims[s]
    if term.matrix.shape[0] != expected:
        raise DimensionMismatch(
            f"term on {term.support} has matrix dimension {term.matrix.shape[0]},"
            f" expected {expected}"
        )


def embed(term: LocalTerm, lattice: LatticeSpec) -> np.ndarray:
    """Full-space operator acting as the term on its support, identity elsewhere."""
    _check_support(term, lattice)
    env_sites = tuple(s for s in lattice.sites if s not in set(term.support))
    sup_idx = subspace_indices(term.support, lattice.local_dims, lattice.strides)
    env_idx = subspace_indices(env_sites, lattice.local_dims, lattice.strides)
    return embed_dense(term.matrix, sup_idx, env_idx, lattice.dim)


def embed_in_sites(term: LocalTerm, lattice: LatticeSpec, sites: Sequence[int]) -> np.ndarray:
    """Embed a term into the subspace spanned by ``sites`` only.

    The result is a ``prod(local_dims[sites])``-dimensional matrix, indexed
    big-endian over ``sites`` in ascending site order.  Used to build
    region-local Hamiltonians.
    """
    sites = tuple(sorted(int(s) for s in sites))
    pos = {s: k for k, s in enumerate(sites)}
    for s in term.support:
        if s not in pos:
            raise DimensionMismatch(
                f"term support {term.support} is not contained in sites {sites}"
            )
    sub_lattice = LatticeSpec([lattice.local_dims[s] for s in sites])
    moved = LocalTerm([pos[s] for s in term.support], term.matrix)
    return embed(moved, sub_lattice)


def assemble_hamiltonian(interaction: Interaction, lattice: LatticeSpec) -> np.ndarray:
    """Sum of all embedded terms (zero operator for an empty interaction)."""
    acc = np.zeros((lattice.dim, lattice.dim), dtype=np.complex128)
    for term in interaction:
        acc += embed(term, lattice)
    return acc


def split_hamiltonian(
    interaction: Interaction,
    partition: Partition,
    *,
    h_equals_total: bool = False,
) -> tuple[list[np.ndarray], np.ndarray]:
    """Route terms into per-region pieces plus the coupling remainder.

    Returns ``(H_list, h)`` where ``H_list[a]`` sums the embedded terms whose
    support lies inside region ``a`` and ``h`` sums the terms straddling two
    or more regions, so that ``sum(H_list) + h`` reproduces the assembled
    Hamiltonian term by term.  With ``h_equals_total`` every term is routed
    to ``h`` and all regional pieces are zero (the splitting is not unique;
    this is the other canonical choice).
    """
    lattice = partition.lattice
    validate_partition(lattice, partition)
    zeros = lambda: np.zeros((lattice.dim, lattice.dim), dtype=np.complex128)
    parts = [zeros() for _ in partition.regions]
    h = zeros()
    site_region = {s: a for a, region in enumerate(partition.regions) for s in region}
    for term in interaction:
        owners = {site_region[s] for s in term.support}
        if not h_equals_total and len(owners) == 1:
            parts[owners.pop()] += embed(term, lattice)
        else:
            h += embed(term, lattice)
    return parts, h


def region_hamiltonian(interaction: Interaction, partition: Partition, a: int) -> np.ndarray:
    """Region-local matrix of all terms supported inside region ``a``.

    This is the same operator as ``split_hamiltonian(...)[0][a]`` before
    embedding, expressed on the region's own Hilbert space.
    """
    lattice = partition.lattice
    validate_partition(lattice, partition)
    region = partition.regions[a]
    dim = 1
    for s in region:
        dim *= lattice.local_dims[s]
    acc = np.zeros((dim, dim), dtype=np.complex128)
    region_set = set(region)
    for term in interaction:
        if set(term.support) <= region_set:
            acc += embed_in_sites(term, lattice, region)
    return acc


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``a @ b - b @ a``."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"commutator shapes differ: {a.shape} vs {b.shape}")
    return a @ b - b @ a


def flux_operator(interaction: Interaction, partition: Partition, a: int) -> np.ndarray:
    """Energy-transfer rate operator for region ``a``: ``i [H, H_a]``.

    Self-adjoint; since operators on disjoint site sets commute, only the
    coupling terms contribute, so the same operator is obtained from the
    remainder ``h`` alone.
    """
    lattice = partition.lattice
    parts, _ = split_hamiltonian(interaction, partition)
    total = assemble_hamiltonian(interaction, lattice)
    flux = 1j * commutator(total, parts[a])
    return (flux + flux.conj().T) / 2.0


# ---------------------------------------------------------------------------
# Interaction presets
# ---------------------------------------------------------------------------

def _require_qubits(lattice: LatticeSpec, name: str) -> None:
    if any(d != 2 for d in lattice.local_dims):
        raise DimensionMismatch(f"preset '{name}' requires spin-1/2 sites everywhere")


def _chain_bonds(lattice: LatticeSpec) -> list[tuple[int, int]]:
    return [(i, i + 1) for i in range(lattice.n_sites - 1)]


def xx_chain(lattice: LatticeSpec, coupling: float = 1.0) -> Interaction:
    """Open chain with sigma_x sigma_x + sigma_y sigma_y on every bond."""
    _require_qubits(lattice, "xx")
    bond = np.kron(SX, SX) + np.kron(SY, SY)
    return Interaction(LocalTerm(b, coupling * bond) for b in _chain_bonds(lattice))


def xxz_chain(lattice: LatticeSpec, delta: float, coupling: float = 1.0) -> Interaction:
    """XX chain plus an anisotropic sigma_z sigma_z piece on every bond."""
    _require_qubits(lattice, "xxz")
    bond = np.kron(SX, SX) + np.kron(SY, SY) + delta * np.kron(SZ, SZ)
    return Interaction(LocalTerm(b, coupling * bond) for b in _chain_bonds(lattice))


def tfim_chain(lattice: LatticeSpec, g: float, coupling: float = 1.0) -> Interaction:
    """Transverse-field Ising chain: -J sigma_z sigma_z bonds, -g sigma_x fields."""
    _require_qubits(lattice, "tfim")
    terms = [LocalTerm(b, -coupling * np.kron(SZ, SZ)) for b in _chain_bonds(lattice)]
    terms += [LocalTerm((i,), -g * SX) for i in lattice.sites]
    return Interaction(terms)


def heisenberg_chain(lattice: LatticeSpec, coupling: float = 1.0) -> Interaction:
    """Isotropic chain: sigma.sigma on every bond."""
    _require_qubits(lattice, "heisenberg")
    bond = np.kron(SX, SX) + np.kron(SY, SY) + np.kron(SZ, SZ)
    return Interaction(LocalTerm(b, coupling * bond) for b in _chain_bonds(lattice))


PRESETS = {
    "xx": xx_chain,
    "xxz": xxz_chain,
    "tfim": tfim_chain,
    "heisenberg": heisenberg_chain,
}


def random_hermitian(dim: int, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return scale * (g + g.conj().T) / 2.0


def random_nn_interaction(
    lattice: LatticeSpec,
    rng: np.random.Generator,
    *,
    bond_scale: float = 1.0,
    field_scale: float = 0.5,
) -> Interaction:
    """Random self-adjoint nearest-neighbor bonds plus on-site fields."""
    terms = []
    dims = lattice.local_dims
    for i, j in _chain_bonds(lattice):
        terms.append(LocalTerm((i, j), random_hermitian(dims[i] * dims[j], rng, bond_scale)))
    if field_scale:
        for i in lattice.sites:
            terms.append(LocalTerm((i,), random_hermitian(dims[i], rng, field_scale)))
    return Interaction(terms)
