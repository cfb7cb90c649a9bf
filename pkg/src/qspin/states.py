"""Density matrices: Gibbs states, products, partial traces, entropies, logs."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .backend import apply_product_factor, partial_trace_dense, region_index_map
from .errors import DimensionMismatch, NumericalNoiseWarning
from .lattice import Partition, region_dimensions, region_subindices, validate_partition
from .operators import hermiticity_defect, max_abs

#: Eigenvalues below this are treated as exact zeros when a logarithm is
#: needed as an operator.  Entropy sums use the 0 log 0 = 0 convention at the
#: same threshold instead of flooring.
DEFAULT_EIG_FLOOR = 1e-14


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigendecomposition of a self-adjoint matrix, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns

    @classmethod
    def from_hermitian(cls, a: np.ndarray) -> "SpectralDecomposition":
        vals, vecs = np.linalg.eigh(a)
        dec = cls(vals, vecs)
        scale = max_abs(a)
        err = max_abs(dec.reconstruct() - a)
        if scale > 0 and err > 1e-10 * scale:
            raise ValueError(
                f"eigendecomposition reconstruction error {err:.3e}"
                f" exceeds 1e-10 * {scale:.3e}"
            )
        return dec

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T

    def apply(self, fn) -> np.ndarray:
        """``V f(Lambda) V*`` for a scalar function of the eigenvalues."""
        v = self.eigenvectors
        return (v * fn(self.eigenvalues)) @ v.conj().T


def validate_density_matrix(
    rho: np.ndarray,
    *,
    herm_tol: float = 1e-12,
    eig_tol: float = 1e-12,
    trace_tol: float = 1e-12,
) -> np.ndarray:
    """Check self-adjointness, positivity, and unit trace; return the input."""
    defect = hermiticity_defect(rho)
    if defect > herm_tol:
        raise ValueError(f"density matrix not self-adjoint (defect {defect:.3e})")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > trace_tol:
        raise ValueError(f"density matrix trace {tr} is not 1 within {trace_tol:.1e}")
    lo = float(np.linalg.eigvalsh(rho).min())
    if lo < -eig_tol:
        raise ValueError(f"density matrix has eigenvalue {lo:.3e} < -{eig_tol:.1e}")
    return rho


def random_density_matrix(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Full-rank (by default) random state from a complex Ginibre factor."""
    k = dim if rank is None else rank
    g = rng.normal(size=(dim, k)) + 1j * rng.normal(size=(dim, k))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def gibbs(hamiltonian: np.ndarray, beta: float) -> np.ndarray:
    """Thermal state ``exp(-beta H) / Z`` via the spectral decomposition.

    The largest exponent is shifted out before exponentiation, so any finite
    ``beta`` (including 0 and negative values) is overflow-safe.
    """
    dec = SpectralDecomposition.from_hermitian(np.asarray(hamiltonian, dtype=np.complex128))
    exponents = -beta * dec.eigenvalues
    weights = np.exp(exponents - exponents.max())
    weights /= weights.sum()
    v = dec.eigenvectors
    rho = (v * weights) @ v.conj().T
    return (rho + rho.conj().T) / 2.0


def product_state(states: Sequence[np.ndarray], partition: Partition) -> np.ndarray:
    """Assemble the full-space product of one state per region.

    Regions may be non-contiguous; each factor is spread onto its sites by
    index arithmetic under the global site ordering.  The partial trace onto
    any region recovers that region's factor.
    """
    validate_partition(partition.lattice, partition)
    dims = region_dimensions(partition)
    if len(states) != partition.n_regions:
        raise DimensionMismatch(
            f"got {len(states)} states for {partition.n_regions} regions"
        )
    lat = partition.lattice
    out = np.ones((lat.dim, lat.dim), dtype=np.complex128)
    for a, rho in enumerate(states):
        rho = np.asarray(rho, dtype=np.complex128)
        if rho.shape != (dims[a], dims[a]):
            raise DimensionMismatch(
                f"region {a} state has shape {rho.shape}, expected ({dims[a]}, {dims[a]})"
            )
        rmap = region_index_map(
            partition.regions[a], lat.local_dims, lat.strides, lat.dim
        )
        apply_product_factor(out, rho, rmap)
    return out


def partial_trace(psi: np.ndarray, partition: Partition, a: int) -> np.ndarray:
    """Reduce a full-space state to region ``a`` by direct index summation."""
    validate_partition(partition.lattice, partition)
    if psi.shape != (partition.lattice.dim, partition.lattice.dim):
        raise DimensionMismatch(
            f"state shape {psi.shape} does not match lattice dimension"
            f" {partition.lattice.dim}"
        )
    keep, env = region_subindices(partition, a)
    return partial_trace_dense(psi, keep, env)


def von_neumann_entropy(psi: np.ndarray) -> float:
    """Entropy in nats; eigenvalues below the floor contribute 0."""
    vals = np.linalg.eigvalsh(psi)
    vals = vals[vals > DEFAULT_EIG_FLOOR]
    s = float(-(vals * np.log(vals)).sum())
    return max(s, 0.0)


def matrix_log(psi: np.ndarray, floor: float = DEFAULT_EIG_FLOOR) -> tuple[np.ndarray, bool]:
    """Self-adjoint logarithm with eigenvalues clipped at ``floor``.

    Returns ``(log, floored)`` where ``floored`` reports whether any
    eigenvalue was below the floor (the result is then a regularized proxy,
    not the true logarithm).
    """
    if floor <= 0:
        raise ValueError("floor must be positive")
    dec = SpectralDecomposition.from_hermitian(np.asarray(psi, dtype=np.complex128))
    floored = bool(dec.eigenvalues.min() < floor)
    logs = np.log(np.maximum(dec.eigenvalues, floor))
    v = dec.eigenvectors
    out = (v * logs) @ v.conj().T
    return (out + out.conj().T) / 2.0, floored


def relative_entropy(
    rho: np.ndarray,
    sigma: np.ndarray,
    *,
    floor: float = DEFAULT_EIG_FLOOR,
    support_tol: float = 1e-12,
) -> float:
    """``Tr rho (log rho - log sigma)`` in nats; ``inf`` on support violation.

    If ``rho`` carries more than ``support_tol`` weight on the null space of
    ``sigma`` (eigenvalues below ``floor``), the divergence is infinite and
    ``math.inf`` is returned rather than raising.
    """
    if rho.shape != sigma.shape:
        raise DimensionMismatch(f"shapes differ: {rho.shape} vs {sigma.shape}")
    p = np.linalg.eigvalsh(rho)
    p = p[p > floor]
    tr_rho_log_rho = float((p * np.log(p)).sum())

    dec = SpectralDecomposition.from_hermitian(np.asarray(sigma, dtype=np.complex128))
    # weight of rho along each eigenvector of sigma
    overlaps = np.einsum(
        "ji,jk,ki->i", dec.eigenvectors.conj(), rho, dec.eigenvectors
    ).real
    null = dec.eigenvalues < floor
    if overlaps[null].sum() > support_tol:
        return math.inf
    kept = ~null
    tr_rho_log_sigma = float((overlaps[kept] * np.log(dec.eigenvalues[kept])).sum())
    return tr_rho_log_rho - tr_rho_log_sigma


def real_expectation(value: complex, tol: float, what: str) -> float:
    """Real part of a trace that should be real; warn if the residue is large."""
    if abs(value.imag) > tol:
        warnings.warn(
            f"{what}: imaginary residue {value.imag:.3e} exceeds {tol:.1e}",
            NumericalNoiseWarning,
            stacklevel=3,
        )
    return float(value.real)
