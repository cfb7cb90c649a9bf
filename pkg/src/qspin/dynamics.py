"""Unitary evolution, exact finite-horizon time averaging, and dephasing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch
from .operators import max_abs
from .states import SpectralDecomposition, real_expectation


@dataclass(frozen=True)
class EvolutionCache:
    """Eigendecomposition of a Hamiltonian, reused across all time points.

    ``deg_tol`` is the energy-gap threshold below which two levels count as
    degenerate; ``clusters`` labels each level with its degenerate block,
    found by gap clustering on the sorted spectrum.
    """

    energies: np.ndarray
    modes: np.ndarray  # eigenvector columns, unitary
    deg_tol: float
    clusters: np.ndarray

    @classmethod
    def from_hamiltonian(cls, hamiltonian: np.ndarray) -> "EvolutionCache":
        dec = SpectralDecomposition.from_hermitian(
            np.asarray(hamiltonian, dtype=np.complex128)
        )
        deg_tol = 1e-10 * max(1.0, max_abs(hamiltonian))
        gaps = np.diff(dec.eigenvalues)
        clusters = np.concatenate(([0], np.cumsum(gaps > deg_tol)))
        return cls(dec.eigenvalues, dec.eigenvectors, deg_tol, clusters)

    @property
    def dim(self) -> int:
        return self.energies.size

    def to_eigenbasis(self, psi: np.ndarray) -> np.ndarray:
        return self.modes.conj().T @ psi @ self.modes

    def from_eigenbasis(self, m: np.ndarray) -> np.ndarray:
        out = self.modes @ m @ self.modes.conj().T
        return (out + out.conj().T) / 2.0


def _check_dim(psi: np.ndarray, cache: EvolutionCache) -> None:
    if psi.shape != (cache.dim, cache.dim):
        raise DimensionMismatch(
            f"state shape {psi.shape} does not match Hamiltonian dimension {cache.dim}"
        )


def evolve(psi0: np.ndarray, cache: EvolutionCache, t: float) -> np.ndarray:
    """Unitary conjugation to time ``t``: phase each energy-basis entry."""
    _check_dim(psi0, cache)
    phases = np.exp(-1j * t * cache.energies)
    m = cache.to_eigenbasis(psi0)
    m *= phases[:, None] * phases.conj()[None, :]
    return cache.from_eigenbasis(m)


def cesaro_average(psi0: np.ndarray, cache: EvolutionCache, horizon: float) -> np.ndarray:
    """Exact time average ``(1/T) int_0^T psi(t) dt`` in the energy basis.

    Entry ``(j, k)`` picks up the closed-form factor
    ``(exp(-i x) - 1) / (-i x)`` with ``x = (E_j - E_k) T``, evaluated
    stably as ``exp(-i x/2) sinc(x / 2 pi)``; the result is a convex average
    of valid states and hence itself a valid density matrix.
    """
    if horizon <= 0:
        raise ValueError("averaging horizon must be positive")
    _check_dim(psi0, cache)
    x = (cache.energies[:, None] - cache.energies[None, :]) * horizon
    factor = np.exp(-0.5j * x) * np.sinc(x / (2.0 * np.pi))
    m = cache.to_eigenbasis(psi0)
    m *= factor
    return cache.from_eigenbasis(m)


def dephase(psi0: np.ndarray, cache: EvolutionCache) -> np.ndarray:
    """Drop coherences between distinct energy levels; keep degenerate blocks.

    This is the infinite-horizon limit of :func:`cesaro_average` for a finite
    spectrum: the result commutes with the Hamiltonian and is invariant under
    evolution.
    """
    _check_dim(psi0, cache)
    mask = cache.clusters[:, None] == cache.clusters[None, :]
    m = cache.to_eigenbasis(psi0)
    m *= mask
    return cache.from_eigenbasis(m)


def region_energy(psi: np.ndarray, h_a: np.ndarray) -> float:
    """Expectation value ``Tr(psi H_a)``; its time derivative is the heat flux."""
    if psi.shape != h_a.shape:
        raise DimensionMismatch(f"shapes differ: {psi.shape} vs {h_a.shape}")
    val = complex(np.einsum("ij,ji->", psi, h_a))
    return real_expectation(val, 1e-11, "region energy")
