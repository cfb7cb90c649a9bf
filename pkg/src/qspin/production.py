"""The three entropy-balance quantities and their per-time-point report.

For a partitioned state, three numbers quantify irreversibility:

* the per-region marginal-entropy rates driven by the coupling term,
* the commutator formula (their sum, one trace against the summed marginal
  logarithms), and
* the temperature-weighted heat-flux sum.

``full_report`` evaluates all of them on a time grid together with the
cross-check diagnostics that tie them to each other.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from .dynamics import EvolutionCache, evolve, region_energy
from .errors import DimensionMismatch
from .lattice import Partition, validate_partition
from .operators import (
    Interaction,
    LocalTerm,
    assemble_hamiltonian,
    commutator,
    embed,
    region_hamiltonian,
    split_hamiltonian,
)
from .states import (
    DEFAULT_EIG_FLOOR,
    gibbs,
    matrix_log,
    partial_trace,
    product_state,
    real_expectation,
    von_neumann_entropy,
)


@dataclass(frozen=True)
class Tolerances:
    """Pass/fail thresholds for the report's cross-check diagnostics."""

    subadditivity_floor: float = -1e-10
    micro_rates_atol: float = 1e-9
    h_total_atol: float = 1e-9
    entropy_drift_atol: float = 1e-9
    positivity_floor: float = -1e-9

    @classmethod
    def from_mapping(cls, data: dict | None) -> "Tolerances":
        if not data:
            return cls()
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown tolerance keys {sorted(unknown)}")
        return cls(**{k: float(v) for k, v in data.items()})


@dataclass
class EPReport:
    """All entropy-balance quantities evaluated at one time point."""

    t: float
    entropy_total: float
    region_entropies: tuple[float, ...]
    gap: float  # sum of marginal entropies minus total entropy
    rates: tuple[float, ...]  # per-region marginal-entropy rates
    e_micro_h: float  # commutator formula against the coupling term
    e_micro_total: float  # same formula against the full Hamiltonian
    e_thermo: float  # temperature-weighted flux sum (reservoirs only)
    fluxes: tuple[float, ...]
    floored_regions: tuple[int, ...]  # regions whose log needed flooring
    checks: dict[str, bool] = field(default_factory=dict)


def product_gibbs_state(
    interaction: Interaction, partition: Partition, betas
) -> np.ndarray:
    """Product of per-region thermal states of the region-local Hamiltonians."""
    betas = _check_betas(betas, partition)
    factors = [
        gibbs(region_hamiltonian(interaction, partition, a), betas[a])
        for a in range(partition.n_regions)
    ]
    return product_state(factors, partition)


def _check_betas(betas, partition: Partition) -> tuple[float, ...]:
    betas = tuple(float(b) for b in betas)
    if len(betas) != partition.n_regions:
        raise DimensionMismatch(
            f"got {len(betas)} inverse temperatures for {partition.n_regions} regions"
        )
    return betas


def _embedded_marginal_logs(psi, partition, floor):
    """Per-region embedded logs of the marginals, plus floored-region list."""
    lattice = partition.lattice
    embedded = []
    entropies = []
    floored_regions = []
    for a in range(partition.n_regions):
        marg = partial_trace(psi, partition, a)
        entropies.append(von_neumann_entropy(marg))
        log_m, floored = matrix_log(marg, floor)
        if floored:
            floored_regions.append(a)
        embedded.append(embed(LocalTerm(partition.regions[a], log_m), lattice))
    return embedded, entropies, floored_regions


def subsystem_entropy_rate(
    psi: np.ndarray,
    h: np.ndarray,
    partition: Partition,
    a: int,
    *,
    floor: float = DEFAULT_EIG_FLOOR,
) -> float:
    """Rate of change of region ``a``'s marginal entropy under generator ``h``.

    Evaluates ``-i Tr(psi [h, L_a])`` with ``L_a`` the embedded logarithm of
    the region's marginal.  If the marginal needed eigenvalue flooring the
    value is still returned but is unreliable; callers that care should
    inspect the flooring through :func:`full_report`.
    """
    validate_partition(partition.lattice, partition)
    marg = partial_trace(psi, partition, a)
    log_m, _ = matrix_log(marg, floor)
    embedded = embed(LocalTerm(partition.regions[a], log_m), partition.lattice)
    val = -1j * complex(np.einsum("ij,ji->", psi @ h - h @ psi, embedded))
    return real_expectation(val, 1e-10, f"entropy rate of region {a}")


def ep_micro(
    psi: np.ndarray,
    generator: np.ndarray,
    partition: Partition,
    *,
    floor: float = DEFAULT_EIG_FLOOR,
) -> float:
    """Commutator formula: ``-i Tr(psi [generator, sum_a L_a])``.

    ``generator`` may be the coupling term or the full Hamiltonian; the two
    give the same value because each regional piece commutes with its own
    marginal's logarithm inside the trace.  The summed log is assembled as
    the sum of embedded per-region logs, which is exact for a product of
    marginals.
    """
    validate_partition(partition.lattice, partition)
    embedded, _, _ = _embedded_marginal_logs(psi, partition, floor)
    total_log = sum(embedded)
    val = -1j * complex(
        np.einsum("ij,ji->", psi @ generator - generator @ psi, total_log)
    )
    return real_expectation(val, 1e-10, "commutator-formula value")


def ep_thermo(
    psi: np.ndarray,
    interaction: Interaction,
    partition: Partition,
    betas,
    *,
    include_small_system: bool = False,
) -> float:
    """Temperature-weighted heat-flux sum ``sum_a beta_a Tr(psi i[H, H_a])``.

    Region 0 (the small system) is skipped unless ``include_small_system``:
    in a stationary state its in- and out-fluxes cancel, so the conventional
    flux bookkeeping weights only the reservoirs.
    """
    betas = _check_betas(betas, partition)
    parts, _ = split_hamiltonian(interaction, partition)
    total = assemble_hamiltonian(interaction, partition.lattice)
    start = 0 if include_small_system else 1
    out = 0.0
    for a in range(start, partition.n_regions):
        flux = 1j * commutator(total, parts[a])
        flux = (flux + flux.conj().T) / 2.0
        out += betas[a] * region_energy(psi, flux)
    return out


def ep_thermo_averaged(
    psi0: np.ndarray,
    interaction: Interaction,
    partition: Partition,
    betas,
    horizon: float,
    *,
    cache: EvolutionCache | None = None,
) -> float:
    """Horizon-averaged flux bookkeeping ``(1/T) sum_a beta_a [E_a(T) - E_a(0)]``.

    All regions participate, the small system included: started from the
    matching product of regional thermal states, the sum telescopes into a
    relative entropy between the evolved and initial state divided by the
    horizon, hence is nonnegative for every horizon.
    """
    if horizon <= 0:
        raise ValueError("averaging horizon must be positive")
    betas = _check_betas(betas, partition)
    parts, _ = split_hamiltonian(interaction, partition)
    if cache is None:
        cache = EvolutionCache.from_hamiltonian(
            assemble_hamiltonian(interaction, partition.lattice)
        )
    psi_t = evolve(psi0, cache, horizon)
    total = 0.0
    for a in range(partition.n_regions):
        total += betas[a] * (region_energy(psi_t, parts[a]) - region_energy(psi0, parts[a]))
    return total / horizon


def full_report(
    psi0: np.ndarray,
    interaction: Interaction,
    partition: Partition,
    betas,
    time_grid,
    *,
    floor: float = DEFAULT_EIG_FLOOR,
    tolerances: Tolerances | None = None,
) -> list[EPReport]:
    """Evaluate every quantity and cross-check on each grid time, in order.

    Diagnostics are attached per point and never abort the series.  The
    Hamiltonian, its splitting, and all flux operators are built once and
    reused across the grid.
    """
    tol = tolerances or Tolerances()
    betas = _check_betas(betas, partition)
    lattice = partition.lattice
    validate_partition(lattice, partition)

    total = assemble_hamiltonian(interaction, lattice)
    parts, h = split_hamiltonian(interaction, partition)
    fluxes_ops = []
    for a in range(partition.n_regions):
        f = 1j * commutator(total, parts[a])
        fluxes_ops.append((f + f.conj().T) / 2.0)
    cache = EvolutionCache.from_hamiltonian(total)

    reports = []
    for t in np.asarray(time_grid, dtype=float):
        psi = evolve(psi0, cache, float(t))
        s_total = von_neumann_entropy(psi)
        embedded, entropies, floored_regions = _embedded_marginal_logs(
            psi, partition, floor
        )
        gap = float(sum(entropies) - s_total)

        comm_h = psi @ h - h @ psi
        comm_total = psi @ total - total @ psi
        rates = tuple(
            real_expectation(
                -1j * complex(np.einsum("ij,ji->", comm_h, la)),
                1e-10,
                f"entropy rate of region {a}",
            )
            for a, la in enumerate(embedded)
        )
        summed_log = sum(embedded)
        e_micro_h = real_expectation(
            -1j * complex(np.einsum("ij,ji->", comm_h, summed_log)),
            1e-10,
            "commutator-formula value (coupling)",
        )
        e_micro_total = real_expectation(
            -1j * complex(np.einsum("ij,ji->", comm_total, summed_log)),
            1e-10,
            "commutator-formula value (full Hamiltonian)",
        )
        flux_vals = tuple(region_energy(psi, f) for f in fluxes_ops)
        e_thermo = float(
            sum(betas[a] * flux_vals[a] for a in range(1, partition.n_regions))
        )

        checks = {
            "subadditivity": gap >= tol.subadditivity_floor,
            "micro_matches_rates": abs(e_micro_h - sum(rates)) <= tol.micro_rates_atol,
            "coupling_vs_total_generator": abs(e_micro_h - e_micro_total)
            <= tol.h_total_atol,
        }
        reports.append(
            EPReport(
                t=float(t),
                entropy_total=s_total,
                region_entropies=tuple(entropies),
                gap=gap,
                rates=rates,
                e_micro_h=e_micro_h,
                e_micro_total=e_micro_total,
                e_thermo=e_thermo,
                fluxes=flux_vals,
                floored_regions=tuple(floored_regions),
                checks=checks,
            )
        )
    return reports
