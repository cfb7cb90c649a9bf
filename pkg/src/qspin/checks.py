"""Built-in invariant suite behind the ``check`` CLI subcommand.

Each check runs on fixed internal instances with fixed seeds, so a passing
suite is reproducible evidence that the installed build honours the
package's numerical contracts.  ``fast`` stays at 6 qubits and below;
``full`` adds the 8-qubit reference scenario and one 10-qubit
(dimension-1024) eigendecomposition-backed scenario.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .dynamics import EvolutionCache, cesaro_average, dephase, evolve, region_energy
from .lattice import LatticeSpec, Partition, region_dimensions, validate_partition
from .operators import (
    Interaction,
    LocalTerm,
    assemble_hamiltonian,
    commutator,
    embed,
    flux_operator,
    hermiticity_defect,
    max_abs,
    random_nn_interaction,
    split_hamiltonian,
    xx_chain,
)
from .production import ep_micro, ep_thermo, ep_thermo_averaged, full_report, product_gibbs_state
from .states import (
    partial_trace,
    random_density_matrix,
    relative_entropy,
    validate_density_matrix,
    von_neumann_entropy,
)


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str


def _xx_scenario(n_sites: int, regions, betas):
    lattice = LatticeSpec.uniform(n_sites)
    partition = validate_partition(lattice, Partition(lattice, regions))
    interaction = xx_chain(lattice)
    psi0 = product_gibbs_state(interaction, partition, betas)
    return lattice, partition, interaction, psi0


def _check_partition_arithmetic() -> CheckResult:
    rng = np.random.default_rng(11)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        dims = rng.integers(2, 4, size=n).tolist()
        lattice = LatticeSpec(dims)
        sites = list(lattice.sites)
        rng.shuffle(sites)
        m = int(rng.integers(2, min(n, 3) + 1))
        cuts = sorted(rng.choice(range(1, n), size=m - 1, replace=False)) if m > 1 else []
        regions = np.split(np.array(sites), cuts)
        partition = validate_partition(lattice, Partition(lattice, regions))
        again = validate_partition(lattice, partition)
        if again is not partition:
            return CheckResult("partition_arithmetic", False, "validation not idempotent")
        sizes = sum(len(r) for r in partition.regions)
        prod = int(np.prod(region_dimensions(partition)))
        if sizes != n or prod != lattice.dim:
            return CheckResult(
                "partition_arithmetic", False, f"size/dim bookkeeping broke at n={n}"
            )
    return CheckResult("partition_arithmetic", True, "")


def _check_operator_self_adjoint() -> CheckResult:
    rng = np.random.default_rng(12)
    lattice = LatticeSpec.uniform(5)
    partition = validate_partition(lattice, Partition(lattice, [[2], [0, 1], [3, 4]]))
    worst = 0.0
    for interaction in (xx_chain(lattice), random_nn_interaction(lattice, rng)):
        parts, h = split_hamiltonian(interaction, partition)
        mats = [assemble_hamiltonian(interaction, lattice), h, *parts]
        mats += [flux_operator(interaction, partition, a) for a in range(3)]
        worst = max(worst, max(hermiticity_defect(m) for m in mats))
    ok = worst <= 1e-12
    return CheckResult("operator_self_adjoint", ok, f"max defect {worst:.3e}")


def _check_splitting_identity() -> CheckResult:
    lattice = LatticeSpec.uniform(6)
    partition = validate_partition(lattice, Partition(lattice, [[2, 3], [0, 1], [4, 5]]))
    interaction = xx_chain(lattice)
    parts, h = split_hamiltonian(interaction, partition)
    diff = max_abs(assemble_hamiltonian(interaction, lattice) - (sum(parts) + h))
    ok = diff == 0.0
    return CheckResult("splitting_identity", ok, f"max diff {diff:.3e}")


def _check_flux_sum_rule() -> CheckResult:
    rng = np.random.default_rng(13)
    lattice = LatticeSpec.uniform(5)
    partition = validate_partition(lattice, Partition(lattice, [[2], [0, 1], [3, 4]]))
    interaction = random_nn_interaction(lattice, rng)
    total = assemble_hamiltonian(interaction, lattice)
    _, h = split_hamiltonian(interaction, partition)
    summed = sum(flux_operator(interaction, partition, a) for a in range(3))
    diff = max_abs(summed - (-1j * commutator(total, h)))
    ok = diff <= 1e-10
    return CheckResult("flux_sum_rule", ok, f"max diff {diff:.3e}")


def _check_disjoint_support_commutation() -> CheckResult:
    rng = np.random.default_rng(14)
    lattice = LatticeSpec.uniform(5)
    worst = 0.0
    for _ in range(10):
        sites = rng.permutation(5)
        xa, xb = sorted(sites[:2]), sorted(sites[2:4])
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        ta = LocalTerm(xa, (g + g.conj().T) / 2)
        g = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        tb = LocalTerm(xb, (g + g.conj().T) / 2)
        worst = max(worst, max_abs(commutator(embed(ta, lattice), embed(tb, lattice))))
    ok = worst <= 1e-12
    return CheckResult("disjoint_support_commutation", ok, f"max norm {worst:.3e}")


def _check_subadditivity() -> CheckResult:
    rng = np.random.default_rng(15)
    lattice = LatticeSpec.uniform(5)
    partition = validate_partition(lattice, Partition(lattice, [[1, 3], [0], [2, 4]]))
    worst = np.inf
    for _ in range(20):
        psi = random_density_matrix(lattice.dim, rng)
        total = von_neumann_entropy(psi)
        marg = sum(
            von_neumann_entropy(partial_trace(psi, partition, a)) for a in range(3)
        )
        worst = min(worst, marg - total)
    ok = worst >= -1e-10
    return CheckResult("subadditivity", ok, f"min gap {worst:.3e}")


def _check_klein_inequality() -> CheckResult:
    rng = np.random.default_rng(16)
    worst = np.inf
    for _ in range(20):
        rho = random_density_matrix(8, rng)
        sigma = random_density_matrix(8, rng)
        worst = min(worst, relative_entropy(rho, sigma))
    ok = worst >= -1e-10
    return CheckResult("klein_inequality", ok, f"min divergence {worst:.3e}")


def _check_partial_trace_contract() -> CheckResult:
    rng = np.random.default_rng(17)
    lattice = LatticeSpec([2, 3, 2, 2])
    partition = validate_partition(lattice, Partition(lattice, [[1], [0, 2], [3]]))
    worst_tr, worst_eig = 0.0, 0.0
    for _ in range(10):
        psi = random_density_matrix(lattice.dim, rng)
        for a in range(3):
            red = partial_trace(psi, partition, a)
            worst_tr = max(worst_tr, abs(np.trace(red).real - 1.0), abs(np.trace(red).imag))
            worst_eig = max(worst_eig, max(0.0, -float(np.linalg.eigvalsh(red).min())))
    ok = worst_tr <= 1e-12 and worst_eig <= 1e-12
    return CheckResult(
        "partial_trace_contract", ok, f"trace {worst_tr:.3e}, negativity {worst_eig:.3e}"
    )


def _check_evolution_group() -> CheckResult:
    rng = np.random.default_rng(18)
    lattice = LatticeSpec.uniform(4)
    interaction = random_nn_interaction(lattice, rng)
    cache = EvolutionCache.from_hamiltonian(assemble_hamiltonian(interaction, lattice))
    psi = random_density_matrix(lattice.dim, rng)
    composed = evolve(evolve(psi, cache, 0.7), cache, 1.9)
    direct = evolve(psi, cache, 2.6)
    diff = max_abs(composed - direct)
    ok = diff <= 1e-10
    return CheckResult("evolution_group", ok, f"max diff {diff:.3e}")


def _check_entropy_and_energy_conservation() -> CheckResult:
    lattice, partition, interaction, psi0 = _xx_scenario(
        6, [[2, 3], [0, 1], [4, 5]], (1.0, 0.5, 2.0)
    )
    total = assemble_hamiltonian(interaction, lattice)
    cache = EvolutionCache.from_hamiltonian(total)
    s0 = von_neumann_entropy(psi0)
    e0 = region_energy(psi0, total)
    drift_s, drift_e = 0.0, 0.0
    for t in np.linspace(0.0, 8.0, 10):
        psi = evolve(psi0, cache, float(t))
        drift_s = max(drift_s, abs(von_neumann_entropy(psi) - s0))
        drift_e = max(drift_e, abs(region_energy(psi, total) - e0))
    ok = drift_s <= 1e-9 and drift_e <= 1e-10 * max_abs(total)
    return CheckResult(
        "entropy_and_energy_conservation", ok, f"S drift {drift_s:.3e}, E drift {drift_e:.3e}"
    )


def _check_cesaro_state_valid() -> CheckResult:
    rng = np.random.default_rng(19)
    lattice = LatticeSpec.uniform(4)
    interaction = random_nn_interaction(lattice, rng)
    cache = EvolutionCache.from_hamiltonian(assemble_hamiltonian(interaction, lattice))
    psi = random_density_matrix(lattice.dim, rng)
    for horizon in (0.5, 3.0, 40.0):
        avg = cesaro_average(psi, cache, horizon)
        try:
            validate_density_matrix(avg, herm_tol=1e-10, eig_tol=1e-10, trace_tol=1e-10)
        except ValueError as exc:
            return CheckResult("cesaro_state_valid", False, str(exc))
    return CheckResult("cesaro_state_valid", True, "")


def _check_dephased_state() -> CheckResult:
    lattice, partition, interaction, psi0 = _xx_scenario(
        6, [[2, 3], [0, 1], [4, 5]], (1.0, 0.5, 2.0)
    )
    total = assemble_hamiltonian(interaction, lattice)
    cache = EvolutionCache.from_hamiltonian(total)
    fixed = dephase(psi0, cache)
    comm = max_abs(commutator(fixed, total))
    moved = max_abs(evolve(fixed, cache, 3.7) - fixed)
    flux_bound = 1e-9 * max_abs(total) ** 2
    worst_flux = max(
        abs(region_energy(fixed, flux_operator(interaction, partition, a)))
        for a in range(3)
    )
    ok = comm <= 1e-9 and moved <= 1e-9 and worst_flux <= flux_bound
    return CheckResult(
        "dephased_state",
        ok,
        f"[H,rho] {comm:.3e}, drift {moved:.3e}, flux {worst_flux:.3e}",
    )


def _check_micro_consistency() -> CheckResult:
    rng = np.random.default_rng(20)
    lattice = LatticeSpec.uniform(6)
    partition = validate_partition(lattice, Partition(lattice, [[2, 3], [0, 1], [4, 5]]))
    interaction = random_nn_interaction(lattice, rng)
    total = assemble_hamiltonian(interaction, lattice)
    parts, h = split_hamiltonian(interaction, partition)
    worst_sum, worst_swap = 0.0, 0.0
    from .production import subsystem_entropy_rate

    for _ in range(5):
        psi = random_density_matrix(lattice.dim, rng)
        val_h = ep_micro(psi, h, partition)
        val_total = ep_micro(psi, total, partition)
        rates = sum(subsystem_entropy_rate(psi, h, partition, a) for a in range(3))
        worst_sum = max(worst_sum, abs(val_h - rates))
        worst_swap = max(worst_swap, abs(val_h - val_total))
    ok = worst_sum <= 1e-9 and worst_swap <= 1e-9
    return CheckResult(
        "micro_consistency", ok, f"vs rates {worst_sum:.3e}, vs total {worst_swap:.3e}"
    )


def _check_averaged_positivity() -> CheckResult:
    rng = np.random.default_rng(21)
    lattice = LatticeSpec.uniform(6)
    partition = validate_partition(lattice, Partition(lattice, [[2, 3], [0, 1], [4, 5]]))
    betas = (1.0, 0.5, 2.0)
    worst_value, worst_gap = np.inf, 0.0
    draws = [xx_chain(lattice)] + [random_nn_interaction(lattice, rng) for _ in range(3)]
    for interaction in draws:
        psi0 = product_gibbs_state(interaction, partition, betas)
        cache = EvolutionCache.from_hamiltonian(assemble_hamiltonian(interaction, lattice))
        for horizon in (1.0, 20.0):
            value = ep_thermo_averaged(
                psi0, interaction, partition, betas, horizon, cache=cache
            )
            oracle = relative_entropy(evolve(psi0, cache, horizon), psi0) / horizon
            worst_value = min(worst_value, value)
            worst_gap = max(worst_gap, abs(value - oracle))
    ok = worst_value >= -1e-9 and worst_gap <= 1e-8
    return CheckResult(
        "averaged_positivity",
        ok,
        f"min value {worst_value:.3e}, divergence mismatch {worst_gap:.3e}",
    )


def _check_stationary_thermo() -> CheckResult:
    lattice, partition, interaction, psi0 = _xx_scenario(
        6, [[2, 3], [0, 1], [4, 5]], (1.0, 0.5, 2.0)
    )
    total = assemble_hamiltonian(interaction, lattice)
    cache = EvolutionCache.from_hamiltonian(total)
    fixed = dephase(psi0, cache)
    value = ep_thermo(fixed, interaction, partition, (1.0, 0.5, 2.0))
    bound = 1e-9 * 2.0 * max_abs(total) ** 2
    ok = abs(value) <= bound
    return CheckResult("stationary_thermo", ok, f"|value| {abs(value):.3e} vs {bound:.3e}")


def _check_reference_scenario_8q() -> CheckResult:
    lattice, partition, interaction, psi0 = _xx_scenario(
        8, [[3, 4], [0, 1, 2], [5, 6, 7]], (1.0, 0.5, 2.0)
    )
    reports = full_report(
        psi0, interaction, partition, (1.0, 0.5, 2.0), np.linspace(0.0, 10.0, 20)
    )
    s0 = reports[0].entropy_total
    drift = max(abs(r.entropy_total - s0) for r in reports)
    min_gap = min(r.gap for r in reports)
    all_checks = all(all(r.checks.values()) for r in reports)
    ok = drift <= 1e-9 and min_gap >= -1e-10 and all_checks
    return CheckResult(
        "reference_scenario_8q",
        ok,
        f"drift {drift:.3e}, min gap {min_gap:.3e}, checks {'ok' if all_checks else 'FAIL'}",
    )


def _check_scenario_10q() -> CheckResult:
    lattice, partition, interaction, psi0 = _xx_scenario(
        10, [[4, 5], [0, 1, 2, 3], [6, 7, 8, 9]], (1.0, 0.5, 2.0)
    )
    reports = full_report(
        psi0, interaction, partition, (1.0, 0.5, 2.0), np.linspace(0.0, 6.0, 6)
    )
    s0 = reports[0].entropy_total
    drift = max(abs(r.entropy_total - s0) for r in reports)
    min_gap = min(r.gap for r in reports)
    all_checks = all(all(r.checks.values()) for r in reports)
    ok = drift <= 1e-9 and min_gap >= -1e-10 and all_checks
    return CheckResult(
        "scenario_10q_dim1024",
        ok,
        f"drift {drift:.3e}, min gap {min_gap:.3e}, checks {'ok' if all_checks else 'FAIL'}",
    )


FAST_CHECKS: list[Callable[[], CheckResult]] = [
    _check_partition_arithmetic,
    _check_operator_self_adjoint,
    _check_splitting_identity,
    _check_flux_sum_rule,
    _check_disjoint_support_commutation,
    _check_subadditivity,
    _check_klein_inequality,
    _check_partial_trace_contract,
    _check_evolution_group,
    _check_entropy_and_energy_conservation,
    _check_cesaro_state_valid,
    _check_dephased_state,
    _check_micro_consistency,
    _check_averaged_positivity,
    _check_stationary_thermo,
]

FULL_CHECKS: list[Callable[[], CheckResult]] = FAST_CHECKS + [
    _check_reference_scenario_8q,
    _check_scenario_10q,
]


def run_checks(
    level: str,
    *,
    registry: Iterable[Callable[[], CheckResult]] | None = None,
    out=None,
    err=None,
) -> int:
    """Run the invariant suite; return 0 iff every check passes.

    ``registry`` overrides the built-in check list (used by tests to inject
    deliberately broken checks).
    """
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    if registry is None:
        if level == "fast":
            registry = FAST_CHECKS
        elif level == "full":
            registry = FULL_CHECKS
        else:
            raise ValueError(f"unknown check level {level!r} (expected fast|full)")
    failures = []
    for fn in registry:
        result = fn()
        status = "PASS" if result.ok else "FAIL"
        detail = f" ({result.detail})" if result.detail else ""
        print(f"[{status}] {result.name}{detail}", file=out)
        if not result.ok:
            failures.append(result)
    if failures:
        print(
            "invariant failures: " + ", ".join(f.name for f in failures),
            file=err,
        )
        return 1
    return 0
