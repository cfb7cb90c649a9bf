"""Exact-diagonalization toolkit for entropy balance in partitioned spin systems.

Build a finite lattice, partition it into a small system plus reservoirs,
assemble a Hamiltonian from local terms, and follow how the marginal
entropies, the commutator formula, and the temperature-weighted heat fluxes
evolve under exact unitary dynamics.
"""

from .backend import backend_name
from .dynamics import EvolutionCache, cesaro_average, dephase, evolve, region_energy
from .errors import (
    CapacityError,
    ConfigError,
    CoverageError,
    DimensionMismatch,
    EmptyRegionError,
    OverlapError,
    ParseError,
    QspinError,
    ValidationError,
)
from .lattice import LatticeSpec, Partition, region_dimensions, validate_partition
from .operators import (
    Interaction,
    LocalTerm,
    assemble_hamiltonian,
    commutator,
    embed,
    flux_operator,
    heisenberg_chain,
    random_nn_interaction,
    region_hamiltonian,
    split_hamiltonian,
    tfim_chain,
    xx_chain,
    xxz_chain,
)
from .production import (
    EPReport,
    Tolerances,
    ep_micro,
    ep_thermo,
    ep_thermo_averaged,
    full_report,
    product_gibbs_state,
    subsystem_entropy_rate,
)
from .states import (
    SpectralDecomposition,
    gibbs,
    matrix_log,
    partial_trace,
    product_state,
    random_density_matrix,
    relative_entropy,
    validate_density_matrix,
    von_neumann_entropy,
)

__version__ = "0.1.0"

__all__ = [
    "CapacityError",
    "ConfigError",
    "CoverageError",
    "DimensionMismatch",
    "EPReport",
    "EmptyRegionError",
    "EvolutionCache",
    "Interaction",
    "LatticeSpec",
    "LocalTerm",
    "OverlapError",
    "ParseError",
    "Partition",
    "QspinError",
    "SpectralDecomposition",
    "Tolerances",
    "ValidationError",
    "assemble_hamiltonian",
    "backend_name",
    "cesaro_average",
    "commutator",
    "dephase",
    "embed",
    "ep_micro",
    "ep_thermo",
    "ep_thermo_averaged",
    "evolve",
    "flux_operator",
    "full_report",
    "gibbs",
    "heisenberg_chain",
    "matrix_log",
    "partial_trace",
    "product_gibbs_state",
    "product_state",
    "random_density_matrix",
    "random_nn_interaction",
    "region_dimensions",
    "region_energy",
    "region_hamiltonian",
    "relative_entropy",
    "split_hamiltonian",
    "subsystem_entropy_rate",
    "tfim_chain",
    "validate_density_matrix",
    "validate_partition",
    "von_neumann_entropy",
    "xx_chain",
    "xxz_chain",
]
