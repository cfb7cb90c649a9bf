"""Scenario configuration: YAML parsing, validation, sweep instantiation."""

from __future__ import annotations

import copy
from dataclasses import dataclass

import numpy as np
import yaml

from .errors import (
    CapacityError,
    ParseError,
    QspinError,
    ValidationError,
)
from .lattice import LatticeSpec, Partition, validate_partition
from .operators import PRESETS, Interaction, LocalTerm
from .production import Tolerances, product_gibbs_state
from .states import product_state, validate_density_matrix

_TOP_KEYS = {
    "lattice",
    "partition",
    "interaction",
    "betas",
    "initial_state",
    "time_grid",
    "horizons",
    "tolerances",
    "output_dir",
}

SWEEP_PARAMS = ("reservoir_size", "boundary_offset", "horizon_T", "beta_gap")


@dataclass
class ScenarioConfig:
    """A fully validated scenario: raw mapping plus the built objects."""

    raw: dict
    lattice: LatticeSpec
    partition: Partition
    interaction: Interaction
    betas: tuple[float, ...]
    initial_kind: str
    psi0: np.ndarray
    time_grid: np.ndarray
    horizons: tuple[float, ...]
    tolerances: Tolerances
    output_dir: str | None


@dataclass
class SweepSpec:
    """One swept parameter, its values, and the base scenario they modify."""

    param: str
    values: list
    base: ScenarioConfig

    def __post_init__(self):
        if self.param not in SWEEP_PARAMS:
            raise ValidationError(
                f"unknown sweep parameter {self.param!r} (known: {', '.join(SWEEP_PARAMS)})"
            )
        if not self.values:
            raise ValidationError("sweep value list must be non-empty")


def _expect_mapping(data, path: str) -> dict:
    if not isinstance(data, dict):
        raise ParseError(f"{path}: expected a mapping, got {type(data).__name__}")
    return data


def _get(data: dict, key: str, path: str, required: bool = True, default=None):
    if key not in data:
        if required:
            raise ParseError(f"{path}.{key}: missing required key")
        return default
    return data[key]


def _reject_unknown(data: dict, known: set, path: str) -> None:
    unknown = sorted(set(data) - known)
    if unknown:
        raise ParseError(f"{path}: unknown keys {unknown} (known: {sorted(known)})")


def _as_complex_matrix(entries, path: str) -> np.ndarray:
    """Rows of numbers or [re, im] pairs into a complex square matrix."""
    if not isinstance(entries, list) or not entries:
        raise ParseError(f"{path}: expected a non-empty list of rows")
    rows = []
    for i, row in enumerate(entries):
        if not isinstance(row, list):
            raise ParseError(f"{path}[{i}]: expected a list")
        vals = []
        for j, cell in enumerate(row):
            if isinstance(cell, (int, float)):
                vals.append(complex(cell))
            elif isinstance(cell, list) and len(cell) == 2:
                vals.append(complex(float(cell[0]), float(cell[1])))
            else:
                raise ParseError(
                    f"{path}[{i}][{j}]: expected a number or a [re, im] pair"
                )
        rows.append(vals)
    mat = np.array(rows, dtype=np.complex128)
    if mat.shape[0] != mat.shape[1]:
        raise ParseError(f"{path}: matrix must be square, got shape {mat.shape}")
    return mat


def _build_lattice(data, path: str) -> LatticeSpec:
    data = _expect_mapping(data, path)
    _reject_unknown(data, {"sites", "local_dim"}, path)
    n = _get(data, "sites", path)
    if not isinstance(n, int) or n < 1:
        raise ParseError(f"{path}.sites: expected a positive integer, got {n!r}")
    local = _get(data, "local_dim", path, required=False, default=2)
    if isinstance(local, int):
        dims = [local] * n
    elif isinstance(local, list):
        if len(local) != n:
            raise ValidationError(
                f"{path}.local_dim: {len(local)} entries for {n} sites"
            )
        dims = local
    else:
        raise ParseError(f"{path}.local_dim: expected an int or a list of ints")
    try:
        return LatticeSpec(dims)
    except CapacityError:
        raise
    except (ValueError, QspinError) as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _build_partition(data, lattice: LatticeSpec, path: str) -> Partition:
    data = _expect_mapping(data, path)
    _reject_unknown(data, {"regions"}, path)
    regions = _get(data, "regions", path)
    if not isinstance(regions, list) or not all(isinstance(r, list) for r in regions):
        raise ParseError(f"{path}.regions: expected a list of site lists")
    try:
        return validate_partition(lattice, Partition(lattice, regions))
    except QspinError as exc:
        raise ValidationError(f"{path}.regions: {exc}") from exc
    except ValueError as exc:
        raise ValidationError(f"{path}.regions: {exc}") from exc


def _build_interaction(data, lattice: LatticeSpec, path: str) -> Interaction:
    data = _expect_mapping(data, path)
    preset = _get(data, "preset", path)
    known = sorted(PRESETS) + ["custom"]
    if preset == "custom":
        _reject_unknown(data, {"preset", "terms"}, path)
        raw_terms = _get(data, "terms", path)
        if not isinstance(raw_terms, list):
            raise ParseError(f"{path}.terms: expected a list of terms")
        terms = []
        for i, item in enumerate(raw_terms):
            tpath = f"{path}.terms[{i}]"
            item = _expect_mapping(item, tpath)
            _reject_unknown(item, {"support", "matrix"}, tpath)
            support = _get(item, "support", tpath)
            if not isinstance(support, list) or not all(isinstance(s, int) for s in support):
                raise ParseError(f"{tpath}.support: expected a list of site indices")
            matrix = _as_complex_matrix(_get(item, "matrix", tpath), f"{tpath}.matrix")
            try:
                terms.append(LocalTerm(support, matrix))
            except ValueError as exc:
                raise ValidationError(f"{tpath}: {exc}") from exc
        return Interaction(terms)
    if preset not in PRESETS:
        raise ParseError(
            f"{path}.preset: unknown preset {preset!r} (known: {', '.join(known)})"
        )
    _reject_unknown(data, {"preset", "coupling", "delta", "g"}, path)
    kwargs = {}
    if "coupling" in data:
        kwargs["coupling"] = float(data["coupling"])
    if preset == "xxz":
        kwargs["delta"] = float(_get(data, "delta", path))
    elif "delta" in data:
        raise ParseError(f"{path}.delta: only valid for preset 'xxz'")
    if preset == "tfim":
        kwargs["g"] = float(_get(data, "g", path))
    elif "g" in data:
        raise ParseError(f"{path}.g: only valid for preset 'tfim'")
    try:
        return PRESETS[preset](lattice, **kwargs)
    except QspinError as exc:
        raise ValidationError(f"{path}: {exc}") from exc


def _build_initial_state(data, config_betas, interaction, partition, path: str):
    data = _expect_mapping(data, path)
    kind = _get(data, "kind", path)
    if kind == "product_gibbs":
        _reject_unknown(data, {"kind"}, path)
        return kind, product_gibbs_state(interaction, partition, config_betas)
    if kind == "custom":
        _reject_unknown(data, {"kind", "regions"}, path)
        raw = _get(data, "regions", path)
        if not isinstance(raw, list):
            raise ParseError(f"{path}.regions: expected a list of matrices")
        if len(raw) != partition.n_regions:
            raise ValidationError(
                f"{path}.regions: {len(raw)} states for {partition.n_regions} regions"
            )
        factors = []
        for a, entries in enumerate(raw):
            mat = _as_complex_matrix(entries, f"{path}.regions[{a}]")
            try:
                factors.append(validate_density_matrix(mat))
            except ValueError as exc:
                raise ValidationError(f"{path}.regions[{a}]: {exc}") from exc
        try:
            return kind, product_state(factors, partition)
        except QspinError as exc:
            raise ValidationError(f"{path}.regions: {exc}") from exc
    raise ParseError(
        f"{path}.kind: unknown initial state {kind!r} (known: product_gibbs, custom)"
    )


def _build_time_grid(data, path: str) -> np.ndarray:
    data = _expect_mapping(data, path)
    _reject_unknown(data, {"start", "stop", "count"}, path)
    start = float(_get(data, "start", path))
    stop = float(_get(data, "stop", path))
    count = _get(data, "count", path)
    if not isinstance(count, int) or count < 0:
        raise ParseError(f"{path}.count: expected a nonnegative integer, got {count!r}")
    return np.linspace(start, stop, count)


def parse_config(text: str) -> ScenarioConfig:
    """Parse and fully validate a scenario config from YAML text.

    Raises :class:`ParseError` (syntax, unknown keys, malformed values, with
    the offending key path or YAML line) or :class:`ValidationError`
    (well-formed values rejected by a module validator).
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ParseError(f"invalid YAML: {exc}") from exc
    if data is None:
        raise ParseError("empty config")
    data = _expect_mapping(data, "config")
    _reject_unknown(data, _TOP_KEYS, "config")

    lattice = _build_lattice(_get(data, "lattice", "config"), "lattice")
    partition = _build_partition(_get(data, "partition", "config"), lattice, "partition")
    interaction = _build_interaction(
        _get(data, "interaction", "config"), lattice, "interaction"
    )

    betas_raw = _get(data, "betas", "config")
    if not isinstance(betas_raw, list) or not all(
        isinstance(b, (int, float)) for b in betas_raw
    ):
        raise ParseError("betas: expected a list of numbers")
    if len(betas_raw) != partition.n_regions:
        raise ValidationError(
            f"betas: {len(betas_raw)} values for {partition.n_regions} regions"
        )
    betas = tuple(float(b) for b in betas_raw)

    time_grid = _build_time_grid(_get(data, "time_grid", "config"), "time_grid")

    horizons_raw = _get(data, "horizons", "config", required=False)
    if horizons_raw is None:
        horizons = (float(time_grid[-1]),) if time_grid.size and time_grid[-1] > 0 else ()
    else:
        if not isinstance(horizons_raw, list) or not all(
            isinstance(h, (int, float)) and h > 0 for h in horizons_raw
        ):
            raise ParseError("horizons: expected a list of positive numbers")
        horizons = tuple(float(h) for h in horizons_raw)

    try:
        tolerances = Tolerances.from_mapping(
            _get(data, "tolerances", "config", required=False)
        )
    except (ValueError, TypeError) as exc:
        raise ParseError(f"tolerances: {exc}") from exc

    kind, psi0 = _build_initial_state(
        _get(data, "initial_state", "config"),
        betas,
        interaction,
        partition,
        "initial_state",
    )

    output_dir = _get(data, "output_dir", "config", required=False)
    if output_dir is not None and not isinstance(output_dir, str):
        raise ParseError("output_dir: expected a string")

    return ScenarioConfig(
        raw=copy.deepcopy(data),
        lattice=lattice,
        partition=partition,
        interaction=interaction,
        betas=betas,
        initial_kind=kind,
        psi0=psi0,
        time_grid=time_grid,
        horizons=horizons,
        tolerances=tolerances,
        output_dir=output_dir,
    )


def load_config(path) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


# ---------------------------------------------------------------------------
# Sweep instantiation
# ---------------------------------------------------------------------------

def _contiguous_three_regions(raw_regions) -> tuple[list, list, list]:
    """Check the left-reservoir / small-system / right-reservoir chain layout."""
    if len(raw_regions) != 3:
        raise ValidationError("structural sweeps need exactly 3 regions")
    small, left, right = (sorted(r) for r in raw_regions)
    blocks = [small, left, right]
    for r in blocks:
        if r != list(range(r[0], r[-1] + 1)):
            raise ValidationError("structural sweeps need contiguous regions")
    if not (left[-1] + 1 == small[0] and small[-1] + 1 == right[0]):
        raise ValidationError(
            "structural sweeps need the layout [left reservoir][small system][right reservoir]"
        )
    return small, left, right


def config_with_value(base: ScenarioConfig, param: str, value) -> ScenarioConfig:
    """Instantiate one sweep point by editing the raw config and reparsing."""
    raw = copy.deepcopy(base.raw)
    if param == "horizon_T":
        horizon = float(value)
        if horizon <= 0:
            raise ValidationError(f"horizon_T must be positive, got {value}")
        raw["horizons"] = [horizon]
    elif param == "beta_gap":
        gap = float(value)
        betas = list(base.betas)
        if len(betas) != 3:
            raise ValidationError("beta_gap sweep needs exactly 2 reservoirs")
        center = (betas[1] + betas[2]) / 2.0
        raw["betas"] = [betas[0], center + gap / 2.0, center - gap / 2.0]
    elif param in ("reservoir_size", "boundary_offset"):
        small, left, right = _contiguous_three_regions(raw["partition"]["regions"])
        if len(set(base.lattice.local_dims)) != 1:
            raise ValidationError("structural sweeps need a uniform local dimension")
        if raw["interaction"].get("preset") == "custom":
            raise ValidationError(
                "structural sweeps need a preset interaction (custom terms do not rescale)"
            )
        if param == "reservoir_size":
            size = int(value)
            if size < 1:
                raise ValidationError(f"reservoir_size must be >= 1, got {value}")
            n_small = len(small)
            n = size + n_small + size
            raw["lattice"]["sites"] = n
            raw["partition"]["regions"] = [
                list(range(size, size + n_small)),
                list(range(0, size)),
                list(range(size + n_small, n)),
            ]
        else:
            offset = int(value)
            new_small = list(range(small[0] - offset, small[-1] + 1 + offset))
            new_left = list(range(left[0], small[0] - offset))
            new_right = list(range(small[-1] + 1 + offset, right[-1] + 1))
            if not new_left or not new_right or not new_small:
                raise ValidationError(
                    f"boundary_offset {value} leaves an empty region"
                )
            raw["partition"]["regions"] = [new_small, new_left, new_right]
    else:
        raise ValidationError(f"unknown sweep parameter {param!r}")
    return parse_config(yaml.safe_dump(raw))
