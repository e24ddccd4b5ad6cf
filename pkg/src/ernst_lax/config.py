"""Run configuration: nested dataclasses loaded from JSON with strict key checking."""

from __future__ import annotations

import dataclasses
import json
import typing
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError, ErnstLaxError
from .ernst import SOLUTION_PARAMS, catalog_solution
from .grid import make_grid
from .symmetry import CHARACTERISTICS


@dataclass
class GridSpec:
    rho: list = field(default_factory=lambda: [0.5, 2.5])
    z: list = field(default_factory=lambda: [-1.0, 1.0])
    n: int = 101


@dataclass
class SolutionSpec:
    name: str = "curzon"
    params: dict = field(default_factory=lambda: {"m": 1.0})
    grid: GridSpec = field(default_factory=GridSpec)


def _catalog_defaults() -> list:
    return [
        SolutionSpec("flat", {}),
        SolutionSpec("curzon", {"m": 1.0}),
        SolutionSpec("schwarzschild", {"m": 1.0}, GridSpec([0.5, 3.0], [-2.0, 2.0])),
        SolutionSpec("kerr", {"p": 0.8, "q": 0.6, "k": 1.0}, GridSpec([1.0, 3.0], [-1.0, 1.0])),
    ]


@dataclass
class TowerSpec:
    n_min: int = -2
    n_max: int = 4
    truncation: int = 2


@dataclass
class ContourSpec:
    radius: float = 1.0
    nodes: int = 16
    alt_radii: list = field(default_factory=lambda: [0.5, 2.0])


@dataclass
class SweepSpec:
    solution: SolutionSpec = field(
        default_factory=lambda: SolutionSpec("curzon", {"m": 1.0}, GridSpec([1.0, 3.0], [-1.0, 1.0], 401))
    )
    alpha_max: float = 1e-1
    alpha_min: float = 1e-4
    alpha_count: int = 19
    seed_scale: float = 1.0


@dataclass
class Tolerances:
    order_lo: float = 1.8
    order_hi: float = 2.2
    slope_control_lo: float = 0.8
    slope_control_hi: float = 1.2
    exact: float = 1e-12
    relative: float = 1e-10
    closed_form: float = 1e-10
    roundoff: float = 1e-9
    negative_change: float = 0.2
    negative_target: float = 0.05


@dataclass
class OutputSpec:
    dir: str = "ernst-lax-out"
    csv: bool = True
    tower_csv: bool = False


@dataclass
class RunConfig:
    refine: int = 2
    solution: SolutionSpec = field(default_factory=SolutionSpec)
    catalog: list = field(default_factory=_catalog_defaults)
    symmetry_solutions: list = field(default_factory=lambda: ["curzon", "kerr"])
    control_solutions: list = field(default_factory=lambda: ["curzon"])
    seed: str = "z_translation"
    seed_matrix: list = field(default_factory=lambda: [[0.3, 1.0], [-0.5, -0.3]])
    tower: TowerSpec = field(default_factory=TowerSpec)
    lambdas: list = field(default_factory=lambda: [0.3, 1.0, 2.0, "0.5+0.5j"])
    lambda_sweep: list = field(default_factory=lambda: [0.25, 0.4, 0.63, 1.0, 1.6, 2.5, 4.0, 6.3])
    bz_bracket: str = "left"
    bz_generator: list = field(default_factory=lambda: [[0.2, 0.7], [-0.4, -0.1]])
    contour: ContourSpec = field(default_factory=ContourSpec)
    sweep: SweepSpec = field(default_factory=SweepSpec)
    rng_seed: int = 20240611
    tolerances: Tolerances = field(default_factory=Tolerances)
    output: OutputSpec = field(default_factory=OutputSpec)

    def lambda_values(self) -> list[complex]:
        return [parse_complex(v, "lambdas") for v in self.lambdas]

    def solution_by_name(self, name: str) -> SolutionSpec:
        for s in self.catalog:
            if s.name == name:
                return s
        raise ConfigError(f"solution {name!r} is not in the catalog list", "catalog")

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)


def parse_complex(value, key: str = "lambda") -> complex:
    try:
        if isinstance(value, (list, tuple)) and len(value) == 2:
            lam = complex(float(value[0]), float(value[1]))
        else:
            lam = complex(str(value).replace(" ", "").replace("i", "j"))
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: cannot parse {value!r} as a complex number", key) from None
    if lam == 0:
        raise ConfigError(f"{key}: the spectral parameter must be nonzero", key)
    return lam


def _build(cls, data, path: str):
    if not isinstance(data, dict):
        raise ConfigError(f"{path or 'config'}: expected an object, got {type(data).__name__}", path)
    hints = typing.get_type_hints(cls)
    names = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in names:
            full = f"{path}.{key}" if path else key
            raise ConfigError(f"unknown config key {full!r}", full)
    kwargs = {}
    for key, value in data.items():
        full = f"{path}.{key}" if path else key
        kind = hints[key]
        if dataclasses.is_dataclass(kind):
            kwargs[key] = _build(kind, value, full)
        elif key == "catalog":
            if not isinstance(value, list):
                raise ConfigError(f"{full}: expected a list", full)
            kwargs[key] = [_build(SolutionSpec, v, f"{full}[{i}]") for i, v in enumerate(value)]
        else:
            kwargs[key] = value
    return cls(**kwargs)


def _check_solution(spec: SolutionSpec, path: str):
    if spec.name not in SOLUTION_PARAMS:
        raise ConfigError(f"{path}.name: unknown solution {spec.name!r}", f"{path}.name")
    want = set(SOLUTION_PARAMS[spec.name])
    if set(spec.params) != want:
        raise ConfigError(
            f"{path}.params: {spec.name} takes {sorted(want)}, got {sorted(spec.params)}", f"{path}.params"
        )
    g = spec.grid
    if len(g.rho) != 2 or len(g.z) != 2 or not g.rho[0] < g.rho[1] or not g.z[0] < g.z[1]:
        raise ConfigError(f"{path}.grid: bounds must be increasing pairs", f"{path}.grid")
    if int(g.n) < 9:
        raise ConfigError(f"{path}.grid.n: need at least 9 nodes", f"{path}.grid.n")
    try:
        catalog_solution(spec.name, spec.params, make_grid((g.rho, g.z), (int(g.n), int(g.n))))
    except ErnstLaxError as exc:
        raise ConfigError(f"{path}: {exc}", path) from exc


def validate(cfg: RunConfig) -> RunConfig:
    _check_solution(cfg.solution, "solution")
    for i, s in enumerate(cfg.catalog):
        _check_solution(s, f"catalog[{i}]")
    _check_solution(cfg.sweep.solution, "sweep.solution")
    names = [s.name for s in cfg.catalog]
    for key in ("symmetry_solutions", "control_solutions"):
        for name in getattr(cfg, key):
            if name not in names:
                raise ConfigError(f"{key}: {name!r} is not in the catalog list", key)
    if cfg.seed not in CHARACTERISTICS or cfg.seed == "rho_translation":
        raise ConfigError(f"seed: unknown or non-symmetry characteristic {cfg.seed!r}", "seed")
    if cfg.seed == "linear_z" and cfg.solution.name != "flat":
        raise ConfigError("seed: linear_z needs the flat solution", "seed")
    if cfg.bz_bracket not in ("left", "commutator"):
        raise ConfigError(f"bz_bracket: expected 'left' or 'commutator', got {cfg.bz_bracket!r}", "bz_bracket")
    if not cfg.tower.n_min <= -cfg.tower.truncation or cfg.tower.n_max < cfg.tower.truncation + 1:
        raise ConfigError("tower: span must contain [-truncation, truncation + 1]", "tower")
    if cfg.refine < 2:
        raise ConfigError("refine: must be an integer >= 2", "refine")
    for f in dataclasses.fields(cfg.tolerances):
        if not getattr(cfg.tolerances, f.name) > 0:
            raise ConfigError(f"tolerances.{f.name}: must be positive", f"tolerances.{f.name}")
    if not cfg.sweep.alpha_max > cfg.sweep.alpha_min > 0 or cfg.sweep.alpha_count < 3:
        raise ConfigError("sweep: need alpha_max > alpha_min > 0 and alpha_count >= 3", "sweep")
    cfg.lambda_values()
    for v in cfg.lambda_sweep:
        parse_complex(v, "lambda_sweep")
    return cfg


def load_config(path=None, overrides: dict | None = None) -> RunConfig:
    """Read a JSON config (or use defaults) and validate it."""
    data = {}
    if path is not None:
        p = Path(path)
        try:
            data = json.loads(p.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {p}: {exc.strerror}", "config") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {p} is not valid JSON: {exc}", "config") from exc
    cfg = _build(RunConfig, data, "")
    for key, value in (overrides or {}).items():
        setattr(cfg, key, value)
    return validate(cfg)


def scaled(spec: GridSpec, k: int) -> GridSpec:
    return GridSpec(list(spec.rho), list(spec.z), (int(spec.n) - 1) * k + 1)
