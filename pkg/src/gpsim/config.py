"""Run configuration: INI-style files with sections, plus CLI overrides.

Only the seven rate constants are required; every numerical knob has a
documented default (m=256, tau=1e-3, t_end=20, domain_length=2*pi, g=lam=1 in
the shipped example configs). The resolved configuration round-trips through
``to_dict``/``from_dict`` bit-identically, which is what the output manifest
stores.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .dynamics import OdeStepperKind
from .errors import ConfigError, GpsimError
from .model import Params, validate_params
from .solver import SolverConfig

EXPERIMENTS = ("simulate", "ode", "portrait", "equilibria", "adiabatic",
               "converge-eps", "converge-dt")

_REQUIRED_PARAM_KEYS = ("g", "lambda", "R", "P", "alpha", "beta")


@dataclass(frozen=True)
class InitialCondition:
    """How the initial state is built.

    kind "stationary" uses the constant stationary state; "perturbed" adds a
    bump on top of it (mode >= 0 cosine, mode < 0 seeded band-limited noise);
    "homogeneous" embeds constants (rho0, n0, phi0); "file" reloads a field
    snapshot CSV.
    """

    kind: str = "stationary"
    mode: int = 1
    amplitude: float = 0.1
    which: str = "psi"
    rho0: float = 1.0
    n0: float = 1.0
    phi0: float = 0.0
    path: str = ""


@dataclass(frozen=True)
class PortraitSpec:
    center_rho: float | None = None
    center_n: float | None = None
    radius: float = 1.0
    count: int = 12


@dataclass(frozen=True)
class RunConfig:
    params: Params
    experiment: str = "simulate"
    m: int = 256
    dealias: bool = False
    solver: SolverConfig = field(default_factory=lambda: SolverConfig(tau=1e-3, t_end=20.0))
    initial: InitialCondition = field(default_factory=InitialCondition)
    output_dir: str = "out"
    portrait: PortraitSpec = field(default_factory=PortraitSpec)
    eps_ladder: tuple[float, ...] = (0.2, 0.1, 0.05)
    dt_taus: tuple[float, ...] = (4e-3, 2e-3, 1e-3)
    dt_ref_refine: int = 16
    dt_t_end: float = 0.25

    def to_dict(self) -> dict:
        d = asdict(self)
        d["solver"]["substepper"] = self.solver.substepper.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        d = dict(d)
        d["params"] = Params(**d["params"])
        solver = dict(d["solver"])
        solver["substepper"] = OdeStepperKind(solver["substepper"])
        d["solver"] = SolverConfig(**solver)
        d["initial"] = InitialCondition(**d["initial"])
        d["portrait"] = PortraitSpec(**d["portrait"])
        for key in ("eps_ladder", "dt_taus"):
            d[key] = tuple(d[key])
        return cls(**d)


def _float_list(raw: str) -> tuple[float, ...]:
    return tuple(float(tok) for tok in raw.replace(",", " ").split())


def load_config(path, experiment: str, seed: int | None = None,
                out_dir: str | None = None) -> RunConfig:
    """Parse an INI config file and apply CLI overrides."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.optionxform = str  # parameter names are case-sensitive (R vs r)
    try:
        cp.read(path)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"unknown experiment {experiment!r}")

    if not cp.has_section("params"):
        raise ConfigError("missing required section [params]")
    for key in _REQUIRED_PARAM_KEYS:
        if not cp.has_option("params", key):
            raise ConfigError(f"missing required field params.{key}")
    try:
        params = validate_params({k: float(v) for k, v in cp.items("params")})
    except (GpsimError, KeyError, ValueError) as exc:
        raise ConfigError(f"bad [params] section: {exc}") from exc

    def get(section, option, fallback, conv=float):
        if cp.has_option(section, option):
            raw = cp.get(section, option)
            try:
                if conv is bool:
                    return cp.getboolean(section, option)
                return conv(raw)
            except ValueError as exc:
                raise ConfigError(f"bad value for {section}.{option}: {raw!r}") from exc
        return fallback

    try:
        substepper = OdeStepperKind(get("solver", "substepper", "rk4", str).lower())
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        solver = SolverConfig(
            tau=get("solver", "tau", 1e-3),
            t_end=get("solver", "t_end", 20.0),
            substepper=substepper,
            save_every=get("solver", "save_every", 10, int),
            assert_bounds=get("solver", "assert_bounds", True, bool),
            seed=seed if seed is not None else get("solver", "seed", 0, int),
            tau_safety=get("solver", "tau_safety", 0.5),
        )
    except ValueError as exc:
        raise ConfigError(f"bad [solver] section: {exc}") from exc

    kind = get("initial", "kind", "stationary", str)
    if kind not in ("stationary", "perturbed", "homogeneous", "file"):
        raise ConfigError(f"bad initial.kind {kind!r}")
    if kind == "file" and not get("initial", "path", "", str):
        raise ConfigError("missing required field initial.path for kind=file")
    initial = InitialCondition(
        kind=kind,
        mode=get("initial", "mode", 1, int),
        amplitude=get("initial", "amplitude", 0.1),
        which=get("initial", "which", "psi", str),
        rho0=get("initial", "rho0", 1.0),
        n0=get("initial", "n0", 1.0),
        phi0=get("initial", "phi0", 0.0),
        path=get("initial", "path", "", str),
    )

    portrait = PortraitSpec(
        center_rho=get("portrait", "center_rho", None),
        center_n=get("portrait", "center_n", None),
        radius=get("portrait", "radius", 1.0),
        count=get("portrait", "count", 12, int),
    )
    if experiment == "portrait" and params.delta <= 0.0 and (
            portrait.center_rho is None or portrait.center_n is None):
        raise ConfigError(
            "portrait.center_rho/center_n are required when P*R - alpha*beta <= 0"
        )

    m = get("grid", "m", 256, int)
    cfg = RunConfig(
        params=params,
        experiment=experiment,
        m=m,
        dealias=get("grid", "dealias", False, bool),
        solver=solver,
        initial=initial,
        output_dir=out_dir if out_dir is not None else get("output", "dir", "out", str),
        portrait=portrait,
        eps_ladder=get("sweep", "eps_ladder", (0.2, 0.1, 0.05), _float_list),
        dt_taus=get("convergence", "taus", (4e-3, 2e-3, 1e-3), _float_list),
        dt_ref_refine=get("convergence", "ref_refine", 16, int),
        dt_t_end=get("convergence", "t_end", 0.25),
    )
    if not math.isfinite(cfg.solver.t_end):
        raise ConfigError("solver.t_end must be finite")
    return cfg


def with_seed(cfg: RunConfig, seed: int) -> RunConfig:
    return replace(cfg, solver=replace(cfg.solver, seed=seed))
