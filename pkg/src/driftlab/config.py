"""Experiment configuration: a strict, versioned JSON schema.

A configuration describes one manifold family with parameter ranges (dimension
list, density amplitude list, grid sizes), the estimate constants, the checks
to run, tolerances, and output destinations.  Unknown keys are rejected at
every level, because a silently ignored typo can corrupt an entire sweep.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from . import geometry

SCHEMA_VERSION = 1

MANIFOLD_FAMILIES = ("sphere", "stretched-sphere", "circle")
DENSITY_FAMILIES = ("zero", "cosine", "poly-cos")
CHECK_NAMES = ("spectrum", "bounds", "estimates", "soliton")
FORMATS = ("csv", "json")

TOLERANCE_PROFILES = {
    "default": {
        "spectrum": 1e-3,
        "bound_margin": 1e-6,
        "gradient": 1e-2,
        "dominance": 1e-2,
        "holder": 1e-8,
        "soliton": 1e-8,
    },
    "strict": {
        "spectrum": 1e-4,
        "bound_margin": 1e-9,
        "gradient": 1e-3,
        "dominance": 1e-3,
        "holder": 1e-10,
        "soliton": 1e-10,
    },
}


def _require_keys(obj: dict, where: str, required: tuple, optional: tuple):
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {sorted(unknown)}")
    missing = set(required) - set(obj)
    if missing:
        raise ConfigError(f"missing key(s) in {where}: {sorted(missing)}")


def _as_list(value, name: str, kind):
    items = value if isinstance(value, list) else [value]
    if not items:
        raise ConfigError(f"{name} must be a non-empty value or list")
    out = []
    for item in items:
        if kind is float and isinstance(item, (int, float)) and not isinstance(item, bool):
            out.append(float(item))
        elif kind is int and isinstance(item, int) and not isinstance(item, bool):
            out.append(int(item))
        else:
            raise ConfigError(f"{name} entries must be {kind.__name__}, got {item!r}")
    return tuple(out)


@dataclass(frozen=True)
class DensitySpec:
    name: str
    eps: tuple[float, ...] = (0.0,)
    coeffs: tuple[float, ...] | None = None

    def label(self, eps: float) -> str:
        if self.name == "zero":
            return "zero"
        if self.name == "cosine":
            return f"cosine({eps:g})"
        return f"poly-cos({','.join('%g' % c for c in self.coeffs)})"


@dataclass(frozen=True)
class SolitonSpec:
    f_name: str
    f_eps: float
    gamma: float | str  # a number, or "einstein" for (n-1)/radius^2


@dataclass(frozen=True)
class ExperimentConfig:
    family: str
    n: tuple[int, ...]
    radius: float
    length: float | None
    density: DensitySpec
    grids: tuple[int, ...]
    b: float
    bins: int
    l_max: int
    sigma: float
    workers: int
    checks: tuple[str, ...]
    tolerances: dict
    soliton: SolitonSpec | None
    out_dir: str | None
    formats: tuple[str, ...]

    def instances(self) -> list["InstanceSpec"]:
        eps_values = self.density.eps if self.density.name == "cosine" else (0.0,)
        out = []
        for n, eps, N in itertools.product(self.n, eps_values, self.grids):
            out.append(InstanceSpec(family=self.family, n=n, eps=eps, N=N,
                                    density_label=self.density.label(eps)))
        out.sort(key=lambda i: i.sort_key)
        return out


@dataclass(frozen=True)
class InstanceSpec:
    family: str
    n: int
    eps: float
    N: int
    density_label: str

    @property
    def key(self) -> str:
        return f"{self.family}:n={self.n}:density={self.density_label}:N={self.N}"

    @property
    def sort_key(self):
        return (self.family, self.n, self.eps, self.N)


def _parse_density(obj, family: str) -> DensitySpec:
    if obj is None:
        return DensitySpec(name="zero")
    _require_keys(obj, "family.density", ("name",), ("eps", "coeffs"))
    name = obj["name"]
    if name not in DENSITY_FAMILIES:
        raise ConfigError(f"unknown density family {name!r}; known: {DENSITY_FAMILIES}")
    if name == "zero":
        return DensitySpec(name="zero")
    if name == "cosine":
        if "eps" not in obj:
            raise ConfigError("cosine density needs 'eps'")
        return DensitySpec(name="cosine", eps=_as_list(obj["eps"], "density.eps", float))
    if "coeffs" not in obj:
        raise ConfigError("poly-cos density needs 'coeffs'")
    if family == "circle":
        raise ConfigError("poly-cos densities are not periodic; circles take 'cosine' or 'zero'")
    return DensitySpec(name="poly-cos", coeffs=_as_list(obj["coeffs"], "density.coeffs", float))


def parse_config(data: dict, tolerance_profile: str | None = None) -> ExperimentConfig:
    """Validate a raw configuration dictionary into an ExperimentConfig."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a JSON object")
    _require_keys(data, "config", ("schema_version", "family", "checks"),
                  ("grids", "b", "bins", "l_max", "sigma", "workers",
                   "tolerance_profile", "tolerances", "soliton", "output"))
    if data["schema_version"] != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {data['schema_version']!r}; "
                          f"this build reads version {SCHEMA_VERSION}")

    fam = data["family"]
    _require_keys(fam, "family", ("name",), ("n", "radius", "length", "density"))
    name = fam["name"]
    if name not in MANIFOLD_FAMILIES:
        raise ConfigError(f"unknown manifold family {name!r}; known: {MANIFOLD_FAMILIES}")
    if name == "circle":
        n = _as_list(fam.get("n", 1), "family.n", int)
        if n != (1,):
            raise ConfigError("circle models are one-dimensional; omit 'n' or set it to 1")
        if "length" not in fam:
            raise ConfigError("circle models need 'length' (the circumference)")
        if "radius" in fam:
            raise ConfigError("circle models take 'length', not 'radius'")
    else:
        if "n" not in fam:
            raise ConfigError(f"{name} models need 'n'")
        n = _as_list(fam["n"], "family.n", int)
        if any(v < 2 for v in n):
            raise ConfigError("interval-sphere dimensions must satisfy n >= 2")
    if name == "sphere" and "length" in fam:
        raise ConfigError("sphere models take 'radius', not 'length'")
    if name == "stretched-sphere":
        if "length" not in fam:
            raise ConfigError("stretched-sphere models need 'length'")
        if "radius" in fam:
            raise ConfigError("stretched-sphere models take 'length', not 'radius'")
    radius = float(fam.get("radius", 1.0))
    if radius <= 0:
        raise ConfigError("radius must be positive")
    length = fam.get("length")
    if length is not None and float(length) <= 0:
        raise ConfigError("length must be positive")
    density = _parse_density(fam.get("density"), name)

    checks = tuple(data["checks"])
    if not checks:
        raise ConfigError("checks must be a non-empty list")
    for c in checks:
        if c not in CHECK_NAMES:
            raise ConfigError(f"unknown check {c!r}; known: {CHECK_NAMES}")

    grids = _as_list(data.get("grids", 1000), "grids", int)
    if any(g < 8 for g in grids):
        raise ConfigError("grid sizes must be at least 8")

    profile = tolerance_profile or data.get("tolerance_profile", "default")
    if profile not in TOLERANCE_PROFILES:
        raise ConfigError(f"unknown tolerance profile {profile!r}")
    tolerances = dict(TOLERANCE_PROFILES[profile])
    for key, value in (data.get("tolerances") or {}).items():
        if key not in tolerances:
            raise ConfigError(f"unknown tolerance {key!r}; known: {sorted(tolerances)}")
        if not (isinstance(value, (int, float)) and value > 0):
            raise ConfigError(f"tolerance {key!r} must be a positive number")
        tolerances[key] = float(value)

    soliton = None
    if data.get("soliton") is not None:
        sob = data["soliton"]
        _require_keys(sob, "soliton", ("gamma",), ("f",))
        fobj = sob.get("f") or {"name": "zero"}
        _require_keys(fobj, "soliton.f", ("name",), ("eps",))
        if fobj["name"] not in ("zero", "cosine"):
            raise ConfigError("soliton potentials support families 'zero' and 'cosine'")
        gamma = sob["gamma"]
        if gamma != "einstein" and not (isinstance(gamma, (int, float)) and gamma > 0):
            raise ConfigError("soliton gamma must be positive or the string 'einstein'")
        soliton = SolitonSpec(f_name=fobj["name"], f_eps=float(fobj.get("eps", 0.0)),
                              gamma=gamma if gamma == "einstein" else float(gamma))
    if "soliton" in checks and soliton is None:
        raise ConfigError("the 'soliton' check needs a 'soliton' section")

    out = data.get("output") or {}
    _require_keys(out, "output", (), ("dir", "formats"))
    formats = tuple(out.get("formats", ["csv"]))
    for f in formats:
        if f not in FORMATS:
            raise ConfigError(f"unknown output format {f!r}; known: {FORMATS}")

    b = float(data.get("b", 1.01))
    if b <= 1.0:
        raise ConfigError("b must exceed 1")
    bins = int(data.get("bins", 200))
    if bins < 2:
        raise ConfigError("bins must be at least 2")
    l_max = int(data.get("l_max", 2))
    if l_max < 0:
        raise ConfigError("l_max must be nonnegative")
    workers = int(data.get("workers", 1))
    if workers < 1:
        raise ConfigError("workers must be at least 1")

    return ExperimentConfig(
        family=name, n=n, radius=radius,
        length=float(length) if length is not None else None,
        density=density, grids=grids, b=b, bins=bins, l_max=l_max,
        sigma=float(data.get("sigma", 1.0)), workers=workers, checks=checks,
        tolerances=tolerances, soliton=soliton,
        out_dir=out.get("dir"), formats=formats,
    )


def load_config(path: str | Path, tolerance_profile: str | None = None) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"configuration is not valid JSON: {exc}") from exc
    return parse_config(raw, tolerance_profile=tolerance_profile)


def build_model(config: ExperimentConfig, inst: InstanceSpec) -> geometry.WarpedManifold:
    """Instantiate the manifold for one instance of the sweep."""
    if config.family == "circle":
        length = config.length
        if config.density.name == "cosine":
            dens = geometry.circle_cosine_density(inst.eps, length)
        else:
            dens = geometry.zero_density()
        return geometry.circle(length, density=dens)

    length = config.length if config.family == "stretched-sphere" \
        else math.pi * config.radius
    if config.density.name == "cosine":
        dens = geometry.cosine_density(inst.eps, length)
    elif config.density.name == "poly-cos":
        dens = geometry.poly_cos_density(config.density.coeffs, length)
    else:
        dens = geometry.zero_density()
    if config.family == "sphere":
        return geometry.sphere(inst.n, radius=config.radius, density=dens)
    return geometry.interval_sphere(inst.n, length, density=dens)


def build_soliton_potential(config: ExperimentConfig, model) -> geometry.RadialProfile:
    spec = config.soliton
    if spec.f_name == "zero":
        return geometry.zero_density()
    return geometry.cosine_density(spec.f_eps, model.L)


def soliton_gamma(config: ExperimentConfig, n: int) -> float:
    spec = config.soliton
    if spec.gamma == "einstein":
        return (n - 1) / config.radius**2
    return float(spec.gamma)
