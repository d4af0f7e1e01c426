"""Flat ``key = value`` run configuration files.

Keys may carry a dotted section (``stratified.B = 0.3``).  Lines starting
with ``#`` and trailing ``# ...`` are comments.  Tuples are comma separated.
"""
from dataclasses import dataclass, fields, replace
import math

from .scenarios import DEFAULTS, ScenarioConfig

# dotted key -> ScenarioConfig field
KEYS = {
    "grid.nx": "nx", "grid.ny": "ny", "grid.lx": "Lx", "grid.ly": "Ly",
    "time.cfl": "sigma", "time.sigma": "sigma", "time.t_end": "t_end", "time.dt_max": "dt_max",
    "output.times": "output_times",
    "translate.velocity": "velocity",
    "rotate.omega": "omega", "rotate.center": "circle_center", "rotate.radius": "circle_radius",
    "rotate.rotation_center": "rotation_center",
    "stratified.ra": "Ra", "stratified.b": "B", "stratified.a": "A", "stratified.k": "k",
    "rt.rab": "rab",
    "box.rho0": "rho0", "box.rho1": "rho1", "box.mu": "mu", "box.g": "gravity", "box.l": "length",
    "amr.levels": "amr_levels", "amr.eps_vof": "eps_vof", "amr.band_width": "band_width",
    "amr.uniform": "amr_uniform",
    "stokes.tol": "stokes_tol", "stokes.max_iter": "stokes_max_iter",
    "stokes.method": "stokes_method",
    "thermal.tol": "thermal_tol",
    "coupling.buoyancy": "buoyancy", "vof.correction": "correction",
}
RUN_KEYS = ("run.output_dir", "run.seed", "run.threads", "output.every")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    scenario: ScenarioConfig
    output_dir: str = "output"
    every: int = 1
    seed: int = 0
    threads: int = None


def _convert(raw, like, key):
    try:
        if isinstance(like, tuple):
            parts = [p.strip() for p in raw.split(",") if p.strip()]
            return tuple(float(p) for p in parts)
        if isinstance(like, bool):
            return raw.lower() in ("1", "true", "yes", "on")
        if isinstance(like, int):
            return int(raw)
        if isinstance(like, float):
            return math.inf if raw.lower() in ("inf", "none") else float(raw)
        return raw
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def parse_lines(lines):
    """Ordered ``(key, value)`` pairs; keys are lower-cased."""
    pairs = []
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key = value")
        k, v = line.split("=", 1)
        k = k.strip().lower()
        if not k:
            raise ConfigError(f"line {n}: empty key")
        pairs.append((k, v.strip()))
    return pairs


def config_from_pairs(pairs):
    kv = dict(pairs)
    kind = kv.pop("scenario", None)
    if kind is None:
        raise ConfigError("missing 'scenario'")
    if kind not in DEFAULTS:
        raise ConfigError(f"unknown scenario {kind!r}")
    base = ScenarioConfig(kind=kind, **DEFAULTS[kind])
    proto = {f.name: getattr(base, f.name) for f in fields(ScenarioConfig)}
    over = {}
    run = {}
    for k, v in kv.items():
        if k in RUN_KEYS:
            run[k] = v
            continue
        name = KEYS.get(k)
        if name is None:
            raise ConfigError(f"unknown key {k!r}")
        over[name] = _convert(v, proto[name], k)
    if "length" in over:
        over.setdefault("Lx", over["length"])
        over.setdefault("Ly", over["length"])
    try:
        cfg = replace(base, **over)
    except ValueError as e:
        raise ConfigError(str(e)) from None
    rc = RunConfig(cfg)
    if "run.output_dir" in run:
        rc.output_dir = run["run.output_dir"]
    if "run.seed" in run:
        rc.seed = _convert(run["run.seed"], 0, "run.seed")
    if "run.threads" in run:
        rc.threads = _convert(run["run.threads"], 0, "run.threads")
    if "output.every" in run:
        rc.every = max(1, _convert(run["output.every"], 0, "output.every"))
    return rc


def load_config(path):
    with open(path) as fh:
        return config_from_pairs(parse_lines(fh))


def loads_config(text):
    return config_from_pairs(parse_lines(text.splitlines()))
