"""Run configuration: YAML file plus command-line overrides.

Theta specs are ``golden``, ``silver``, a decimal in (0, 1), or
``cf:PRE;PERIOD`` with comma-separated coefficients, e.g. ``cf:2,1;1``
for ``[2, 1, 1, 1, ...]`` or ``cf:;1,2`` for ``[1, 2, 1, 2, ...]``.
"""

import cmath
import copy
import math
from dataclasses import asdict, dataclass, field, fields

import yaml

from .cfrac import RotationNumber

PRECISION_MODES = ("auto", "double", "extended")
EXECUTION_ONLY = ("out", "workers")
CHECKS = ("herman", "scaling", "kappa", "tight", "deep", "triangle")


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field_name, message):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


def parse_theta(spec, depth=40):
    s = str(spec).strip()
    low = s.lower()
    if low == "golden":
        return RotationNumber.golden(depth)
    if low == "silver":
        return RotationNumber.silver(depth)
    if low.startswith("cf:"):
        body = s[3:]
        if ";" not in body:
            raise ConfigError("theta", "coefficient list needs ';' before the repeating block")
        pre_s, per_s = body.split(";", 1)
        try:
            pre = [int(x) for x in pre_s.split(",") if x.strip()]
            per = [int(x) for x in per_s.split(",") if x.strip()]
        except ValueError as exc:
            raise ConfigError("theta", f"bad coefficient in {s!r}") from exc
        if not per or any(a < 1 for a in pre + per):
            raise ConfigError("theta", "coefficients must be positive and the period nonempty")
        return RotationNumber.from_period(pre, per, depth, name=s)
    try:
        rot = RotationNumber.from_value(s, depth, name=s)
    except (ValueError, TypeError) as exc:
        raise ConfigError("theta", f"cannot parse {s!r} as golden, silver, a decimal or cf:...") from exc
    return rot


def parse_complex(spec, name="value"):
    """``"x+yj"`` style complex, or ``"t=0.25"`` for ``e^{2 pi i t}``."""
    if isinstance(spec, (int, float, complex)):
        return complex(spec)
    s = str(spec).strip().replace(" ", "")
    try:
        if s.startswith("t="):
            return cmath.exp(2j * math.pi * float(s[2:]))
        return complex(s)
    except ValueError as exc:
        raise ConfigError(name, f"cannot parse {spec!r} as a complex number") from exc


def _default_views():
    return [
        {"name": "P_full", "map": "P", "center": "0", "width": 3.0, "px": 800, "maxiter": 2000},
        {"name": "f_full", "map": "f", "center": "0", "width": 7.0, "px": 800, "maxiter": 2000},
        {"name": "P_omega", "map": "P", "center": "omega", "width": 0.5, "px": 800, "maxiter": 2000},
        {"name": "f_omega2", "map": "f", "center": "omega2", "width": 2.5, "px": 800, "maxiter": 2000},
    ]


def _default_geometry():
    return {
        "cloud_n": 1_000_000,
        "scaling_ns": [5, 22],
        "kappa_ns": [6, 17],
        "tight_ks": [3, 8],
        "deep_px": 4096,
        "deep_rmax": 0.25,
        "deep_maxiter": 2000,
        "triangle_length": 0.05,
    }


@dataclass
class RunConfig:
    theta: str = "golden"
    a: float = 0.2
    b: str = None
    depth: int = 25
    n: int = 8
    tol: float = 1e-10
    rotation_iterates: int = 100_000
    precision: str = "auto"
    dps: int = 30
    seed: int = 0
    out: str = "herman-out"
    workers: int = None
    palette: str = "classic"
    checks: list = field(default_factory=lambda: list(CHECKS))
    geometry: dict = field(default_factory=_default_geometry)
    views: list = field(default_factory=_default_views)

    def __post_init__(self):
        self.validate()

    def validate(self):
        parse_theta(self.theta, 4)
        if not isinstance(self.a, (int, float)) or not 0 < float(self.a) < 1 / 3:
            raise ConfigError("a", f"slice parameter must lie in (0, 1/3), got {self.a!r}")
        if self.b is not None:
            parse_complex(self.b, "b")
        if self.precision not in PRECISION_MODES:
            raise ConfigError("precision", f"must be one of {PRECISION_MODES}")
        for name in ("depth", "n", "rotation_iterates", "dps"):
            if not isinstance(getattr(self, name), int) or getattr(self, name) < 1:
                raise ConfigError(name, "must be a positive integer")
        bad = [c for c in self.checks if c not in CHECKS]
        if bad:
            raise ConfigError("checks", f"unknown checks {bad}; choose from {CHECKS}")
        unknown = set(self.geometry) - set(_default_geometry())
        if unknown:
            raise ConfigError("geometry", f"unknown keys {sorted(unknown)}")
        for v in self.views:
            if v.get("map") not in ("P", "f"):
                raise ConfigError("views", f"view {v.get('name')!r}: map must be P or f")

    @property
    def rotation(self):
        return parse_theta(self.theta, max(self.depth, 40))

    @property
    def work_dps(self):
        """``dps`` argument for the orbit routines under the precision mode."""
        return {"auto": None, "double": 0, "extended": self.dps}[self.precision]

    def geom(self, key):
        return self.geometry.get(key, _default_geometry()[key])

    def to_dict(self):
        d = asdict(self)
        d["a"] = float(d["a"])
        d["tol"] = float(d["tol"])
        return d

    def report_dict(self):
        """Config as embedded in reports: execution-only fields (``out``, ``workers``) dropped."""
        d = self.to_dict()
        for k in EXECUTION_ONLY:
            d.pop(k, None)
        return d

    def dump(self):
        return yaml.safe_dump(self.to_dict(), sort_keys=True)


_FIELD_NAMES = {f.name for f in fields(RunConfig)}


def from_mapping(data, overrides=None):
    data = copy.deepcopy(dict(data or {}))
    unknown = set(data) - _FIELD_NAMES
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown configuration key")
    for k, v in (overrides or {}).items():
        if v is None:
            continue
        if k == "geometry":
            merged = dict(data.get("geometry") or _default_geometry())
            merged.update(v)
            data[k] = merged
        else:
            data[k] = v
    geo = _default_geometry()
    geo.update(data.get("geometry") or {})
    data["geometry"] = geo
    for k in ("a", "tol"):
        if k in data and isinstance(data[k], str):
            try:
                data[k] = float(data[k])
            except ValueError as exc:
                raise ConfigError(k, f"not a number: {data[k]!r}") from exc
    try:
        return RunConfig(**data)
    except TypeError as exc:
        raise ConfigError("config", str(exc)) from exc


def load_config(path=None, overrides=None):
    """Read a YAML config (optional) and apply non-``None`` overrides."""
    data = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            loaded = yaml.safe_load(fh)
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError("config", "top level must be a mapping")
        data = loaded
    return from_mapping(data, overrides)
