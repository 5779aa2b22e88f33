"""YAML experiment configuration: defaults, merging, validation and object construction."""

from __future__ import annotations

import copy
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np
import yaml

from .amplitudes import Subspace
from .correlations import FullProbePointSignal, Grid2D, PointPinholesX
from .modes import BeamGeometry
from .pump import ColdCloud, PumpSpec, UniformCell
from .quadrature import QuadratureConfig

L_MAX_LIMIT = 6
P_MAX_LIMIT = 8
SWEEP_PARAMETERS = ("lT", "L", "w0")

DEFAULTS: dict = {
    "beam": {"w0": 1.0e-3, "wavelength": 780e-9},
    "pump": {"modes": [{"ell": 0, "q": 0, "re": 1.0, "im": 0.0}], "normalize": False},
    "medium": {"kind": "cell", "L": 0.05, "R_t": None, "L_l": None},
    "subspace": {"l_max": 2, "p_max": 4, "ell_center": 0},
    "representation": "position",
    "expansion": {"order": 2, "momentum_order": 12, "momentum_method": "quadrature"},
    "quadrature": asdict(QuadratureConfig()),
    "detection": {
        "kind": "point-pinholes",
        "planes": None,
        "grid": {"half_extent_w": 3.0, "n": 128},
        "reference": True,
    },
    "sweep": {"parameter": "lT", "values": [0, 2, 4, 6], "start": None, "stop": None, "steps": None, "scale": "linear"},
    "output": {"dir": "out", "format": "csv"},
    "threads": 1,
}


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


def _merge(base: dict, override: dict, path: str = "") -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key '{where}'")
        if isinstance(base[key], dict) and key != "quadrature":
            if not isinstance(value, dict):
                raise ConfigError(f"'{where}' must be a mapping")
            out[key] = _merge(base[key], value, where + ".")
        elif key == "quadrature":
            if not isinstance(value, dict):
                raise ConfigError("'quadrature' must be a mapping")
            known = {f.name for f in fields(QuadratureConfig)}
            bad = sorted(set(value) - known)
            if bad:
                raise ConfigError(f"unknown quadrature keys {bad}")
            out[key].update(value)
        else:
            out[key] = value
    return out


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description; ``raw`` is the fully resolved mapping."""

    raw: dict

    @classmethod
    def from_mapping(cls, data: dict | None) -> "ExperimentConfig":
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError("config root must be a mapping")
        cfg = cls(_merge(DEFAULTS, data))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path | None) -> "ExperimentConfig":
        if path is None:
            return cls.from_mapping({})
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            raise ConfigError(f"malformed YAML: {exc}") from exc
        return cls.from_mapping(data)

    def updated(self, **sections) -> "ExperimentConfig":
        """Copy with top-level overrides, re-validated."""
        raw = copy.deepcopy(self.raw)
        for key, value in sections.items():
            if isinstance(value, dict):
                raw[key] = _merge(raw[key], value, key + ".") if key != "quadrature" else {**raw[key], **value}
            else:
                raw[key] = value
        cfg = ExperimentConfig(raw)
        cfg.validate()
        return cfg

    def dump(self) -> str:
        return yaml.safe_dump(self.raw, sort_keys=True, default_flow_style=False)

    # ------------------------------------------------------------ validation

    def validate(self):
        try:
            self.beam()
            self.pump()
            self.medium()
            self.quadrature()
            self.subspace()
            self.planes()
            self.grid()
            self.sweep_values()
        except ConfigError:
            raise
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc
        if self.raw["representation"] not in ("position", "momentum"):
            raise ConfigError("representation must be 'position' or 'momentum'")
        if self.raw["output"]["format"] not in ("csv", "json"):
            raise ConfigError("output.format must be 'csv' or 'json'")
        for key in ("order", "momentum_order"):
            v = self.raw["expansion"][key]
            if not isinstance(v, int) or v < 0:
                raise ConfigError(f"expansion.{key} must be a non-negative integer")
        if self.raw["expansion"]["momentum_method"] not in ("quadrature", "analytic"):
            raise ConfigError("expansion.momentum_method must be 'quadrature' or 'analytic'")
        if not isinstance(self.raw["threads"], int) or self.raw["threads"] < 1:
            raise ConfigError("threads must be a positive integer")
        if self.raw["detection"]["kind"] not in ("point-pinholes", "full-probe"):
            raise ConfigError("detection.kind must be 'point-pinholes' or 'full-probe'")

    # ------------------------------------------------------------ builders

    def beam(self) -> BeamGeometry:
        b = self.raw["beam"]
        return BeamGeometry(float(b["w0"]), float(b["wavelength"]))

    def pump(self) -> PumpSpec:
        p = self.raw["pump"]
        modes = p["modes"]
        if not isinstance(modes, list) or not modes:
            raise ConfigError("pump.modes must be a non-empty list")
        weights = {}
        for entry in modes:
            key = (int(entry["ell"]), int(entry["q"]))
            if key in weights:
                raise ConfigError(f"pump mode {key} listed twice")
            weights[key] = complex(float(entry.get("re", 0.0)), float(entry.get("im", 0.0)))
        if p["normalize"]:
            return PumpSpec.from_weights(weights, self.beam())
        return PumpSpec(weights, self.beam())

    def medium(self):
        m = self.raw["medium"]
        if m["kind"] == "cell":
            return UniformCell(float(m["L"]))
        if m["kind"] == "cloud":
            if m["R_t"] is None or m["L_l"] is None:
                raise ConfigError("cloud medium needs R_t and L_l")
            return ColdCloud(float(m["R_t"]), float(m["L_l"]))
        raise ConfigError("medium.kind must be 'cell' or 'cloud'")

    def medium_length(self) -> float:
        med = self.medium()
        return med.L if isinstance(med, UniformCell) else med.L_l

    def subspace(self) -> Subspace:
        s = self.raw["subspace"]
        sub = Subspace(int(s["l_max"]), int(s["p_max"]), int(s["ell_center"]))
        if sub.l_max > L_MAX_LIMIT or sub.p_max > P_MAX_LIMIT:
            raise ConfigError(f"subspace limits exceed l_max <= {L_MAX_LIMIT}, p_max <= {P_MAX_LIMIT}")
        return sub

    def quadrature(self) -> QuadratureConfig:
        return QuadratureConfig(**self.raw["quadrature"])

    def planes(self) -> list[float]:
        """Detection planes (m); defaults to the medium exit and three fractions of z_R."""
        planes = self.raw["detection"]["planes"]
        half = self.medium_length() / 2.0
        if planes is None:
            zr = self.beam().z_R
            return [half, 0.25 * zr, 0.5 * zr, zr]
        if not isinstance(planes, list) or not planes:
            raise ConfigError("detection.planes must be a non-empty list")
        out = [float(z) for z in planes]
        for z in out:
            PointPinholesX(z, self.medium_length())
        return out

    def detection(self, z: float):
        kind = self.raw["detection"]["kind"]
        cls = PointPinholesX if kind == "point-pinholes" else FullProbePointSignal
        return cls(z, self.medium_length())

    def grid(self, z: float = 0.0) -> Grid2D:
        """Square grid of half-width ``half_extent_w * w(z)``."""
        g = self.raw["detection"]["grid"]
        half = float(g["half_extent_w"]) * float(self.beam().width(z))
        n = int(g["n"])
        if not half > 0:
            raise ConfigError("grid extent must be positive")
        if n < 2:
            raise ConfigError("grid needs at least two samples per axis")
        return Grid2D.square(half, n)

    def sweep_values(self) -> tuple[str, list]:
        s = self.raw["sweep"]
        name = s["parameter"]
        if name not in SWEEP_PARAMETERS:
            raise ConfigError(f"sweep.parameter must be one of {SWEEP_PARAMETERS}")
        if s["values"] is not None and s["start"] is None:
            values = list(s["values"])
        else:
            if None in (s["start"], s["stop"], s["steps"]):
                raise ConfigError("sweep needs either values or start/stop/steps")
            steps = int(s["steps"])
            if steps < 1:
                raise ConfigError("sweep range is empty")
            lo, hi = float(s["start"]), float(s["stop"])
            if s["scale"] == "log":
                if lo <= 0 or hi <= 0:
                    raise ConfigError("log sweep needs positive bounds")
                values = list(np.geomspace(lo, hi, steps))
            elif s["scale"] == "linear":
                values = list(np.linspace(lo, hi, steps))
            else:
                raise ConfigError("sweep.scale must be 'linear' or 'log'")
        if not values:
            raise ConfigError("sweep range is empty")
        if name == "lT":
            if any(int(v) != v or int(v) % 2 for v in values):
                raise ConfigError("lT sweep values must be even integers (pure pumps u_{lT/2,0})")
            values = [int(v) for v in values]
        else:
            values = [float(v) for v in values]
            if any(not v > 0 or math.isinf(v) for v in values):
                raise ConfigError(f"{name} sweep values must be positive and finite")
        return name, values
