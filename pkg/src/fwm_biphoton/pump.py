"""Structured pumps, the squared-pump function and its LG expansion.

The pump enters the four-wave-mixing interaction squared, ``V = Vp**2``.
``V`` is expanded in LG modes of the pump waist; only charges ``m = l + l'``
reachable from pairs of pump components appear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Union

import numpy as np

from .modes import BeamGeometry, ModeIndex, lg_mode, lg_radial
from .quadrature import DEFAULT_QUADRATURE, QuadratureConfig, integrate_1d

NORM_TOL = 1e-12
DEFAULT_ORDER = 2


@dataclass(frozen=True)
class UniformCell:
    """Vapor cell: uniform density over ``|z| <= L/2``, transversely unbounded."""

    L: float

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError(f"cell length must be positive, got {self.L}")

    @property
    def length(self) -> float:
        return self.L


@dataclass(frozen=True)
class ColdCloud:
    """Gaussian cloud ``exp(-r^2/R_t^2 - 4 z^2/L_l^2)``."""

    R_t: float
    L_l: float

    def __post_init__(self):
        if not (self.R_t > 0 and self.L_l > 0):
            raise ValueError(f"cloud radii must be positive, got R_t={self.R_t}, L_l={self.L_l}")

    @property
    def length(self) -> float:
        return self.L_l


MediumGeometry = Union[UniformCell, ColdCloud]


@dataclass(frozen=True)
class PumpSpec:
    """Pump field as a normalized superposition ``sum c_{l,q} u_{l,q}``."""

    coefficients: Mapping[ModeIndex, complex]
    beam: BeamGeometry

    def __post_init__(self):
        if not self.coefficients:
            raise ValueError("pump needs at least one LG component")
        coeffs = {ModeIndex(*k) if not isinstance(k, ModeIndex) else k: complex(v)
                  for k, v in self.coefficients.items()}
        total = math.fsum(abs(c) ** 2 for c in coeffs.values())
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"pump coefficients must satisfy sum |c|^2 = 1, got {total!r}")
        object.__setattr__(self, "coefficients", dict(sorted(coeffs.items())))

    @classmethod
    def from_weights(cls, weights: Mapping, beam: BeamGeometry) -> "PumpSpec":
        """Build a pump from unnormalized weights, rescaling to unit norm."""
        if not weights:
            raise ValueError("pump needs at least one LG component")
        norm = math.sqrt(math.fsum(abs(complex(v)) ** 2 for v in weights.values()))
        if norm == 0.0:
            raise ValueError("pump weights are all zero")
        return cls({ModeIndex(*k) if not isinstance(k, ModeIndex) else k: complex(v) / norm
                    for k, v in weights.items()}, beam)

    @classmethod
    def single(cls, ell: int, p: int, beam: BeamGeometry) -> "PumpSpec":
        return cls({ModeIndex(ell, p): 1.0}, beam)

    @classmethod
    def gaussian(cls, beam: BeamGeometry) -> "PumpSpec":
        return cls.single(0, 0, beam)

    def pairs(self):
        """Ordered pairs ``((a, c_a), (b, c_b))`` over all components, including a == b."""
        items = list(self.coefficients.items())
        return [(x, y) for x in items for y in items]

    def charges(self) -> list[int]:
        """Total charges ``l + l'`` reachable by pairs of pump components."""
        return sorted({a.ell + b.ell for (a, _), (b, _) in self.pairs()})

    def field(self, r, phi, z=0.0):
        """Pump amplitude ``Vp(r, phi, z)``."""
        out = 0.0
        for idx, c in self.coefficients.items():
            out = out + c * lg_mode(idx.ell, idx.p, r, phi, z, self.beam)
        return out


@dataclass(frozen=True)
class ProductExpansion:
    """LG expansion ``V = sum a_{m,n} u_{m,n}`` truncated at radial order ``g``.

    ``coefficients`` carry the absolute scale (units 1/m). ``norm`` is the
    L2 norm of the expanded function, so ``fidelity`` is the fraction of it
    captured by the kept terms.
    """

    coefficients: Mapping[ModeIndex, complex]
    truncation_order: int
    fidelity: float
    norm: float
    beam: BeamGeometry
    transverse_radius: float = math.inf
    meta: dict = field(default_factory=dict, compare=False)

    def charges(self) -> list[int]:
        return sorted({k.ell for k in self.coefficients})

    def normalized(self) -> dict[ModeIndex, complex]:
        """Coefficients divided by the L2 norm of the expanded function."""
        return {k: v / self.norm for k, v in self.coefficients.items()}

    def unit_vector(self) -> dict[ModeIndex, complex]:
        """Kept coefficients rescaled to unit Euclidean norm."""
        s = math.sqrt(math.fsum(abs(v) ** 2 for v in self.coefficients.values()))
        return {k: v / s for k, v in self.coefficients.items()}

    def radial_vector(self, m: int = 0, unit: bool = True) -> np.ndarray:
        """Coefficients ``a_{m,0..g}`` as an array (unit-norm over all kept terms by default)."""
        src = self.unit_vector() if unit else self.coefficients
        return np.array([src.get(ModeIndex(m, n), 0.0) for n in range(self.truncation_order + 1)])

    def field(self, r, phi, z=0.0):
        """Truncated expansion evaluated in position space."""
        out = 0.0
        for idx, a in self.coefficients.items():
            out = out + a * lg_mode(idx.ell, idx.p, r, phi, z, self.beam)
        return out


def effective_waist(w0: float, R_t: float) -> float:
    """Waist combining the beam with a Gaussian transverse density of radius ``R_t``."""
    if not w0 > 0 or not R_t > 0:
        raise ValueError("w0 and R_t must be positive")
    if math.isinf(R_t):
        return w0
    return (1.0 / w0**2 + 1.0 / (2.0 * R_t**2)) ** -0.5


def _radial_product(a: ModeIndex, b: ModeIndex, target: ModeIndex, beam, r):
    return lg_radial(a.ell, a.p, r, beam) * lg_radial(b.ell, b.p, r, beam) * np.conj(
        lg_radial(target.ell, target.p, r, beam)
    )


def product_expansion_coeff(
    a: ModeIndex,
    b: ModeIndex,
    target: ModeIndex,
    beam: BeamGeometry,
    qcfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> complex:
    """Overlap ``int u_a u_b u*_target d^2r`` at the waist plane (units 1/m)."""
    if a.ell + b.ell != target.ell:
        return 0j
    rule = qcfg.position_rule(beam.w0)
    val = integrate_1d(lambda r: _radial_product(a, b, target, beam, r) * r, rule)
    return complex(2.0 * math.pi * val)


def pump_function_radial(pump: PumpSpec, r) -> dict[int, np.ndarray]:
    """Radial parts ``V_m(r)`` of ``V = sum_m V_m(r) exp(i m phi)`` at the waist."""
    out: dict[int, np.ndarray] = {}
    beam = pump.beam
    for (a, ca), (b, cb) in pump.pairs():
        m = a.ell + b.ell
        term = ca * cb * lg_radial(a.ell, a.p, r, beam) * lg_radial(b.ell, b.p, r, beam)
        out[m] = out[m] + term if m in out else term
    return dict(sorted(out.items()))


def _transverse_factor(r, R_t: float):
    if math.isinf(R_t):
        return np.ones_like(r)
    return np.exp(-(r**2) / R_t**2)


def _expand(pump: PumpSpec, g: int, R_t: float, qcfg: QuadratureConfig, kind: str) -> ProductExpansion:
    if g < 0 or int(g) != g:
        raise ValueError(f"truncation order must be a non-negative integer, got {g}")
    beam = pump.beam
    r, w = qcfg.position_rule(beam.w0).points()
    dens = _transverse_factor(r, R_t)
    vm = pump_function_radial(pump, r)
    coeffs: dict[ModeIndex, complex] = {}
    norm2 = 0.0
    for m, v in vm.items():
        f = v * dens
        norm2 += 2.0 * math.pi * float(np.sum(w * r * np.abs(f) ** 2))
        for n in range(g + 1):
            basis = lg_radial(m, n, r, beam)
            coeffs[ModeIndex(m, n)] = complex(2.0 * math.pi * np.sum(w * r * f * np.conj(basis)))
    kept = math.fsum(abs(c) ** 2 for c in coeffs.values())
    norm = math.sqrt(norm2)
    fid = min(1.0, kept / norm2) if norm2 > 0 else 0.0
    return ProductExpansion(coeffs, int(g), fid, norm, beam, R_t, {"kind": kind})


def square_pump_expansion(
    pump: PumpSpec, g: int = DEFAULT_ORDER, qcfg: QuadratureConfig = DEFAULT_QUADRATURE
) -> ProductExpansion:
    """Expand ``V = Vp**2`` in LG modes of the pump waist up to radial order ``g``.

    By linearity ``a_{m,n} = sum c_a c_b s(a, b -> (m, n))``; the sum over
    pump pairs is folded into ``V_m`` before the single radial projection.
    """
    return _expand(pump, g, math.inf, qcfg, "uniform")


def cloud_modified_expansion(
    pump: PumpSpec,
    medium: ColdCloud,
    g: int = DEFAULT_ORDER,
    qcfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> ProductExpansion:
    """Expand ``exp(-r^2/R_t^2) Vp**2`` in LG modes of the pump waist."""
    if not isinstance(medium, ColdCloud):
        raise TypeError("cloud_modified_expansion needs a ColdCloud medium")
    return _expand(pump, g, medium.R_t, qcfg, "cloud")


def expansion_for_medium(
    pump: PumpSpec, medium: MediumGeometry, g: int = DEFAULT_ORDER,
    qcfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> ProductExpansion:
    if isinstance(medium, ColdCloud):
        return cloud_modified_expansion(pump, medium, g, qcfg)
    return square_pump_expansion(pump, g, qcfg)


def gaussian_square_coefficient(q: int) -> float:
    """Closed form of ``s_q / ||u00^2||`` for the Gaussian pump: ``sqrt(8/9) 3^-q``."""
    return math.sqrt(8.0 / 9.0) * 3.0 ** (-q)


def gaussian_square_fidelity(g: int) -> float:
    return 1.0 - 9.0 ** (-(g + 1))
