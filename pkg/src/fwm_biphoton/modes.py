"""Laguerre-Gaussian modes, their angular spectra and supporting special functions.

Conventions used throughout the package:

* azimuthal phase ``exp(+i l phi)`` in both position and wavevector space;
* forward transverse Fourier transform ``(1/2pi) int f(r) exp(+i rho.r) d^2r``;
* free-space propagation of an angular spectrum multiplies by
  ``exp(+i rho^2 z / 2k)``, consistent with the ``exp(-i k r^2 / 2R + i Gouy)``
  phases of the position-space mode.

Lengths are SI metres, wavenumbers rad/m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

DEFAULT_WAVELENGTH = 780e-9

# explicit series is exact and cheap up to this degree; above it the
# three-term recurrence avoids the alternating-sum cancellation
_SERIES_MAX_DEGREE = 12


@dataclass(frozen=True, order=True)
class ModeIndex:
    """LG mode label: topological charge ``ell`` and radial index ``p``."""

    ell: int
    p: int

    def __post_init__(self):
        if int(self.p) != self.p or int(self.ell) != self.ell:
            raise ValueError(f"mode indices must be integers, got {self!r}")
        if self.p < 0:
            raise ValueError(f"radial index must be non-negative, got p={self.p}")

    @property
    def order(self) -> int:
        """Total mode order ``N = 2p + |ell|``."""
        return 2 * self.p + abs(self.ell)


@dataclass(frozen=True)
class BeamGeometry:
    """Waist and wavelength of the LG basis; derived k and Rayleigh range."""

    w0: float
    wavelength: float = DEFAULT_WAVELENGTH

    def __post_init__(self):
        if not self.w0 > 0:
            raise ValueError(f"w0 must be positive, got {self.w0}")
        if not self.wavelength > 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")

    @property
    def k(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def z_R(self) -> float:
        return 0.5 * self.k * self.w0**2

    def width(self, z):
        return self.w0 * np.sqrt(1.0 + (np.asarray(z) / self.z_R) ** 2)

    def curvature_radius(self, z):
        """R(z); infinite at the waist plane."""
        z = np.asarray(z, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(z == 0.0, np.inf, z + self.z_R**2 / np.where(z == 0.0, 1.0, z))

    def gouy_phase(self, order, z):
        return (order + 1) * np.arctan(np.asarray(z) / self.z_R)


@dataclass(frozen=True)
class PolarPoint:
    """Point in cylindrical coordinates; ``r`` may equally be a radial wavenumber."""

    r: float
    phi: float = 0.0
    z: float = 0.0

    def __post_init__(self):
        if self.r < 0:
            raise ValueError(f"radial coordinate must be non-negative, got {self.r}")

    @classmethod
    def from_cartesian(cls, x: float, y: float, z: float = 0.0) -> "PolarPoint":
        return cls(math.hypot(x, y), math.atan2(y, x) % (2 * math.pi), z)


def laguerre_coefficients(p: int, alpha: int) -> np.ndarray:
    """Coefficients ``b_k`` of ``L_p^alpha(x) = sum_k b_k x^k``."""
    return np.array(
        [(-1) ** k * math.comb(p + alpha, p - k) / math.factorial(k) for k in range(p + 1)],
        dtype=float,
    )


def assoc_laguerre(p: int, alpha: int, x):
    """Associated Laguerre polynomial ``L_p^alpha(x)``.

    Explicit finite series for ``p <= 12``, upward three-term recurrence beyond.
    Accepts scalars or arrays; returns the same shape.
    """
    if p < 0 or alpha < 0:
        raise ValueError(f"need p >= 0 and alpha >= 0, got p={p}, alpha={alpha}")
    x = np.asarray(x, dtype=float)
    if p <= _SERIES_MAX_DEGREE:
        coeffs = laguerre_coefficients(p, alpha)
        # Horner from the highest power
        out = np.full_like(x, coeffs[-1])
        for c in coeffs[-2::-1]:
            out = out * x + c
        return out[()] if out.ndim == 0 else out
    prev = np.ones_like(x)
    cur = 1.0 + alpha - x
    for n in range(1, p):
        prev, cur = cur, ((2 * n + 1 + alpha - x) * cur - (n + alpha) * prev) / (n + 1)
    return cur[()] if cur.ndim == 0 else cur


def lg_norm(ell: int, p: int) -> float:
    """Normalisation ``sqrt(2 p! / (pi (p+|ell|)!))`` computed in log space."""
    return math.exp(0.5 * (math.log(2.0 / math.pi) + gammaln(p + 1) - gammaln(p + abs(ell) + 1)))


def lg_radial(ell: int, p: int, r, beam: BeamGeometry, z=0.0):
    """Everything in ``u_{ell,p}(r, phi, z)`` except the ``exp(i ell phi)`` factor."""
    r = np.asarray(r, dtype=float)
    z = np.asarray(z, dtype=float)
    w = beam.width(z)
    rw2 = 2.0 * r**2 / w**2
    amp = lg_norm(ell, p) / w * rw2 ** (abs(ell) / 2.0) * assoc_laguerre(p, abs(ell), rw2) * np.exp(-rw2 / 2)
    if not np.any(z):
        return amp.astype(complex)
    # -k r^2 / 2R(z), written to stay finite at z = 0
    curvature = -beam.k * r**2 * z / (2.0 * (z**2 + beam.z_R**2))
    order = 2 * p + abs(ell)
    return amp * np.exp(1j * (curvature + beam.gouy_phase(order, z)))


def lg_mode(ell: int, p: int, r, phi, z, beam: BeamGeometry):
    """Vectorised ``u_{ell,p}`` on broadcastable ``r, phi, z`` arrays (units 1/m)."""
    return lg_radial(ell, p, r, beam, z) * np.exp(1j * ell * np.asarray(phi))


def eval_lg_mode(idx: ModeIndex, beam: BeamGeometry, point: PolarPoint) -> complex:
    return complex(lg_mode(idx.ell, idx.p, point.r, point.phi, point.z, beam))


def lg_spectrum_reduced(ell: int, p: int, rho, beam: BeamGeometry):
    """Angular spectrum radial factor with ``rho^|ell|`` divided out.

    ``u~_{ell,p}(rho, varphi) = lg_spectrum_reduced * rho^|ell| * exp(i ell varphi)``.
    Useful wherever ``rho^|ell| exp(i ell varphi)`` is generated as a complex power.
    """
    rho = np.asarray(rho, dtype=float)
    c2 = beam.w0**2 / 2.0
    x = rho**2 * c2
    order = 2 * p + abs(ell)
    pref = lg_norm(ell, p) * beam.w0 / 2.0 * c2 ** (abs(ell) / 2.0) * 1j**order
    return pref * assoc_laguerre(p, abs(ell), x) * np.exp(-x / 2.0)


def lg_spectrum_radial(ell: int, p: int, rho, beam: BeamGeometry):
    """Angular spectrum at z = 0 without the ``exp(i ell varphi)`` factor."""
    rho = np.asarray(rho, dtype=float)
    return lg_spectrum_reduced(ell, p, rho, beam) * rho ** abs(ell)


def eval_lg_spectrum(idx: ModeIndex, beam: BeamGeometry, rho: float, varphi: float = 0.0) -> complex:
    """``u~_{ell,p}(rho, varphi)`` at z = 0 (units of metres)."""
    if rho < 0:
        raise ValueError(f"rho must be non-negative, got {rho}")
    return complex(lg_spectrum_radial(idx.ell, idx.p, rho, beam) * np.exp(1j * idx.ell * varphi))


def propagate_spectrum(value, beam: BeamGeometry, rho, z):
    """Paraxial free-space propagation of an angular-spectrum sample."""
    return value * np.exp(1j * np.asarray(rho) ** 2 * z / (2.0 * beam.k))


def paraxiality(rho, beam: BeamGeometry):
    """``|rho| / (sqrt(2) k)``; the paraxial treatment assumes this is small."""
    return np.abs(rho) / (math.sqrt(2.0) * beam.k)
