"""Spatial mode function and coincidence maps for the two detection schemes.

Detection planes share a longitudinal position ``z`` measured from the medium
centre (the basis waist plane); the medium exit is ``z = L/2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Union

import numpy as np

from .amplitudes import BiphotonAmplitudes
from .modes import BeamGeometry, PolarPoint, lg_mode
from .pump import PumpSpec


def _check_plane(z: float, medium_length: float):
    if medium_length < 0:
        raise ValueError("medium length must be non-negative")
    if z < medium_length / 2.0:
        raise ValueError(f"detection plane z={z} lies inside the medium (needs z >= {medium_length / 2})")


@dataclass(frozen=True)
class PointPinholesX:
    """Both photons detected by pinholes scanned along x at plane ``z``."""

    z: float
    medium_length: float = 0.0

    def __post_init__(self):
        _check_plane(self.z, self.medium_length)


@dataclass(frozen=True)
class FullProbePointSignal:
    """Probe collected over the whole plane, signal by a point detector at plane ``z``."""

    z: float
    medium_length: float = 0.0

    def __post_init__(self):
        _check_plane(self.z, self.medium_length)


DetectionConfig = Union[PointPinholesX, FullProbePointSignal]


@dataclass(frozen=True)
class Grid2D:
    """Uniform grid; ``samples[i, j]`` sits at ``(x[i], y[j])``."""

    x_range: tuple[float, float]
    y_range: tuple[float, float]
    nx: int
    ny: int
    samples: np.ndarray | None = None

    def __post_init__(self):
        for lo, hi in (self.x_range, self.y_range):
            if not hi > lo:
                raise ValueError(f"grid extent must be positive, got [{lo}, {hi}]")
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs at least two samples per axis")
        if self.samples is not None and np.shape(self.samples) != (self.nx, self.ny):
            raise ValueError(f"samples shape {np.shape(self.samples)} != ({self.nx}, {self.ny})")

    @classmethod
    def square(cls, half_extent: float, n: int) -> "Grid2D":
        return cls((-half_extent, half_extent), (-half_extent, half_extent), n, n)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_range[0], self.x_range[1], self.nx)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(self.y_range[0], self.y_range[1], self.ny)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.x, self.y, indexing="ij")

    def with_samples(self, samples) -> "Grid2D":
        return replace(self, samples=np.asarray(samples))


def _beam_of(amps: BiphotonAmplitudes) -> BeamGeometry:
    if amps.beam is None:
        raise ValueError("amplitudes carry no beam geometry; the LG basis is undefined")
    return amps.beam


def mode_table(amps: BiphotonAmplitudes, r, phi, z) -> np.ndarray:
    """Subspace modes evaluated on sample points: ``U[i_ell, p, ...]``."""
    beam = _beam_of(amps)
    sub = amps.subspace
    r = np.asarray(r, dtype=float)
    shape = np.broadcast_shapes(r.shape, np.shape(phi))
    out = np.empty((len(sub.ells), len(sub.ps)) + shape, dtype=complex)
    for i, ell in enumerate(sub.ells):
        for p in sub.ps:
            out[i, p] = lg_mode(int(ell), int(p), r, phi, z, beam)
    return out


def spatial_mode_function(amps: BiphotonAmplitudes, r_pr: PolarPoint, r_s: PolarPoint) -> complex:
    """``Psi(r_pr, r_s) = sum C u_pr(r_pr) u_s(r_s)`` with both points on one plane."""
    if r_pr.z != r_s.z:
        raise ValueError("both photons must be evaluated on the same z plane")
    upr = mode_table(amps, r_pr.r, r_pr.phi, r_pr.z)
    us = mode_table(amps, r_s.r, r_s.phi, r_s.z)
    return complex(np.sum(amps.values * upr[:, :, None, None] * us[None, None, :, :]))


def _axis_modes(amps, xs, z):
    xs = np.asarray(xs, dtype=float)
    phi = np.where(xs < 0, math.pi, 0.0)
    u = mode_table(amps, np.abs(xs), phi, z)
    return u.reshape(amps.subspace.one_sided_dim, len(xs))


def g2_point_map(amps: BiphotonAmplitudes, x_pr, x_s, z: float) -> np.ndarray:
    """``|Psi(X_pr, 0; X_s, 0)|^2`` on the outer product of two x-axis samplings."""
    upr = _axis_modes(amps, x_pr, z)
    us = _axis_modes(amps, x_s, z)
    c = amps.matrix()
    half = np.einsum("ab,ax->bx", c, upr, optimize=False)
    psi = np.einsum("bx,by->xy", half, us, optimize=False)
    return np.abs(psi) ** 2


def g2_point_detectors(amps: BiphotonAmplitudes, X_pr: float, X_s: float, z: float,
                       medium_length: float = 0.0) -> float:
    """Coincidence rate for two pinholes at ``(X_pr, 0)`` and ``(X_s, 0)`` on plane ``z``."""
    _check_plane(z, medium_length)
    return float(g2_point_map(amps, [X_pr], [X_s], z)[0, 0])


def g2_point_grid(amps: BiphotonAmplitudes, grid: Grid2D, detection: PointPinholesX) -> Grid2D:
    """Point-detector map over ``(X_pr, X_s) = (grid.x, grid.y)``."""
    return grid.with_samples(g2_point_map(amps, grid.x, grid.y, detection.z))


def _unit_peak(values: np.ndarray) -> np.ndarray:
    peak = float(np.max(values))
    if peak <= 0.0:
        raise ValueError("map is identically zero")
    return values / peak


def g2_full_probe_map(amps: BiphotonAmplitudes, grid: Grid2D, z: float = 0.0,
                      medium_length: float = 0.0) -> Grid2D:
    """Signal position map with the probe integrated over the plane, unit peak.

    Probe-mode orthonormality collapses the probe integral, leaving
    ``sum_pr |sum_s C[pr, s] u_s(R)|^2``.
    """
    _check_plane(z, medium_length)
    X, Y = grid.mesh()
    r = np.hypot(X, Y)
    phi = np.mod(np.arctan2(Y, X), 2 * math.pi)
    us = mode_table(amps, r, phi, z).reshape(amps.subspace.one_sided_dim, -1)
    amp = np.einsum("ab,bn->an", amps.matrix(), us, optimize=False)
    total = np.sum(np.abs(amp) ** 2, axis=0).reshape(grid.nx, grid.ny)
    return grid.with_samples(_unit_peak(total))


def pump_reference_map(pump: PumpSpec, grid: Grid2D) -> Grid2D:
    """``|Vp(R)|^4`` at the waist plane, unit peak."""
    X, Y = grid.mesh()
    field = pump.field(np.hypot(X, Y), np.arctan2(Y, X))
    return grid.with_samples(_unit_peak(np.abs(field) ** 4))


def pearson_sign(grid: Grid2D) -> float:
    """Pearson correlation of ``(x, y)`` under the map taken as a joint density."""
    w = np.asarray(grid.samples, dtype=float)
    if np.any(w < 0):
        raise ValueError("map must be non-negative")
    mass = float(np.sum(w))
    if mass <= 0.0:
        raise ValueError("map has zero total mass")
    X, Y = grid.mesh()
    mx = float(np.sum(w * X)) / mass
    my = float(np.sum(w * Y)) / mass
    cov = float(np.sum(w * (X - mx) * (Y - my))) / mass
    vx = float(np.sum(w * (X - mx) ** 2)) / mass
    vy = float(np.sum(w * (Y - my) ** 2)) / mass
    if vx == 0.0 or vy == 0.0:
        return 0.0
    return cov / math.sqrt(vx * vy)


def normalized_cross_correlation(a, b) -> float:
    """Zero-mean normalized cross-correlation of two equally sampled maps."""
    a = np.asarray(a.samples if isinstance(a, Grid2D) else a, dtype=float)
    b = np.asarray(b.samples if isinstance(b, Grid2D) else b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("maps must share a grid")
    da = a - a.mean()
    db = b - b.mean()
    denom = math.sqrt(float(np.sum(da * da)) * float(np.sum(db * db)))
    if denom == 0.0:
        raise ValueError("a constant map has no cross-correlation")
    return float(np.sum(da * db)) / denom
