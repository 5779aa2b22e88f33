"""Fixed, deterministic quadrature rules and a node-doubling convergence probe."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

KINDS = ("radial-position", "radial-momentum", "azimuthal-uniform", "longitudinal", "generic")
MIN_NODES = 8


class NonFiniteIntegrandError(ValueError):
    """Raised when an integrand returns NaN or inf on a quadrature node."""


@lru_cache(maxsize=64)
def _legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@dataclass(frozen=True)
class RuleSpec:
    """A 1D rule: Gauss-Legendre on ``[a, b]`` or a uniform periodic grid.

    ``kind == "azimuthal-uniform"`` gives the trapezoid rule on ``[0, 2pi)``,
    which is exact for harmonics ``exp(i m phi)`` with ``|m| < nodes``.
    """

    nodes: int
    a: float = 0.0
    b: float = 1.0
    kind: str = "generic"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown rule kind {self.kind!r}")
        if self.nodes < MIN_NODES:
            raise ValueError(f"rules need at least {MIN_NODES} nodes, got {self.nodes}")
        if self.kind != "azimuthal-uniform" and not self.b > self.a:
            raise ValueError(f"empty interval [{self.a}, {self.b}]")

    @classmethod
    def azimuthal(cls, nodes: int) -> "RuleSpec":
        return cls(nodes, 0.0, 2 * math.pi, "azimuthal-uniform")

    def with_nodes(self, nodes: int) -> "RuleSpec":
        return RuleSpec(nodes, self.a, self.b, self.kind)

    def points(self) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights, ordered by increasing abscissa."""
        if self.kind == "azimuthal-uniform":
            x = 2 * math.pi * np.arange(self.nodes) / self.nodes
            return x, np.full(self.nodes, 2 * math.pi / self.nodes)
        t, w = _legendre(self.nodes)
        half = 0.5 * (self.b - self.a)
        return self.a + half * (t + 1.0), half * w

    @property
    def measure(self) -> float:
        return 2 * math.pi if self.kind == "azimuthal-uniform" else self.b - self.a


def _checked(values, name="integrand"):
    values = np.asarray(values)
    if not np.all(np.isfinite(values)):
        raise NonFiniteIntegrandError(f"{name} is not finite on every quadrature node")
    return values


def integrate_1d(f: Callable, rule: RuleSpec):
    """Weighted sum of ``f`` on the rule's nodes.

    ``f`` is called once with the node array and may return extra trailing
    axes; integration runs over the leading axis.
    """
    x, w = rule.points()
    vals = _checked(f(x))
    w = w.reshape((-1,) + (1,) * (vals.ndim - 1))
    return np.sum(w * vals, axis=0)


def integrate_polar(f: Callable, radial: RuleSpec, azimuthal: RuleSpec):
    """Product rule for ``int f(r, phi) r dr dphi``; ``f`` receives broadcast grids."""
    r, wr = radial.points()
    phi, wp = azimuthal.points()
    vals = _checked(f(r[:, None], phi[None, :]))
    return np.sum((wr * r)[:, None] * wp[None, :] * vals)


@dataclass
class ConvergenceReport:
    node_counts: list[int]
    values: list = field(repr=False)
    deltas: list[float]
    tolerance: float

    @property
    def max_delta(self) -> float:
        return self.deltas[-1] if self.deltas else math.inf

    @property
    def converged(self) -> bool:
        return bool(self.deltas) and self.deltas[-1] <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "node_counts": self.node_counts,
            "deltas": self.deltas,
            "tolerance": self.tolerance,
            "converged": self.converged,
        }


def _relative_change(new, old) -> float:
    new = np.asarray(new)
    old = np.asarray(old)
    scale = max(float(np.max(np.abs(new))), float(np.max(np.abs(old))))
    if scale == 0.0:
        return 0.0
    return float(np.max(np.abs(new - old))) / scale


def convergence_probe(
    computation: Callable[[int], object],
    base_nodes: int,
    levels: int = 2,
    tolerance: float = 1e-8,
) -> ConvergenceReport:
    """Evaluate ``computation(n)`` at ``base_nodes * 2**i`` for ``i = 0..levels``.

    ``deltas[i]`` is the largest change between consecutive levels, relative
    to the largest magnitude in either result. The last delta decides
    convergence.
    """
    if levels < 1:
        raise ValueError("levels must be >= 1")
    counts = [base_nodes * 2**i for i in range(levels + 1)]
    values = [computation(n) for n in counts]
    deltas = [_relative_change(values[i + 1], values[i]) for i in range(levels)]
    return ConvergenceReport(counts, values, deltas, tolerance)


def gauss_legendre(nodes: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    return RuleSpec(nodes, a, b).points()



@dataclass(frozen=True)
class QuadratureConfig:
    """Node counts and truncations shared by the overlap and momentum engines.

    Cutoffs are in units of the basis waist: ``position_cutoff * w0`` for
    radial position integrals, ``momentum_cutoff / w0`` for radial wavenumbers.
    """

    position_nodes: int = 96
    position_cutoff: float = 6.0
    momentum_nodes: int = 96
    momentum_cutoff: float = 12.0
    azimuthal_nodes: int = 64
    z_nodes: int = 32
    series_tol: float = 1e-12
    series_cap: int = 200
    convergence_tol: float = 1e-6
    check_convergence: bool = True

    def __post_init__(self):
        for name in ("position_nodes", "momentum_nodes", "azimuthal_nodes", "z_nodes"):
            if getattr(self, name) < MIN_NODES:
                raise ValueError(f"{name} must be >= {MIN_NODES}")
        if self.momentum_cutoff < 8.0:
            raise ValueError("momentum_cutoff must be >= 8 (units of 1/w0)")
        if self.position_cutoff <= 0:
            raise ValueError("position_cutoff must be positive")
        if self.series_cap < 10 or self.series_tol <= 0:
            raise ValueError("series_cap must be >= 10 and series_tol positive")

    def position_rule(self, w0: float) -> RuleSpec:
        return RuleSpec(self.position_nodes, 0.0, self.position_cutoff * w0, "radial-position")

    def momentum_rule(self, w0: float) -> RuleSpec:
        return RuleSpec(self.momentum_nodes, 0.0, self.momentum_cutoff / w0, "radial-momentum")

    def azimuthal_rule(self) -> RuleSpec:
        return RuleSpec.azimuthal(self.azimuthal_nodes)


DEFAULT_QUADRATURE = QuadratureConfig()
