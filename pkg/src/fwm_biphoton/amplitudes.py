"""Truncated two-photon mode space and the coincidence-amplitude tensor."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .modes import BeamGeometry, ModeIndex

REPRESENTATIONS = ("position", "momentum")
NORMALIZATION_TOL = 1e-10


@dataclass(frozen=True)
class Subspace:
    """Modes with ``|ell - ell_center| <= l_max`` and ``p <= p_max`` for each photon.

    ``ell_center`` shifts the charge window, e.g. to centre it on ``l_T / 2``
    when a pump injects total OAM ``l_T``.
    """

    l_max: int
    p_max: int
    ell_center: int = 0

    def __post_init__(self):
        for name in ("l_max", "p_max", "ell_center"):
            if int(getattr(self, name)) != getattr(self, name):
                raise ValueError(f"{name} must be an integer")
        if self.l_max < 0 or self.p_max < 0:
            raise ValueError(f"subspace limits must be non-negative, got {self.l_max}, {self.p_max}")

    @property
    def ells(self) -> np.ndarray:
        return np.arange(self.ell_center - self.l_max, self.ell_center + self.l_max + 1)

    @property
    def ps(self) -> np.ndarray:
        return np.arange(self.p_max + 1)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        nl, npr = 2 * self.l_max + 1, self.p_max + 1
        return (nl, npr, nl, npr)

    @property
    def one_sided_dim(self) -> int:
        return (2 * self.l_max + 1) * (self.p_max + 1)

    @property
    def mode_count(self) -> int:
        """Number of two-photon basis states ``[(2 l_max + 1)(p_max + 1)]^2``."""
        return self.one_sided_dim**2

    def modes(self) -> list[ModeIndex]:
        return [ModeIndex(int(l), int(p)) for l in self.ells for p in self.ps]

    def ell_position(self, ell: int) -> int:
        i = ell - (self.ell_center - self.l_max)
        if not 0 <= i <= 2 * self.l_max:
            raise KeyError(f"charge {ell} outside subspace")
        return int(i)

    def to_dict(self) -> dict:
        return {"l_max": self.l_max, "p_max": self.p_max, "ell_center": self.ell_center}


@dataclass
class BiphotonAmplitudes:
    """Coincidence amplitudes indexed ``values[ell_pr, p_pr, ell_s, p_s]``.

    Axis 0/2 positions follow ``subspace.ells``. ``scale`` is the norm of the
    raw tensor before normalization; ``metadata`` may hold per-entry method
    tags (``"methods"``, same shape as ``values``) and convergence reports.
    ``beam`` is the LG basis the amplitudes refer to.
    """

    subspace: Subspace
    values: np.ndarray
    representation: str = "position"
    normalized: bool = False
    scale: float = 1.0
    metadata: dict = field(default_factory=dict)
    beam: BeamGeometry | None = None

    def __post_init__(self):
        if self.representation not in REPRESENTATIONS:
            raise ValueError(f"representation must be one of {REPRESENTATIONS}")
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != self.subspace.shape:
            raise ValueError(f"tensor shape {self.values.shape} does not match subspace {self.subspace.shape}")
        if self.normalized:
            total = float(np.sum(np.abs(self.values) ** 2))
            if abs(total - 1.0) > NORMALIZATION_TOL:
                raise ValueError(f"tensor flagged normalized but sum |C|^2 = {total!r}")

    @classmethod
    def from_raw(cls, subspace: Subspace, raw, representation: str, metadata: dict | None = None,
                 beam: BeamGeometry | None = None):
        raw = np.asarray(raw, dtype=complex)
        scale = math.sqrt(float(np.sum(np.abs(raw) ** 2)))
        if scale == 0.0:
            raise ValueError("all amplitudes vanish in this subspace; the pumped OAM is not reachable")
        return cls(subspace, raw / scale, representation, True, scale, dict(metadata or {}), beam)

    def entry(self, pr: ModeIndex, s: ModeIndex) -> complex:
        sub = self.subspace
        return complex(self.values[sub.ell_position(pr.ell), pr.p, sub.ell_position(s.ell), s.p])

    def entries(self) -> Iterator[tuple[ModeIndex, ModeIndex, complex]]:
        """All entries in row-major tensor order."""
        ells, ps = self.subspace.ells, self.subspace.ps
        for i, lp in enumerate(ells):
            for a, pp in enumerate(ps):
                for j, ls in enumerate(ells):
                    for b, pq in enumerate(ps):
                        yield ModeIndex(int(lp), int(pp)), ModeIndex(int(ls), int(pq)), complex(self.values[i, a, j, b])

    def matrix(self) -> np.ndarray:
        """Tensor reshaped to a ``(modes_pr, modes_s)`` matrix."""
        d = self.subspace.one_sided_dim
        return self.values.reshape(d, d)

    def with_values(self, values, **changes) -> "BiphotonAmplitudes":
        return replace(self, values=np.asarray(values, dtype=complex), **changes)

    def top_entries(self, count: int = 5) -> list[tuple[ModeIndex, ModeIndex, float]]:
        ranked = sorted(self.entries(), key=lambda e: -abs(e[2]) ** 2)
        return [(a, b, abs(c) ** 2) for a, b, c in ranked[:count]]
