"""OAM distributions, spiral bandwidth, entropy, purity and Schmidt numbers."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .amplitudes import BiphotonAmplitudes
from .modes import BeamGeometry

GAMMA = 0.257  # matches the widths of the sinc and its Gaussian stand-in
FWM_ORDER = 2  # number of pump photons per pair


@dataclass(frozen=True)
class OamDistribution:
    """Joint charge distribution ``P[(ell_pr, ell_s)]`` summed over radial indices."""

    probabilities: dict[tuple[int, int], float]

    def __post_init__(self):
        if any(v < 0 for v in self.probabilities.values()):
            raise ValueError("probabilities must be non-negative")
        total = math.fsum(self.probabilities.values())
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"probabilities must sum to one, got {total!r}")

    @property
    def total_charges(self) -> list[int]:
        return sorted({a + b for (a, b), v in self.probabilities.items() if v > 0})

    @property
    def l_T(self) -> int | None:
        """Total pumped OAM when a single one is populated, else ``None``."""
        t = self.total_charges
        return t[0] if len(t) == 1 else None

    def marginal(self) -> tuple[np.ndarray, np.ndarray]:
        """Charge values of the first photon and their probabilities."""
        acc: dict[int, float] = {}
        for (a, _), v in sorted(self.probabilities.items()):
            acc[a] = acc.get(a, 0.0) + v
        ells = np.array(sorted(acc))
        return ells, np.array([acc[e] for e in ells])

    def slice(self, l_T: int) -> tuple[np.ndarray, np.ndarray]:
        """``P[ell, l_T - ell]`` over the populated ``ell``."""
        pairs = sorted((a, v) for (a, b), v in self.probabilities.items() if a + b == l_T)
        return np.array([a for a, _ in pairs]), np.array([v for _, v in pairs])


def oam_distribution(amps: BiphotonAmplitudes) -> OamDistribution:
    """Trace the radial indices out of ``|C|^2`` and renormalize."""
    weights = np.sum(np.abs(amps.values) ** 2, axis=(1, 3))
    total = float(np.sum(weights))
    if total == 0.0:
        raise ValueError("amplitude tensor is identically zero")
    ells = [int(e) for e in amps.subspace.ells]
    probs = {}
    for i, a in enumerate(ells):
        for j, b in enumerate(ells):
            if weights[i, j] > 0.0:
                probs[(a, b)] = float(weights[i, j] / total)
    return OamDistribution(probs)


def spiral_bandwidth(dist: OamDistribution) -> float:
    """Standard deviation of one photon's charge."""
    ells, p = dist.marginal()
    mean = float(np.sum(ells * p))
    var = float(np.sum((ells - mean) ** 2 * p))
    return math.sqrt(max(var, 0.0))


def entanglement_entropy(dist: OamDistribution) -> float:
    """Shannon entropy of the joint charge distribution in bits."""
    p = np.array([v for v in dist.probabilities.values() if v > 0.0])
    return float(-np.sum(p * np.log2(p)))


def reduced_density_matrix(amps: BiphotonAmplitudes) -> np.ndarray:
    """Signal reduced state ``rho_s = C^T C*`` on the one-sided mode basis."""
    c = amps.matrix()
    d = c.shape[0]
    rho = np.zeros((d, d), dtype=complex)
    for a in range(d):
        rho += np.outer(c[a], np.conj(c[a]))
    return rho


def purity_and_schmidt(amps: BiphotonAmplitudes) -> tuple[float, float]:
    """Reduced-state purity from the eight-index contraction and ``K = 1 / purity``."""
    c = amps.values
    purity = np.einsum("apbq,cdbq,cdef,apef->", c, np.conj(c), c, np.conj(c), optimize=False)
    purity = float(purity.real)
    if purity <= 0.0:
        raise ValueError("amplitude tensor is identically zero")
    return purity, 1.0 / purity


def purity_oracle(amps: BiphotonAmplitudes) -> float:
    """``tr(rho_s^2)`` from the explicit reduced density matrix."""
    rho = reduced_density_matrix(amps)
    return float(np.sum(rho * rho.T).real)


def schmidt_gaussian(zeta: float, gamma: float = GAMMA) -> float:
    """Schmidt number of the Gaussian-approximated kernel versus ``zeta = L / z_R``."""
    if not zeta > 0:
        raise ValueError(f"zeta must be positive, got {zeta}")
    s = math.sqrt(zeta)
    return gamma**2 / 8.0 * (s + 2.0 / (gamma**2 * s)) ** 2


def schmidt_gaussian_widths(L: float, beam: BeamGeometry, gamma: float = GAMMA, order: int = FWM_ORDER) -> float:
    """Same quantity from the kernel widths ``sigma = sqrt(2 j k / z_R)``, ``b = gamma sqrt(L / 4 j k)``."""
    if not L > 0:
        raise ValueError(f"medium length must be positive, got {L}")
    sigma = math.sqrt(2.0 * order * beam.k / beam.z_R)
    b = gamma * math.sqrt(L / (4.0 * order * beam.k))
    x = b * sigma
    return 0.25 * (x + 1.0 / x) ** 2


def schmidt_gaussian_minimum(gamma: float = GAMMA) -> float:
    """``zeta`` where the Gaussian-approximation Schmidt number reaches one."""
    return 2.0 / gamma**2


def entanglement_report(amps: BiphotonAmplitudes, zeta: float | None = None) -> dict:
    dist = oam_distribution(amps)
    purity, k = purity_and_schmidt(amps)
    report = {
        "sbw": spiral_bandwidth(dist),
        "entropy_bits": entanglement_entropy(dist),
        "purity": purity,
        "schmidt_k": k,
        "subspace": amps.subspace.to_dict(),
        "lT": dist.l_T,
    }
    if zeta is not None:
        report["zeta"] = zeta
        report["schmidt_k_gaussian"] = schmidt_gaussian(zeta)
    return report
