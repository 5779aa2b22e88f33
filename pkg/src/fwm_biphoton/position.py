"""Position-representation coincidence amplitudes from four-mode overlaps.

In the thin-medium limit the amplitude of the pair ``(pr, s)`` is the overlap
of the squared pump with ``u*_pr u*_s`` at the waist plane. The azimuthal
integral is a Kronecker delta on the charges, leaving one real radial integral.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .amplitudes import BiphotonAmplitudes, Subspace
from .modes import BeamGeometry, ModeIndex, lg_radial
from .pump import PumpSpec, pump_function_radial
from .quadrature import DEFAULT_QUADRATURE, QuadratureConfig, integrate_1d


def lambda_overlap(
    a: ModeIndex,
    b: ModeIndex,
    c: ModeIndex,
    d: ModeIndex,
    beam: BeamGeometry,
    qcfg: QuadratureConfig = DEFAULT_QUADRATURE,
) -> complex:
    """Four-mode overlap ``int u_a u_b u*_c u*_d d^2r`` at z = 0 (units 1/m^2)."""
    if a.ell + b.ell != c.ell + d.ell:
        return 0j

    def integrand(r):
        prod = lg_radial(a.ell, a.p, r, beam) * lg_radial(b.ell, b.p, r, beam)
        prod = prod * np.conj(lg_radial(c.ell, c.p, r, beam) * lg_radial(d.ell, d.p, r, beam))
        return prod * r

    return complex(2.0 * math.pi * integrate_1d(integrand, qcfg.position_rule(beam.w0)))


def radial_table(subspace: Subspace, beam: BeamGeometry, r) -> np.ndarray:
    """Real radial profiles ``R[i_ell, p, node]`` of the subspace modes at z = 0."""
    out = np.empty((len(subspace.ells), len(subspace.ps), len(r)))
    for i, ell in enumerate(subspace.ells):
        for p in subspace.ps:
            out[i, p] = lg_radial(int(ell), int(p), r, beam).real
    return out


def _charge_pairs(subspace: Subspace, charges) -> list[tuple[int, int, int]]:
    """Index pairs ``(i_pr, i_s, m)`` whose charges add to a pumped charge ``m``."""
    ells = [int(e) for e in subspace.ells]
    allowed = set(charges)
    return [(i, j, li + lj) for i, li in enumerate(ells) for j, lj in enumerate(ells) if li + lj in allowed]


def coincidence_amplitudes_position(
    pump: PumpSpec,
    subspace: Subspace,
    qcfg: QuadratureConfig = DEFAULT_QUADRATURE,
    threads: int = 1,
) -> BiphotonAmplitudes:
    """Normalized amplitudes ``C = sum c_a c_b Lambda(a, b, pr, s)`` over ``subspace``.

    Entries violating charge conservation are exactly zero. Each charge block
    is reduced in a fixed node order, so results do not depend on ``threads``
    and ``C[pr, s] == C[s, pr]`` holds bit for bit.
    """
    beam = pump.beam
    r, w = qcfg.position_rule(beam.w0).points()
    R = radial_table(subspace, beam, r)
    weighted = {m: 2.0 * math.pi * w * r * v for m, v in pump_function_radial(pump, r).items()}
    raw = np.zeros(subspace.shape, dtype=complex)

    def block(task):
        i, j, m = task
        pair = R[i][:, None, :] * R[j][None, :, :]
        return i, j, np.sum(pair * weighted[m], axis=-1)

    tasks = _charge_pairs(subspace, weighted)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(block, tasks))
    else:
        results = [block(t) for t in tasks]
    for i, j, vals in results:
        raw[i, :, j, :] = vals
    meta = {"method": "position-overlap", "quadrature": {"nodes": qcfg.position_nodes, "cutoff_w0": qcfg.position_cutoff}}
    return BiphotonAmplitudes.from_raw(subspace, raw, "position", meta, beam)
