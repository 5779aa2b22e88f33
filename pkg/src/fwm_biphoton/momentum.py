"""Momentum-representation coincidence amplitudes with longitudinal phase matching.

The amplitude of the pair ``(pr, s)`` is

    C~ = int d^2rho d^2rho' V~(rho + rho') K(|rho - rho'|^2) u~*_pr(rho) u~*_s(rho')

with ``V~`` the angular spectrum of the (expanded) squared pump and
``K(q^2) = <exp(-i z q^2 / 4k)>_z`` the phase-matching factor averaged over the
medium's longitudinal profile. For a uniform cell ``K`` is the sinc; for a cold
cloud the average uses a Gaussian weight. Both share the same z-quadrature.

Two independent evaluation routes are provided: a direct quadrature over
``(rho, rho', Delta)`` and a closed-form nested finite sum with one Bessel
series per term, whose z-average is done numerically.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .amplitudes import BiphotonAmplitudes, Subspace
from .modes import BeamGeometry, ModeIndex, lg_norm, lg_spectrum_radial, lg_spectrum_reduced, laguerre_coefficients
from .pump import ColdCloud, MediumGeometry, ProductExpansion, UniformCell, effective_waist
from .quadrature import DEFAULT_QUADRATURE, ConvergenceReport, QuadratureConfig, RuleSpec

CLOUD_WINDOW = 2.0  # cloud z-range is +-CLOUD_WINDOW * L_l
TAIL_WINDOW = 10  # consecutive non-decreasing series terms that count as divergence


class ConvergenceError(RuntimeError):
    """Raised when a node-doubling probe changes a normalized amplitude beyond tolerance."""

    def __init__(self, message: str, report: ConvergenceReport | None = None):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True)
class PhaseMatchKernel:
    """Phase-matching geometry for degenerate FWM in a uniform cell or a cold cloud."""

    beam: BeamGeometry
    medium: MediumGeometry

    def alpha_sq_plus(self, z):
        return self.beam.w0**2 / 8.0 + 1j * np.asarray(z) / (4.0 * self.beam.k)

    def alpha_sq_minus(self, z):
        return self.beam.w0**2 / 8.0 - 1j * np.asarray(z) / (4.0 * self.beam.k)

    def alpha_plus(self, z):
        return np.sqrt(self.alpha_sq_plus(z))

    def alpha_minus(self, z):
        return np.sqrt(self.alpha_sq_minus(z))

    @property
    def gaussian_waist(self) -> float:
        """Waist in the pump Gaussian factor; reduced by a finite cloud radius."""
        if isinstance(self.medium, ColdCloud):
            return effective_waist(self.beam.w0, self.medium.R_t)
        return self.beam.w0

    def z_points(self, nodes: int = 32) -> tuple[np.ndarray, np.ndarray]:
        """Nodes and weights of the longitudinal average; weights sum to one."""
        if isinstance(self.medium, UniformCell):
            half = self.medium.L / 2.0
            z, w = RuleSpec(nodes, -half, half, "longitudinal").points()
            return z, w / self.medium.L
        ll = self.medium.L_l
        z, w = RuleSpec(nodes, -CLOUD_WINDOW * ll, CLOUD_WINDOW * ll, "longitudinal").points()
        w = w * np.exp(-4.0 * z**2 / ll**2)
        return z, w / np.sum(w)

    def longitudinal_factor(self, q2, nodes: int = 32):
        """``K(q^2)``: z-average of ``exp(-i z q^2 / 4k)`` (broadcast over ``q2``)."""
        z, w = self.z_points(nodes)
        q2 = np.asarray(q2, dtype=float)
        out = np.zeros(q2.shape, dtype=complex)
        for zi, wi in zip(z, w):
            out += wi * np.exp(-1j * zi * q2 / (4.0 * self.beam.k))
        return out

    def sinc_factor(self, q2):
        """Closed-form ``sinc(L q^2 / 8k)`` of a uniform cell."""
        if not isinstance(self.medium, UniformCell):
            raise TypeError("the closed-form sinc applies to a uniform cell")
        x = self.medium.L * np.asarray(q2, dtype=float) / (8.0 * self.beam.k)
        return np.sinc(x / math.pi)


def biphoton_kernel(rho_pr, rho_s, kernel: PhaseMatchKernel, z_nodes: int = 32) -> complex:
    """Gaussian-pump biphoton kernel ``Phi(rho_pr, rho_s)`` for 2D wavevectors ``(x, y)``."""
    rp = np.asarray(rho_pr, dtype=float)
    rs = np.asarray(rho_s, dtype=float)
    plus2 = float(np.sum((rp + rs) ** 2))
    minus2 = float(np.sum((rp - rs) ** 2))
    gauss = math.exp(-kernel.gaussian_waist**2 * plus2 / 8.0)
    return complex(gauss * kernel.longitudinal_factor(minus2, z_nodes) / (2.0 * math.pi))


# ---------------------------------------------------------------- quadrature route


def _expansion_radial_reduced(expansion: ProductExpansion, m: int, rho):
    """``sum_n a_{m,n} u~_{m,n}(rho) / rho^|m|`` (phase ``exp(i m varphi)`` excluded)."""
    out = np.zeros(np.shape(rho), dtype=complex)
    for idx, a in expansion.coefficients.items():
        if idx.ell == m:
            out = out + a * lg_spectrum_reduced(m, idx.p, rho, expansion.beam)
    return out


def _spectra_table(subspace: Subspace, beam: BeamGeometry, rho) -> np.ndarray:
    out = np.empty((len(subspace.ells), len(subspace.ps), len(rho)), dtype=complex)
    for i, ell in enumerate(subspace.ells):
        for p in subspace.ps:
            out[i, p] = lg_spectrum_radial(int(ell), int(p), rho, beam)
    return out


def _quadrature_raw(expansion, subspace, kernel, qcfg, threads, radial_nodes=None):
    beam = expansion.beam
    rule = qcfg.momentum_rule(beam.w0)
    if radial_nodes is not None:
        rule = rule.with_nodes(radial_nodes)
    rho, wr = rule.points()
    dlt, wd = qcfg.azimuthal_rule().points()
    r1 = rho[:, None, None]
    r2 = rho[None, :, None]
    cosd = np.cos(dlt)[None, None, :]
    plus2 = r1**2 + r2**2 + 2.0 * r1 * r2 * cosd
    minus2 = np.maximum(r1**2 + r2**2 - 2.0 * r1 * r2 * cosd, 0.0)
    K = kernel.longitudinal_factor(minus2, qcfg.z_nodes)
    rho_plus = np.sqrt(np.maximum(plus2, 0.0))
    base = r1 * np.exp(1j * dlt)[None, None, :] + r2
    S = _spectra_table(subspace, beam, rho)
    Sw = np.conj(S) * (wr * rho)[None, None, :]
    charges = expansion.charges()
    ells = [int(e) for e in subspace.ells]
    raw = np.zeros(subspace.shape, dtype=complex)

    def charge_block(m):
        vred = _expansion_radial_reduced(expansion, m, rho_plus)
        z0 = base ** m if m >= 0 else np.conj(base) ** (-m)
        common = vred * z0 * K
        blocks = []
        for i, lpr in enumerate(ells):
            ls = m - lpr
            if ls not in ells:
                continue
            j = ells.index(ls)
            J = np.sum(common * (wd * np.exp(-1j * lpr * dlt))[None, None, :], axis=-1)
            # inner[b, rho] = sum_rho' Sw_s[b, rho'] J[rho, rho']
            inner = np.sum(Sw[j][:, None, :] * J[None, :, :], axis=-1)
            vals = 2.0 * math.pi * np.sum(Sw[i][:, None, :] * inner[None, :, :], axis=-1)
            blocks.append((i, j, vals))
        return blocks

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(charge_block, charges))
    else:
        results = [charge_block(m) for m in charges]
    for blocks in results:
        for i, j, vals in blocks:
            raw[i, :, j, :] = vals
    return raw


def _symmetrize(raw: np.ndarray) -> tuple[np.ndarray, float]:
    """Average the tensor with its photon-exchanged copy; also return the asymmetry."""
    swapped = raw.transpose(2, 3, 0, 1)
    scale = float(np.max(np.abs(raw))) or 1.0
    asym = float(np.max(np.abs(raw - swapped))) / scale
    return 0.5 * (raw + swapped), asym


def _normalized(raw):
    return raw / math.sqrt(float(np.sum(np.abs(raw) ** 2)))


def amplitudes_momentum_quadrature(
    expansion: ProductExpansion,
    subspace: Subspace,
    kernel: PhaseMatchKernel,
    qcfg: QuadratureConfig = DEFAULT_QUADRATURE,
    threads: int = 1,
) -> BiphotonAmplitudes:
    """Normalized momentum amplitudes by direct quadrature.

    The overall azimuth is integrated analytically (it enforces charge
    conservation); the relative angle uses a uniform grid, both radial
    wavenumbers use Gauss-Legendre nodes, and the z-average is folded into
    ``K``. With ``qcfg.check_convergence`` the radial node count is doubled and
    a :class:`ConvergenceError` is raised if any normalized entry moves by more
    than ``qcfg.convergence_tol``.
    """
    if expansion.beam != kernel.beam:
        raise ValueError("expansion and kernel must share the same beam geometry")
    raw, asym = _symmetrize(_quadrature_raw(expansion, subspace, kernel, qcfg, threads))
    meta = {
        "method": "momentum-quadrature",
        "exchange_asymmetry": asym,
        "quadrature": {
            "radial_nodes": qcfg.momentum_nodes,
            "radial_cutoff_per_w0": qcfg.momentum_cutoff,
            "azimuthal_nodes": qcfg.azimuthal_nodes,
            "z_nodes": qcfg.z_nodes,
        },
    }
    if qcfg.check_convergence:
        fine, _ = _symmetrize(
            _quadrature_raw(expansion, subspace, kernel, qcfg, threads, 2 * qcfg.momentum_nodes)
        )
        delta = float(np.max(np.abs(_normalized(fine) - _normalized(raw))))
        report = ConvergenceReport(
            [qcfg.momentum_nodes, 2 * qcfg.momentum_nodes], [], [delta], qcfg.convergence_tol
        )
        meta["convergence"] = report.to_dict()
        if not report.converged:
            raise ConvergenceError(
                f"doubling radial nodes changed a normalized amplitude by {delta:.3e} "
                f"(tolerance {qcfg.convergence_tol:.1e})",
                report,
            )
    return BiphotonAmplitudes.from_raw(subspace, raw, "momentum", meta, expansion.beam)


# ------------------------------------------------------------------ analytic route


def _series_coefficients(p: int, alpha: int, w0: float) -> np.ndarray:
    """Laguerre coefficients of ``L_p^alpha(w0^2 rho^2 / 2)`` as a polynomial in ``rho^2``."""
    return laguerre_coefficients(p, alpha) * (w0**2 / 2.0) ** np.arange(p + 1)


@lru_cache(maxsize=4096)
def _log_tau_gamma(a: int, P: int, Q: int, g: int) -> float:
    """``log |tau_{g,a}| + log Gamma((P+2g+a+1)/2) + log Gamma((Q+2g+a+1)/2)``."""
    return float(
        -(2 * g + a) * math.log(2.0)
        - gammaln(g + 1)
        - gammaln(g + a + 1)
        + gammaln((P + 2 * g + a + 1) / 2.0)
        + gammaln((Q + 2 * g + a + 1) / 2.0)
    )


@dataclass
class SeriesResult:
    value: np.ndarray
    terms: int
    converged: bool


def bessel_series(a: int, P: int, Q: int, alpha, beta, tol: float = 1e-12, cap: int = 200) -> SeriesResult:
    """``Y = int_0^inf int_0^inf x^P y^Q exp(-alpha (x^2 + y^2)) J_a(beta x y) dx dy`` times 4.

    Evaluated term by term from the power series of ``J_a``; ``alpha`` and
    ``beta`` may be arrays (one series per element, stopped jointly). Stops
    once three consecutive terms fall below ``tol`` relative to the partial
    sum. Hitting ``cap``, or ``TAIL_WINDOW`` consecutive non-decreasing terms
    after the series should already be shrinking, marks it non-convergent.
    """
    alpha = np.asarray(alpha, dtype=complex)
    beta = np.asarray(beta, dtype=complex)
    log_alpha = np.log(alpha)
    log_eta2 = 2.0 * (np.log(beta) - log_alpha)
    eta_max = float(np.max(np.abs(beta / alpha)))
    # terms grow until roughly g ~ |eta| sqrt(P Q) / 2, decay afterwards
    g_peak = int(math.ceil(eta_max * math.sqrt((P + a + 1) * (Q + a + 1)) / 2.0)) + 1
    total = np.zeros(alpha.shape, dtype=complex)
    small = 0
    rising = 0
    prev = math.inf
    converged = False
    g = 0
    while g < cap:
        term = (-1) ** g * np.exp(_log_tau_gamma(a, P, Q, g) + g * log_eta2)
        total = total + term
        mag = float(np.max(np.abs(term) / np.maximum(np.abs(total), 1e-300)))
        small = small + 1 if mag < tol else 0
        size = float(np.max(np.abs(term)))
        rising = rising + 1 if (g > g_peak and size >= prev) else 0
        prev = size
        g += 1
        if small >= 3:
            converged = True
            break
        if rising >= TAIL_WINDOW:
            break
    pref = np.exp(a * np.log(beta) - ((P + Q) / 2.0 + a + 1) * log_alpha)
    return SeriesResult(pref * total, g, converged)


class _SeriesCache:
    def __init__(self, alpha, beta, tol, cap):
        self.alpha, self.beta, self.tol, self.cap = alpha, beta, tol, cap
        self.store: dict[tuple[int, int, int], SeriesResult] = {}

    def __call__(self, a, P, Q) -> SeriesResult:
        key = (a, P, Q)
        if key not in self.store:
            self.store[key] = bessel_series(a, P, Q, self.alpha, self.beta, self.tol, self.cap)
        return self.store[key]


def t_tensor(pr: ModeIndex, s: ModeIndex, target: ModeIndex, beam: BeamGeometry, z, series=None,
             tol: float = 1e-12, cap: int = 200) -> tuple[np.ndarray, bool]:
    """``T(z)``: momentum overlap of ``u~_target`` with ``u~*_pr u~*_s`` at phase-matching depth ``z``.

    Returns the values on ``z`` and whether every Bessel series converged.
    """
    z = np.atleast_1d(np.asarray(z, dtype=float))
    m = target.ell
    if pr.ell + s.ell != m:
        return np.zeros(z.shape, dtype=complex), True
    w0, k = beam.w0, beam.k
    if series is None:
        alpha = w0**2 / 2.0 + 1j * z / (4.0 * k)
        beta = -1j * w0**2 / 2.0 - z / (2.0 * k)
        series = _SeriesCache(alpha, beta, tol, cap)
    am = abs(m)
    sigma = 1 if m >= 0 else -1
    lp, ls = abs(pr.ell), abs(s.ell)
    Bj = _series_coefficients(pr.p, lp, w0)
    Bk = _series_coefficients(s.p, ls, w0)
    Bl = _series_coefficients(target.p, am, w0)
    acc = np.zeros(z.shape, dtype=complex)
    ok = True
    for j, bj in enumerate(Bj):
        for kk, bk in enumerate(Bk):
            for l, bl in enumerate(Bl):
                outer = bj * bk * bl
                for u in range(l + 1):
                    cu = math.comb(l, u)
                    for v in range(am + 1):
                        cv = math.comb(am, v)
                        for f in range(l - u + 1):
                            cf = math.comb(l - u, f)
                            P = lp + 2 * j + 2 * (l - u - f) + u + am - v + 1
                            Q = ls + 2 * kk + 2 * f + u + v + 1
                            for d in range(u + 1):
                                a = -pr.ell + (u - 2 * d) + sigma * (am - v)
                                res = series(abs(a), P, Q)
                                ok = ok and res.converged
                                coef = outer * cu * cv * cf * math.comb(u, d) * (-1j) ** abs(a)
                                acc = acc + coef * res.value
    dN = target.order - pr.order - s.order
    pref = (
        math.pi**2 * w0**3 / 8.0
        * lg_norm(pr.ell, pr.p) * lg_norm(s.ell, s.p) * lg_norm(m, target.p)
        * (w0 / math.sqrt(2.0)) ** (lp + ls + am)
        * 1j ** (dN % 4)
    )
    return pref * acc, ok


def amplitudes_momentum_analytic(
    expansion: ProductExpansion,
    subspace: Subspace,
    kernel: PhaseMatchKernel,
    qcfg: QuadratureConfig = DEFAULT_QUADRATURE,
    threads: int = 1,
) -> BiphotonAmplitudes:
    """Normalized momentum amplitudes from the closed-form nested sums.

    Entries whose Bessel series do not converge are recomputed by the
    quadrature route; ``metadata["methods"]`` tags each entry as
    ``"analytic"`` or ``"quadrature-fallback"``.
    """
    if expansion.beam != kernel.beam:
        raise ValueError("expansion and kernel must share the same beam geometry")
    beam = expansion.beam
    z, wz = kernel.z_points(qcfg.z_nodes)
    alpha = beam.w0**2 / 2.0 + 1j * z / (4.0 * beam.k)
    beta = -1j * beam.w0**2 / 2.0 - z / (2.0 * beam.k)
    ells = [int(e) for e in subspace.ells]
    ps = [int(p) for p in subspace.ps]
    raw = np.zeros(subspace.shape, dtype=complex)
    failed = np.zeros(subspace.shape, dtype=bool)
    by_charge: dict[int, list] = {}
    for idx, a in expansion.coefficients.items():
        by_charge.setdefault(idx.ell, []).append((idx, a))

    def charge_block(m):
        series = _SeriesCache(alpha, beta, qcfg.series_tol, qcfg.series_cap)
        out = []
        for i, lpr in enumerate(ells):
            ls = m - lpr
            if ls not in ells:
                continue
            j = ells.index(ls)
            for ppr in ps:
                for pq in ps:
                    val = 0j
                    good = True
                    for target, a in by_charge[m]:
                        t, ok = t_tensor(ModeIndex(lpr, ppr), ModeIndex(ls, pq), target, beam, z, series)
                        val += a * complex(np.sum(wz * t))
                        good = good and ok
                    out.append((i, ppr, j, pq, val, good))
        return out

    charges = sorted(by_charge)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(charge_block, charges))
    else:
        results = [charge_block(m) for m in charges]
    for block in results:
        for i, a, j, b, val, good in block:
            raw[i, a, j, b] = val
            failed[i, a, j, b] = not good
    failed = failed | failed.transpose(2, 3, 0, 1)
    if failed.any():
        quad = _quadrature_raw(expansion, subspace, kernel, qcfg, threads)
        raw = np.where(failed, quad, raw)
    raw, asym = _symmetrize(raw)
    methods = np.where(failed, "quadrature-fallback", "analytic")
    meta = {
        "method": "momentum-analytic",
        "methods": methods,
        "fallback_count": int(failed.sum()),
        "exchange_asymmetry": asym,
        "series": {"tol": qcfg.series_tol, "cap": qcfg.series_cap},
        "z_nodes": qcfg.z_nodes,
    }
    return BiphotonAmplitudes.from_raw(subspace, raw, "momentum", meta, expansion.beam)


def trace_distance(a: BiphotonAmplitudes, b: BiphotonAmplitudes) -> float:
    """``sqrt(1 - |<a|b>|^2)`` between two normalized tensors on the same subspace."""
    if a.subspace != b.subspace:
        raise ValueError(f"subspaces differ: {a.subspace} vs {b.subspace}")
    if not (a.normalized and b.normalized):
        raise ValueError("trace distance needs normalized amplitudes")
    inner = complex(np.sum(np.conj(a.values) * b.values))
    if abs(inner) == 0.0:
        return 1.0
    # 1 - |<a|b>|^2 through the phase-aligned difference, which avoids cancellation
    diff = float(np.sum(np.abs(a.values - b.values * (abs(inner) / inner)) ** 2))
    gap = 0.5 * diff * (2.0 - 0.5 * diff)
    return math.sqrt(min(1.0, max(0.0, gap)))
