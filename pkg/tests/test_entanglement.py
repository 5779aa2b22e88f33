import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fwm_biphoton.amplitudes import BiphotonAmplitudes, Subspace
from fwm_biphoton.entanglement import (
    GAMMA,
    OamDistribution,
    entanglement_entropy,
    entanglement_report,
    oam_distribution,
    purity_and_schmidt,
    purity_oracle,
    schmidt_gaussian,
    schmidt_gaussian_minimum,
    schmidt_gaussian_widths,
    spiral_bandwidth,
)
from fwm_biphoton.modes import BeamGeometry, ModeIndex
from fwm_biphoton.position import coincidence_amplitudes_position


def single(sub, pr, s):
    v = np.zeros(sub.shape, dtype=complex)
    v[sub.ell_position(pr.ell), pr.p, sub.ell_position(s.ell), s.p] = 1.0
    return BiphotonAmplitudes(sub, v, normalized=True)


def random_amps(rng, sub):
    v = rng.normal(size=sub.shape) + 1j * rng.normal(size=sub.shape)
    return BiphotonAmplitudes.from_raw(sub, v, "position")


@pytest.fixture(scope="module")
def gaussian_amps():
    from fwm_biphoton.pump import PumpSpec

    return coincidence_amplitudes_position(PumpSpec.gaussian(BeamGeometry(1e-3)), Subspace(2, 4))


def test_point_distribution():
    amps = single(Subspace(2, 2), ModeIndex(1, 0), ModeIndex(-1, 2))
    dist = oam_distribution(amps)
    assert dist.probabilities == {(1, -1): 1.0}
    assert dist.l_T == 0
    assert spiral_bandwidth(dist) == 0.0
    assert entanglement_entropy(dist) == 0.0


def test_uniform_examples():
    three = OamDistribution({(-1, 1): 1 / 3, (0, 0): 1 / 3, (1, -1): 1 / 3})
    assert spiral_bandwidth(three) == pytest.approx(math.sqrt(2 / 3), rel=1e-12)
    five = OamDistribution({(l, -l): 0.2 for l in range(-2, 3)})
    assert entanglement_entropy(five) == pytest.approx(math.log2(5), rel=1e-12)
    assert entanglement_entropy(five) == pytest.approx(2.3219, abs=1e-4)


def test_distribution_validation():
    with pytest.raises(ValueError):
        OamDistribution({(0, 0): 0.5})
    with pytest.raises(ValueError):
        OamDistribution({(0, 0): 1.5, (1, -1): -0.5})


def test_gaussian_distribution_shape(gaussian_amps):
    dist = oam_distribution(gaussian_amps)
    assert dist.l_T == 0
    for (a, b), v in dist.probabilities.items():
        assert v == pytest.approx(dist.probabilities[(b, a)], abs=1e-14)
    assert max(dist.probabilities, key=dist.probabilities.get) == (0, 0)
    ells, p = dist.slice(0)
    assert list(ells) == [-2, -1, 0, 1, 2]
    assert np.all(np.diff(p[2:]) < 0)


def test_product_and_maximally_entangled():
    sub = Subspace(1, 1)
    purity, k = purity_and_schmidt(single(sub, ModeIndex(0, 1), ModeIndex(1, 0)))
    assert purity == pytest.approx(1.0, abs=1e-14) and k == pytest.approx(1.0, abs=1e-14)
    v = np.zeros(sub.shape, dtype=complex)
    for ell, p in [(-1, 0), (0, 0), (1, 1), (0, 1)]:
        v[sub.ell_position(ell), p, sub.ell_position(-ell), p] = 0.5
    purity, k = purity_and_schmidt(BiphotonAmplitudes(sub, v, normalized=True))
    assert purity == pytest.approx(0.25, abs=1e-14) and k == pytest.approx(4.0, abs=1e-12)


def test_random_tensors_match_oracle():
    rng = np.random.default_rng(2024)
    subs = [Subspace(1, 0), Subspace(1, 1), Subspace(2, 1)]
    for n in range(50):
        sub = subs[n % 3]
        amps = random_amps(rng, sub)
        purity, k = purity_and_schmidt(amps)
        m = sub.one_sided_dim
        assert abs(k - 1 / purity_oracle(amps)) <= 1e-8 * k
        assert 1 / m - 1e-12 <= purity <= 1 + 1e-12
        assert 1 - 1e-12 <= k <= m + 1e-9


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=1, max_size=9).filter(lambda w: sum(w) > 1e-3))
def test_entropy_bounded_by_support(weights):
    total = math.fsum(weights)
    probs = {(l, -l): w / total for l, w in enumerate(weights) if w > 0}
    dist = OamDistribution(probs)
    s = entanglement_entropy(dist)
    assert s <= math.log2(len(probs)) + 1e-12
    assert s >= 0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.01, 1.0), min_size=1, max_size=6), st.integers(-5, 5))
def test_sbw_translation_invariance(weights, shift):
    total = math.fsum(weights)
    base = OamDistribution({(l, 2 - l): w / total for l, w in enumerate(weights)})
    moved = OamDistribution({(l + shift, 2 - l + shift): w / total for l, w in enumerate(weights)})
    assert spiral_bandwidth(moved) == pytest.approx(spiral_bandwidth(base), abs=1e-12)


def test_schmidt_gaussian_minimum():
    zmin = schmidt_gaussian_minimum()
    assert zmin == pytest.approx(30.28, abs=0.01)
    assert schmidt_gaussian(zmin) == pytest.approx(1.0, abs=1e-12)
    for zeta in (0.5 * zmin, 2 * zmin, 1.0, 100.0):
        assert schmidt_gaussian(zeta) > 1.0


def test_schmidt_gaussian_limits():
    for zeta in (1e-4, 1e-6):
        assert schmidt_gaussian(zeta) * 2 * GAMMA**2 * zeta == pytest.approx(1.0, rel=1e-2)
    big = [schmidt_gaussian(z) for z in (1e3, 1e4, 1e5)]
    assert big[0] < big[1] < big[2]
    with pytest.raises(ValueError):
        schmidt_gaussian(0.0)
    with pytest.raises(ValueError):
        schmidt_gaussian(-1.0)


def test_width_form_matches_zeta_form():
    for w0 in (5e-5, 2e-4, 1e-3):
        beam = BeamGeometry(w0)
        for L in (1e-3, 0.05, 2.0):
            assert schmidt_gaussian_widths(L, beam) == pytest.approx(schmidt_gaussian(L / beam.z_R), rel=1e-12)


def test_waist_sweep_reaches_hundreds():
    L = 0.05
    values = [schmidt_gaussian(L / BeamGeometry(w0).z_R) for w0 in np.geomspace(5e-5, 1e-3, 12)]
    assert all(b > a for a, b in zip(values, values[1:]))
    assert 100 <= values[-1] < 1000


def test_schmidt_grows_with_subspace():
    from fwm_biphoton.pump import PumpSpec

    pump = PumpSpec.gaussian(BeamGeometry(1e-3))
    ks = [purity_and_schmidt(coincidence_amplitudes_position(pump, Subspace(n, n)))[1] for n in (1, 2, 3)]
    assert ks[0] <= ks[1] <= ks[2]


def test_report(gaussian_amps):
    rep = entanglement_report(gaussian_amps, zeta=0.01)
    assert set(rep) == {"sbw", "entropy_bits", "purity", "schmidt_k", "subspace", "lT", "zeta", "schmidt_k_gaussian"}
    assert rep["schmidt_k"] == pytest.approx(1 / rep["purity"])
    assert rep["lT"] == 0
