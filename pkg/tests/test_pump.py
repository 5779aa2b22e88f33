import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fwm_biphoton.modes import BeamGeometry, ModeIndex
from fwm_biphoton.pump import (
    ColdCloud,
    PumpSpec,
    UniformCell,
    cloud_modified_expansion,
    effective_waist,
    gaussian_square_coefficient,
    gaussian_square_fidelity,
    product_expansion_coeff,
    square_pump_expansion,
)

REFERENCE_UNIFORM = (0.9429, 0.3143, 0.1048, 0.0349)
FIDELITIES = (0.8889, 0.9876, 0.9986, 0.9999)


def cloud_ratio(xi):
    # expanding exp(-r^2/R^2) u00^2 on u_{0,n}: a_{n+1}/a_n = (xi^2 + 1) / (3 xi^2 + 1)
    return (xi**2 + 1) / (3 * xi**2 + 1)


def unit_geometric(t, g=3):
    v = t ** np.arange(g + 1)
    return v / np.linalg.norm(v)


def test_pump_spec_validation(beam):
    with pytest.raises(ValueError):
        PumpSpec({}, beam)
    with pytest.raises(ValueError):
        PumpSpec({ModeIndex(0, 0): 0.9}, beam)
    p = PumpSpec.from_weights({(1, 0): 1.0, (-1, 0): 1j}, beam)
    assert sum(abs(c) ** 2 for c in p.coefficients.values()) == pytest.approx(1.0, abs=1e-15)
    assert p.charges() == [-2, 0, 2]


def test_media_validation():
    with pytest.raises(ValueError):
        UniformCell(0.0)
    with pytest.raises(ValueError):
        ColdCloud(1e-3, -1.0)


def test_product_coeff_examples(beam):
    u00 = ModeIndex(0, 0)
    assert product_expansion_coeff(ModeIndex(1, 0), ModeIndex(2, 0), ModeIndex(0, 0), beam) == 0
    s0 = product_expansion_coeff(u00, u00, u00, beam)
    assert s0 == pytest.approx(math.sqrt(8 / 9) * math.sqrt(1 / (math.pi * beam.w0**2)), rel=1e-12)
    a, b, t = ModeIndex(1, 2), ModeIndex(2, 0), ModeIndex(3, 1)
    assert product_expansion_coeff(a, b, t, beam) == product_expansion_coeff(b, a, t, beam)


def test_gaussian_closed_form(gaussian_pump):
    exp = square_pump_expansion(gaussian_pump, 10)
    norm = exp.normalized()
    for q in range(11):
        assert abs(norm[ModeIndex(0, q)] - gaussian_square_coefficient(q)) < 1e-8
    for q in range(10):
        ratio = exp.coefficients[ModeIndex(0, q + 1)] / exp.coefficients[ModeIndex(0, q)]
        assert ratio == pytest.approx(1 / 3, rel=1e-8)
    assert exp.norm**2 == pytest.approx(1 / (math.pi * gaussian_pump.beam.w0**2), rel=1e-12)


def test_gaussian_reference_values(gaussian_pump):
    vec = square_pump_expansion(gaussian_pump, 3).radial_vector(0).real
    assert np.max(np.abs(vec - REFERENCE_UNIFORM)) < 5e-4
    for g, fid in enumerate(FIDELITIES):
        exp = square_pump_expansion(gaussian_pump, g)
        assert abs(exp.fidelity - fid) < 5e-4
        assert abs(exp.fidelity - gaussian_square_fidelity(g)) < 1e-8
    assert square_pump_expansion(gaussian_pump, 2).fidelity == pytest.approx(0.9986, abs=5e-5)


def test_default_order(gaussian_pump):
    assert square_pump_expansion(gaussian_pump).truncation_order == 2


def test_rejects_bad_order(gaussian_pump):
    with pytest.raises(ValueError):
        square_pump_expansion(gaussian_pump, -1)


def test_literal_pair_sum(beam):
    pump = PumpSpec.from_weights({(1, 0): 0.8, (-1, 1): 0.5 - 0.3j, (0, 2): 0.2j}, beam)
    exp = square_pump_expansion(pump, 3)
    for target, value in exp.coefficients.items():
        literal = 0j
        for a, ca in pump.coefficients.items():
            for b, cb in pump.coefficients.items():
                literal += ca * cb * product_expansion_coeff(a, b, target, beam)
        assert abs(value - literal) <= 1e-12 * exp.norm


def test_selection_rule(beam):
    pump = PumpSpec.from_weights({(1, 0): 1.0, (-1, 0): 1.0}, beam)
    exp = square_pump_expansion(pump, 2)
    assert exp.charges() == [-2, 0, 2]
    assert product_expansion_coeff(ModeIndex(1, 0), ModeIndex(-1, 0), ModeIndex(1, 0), beam) == 0


def test_parseval_limit(beam):
    pump = PumpSpec.from_weights({(1, 0): 1.0, (0, 1): 0.5}, beam)
    exp = square_pump_expansion(pump, 60)
    kept = sum(abs(a) ** 2 for a in exp.coefficients.values())
    assert kept == pytest.approx(exp.norm**2, rel=1e-6)


@settings(max_examples=15, deadline=None)
@given(
    weights=st.lists(st.tuples(st.integers(-2, 2), st.integers(0, 2), st.floats(0.1, 1.0), st.floats(-1, 1)),
                     min_size=1, max_size=3, unique_by=lambda t: (t[0], t[1]))
)
def test_fidelity_monotone(weights):
    beam = BeamGeometry(5e-4)
    pump = PumpSpec.from_weights({(l, q): complex(a, b) for l, q, a, b in weights}, beam)
    fids = [square_pump_expansion(pump, g).fidelity for g in range(5)]
    assert all(0.0 <= f <= 1.0 for f in fids)
    assert all(b >= a - 1e-12 for a, b in zip(fids, fids[1:]))


def test_effective_waist():
    w0 = 1e-3
    assert effective_waist(w0, math.inf) == w0
    assert effective_waist(w0, 1e6 * w0) == pytest.approx(w0, rel=1e-9)
    assert effective_waist(w0, 1e-6 * w0) < 1e-5 * w0
    assert effective_waist(w0, 0.5 * w0) == pytest.approx(0.5774 * w0, rel=1e-4)
    xi = 1.7
    assert effective_waist(w0, xi * w0) == pytest.approx(math.sqrt(2) * xi * w0 / math.sqrt(1 + 2 * xi**2))
    with pytest.raises(ValueError):
        effective_waist(0.0, 1.0)


@pytest.mark.parametrize("xi", [0.5, 1.0, 3.0, 5.0])
def test_cloud_closed_form(gaussian_pump, xi):
    w0 = gaussian_pump.beam.w0
    vec = cloud_modified_expansion(gaussian_pump, ColdCloud(xi * w0, 1e-3), 3).radial_vector(0).real
    assert np.max(np.abs(vec - unit_geometric(cloud_ratio(xi)))) < 1e-10


def test_cloud_reference_small_radii(gaussian_pump):
    w0 = gaussian_pump.beam.w0
    table = {0.5: (0.7248, 0.5177, 0.3698, 0.2642), 1.0: (0.8677, 0.4339, 0.2169, 0.1085)}
    for xi, ref in table.items():
        vec = cloud_modified_expansion(gaussian_pump, ColdCloud(xi * w0, 1e-3), 3).radial_vector(0).real
        assert np.max(np.abs(vec - ref)) < 1e-3


def test_cloud_large_radius_limit(beam):
    pump = PumpSpec.from_weights({(1, 0): 1.0, (0, 1): 0.4j}, beam)
    uniform = square_pump_expansion(pump, 3).unit_vector()
    cloud = cloud_modified_expansion(pump, ColdCloud(1e3 * beam.w0, 1e-3), 3).unit_vector()
    assert max(abs(uniform[k] - cloud[k]) for k in uniform) < 1e-3


def test_cloud_requires_cloud(gaussian_pump):
    with pytest.raises(TypeError):
        cloud_modified_expansion(gaussian_pump, UniformCell(1e-3), 2)


def test_expansion_field_matches_pump_square(beam):
    pump = PumpSpec.single(1, 0, beam)
    exp = square_pump_expansion(pump, 40)
    r = np.linspace(0, 2.5 * beam.w0, 7)
    phi = 0.4
    assert np.allclose(exp.field(r, phi), pump.field(r, phi) ** 2, atol=1e-7 * exp.norm)
