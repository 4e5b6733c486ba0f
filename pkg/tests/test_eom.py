import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plexsim.eom import (
    ComplexDetunings,
    _phase_difference,
    _single_cascade,
    eom_correlations,
    eom_double,
    eom_single,
    pathway_phase,
    solve_small,
)
from plexsim.errors import SingularParameterError
from plexsim.hilbert import EmitterSpec, SystemSpec
from plexsim import scenarios

from conftest import cached_correlations, rel, single


def test_decoupled_cavity_is_coherent():
    _, g2, g3 = eom_single(single(g=0.0, drive_omega=1.93))
    assert g2 == pytest.approx(1.0, abs=1e-12)
    assert g3 == pytest.approx(1.0, abs=1e-12)


def test_resonant_values_and_hierarchy(resonant):
    amps, g2, g3 = eom_single(resonant)
    assert g2 < 1 < g3
    assert amps.c(1) == 1.0
    assert amps.satisfies_hierarchy(5.0)
    # the interference decomposition is the closed form for c5
    recon = amps.pathway_coeffs["A52"] * amps.c(2) + amps.pathway_coeffs["A53"] * amps.c(3)
    assert abs(recon - amps.c(5)) <= 1e-12 * abs(amps.c(5))


def test_pathway_phase_at_resonance(resonant):
    assert abs(pathway_phase(resonant)) == pytest.approx(math.pi, abs=1e-12)
    far = pathway_phase(resonant, omega=1.0)
    assert -math.pi < far <= math.pi
    assert abs(abs(far) - math.pi) > 0.05


def test_pathway_phase_flips_under_conjugation():
    spec = single(omega_e=1.9, drive_omega=1.97)
    det = ComplexDetunings.from_spec(spec)
    amps = _single_cascade(det.delta_c_p, det.delta_e_p[0], 0.08, spec.drive_amplitude)
    conj = _single_cascade(det.delta_c_p.conjugate(), det.delta_e_p[0].conjugate(), 0.08, spec.drive_amplitude)
    a, b = _phase_difference(amps), _phase_difference(conj)
    assert (a + b + math.pi) % (2 * math.pi) - math.pi == pytest.approx(0.0, abs=1e-12)


def test_complex_detunings_must_be_lossy():
    with pytest.raises(ValueError):
        ComplexDetunings(0.1 + 0.01j, ())


def test_singular_denominator():
    # lossless cavity and emitter with D_c D_e = g^2 make the one-excitation block singular
    spec = SystemSpec(2.1, 0.0, 2.0, (EmitterSpec(2.1, 0.0, 0.1),), drive_amplitude=0.0)
    with pytest.raises(SingularParameterError):
        eom_single(spec)


def test_strong_drive_is_rejected(resonant):
    with pytest.raises(ValueError):
        eom_single(resonant.replace(drive_amplitude=resonant.kappa / 2))


def test_decoupled_second_emitter_matches_single(resonant):
    two = scenarios.add_second_emitter(resonant, 0.04, 0.0)
    _, g2a, g3a = eom_single(resonant)
    _, g2b, g3b = eom_double(two)
    assert g2b == pytest.approx(g2a, abs=1e-10)
    assert g3b == pytest.approx(g3a, abs=1e-10)


def test_two_emitter_blockade(two_emitter):
    res = eom_correlations(two_emitter)
    assert res.g2 < 1 and res.g3 < 1
    assert res.amplitudes.satisfies_hierarchy(5.0)


def test_emitter_count_checks(resonant, two_emitter):
    with pytest.raises(ValueError):
        eom_single(two_emitter)
    with pytest.raises(ValueError):
        eom_double(resonant)
    with pytest.raises(ValueError):
        eom_correlations(scenarios.optical_spec(0.0))


def test_solve_small_detects_singularity():
    with pytest.raises(SingularParameterError):
        solve_small([[1, 2], [2, 4]], [1, 1])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
                min_size=20, max_size=20))
def test_solve_small_matches_numpy(values):
    m = np.array(values[:16]).reshape(4, 4) + 5 * np.eye(4) * (1 + 1j)
    b = np.array(values[16:])
    if np.linalg.cond(m) > 1e8:
        return
    np.testing.assert_allclose(solve_small(m, b), np.linalg.solve(m, b), rtol=1e-8, atol=1e-10)


@pytest.mark.parametrize("omega", [1.9, 2.0, 2.1])
def test_eom_matches_master_equation_as_drive_vanishes(omega):
    # the weak-drive expansion is exact to leading order; at kappa/1000 the
    # residual nonlinearity is far below the 5% comparison tolerance
    for base in (scenarios.resonant_single_spec(), scenarios.two_emitter_spec()):
        spec = base.replace(drive_amplitude=base.kappa / 1000, drive_omega=omega)
        me = cached_correlations(spec)
        eom = eom_correlations(spec)
        assert rel(eom.g2, me.g2) < 0.05
        assert rel(eom.g3, me.g3) < 0.05


def test_eom_mean_photon_number_close_to_master_equation(resonant):
    me = cached_correlations(resonant)
    eom = eom_single(resonant)
    assert rel(eom.amplitudes.mean_n, me.mean_n) < 0.05
