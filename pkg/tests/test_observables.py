import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from plexsim.errors import TruncationError, UndefinedCorrelationError
from plexsim.hilbert import cavity_annihilation, fock_annihilation
from plexsim.lindblad import DensityMatrix
from plexsim.observables import (
    PhotonStatistics,
    Regime,
    classify,
    correlation,
    gn_from_distribution,
    photon_distribution,
    steady_correlations,
    thermal_occupation,
)

from conftest import cached_state, empty_cavity, single


def test_fock_state_correlations():
    a = fock_annihilation(4)
    assert correlation(DensityMatrix.fock(1, 5), a, 2) == 0.0
    assert correlation(DensityMatrix.fock(1, 5), a, 3) == 0.0
    assert correlation(DensityMatrix.fock(2, 5), a, 2) == pytest.approx(0.5)
    assert correlation(DensityMatrix.fock(2, 5), a, 3) == 0.0


def test_vacuum_correlation_is_undefined():
    with pytest.raises(UndefinedCorrelationError):
        correlation(DensityMatrix.fock(0, 5), fock_annihilation(4), 2)


def test_coherent_steady_state_is_poissonian():
    spec = empty_cavity(delta_c=0.05)
    rho = cached_state(spec)
    a = cavity_annihilation(spec)
    assert correlation(rho, a, 2) == pytest.approx(1.0, abs=1e-6)
    stats = photon_distribution(rho, spec)
    np.testing.assert_allclose(stats.deltas, 0.0, atol=1e-4)


def test_delta_p_signs(resonant, detuned):
    upb = photon_distribution(cached_state(resonant), resonant)
    assert upb.deltas[2] < 0 < upb.deltas[3]
    pb = photon_distribution(cached_state(detuned), detuned)
    assert pb.deltas[2] < 0 and pb.deltas[3] < 0


def test_distribution_hierarchy_and_normalization(resonant, detuned, two_emitter):
    for spec in (resonant, detuned, two_emitter):
        stats = photon_distribution(cached_state(spec), spec)
        p = stats.probabilities
        assert abs(p.sum() - 1) < 1e-8
        assert np.all(p >= -1e-10) and np.all(p <= 1)
        for m in range(3):
            assert p[m + 1] / p[m] < 0.2


def test_distribution_and_operator_paths_agree(resonant, detuned, two_emitter):
    for spec in (resonant, detuned, two_emitter):
        rho = cached_state(spec)
        stats = photon_distribution(rho, spec)
        a = cavity_annihilation(spec)
        for n in (2, 3):
            assert abs(gn_from_distribution(stats, n) - correlation(rho, a, n)) < 1e-8


def test_gn_from_two_level_distribution():
    stats = PhotonStatistics.from_probabilities([0.9, 0.1, 0.0])
    assert gn_from_distribution(stats, 2) == 0.0
    with pytest.raises(TruncationError):
        gn_from_distribution(stats, 3)


@settings(max_examples=40, deadline=None)
@given(mean=st.floats(1e-3, 1.0))
def test_poissonian_distribution_gives_unity(mean):
    m = np.arange(40)
    p = np.exp(-mean + m * np.log(mean) - np.array([math.lgamma(k + 1) for k in m]))
    stats = PhotonStatistics.from_probabilities(p)
    for n in (2, 3, 4):
        assert gn_from_distribution(stats, n) == pytest.approx(1.0, rel=1e-9)
    np.testing.assert_allclose(stats.deltas, 0.0, atol=1e-9)


def test_thermal_occupation():
    assert thermal_occupation(2.0, 300.0) < 1e-30
    kt = 8.617333262e-5 * 300.0
    assert thermal_occupation(kt, 300.0) == pytest.approx(1 / (math.e - 1))
    assert thermal_occupation(2.0, 1e-3) == 0.0
    with pytest.raises(ValueError):
        thermal_occupation(0.0, 300.0)
    with pytest.raises(ValueError):
        thermal_occupation(2.0, -1.0)


@pytest.mark.parametrize("g2,g3,expected", [
    (0.5, 0.4, Regime.PB),
    (0.6, 1.8, Regime.UPB),
    (1.3, 0.4, Regime.BUNCHING),
    (1.001, 0.995, Regime.COHERENT),
    (0.995, 1.02, Regime.UPB),
])
def test_classify_examples(g2, g3, expected):
    assert classify(g2, g3) is expected


@settings(max_examples=200, deadline=None)
@given(g2=st.floats(0, 5), g3=st.floats(0, 20), eps=st.floats(1e-4, 0.1))
def test_classify_rules(g2, g3, eps):
    r = classify(g2, g3, eps)
    if r is Regime.COHERENT:
        assert abs(g2 - 1) < eps and abs(g3 - 1) < eps
    elif r is Regime.PB:
        assert g2 < 1 and g3 < 1
    elif r is Regime.UPB:
        assert g2 < 1 and g3 > 1
    else:
        assert g2 >= 1 or g3 == 1


def test_bunching_peak_on_detuned_system():
    res = steady_correlations(single(omega_e=1.795, drive_omega=1.78))
    assert res.g2 > 1 and res.regime is Regime.BUNCHING
