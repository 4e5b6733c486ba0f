import math

import numpy as np
import pytest

from plexsim.errors import TruncationError
from plexsim.hilbert import EmitterSpec, SystemSpec
from plexsim.spectra import energy_levels, excitation_spectrum, manifold_size
from plexsim import scenarios

from conftest import empty_cavity, single


def test_vacuum_rabi_doublet(resonant):
    levels = energy_levels(resonant)
    np.testing.assert_array_equal(levels.manifold(0), [0.0])
    np.testing.assert_allclose(levels.manifold(1), [1.92, 2.08], atol=1e-10)
    r2 = 0.08 * math.sqrt(2)
    np.testing.assert_allclose(levels.manifold(2), [4 - r2, 4 + r2], atol=1e-10)


def test_uncoupled_levels_are_bare_energies():
    spec = SystemSpec(2.0, 0.35, 2.0, (EmitterSpec(1.9, 0.1, 0.0), EmitterSpec(2.05, 0.1, 0.0)))
    np.testing.assert_array_equal(energy_levels(spec).manifold(1), [1.9, 2.0, 2.05])


def test_manifold_sizes_match_combinatorics(two_emitter):
    levels = energy_levels(two_emitter)
    assert [len(levels.manifold(n)) for n in range(4)] == [1, 3, 4, 4]
    for n in range(4):
        assert len(levels.manifold(n)) == manifold_size(n, 2, two_emitter.n_max)


def test_manifold_beyond_truncation():
    with pytest.raises(TruncationError):
        energy_levels(single(n_max=2), max_manifold=3)


def test_empty_cavity_lorentzian():
    spec = empty_cavity()
    res = excitation_spectrum(spec, [1.825, 2.0, 2.175])
    assert res.response[1] == pytest.approx(4 / 0.35, rel=1e-8)
    # half width kappa/2 at half maximum
    np.testing.assert_allclose(res.response[[0, 2]], 2 / 0.35, rtol=1e-8)


def test_rabi_splitting_in_spectrum(resonant):
    res = excitation_spectrum(resonant, np.linspace(1.7, 2.3, 121))
    peaks = res.peaks()
    assert len(peaks) == 2
    assert abs((peaks[1] - peaks[0]) - 0.16) < 0.35 / 4
    np.testing.assert_allclose(peaks, energy_levels(resonant, 1).manifold(1), atol=0.35 / 4)
    assert np.all(res.response >= 0)


def test_detuned_spectrum_is_asymmetric(detuned):
    res = excitation_spectrum(detuned, np.linspace(1.5, 2.3, 161))
    peaks = res.peaks()
    assert len(peaks) == 2
    heights = [res.response[np.argmin(abs(res.omegas - p))] for p in peaks]
    # the emitter-like peak is weaker and the cavity-like one stronger
    assert heights[1] / heights[0] > 2


def test_spectrum_requires_weak_drive(resonant):
    with pytest.raises(ValueError):
        excitation_spectrum(resonant.replace(drive_amplitude=0.1), [2.0])


def _central_gap(g_e2):
    spec = scenarios.add_second_emitter(scenarios.resonant_single_spec(), 0.04, g_e2)
    m2 = energy_levels(spec, 2).manifold(2)
    return m2[2] - m2[1]


def test_second_manifold_anticrossing_near_80_mev():
    grid = np.linspace(0.02, 0.16, 57)
    gaps = [_central_gap(g) for g in grid]
    g_min = grid[int(np.argmin(gaps))]
    assert 0.07 <= g_min <= 0.09
