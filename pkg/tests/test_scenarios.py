import math

import numpy as np
import pytest

from plexsim import scenarios as S
from plexsim.observables import Regime, steady_correlations
from plexsim.parallel import worker_count

from conftest import cached_correlations


def test_set_parameter_paths(resonant):
    s = S.set_parameter(resonant, "emitters[e1].detuning", -0.205)
    assert s.emitters[0].omega_e == pytest.approx(1.795)
    s = S.set_parameter(s, "emitters[0].g", 0.05)
    assert s.emitters[0].g == 0.05
    assert S.set_parameter(s, "omega", 1.9).drive_omega == 1.9
    assert S.set_parameter(s, "kappa", 0.2).kappa == 0.2
    with pytest.raises(KeyError):
        S.set_parameter(s, "emitters[e7].g", 0.1)
    with pytest.raises(KeyError):
        S.set_parameter(s, "temperature", 300)


def test_axis_validation(resonant):
    with pytest.raises(ValueError):
        S.Axis("drive_omega", (2.0, 1.9, 2.1))
    with pytest.raises(ValueError):
        S.Axis("drive_omega", ())
    with pytest.raises(KeyError):
        S.SweepSpec(resonant, S.Axis("nonsense", (1.0, 2.0)))
    with pytest.raises(ValueError):
        S.SweepSpec(resonant, S.Axis("drive_omega", (1.0, 2.0)), outputs=("g4",))


def test_single_point_sweep_equals_direct_solve(resonant):
    res = S.sweep(S.SweepSpec(resonant, S.Axis("drive_omega", (2.0,))))
    assert len(res.records) == 1
    direct = steady_correlations(resonant)
    assert res.records[0].result == direct


def test_grid_major_order_and_shape(resonant):
    spec = S.SweepSpec(resonant, S.Axis("emitters[e1].detuning", (-0.1, 0.0, 0.1)),
                       S.Axis("drive_omega", (1.9, 2.0)))
    res = S.sweep(spec)
    assert res.shape == (3, 2)
    assert [(r.param1, r.param2) for r in res.records] == spec.points()
    assert [r.omega for r in res.records] == [1.9, 2.0] * 3


def test_sweep_is_deterministic_across_worker_counts(resonant):
    spec = S.SweepSpec(resonant, S.Axis("drive_omega", tuple(np.linspace(1.9, 2.1, 5))),
                       outputs=("g2", "g3", "delta_theta"))
    a = S.sweep(spec, workers=1)
    b = S.sweep(spec, workers=3)
    assert a.payload() == b.payload()
    assert "wall_time_s" in a.metadata
    assert a.values("delta_theta")[2] == pytest.approx(math.pi)


def test_failures_are_recorded_per_point(resonant):
    spec = S.SweepSpec(resonant, S.Axis("kappa", (-0.1, 0.35)))
    res = S.sweep(spec)
    assert len(res.records) == 2
    assert not res.records[0].ok and res.records[0].error_code == "invalid_parameters"
    assert res.records[1].ok
    assert np.isnan(res.values("g2")[0])


def test_eom_engine_records_singular_points():
    base = S.resonant_single_spec().replace(kappa=0.0, drive_amplitude=0.0)
    base = S.set_parameter(base, "emitters[0].gamma_e", 0.0)
    base = S.set_parameter(base, "emitters[0].detuning", 0.0)
    # D_c = D_e = 0.1 and g = 0.1 make the one-excitation denominator vanish
    base = S.set_parameter(base, "emitters[0].g", 0.1)
    res = S.sweep(S.SweepSpec(base, S.Axis("drive_omega", (1.9,))), S.Engine.EOM)
    assert res.records[0].error_code == "singular_parameters"


def test_detuned_slice_shows_blockade():
    spec = S.SweepSpec(S.resonant_single_spec(), S.Axis("emitters[e1].detuning", (-0.205,)),
                       S.Axis("drive_omega", (1.78, 1.82)))
    res = S.sweep(spec)
    assert res.records[0].result.regime is Regime.BUNCHING
    assert res.records[1].result.regime is Regime.PB


def test_blockade_band_tracks_emitter_energy():
    detunings = tuple(np.linspace(-0.4, 0.4, 9))
    omegas = np.linspace(1.5, 2.5, 51)
    res = S.sweep(S.SweepSpec(S.resonant_single_spec(), S.Axis("emitters[e1].detuning", detunings),
                              S.Axis("drive_omega", tuple(omegas))))
    g2 = res.values("g2")
    regimes = np.array([r.value for r in res.regimes()]).reshape(res.shape)
    for i, d in enumerate(detunings):
        assert abs(omegas[np.argmin(g2[i])] - (2.0 + d)) <= 0.05
        blockade = np.isin(regimes[i], ["PB", "UPB"])
        assert blockade.mean() < 0.25


def test_engines_agree_on_regimes(resonant, two_emitter):
    for base in (resonant, two_emitter):
        spec = S.SweepSpec(base, S.Axis("drive_omega", tuple(np.linspace(1.8, 2.2, 41))))
        me = S.sweep(spec, S.Engine.MASTER_EQUATION)
        eom = S.sweep(spec, S.Engine.EOM)
        for a, b in zip(me.records, eom.records):
            near = min(abs(a.result.g2 - 1), abs(a.result.g3 - 1)) < 0.01
            assert near or a.result.regime is b.result.regime


def test_optical_couplings():
    g = S.optical_couplings(0.0)
    np.testing.assert_allclose(g, (0.085, 0.0425, 0.0425), rtol=1e-12)
    g30 = S.optical_couplings(30.0)
    assert g30[2] == pytest.approx(0.0, abs=1e-15)


def test_chemical_spec_layout():
    s = S.chemical_spec(0.25)
    assert [e.label for e in s.emitters] == ["A1", "B1", "A2", "B2"]
    assert s.emitters[0].g == pytest.approx(0.05)
    assert s.emitters[3].g == pytest.approx(0.1 * math.sqrt(0.75))
    assert s.dim == 112
    with pytest.raises(ValueError):
        S.chemical_spec(1.5)


def test_chemical_full_fraction_reduces_to_two_emitters():
    res = S.chemical_scenario([1.0], [2.0])
    full = res.records[0].result
    two = S.chemical_spec(1.0)
    two = two.replace(emitters=two.emitters[:2])
    ref = steady_correlations(two)
    assert full.g2 == pytest.approx(ref.g2, rel=1e-10)
    assert full.g3 == pytest.approx(ref.g3, rel=1e-10)
    assert res.metadata["collective_peak_coupling_eV"] == pytest.approx(0.1 * math.sqrt(2))


def test_second_emitter_decoupled_reproduces_single(resonant):
    res = S.second_emitter_map(resonant, [0.04], [2.0], g_e2=0.0)
    single = cached_correlations(resonant)
    assert res.records[0].result.regime is Regime.UPB
    assert res.records[0].result.g2 == pytest.approx(single.g2, rel=1e-9)


def test_second_emitter_blockade_islands(resonant):
    res = S.second_emitter_map(resonant, np.linspace(0.0125, 0.0875, 4), np.linspace(1.9, 2.1, 11), 0.08)
    assert Regime.PB in res.regimes()
    with pytest.raises(ValueError):
        S.second_emitter_map(S.two_emitter_spec(), [0.0], [2.0], 0.08)


def test_worker_count(monkeypatch):
    monkeypatch.setenv("PLEXSIM_THREADS", "3")
    assert worker_count() == 3
    assert worker_count(2) == 2
    monkeypatch.setenv("PLEXSIM_THREADS", "x")
    with pytest.raises(ValueError):
        worker_count()
