"""Parameter sweeps and the prebuilt cavity-emitter experiments.

A sweep walks one or two axes over a base ``SystemSpec``.  Axis paths name
a field of the system:

    drive_omega | omega | omega_c | kappa | drive_amplitude
    emitters[<index or label>].<omega_e | gamma_e | g | detuning>

``detuning`` sets the emitter energy relative to the cavity,
``omega_e = omega_c + value``.  Points are evaluated independently and
returned in grid-major order (axis 1 outer, axis 2 inner).  Failures are
recorded per point with an error code; no point is ever dropped.
"""
from __future__ import annotations

import dataclasses
import enum
import math
import re
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .eom import eom_correlations, pathway_phase
from .errors import PlexsimError
from .hilbert import EmitterSpec, SystemSpec
from .observables import CorrelationResult, classify, steady_correlations
from .parallel import ordered_map, worker_count

DEFAULT_POINTS = 81
KAPPA = 0.35


class Engine(str, enum.Enum):
    MASTER_EQUATION = "master-equation"
    EOM = "eom"


OUTPUTS = ("g2", "g3", "mean_n", "regime", "delta_theta")

_EMITTER_PATH = re.compile(r"^emitters\[([^\]]+)\]\.(omega_e|gamma_e|g|detuning)$")
_TOP_LEVEL = {"drive_omega": "drive_omega", "omega": "drive_omega", "omega_c": "omega_c",
              "kappa": "kappa", "drive_amplitude": "drive_amplitude"}


def _emitter_index(spec: SystemSpec, key: str) -> int:
    if key.lstrip("-").isdigit():
        idx = int(key)
        if not -spec.n_emitters <= idx < spec.n_emitters:
            raise KeyError(f"emitter index {idx} out of range for {spec.n_emitters} emitters")
        return idx % spec.n_emitters
    labels = [em.label for em in spec.emitters]
    if labels.count(key) != 1:
        raise KeyError(f"emitter label {key!r} does not identify exactly one emitter")
    return labels.index(key)


def validate_path(spec: SystemSpec, path: str) -> None:
    if path in _TOP_LEVEL:
        return
    m = _EMITTER_PATH.match(path)
    if not m:
        raise KeyError(f"unknown sweep parameter path {path!r}")
    _emitter_index(spec, m.group(1))


def set_parameter(spec: SystemSpec, path: str, value: float) -> SystemSpec:
    """Copy of ``spec`` with the field named by ``path`` set to ``value``."""
    if path in _TOP_LEVEL:
        return spec.replace(**{_TOP_LEVEL[path]: float(value)})
    m = _EMITTER_PATH.match(path)
    if not m:
        raise KeyError(f"unknown sweep parameter path {path!r}")
    j = _emitter_index(spec, m.group(1))
    attr = m.group(2)
    if attr == "detuning":
        attr, value = "omega_e", spec.omega_c + value
    emitters = list(spec.emitters)
    emitters[j] = dataclasses.replace(emitters[j], **{attr: float(value)})
    return spec.replace(emitters=tuple(emitters))


@dataclass(frozen=True)
class Axis:
    path: str
    grid: tuple[float, ...]

    def __post_init__(self):
        grid = tuple(float(x) for x in self.grid)
        object.__setattr__(self, "grid", grid)
        if len(grid) < 1:
            raise ValueError(f"axis {self.path!r} has an empty grid")
        diffs = np.diff(grid)
        if len(grid) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
            raise ValueError(f"axis {self.path!r} grid must be strictly monotone")
        if not all(math.isfinite(x) for x in grid):
            raise ValueError(f"axis {self.path!r} grid has non-finite values")


def default_grid(lo: float, hi: float, n: int = DEFAULT_POINTS) -> tuple[float, ...]:
    return tuple(np.linspace(lo, hi, n))


@dataclass(frozen=True)
class SweepSpec:
    base: SystemSpec
    axis1: Axis
    axis2: Axis | None = None
    outputs: tuple[str, ...] = ("g2", "g3", "mean_n", "regime")

    def __post_init__(self):
        for path in [self.axis1.path] + ([self.axis2.path] if self.axis2 else []):
            validate_path(self.base, path)
        unknown = set(self.outputs) - set(OUTPUTS)
        if unknown:
            raise ValueError(f"unknown outputs requested: {sorted(unknown)}")

    def points(self) -> list[tuple[float, float | None]]:
        inner = self.axis2.grid if self.axis2 else (None,)
        return [(x1, x2) for x1 in self.axis1.grid for x2 in inner]

    def spec_at(self, x1: float, x2: float | None) -> SystemSpec:
        spec = set_parameter(self.base, self.axis1.path, x1)
        if self.axis2 is not None:
            spec = set_parameter(spec, self.axis2.path, x2)
        return spec


@dataclass(frozen=True)
class PointRecord:
    param1: float
    param2: float | None
    omega: float
    result: CorrelationResult | None
    delta_theta: float | None = None
    error_code: str = ""
    error_message: str = ""

    @property
    def ok(self) -> bool:
        return self.result is not None

    def to_dict(self) -> dict:
        r = self.result
        return {
            "omega_eV": self.omega,
            "param1": self.param1,
            "param2": self.param2,
            "g2": r.g2 if r else None,
            "g3": r.g3 if r else None,
            "mean_n": r.mean_n if r else None,
            "regime": r.regime.value if r else None,
            "delta_theta": self.delta_theta,
            "error_code": self.error_code,
            "error_message": self.error_message,
        }


@dataclass(frozen=True)
class SweepResult:
    axis1: Axis
    axis2: Axis | None
    engine: Engine
    records: tuple[PointRecord, ...]
    metadata: dict = field(default_factory=dict)

    @property
    def shape(self) -> tuple[int, ...]:
        return (len(self.axis1.grid),) + ((len(self.axis2.grid),) if self.axis2 else ())

    def values(self, name: str) -> np.ndarray:
        """Array of ``g2``, ``g3``, ``mean_n`` or ``delta_theta`` shaped like the grid (NaN on failures)."""
        out = []
        for rec in self.records:
            if name == "delta_theta":
                v = rec.delta_theta
            else:
                v = getattr(rec.result, name) if rec.result else None
            out.append(np.nan if v is None else v)
        return np.array(out, dtype=float).reshape(self.shape)

    def regimes(self) -> list:
        return [rec.result.regime if rec.result else None for rec in self.records]

    def payload(self) -> dict:
        """Everything except timing, for reproducibility comparisons."""
        return {
            "axis1": {"path": self.axis1.path, "grid": list(self.axis1.grid)},
            "axis2": {"path": self.axis2.path, "grid": list(self.axis2.grid)} if self.axis2 else None,
            "engine": self.engine.value,
            "records": [r.to_dict() for r in self.records],
        }

    def to_dict(self) -> dict:
        return {**self.payload(), "metadata": dict(self.metadata)}


def evaluate_point(spec: SystemSpec, engine: Engine, with_phase: bool = False) -> tuple[CorrelationResult, float | None]:
    engine = Engine(engine)
    if engine is Engine.EOM:
        eom = eom_correlations(spec)
        result = CorrelationResult(spec.drive_omega, eom.g2, eom.g3, eom.amplitudes.mean_n,
                                   classify(eom.g2, eom.g3))
    else:
        result = steady_correlations(spec)
    phase = None
    if with_phase and spec.n_emitters == 1:
        phase = abs(pathway_phase(spec))
    return result, phase


def _run(builder: Callable[[float, float | None], SystemSpec], axis1: Axis, axis2: Axis | None,
         engine: Engine, with_phase: bool, workers: int | None, metadata: dict | None = None) -> SweepResult:
    engine = Engine(engine)
    inner = axis2.grid if axis2 else (None,)
    points = [(x1, x2) for x1 in axis1.grid for x2 in inner]

    def one(point):
        x1, x2 = point
        omega = math.nan
        try:
            spec = builder(x1, x2)
            omega = spec.drive_omega
            result, phase = evaluate_point(spec, engine, with_phase)
            return PointRecord(x1, x2, omega, result, phase)
        except PlexsimError as exc:
            return PointRecord(x1, x2, omega, None, None, exc.code, str(exc))
        except (ValueError, ArithmeticError, KeyError) as exc:
            return PointRecord(x1, x2, omega, None, None, "invalid_parameters", str(exc))

    n_workers = worker_count(workers)
    t0 = time.perf_counter()
    records = tuple(ordered_map(one, points, workers=n_workers))
    meta = {"wall_time_s": time.perf_counter() - t0, "workers": n_workers, "points": len(points)}
    meta.update(metadata or {})
    return SweepResult(axis1, axis2, engine, records, meta)


def sweep(spec: SweepSpec, engine: Engine | str = Engine.MASTER_EQUATION,
          workers: int | None = None) -> SweepResult:
    return _run(spec.spec_at, spec.axis1, spec.axis2, Engine(engine),
                "delta_theta" in spec.outputs, workers)


# --- preset systems ---------------------------------------------------------

def resonant_single_spec(n_max: int = 6, drive_omega: float = 2.0) -> SystemSpec:
    """Cavity and emitter at 2 eV, kappa 350 meV, gamma 80 meV, g 80 meV."""
    return SystemSpec(omega_c=2.0, kappa=KAPPA, drive_omega=drive_omega,
                      emitters=(EmitterSpec(2.0, 0.08, 0.08, "e1"),), n_max=n_max)


def detuned_single_spec(n_max: int = 6, drive_omega: float = 1.82) -> SystemSpec:
    """Emitter 205 meV below the cavity."""
    return SystemSpec(omega_c=2.0, kappa=KAPPA, drive_omega=drive_omega,
                      emitters=(EmitterSpec(2.0 - 0.205, 0.08, 0.08, "e1"),), n_max=n_max)


def add_second_emitter(base: SystemSpec, delta_e2c: float, g_e2: float, gamma_e2: float = 0.06) -> SystemSpec:
    e2 = EmitterSpec(base.omega_c + delta_e2c, gamma_e2, g_e2, "e2")
    return base.replace(emitters=base.emitters + (e2,))


def two_emitter_spec(n_max: int = 6, drive_omega: float = 2.0) -> SystemSpec:
    """Resonant single-emitter system plus e2 at +40 meV with g 80 meV."""
    return add_second_emitter(resonant_single_spec(n_max, drive_omega), 0.04, 0.08)


def chemical_spec(fraction: float, drive_omega: float = 2.0, peak_coupling: float = 0.1,
                  n_max: int = 6) -> SystemSpec:
    """Two emitter species at two locations (A, B) each.

    Species 1 (2 eV) couples with ``peak_coupling * sqrt(f)`` and species 2
    (2.04 eV) with ``peak_coupling * sqrt(1 - f)``, per emitter.
    """
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must lie in [0, 1], got {fraction}")
    g1 = peak_coupling * math.sqrt(fraction)
    g2 = peak_coupling * math.sqrt(1.0 - fraction)
    emitters = (
        EmitterSpec(2.0, 0.06, g1, "A1"),
        EmitterSpec(2.0, 0.06, g1, "B1"),
        EmitterSpec(2.04, 0.06, g2, "A2"),
        EmitterSpec(2.04, 0.06, g2, "B2"),
    )
    return SystemSpec(omega_c=2.0, kappa=KAPPA, drive_omega=drive_omega, emitters=emitters, n_max=n_max)


def optical_couplings(alpha_deg: float, peak_coupling: float = 0.085) -> tuple[float, float, float]:
    """Couplings of emitters at three sites 60 degrees apart for polarization angle alpha."""
    a = math.radians(alpha_deg)
    third = math.pi / 3.0
    return (peak_coupling * abs(math.cos(a)),
            peak_coupling * abs(math.cos(a - third)),
            peak_coupling * abs(math.cos(a + third)))


def optical_spec(alpha_deg: float, drive_omega: float = 2.0, peak_coupling: float = 0.085,
                 gamma_e: float = 0.08, n_max: int = 6) -> SystemSpec:
    ga, gb, gc = optical_couplings(alpha_deg, peak_coupling)
    emitters = (EmitterSpec(2.0, gamma_e, ga, "A"), EmitterSpec(2.0, gamma_e, gb, "B"),
                EmitterSpec(2.0, gamma_e, gc, "C"))
    return SystemSpec(omega_c=2.0, kappa=KAPPA, drive_omega=drive_omega, emitters=emitters, n_max=n_max)


# --- prebuilt experiments ---------------------------------------------------

def chemical_scenario(f_grid: Sequence[float], omega_grid: Sequence[float] = (2.0,),
                      peak_coupling: float = 0.1, n_max: int = 6,
                      workers: int | None = None) -> SweepResult:
    """Fraction x drive-energy map for the two-species chemical mixture (master equation only)."""
    axis1 = Axis("fraction", tuple(f_grid))
    axis2 = Axis("drive_omega", tuple(omega_grid))
    meta = {
        "scenario": "chemical",
        "peak_coupling_eV": peak_coupling,
        # two emitters of a species share a coupling g; the bright mode couples with sqrt(2) g
        "collective_peak_coupling_eV": math.sqrt(2.0) * peak_coupling,
    }
    return _run(lambda f, w: chemical_spec(f, w, peak_coupling, n_max), axis1, axis2,
                Engine.MASTER_EQUATION, False, workers, meta)


def optical_scenario(alpha_grid: Sequence[float], omega: float = 2.0, peak_coupling: float = 0.085,
                     n_max: int = 6, workers: int | None = None) -> SweepResult:
    """Polarization-angle sweep (degrees) for three emitters at 60-degree sites."""
    axis1 = Axis("alpha_deg", tuple(alpha_grid))
    meta = {"scenario": "optical", "peak_coupling_eV": peak_coupling, "omega_eV": omega}
    return _run(lambda a, _: optical_spec(a, omega, peak_coupling, n_max=n_max), axis1, None,
                Engine.MASTER_EQUATION, False, workers, meta)


def second_emitter_map(base: SystemSpec, delta_e2c_grid: Sequence[float], omega_grid: Sequence[float],
                       g_e2: float, gamma_e2: float = 0.06, engine: Engine | str = Engine.MASTER_EQUATION,
                       workers: int | None = None) -> SweepResult:
    """Detuning of a second emitter x drive energy map on top of a one-emitter base."""
    if base.n_emitters != 1:
        raise ValueError(f"base system must have one emitter, got {base.n_emitters}")
    axis1 = Axis("delta_e2c", tuple(delta_e2c_grid))
    axis2 = Axis("drive_omega", tuple(omega_grid))
    meta = {"scenario": "second-emitter", "g_e2_eV": g_e2, "gamma_e2_eV": gamma_e2}

    def build(d, w):
        return add_second_emitter(base, d, g_e2, gamma_e2).with_drive_omega(w)

    return _run(build, axis1, axis2, Engine(engine), False, workers, meta)
