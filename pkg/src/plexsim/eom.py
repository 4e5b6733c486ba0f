"""Weak-drive equations-of-motion solutions for one and two emitters.

The driven, damped system is described by a non-Hermitian Hamiltonian with
complex detunings ``D'_c = D_c - i kappa/2`` and ``D'_e = D_e - i gamma/2``.
Truncating the wavefunction at three excitations and keeping only the
leading order in the drive amplitude ``E_l`` gives a cascade

    vacuum (c1 = 1) -> one-excitation -> two-excitation -> three-excitation

in which every tier is linear in the one below.  Correlations follow from
``g2 ~ 2|c_{2ph}|^2 / |c_{1ph}|^4`` and ``g3 ~ 6|c_{3ph}|^2 / |c_{1ph}|^6``,
where the ``c`` are the amplitudes of the pure photon states |2,g..> and
|3,g..>.

Basis for one emitter (|n, s>): c1 |0g>, c2 |1g>, c3 |0e>, c4 |1e>, c5 |2g>,
c6 |2e>, c7 |3g>.  For two emitters (|n, s1, s2>): c1 |0gg>; c2 |1gg>,
c3 |0eg>, c4 |0ge>; c5 |2gg>, c6 |1eg>, c7 |1ge>, c8 |0ee>; c9 |3gg>,
c10 |2eg>, c11 |2ge>, c12 |1ee>.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import SingularParameterError, UndefinedPhaseError
from .hilbert import SystemSpec

SINGULAR_TOL = 1e-12
SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class ComplexDetunings:
    delta_c_p: complex
    delta_e_p: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "delta_e_p", tuple(complex(x) for x in self.delta_e_p))
        if complex(self.delta_c_p).imag > 0 or any(x.imag > 0 for x in self.delta_e_p):
            raise ValueError("complex detunings must have non-positive imaginary parts")

    @classmethod
    def from_spec(cls, spec: SystemSpec) -> "ComplexDetunings":
        return cls(
            spec.delta_c - 0.5j * spec.kappa,
            tuple(d - 0.5j * em.gamma_e for d, em in zip(spec.delta_e, spec.emitters)),
        )


@dataclass(frozen=True)
class AmplitudeSet:
    """Steady amplitudes c1..cK (``amplitudes[k-1]`` is c_k) grouped into
    excitation tiers, plus the two-photon pathway coefficients for a single
    emitter."""

    amplitudes: np.ndarray
    tiers: tuple[tuple[int, ...], ...]
    photons: tuple[int, ...]
    pathway_coeffs: dict[str, complex] = field(default_factory=dict)

    @property
    def mean_n(self) -> float:
        """Photon number of the truncated state, normalized by its norm."""
        w = np.abs(self.amplitudes) ** 2
        return float(np.dot(self.photons, w) / np.sum(w))

    def c(self, k: int) -> complex:
        return complex(self.amplitudes[k - 1])

    def tier_magnitudes(self) -> list[float]:
        return [max(abs(self.amplitudes[k - 1]) for k in tier) for tier in self.tiers]

    def hierarchy_ratios(self) -> list[float]:
        """Ratio of the largest amplitude in each tier to the largest in the next."""
        mags = self.tier_magnitudes()
        return [mags[i] / mags[i + 1] if mags[i + 1] > 0 else math.inf for i in range(len(mags) - 1)]

    def satisfies_hierarchy(self, factor: float = 5.0) -> bool:
        return all(r >= factor for r in self.hierarchy_ratios())


@dataclass(frozen=True)
class EomResult:
    amplitudes: AmplitudeSet
    g2: float
    g3: float

    def __iter__(self):
        return iter((self.amplitudes, self.g2, self.g3))


def _check_denominator(value: complex, what: str) -> complex:
    if abs(value) < SINGULAR_TOL:
        raise SingularParameterError(f"{what} denominator vanishes (|D| = {abs(value):.3e})")
    return value


def _single_cascade(dc: complex, de: complex, g: float, el: float) -> AmplitudeSet:
    d1 = _check_denominator(dc * de - g * g, "one-excitation")
    c2 = el * (-de) / d1
    c3 = el * g / d1

    d2 = _check_denominator(dc * (dc + de) - g * g, "two-excitation")
    a42 = el * g / d2
    a43 = -el * dc / d2
    a52 = (el / SQRT2) * (-(dc + de)) / d2
    a53 = (el / SQRT2) * g / d2
    c4 = a42 * c2 + a43 * c3
    c5 = a52 * c2 + a53 * c3

    d3 = _check_denominator(dc * (2 * dc + de) - g * g, "three-excitation")
    c6 = el * (-SQRT2 * dc * c4 + g * c5) / d3
    c7 = (el / SQRT3) * (SQRT2 * g * c4 - (2 * dc + de) * c5) / d3

    amps = np.array([1.0, c2, c3, c4, c5, c6, c7], dtype=complex)
    coeffs = {"A42": a42, "A43": a43, "A52": a52, "A53": a53}
    return AmplitudeSet(amps, ((1,), (2, 3), (4, 5), (6, 7)), (0, 1, 0, 1, 2, 2, 3), coeffs)


def _require_emitters(spec: SystemSpec, n: int) -> None:
    if spec.n_emitters != n:
        raise ValueError(f"expected exactly {n} emitter(s), got {spec.n_emitters}")
    if not spec.weak_drive:
        raise ValueError("equations-of-motion solution requires a weak drive (E_l <= kappa/20)")


def _correlations(c1ph: complex, c2ph: complex, c3ph: complex) -> tuple[float, float]:
    n1 = abs(c1ph) ** 2
    if n1 == 0:
        raise SingularParameterError("one-photon amplitude vanishes; correlations undefined")
    return 2.0 * abs(c2ph) ** 2 / n1 ** 2, 6.0 * abs(c3ph) ** 2 / n1 ** 3


def eom_single(spec: SystemSpec) -> EomResult:
    """Closed-form amplitudes and approximate g2, g3 for one emitter."""
    _require_emitters(spec, 1)
    det = ComplexDetunings.from_spec(spec)
    amps = _single_cascade(det.delta_c_p, det.delta_e_p[0], spec.emitters[0].g, spec.drive_amplitude)
    g2, g3 = _correlations(amps.c(2), amps.c(5), amps.c(7))
    return EomResult(amps, g2, g3)


def _phase_difference(amps: AmplitudeSet) -> float:
    p1 = amps.pathway_coeffs["A52"] * amps.c(2)
    p2 = amps.pathway_coeffs["A53"] * amps.c(3)
    if p1 == 0 or p2 == 0:
        raise UndefinedPhaseError("one of the two-photon pathways has zero amplitude")
    d = np.angle(p1) - np.angle(p2)
    return float(math.pi - (math.pi - d) % (2 * math.pi))


def pathway_phase(spec: SystemSpec, omega: float | None = None) -> float:
    """Phase difference Arg(A52 c2) - Arg(A53 c3) between the direct
    (|1g> -> |2g>) and emitter-mediated (|0e> -> |2g>) routes into the
    two-photon state, wrapped to (-pi, pi]."""
    if spec.n_emitters != 1:
        raise ValueError(f"expected exactly 1 emitter, got {spec.n_emitters}")
    if omega is not None:
        spec = spec.with_drive_omega(omega)
    det = ComplexDetunings.from_spec(spec)
    amps = _single_cascade(det.delta_c_p, det.delta_e_p[0], spec.emitters[0].g, spec.drive_amplitude)
    return _phase_difference(amps)


def solve_small(matrix, rhs, tol: float = SINGULAR_TOL) -> np.ndarray:
    """Gaussian elimination with partial pivoting for a small complex system.

    Raises SingularParameterError when a pivot falls below ``tol`` relative
    to the largest matrix entry.
    """
    m = np.array(matrix, dtype=complex)
    b = np.array(rhs, dtype=complex)
    n = m.shape[0]
    if m.shape != (n, n) or b.shape != (n,):
        raise ValueError("matrix must be square and match the right-hand side")
    scale = max(float(np.max(np.abs(m))), 1.0) if n else 1.0
    for k in range(n):
        p = k + int(np.argmax(np.abs(m[k:, k])))
        if abs(m[p, k]) < tol * scale:
            raise SingularParameterError(f"linear system is singular (pivot {abs(m[p, k]):.3e} at column {k})")
        if p != k:
            m[[k, p]] = m[[p, k]]
            b[[k, p]] = b[[p, k]]
        factors = m[k + 1:, k] / m[k, k]
        m[k + 1:, k:] -= np.outer(factors, m[k, k:])
        b[k + 1:] -= factors * b[k]
    x = np.zeros(n, dtype=complex)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - np.dot(m[k, k + 1:], x[k + 1:])) / m[k, k]
    return x


def _double_cascade(dc: complex, d1: complex, d2: complex, g1: float, g2: float, el: float) -> AmplitudeSet:
    den = _check_denominator(dc * d1 * d2 - g1 ** 2 * d2 - g2 ** 2 * d1, "one-excitation")
    c2 = el * (-d1 * d2) / den
    c3 = el * g1 * d2 / den
    c4 = el * g2 * d1 / den

    m2 = [
        [2 * dc, SQRT2 * g1, SQRT2 * g2, 0],
        [SQRT2 * g1, dc + d1, 0, g2],
        [SQRT2 * g2, 0, dc + d2, g1],
        [0, g2, g1, d1 + d2],
    ]
    c5, c6, c7, c8 = solve_small(m2, -el * np.array([SQRT2 * c2, c3, c4, 0]))

    m3 = [
        [3 * dc, SQRT3 * g1, SQRT3 * g2, 0],
        [SQRT3 * g1, 2 * dc + d1, 0, SQRT2 * g2],
        [SQRT3 * g2, 0, 2 * dc + d2, SQRT2 * g1],
        [0, SQRT2 * g2, SQRT2 * g1, dc + d1 + d2],
    ]
    c9, c10, c11, c12 = solve_small(m3, -el * np.array([SQRT3 * c5, SQRT2 * c6, SQRT2 * c7, c8]))

    amps = np.array([1.0, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12], dtype=complex)
    return AmplitudeSet(amps, ((1,), (2, 3, 4), (5, 6, 7, 8), (9, 10, 11, 12)),
                        (0, 1, 0, 0, 2, 1, 1, 0, 3, 2, 2, 1))


def eom_double(spec: SystemSpec) -> EomResult:
    """Amplitudes and approximate g2, g3 for two emitters via two 4x4 solves."""
    _require_emitters(spec, 2)
    det = ComplexDetunings.from_spec(spec)
    e1, e2 = spec.emitters
    amps = _double_cascade(det.delta_c_p, det.delta_e_p[0], det.delta_e_p[1], e1.g, e2.g, spec.drive_amplitude)
    g2, g3 = _correlations(amps.c(2), amps.c(5), amps.c(9))
    return EomResult(amps, g2, g3)


def eom_correlations(spec: SystemSpec) -> EomResult:
    """Dispatch to the one- or two-emitter solution."""
    if spec.n_emitters == 1:
        return eom_single(spec)
    if spec.n_emitters == 2:
        return eom_double(spec)
    raise ValueError(f"equations-of-motion solution covers 1 or 2 emitters, got {spec.n_emitters}")
