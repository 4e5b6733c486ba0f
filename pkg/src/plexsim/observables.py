"""Equal-time correlation functions and photon-number statistics of the
cavity field in a steady state."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import TruncationError, UndefinedCorrelationError
from .hilbert import OperatorMatrix, SystemSpec, cavity_annihilation
from .lindblad import DensityMatrix, solve_system

BOLTZMANN_EV_PER_K = 8.617333262e-5
MIN_MEAN_N = 1e-15
COHERENT_BAND = 0.01


class Regime(str, enum.Enum):
    PB = "PB"
    UPB = "UPB"
    BUNCHING = "bunching"
    COHERENT = "coherent"


def classify(g2: float, g3: float, eps: float = COHERENT_BAND) -> Regime:
    """Photon-blockade regime from g2(0) and g3(0).

    Coherent when both are within ``eps`` of 1, otherwise PB if both are
    below 1, UPB if only g2 is, bunching when g2 >= 1.
    """
    if abs(g2 - 1.0) < eps and abs(g3 - 1.0) < eps:
        return Regime.COHERENT
    if g2 < 1.0 and g3 < 1.0:
        return Regime.PB
    if g2 < 1.0 and g3 > 1.0:
        return Regime.UPB
    return Regime.BUNCHING


@dataclass(frozen=True)
class CorrelationResult:
    drive_omega: float
    g2: float
    g3: float
    mean_n: float
    regime: Regime

    def __post_init__(self):
        object.__setattr__(self, "regime", Regime(self.regime))

    def to_dict(self) -> dict:
        return {
            "drive_omega": self.drive_omega,
            "g2": self.g2,
            "g3": self.g3,
            "mean_n": self.mean_n,
            "regime": self.regime.value,
        }


def _normal_ordered_moment(rho: DensityMatrix, a: OperatorMatrix, order: int) -> complex:
    an = a.toarray()
    power = np.linalg.matrix_power(an, order)
    # Tr(rho a^dag^n a^n) = Tr(a^n rho a^dag^n)
    return complex(np.trace(power @ rho.data @ power.conj().T))


def correlation(rho: DensityMatrix, a: OperatorMatrix, order: int) -> float:
    """g^(n)(0) = Tr(rho a^dag^n a^n) / Tr(rho a^dag a)^n."""
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if a.dim != rho.dim:
        raise ValueError(f"operator dimension {a.dim} does not match state dimension {rho.dim}")
    mean_n = _normal_ordered_moment(rho, a, 1).real
    if not mean_n > MIN_MEAN_N:
        raise UndefinedCorrelationError(f"<a^dag a> = {mean_n:.3e} is too small to normalize g{order}")
    return float(_normal_ordered_moment(rho, a, order).real / mean_n ** order)


@dataclass(frozen=True)
class PhotonStatistics:
    """Cavity photon-number distribution P_m (m = 0..n_max) and its
    relative deviation from a Poissonian of the same mean."""

    probabilities: np.ndarray
    mean_n: float
    deltas: np.ndarray

    @property
    def n_max(self) -> int:
        return len(self.probabilities) - 1

    @classmethod
    def from_probabilities(cls, probabilities, max_delta_order: int = 3) -> "PhotonStatistics":
        p = np.asarray(probabilities, dtype=float)
        m = np.arange(len(p))
        mean_n = float(np.dot(m, p))
        k = np.arange(min(max_delta_order, len(p) - 1) + 1)
        poisson = np.exp(-mean_n + k * np.log(mean_n) - np.array([math.lgamma(x + 1) for x in k])) \
            if mean_n > 0 else (k == 0).astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            deltas = (p[k] - poisson) / poisson
        return cls(p, mean_n, deltas)


def photon_distribution(rho: DensityMatrix, spec: SystemSpec, max_delta_order: int = 3) -> PhotonStatistics:
    """Trace out the emitters and read the Fock-basis diagonal of the cavity state."""
    if rho.dim != spec.dim:
        raise ValueError(f"state dimension {rho.dim} does not match spec dimension {spec.dim}")
    nc = spec.n_max + 1
    ne = 2 ** spec.n_emitters
    reduced = np.einsum("iaja->ij", rho.data.reshape(nc, ne, nc, ne))
    return PhotonStatistics.from_probabilities(np.real(np.diag(reduced)), max_delta_order)


def gn_from_distribution(stats: PhotonStatistics, n: int) -> float:
    """g^(n)(0) = sum_m m!/(m-n)! P_m / <N>^n over the stored distribution."""
    if n > stats.n_max:
        raise TruncationError(f"order {n} exceeds the stored distribution (n_max={stats.n_max})")
    if not stats.mean_n > MIN_MEAN_N:
        raise UndefinedCorrelationError(f"<N> = {stats.mean_n:.3e} is too small to normalize g{n}")
    m = np.arange(n, stats.n_max + 1)
    falling = np.array([math.perm(int(k), n) for k in m], dtype=float)
    return float(np.dot(falling, stats.probabilities[n:]) / stats.mean_n ** n)


def thermal_occupation(omega: float, temperature: float) -> float:
    """Bose-Einstein occupation 1/(exp(omega / k_B T) - 1), omega in eV, T in K."""
    if not omega > 0 or not temperature > 0:
        raise ValueError("omega and temperature must both be > 0")
    x = omega / (BOLTZMANN_EV_PER_K * temperature)
    return float(1.0 / math.expm1(x)) if x < 700 else float(math.exp(-x))


def steady_correlations(spec: SystemSpec, rho: DensityMatrix | None = None,
                        method: str = "auto", eps: float = COHERENT_BAND) -> CorrelationResult:
    """Solve the steady state of ``spec`` (unless given) and evaluate g2, g3."""
    spec.require_correlation_headroom()
    if rho is None:
        rho = solve_system(spec, method=method)
    a = cavity_annihilation(spec)
    mean_n = _normal_ordered_moment(rho, a, 1).real
    g2 = correlation(rho, a, 2)
    g3 = correlation(rho, a, 3)
    return CorrelationResult(spec.drive_omega, g2, g3, float(mean_n), classify(g2, g3, eps))
