"""Excitation-manifold level diagrams and the weak-drive cavity excitation
spectrum used as a density-of-states overlay."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TruncationError
from .hilbert import SystemSpec, build_hamiltonian, cavity_annihilation, excitation_numbers
from .lindblad import solve_system
from .parallel import ordered_map

SPECTRUM_NOTE = (
    "S(omega) = kappa * <a^dag a>_ss / E_l^2, the steady-state cavity excitation "
    "spectrum; a proxy with the same peak structure as extinction"
)


@dataclass(frozen=True)
class LevelDiagram:
    """Lab-frame eigenvalues (eV) of the undriven Hamiltonian per excitation number."""

    manifolds: dict[int, np.ndarray]

    def manifold(self, n: int) -> np.ndarray:
        return self.manifolds[n]

    def to_dict(self) -> dict:
        return {str(k): [float(x) for x in v] for k, v in self.manifolds.items()}


def manifold_size(n_exc: int, n_emitters: int, n_max: int) -> int:
    """Number of basis states with total excitation ``n_exc``."""
    from math import comb

    return sum(comb(n_emitters, k) for k in range(0, n_emitters + 1) if 0 <= n_exc - k <= n_max)


def energy_levels(spec: SystemSpec, max_manifold: int = 3) -> LevelDiagram:
    """Diagonalize the lab-frame Hamiltonian block by block in N_exc = 0..max_manifold.

    Blocks above ``n_max`` would be cut by the Fock truncation and are refused.
    """
    if max_manifold < 0:
        raise ValueError("max_manifold must be >= 0")
    if max_manifold > spec.n_max:
        raise TruncationError(
            f"manifold {max_manifold} is not fully represented with n_max={spec.n_max}"
        )
    h = build_hamiltonian(spec, frame="lab").toarray()
    nexc = excitation_numbers(spec)
    manifolds = {}
    for n in range(max_manifold + 1):
        idx = np.flatnonzero(nexc == n)
        block = h[np.ix_(idx, idx)]
        manifolds[n] = np.sort(np.linalg.eigvalsh(block), kind="stable")
    return LevelDiagram(manifolds)


@dataclass(frozen=True)
class SpectrumResult:
    omegas: np.ndarray
    response: np.ndarray
    note: str = SPECTRUM_NOTE

    def peaks(self) -> np.ndarray:
        """Grid positions of interior local maxima."""
        s = self.response
        idx = np.flatnonzero((s[1:-1] > s[:-2]) & (s[1:-1] >= s[2:])) + 1
        return self.omegas[idx]

    def to_dict(self) -> dict:
        return {"omegas": [float(x) for x in self.omegas],
                "response": [float(x) for x in self.response],
                "note": self.note}


def excitation_spectrum(spec: SystemSpec, omega_grid, method: str = "auto",
                        workers: int | None = None) -> SpectrumResult:
    """Steady-state cavity response kappa <a^dag a> / E_l^2 at every drive energy."""
    if not spec.drive_amplitude > 0:
        raise ValueError("excitation spectrum needs a nonzero drive amplitude")
    if spec.drive_amplitude > spec.kappa / 50.0 * (1 + 1e-12):
        raise ValueError("excitation spectrum requires a weak drive (E_l <= kappa/50)")
    omegas = np.asarray(omega_grid, dtype=float)
    a = cavity_annihilation(spec).toarray()
    number = a.conj().T @ a

    def point(omega: float) -> float:
        rho = solve_system(spec.with_drive_omega(float(omega)), method=method)
        mean_n = float(np.real(np.einsum("ij,ji->", rho.data, number)))
        return spec.kappa * mean_n / spec.drive_amplitude ** 2

    response = np.array(ordered_map(point, list(omegas), workers=workers))
    return SpectrumResult(omegas, response)
