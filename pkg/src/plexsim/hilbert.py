"""Truncated Hilbert spaces, operators and Hamiltonians for one cavity mode
coupled to N two-level emitters.

Units: hbar = 1 and every energy, rate and amplitude is in eV.

Basis ordering is fixed for the whole package: cavity Fock index slowest,
then emitters in the order they appear in ``SystemSpec.emitters``; each
emitter uses (|g>, |e>) = (0, 1).  A basis index is therefore
``n * 2**N + sum_j s_j * 2**(N - j)`` for photon number ``n`` and emitter
occupations ``s_1..s_N``.

The truncated creation operator is the matrix adjoint of the truncated
annihilation operator, so ``[a, a^dag] = 1`` holds everywhere except on the
top Fock state ``|n_max>`` (``a^dag |n_max> = 0``).
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .errors import DimensionMismatchError, InvalidTruncationError

# operators above this dimension are kept in CSR form
DENSE_LIMIT = 64
HERMITIAN_TOL = 1e-12

SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)


@dataclass(frozen=True)
class EmitterSpec:
    """A two-level emitter: transition energy, decay rate and cavity coupling."""

    omega_e: float
    gamma_e: float
    g: float
    label: str = "e"

    def __post_init__(self):
        if not self.omega_e > 0:
            raise ValueError(f"emitter {self.label!r}: omega_e must be > 0, got {self.omega_e}")
        if self.gamma_e < 0:
            raise ValueError(f"emitter {self.label!r}: gamma_e must be >= 0, got {self.gamma_e}")
        if self.g < 0:
            raise ValueError(f"emitter {self.label!r}: g must be >= 0, got {self.g}")


@dataclass(frozen=True)
class SystemSpec:
    """Full physical description of a driven cavity-emitter system.

    ``drive_amplitude`` defaults to ``kappa / 50``.  Detunings are derived,
    never stored: ``delta_c = omega_c - drive_omega`` and
    ``delta_e[j] = emitters[j].omega_e - drive_omega``.
    """

    omega_c: float
    kappa: float
    drive_omega: float
    emitters: tuple[EmitterSpec, ...] = ()
    drive_amplitude: float | None = None
    n_max: int = 6

    def __post_init__(self):
        object.__setattr__(self, "emitters", tuple(self.emitters))
        if self.drive_amplitude is None:
            object.__setattr__(self, "drive_amplitude", self.kappa / 50.0)
        if not self.omega_c > 0:
            raise ValueError(f"omega_c must be > 0, got {self.omega_c}")
        if self.kappa < 0:
            raise ValueError(f"kappa must be >= 0, got {self.kappa}")
        if self.drive_amplitude < 0:
            raise ValueError(f"drive_amplitude must be >= 0, got {self.drive_amplitude}")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise InvalidTruncationError(f"n_max must be an integer >= 1, got {self.n_max}")
        for em in self.emitters:
            if not isinstance(em, EmitterSpec):
                raise TypeError(f"emitters must be EmitterSpec instances, got {type(em).__name__}")

    @property
    def n_emitters(self) -> int:
        return len(self.emitters)

    @property
    def dim(self) -> int:
        return (self.n_max + 1) * 2 ** self.n_emitters

    @property
    def site_dims(self) -> tuple[int, ...]:
        return (self.n_max + 1,) + (2,) * self.n_emitters

    @property
    def delta_c(self) -> float:
        return self.omega_c - self.drive_omega

    @property
    def delta_e(self) -> tuple[float, ...]:
        return tuple(em.omega_e - self.drive_omega for em in self.emitters)

    @property
    def weak_drive(self) -> bool:
        return self.drive_amplitude <= self.kappa / 20.0

    def replace(self, **changes) -> "SystemSpec":
        return dataclasses.replace(self, **changes)

    def with_drive_omega(self, omega: float) -> "SystemSpec":
        return dataclasses.replace(self, drive_omega=omega)

    def require_correlation_headroom(self) -> None:
        """g3(0) is only meaningful with at least four photons of headroom."""
        if self.n_max < 4:
            raise InvalidTruncationError(
                f"n_max={self.n_max} is too small for third-order correlations (need >= 4)"
            )


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Square complex matrix on a (possibly composite) Hilbert space.

    ``entries`` is a dense ndarray for small spaces and a CSR matrix above
    ``DENSE_LIMIT``.
    """

    entries: object
    hermitian_hint: bool = False
    dim: int = field(init=False)

    def __post_init__(self):
        m = self.entries
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatchError(f"operator must be square, got shape {m.shape}")
        object.__setattr__(self, "dim", int(m.shape[0]))
        if self.hermitian_hint:
            dev = _max_abs(m - m.conj().T)
            if dev >= HERMITIAN_TOL:
                raise ValueError(f"operator flagged Hermitian deviates by {dev:.3e}")

    @classmethod
    def wrap(cls, m, hermitian_hint: bool = False) -> "OperatorMatrix":
        """Store ``m`` in the representation appropriate for its size."""
        if m.shape[0] > DENSE_LIMIT:
            m = sp.csr_matrix(m, dtype=complex)
        else:
            m = m.toarray() if sp.issparse(m) else np.asarray(m)
            m = m.astype(complex)
        return cls(m, hermitian_hint=hermitian_hint)

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.entries)

    def toarray(self) -> np.ndarray:
        return self.entries.toarray() if self.is_sparse else np.array(self.entries)

    def tocsr(self) -> sp.csr_matrix:
        return sp.csr_matrix(self.entries)

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix.wrap(self.entries.conj().T, self.hermitian_hint)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _check_same_dim(self, other)
        return OperatorMatrix.wrap(self.entries @ other.entries)

    def __add__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _check_same_dim(self, other)
        return OperatorMatrix.wrap(self.entries + other.entries)

    def __sub__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        _check_same_dim(self, other)
        return OperatorMatrix.wrap(self.entries - other.entries)

    def __mul__(self, scalar) -> "OperatorMatrix":
        return OperatorMatrix.wrap(self.entries * scalar)

    __rmul__ = __mul__


def _max_abs(m) -> float:
    if sp.issparse(m):
        return float(abs(m).max()) if m.nnz else 0.0
    return float(np.max(np.abs(m))) if m.size else 0.0


def _check_same_dim(a: OperatorMatrix, b: OperatorMatrix) -> None:
    if a.dim != b.dim:
        raise DimensionMismatchError(f"operator dimensions differ: {a.dim} vs {b.dim}")


def fock_annihilation(n_max: int) -> OperatorMatrix:
    """Photon annihilation operator on Fock states 0..n_max."""
    if int(n_max) != n_max or n_max < 1:
        raise InvalidTruncationError(f"n_max must be an integer >= 1, got {n_max}")
    m = np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), 1)
    return OperatorMatrix.wrap(m)


def sigma_minus() -> OperatorMatrix:
    return OperatorMatrix.wrap(SIGMA_MINUS)


def embed(local_op: OperatorMatrix, site_index: int, spec: SystemSpec) -> OperatorMatrix:
    """Kronecker-lift a single-site operator into the composite space.

    Site 0 is the cavity, sites 1..N are emitters in spec order.
    """
    dims = spec.site_dims
    if not 0 <= site_index < len(dims):
        raise IndexError(f"site {site_index} out of range for {len(dims)} sites")
    if local_op.dim != dims[site_index]:
        raise DimensionMismatchError(
            f"site {site_index} has dimension {dims[site_index]}, operator has {local_op.dim}"
        )
    left = int(np.prod(dims[:site_index], dtype=int))
    right = int(np.prod(dims[site_index + 1:], dtype=int))
    m = sp.kron(sp.identity(left, format="csr"), sp.csr_matrix(local_op.entries), format="csr")
    m = sp.kron(m, sp.identity(right, format="csr"), format="csr")
    return OperatorMatrix.wrap(m, hermitian_hint=local_op.hermitian_hint)


def cavity_annihilation(spec: SystemSpec) -> OperatorMatrix:
    return embed(fock_annihilation(spec.n_max), 0, spec)


def emitter_lowering(spec: SystemSpec, j: int) -> OperatorMatrix:
    """sigma^- of emitter ``j`` (0-based position in ``spec.emitters``)."""
    return embed(sigma_minus(), j + 1, spec)


def build_hamiltonian(spec: SystemSpec, frame: str = "rotating", include_drive: bool = True) -> OperatorMatrix:
    """Jaynes-Cummings Hamiltonian with a coherent cavity drive.

    ``frame="rotating"`` gives
    ``delta_c a^dag a + sum_j delta_ej s+_j s-_j + sum_j g_j (a s+_j + a^dag s-_j) + E_l (a + a^dag)``.
    ``frame="lab"`` replaces detunings by bare energies and never includes
    the drive (it is only meaningful for undriven level structure).
    """
    if frame not in ("rotating", "lab"):
        raise ValueError(f"frame must be 'rotating' or 'lab', got {frame!r}")
    a = cavity_annihilation(spec).tocsr()
    ad = a.conj().T
    if frame == "rotating":
        h = spec.delta_c * (ad @ a)
        energies = spec.delta_e
    else:
        h = spec.omega_c * (ad @ a)
        energies = tuple(em.omega_e for em in spec.emitters)
        include_drive = False
    for j, em in enumerate(spec.emitters):
        sm = emitter_lowering(spec, j).tocsr()
        sp_plus = sm.conj().T
        h = h + energies[j] * (sp_plus @ sm) + em.g * (a @ sp_plus + ad @ sm)
    if include_drive:
        h = h + spec.drive_amplitude * (a + ad)
    return OperatorMatrix.wrap(h, hermitian_hint=True)


def excitation_number_operator(spec: SystemSpec) -> OperatorMatrix:
    """Total excitation number a^dag a + sum_j s+_j s-_j (diagonal)."""
    return OperatorMatrix.wrap(sp.diags(excitation_numbers(spec).astype(complex)), hermitian_hint=True)


def excitation_numbers(spec: SystemSpec) -> np.ndarray:
    """Diagonal of the excitation-number operator as integers."""
    n = np.arange(spec.n_max + 1)
    total = n
    for _ in spec.emitters:
        total = np.add.outer(total, np.array([0, 1])).ravel()
    return total.astype(int)


def photon_numbers(spec: SystemSpec) -> np.ndarray:
    return np.repeat(np.arange(spec.n_max + 1), 2 ** spec.n_emitters)


def basis_labels(spec: SystemSpec) -> list[tuple[int, ...]]:
    """Occupation tuples (n, s_1, ..., s_N) in basis order."""
    import itertools

    ranges: Sequence[range] = [range(spec.n_max + 1)] + [range(2)] * spec.n_emitters
    return list(itertools.product(*ranges))
