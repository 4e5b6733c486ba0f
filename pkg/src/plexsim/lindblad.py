"""Liouvillian construction, steady-state solves and time evolution.

Density matrices are vectorized column-stacked (Fortran order), so
``vec(A X B) = (B^T kron A) vec(X)``.  The generator is

    d rho/dt = i[rho, H] + sum_k (r_k / 2) (2 o rho o^dag - rho o^dag o - o^dag o rho)

which makes the population decay rate of every channel equal to ``r_k``.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.linalg.lapack import ztrsyl

from .errors import (
    DimensionMismatchError,
    MultiplicityError,
    PhysicalityError,
    SolverError,
    StepSizeError,
    TraceDriftError,
)
from .hilbert import (
    OperatorMatrix,
    SystemSpec,
    build_hamiltonian,
    cavity_annihilation,
    emitter_lowering,
    excitation_numbers,
)

log = logging.getLogger(__name__)

TRACE_TOL = 1e-10
HERMITICITY_TOL = 1e-10
POSITIVITY_TOL = -1e-8
RESIDUAL_TOL = 1e-10
# Hilbert dimension up to which the direct dense LU is used by method="auto"
DENSE_SOLVE_LIMIT = 40


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    data: np.ndarray
    check: bool = True
    dim: int = field(init=False)

    def __post_init__(self):
        rho = np.asarray(self.data, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise DimensionMismatchError(f"density matrix must be square, got {rho.shape}")
        object.__setattr__(self, "data", rho)
        object.__setattr__(self, "dim", rho.shape[0])
        if self.check:
            self.validate()

    @classmethod
    def pure(cls, psi) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex)
        psi = psi / np.linalg.norm(psi)
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def fock(cls, n: int, dim: int) -> "DensityMatrix":
        psi = np.zeros(dim, dtype=complex)
        psi[n] = 1.0
        return cls.pure(psi)

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.data)))

    def min_eigenvalue(self) -> float:
        herm = 0.5 * (self.data + self.data.conj().T)
        return float(np.linalg.eigvalsh(herm)[0])

    def validate(self) -> None:
        rho = self.data
        if abs(np.trace(rho) - 1.0) >= TRACE_TOL:
            raise PhysicalityError(f"trace deviates from 1 by {abs(np.trace(rho) - 1.0):.3e}")
        herm_dev = float(np.max(np.abs(rho - rho.conj().T)))
        if herm_dev >= HERMITICITY_TOL:
            raise PhysicalityError(f"density matrix not Hermitian (max deviation {herm_dev:.3e})")
        lam = self.min_eigenvalue()
        if lam <= POSITIVITY_TOL:
            raise PhysicalityError(f"density matrix has negative eigenvalue {lam:.3e}")

    def expect(self, op: OperatorMatrix) -> complex:
        m = op.entries
        if op.is_sparse:
            # Tr(rho M) = sum_ij rho_ij M_ji
            return complex(np.sum(m.T.multiply(self.data)))
        return complex(np.einsum("ij,ji->", self.data, m))

    def vec(self) -> np.ndarray:
        return self.data.reshape(-1, order="F")


@dataclass(frozen=True, eq=False)
class Liouvillian:
    """Superoperator acting on column-stacked density matrices.

    ``matrix`` is CSR of shape (d^2, d^2).  The Hamiltonian and collapse
    channels are kept so solvers can work matrix-free.
    """

    matrix: sp.csr_matrix
    hamiltonian: OperatorMatrix
    collapse: tuple[tuple[OperatorMatrix, float], ...]
    source_spec: SystemSpec | None = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def hilbert_dim(self) -> int:
        return self.hamiltonian.dim

    def apply(self, rho: np.ndarray) -> np.ndarray:
        d = self.hilbert_dim
        return (self.matrix @ rho.reshape(-1, order="F")).reshape(d, d, order="F")

    def frobenius_norm(self) -> float:
        return float(spla.norm(self.matrix, "fro"))

    def one_norm(self) -> float:
        return float(spla.norm(self.matrix, 1))

    def trace_residual(self) -> float:
        """Largest entry of vec(I)^T L; zero for a trace-preserving generator."""
        d = self.hilbert_dim
        left = np.zeros(d * d)
        left[np.arange(d) * (d + 1)] = 1.0
        return float(np.max(np.abs(self.matrix.T @ left)))

    def effective_hamiltonian(self) -> np.ndarray:
        """H - (i/2) sum_k r_k o_k^dag o_k as a dense array."""
        heff = self.hamiltonian.toarray()
        for op, rate in self.collapse:
            o = op.toarray()
            heff = heff - 0.5j * rate * (o.conj().T @ o)
        return heff


def build_liouvillian(H: OperatorMatrix, collapse: Sequence[tuple[OperatorMatrix, float]],
                      spec: SystemSpec | None = None) -> Liouvillian:
    d = H.dim
    for op, rate in collapse:
        if op.dim != d:
            raise DimensionMismatchError(f"collapse operator has dimension {op.dim}, H has {d}")
        if rate < 0:
            raise ValueError(f"collapse rate must be >= 0, got {rate}")
    eye = sp.identity(d, format="csr", dtype=complex)
    h = H.tocsr()
    # i[rho, H] = -i (H rho - rho H)
    L = -1j * (sp.kron(eye, h) - sp.kron(h.T, eye))
    for op, rate in collapse:
        if rate == 0:
            continue
        o = op.tocsr()
        odo = o.conj().T @ o
        L = L + (rate / 2.0) * (2.0 * sp.kron(o.conj(), o) - sp.kron(eye, odo) - sp.kron(odo.T, eye))
    return Liouvillian(sp.csr_matrix(L), H, tuple((op, float(r)) for op, r in collapse), spec)


def collapse_operators(spec: SystemSpec) -> list[tuple[OperatorMatrix, float]]:
    ops = [(cavity_annihilation(spec), spec.kappa)]
    for j, em in enumerate(spec.emitters):
        ops.append((emitter_lowering(spec, j), em.gamma_e))
    return ops


def system_liouvillian(spec: SystemSpec) -> Liouvillian:
    return build_liouvillian(build_hamiltonian(spec), collapse_operators(spec), spec)


# --- steady state -----------------------------------------------------------

def _balancing_scale(L: Liouvillian) -> np.ndarray:
    """Diagonal similarity D = s**N_exc that brings every excitation block of
    the weakly driven steady state to order one.

    ``s`` is the one-excitation linear-response amplitude, clipped to [1e-8, 1].
    Without a source spec no balancing is applied.
    """
    d = L.hilbert_dim
    spec = L.source_spec
    if spec is None or spec.drive_amplitude == 0 or spec.dim != d:
        return np.ones(d)
    nexc = excitation_numbers(spec)
    one = np.flatnonzero(nexc == 1)
    heff = L.effective_hamiltonian()[np.ix_(one, one)]
    # the drive feeds the one-excitation block only through |1, g..g>
    rhs = np.zeros(len(one), dtype=complex)
    rhs[np.flatnonzero(one == 2 ** spec.n_emitters)[0]] = -spec.drive_amplitude
    try:
        c = np.linalg.solve(heff, rhs)
        s = float(np.linalg.norm(c))
    except np.linalg.LinAlgError:
        s = 1.0
    if not np.isfinite(s):
        s = 1.0
    s = min(max(s, 1e-8), 1.0)
    return s ** nexc.astype(float)


def _scaled_problem(L: Liouvillian, D: np.ndarray):
    """Effective Hamiltonian and jump operators after rho = D rho_s D."""
    Di = 1.0 / D
    heff = Di[:, None] * L.effective_hamiltonian() * D[None, :]
    jumps = []
    for op, rate in L.collapse:
        if rate == 0:
            continue
        o = op.toarray()
        jumps.append((Di[:, None] * o * D[None, :], rate))
    return heff, jumps


def _scaled_matrix(heff, jumps, sparse: bool):
    d = heff.shape[0]
    if sparse:
        eye = sp.identity(d, format="csr", dtype=complex)
        h = sp.csr_matrix(heff)
        M = -1j * (sp.kron(eye, h) - sp.kron(h.conj(), eye))
        for o, rate in jumps:
            oc = sp.csr_matrix(o)
            M = M + rate * sp.kron(oc.conj(), oc)
        return sp.csr_matrix(M)
    eye = np.eye(d)
    M = -1j * (np.kron(eye, heff) - np.kron(heff.conj(), eye))
    for o, rate in jumps:
        M = M + rate * np.kron(o.conj(), o)
    return M


def _trace_row(D: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    d = len(D)
    return np.arange(d) * (d + 1), D ** 2


def _solve_dense(heff, jumps, D) -> np.ndarray:
    d = len(D)
    M = _scaled_matrix(heff, jumps, sparse=False)
    cols, vals = _trace_row(D)
    M[0, :] = 0.0
    M[0, cols] = vals
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    lu, piv = sla.lu_factor(M, check_finite=False)
    pivots = np.abs(np.diag(lu))
    if pivots.min() <= 1e-12 * pivots.max():
        raise MultiplicityError(
            f"trace-constrained Liouvillian is singular (pivot ratio {pivots.min() / pivots.max():.2e}); "
            "the stationary manifold is degenerate"
        )
    x = sla.lu_solve((lu, piv), rhs, check_finite=False)
    return x.reshape(d, d, order="F")


def _solve_sparse(heff, jumps, D) -> np.ndarray:
    d = len(D)
    M = _scaled_matrix(heff, jumps, sparse=True).tolil()
    cols, vals = _trace_row(D)
    M[0, :] = 0.0
    M[0, cols] = vals
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    try:
        lu = spla.splu(sp.csc_matrix(M), permc_spec="MMD_AT_PLUS_A")
    except RuntimeError as exc:
        raise MultiplicityError(f"trace-constrained Liouvillian is singular: {exc}") from exc
    x = lu.solve(rhs)
    return x.reshape(d, d, order="F")


class _SylvesterInverse:
    """Inverse of rho -> -i (Heff rho - rho Heff^dag) via one complex Schur
    decomposition of Heff (Bartels-Stewart with LAPACK ztrsyl)."""

    def __init__(self, heff: np.ndarray):
        self.T, self.U = sla.schur(heff, output="complex")
        self.Ud = self.U.conj().T
        lam = np.diag(self.T)
        # eigenvalues of the Sylvester operator are -i (lam_i - conj(lam_j))
        self.gap = float(np.min(-lam.imag)) if lam.size else 0.0
        self.scale = float(np.max(np.abs(lam))) if lam.size else 0.0

    @property
    def invertible(self) -> bool:
        return self.gap > 1e-12 * max(self.scale, 1.0)

    def __call__(self, X: np.ndarray) -> np.ndarray:
        C = self.Ud @ (1j * X) @ self.U
        Y, scale, info = ztrsyl(self.T, self.T, C, trana="N", tranb="C", isgn=-1)
        if info < 0:
            raise SolverError(f"ztrsyl failed with info={info}")
        return self.U @ (Y / scale) @ self.Ud


def _solve_krylov(heff, jumps, D, rtol=1e-14, restart=200, maxiter=50) -> np.ndarray:
    """GMRES on the trace-constrained system, right-preconditioned by the
    inverse of its no-jump (Sylvester) part."""
    d = len(D)
    sinv = _SylvesterInverse(heff)
    if not sinv.invertible:
        log.debug("effective Hamiltonian has an undamped mode; falling back to sparse LU")
        return _solve_sparse(heff, jumps, D)
    heff_dag = heff.conj().T
    weights = D ** 2

    def matvec(y):
        rho = sinv(y.reshape(d, d, order="F"))
        out = -1j * (heff @ rho - rho @ heff_dag)
        for o, rate in jumps:
            out = out + rate * (o @ rho @ o.conj().T)
        out = out.reshape(-1, order="F")
        out[0] = np.dot(weights, np.diag(rho))
        return out

    op = spla.LinearOperator((d * d, d * d), matvec=matvec, dtype=complex)
    rhs = np.zeros(d * d, dtype=complex)
    rhs[0] = 1.0
    y, info = spla.gmres(op, rhs, rtol=rtol, atol=0.0, restart=restart, maxiter=maxiter)
    residual = float(np.linalg.norm(op @ y - rhs))
    if info != 0 and residual > 1e-11:
        raise SolverError(f"GMRES did not converge (info={info}, residual={residual:.3e})", residual)
    return sinv(y.reshape(d, d, order="F"))


_METHODS = ("auto", "dense", "sparse", "krylov")


def steady_state(L: Liouvillian, method: str = "auto") -> DensityMatrix:
    """Unique stationary state of ``L`` with unit trace.

    One equation of ``L vec(rho) = 0`` is replaced by ``Tr rho = 1`` and the
    resulting linear system is solved after a diagonal balancing by
    excitation number.  ``method`` selects dense LU, sparse LU or
    preconditioned GMRES; ``auto`` uses dense LU for Hilbert dimensions up to
    ``DENSE_SOLVE_LIMIT`` and GMRES above.
    """
    if method not in _METHODS:
        raise ValueError(f"method must be one of {_METHODS}, got {method!r}")
    if not any(rate > 0 for _, rate in L.collapse):
        raise MultiplicityError("no dissipation: every eigenprojector of H is stationary")
    d = L.hilbert_dim
    D = _balancing_scale(L)
    heff, jumps = _scaled_problem(L, D)
    if method == "auto":
        method = "dense" if d <= DENSE_SOLVE_LIMIT else "krylov"
    solver = {"dense": _solve_dense, "sparse": _solve_sparse, "krylov": _solve_krylov}[method]
    rho_s = solver(heff, jumps, D)
    rho = D[:, None] * rho_s * D[None, :]

    residual = float(np.linalg.norm(L.matrix @ rho.reshape(-1, order="F"))) / L.frobenius_norm()
    if not np.isfinite(residual) or residual >= RESIDUAL_TOL:
        raise SolverError(f"steady-state residual {residual:.3e} exceeds {RESIDUAL_TOL}", residual)
    herm_dev = float(np.max(np.abs(rho - rho.conj().T)))
    if herm_dev >= HERMITICITY_TOL:
        raise PhysicalityError(f"steady state not Hermitian (max deviation {herm_dev:.3e})")
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho)


def solve_system(spec: SystemSpec, method: str = "auto") -> DensityMatrix:
    return steady_state(system_liouvillian(spec), method=method)


# --- time evolution ---------------------------------------------------------

def evolve(rho0: DensityMatrix, L: Liouvillian, t_final: float, dt: float,
           check_every: int = 100) -> DensityMatrix:
    """Classical RK4 integration of vec(rho)' = L vec(rho) up to ``t_final`` (1/eV).

    The step is shrunk so an integer number of steps lands on ``t_final``.
    ``||L||_1 * dt`` must stay below 0.1.
    """
    if rho0.dim != L.hilbert_dim:
        raise DimensionMismatchError(f"rho0 has dimension {rho0.dim}, L acts on {L.hilbert_dim}")
    if t_final < 0 or dt <= 0:
        raise ValueError("need t_final >= 0 and dt > 0")
    norm = L.one_norm()
    if norm * dt >= 0.1:
        raise StepSizeError(f"||L||*dt = {norm * dt:.3g} >= 0.1; reduce dt below {0.1 / norm:.3g}")
    steps = int(np.ceil(t_final / dt)) if t_final > 0 else 0
    h = t_final / steps if steps else 0.0
    M = L.matrix
    x = rho0.vec().copy()
    d = rho0.dim
    diag = np.arange(d) * (d + 1)
    tr0 = x[diag].sum()
    for k in range(steps):
        k1 = M @ x
        k2 = M @ (x + 0.5 * h * k1)
        k3 = M @ (x + 0.5 * h * k2)
        k4 = M @ (x + h * k3)
        x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if (k + 1) % check_every == 0 or k == steps - 1:
            drift = abs(x[diag].sum() - tr0)
            if drift > 1e-6:
                raise TraceDriftError(f"trace drifted by {drift:.3e} after {k + 1} steps", drift)
    rho = x.reshape(d, d, order="F")
    return DensityMatrix(0.5 * (rho + rho.conj().T))
