"""Dense linear algebra for one- and two-qubit states and operators.

Single-qubit basis order is ``(|+>, |->)`` with ``sigma_z |+> = +|+>``, so
``|+>`` is the excited level of ``H = (w/2) sigma_z``. Two-qubit operators use
the product basis ``(|++>, |+->, |-+>, |-->)``: index 0 is both qubits
excited, index 3 is the ground state. The X-state matrix elements of the
closed-form solutions (``lambda_11 ... lambda_44``) are laid out in exactly
this order.

Energies are angular frequencies in s^-1 (hbar = 1).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
POSITIVITY_TOL = 1e-10

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |-><+|
SIGMA_PLUS = SIGMA_MINUS.T.copy()
IDENTITY_2 = np.eye(2, dtype=complex)

BASIS_LABELS = ("++", "+-", "-+", "--")


def _as_square(m, allowed=(2, 4)) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] not in allowed:
        raise DomainError(f"matrix dimension must be one of {allowed}, got {a.shape[0]}")
    if not np.all(np.isfinite(a)):
        raise DomainError("matrix contains NaN or Inf entries")
    return a


def hermitian_residual(m: np.ndarray) -> float:
    """Largest entry of ``|m - m^dagger|``."""
    m = np.asarray(m)
    return float(np.max(np.abs(m - m.conj().T)))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class SpectralDecomposition:
    """Eigenvalues and column eigenvectors: ``m = V diag(values) V^dagger``."""

    values: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.conj().T


def eigen_hermitian(m, descending: bool = False, tol: float = 1e-10) -> SpectralDecomposition:
    """Spectral decomposition of a Hermitian matrix.

    The Hermiticity check is relative to the largest entry so that
    Hamiltonians in s^-1 (entries ~1e12) are accepted on the same footing as
    density matrices. Ties are kept in the solver's (stable) order.
    """
    a = _as_square(m)
    scale = max(1.0, float(np.max(np.abs(a))))
    asym = hermitian_residual(a)
    if asym > tol * scale:
        raise ValidationError(f"matrix is not Hermitian: max |m - m^dagger| = {asym:.3e}")
    a = 0.5 * (a + a.conj().T)
    values, vectors = np.linalg.eigh(a)
    if descending:
        order = np.argsort(-values, kind="stable")
        values, vectors = values[order], vectors[:, order]
    values = np.array(values, dtype=float)
    values.setflags(write=False)
    return SpectralDecomposition(values, _frozen(vectors))


class DensityMatrix:
    """Immutable validated density matrix of dimension 2 or 4.

    Construction checks Hermiticity, unit trace and positivity. Pass
    ``validate=False`` only for intermediate objects that are known to be
    valid by construction.
    """

    __slots__ = ("_m",)

    def __init__(self, matrix, validate: bool = True):
        a = _as_square(matrix)
        if validate:
            check_density(a)
        object.__setattr__(self, "_m", _frozen(a))

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def dim(self) -> int:
        return self._m.shape[0]

    def spectrum(self) -> SpectralDecomposition:
        """Eigen-decomposition with populations sorted descending."""
        return eigen_hermitian(self._m, descending=True)

    def eigenvalues(self) -> np.ndarray:
        return self.spectrum().values

    def purity(self) -> float:
        return float(np.real(np.trace(self._m @ self._m)))

    def __array__(self, dtype=None, copy=None):
        return np.array(self._m, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return np.array_equal(self._m, other._m)

    def __hash__(self):
        return hash(self._m.tobytes())

    def __repr__(self):
        return f"DensityMatrix(dim={self.dim})"


def check_density(
    m,
    herm_tol: float = HERMITIAN_TOL,
    trace_tol: float = TRACE_TOL,
    pos_tol: float = POSITIVITY_TOL,
) -> None:
    """Raise ``ValidationError`` unless ``m`` is a valid density matrix."""
    asym = hermitian_residual(m)
    if asym > herm_tol:
        raise ValidationError(f"density matrix not Hermitian (residual {asym:.3e})")
    tr = np.trace(m)
    if abs(tr - 1.0) > trace_tol:
        raise ValidationError(f"density matrix trace {tr.real:.15g} differs from 1")
    lo = float(np.min(np.linalg.eigvalsh(0.5 * (m + np.conj(m).T))))
    if lo < -pos_tol:
        raise ValidationError(f"density matrix has negative eigenvalue {lo:.3e}")


def density_diagnostics(rho) -> dict:
    """Hermiticity residual, trace error and smallest eigenvalue."""
    m = np.asarray(rho.matrix if isinstance(rho, DensityMatrix) else rho)
    return {
        "hermitian_residual": hermitian_residual(m),
        "trace_error": float(abs(np.trace(m) - 1.0)),
        "min_eigenvalue": float(np.min(np.linalg.eigvalsh(0.5 * (m + m.conj().T)))),
    }


@dataclass(frozen=True)
class HamiltonianOperator:
    """Hermitian operator with its ascending spectrum."""

    matrix: np.ndarray
    energies: np.ndarray = field(repr=False)
    vectors: np.ndarray = field(repr=False)

    @classmethod
    def from_matrix(cls, m) -> "HamiltonianOperator":
        a = _as_square(m)
        spec = eigen_hermitian(a)
        return cls(_frozen(0.5 * (a + a.conj().T)), spec.values, spec.vectors)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __eq__(self, other):
        if not isinstance(other, HamiltonianOperator):
            return NotImplemented
        return np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash(self.matrix.tobytes())


def system_hamiltonian(omega_a: float, omega_b: float) -> HamiltonianOperator:
    """``(w_A/2) sz x I + (w_B/2) I x sz`` for the two-qubit pair.

    Diagonal in the product basis with entries
    ``((wA+wB)/2, (wA-wB)/2, (wB-wA)/2, -(wA+wB)/2)``.
    """
    if omega_a <= 0 or omega_b <= 0:
        raise DomainError(f"qubit frequencies must be positive (got {omega_a}, {omega_b})")
    if not omega_a > omega_b:
        warnings.warn(
            f"omega_a={omega_a:g} <= omega_b={omega_b:g}; results assume omega_a > omega_b",
            stacklevel=2,
        )
    h = 0.5 * omega_a * np.kron(SIGMA_Z, IDENTITY_2) + 0.5 * omega_b * np.kron(IDENTITY_2, SIGMA_Z)
    return HamiltonianOperator.from_matrix(h)


def qubit_hamiltonian(omega: float) -> HamiltonianOperator:
    """``(w/2) sigma_z`` for a single qubit."""
    if omega <= 0:
        raise DomainError(f"qubit frequency must be positive (got {omega})")
    return HamiltonianOperator.from_matrix(0.5 * omega * SIGMA_Z)


def projector(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).reshape(-1)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def basis_state(label: str) -> DensityMatrix:
    """Pure product state from a label such as ``"+-"`` or ``"-"``."""
    vec = np.array([1.0], dtype=complex)
    for ch in label:
        if ch == "+":
            vec = np.kron(vec, [1, 0])
        elif ch == "-":
            vec = np.kron(vec, [0, 1])
        else:
            raise DomainError(f"basis label must use '+' and '-' only, got {label!r}")
    if len(label) not in (1, 2):
        raise DomainError("basis labels describe one or two qubits")
    return DensityMatrix(projector(vec))


def singlet_state() -> DensityMatrix:
    """``|psi><psi|`` with ``|psi> = (|+-> - |-+>)/sqrt(2)``."""
    psi = np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2)
    m = np.outer(psi, psi.conj())
    # exact halves, no rounding from sqrt(2)**2
    m = np.round(m.real * 2) / 2
    return DensityMatrix(m)


def maximally_mixed(dim: int) -> DensityMatrix:
    return DensityMatrix(np.eye(dim) / dim)


def tensor(a, b) -> np.ndarray:
    """Kronecker product of two operators (arrays or DensityMatrix)."""
    return np.kron(np.asarray(a), np.asarray(b))


def product_state(rho_a: DensityMatrix, rho_b: DensityMatrix) -> DensityMatrix:
    if rho_a.dim != 2 or rho_b.dim != 2:
        raise DomainError("product_state expects two single-qubit states")
    return DensityMatrix(np.kron(rho_a.matrix, rho_b.matrix))


def partial_trace_operator(m, keep: str) -> np.ndarray:
    """Partial trace of any 4x4 operator, keeping qubit ``"A"`` or ``"B"``."""
    a = _as_square(m, allowed=(4,))
    t = a.reshape(2, 2, 2, 2)  # (a, b, a', b')
    if keep == "A":
        return np.einsum("ijkj->ik", t)
    if keep == "B":
        return np.einsum("ijil->jl", t)
    raise DomainError(f"keep must be 'A' or 'B', got {keep!r}")


def partial_trace(rho: DensityMatrix, keep: str) -> DensityMatrix:
    """Reduced state of qubit ``keep`` from a two-qubit density matrix."""
    if rho.dim != 4:
        raise DomainError(f"partial_trace needs a two-qubit state, got dim {rho.dim}")
    return DensityMatrix(partial_trace_operator(rho.matrix, keep))


def swap_qubits(m) -> np.ndarray:
    """Exchange the two tensor factors of a 4x4 operator."""
    a = _as_square(m, allowed=(4,))
    return a.reshape(2, 2, 2, 2).transpose(1, 0, 3, 2).reshape(4, 4)


_SYSY = np.kron(SIGMA_Y, SIGMA_Y)


def concurrence(rho: DensityMatrix) -> float:
    """Wootters concurrence of a two-qubit state.

    Uses the Hermitian form ``sqrt(rho) rho~ sqrt(rho)``, whose eigenvalues
    coincide with those of ``rho rho~`` but are computed stably.
    """
    if rho.dim != 4:
        raise DomainError("concurrence is defined for two-qubit states")
    m = rho.matrix
    w, v = np.linalg.eigh(m)
    sqrt_m = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    flipped = _SYSY @ m.conj() @ _SYSY
    r = sqrt_m @ flipped @ sqrt_m
    lam = np.sqrt(np.clip(np.linalg.eigvalsh(0.5 * (r + r.conj().T)), 0.0, None))[::-1]
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def is_x_state(m, tol: float = 1e-14) -> bool:
    """True when only the diagonal and anti-diagonal of a 4x4 matrix are nonzero."""
    a = np.asarray(m)
    if a.shape != (4, 4):
        return False
    mask = np.eye(4, dtype=bool) | np.fliplr(np.eye(4, dtype=bool))
    return bool(np.all(np.abs(a[~mask]) <= tol))
