"""Dense real-matrix kernel: symplectic form, matrix exponential, norms.

Everything downstream works with 2n x 2n real matrices.  Two coordinate
orderings are supported: ``block`` (x_1..x_n, p_1..p_n) and ``interleaved``
(x_1, p_1, ..., x_n, p_n); the symplectic form J differs accordingly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

BASES = ("block", "interleaved")


class DimensionError(ValueError):
    """Invalid mode count or matrix shape."""


class BasisMismatchError(ValueError):
    """Operands tagged with different coordinate orderings."""


def symplectic_form(n: int, basis: str = "block") -> np.ndarray:
    """Return the symplectic form J for n modes.

    block:       [[0, 1_n], [-1_n, 0]]
    interleaved: direct sum of n copies of [[0, 1], [-1, 0]]

    Entries are exactly 0/+1/-1, so J @ J == -identity holds without
    rounding error.
    """
    if n < 1:
        raise DimensionError(f"need at least one mode, got n={n}")
    if basis not in BASES:
        raise ValueError(f"unknown basis {basis!r}")
    J = np.zeros((2 * n, 2 * n))
    if basis == "block":
        J[:n, n:] = np.eye(n)
        J[n:, :n] = -np.eye(n)
    else:
        for j in range(n):
            J[2 * j, 2 * j + 1] = 1.0
            J[2 * j + 1, 2 * j] = -1.0
    return J


def basis_conversion(n: int) -> np.ndarray:
    """Permutation p mapping block to interleaved coordinate order.

    v_interleaved = v_block[p]; for matrices M_int = M_block[np.ix_(p, p)].
    Conjugating the block J with the permutation matrix of p yields the
    interleaved J.
    """
    if n < 1:
        raise DimensionError(f"need at least one mode, got n={n}")
    p = np.empty(2 * n, dtype=np.intp)
    p[0::2] = np.arange(n)
    p[1::2] = np.arange(n) + n
    return p


def basis_permutation_matrix(n: int) -> np.ndarray:
    """Matrix P with P @ v_block = v_interleaved and P J_block P^T = J_int."""
    p = basis_conversion(n)
    P = np.zeros((2 * n, 2 * n))
    P[np.arange(2 * n), p] = 1.0
    return P


def convert_matrix(M: np.ndarray, to: str) -> np.ndarray:
    """Re-order a 2n x 2n matrix between the two bases."""
    n = M.shape[0] // 2
    p = basis_conversion(n)
    if to == "interleaved":
        return M[np.ix_(p, p)]
    if to == "block":
        inv = np.argsort(p)
        return M[np.ix_(inv, inv)]
    raise ValueError(f"unknown basis {to!r}")


# Pade order-13 coefficients and the 1-norm threshold above which
# scaling-and-squaring kicks in.
_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152


def expm_real(M: np.ndarray) -> np.ndarray:
    """e^M for a real square matrix, Pade-13 with scaling and squaring."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix contains non-finite entries")
    norm1 = np.abs(M).sum(axis=0).max() if M.size else 0.0
    s = 0
    if norm1 > _THETA13:
        s = max(0, int(math.ceil(math.log2(norm1 / _THETA13))))
        M = M / (2.0 ** s)
    b = _PADE13
    dim = M.shape[0]
    ident = np.eye(dim)
    M2 = M @ M
    M4 = M2 @ M2
    M6 = M2 @ M4
    U = M @ (M6 @ (b[13] * M6 + b[11] * M4 + b[9] * M2)
             + b[7] * M6 + b[5] * M4 + b[3] * M2 + b[1] * ident)
    V = (M6 @ (b[12] * M6 + b[10] * M4 + b[8] * M2)
         + b[6] * M6 + b[4] * M4 + b[2] * M2 + b[0] * ident)
    F = np.linalg.solve(V - U, V + U)
    for _ in range(s):
        F = F @ F
    return F


def hs_norm_sq(M: np.ndarray) -> float:
    """Squared Hilbert-Schmidt (Frobenius) norm, sum of squared entries."""
    M = np.asarray(M, dtype=float)
    return float(np.sum(M * M))


def op_norm(M: np.ndarray) -> float:
    """Largest singular value."""
    return float(np.linalg.norm(np.asarray(M, dtype=float), 2))


def max_abs(M: np.ndarray) -> float:
    return float(np.max(np.abs(M))) if np.asarray(M).size else 0.0


def symplectic_tolerance(S: np.ndarray) -> float:
    """Conditioning-aware tolerance for the S J S^T = J check."""
    return 1e-9 * max(1.0, op_norm(S) ** 2)


def symplectic_defect(S: np.ndarray, J: np.ndarray) -> float:
    """max-entry violation of S J S^T = J."""
    return max_abs(S @ J @ S.T - J)


def _symmetrize(A: np.ndarray, what: str) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f"{what} must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{what} contains non-finite entries")
    asym = max_abs(A - A.T)
    if asym > 1e-12:
        raise ValueError(f"{what} is not symmetric (max |A - A^T| = {asym:.3e})")
    out = (A + A.T) / 2.0
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class QuadraticModel:
    """n-mode system with Hamiltonian coefficient matrix A (2n x 2n, symmetric).

    Entries of A are angular frequencies (hbar = 1).  A is symmetrized at
    construction; asymmetry above 1e-12 is rejected.
    """

    n: int
    A: np.ndarray
    basis: str = "block"

    def __post_init__(self):
        if self.n < 1:
            raise DimensionError(f"need at least one mode, got n={self.n}")
        if self.basis not in BASES:
            raise ValueError(f"unknown basis {self.basis!r}")
        A = _symmetrize(self.A, "A")
        if A.shape != (2 * self.n, 2 * self.n):
            raise DimensionError(
                f"A must be {2 * self.n} x {2 * self.n}, got {A.shape}")
        object.__setattr__(self, "A", A)

    @property
    def j(self) -> np.ndarray:
        return symplectic_form(self.n, self.basis)

    def to_basis(self, basis: str) -> "QuadraticModel":
        if basis == self.basis:
            return self
        return QuadraticModel(self.n, convert_matrix(self.A, basis), basis)


@dataclass(frozen=True)
class SymplecticMatrix:
    """2n x 2n real matrix with S J S^T = J within tolerance."""

    matrix: np.ndarray
    n: int
    basis: str = "block"
    defect: float = field(default=0.0, compare=False)

    @classmethod
    def checked(cls, matrix: np.ndarray, n: int, basis: str = "block") -> "SymplecticMatrix":
        matrix = np.asarray(matrix, dtype=float)
        J = symplectic_form(n, basis)
        d = symplectic_defect(matrix, J)
        tol = symplectic_tolerance(matrix)
        if d > tol:
            raise ValueError(
                f"matrix is not symplectic: defect {d:.3e} > tol {tol:.3e}")
        matrix.setflags(write=False)
        return cls(matrix, n, basis, d)


def evolve(model: QuadraticModel, t: float) -> SymplecticMatrix:
    """S(t) = e^{-t A J}, the phase-space image of the Gaussian evolution."""
    if not np.isfinite(t):
        raise ValueError("time must be finite")
    S = expm_real(-t * model.A @ model.j)
    return SymplecticMatrix.checked(S, model.n, model.basis)
