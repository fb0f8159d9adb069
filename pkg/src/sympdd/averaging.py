"""Twirling maps: full homogenization average, unitary decoupling average,
and the system-only average for partitioned system-environment models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .groups import (EnumerationTooLargeError, GroupElement,
                     enumerate_homogenization_group,
                     enumerate_unitary_decoupling_set)
from .symplectic import (DimensionError, _symmetrize, convert_matrix, hs_norm_sq,
                         max_abs, symplectic_form)


@dataclass(frozen=True)
class PartitionedModel:
    """System (n_s modes) + environment (n_e modes), interleaved basis.

    The full coefficient matrix A splits into the system block A_S
    (top-left, 2 n_s wide), the environment block A_E (bottom-right) and the
    coupling block I (top-right).  `k` is the realized max |entry| of I,
    recomputed at construction.
    """

    n_s: int
    n_e: int
    A: np.ndarray

    def __post_init__(self):
        if self.n_s < 1:
            raise DimensionError(f"need at least one system mode, got {self.n_s}")
        if self.n_e < 0:
            raise DimensionError(f"environment mode count must be >= 0, got {self.n_e}")
        A = _symmetrize(self.A, "A")
        dim = 2 * (self.n_s + self.n_e)
        if A.shape != (dim, dim):
            raise DimensionError(f"A must be {dim} x {dim}, got {A.shape}")
        object.__setattr__(self, "A", A)

    @property
    def n(self) -> int:
        return self.n_s + self.n_e

    @property
    def basis(self) -> str:
        return "interleaved"

    @property
    def j(self) -> np.ndarray:
        return symplectic_form(self.n, "interleaved")

    @property
    def a_s(self) -> np.ndarray:
        return self.A[:2 * self.n_s, :2 * self.n_s]

    @property
    def a_e(self) -> np.ndarray:
        return self.A[2 * self.n_s:, 2 * self.n_s:]

    @property
    def coupling(self) -> np.ndarray:
        return self.A[:2 * self.n_s, 2 * self.n_s:]

    @property
    def k(self) -> float:
        return max_abs(self.coupling)


def _check_symmetric(A: np.ndarray) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] % 2:
        raise DimensionError(f"expected a 2n x 2n matrix, got shape {A.shape}")
    if max_abs(A - A.T) > 1e-12 * max(1.0, max_abs(A)):
        raise ValueError("input matrix must be symmetric")
    return (A + A.T) / 2.0


def pi_map(A: np.ndarray, group=None, n: int | None = None) -> np.ndarray:
    """Homogenization average (1/|G|) sum_g g A g^T.

    With `group` (a list of GroupElements or matrices) the average is taken
    by explicit enumeration; otherwise the closed form (tr A / 2n) * identity
    is returned, which is what the enumeration yields for the full group.
    """
    A = _check_symmetric(A)
    dim = A.shape[0]
    if group is None:
        if n is None:
            n = dim // 2
        if 2 * n != dim:
            raise DimensionError(f"A has dimension {dim}, expected {2 * n}")
        return (np.trace(A) / dim) * np.eye(dim)
    mats = [g.matrix().astype(float) if isinstance(g, GroupElement) else np.asarray(g, dtype=float)
            for g in group]
    stack = np.stack(mats)
    return np.einsum("gij,jk,glk->il", stack, A, stack) / len(mats)


def pi0_map(x: np.ndarray, V=None, n: int | None = None) -> np.ndarray:
    """Unitary decoupling average (1/|V|) sum_v v^dagger x v = (tr x / n) * 1."""
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {x.shape}")
    if V is None:
        V = enumerate_unitary_decoupling_set(n if n is not None else x.shape[0])
    mats = [v.matrix() if hasattr(v, "matrix") else np.asarray(v, dtype=complex)
            for v in V]
    stack = np.stack(mats)
    return np.einsum("gji,jk,gkl->il", stack.conj(), x, stack) / len(mats)


def tilde_pi(pm: PartitionedModel, system_group=None) -> np.ndarray:
    """System-only twirl of a partitioned model.

    Default group {1, -1_S (+) 1_E}: returns A_S (+) A_E exactly (coupling
    blocks zeroed, diagonal blocks bit-identical).  A general system group
    (matrices acting on the 2 n_s system coordinates, interleaved basis)
    averages the system and coupling blocks per block.
    """
    ns2 = 2 * pm.n_s
    if system_group is None:
        out = pm.A.copy()
        out[:ns2, ns2:] = 0.0
        out[ns2:, :ns2] = 0.0
        return out
    mats = [g.matrix().astype(float) if isinstance(g, GroupElement) else np.asarray(g, dtype=float)
            for g in system_group]
    stack = np.stack(mats)
    out = pm.A.copy()
    out[:ns2, :ns2] = np.einsum("gij,jk,glk->il", stack, pm.a_s, stack) / len(mats)
    avg_i = np.einsum("gij,jk->ik", stack, pm.coupling) / len(mats)
    out[:ns2, ns2:] = avg_i
    out[ns2:, :ns2] = avg_i.T
    return out


def homogenization_system_group(n_s: int) -> list:
    """Full homogenization group on the system modes, interleaved basis."""
    out = []
    for g in enumerate_homogenization_group(n_s):
        out.append(convert_matrix(g.matrix().astype(float), "interleaved"))
    return out


def tentative_condition_defect(A: np.ndarray, group=None, n: int | None = None) -> float:
    """min over lambda of || Pi(A) - lambda J ||_2 for positive definite A.

    The group average of a positive matrix is positive, while lambda J is
    antisymmetric, so the defect is strictly positive: the strict decoupling
    condition has no solution in the symplectic picture.
    """
    A = _check_symmetric(A)
    try:
        np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        raise ValueError("A must be positive definite") from None
    P = pi_map(A, group=group, n=n)
    J = symplectic_form(P.shape[0] // 2, "block")
    # ||P - lam J||_F^2 is quadratic in lam; optimum at <P, J>_F / ||J||_F^2
    lam = float(np.sum(P * J) / np.sum(J * J))
    return float(np.sqrt(hs_norm_sq(P - lam * J)))
