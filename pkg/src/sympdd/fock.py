"""Independent cross-check in truncated Fock space.

Builds quadrature operators from truncated ladder operators, exponentiates
the quadratic Hamiltonian exactly (Hermitian eigendecomposition) and compares
the Heisenberg action on the quadratures against the phase-space evolution
S(t).  The correspondence is U(t)^dag R_j U(t) = sum_k S(t)_{kj} R_k on the
low-lying subspace; truncation noise lives at the Fock-space boundary, so
defects are measured behind a projector onto occupations below d/2.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .symplectic import DimensionError, QuadraticModel, evolve

#: largest total Hilbert-space dimension the oracle will build
MAX_HILBERT_DIM = 4096


class SizeError(ValueError):
    """Requested truncated Hilbert space too large."""


@dataclass(frozen=True)
class TruncatedMode:
    """Quadrature matrices of `modes` bosonic modes at Fock cutoff d each."""

    modes: int
    cutoff: int
    xs: tuple
    ps: tuple
    occupations: np.ndarray  # per-mode occupation of each basis state

    @property
    def dim(self) -> int:
        return self.cutoff ** self.modes

    def quadratures(self, basis: str = "block") -> list:
        if basis == "block":
            return list(self.xs) + list(self.ps)
        out = []
        for x, p in zip(self.xs, self.ps):
            out.extend([x, p])
        return out

    def projector(self, max_occupation: int) -> np.ndarray:
        """Diagonal projector onto states with every occupation < threshold."""
        keep = np.all(self.occupations < max_occupation, axis=1)
        return np.diag(keep.astype(float)).astype(complex)

    def commutator_defect(self, max_occupation: int) -> float:
        """max_ij || P ([x_i, p_j] - i delta_ij) P ||_inf on kept states."""
        P = self.projector(max_occupation)
        worst = 0.0
        for i, x in enumerate(self.xs):
            for j, p in enumerate(self.ps):
                comm = x @ p - p @ x
                if i == j:
                    comm = comm - 1j * np.eye(self.dim)
                worst = max(worst, float(np.linalg.norm(P @ comm @ P, 2)))
        return worst


def _ladder(d: int) -> np.ndarray:
    a = np.zeros((d, d), dtype=complex)
    a[np.arange(d - 1), np.arange(1, d)] = np.sqrt(np.arange(1, d))
    return a


def _embed(op: np.ndarray, mode: int, modes: int, d: int) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for m in range(modes):
        out = np.kron(out, op if m == mode else np.eye(d, dtype=complex))
    return out


def build_quadratures(modes: int, d: int) -> TruncatedMode:
    """x = (a + a^dag)/sqrt(2), p = i (a^dag - a)/sqrt(2), per mode."""
    if modes < 1 or modes > 2:
        raise DimensionError(f"oracle supports 1 or 2 modes, got {modes}")
    if d < 4:
        raise ValueError(f"cutoff must be >= 4, got {d}")
    if d ** modes > MAX_HILBERT_DIM:
        raise SizeError(f"Hilbert dimension {d ** modes} > {MAX_HILBERT_DIM}")
    a = _ladder(d)
    x1 = (a + a.conj().T) / np.sqrt(2.0)
    p1 = 1j * (a.conj().T - a) / np.sqrt(2.0)
    xs = tuple(_embed(x1, m, modes, d) for m in range(modes))
    ps = tuple(_embed(p1, m, modes, d) for m in range(modes))
    occ = np.array(list(itertools.product(range(d), repeat=modes)), dtype=int)
    return TruncatedMode(modes, d, xs, ps, occ)


def hamiltonian(model: QuadraticModel, mode: TruncatedMode) -> np.ndarray:
    """H = (1/2) sum_ij A_ij R_i R_j in the truncated space."""
    R = mode.quadratures(model.basis)
    dim = mode.dim
    H = np.zeros((dim, dim), dtype=complex)
    A = model.A
    for i in range(len(R)):
        for j in range(len(R)):
            if A[i, j] != 0.0:
                H += 0.5 * A[i, j] * (R[i] @ R[j])
    return H


def unitary(model: QuadraticModel, mode: TruncatedMode, t: float) -> np.ndarray:
    """U(t) = e^{-i H t} through a Hermitian eigendecomposition."""
    H = hamiltonian(model, mode)
    w, v = np.linalg.eigh(H)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def heisenberg_check(model: QuadraticModel, t: float, d: int) -> float:
    """Cross-picture defect between Fock-space and phase-space evolution.

    Returns max_j || P (U^dag R_j U - sum_k S(t)_{kj} R_k) P ||_inf with P
    projecting onto per-mode occupations below d/2.  Decreases with d as long
    as leakage stays inside the discarded boundary shell.
    """
    mode = build_quadratures(model.n, d)
    U = unitary(model, mode, t)
    R = mode.quadratures(model.basis)
    S = evolve(model, t).matrix
    P = mode.projector(d // 2)
    worst = 0.0
    for j in range(len(R)):
        lhs = U.conj().T @ R[j] @ U
        rhs = sum(S[k, j] * R[k] for k in range(len(R)))
        worst = max(worst, float(np.linalg.norm(P @ (lhs - rhs) @ P, 2)))
    return worst


def vitali_model(g: float) -> QuadraticModel:
    """Two-mode exchange coupling g (a b^dag + a^dag b) = g (x_a x_b + p_a p_b)."""
    A = np.zeros((4, 4))
    A[0, 1] = A[1, 0] = g   # x_a x_b
    A[2, 3] = A[3, 2] = g   # p_a p_b
    return QuadraticModel(2, A, basis="block")
