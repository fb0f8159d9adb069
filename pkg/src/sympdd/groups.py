"""Finite symplectic/unitary operation groups: exact enumeration and sampling.

The homogenization group <1_2 (x) O(n,Z), J> is stored structurally: a signed
permutation of the n modes plus a power of J in {0, 1}.  Since J^2 = -1 lies
in 1_2 (x) O(n,Z), this normal form covers the whole group, giving order
2 * 2^n * n!.  Matrices are materialized on demand and are exact integer
matrices with entries in {-1, 0, 1}.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .symplectic import DimensionError, symplectic_form

#: full enumeration limit for the homogenization group (2 * 2^6 * 6! = 92160)
N_MAX_ENUMERATION = 6

#: enumeration limit for the unitary decoupling set (4^3 * 3! = 384)
N_MAX_UNITARY = 3


class EnumerationTooLargeError(ValueError):
    """Requested full enumeration past the configured size limit."""


@dataclass(frozen=True)
class SignedPermutation:
    """Element of O(n, Z): x_i -> signs[i] * x_{perm[i]}."""

    perm: tuple
    signs: tuple

    def __post_init__(self):
        n = len(self.perm)
        if sorted(self.perm) != list(range(n)):
            raise ValueError(f"perm {self.perm} is not a permutation")
        if len(self.signs) != n or any(s not in (-1, 1) for s in self.signs):
            raise ValueError("signs must be +1/-1, one per index")

    @classmethod
    def identity(cls, n: int) -> "SignedPermutation":
        return cls(tuple(range(n)), (1,) * n)

    @property
    def n(self) -> int:
        return len(self.perm)

    def matrix(self) -> np.ndarray:
        M = np.zeros((self.n, self.n), dtype=np.int64)
        M[np.arange(self.n), list(self.perm)] = self.signs
        return M

    def compose(self, other: "SignedPermutation") -> "SignedPermutation":
        """Matrix product self @ other."""
        perm = tuple(other.perm[p] for p in self.perm)
        signs = tuple(s * other.signs[p] for s, p in zip(self.signs, self.perm))
        return SignedPermutation(perm, signs)

    def inverse(self) -> "SignedPermutation":
        inv = [0] * self.n
        sg = [1] * self.n
        for j, p in enumerate(self.perm):
            inv[p] = j
            sg[p] = self.signs[j]
        return SignedPermutation(tuple(inv), tuple(sg))

    def negate(self) -> "SignedPermutation":
        return SignedPermutation(self.perm, tuple(-s for s in self.signs))


@dataclass(frozen=True)
class GroupElement:
    """Homogenization-group element (1_2 (x) sp) @ J^j_power, block basis."""

    sp: SignedPermutation
    j_power: int

    def __post_init__(self):
        if self.j_power not in (0, 1):
            raise ValueError("j_power must be 0 or 1")

    @classmethod
    def identity(cls, n: int) -> "GroupElement":
        return cls(SignedPermutation.identity(n), 0)

    @property
    def n(self) -> int:
        return self.sp.n

    def action(self) -> tuple:
        """(q, s) arrays with matrix()[i, q[i]] = s[i]; everything else 0."""
        n = self.n
        perm = np.asarray(self.sp.perm, dtype=np.intp)
        signs = np.asarray(self.sp.signs, dtype=np.int64)
        q = np.concatenate([perm, perm + n])
        s = np.concatenate([signs, signs])
        if self.j_power:
            # right-multiply by J: J[i, i+n] = 1 (i < n), J[i+n, i] = -1
            qj = np.concatenate([np.arange(n) + n, np.arange(n)])
            sj = np.concatenate([np.ones(n, dtype=np.int64),
                                 -np.ones(n, dtype=np.int64)])
            s = s * sj[q]
            q = qj[q]
        return q, s

    def matrix(self) -> np.ndarray:
        q, s = self.action()
        M = np.zeros((2 * self.n, 2 * self.n), dtype=np.int64)
        M[np.arange(2 * self.n), q] = s
        return M

    def compose(self, other: "GroupElement") -> "GroupElement":
        """Matrix product self @ other (J commutes with 1_2 (x) O(n,Z))."""
        sp = self.sp.compose(other.sp)
        j = self.j_power + other.j_power
        if j == 2:           # J^2 = -1 absorbs into the signed permutation
            return GroupElement(sp.negate(), 0)
        return GroupElement(sp, j)

    def inverse(self) -> "GroupElement":
        inv = self.sp.inverse()
        if self.j_power:     # (O J)^-1 = J^-1 O^-1 = (-O^-1) J
            return GroupElement(inv.negate(), 1)
        return GroupElement(inv, 0)


def enumerate_homogenization_group(n: int) -> list:
    """All elements of <1_2 (x) O(n,Z), J>, identity first, duplicate-free."""
    if n < 1:
        raise DimensionError(f"need at least one mode, got n={n}")
    if n > N_MAX_ENUMERATION:
        raise EnumerationTooLargeError(
            f"group order 2*2^{n}*{n}! exceeds the enumeration limit "
            f"(n <= {N_MAX_ENUMERATION}); use sampling access instead")
    out = []
    for perm in itertools.permutations(range(n)):
        for signs in itertools.product((1, -1), repeat=n):
            for j in (0, 1):
                out.append(GroupElement(SignedPermutation(perm, signs), j))
    # identity-first cycle order, rest in enumeration order
    out.sort(key=lambda g: g != GroupElement.identity(n))
    return out


def sample_group_element(n: int, rng: np.random.Generator) -> GroupElement:
    """Uniform draw via the normal form: permutation, signs, J power."""
    if n < 1:
        raise DimensionError(f"need at least one mode, got n={n}")
    perm = tuple(int(i) for i in rng.permutation(n))
    signs = tuple(int(s) for s in rng.integers(0, 2, n) * 2 - 1)
    j = int(rng.integers(0, 2))
    return GroupElement(SignedPermutation(perm, signs), j)


def element_matrix(g: GroupElement, n: int) -> np.ndarray:
    """Exact integer realization of g in the 2n-dimensional block basis."""
    if g.n != n:
        raise DimensionError(f"element has {g.n} modes, expected {n}")
    return g.matrix()


def suppression_group(n_s: int, n_e: int) -> list:
    """The two system-only operations {1, -1_S (+) 1_E}, interleaved basis."""
    if n_s < 1:
        raise DimensionError(f"need at least one system mode, got {n_s}")
    if n_e < 0:
        raise DimensionError(f"environment mode count must be >= 0, got {n_e}")
    dim = 2 * (n_s + n_e)
    flip = np.ones(dim)
    flip[:2 * n_s] = -1.0
    return [np.eye(dim), np.diag(flip)]


def verify_closure(matrices: list) -> bool:
    """Exact closure under product and inverse for integer matrix groups."""
    keys = {m.tobytes() for m in matrices}
    for a in matrices:
        inv = np.rint(np.linalg.inv(a)).astype(a.dtype)
        if inv.tobytes() not in keys:
            return False
        for b in matrices:
            if (a @ b).tobytes() not in keys:
                return False
    return True


class HomogenizationGroup:
    """Sampling/enumeration/averaging access to <1_2 (x) O(n,Z), J>."""

    basis = "block"

    def __init__(self, n: int):
        if n < 1:
            raise DimensionError(f"need at least one mode, got n={n}")
        self.n = n
        self.dim = 2 * n
        self.order = 2 * (2 ** n) * math.factorial(n)

    @property
    def j_form(self) -> np.ndarray:
        return symplectic_form(self.n, self.basis)

    def elements(self) -> list:
        return enumerate_homogenization_group(self.n)

    def element_matrices(self) -> list:
        return [g.matrix().astype(float) for g in self.elements()]

    def sample(self, rng: np.random.Generator) -> GroupElement:
        return sample_group_element(self.n, rng)

    def sample_conjugators(self, rng: np.random.Generator, count: int) -> tuple:
        """Vectorized normal-form draws: (Q, S) index/sign arrays (count, 2n)."""
        n = self.n
        perms = rng.permuted(np.tile(np.arange(n), (count, 1)), axis=1)
        signs = rng.integers(0, 2, (count, n)) * 2 - 1
        js = rng.integers(0, 2, count).astype(bool)
        Q = np.concatenate([perms, perms + n], axis=1)
        S = np.concatenate([signs, signs], axis=1)
        qj = np.concatenate([np.arange(n) + n, np.arange(n)])
        sj = np.concatenate([np.ones(n, dtype=np.int64),
                             -np.ones(n, dtype=np.int64)])
        S[js] = S[js] * sj[Q[js]]
        Q[js] = qj[Q[js]]
        return Q, S

    def conjugated_stack(self, E: np.ndarray, batch: tuple) -> np.ndarray:
        """g E g^T for each sampled g; O(dim^2) fancy indexing per element."""
        Q, S = batch
        sign = S[:, :, None] * S[:, None, :]
        return E[Q[:, :, None], Q[:, None, :]] * sign

    def project(self, A: np.ndarray) -> np.ndarray:
        """Closed-form group average: (tr A / 2n) * identity."""
        return (np.trace(A) / self.dim) * np.eye(self.dim)


class SuppressionGroup:
    """System-only {1, -1_S (+) 1_E} acting on a partitioned interleaved model."""

    basis = "interleaved"
    order = 2

    def __init__(self, n_s: int, n_e: int):
        if n_s < 1:
            raise DimensionError(f"need at least one system mode, got {n_s}")
        if n_e < 0:
            raise DimensionError(f"environment mode count must be >= 0, got {n_e}")
        self.n_s = n_s
        self.n_e = n_e
        self.n = n_s + n_e
        self.dim = 2 * self.n

    @property
    def j_form(self) -> np.ndarray:
        return symplectic_form(self.n, self.basis)

    def elements(self) -> list:
        return suppression_group(self.n_s, self.n_e)

    def element_matrices(self) -> list:
        return self.elements()

    def sample_conjugators(self, rng: np.random.Generator, count: int) -> np.ndarray:
        bits = rng.integers(0, 2, count).astype(bool)
        D = np.ones((count, self.dim))
        D[bits, :2 * self.n_s] = -1.0
        return D

    def conjugated_stack(self, E: np.ndarray, batch: np.ndarray) -> np.ndarray:
        D = batch
        return E[None, :, :] * (D[:, :, None] * D[:, None, :])

    def project(self, A: np.ndarray) -> np.ndarray:
        """Zero the system-environment coupling blocks, keep the rest."""
        out = A.copy()
        ns2 = 2 * self.n_s
        out[:ns2, ns2:] = 0.0
        out[ns2:, :ns2] = 0.0
        return out


class TrivialGroup:
    """G = {1}; decoupling schemes reduce to the plain evolution."""

    order = 1

    def __init__(self, n: int, basis: str = "block"):
        self.n = n
        self.dim = 2 * n
        self.basis = basis

    @property
    def j_form(self) -> np.ndarray:
        return symplectic_form(self.n, self.basis)

    def elements(self) -> list:
        return [GroupElement.identity(self.n)]

    def element_matrices(self) -> list:
        return [np.eye(self.dim)]

    def sample_conjugators(self, rng: np.random.Generator, count: int) -> int:
        return count

    def conjugated_stack(self, E: np.ndarray, batch: int) -> np.ndarray:
        return np.broadcast_to(E, (batch,) + E.shape).copy()

    def project(self, A: np.ndarray) -> np.ndarray:
        return A.copy()


@dataclass(frozen=True)
class UnitaryDecouplingElement:
    """Element of U(n, {0, +/-1, +/-i}): x_i -> i^phases[i] * x_{perm[i]}."""

    perm: tuple
    phases: tuple  # Z_4 exponents

    def __post_init__(self):
        n = len(self.perm)
        if sorted(self.perm) != list(range(n)):
            raise ValueError(f"perm {self.perm} is not a permutation")
        if len(self.phases) != n or any(p not in (0, 1, 2, 3) for p in self.phases):
            raise ValueError("phases must be Z_4 exponents")

    def matrix(self) -> np.ndarray:
        n = len(self.perm)
        M = np.zeros((n, n), dtype=complex)
        M[np.arange(n), list(self.perm)] = 1j ** np.asarray(self.phases)
        return M


def enumerate_unitary_decoupling_set(n: int) -> list:
    """Full group U(n, {0, 1, -1, +i, -i}); order 4^n * n!."""
    if n < 1:
        raise DimensionError(f"need at least one mode, got n={n}")
    if n > N_MAX_UNITARY:
        raise EnumerationTooLargeError(
            f"group order 4^{n}*{n}! exceeds the enumeration limit "
            f"(n <= {N_MAX_UNITARY})")
    out = []
    for perm in itertools.permutations(range(n)):
        for phases in itertools.product(range(4), repeat=n):
            out.append(UnitaryDecouplingElement(perm, phases))
    return out
