"""Evolution schemes: ideal target, deterministic decoupling cycles with
Trotter repetition, and the seeded random decoupling walk.

Products follow the physical time-ordering convention: the earliest factor
sits rightmost, so S = C_l @ ... @ C_1 for steps 1..l.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .averaging import PartitionedModel
from .groups import GroupElement
from .symplectic import QuadraticModel, SymplecticMatrix, expm_real

SCHEMES = ("random", "deterministic_cycle", "eulerian")


@dataclass(frozen=True)
class TrajectoryConfig:
    """Seeded parameters of one decoupling trajectory: t = steps * tau."""

    tau: float
    steps: int
    seed: int
    scheme: str = "random"

    def __post_init__(self):
        if not (self.tau > 0 and np.isfinite(self.tau)):
            raise ValueError(f"tau must be positive and finite, got {self.tau}")
        if self.steps < 1:
            raise ValueError(f"steps must be >= 1, got {self.steps}")
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")

    @property
    def total_time(self) -> float:
        return self.steps * self.tau


def coefficient_matrix(model) -> np.ndarray:
    """Accept a QuadraticModel, PartitionedModel or plain symmetric array."""
    if isinstance(model, (QuadraticModel, PartitionedModel)):
        return model.A
    return np.asarray(model, dtype=float)


def trial_seed_sequence(master_seed: int, index: int) -> np.random.SeedSequence:
    """Documented seed-splitting rule: trial i uses SeedSequence((master, i))."""
    return np.random.SeedSequence((int(master_seed), int(index)))


# e^{-tau A J} cache; trajectories at many seeds share one core exponential
_CORE_CACHE: dict = {}
_CORE_CACHE_MAX = 64


def core_exponential(A: np.ndarray, tau: float, J: np.ndarray) -> np.ndarray:
    key = (A.tobytes(), float(tau), J.tobytes())
    hit = _CORE_CACHE.get(key)
    if hit is None:
        hit = expm_real(-tau * A @ J)
        if len(_CORE_CACHE) >= _CORE_CACHE_MAX:
            _CORE_CACHE.clear()
        _CORE_CACHE[key] = hit
    return hit


def target_evolution(model, group, t: float) -> SymplecticMatrix:
    """Idealized evolution S_0(t) = e^{-t P(A) J} under the group's average."""
    A = coefficient_matrix(model)
    P = group.project(A)
    S = expm_real(-t * P @ group.j_form)
    return SymplecticMatrix.checked(S, group.dim // 2, group.basis)


def _ordered_product(stack: np.ndarray) -> np.ndarray:
    """Product stack[m-1] @ ... @ stack[0] by fixed pairwise-tree reduction."""
    while stack.shape[0] > 1:
        if stack.shape[0] % 2:
            head = stack[-1]
            paired = np.matmul(stack[1:-1:2], stack[0:-1:2])
            stack = np.concatenate([paired, head[None]], axis=0)
        else:
            stack = np.matmul(stack[1::2], stack[0::2])
    return stack[0]


def _elements_of(group_or_elements) -> list:
    if isinstance(group_or_elements, (list, tuple)):
        return list(group_or_elements)
    return group_or_elements.elements()


def deterministic_cycle(model, group, t: float, repetitions: int,
                        j_form: np.ndarray | None = None) -> SymplecticMatrix:
    """Fixed periodic cycle through all of G, repeated N times.

    S^(N)(t) = (prod_k g_k e^{-(t/(|G| N)) A J} g_k^{-1})^N with the cycle in
    enumeration order, identity first, earliest factor rightmost.
    """
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")
    A = coefficient_matrix(model)
    elements = _elements_of(group)
    if j_form is None:
        j_form = getattr(group, "j_form", None)
    if j_form is None:
        raise ValueError("j_form required when passing a bare element list")
    E = expm_real(-(t / (len(elements) * repetitions)) * A @ j_form)
    dim = A.shape[0]
    cycle = np.eye(dim)
    for g in elements:
        if isinstance(g, GroupElement):
            mat = g.matrix().astype(float)
            inv = g.inverse().matrix().astype(float)
        else:
            mat = np.asarray(g, dtype=float)
            inv = np.linalg.inv(mat)
        cycle = (mat @ E @ inv) @ cycle
    S = np.linalg.matrix_power(cycle, repetitions)
    basis = getattr(group, "basis", "block")
    return SymplecticMatrix.checked(S, dim // 2, basis)


def random_trajectory(model, group, cfg: TrajectoryConfig,
                      chunk: int = 4096) -> SymplecticMatrix:
    """One seeded random-decoupling walk S^(1)(l tau) = prod_j g_j E g_j^{-1}.

    The core exponential e^{-tau A J} is computed once and conjugated per
    step through the group's structural action.  Fully determined by
    cfg.seed; the product uses a fixed pairwise association.
    """
    A = coefficient_matrix(model)
    E = core_exponential(A, cfg.tau, group.j_form)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    S = np.eye(A.shape[0])
    remaining = cfg.steps
    while remaining:
        count = min(chunk, remaining)
        batch = group.sample_conjugators(rng, count)
        stack = group.conjugated_stack(E, batch)
        S = _ordered_product(stack) @ S
        remaining -= count
    return SymplecticMatrix.checked(S, group.dim // 2, group.basis)
