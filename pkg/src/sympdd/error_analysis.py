"""Gate error: Monte Carlo estimate over seeded random walks, first-order
analytic value, rigorous upper bounds, and the exact expectation through the
drift-diffusion generators of the walk.

The generators act on E[S] and E[S (x) S]:

    L1 = -P(A) J + (tau / 2|G|) sum_g (g (A - P(A)) J g^{-1})^2
    L2 = -P(A) J (x) 1 + 1 (x) -P(A) J
         + (tau / 2|G|) sum_g [D^2 (x) 1 + 1 (x) D^2 + 2 D (x) D]

with E[eps(t)] = ||S0||_2^2 - 2 <S0, e^{t L1}> + sum_{k,l} (e^{t L2})[(kk),(ll)].
The tau/2 coefficient is the cumulant-expansion variance rate of the walk's
increments; it reproduces the exact transfer value (E[C (x) C])^l and seeded
Monte Carlo estimates to O(tau) relative.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .schemes import (TrajectoryConfig, coefficient_matrix, random_trajectory,
                      target_evolution, trial_seed_sequence)
from .symplectic import DimensionError, expm_real, hs_norm_sq

#: largest (2n)^2 for which the second-moment generator is exponentiated
MAX_SECOND_MOMENT_DIM = 4096


class SizeLimitError(ValueError):
    """Problem too large for the exact generator route; use Monte Carlo."""


@dataclass(frozen=True)
class ErrorEstimate:
    """Monte Carlo mean of the gate error with its standard error."""

    mean: float
    std_error: float
    trials: int
    tau: float
    t: float
    metadata: dict = field(default_factory=dict, compare=False)


@dataclass(frozen=True)
class GeneratorPair:
    """Drift-diffusion generators for E[S] (lhat) and E[S (x) S] (lhat2)."""

    lhat: np.ndarray
    lhat2: np.ndarray


def gate_error(S0: np.ndarray, S: np.ndarray) -> float:
    """Squared Hilbert-Schmidt distance ||S0 - S||_2^2."""
    S0 = np.asarray(S0, dtype=float)
    S = np.asarray(S, dtype=float)
    if S0.shape != S.shape:
        raise DimensionError(f"shape mismatch: {S0.shape} vs {S.shape}")
    return hs_norm_sq(S0 - S)


def trial_seed(master_seed: int, index: int) -> int:
    """64-bit per-trial seed derived from (master_seed, trial index)."""
    return int(trial_seed_sequence(master_seed, index).generate_state(1, np.uint64)[0])


def monte_carlo_expected_error(model, group, tau: float, t: float,
                               trials: int = 20, master_seed: int = 0) -> ErrorEstimate:
    """Mean gate error over independent seeded trajectories.

    l = round(t / tau) steps; the realized time l*tau is used for the target.
    Fully deterministic for fixed master_seed and trials; trials accumulate
    in index order.
    """
    if trials < 1:
        raise ValueError(f"trials must be >= 1, got {trials}")
    steps = int(round(t / tau))
    if steps < 1:
        raise ValueError(f"t/tau = {t / tau:.3g} rounds below one step")
    t_real = steps * tau
    rounding_warning = abs(t - t_real) > 1e-9 * max(abs(t), tau)
    S0 = target_evolution(model, group, t_real).matrix
    errs = np.empty(trials)
    for i in range(trials):
        cfg = TrajectoryConfig(tau=tau, steps=steps, seed=trial_seed(master_seed, i))
        S = random_trajectory(model, group, cfg).matrix
        errs[i] = gate_error(S0, S)
    mean = float(errs.mean())
    std_error = float(errs.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return ErrorEstimate(mean, std_error, trials, tau, t_real,
                         metadata={"steps": steps, "requested_t": t,
                                   "rounding_warning": rounding_warning,
                                   "master_seed": master_seed})


def analytic_approximation(model, group, tau: float, t: float) -> float:
    """First-order expected gate error tau * t * ||A - P(A)||_2^2."""
    A = coefficient_matrix(model)
    return tau * t * hs_norm_sq(A - group.project(A))


def upper_bound(kind: str, *, tau: float, t: float, n: int | None = None,
                a_op_norm: float | None = None, n_s: int | None = None,
                n_e: int | None = None, k: float | None = None) -> float:
    """Model-independent bounds: 16 tau t n ||A||^2 resp. 16 tau t n_S n_E k^2."""
    if kind == "hom":
        if n is None or a_op_norm is None:
            raise ValueError("homogenization bound needs n and a_op_norm")
        return 16.0 * tau * t * n * a_op_norm ** 2
    if kind == "supp":
        if n_s is None or n_e is None or k is None:
            raise ValueError("suppression bound needs n_s, n_e and k")
        return 16.0 * tau * t * n_s * n_e * k ** 2
    raise ValueError(f"unknown bound kind {kind!r}")


def build_generators(model, group, tau: float) -> GeneratorPair:
    """Assemble the drift-diffusion generators from the enumerated group."""
    A = coefficient_matrix(model)
    J = group.j_form
    P = group.project(A)
    dim = A.shape[0]
    drift = -P @ J
    mats = group.element_matrices()
    coeff = tau / (2.0 * len(mats))
    delta_j = (A - P) @ J
    ident = np.eye(dim)
    lhat = drift.copy()
    lhat2 = np.kron(drift, ident) + np.kron(ident, drift)
    for g in mats:
        D = g @ delta_j @ np.linalg.inv(g)
        D2 = D @ D
        lhat += coeff * D2
        lhat2 += coeff * (np.kron(D2, ident) + np.kron(ident, D2)
                          + 2.0 * np.kron(D, D))
    return GeneratorPair(lhat, lhat2)


def exact_expected_error(model, group, tau: float, t: float) -> float:
    """Expected gate error from the generator pair, no sampling.

    E[eps] = ||S0||_2^2 - 2 tr(S0^T E[S]) + E[||S||_2^2] with the first and
    second moments obtained by exponentiating the generators.
    """
    A = coefficient_matrix(model)
    dim = A.shape[0]
    if dim * dim > MAX_SECOND_MOMENT_DIM:
        raise SizeLimitError(
            f"(2n)^2 = {dim * dim} exceeds {MAX_SECOND_MOMENT_DIM}; "
            "use monte_carlo_expected_error instead")
    gen = build_generators(model, group, tau)
    S0 = expm_real(-t * group.project(A) @ group.j_form)
    first = expm_real(t * gen.lhat)
    second = expm_real(t * gen.lhat2).reshape(dim, dim, dim, dim)
    second_moment = float(np.einsum("kkll->", second))
    return hs_norm_sq(S0) - 2.0 * float(np.sum(S0 * first)) + second_moment
