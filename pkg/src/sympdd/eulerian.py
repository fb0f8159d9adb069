"""Finite-energy decoupling: Cayley graph, Eulerian pulse cycle, splitting of
each correction operation into two exponentials, and the piecewise-continuous
evolution it generates.

The walk convention: consecutive cycle vertices satisfy g_{k+1} = g_k
gamma_k^{-1}, so the pulse gamma_k = g_{k+1}^{-1} g_k applied at time k*tau
always lies in the generating set.  This traverses the inversion image of the
left-multiplication edge set (g, gamma g); vertex degrees, edge count and the
Eulerian property are the same for both orientations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .groups import GroupElement
from .schemes import coefficient_matrix
from .symplectic import (SymplecticMatrix, convert_matrix, expm_real, max_abs,
                         symplectic_defect, symplectic_form,
                         symplectic_tolerance)

#: reconstruction tolerance for e^{tau X/2} e^{tau Y/2} = gamma
SPLIT_TOL = 1e-9


class GenerationError(ValueError):
    """The proposed generator list does not generate the group."""


class StructureError(ValueError):
    """Graph is not Eulerian / cycle construction failed."""


@dataclass(frozen=True)
class CayleyGraph:
    """Cayley graph of (G, Gamma) plus the right-action walk adjacency."""

    vertices: tuple          # GroupElements
    generators: tuple        # GroupElements (Gamma)
    edges: tuple             # (i, j) pairs for the directed edges (g, gamma g)
    walk_adjacency: tuple    # per vertex: tuple of (target_index, generator_index)

    @property
    def edge_count(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class EulerianCycle:
    """Vertex tour (g_1, ..., g_K) using each walk edge once; pulses in Gamma."""

    vertices: tuple
    pulses: tuple

    @property
    def length(self) -> int:
        return len(self.vertices)


def _index_elements(elements) -> dict:
    return {g: i for i, g in enumerate(elements)}


def build_cayley_graph(elements, gamma) -> CayleyGraph:
    """Graph with G as vertices and (g, gamma g) as directed edges.

    Verifies that gamma generates G (closure of generator words) and that
    every vertex has |Gamma| incoming and outgoing edges.
    """
    elements = list(elements)
    gamma = list(gamma)
    if not gamma:
        raise GenerationError("empty generator list")
    index = _index_elements(elements)
    n = elements[0].n
    identity = GroupElement.identity(n)
    if identity not in index:
        raise GenerationError("element list must contain the identity")

    # closure of the generated subgroup
    reached = {identity}
    frontier = [identity]
    while frontier:
        nxt = []
        for g in frontier:
            for gm in gamma:
                for h in (gm.compose(g), gm.inverse().compose(g)):
                    if h not in reached:
                        reached.add(h)
                        nxt.append(h)
        frontier = nxt
    if reached != set(elements):
        raise GenerationError(
            f"generators reach {len(reached)} of {len(elements)} elements")

    edges = []
    for i, g in enumerate(elements):
        for gm in gamma:
            edges.append((i, index[gm.compose(g)]))
    walk = []
    for g in elements:
        row = []
        for gi, gm in enumerate(gamma):
            row.append((index[g.compose(gm.inverse())], gi))
        walk.append(tuple(row))

    graph = CayleyGraph(tuple(elements), tuple(gamma), tuple(edges), tuple(walk))
    out_deg = np.zeros(len(elements), dtype=int)
    in_deg = np.zeros(len(elements), dtype=int)
    for i, j in graph.edges:
        out_deg[i] += 1
        in_deg[j] += 1
    if not (np.all(out_deg == len(gamma)) and np.all(in_deg == len(gamma))):
        raise StructureError("graph is not Eulerian: unbalanced vertex degrees")
    return graph


def find_eulerian_cycle(graph: CayleyGraph) -> EulerianCycle:
    """Hierholzer edge exhaustion on the walk adjacency; deterministic."""
    ptr = [0] * len(graph.vertices)
    # stack entries: (vertex index, generator index used to enter it)
    stack = [(0, -1)]
    path = []
    while stack:
        v, _ = stack[-1]
        row = graph.walk_adjacency[v]
        if ptr[v] < len(row):
            w, gi = row[ptr[v]]
            ptr[v] += 1
            stack.append((w, gi))
        else:
            path.append(stack.pop())
    path.reverse()
    expected = len(graph.vertices) * len(graph.generators)
    if len(path) != expected + 1 or path[0][0] != path[-1][0]:
        raise StructureError("edge exhaustion did not produce a closed tour")

    vertices = tuple(graph.vertices[v] for v, _ in path[:-1])
    pulses = tuple(graph.generators[gi] for _, gi in path[1:])
    # pulses must satisfy gamma_k = g_{k+1}^{-1} g_k
    for k in range(expected):
        nxt = vertices[(k + 1) % expected]
        if nxt.inverse().compose(vertices[k]) != pulses[k]:
            raise StructureError("pulse/vertex mismatch in the Eulerian tour")
    return EulerianCycle(vertices, pulses)


@dataclass(frozen=True)
class SplitGenerator:
    """gamma = e^{(tau/2) X} e^{(tau/2) Y} with X, Y in sp(2n, R)."""

    x: np.ndarray
    y: np.ndarray
    gamma: np.ndarray
    tau: float


def _complexify_log(U: np.ndarray) -> np.ndarray:
    """Principal log of an orthogonal matrix commuting with block J.

    Such U has the block form [[C, D], [-D, C]] and maps to the unitary
    W = C - iD; the principal branch puts the eigenvalue -1 at angle +pi.
    """
    dim = U.shape[0]
    n = dim // 2
    C = U[:n, :n]
    D = U[:n, n:]
    form_defect = max(max_abs(U[n:, n:] - C), max_abs(U[n:, :n] + D))
    if form_defect > 1e-9:
        raise ValueError(
            f"orthogonal factor does not commute with J (defect {form_defect:.2e})")
    W = C - 1j * D
    T, Z = scipy.linalg.schur(W, output="complex")
    theta = np.angle(np.diagonal(T))
    logW = (Z * (1j * theta)) @ Z.conj().T
    A = logW.real
    B = logW.imag
    return np.block([[A, -B], [B, A]])


def split_generator(gamma, tau: float, basis: str = "block") -> SplitGenerator:
    """Two-exponential factorization via the symplectic polar decomposition.

    gamma = U P with U orthogonal-symplectic and P symmetric positive
    definite symplectic; X = (2/tau) log U, Y = (2/tau) log P.  Both logs are
    Hamiltonian, so each factor is a curve inside the symplectic group.
    """
    if isinstance(gamma, GroupElement):
        gamma = gamma.matrix().astype(float)
    gamma = np.asarray(gamma, dtype=float)
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    n = gamma.shape[0] // 2
    J = symplectic_form(n, basis)
    if symplectic_defect(gamma, J) > symplectic_tolerance(gamma):
        raise ValueError("gamma is not symplectic")

    w, v = np.linalg.eigh(gamma.T @ gamma)
    p_inv = (v / np.sqrt(w)) @ v.T
    log_p = (v * np.log(w)) @ v.T / 2.0
    U = gamma @ p_inv
    if basis == "interleaved":
        U_b = convert_matrix(U, "block")
        log_u = convert_matrix(_complexify_log(U_b), "interleaved")
    else:
        log_u = _complexify_log(U)
    X = (2.0 / tau) * log_u
    Y = (2.0 / tau) * log_p
    rec = expm_real(tau / 2.0 * X) @ expm_real(tau / 2.0 * Y)
    err = max_abs(rec - gamma)
    if err > SPLIT_TOL:
        raise ValueError(f"split reconstruction error {err:.2e} > {SPLIT_TOL:g}")
    return SplitGenerator(X, Y, gamma, tau)


def _path_point(split: SplitGenerator, s: float) -> np.ndarray:
    """gamma~(s): e^{sY} on [0, tau/2], then e^{(s - tau/2) X} e^{(tau/2) Y}."""
    half = split.tau / 2.0
    if s <= half:
        return expm_real(s * split.y)
    return expm_real((s - half) * split.x) @ expm_real(half * split.y)


def toggled_integral(A: np.ndarray, J: np.ndarray, split: SplitGenerator,
                     substeps: int) -> np.ndarray:
    """Midpoint quadrature of int_0^tau gamma~(s)^{-1} A J gamma~(s) ds."""
    half = split.tau / 2.0
    h = half / substeps
    total = np.zeros_like(A)
    for base in (0.0, half):
        for i in range(substeps):
            s = base + (i + 0.5) * h
            gt = _path_point(split, s)
            total += h * (np.linalg.inv(gt) @ A @ J @ gt)
    return total


def _toggled_propagator(A: np.ndarray, J: np.ndarray, split: SplitGenerator,
                        substeps: int) -> np.ndarray:
    """Product integration of the toggling-frame segment evolution.

    T = prod_i e^{-h gamma~(s_i)^{-1} A J gamma~(s_i)} over midpoint samples,
    earliest factor rightmost.
    """
    half = split.tau / 2.0
    h = half / substeps
    T = np.eye(A.shape[0])
    for base in (0.0, half):
        for i in range(substeps):
            s = base + (i + 0.5) * h
            gt = _path_point(split, s)
            T = expm_real(-h * (np.linalg.inv(gt) @ A @ J @ gt)) @ T
    return T


def eulerian_evolution(model, group, gamma, t: float, repetitions: int,
                       substeps: int = 16) -> SymplecticMatrix:
    """Evolution under the Eulerian cycle with continuous finite-energy pulses.

    tau = t / (N |G| |Gamma|); each segment contributes g_k T_k g_k^{-1}
    where T_k is the product-integrated toggling propagator of the pulse path
    gamma~_k.  Converges to the homogenized rotation at rate O(1/N).
    """
    A = coefficient_matrix(model)
    J = group.j_form
    graph = build_cayley_graph(group.elements(), list(gamma))
    cycle = find_eulerian_cycle(graph)
    K = cycle.length
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")
    tau = t / (repetitions * K)
    splits = {gm: split_generator(gm, tau, basis=group.basis)
              for gm in graph.generators}
    propagators = {gm: _toggled_propagator(A, J, splits[gm], substeps)
                   for gm in graph.generators}
    segment = []
    for k in range(K):
        g = cycle.vertices[k].matrix().astype(float)
        g_inv = cycle.vertices[k].inverse().matrix().astype(float)
        segment.append(g @ propagators[cycle.pulses[k]] @ g_inv)
    one_cycle = np.eye(A.shape[0])
    for C in segment:
        one_cycle = C @ one_cycle
    S = np.linalg.matrix_power(one_cycle, repetitions)
    return SymplecticMatrix.checked(S, group.dim // 2, group.basis)


def first_order_generator(model, group, gamma, tau: float,
                          substeps: int = 16) -> np.ndarray:
    """Cycle-averaged first-order generator of the Eulerian scheme.

    (1 / (tau |G| |Gamma|)) sum_g g (sum_gamma Q_gamma) g^{-1} with Q_gamma
    the quadrature of the toggled drift over one pulse path.  For a
    homogenization group this is a multiple of J.
    """
    A = coefficient_matrix(model)
    J = group.j_form
    graph = build_cayley_graph(group.elements(), list(gamma))
    q_sum = np.zeros_like(A)
    for gm in graph.generators:
        split = split_generator(gm, tau, basis=group.basis)
        q_sum += toggled_integral(A, J, split, substeps)
    out = np.zeros_like(A)
    for g in graph.vertices:
        mat = g.matrix().astype(float)
        out += mat @ q_sum @ g.inverse().matrix().astype(float)
    return out / (tau * len(graph.vertices) * len(graph.generators))


def rotation_rate(M: np.ndarray, J: np.ndarray) -> float:
    """Coefficient of J in M, extracted by Frobenius projection."""
    return float(np.sum(M * J) / np.sum(J * J))


def export_pulse_schedule(path, cycle: EulerianCycle, splits: dict,
                          tau: float) -> None:
    """Plain-text pulse schedule: `time_index, segment(X|Y), matrix entries`.

    Each pulse k occupies [k tau, (k+1) tau): the Y generator runs first on
    the half interval, then X.
    """
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# sympdd eulerian pulse schedule\n")
        fh.write(f"# tau = {tau!r}\n")
        fh.write("# columns: time_index, segment, row-major generator entries\n")
        for k, pulse in enumerate(cycle.pulses):
            split = splits[pulse]
            for name, mat in (("Y", split.y), ("X", split.x)):
                entries = ", ".join(format(v, ".17g") for v in mat.ravel())
                fh.write(f"{k}, {name}, {entries}\n")
