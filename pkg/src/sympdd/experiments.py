"""Batch experiment runners behind the CLI: parameter sweeps with CSV output,
rendered figures, standalone plot scripts, the verification suite, and the
Fock-space cross-check.

Reproducibility contract: a run is a pure function of its resolved
configuration; identical config (including seed) produces byte-identical CSV.
"""

from __future__ import annotations

import io
import math
import os
from dataclasses import dataclass, fields

import numpy as np

from . import __version__
from .averaging import PartitionedModel, pi0_map, pi_map, tilde_pi
from .error_analysis import (analytic_approximation, exact_expected_error,
                             monte_carlo_expected_error, trial_seed,
                             upper_bound)
from .eulerian import (build_cayley_graph, eulerian_evolution,
                       export_pulse_schedule, find_eulerian_cycle,
                       first_order_generator, rotation_rate, split_generator)
from .fock import heisenberg_check, vitali_model
from .groups import (GroupElement, HomogenizationGroup, SignedPermutation,
                     SuppressionGroup, enumerate_homogenization_group,
                     enumerate_unitary_decoupling_set, verify_closure)
from .schemes import deterministic_cycle, target_evolution
from .symplectic import (QuadraticModel, expm_real, hs_norm_sq, max_abs,
                         op_norm, symplectic_form)


class FormatError(ValueError):
    """CSV schema is missing or does not match a known sweep layout."""


class UsageError(ValueError):
    """Bad configuration file or flag combination."""


DEFAULT_TAUS = tuple(10.0 ** -e for e in range(1, 6))


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved batch-run parameters; echoed verbatim into output metadata."""

    mode: str
    n: int = 4
    ns: int = 2
    ne_max: int = 80
    k: float = 1.0
    tau: tuple = DEFAULT_TAUS
    t: float = 1.0
    trials: int = 20
    seed: int = 0
    out: str | None = None
    reps: int = 8
    quick: bool = False

    def echo_items(self) -> list:
        items = []
        for f in fields(self):
            if f.name in ("out", "quick"):
                continue
            v = getattr(self, f.name)
            if f.name == "tau":
                v = ",".join(format(x, ".17g") for x in v)
            elif isinstance(v, float):
                v = format(v, ".17g")
            items.append((f.name, str(v)))
        return items


def parse_config_text(text: str) -> dict:
    """`key = value` lines, `#` comments, blank lines ignored."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"config line {lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def config_from_mapping(mode: str, mapping: dict, out: str | None = None) -> ExperimentConfig:
    kwargs = {"mode": mode}
    converters = {
        "n": int, "ns": int, "ne_max": int, "trials": int, "seed": int,
        "reps": int, "k": float, "t": float,
        "tau": lambda s: tuple(float(x) for x in str(s).split(",") if x.strip()),
        "out": str, "mode": str,
        "quick": lambda s: str(s).lower() in ("1", "true", "yes"),
    }
    for key, value in mapping.items():
        if key not in converters:
            raise UsageError(f"unknown config key {key!r}")
        if key == "mode":
            continue
        try:
            kwargs[key] = converters[key](value)
        except ValueError as exc:
            raise UsageError(f"bad value for {key!r}: {value!r}") from exc
    if out is not None:
        kwargs["out"] = out
    return ExperimentConfig(**kwargs)


def random_symmetric(rng: np.random.Generator, dim: int, k: float) -> np.ndarray:
    """i.i.d. uniform [0, k] entries, symmetrized as (M + M^T)/2."""
    M = rng.uniform(0.0, k, (dim, dim))
    return (M + M.T) / 2.0


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _write_csv(path: str, kind: str, cfg: ExperimentConfig, realized: list,
               columns: list, rows: list) -> None:
    buf = io.StringIO()
    buf.write(f"# sympdd {kind} csv v1\n")
    buf.write(f"# artifact version {__version__}\n")
    for key, value in cfg.echo_items():
        buf.write(f"# config {key} = {value}\n")
    for key, value in realized:
        buf.write(f"# realized {key} = {value}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(buf.getvalue())


def _csv_kind(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().strip()
    for kind in ("homogenize", "suppress"):
        if first == f"# sympdd {kind} csv v1":
            return kind
    raise FormatError(f"{path}: not a sympdd sweep CSV (header {first!r})")


def read_sweep_csv(path: str):
    """(kind, metadata dict, structured rows) for a sweep CSV."""
    kind = _csv_kind(path)
    meta = {}
    table = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.startswith("# config "):
                key, value = line[len("# config "):].split("=", 1)
                meta[key.strip()] = value.strip()
            elif not line.startswith("#") and line.strip():
                table.append(line)
    if len(table) < 2:
        raise FormatError(f"{path}: no data rows")
    data = np.genfromtxt(io.StringIO("".join(table)), delimiter=",", names=True)
    return kind, meta, np.atleast_1d(data)


def run_homogenization_sweep(cfg: ExperimentConfig) -> str:
    """Gate error vs pulse spacing for one random n-mode model; writes CSV,
    figure and plot script next to each other."""
    if not cfg.tau:
        raise UsageError("tau sweep must be non-empty")
    out = cfg.out or "homogenize.csv"
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0xA)))
    A = random_symmetric(rng, 2 * cfg.n, cfg.k)
    model = QuadraticModel(cfg.n, A)
    group = HomogenizationGroup(cfg.n)
    a_norm = op_norm(A)
    rows = []
    realized_steps = []
    for r, tau in enumerate(cfg.tau):
        est = monte_carlo_expected_error(model, group, tau, cfg.t,
                                         trials=cfg.trials,
                                         master_seed=trial_seed(cfg.seed, 10_000 + r))
        analytic = analytic_approximation(model, group, tau, est.t)
        bound = upper_bound("hom", tau=tau, t=est.t, n=cfg.n, a_op_norm=a_norm)
        rows.append((tau, est.mean, est.std_error, analytic, bound,
                     cfg.trials, cfg.seed))
        realized_steps.append(f"{_fmt(tau)}:{est.metadata['steps']}")
    realized = [("a_op_norm", _fmt(a_norm)), ("steps", ";".join(realized_steps))]
    columns = ["tau", "mc_mean", "mc_stderr", "analytic", "bound", "trials", "seed"]
    _write_csv(out, "homogenize", cfg, realized, columns, rows)
    render_figure(out)
    emit_plot_script(out)
    return out


def suppression_ne_values(ne_max: int) -> tuple:
    return tuple(range(1, ne_max + 1))


def run_suppression_sweep(cfg: ExperimentConfig) -> str:
    """Gate error vs environment size at fixed pulse spacing."""
    if cfg.ne_max < 0:
        raise UsageError("ne_max must be >= 0")
    out = cfg.out or "suppress.csv"
    tau = cfg.tau[0] if cfg.tau else 1e-3
    rows = []
    realized_k = []
    for ne in suppression_ne_values(cfg.ne_max) or (0,):
        rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0xE, ne)))
        dim = 2 * (cfg.ns + ne)
        pm = PartitionedModel(cfg.ns, ne, random_symmetric(rng, dim, cfg.k))
        group = SuppressionGroup(cfg.ns, ne)
        est = monte_carlo_expected_error(pm, group, tau, cfg.t,
                                         trials=cfg.trials,
                                         master_seed=trial_seed(cfg.seed, 50_000 + ne))
        analytic = analytic_approximation(pm, group, tau, est.t)
        bound = upper_bound("supp", tau=tau, t=est.t, n_s=cfg.ns, n_e=ne, k=pm.k)
        rows.append((ne, est.mean, est.std_error, analytic, bound))
        realized_k.append(f"{ne}:{_fmt(pm.k)}")
    realized = [("tau", _fmt(tau)), ("k", ";".join(realized_k))]
    columns = ["n_e", "mc_mean", "mc_stderr", "analytic", "bound"]
    _write_csv(out, "suppress", cfg, realized, columns, rows)
    render_figure(out)
    emit_plot_script(out)
    return out


def render_figure(csv_path: str, png_path: str | None = None) -> str:
    """Render the sweep figure (log-log for tau sweeps, linear for n_E)."""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    kind, _, data = read_sweep_csv(csv_path)
    if png_path is None:
        png_path = os.path.splitext(csv_path)[0] + ".png"
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    if kind == "homogenize":
        ax.errorbar(data["tau"], data["mc_mean"], yerr=data["mc_stderr"],
                    fmt="^", color="k", capsize=3, label="monte carlo")
        ax.plot(data["tau"], data["analytic"], "-", color="tab:blue",
                label="first-order approximation")
        ax.plot(data["tau"], data["bound"], "-", color="grey", label="upper bound")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.invert_xaxis()
        ax.set_xlabel(r"pulse spacing $\tau$")
    else:
        ax.errorbar(data["n_e"], data["mc_mean"], yerr=data["mc_stderr"],
                    fmt="^", color="k", capsize=3, label="monte carlo")
        ax.plot(data["n_e"], data["analytic"], "-", color="k",
                label="first-order approximation")
        ax.plot(data["n_e"], data["bound"], "-", color="grey", label="upper bound")
        ax.set_xlabel(r"environment size $n_E$")
    ax.set_ylabel("expected gate error")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
    return png_path


_PLOT_TEMPLATE = '''#!/usr/bin/env python3
"""Standalone plot for {csv_name} (generated by sympdd)."""
import io
import numpy as np
import matplotlib.pyplot as plt

with open({csv_name!r}, "r", encoding="utf-8") as fh:
    table = "".join(l for l in fh if not l.startswith("#") and l.strip())
data = np.atleast_1d(np.genfromtxt(io.StringIO(table), delimiter=",", names=True))
fig, ax = plt.subplots(figsize=(6.0, 4.0))
ax.errorbar(data[{x!r}], data["mc_mean"], yerr=data["mc_stderr"],
            fmt="^", color="k", capsize=3, label="monte carlo")
ax.plot(data[{x!r}], data["analytic"], "-", color={acolor!r},
        label="first-order approximation")
ax.plot(data[{x!r}], data["bound"], "-", color="grey", label="upper bound")
{scale}ax.set_xlabel({xlabel!r})
ax.set_ylabel("expected gate error")
ax.legend(frameon=False)
fig.tight_layout()
fig.savefig({png_name!r}, dpi=150)
print("wrote", {png_name!r})
'''


def emit_plot_script(csv_path: str, script_path: str | None = None) -> str:
    """Write a standalone matplotlib script next to the CSV."""
    kind = _csv_kind(csv_path)
    _, _, data = read_sweep_csv(csv_path)   # validates non-empty schema
    del data
    if script_path is None:
        script_path = os.path.splitext(csv_path)[0] + "_plot.py"
    csv_name = os.path.basename(csv_path)
    png_name = os.path.splitext(csv_name)[0] + ".png"
    if kind == "homogenize":
        body = _PLOT_TEMPLATE.format(
            csv_name=csv_name, png_name=png_name, x="tau",
            xlabel="pulse spacing tau", acolor="tab:blue",
            scale='ax.set_xscale("log")\nax.set_yscale("log")\nax.invert_xaxis()\n')
    else:
        body = _PLOT_TEMPLATE.format(
            csv_name=csv_name, png_name=png_name, x="n_e",
            xlabel="environment size n_E", acolor="k", scale="")
    with open(script_path, "w", encoding="utf-8") as fh:
        fh.write(body)
    return script_path


def default_generators() -> list:
    """Gamma = {J, -1}: generates the n = 1 homogenization group."""
    return [GroupElement(SignedPermutation.identity(1), 1),
            GroupElement(SignedPermutation((0,), (-1,)), 0)]


def run_eulerian(cfg: ExperimentConfig) -> dict:
    """Finite-energy run: pulse schedule export plus convergence summary."""
    out = cfg.out or "eulerian_schedule.txt"
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0xA)))
    A = random_symmetric(rng, 2, cfg.k)
    model = QuadraticModel(1, A)
    group = HomogenizationGroup(1)
    gamma = default_generators()
    graph = build_cayley_graph(group.elements(), gamma)
    cycle = find_eulerian_cycle(graph)
    tau = cfg.t / (cfg.reps * cycle.length)
    splits = {gm: split_generator(gm, tau) for gm in graph.generators}
    export_pulse_schedule(out, cycle, splits, tau)

    M = first_order_generator(model, group, gamma, tau)
    lam = rotation_rate(M, group.j_form)
    target = expm_real(-cfg.t * lam * group.j_form)
    devs = {}
    for reps in (cfg.reps, 2 * cfg.reps):
        S = eulerian_evolution(model, group, gamma, cfg.t, reps).matrix
        devs[reps] = float(np.sqrt(hs_norm_sq(S - target)))
    sym = (M + M.T) / 2.0
    return {
        "schedule": out,
        "cycle_length": cycle.length,
        "tau": tau,
        "lambda": lam,
        "sym_residual": float(np.sqrt(hs_norm_sq(sym))),
        "deviations": devs,
    }


# ---------------------------------------------------------------------------
# verification suite


def _check(name, ok, detail):
    return {"name": name, "ok": bool(ok), "detail": detail}


def _verify_decoupling_identity(rng, quick):
    worst = 0.0
    for n in (1, 2) if quick else (1, 2, 3):
        V = enumerate_unitary_decoupling_set(n)
        for _ in range(10 if quick else 50):
            x = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            got = pi0_map(x, V)
            worst = max(worst, max_abs(got - (np.trace(x) / n) * np.eye(n)))
        z = np.diag([1.0] * (n - 1) + [1.0 - n])      # traceless
        worst = max(worst, max_abs(pi0_map(z, V)))
    return _check("unitary decoupling average = (tr x / n) 1", worst <= 1e-12,
                  f"max defect {worst:.2e}")


def _verify_homogenization_identity(rng, quick):
    worst = 0.0
    for n in (1, 2, 3) if quick else (1, 2, 3, 4):
        elements = enumerate_homogenization_group(n)
        for _ in range(5 if quick else 20):
            A = rng.normal(size=(2 * n, 2 * n))
            A = (A + A.T) / 2.0
            got = pi_map(A, group=elements)
            worst = max(worst, max_abs(got - (np.trace(A) / (2 * n)) * np.eye(2 * n)))
    return _check("homogenization average = (tr A / 2n) 1", worst <= 1e-12,
                  f"max defect {worst:.2e}")


def _verify_group_structure(quick):
    ok = True
    details = []
    for n in (1, 2) if quick else (1, 2, 3):
        elements = enumerate_homogenization_group(n)
        mats = [g.matrix() for g in elements]
        keys = {m.tobytes() for m in mats}
        ok &= len(keys) == len(mats) == 2 * 2 ** n * math.factorial(n)
        ok &= verify_closure(mats)
        J = symplectic_form(n).astype(np.int64)
        ok &= all(np.array_equal(m @ J @ m.T, J) for m in mats)
        details.append(f"n={n}:|G|={len(mats)}")
    return _check("group closure, normal form, exact symplecticity", ok,
                  " ".join(details))


def _verify_suppression(rng, quick):
    ok = True
    for ns, ne in ((1, 1), (2, 5)) if quick else ((1, 1), (2, 5), (2, 80)):
        dim = 2 * (ns + ne)
        pm = PartitionedModel(ns, ne, random_symmetric(rng, dim, 0.1))
        got = tilde_pi(pm)
        ok &= np.array_equal(got[:2 * ns, :2 * ns], pm.a_s)
        ok &= np.array_equal(got[2 * ns:, 2 * ns:], pm.a_e)
        ok &= np.all(got[:2 * ns, 2 * ns:] == 0.0)
    return _check("system-only twirl = A_S (+) A_E bit-exactly", ok, "")


def _verify_trotter(rng, quick):
    A = random_symmetric(rng, 2, 1.0)
    model = QuadraticModel(1, A)
    group = HomogenizationGroup(1)
    S0 = target_evolution(model, group, 1.0).matrix
    devs = []
    for N in (10, 20):
        SN = deterministic_cycle(model, group, 1.0, N).matrix
        devs.append(np.sqrt(hs_norm_sq(SN - S0)))
    ratio = devs[0] / devs[1]
    return _check("deterministic cycle Trotter rate O(1/N)",
                  1.6 <= ratio <= 2.4, f"halving ratio {ratio:.3f}")


def _verify_eulerian(rng, quick):
    A = random_symmetric(rng, 2, 1.0)
    model = QuadraticModel(1, A)
    group = HomogenizationGroup(1)
    gamma = default_generators()
    tau = 0.05
    M = first_order_generator(model, group, gamma, tau, substeps=16)
    sym = np.sqrt(hs_norm_sq((M + M.T) / 2.0))
    lam = rotation_rate(M, group.j_form)
    lam_err = abs(lam - np.trace(A) / 2.0)
    norm_a = np.sqrt(hs_norm_sq(A))
    ok = sym <= 1e-3 * norm_a and lam_err <= 1e-9 * max(1.0, norm_a)
    return _check("eulerian first-order generator = lambda J",
                  ok, f"sym residual {sym:.2e}, lambda defect {lam_err:.2e}")


def _verify_generator_vs_mc(rng, quick):
    A = random_symmetric(rng, 2, 1.0)
    model = QuadraticModel(1, A)
    group = HomogenizationGroup(1)
    tau, t = 1e-3, 1.0
    trials = 400 if quick else 2000
    est = monte_carlo_expected_error(model, group, tau, t, trials=trials,
                                     master_seed=1234)
    exact = exact_expected_error(model, group, tau, t)
    dev = abs(exact - est.mean)
    ok = dev <= 4.0 * est.std_error
    return _check("generator expectation within Monte Carlo error",
                  ok, f"|exact-mc| = {dev:.2e} vs stderr {est.std_error:.2e}")


def _verify_fock(quick):
    d1, d2 = (25, 12) if quick else (40, 25)
    tol1, tol2 = (1e-6, 1e-4) if quick else (1e-8, 1e-6)
    m1 = QuadraticModel(1, np.eye(2))
    defect1 = heisenberg_check(m1, 0.9 * np.pi, d1)
    defect2 = heisenberg_check(vitali_model(1.0), 1.0, d2)
    ok = defect1 <= tol1 and defect2 <= tol2
    return _check("Fock-space oracle matches phase-space evolution",
                  ok, f"single-mode {defect1:.2e}, beamsplitter {defect2:.2e}")


def _verify_construction_guard():
    bad = np.array([[0.0, 1.0], [0.0, 0.0]])
    try:
        QuadraticModel(1, bad)
    except ValueError as exc:
        return _check("asymmetric A rejected at construction", True, str(exc))
    return _check("asymmetric A rejected at construction", False,
                  "no error raised")


def run_verify(cfg: ExperimentConfig) -> list:
    """Full invariant suite; one result dict per item."""
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0xF)))
    quick = cfg.quick
    return [
        _verify_decoupling_identity(rng, quick),
        _verify_homogenization_identity(rng, quick),
        _verify_group_structure(quick),
        _verify_suppression(rng, quick),
        _verify_trotter(rng, quick),
        _verify_eulerian(rng, quick),
        _verify_generator_vs_mc(rng, quick),
        _verify_fock(quick),
        _verify_construction_guard(),
    ]


def run_fock_check(cfg: ExperimentConfig) -> list:
    """Oracle presets: rotation, beamsplitter, and cutoff monotonicity."""
    results = []
    m1 = QuadraticModel(1, np.eye(2))
    d_values = (10, 20, 40) if not cfg.quick else (10, 16, 25)
    defects = [heisenberg_check(m1, 0.9 * np.pi, d) for d in d_values]
    results.append(_check("single mode rotation defect <= 1e-8 at d=40",
                          defects[-1] <= (1e-8 if not cfg.quick else 1e-5),
                          f"defects {['%.2e' % v for v in defects]}"))
    results.append(_check("defect non-increasing in cutoff",
                          all(defects[i + 1] <= defects[i] * (1 + 1e-9)
                              for i in range(len(defects) - 1)),
                          f"d = {d_values}"))
    d2 = 25 if not cfg.quick else 12
    defect2 = heisenberg_check(vitali_model(1.0), 1.0, d2)
    results.append(_check("beamsplitter preset defect <= 1e-6 at d=25",
                          defect2 <= (1e-6 if not cfg.quick else 1e-3),
                          f"defect {defect2:.2e}"))
    return results
