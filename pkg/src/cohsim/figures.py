"""Figure-reproduction sweeps with deterministic CSV output.

Each sweep returns a :class:`SweepResult`: a column schema, fully populated
numeric rows, and a meta block recording every tolerance, grid parameter and
the package version.  Rows are computed by a worker pool over independent
solves and assembled in deterministic order, so re-running a sweep with the
same inputs reproduces the output byte for byte.
"""

from __future__ import annotations

import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import linalg as la
from .channels import qubit_unitary
from .implement import (
    InfeasibleImplementationError,
    SimulationQuery,
    amortized_cost,
    coherence_left_sdp,
    gate_fidelity,
    implementation_error,
)
from .sdp import DEFAULT_TOL

__all__ = ["SweepResult", "figure", "FIGURES", "fig4", "fig5", "fig6", "fig7"]

THETA_STEPS = 64
RESOURCE_STEPS = 50
SIMPLEX_RESOLUTION = 0.02


@dataclass
class SweepResult:
    name: str
    schema: list
    rows: list
    meta: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        for key in sorted(self.meta):
            buf.write(f"# {key}={self.meta[key]}\n")
        buf.write(",".join(self.schema) + "\n")
        for row in self.rows:
            buf.write(",".join(_fmt(v) for v in row) + "\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {"name": self.name, "schema": self.schema, "rows": self.rows, "meta": self.meta}

    def column(self, name: str) -> np.ndarray:
        return np.array([row[self.schema.index(name)] for row in self.rows], dtype=float)


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def _run(fn, tasks, jobs: int):
    if jobs <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def _meta(name: str, tol: float, seed: int | None, **grid) -> dict:
    meta = {"figure": name, "version": __version__, "tol": tol}
    if seed is not None:
        meta["seed"] = seed
    meta.update(grid)
    return meta


def qubit_resource_with_robustness(c_r: float) -> np.ndarray:
    """Pure qubit state with prescribed robustness ``2 sqrt(q(1-q)) = c_r``."""
    if not 0.0 <= c_r <= 1.0:
        raise ValueError(f"qubit robustness must lie in [0, 1], got {c_r}")
    q = 0.5 * (1.0 + np.sqrt(max(0.0, 1.0 - c_r**2)))
    return np.array([np.sqrt(q), np.sqrt(1.0 - q)], dtype=complex)


# -- fig4: diamond error vs resource coherence --------------------------------

_FIG4_THETAS = (np.pi / 30, np.pi / 7, np.pi / 4)


def _fig4_task(args):
    theta, c_r, tol = args
    err = implementation_error(
        SimulationQuery(qubit_unitary(theta), qubit_resource_with_robustness(c_r)), tol=tol)
    return [theta, c_r, err]


def fig4(tol: float = DEFAULT_TOL, jobs: int = 1, steps: int = RESOURCE_STEPS,
         seed: int | None = None) -> SweepResult:
    """Implementation error of qubit unitaries vs robustness of a pure qubit resource."""
    grid = np.linspace(0.0, 1.0, steps)
    tasks = [(theta, float(c), tol) for theta in _FIG4_THETAS for c in grid]
    rows = _run(_fig4_task, tasks, jobs)
    return SweepResult("fig4", ["theta", "resource_c_r", "diamond_error"], rows,
                       _meta("fig4", tol, seed, resource_steps=steps))


# -- fig5: gate fidelity over the qutrit simplex -------------------------------

_FIG5_THETA = np.pi / 14


def _fig5_task(args):
    px, py, theta, tol = args
    pz = 1.0 - px - py
    psi = np.sqrt(np.array([px, py, pz]))
    fid = gate_fidelity(SimulationQuery(qubit_unitary(theta), psi.astype(complex)), tol=tol)
    overlap = float(psi.sum() / np.sqrt(3.0))
    srt = np.sort([px, py, pz])
    is_flagpole = bool(abs(srt[0] - srt[1]) < 1e-9)
    distillable = bool(srt[2] <= 0.5 + 1e-9)          # lambda1 <= 1/2: cosbit reachable
    dilutable = bool(psi.sum() <= np.sqrt(2.0) + 1e-9)  # plane criterion with k = 2
    return [px, py, pz, fid, overlap, is_flagpole, fid >= 1.0 - 1e-5, distillable, dilutable]


def fig5(tol: float = DEFAULT_TOL, jobs: int = 1, resolution: float = SIMPLEX_RESOLUTION,
         theta: float = _FIG5_THETA, seed: int | None = None) -> SweepResult:
    """Gate fidelity for a qubit unitary with a generic qutrit resource."""
    n = int(round(1.0 / resolution))
    tasks = []
    for i in range(n + 1):
        for j in range(n + 1 - i):
            tasks.append((i / n, j / n, theta, tol))
    rows = _run(_fig5_task, tasks, jobs)
    schema = ["p_x", "p_y", "p_z", "gate_fidelity", "cosdit_overlap",
              "is_flagpole", "exact", "cosbit_distillable", "cosbit_dilutable"]
    return SweepResult("fig5", schema, rows,
                       _meta("fig5", tol, seed, resolution=resolution, theta=theta))


# -- fig6: amortized cost vs theta ---------------------------------------------

_FIG6_EPSILONS = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5)


def _fig6_task(args):
    theta, eps, tol = args
    cost = amortized_cost(qubit_unitary(theta), eps, tol=tol)
    return [theta, theta / np.pi, eps, cost]


def fig6(tol: float = DEFAULT_TOL, jobs: int = 1, steps: int = THETA_STEPS,
         seed: int | None = None) -> SweepResult:
    """Amortized cost of qubit unitaries for several error thresholds."""
    thetas = np.linspace(np.pi / 4 / steps, np.pi / 4, steps)
    tasks = [(float(t), eps, tol) for eps in _FIG6_EPSILONS for t in thetas]
    rows = _run(_fig6_task, tasks, jobs)
    return SweepResult("fig6", ["theta", "theta_over_pi", "epsilon", "amortized_bits"], rows,
                       _meta("fig6", tol, seed, theta_steps=steps))


# -- fig7: coherence left vs theta ----------------------------------------------

_FIG7_EPSILONS = (0.15, 0.25, 0.45, 0.75)
_FIG7_INPUT_CRS = (0.25, 0.5, 0.75, 1.0)


def _fig7_task(args):
    theta, c_in, eps, tol = args
    q = SimulationQuery(qubit_unitary(theta), qubit_resource_with_robustness(c_in), eps)
    try:
        bound = coherence_left_sdp(q, d_s=2, tol=tol)
        feasible = 1
    except InfeasibleImplementationError:
        # weak resources cannot reach this unitary within eps at all
        bound, feasible = 0.0, 0
    return [theta, theta / np.pi, c_in, eps, feasible, bound]


def fig7(tol: float = DEFAULT_TOL, jobs: int = 1, steps: int = THETA_STEPS,
         seed: int | None = None) -> SweepResult:
    """Coherence left after approximate implementation, for several input
    coherences and error thresholds."""
    thetas = np.linspace(np.pi / 4 / steps, np.pi / 4, steps)
    tasks = [(float(t), c, eps, tol)
             for c in _FIG7_INPUT_CRS for eps in _FIG7_EPSILONS for t in thetas]
    rows = _run(_fig7_task, tasks, jobs)
    schema = ["theta", "theta_over_pi", "input_c_r", "epsilon", "feasible", "coherence_left_bound"]
    return SweepResult("fig7", schema, rows, _meta("fig7", tol, seed, theta_steps=steps))


FIGURES = {"fig4": fig4, "fig5": fig5, "fig6": fig6, "fig7": fig7}


def figure(name: str, tol: float = DEFAULT_TOL, jobs: int = 1, seed: int | None = None,
           **grid) -> SweepResult:
    """Run a named figure sweep."""
    if name not in FIGURES:
        raise ValueError(f"unknown figure {name!r}; choose from {sorted(FIGURES)}")
    return FIGURES[name](tol=tol, jobs=jobs, seed=seed, **grid)
