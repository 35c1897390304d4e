"""Convergence-study driver.

Reproduces the homogenisation experiment: for each even N, solve the rough
checkerboard problem at h = tau = 1/(2N) with degrees (p, q), compare
against fine reference solutions of the rough and the homogenised problem,
and tabulate E_sup / E_Q errors with experimental orders of convergence.
"""

from __future__ import annotations

import configparser
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from threading import Lock

import numpy as np

from . import coefficients as coeff
from .errors import ErrorTable, compare_solutions
from .slab import DiscreteSolution, load_solution, run, save_solution
from .spaces import eval_scalar

_CHECKPOINT_MODES = ("auto", "always", "never")
# above roughly this many coefficient values, 'auto' stops writing text
# checkpoints (the study then keeps references in memory only)
_AUTO_CHECKPOINT_LIMIT = 20_000_000


@dataclass(frozen=True)
class StudyConfig:
    n_list: tuple = (2, 4, 8, 16)
    p: int = 2
    q: int = 1
    rho: float = 1.0
    T: float = 1.5
    solver: str = "auto"
    threads: int = 1
    seed: int = 0
    ref_p: int = 3
    ref_q: int = 1
    ref_space_cells: int | None = None
    ref_time_cells: int | None = None
    checkpoint: str = "auto"
    out_dir: str = "study_out"
    snapshot_times: tuple = (0.025, 0.5, 1.0, 1.5)
    snapshot_resolution: int = 128

    def __post_init__(self):
        if not self.n_list:
            raise ValueError("n_list must not be empty")
        for N in self.n_list:
            if N < 2 or N % 2 != 0:
                raise ValueError(f"study requires even N >= 2, got N={N}")
        if list(self.n_list) != sorted(set(self.n_list)):
            raise ValueError("n_list must be strictly increasing")
        if self.p < 1 or self.q < 0:
            raise ValueError(f"invalid degrees p={self.p}, q={self.q}")
        if self.checkpoint not in _CHECKPOINT_MODES:
            raise ValueError(f"checkpoint must be one of {_CHECKPOINT_MODES}")
        h_finest = 2 * max(self.n_list)
        ref_n = self.ref_space_cells or 4 * h_finest
        if ref_n < 2 * h_finest:
            raise ValueError(f"reference mesh ({ref_n} cells) must be at least twice "
                             f"as fine as the finest study mesh ({h_finest} cells)")
        for N in self.n_list:
            if ref_n % (2 * N) != 0:
                raise ValueError(f"reference mesh ({ref_n} cells) does not nest the "
                                 f"study mesh for N={N} ({2 * N} cells)")
        m_ref = self.ref_time_cells or int(round(self.T * ref_n))
        tau_ref = self.T / m_ref
        for N in self.n_list:
            ratio = (1.0 / (2 * N)) / tau_ref
            if abs(ratio - round(ratio)) > 1e-9 or ratio < 1 - 1e-9:
                raise ValueError(f"reference slab length T/{m_ref} does not divide the "
                                 f"study slab length 1/{2 * N}")

    @property
    def reference_space_cells(self) -> int:
        return self.ref_space_cells or 8 * max(self.n_list)

    @property
    def reference_time_cells(self) -> int:
        return self.ref_time_cells or int(round(self.T * self.reference_space_cells))


_DEFAULTS = StudyConfig()

_SCHEMA = {
    "study": {"n_list", "p", "q", "rho", "t", "solver", "threads", "seed"},
    "reference": {"p", "q", "space_cells", "time_cells", "checkpoint"},
    "output": {"dir", "snapshot_times", "snapshot_resolution"},
}


def _parse_int(section, key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"[{section}] {key} = {raw!r}: not an integer") from None


def _parse_float(section, key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"[{section}] {key} = {raw!r}: not a number") from None


def parse_config(path) -> StudyConfig:
    """Read an INI-style study configuration; unknown keys are rejected.

    An empty file yields the defaults (N_list = 2,4,8,16, p=2, q=1, rho=1,
    T=1.5, reference p=3 at 4x the finest study mesh).
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"config file {path} does not exist")
    parser = configparser.ConfigParser()
    with open(path) as fh:
        parser.read_file(fh, source=str(path))
    kwargs = {}
    for section in parser.sections():
        name = section.lower()
        if name not in _SCHEMA:
            raise ValueError(f"unknown config section [{section}]")
        for key, raw in parser.items(section):
            if key not in _SCHEMA[name]:
                raise ValueError(f"unknown key {key!r} in section [{section}]")
            if name == "study":
                if key == "n_list":
                    items = [s for chunk in raw.split(",") for s in chunk.split()]
                    values = tuple(_parse_int(section, key, s) for s in items)
                    for N in values:
                        if N < 2 or N % 2 != 0:
                            raise ValueError(f"[study] n_list: N must be even and >= 2, got {N}")
                    kwargs["n_list"] = values
                elif key in ("p", "q", "threads", "seed"):
                    kwargs[key] = _parse_int(section, key, raw)
                elif key == "rho":
                    kwargs["rho"] = _parse_float(section, key, raw)
                elif key == "t":
                    kwargs["T"] = _parse_float(section, key, raw)
                elif key == "solver":
                    if raw not in ("auto", "direct", "decoupled"):
                        raise ValueError(f"[study] solver = {raw!r}: unknown solver")
                    kwargs["solver"] = raw
            elif name == "reference":
                if key == "checkpoint":
                    if raw not in _CHECKPOINT_MODES:
                        raise ValueError(f"[reference] checkpoint = {raw!r}: "
                                         f"must be one of {_CHECKPOINT_MODES}")
                    kwargs["checkpoint"] = raw
                else:
                    kwargs[{"p": "ref_p", "q": "ref_q", "space_cells": "ref_space_cells",
                            "time_cells": "ref_time_cells"}[key]] = _parse_int(section, key, raw)
            elif name == "output":
                if key == "dir":
                    kwargs["out_dir"] = raw
                elif key == "snapshot_times":
                    items = [s for chunk in raw.split(",") for s in chunk.split()]
                    kwargs["snapshot_times"] = tuple(_parse_float(section, key, s) for s in items)
                else:
                    kwargs["snapshot_resolution"] = _parse_int(section, key, raw)
    return StudyConfig(**kwargs)


def _study_problem(kind: str, N: int | None, config: StudyConfig) -> coeff.ProblemData:
    if kind == "rough":
        return coeff.rough_problem(N, T=config.T, rho=config.rho)
    if kind == "hom":
        return coeff.homogenised_problem(T=config.T, rho=config.rho)
    raise ValueError(f"unknown problem kind {kind!r}")


def _reference_path(kind: str, N: int | None, config: StudyConfig) -> str:
    name = f"ref_rough_N{N}.txt" if kind == "rough" else "ref_hom.txt"
    return os.path.join(config.out_dir, name)


def solve_reference(kind: str, N: int | None, config: StudyConfig,
                    log=print) -> DiscreteSolution:
    """Solve (or load from checkpoint) one reference problem.

    The reference uses degree ref_p in space on the configured fine mesh and
    is cached as a text checkpoint unless the configuration disables that.
    """
    path = _reference_path(kind, N, config)
    n_ref = config.reference_space_cells
    m_ref = config.reference_time_cells
    tau_ref = config.T / m_ref
    if config.checkpoint != "never" and os.path.exists(path):
        t0 = time.perf_counter()
        sol = load_solution(path)
        expected = {"n": n_ref, "p": config.ref_p, "q": config.ref_q}
        actual = {k: sol.meta[k] for k in expected}
        if actual != expected or abs(sol.meta["tau"] - tau_ref) > 1e-12:
            raise ValueError(f"checkpoint {path} does not match the requested "
                             f"reference resolution {expected}, found {actual}")
        log(f"[reference {kind}{'' if N is None else f' N={N}'}] loaded checkpoint "
            f"{path} in {time.perf_counter() - t0:.1f}s")
        return sol
    problem = _study_problem(kind, N, config)
    t0 = time.perf_counter()
    sol = run(problem, n=n_ref, p=config.ref_p, q=config.ref_q, tau=tau_ref,
              solver=config.solver)
    log(f"[reference {kind}{'' if N is None else f' N={N}'}] solved "
        f"n={n_ref} p={config.ref_p} slabs={m_ref} "
        f"in {time.perf_counter() - t0:.1f}s")
    n_values = sol.coeffs.size
    if config.checkpoint == "always" or (
            config.checkpoint == "auto" and n_values <= _AUTO_CHECKPOINT_LIMIT):
        os.makedirs(config.out_dir, exist_ok=True)
        t0 = time.perf_counter()
        save_solution(sol, path)
        log(f"[reference] checkpointed to {path} in {time.perf_counter() - t0:.1f}s")
    elif config.checkpoint == "auto":
        log(f"[reference] skipping text checkpoint ({n_values} values exceeds the "
            "auto limit); reference kept in memory only")
    return sol


def run_study(config: StudyConfig, log=print) -> ErrorTable:
    """Full table run: study solves, references, error columns, CSV output.

    Progress lines (with per-row timings) go to ``log`` and are also written
    to ``run.log`` in the output directory.
    """
    os.makedirs(config.out_dir, exist_ok=True)
    lines = []
    sink = log

    def log(message):
        lines.append(str(message))
        sink(message)

    _study_problem("rough", config.n_list[0], config).warn_if_weak_weight(log)

    study_solutions = {}
    lock = Lock()

    def solve_row(N):
        tau = 1.0 / (2 * N)
        t0 = time.perf_counter()
        sol = run(_study_problem("rough", N, config), n=2 * N, p=config.p,
                  q=config.q, tau=tau, solver=config.solver)
        with lock:
            study_solutions[N] = sol
            log(f"[study N={N}] solved n={2 * N} p={config.p} slabs={sol.n_slabs} "
                f"in {time.perf_counter() - t0:.1f}s")

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            list(pool.map(solve_row, config.n_list))
    else:
        for N in config.n_list:
            solve_row(N)

    rough_errors = {}
    for N in config.n_list:
        ref = solve_reference("rough", N, config, log)
        t0 = time.perf_counter()
        rough_errors[N] = compare_solutions(study_solutions[N], ref,
                                            s0_weight=coeff.checkerboard(N),
                                            compensated=False)
        log(f"[errors N={N}] rough comparison in {time.perf_counter() - t0:.1f}s")
        del ref

    hom_ref = solve_reference("hom", None, config, log)
    hom_s0 = coeff.constant(coeff.homogenised_average(coeff.checkerboard(config.n_list[0])))
    hom_errors = {}
    for N in config.n_list:
        t0 = time.perf_counter()
        hom_errors[N] = compare_solutions(study_solutions[N], hom_ref,
                                          s0_weight=hom_s0, compensated=False)
        log(f"[errors N={N}] homogenised comparison in {time.perf_counter() - t0:.1f}s")
    del hom_ref

    # Table columns use the uncompensated E_Q (the discrete L^2_rho norm
    # without the e^{2 rho T} prefactor), which is the normalisation the
    # tabulated study data follows.
    table = ErrorTable()
    for N in config.n_list:
        table.add_row(N, rough_errors[N].e_sup, rough_errors[N].e_q,
                      hom_errors[N].e_sup, hom_errors[N].e_q)
    csv_path = os.path.join(config.out_dir, "table.csv")
    with open(csv_path, "w", newline="") as fh:
        fh.write(table.to_csv())
    log(f"[study] wrote {csv_path}")
    log(table.format_pretty())
    if config.snapshot_times:
        _export_study_snapshots(config, study_solutions, log)
    with open(os.path.join(config.out_dir, "run.log"), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return table


def _export_study_snapshots(config: StudyConfig, study_solutions, log):
    """Rasters of u for every study solution plus the averaged problem."""
    n_hom = 2 * max(config.n_list)
    hom = run(_study_problem("hom", None, config), n=n_hom, p=config.p,
              q=config.q, tau=1.0 / n_hom, solver=config.solver)
    labelled = [(f"u_N{N}", study_solutions[N]) for N in config.n_list]
    labelled.append(("u_hom", hom))
    for label, sol in labelled:
        for t in config.snapshot_times:
            if not 0.0 <= t <= sol.T + 1e-12:
                continue
            base = os.path.join(config.out_dir, f"{label}_t{t}")
            export_snapshot(sol, min(t, sol.T), config.snapshot_resolution, base)
    log(f"[study] wrote snapshots at t = {config.snapshot_times} "
        f"for N = {config.n_list} and the averaged problem")


def export_snapshot(sol: DiscreteSolution, t: float, resolution: int,
                    path_base: str) -> tuple[str, str]:
    """Sample the u component on a uniform raster and write VTK + CSV files.

    The raster uses cell-centred points ((i+0.5)/res, (j+0.5)/res).  Returns
    the two file paths written.
    """
    if not 0.0 <= t <= sol.T + 1e-12:
        raise ValueError(f"snapshot time {t} outside [0, {sol.T}]")
    # sample at cell centres of the raster
    pts_1d = (np.arange(resolution) + 0.5) / resolution
    xx, yy = np.meshgrid(pts_1d, pts_1d, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    if t == 0.0:
        # at the initial instant the state is the datum x0 itself
        coeffs = sol.initial_state if sol.initial_state is not None \
            else np.zeros(sol.coeffs.shape[2])
    else:
        coeffs = sol.coefficients_at(t, "-")
    values = eval_scalar(sol.space_u, coeffs[: sol.ndof_u], pts).reshape(resolution,
                                                                         resolution)
    vtk_path, csv_path = path_base + ".vtk", path_base + ".csv"
    with open(vtk_path, "w") as fh:
        fh.write("# vtk DataFile Version 2.0\n")
        fh.write(f"u at t={t!r}\nASCII\n")
        fh.write("DATASET STRUCTURED_GRID\n")
        fh.write(f"DIMENSIONS {resolution} {resolution} 1\n")
        fh.write(f"POINTS {resolution * resolution} float\n")
        for j in range(resolution):
            for i in range(resolution):
                fh.write(f"{float(pts_1d[i])!r} {float(pts_1d[j])!r} 0\n")
        fh.write(f"POINT_DATA {resolution * resolution}\n")
        fh.write("SCALARS u float\nLOOKUP_TABLE default\n")
        for j in range(resolution):
            for i in range(resolution):
                fh.write(f"{float(values[i, j])!r}\n")
    with open(csv_path, "w", newline="") as fh:
        for j in range(resolution):
            fh.write(",".join(repr(float(values[i, j])) for i in range(resolution)))
            fh.write("\n")
    return vtk_path, csv_path


def single_solve(kind: str, N: int | None, config: StudyConfig,
                 log=print) -> DiscreteSolution:
    """Solve one study-resolution problem (the 'solve' CLI verb)."""
    if kind == "rough" and N is None:
        N = max(config.n_list)
    n = 2 * N if kind == "rough" else 2 * max(config.n_list)
    tau = 1.0 / n
    t0 = time.perf_counter()
    sol = run(_study_problem(kind, N, config), n=n, p=config.p, q=config.q,
              tau=tau, solver=config.solver)
    log(f"[solve {kind}{'' if N is None else f' N={N}'}] n={n} p={config.p} "
        f"slabs={sol.n_slabs} in {time.perf_counter() - t0:.1f}s")
    return sol
