"""Error functionals, convergence orders and cross-resolution comparison.

Two functionals measure a space-time deviation a(t):

* ``E_sup``: sup over sample times of the M0-weighted spatial form
  <M0 a(t), a(t)> = int s0 |a_u|^2 + |a_v|^2, sampled at every slab's
  weighted Radau nodes and left traces.
* ``E_Q``: the exponentially weighted discrete space-time norm
  e^{2 rho T} sum_m e^{-2 rho t_{m-1}} Q_m(a, a) with the slab quadrature
  Q_m; for members of the discrete space this is exactly the norm induced
  by the scheme.

Cross-resolution comparisons evaluate both solutions pointwise on a tensor
Gauss grid per cell of the finer (nested) mesh, so the spatial quadrature
is exact for the polynomial difference; the temporal samples are the coarse
run's Radau nodes and traces.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .coefficients import CoefficientField
from .quadrature import gauss_legendre_1d
from .slab import DiscreteSolution


def eoc(e_n: float, e_2n: float) -> float:
    """Experimental order of convergence ln(E_n / E_2n) / ln 2."""
    if e_n <= 0.0 or e_2n <= 0.0:
        raise ValueError(f"eoc needs positive errors, got ({e_n}, {e_2n})")
    return math.log(e_n / e_2n) / math.log(2.0)


def e_sup_from_samples(samples) -> float:
    """sqrt of the largest quadratic-form sample."""
    samples = np.asarray(list(samples), dtype=float)
    if samples.size == 0:
        raise ValueError("E_sup needs at least one sample time")
    return float(np.sqrt(samples.max()))


def e_q_from_slab_terms(slab_terms, rho: float, tau: float,
                        compensated: bool = True) -> float:
    """Assemble E_Q from the per-slab quadrature values Q_m(a, a).

    ``compensated`` includes the e^{2 rho T} prefactor of the written
    definition.  The tabulated study values are reproduced by the plain
    exponentially weighted sum (compensated=False), which is the discrete
    L^2_rho(0, T) norm itself; the prefactor rescales every entry by
    e^{rho T} and cancels from all convergence orders.
    """
    slab_terms = np.asarray(list(slab_terms), dtype=float)
    n_slabs = slab_terms.size
    t_left = np.arange(n_slabs) * tau
    total = np.sum(np.exp(-2.0 * rho * t_left) * slab_terms)
    if compensated:
        total *= np.exp(2.0 * rho * n_slabs * tau)
    return float(np.sqrt(total))


@dataclass
class ErrorReport:
    e_sup: float
    e_q: float
    meta: dict = field(default_factory=dict)


@dataclass
class ErrorTable:
    """Rows (N, E_sup_rough, E_Q_rough, E_sup_hom, E_Q_hom) plus derived eocs."""

    rows: list = field(default_factory=list)
    columns = ("e_sup_rough", "e_q_rough", "e_sup_hom", "e_q_hom")

    def add_row(self, N: int, e_sup_rough: float, e_q_rough: float,
                e_sup_hom: float, e_q_hom: float):
        self.rows.append({"N": N, "e_sup_rough": e_sup_rough,
                          "e_q_rough": e_q_rough, "e_sup_hom": e_sup_hom,
                          "e_q_hom": e_q_hom})

    def eoc_rows(self) -> list:
        """Per row, dict of column -> eoc against the previous row (None in row 0)."""
        out = []
        for idx, row in enumerate(self.rows):
            if idx == 0:
                out.append({c: None for c in self.columns})
            else:
                prev = self.rows[idx - 1]
                out.append({c: eoc(prev[c], row[c]) for c in self.columns})
        return out

    def to_csv(self) -> str:
        lines = ["N,E_sup_rough,eoc,E_Q_rough,eoc,E_sup_hom,eoc,E_Q_hom,eoc"]
        for row, eocs in zip(self.rows, self.eoc_rows()):
            cells = [str(row["N"])]
            for col in self.columns:
                cells.append(f"{row[col]:.3e}")
                cells.append("" if eocs[col] is None else f"{eocs[col]:.2f}")
            lines.append(",".join(cells))
        return "\n".join(lines) + "\n"

    def format_pretty(self) -> str:
        header = (f"{'N':>4} {'E_sup(rough)':>13} {'eoc':>6} {'E_Q(rough)':>13} "
                  f"{'eoc':>6} {'E_sup(hom)':>13} {'eoc':>6} {'E_Q(hom)':>13} {'eoc':>6}")
        lines = [header]
        for row, eocs in zip(self.rows, self.eoc_rows()):
            cells = [f"{row['N']:>4}"]
            for col in self.columns:
                cells.append(f"{row[col]:>13.3e}")
                cells.append("      " if eocs[col] is None else f"{eocs[col]:>6.2f}")
            lines.append(" ".join(cells))
        return "\n".join(lines)


def _sample_times(sol: DiscreteSolution):
    """(time, side, kind) samples: left trace plus Radau nodes per slab."""
    samples = []
    for m in range(sol.n_slabs):
        t_left = m * sol.tau
        samples.append((t_left, "+", "trace"))
        for i, s in enumerate(sol.basis.nodes):
            t = (m + 1) * sol.tau if i == len(sol.basis.nodes) - 1 else t_left + s
            samples.append((t, "-", (m, i)))
    return samples


class _CellGridEvaluator:
    """Evaluate a discrete solution on a fixed tensor Gauss grid of a nested
    evaluation mesh (the finer of the two meshes being compared)."""

    def __init__(self, sol: DiscreteSolution, eval_n: int, points_1d: np.ndarray):
        n = sol.space_u.mesh.n
        if eval_n % n != 0:
            raise ValueError(f"evaluation mesh n={eval_n} does not nest solution mesh n={n}")
        self.sol = sol
        self.ratio = eval_n // n
        self.eval_n = eval_n
        g = len(points_1d)
        r = self.ratio
        # relative coordinates within a solution cell, one set per offset class
        xi = (points_1d[None, :] + np.arange(r)[:, None]) / r      # (r, G)
        self.tab_u = []
        self.tab_v = []
        for oj in range(r):
            for oi in range(r):
                px, py = np.meshgrid(xi[oi], xi[oj], indexing="ij")
                vals, _, _ = sol.space_u.basis_tables(px.ravel(), py.ravel())
                vx, vy, _ = sol.space_v.basis_tables(px.ravel(), py.ravel())
                self.tab_u.append(vals)
                self.tab_v.append((vx, vy))
        # evaluation cell (I, J) -> solution cell and offset class
        I, J = np.meshgrid(np.arange(eval_n), np.arange(eval_n), indexing="ij")
        self.sol_cell = ((J // r) * n + (I // r)).T.ravel()        # flat index j*eval_n+i
        self.cls = ((J % r) * r + (I % r)).T.ravel()
        self.g2 = g * g

    def values_at(self, t: float, side: str):
        """u values (cells, G^2) and v values (cells, G^2, 2) on the grid."""
        coeffs = self.sol.coefficients_at(t, side)
        cu = coeffs[: self.sol.ndof_u][self.sol.space_u.cell_dofs]
        cv = coeffs[self.sol.ndof_u:][self.sol.space_v.cell_dofs]
        n_eval_cells = self.eval_n ** 2
        u = np.empty((n_eval_cells, self.g2))
        v = np.empty((n_eval_cells, self.g2, 2))
        for cls_id in range(self.ratio ** 2):
            mask = self.cls == cls_id
            if not mask.any():
                continue
            rows = self.sol_cell[mask]
            u[mask] = cu[rows] @ self.tab_u[cls_id].T
            vx, vy = self.tab_v[cls_id]
            v[mask, :, 0] = cv[rows] @ vx.T
            v[mask, :, 1] = cv[rows] @ vy.T
        return u, v


def compare_solutions(coarse: DiscreteSolution, reference: DiscreteSolution,
                      s0_weight: CoefficientField, rho: float | None = None,
                      compensated: bool = True) -> ErrorReport:
    """E_sup and E_Q of (reference - coarse) on the coarse discretisation.

    The reference must be nested: its mesh refines the coarse mesh and its
    slab length divides the coarse slab length.  ``s0_weight`` supplies the
    s0 used in the M0-weighted E_sup form.
    """
    n_c = coarse.space_u.mesh.n
    n_r = reference.space_u.mesh.n
    if n_r % n_c != 0:
        raise ValueError(f"reference mesh n={n_r} does not refine coarse mesh n={n_c}")
    ratio_t = coarse.tau / reference.tau
    if abs(ratio_t - round(ratio_t)) > 1e-9 or round(ratio_t) < 1:
        raise ValueError(f"reference slab length {reference.tau} does not divide "
                         f"coarse slab length {coarse.tau}")
    if abs(coarse.T - reference.T) > 1e-9 * max(coarse.T, 1.0):
        raise ValueError("solutions cover different time windows")
    rho = coarse.rho if rho is None else rho

    g = max(coarse.space_u.p, reference.space_u.p) + 1
    rule = gauss_legendre_1d(g)
    w2 = np.outer(rule.weights, rule.weights).ravel() / n_r**2   # physical cell weights
    ev_c = _CellGridEvaluator(coarse, n_r, rule.nodes)
    ev_r = _CellGridEvaluator(reference, n_r, rule.nodes)
    s0_cells = s0_weight.cell_values(reference.space_u.mesh)

    sup_samples = []
    slab_terms = np.zeros(coarse.n_slabs)
    for t, side, kind in _sample_times(coarse):
        uc, vc = ev_c.values_at(t, side)
        ur, vr = ev_r.values_at(t, side)
        du = ur - uc
        dv = vr - vc
        u_sq = (du**2) @ w2                      # per-cell u integrals
        v_sq = np.einsum("cgk,g->c", dv**2, w2)
        sup_samples.append(float(s0_cells @ u_sq + v_sq.sum()))
        if kind != "trace":
            m, i = kind
            slab_terms[m] += coarse.basis.weights[i] * float(u_sq.sum() + v_sq.sum())
    return ErrorReport(
        e_sup=e_sup_from_samples(sup_samples),
        e_q=e_q_from_slab_terms(slab_terms, rho, coarse.tau, compensated),
        meta={"n_coarse": n_c, "n_reference": n_r, "rho": rho,
              "tau_coarse": coarse.tau, "tau_reference": reference.tau,
              "p_coarse": coarse.space_u.p, "p_reference": reference.space_u.p})


def compare_to_exact(sol: DiscreteSolution, exact_u, exact_v,
                     s0_weight: CoefficientField, rho: float | None = None,
                     quad_points: int | None = None,
                     compensated: bool = True) -> ErrorReport:
    """E_sup/E_Q of (exact - discrete) for a known smooth space-time solution.

    ``exact_u(t, x, y)`` and ``exact_v(t, x, y) -> (vx, vy)`` are evaluated
    on a per-cell Gauss grid fine enough that the quadrature error is far
    below the discretisation error being measured.
    """
    rho = sol.rho if rho is None else rho
    n = sol.space_u.mesh.n
    g = quad_points or (sol.space_u.p + 3)
    rule = gauss_legendre_1d(g)
    w2 = np.outer(rule.weights, rule.weights).ravel() / n**2
    ev = _CellGridEvaluator(sol, n, rule.nodes)
    s0_cells = s0_weight.cell_values(sol.space_u.mesh)
    # physical coordinates of the grid, cells flattened like the evaluator
    grid = np.arange(n) / n
    px, py = np.meshgrid(rule.nodes, rule.nodes, indexing="ij")
    px, py = px.ravel() / n, py.ravel() / n
    X = (grid[None, :, None] + px[None, None, :]).reshape(1, -1, len(px))
    Y = (grid[:, None, None] + py[None, None, :]).reshape(-1, 1, len(px))
    X = np.broadcast_to(X, (n, n, len(px))).reshape(-1, len(px))
    Y = np.broadcast_to(Y, (n, n, len(px))).reshape(-1, len(px))

    sup_samples = []
    slab_terms = np.zeros(sol.n_slabs)
    for t, side, kind in _sample_times(sol):
        uh, vh = ev.values_at(t, side)
        du = np.asarray(exact_u(t, X, Y), dtype=float) - uh
        ex_vx, ex_vy = exact_v(t, X, Y)
        dv0 = np.asarray(ex_vx, dtype=float) - vh[:, :, 0]
        dv1 = np.asarray(ex_vy, dtype=float) - vh[:, :, 1]
        u_sq = (du**2) @ w2
        v_sq = (dv0**2) @ w2 + (dv1**2) @ w2
        sup_samples.append(float(s0_cells @ u_sq + v_sq.sum()))
        if kind != "trace":
            m, i = kind
            slab_terms[m] += sol.basis.weights[i] * float(u_sq.sum() + v_sq.sum())
    return ErrorReport(
        e_sup=e_sup_from_samples(sup_samples),
        e_q=e_q_from_slab_terms(slab_terms, rho, sol.tau, compensated),
        meta={"n": n, "rho": rho, "tau": sol.tau})


def e_sup_discrete(diff: DiscreteSolution, mu0, mv) -> float:
    """E_sup of a discrete space-time function given through its coefficients."""
    samples = []
    nu = diff.ndof_u
    for t, side, _ in _sample_times(diff):
        c = diff.coefficients_at(t, side)
        samples.append(c[:nu] @ (mu0 @ c[:nu]) + c[nu:] @ (mv @ c[nu:]))
    return e_sup_from_samples(samples)


def e_q_discrete(diff: DiscreteSolution, mu_unweighted, mv,
                 compensated: bool = True) -> float:
    """E_Q of a discrete space-time function; equals its scheme-induced norm."""
    nu = diff.ndof_u
    terms = np.zeros(diff.n_slabs)
    for m in range(diff.n_slabs):
        for i, w in enumerate(diff.basis.weights):
            c = diff.coeffs[m, i]
            terms[m] += w * (c[:nu] @ (mu_unweighted @ c[:nu]) + c[nu:] @ (mv @ c[nu:]))
    return e_q_from_slab_terms(terms, diff.rho, diff.tau, compensated)
