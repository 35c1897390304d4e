"""Discontinuous-Galerkin-in-time slab iteration.

On each time slab the discrete state is a degree-q polynomial with FE
coefficients, represented by its values at the q+1 weighted Gauss-Radau
nodes (the right slab endpoint is always a node).  Testing against the same
basis and applying the weighted Radau rule turns one slab into the block
linear system

    sum_i K[j,i] M0 U_i + w_j C U_j = w_j F_j + l_j(0) M0 U_prev

with K[j,i] = w_j l_i'(s_j) + l_i(0) l_j(0), C = M1 + A, and U_prev the
previous slab's right trace (or the initial state on the first slab).  The
quadrature is exact for all products of slab polynomials, and testing with
the nodal Lagrange basis makes the temporal mass matrix diagonal.

The slab matrix is identical for every slab, so it is factorised once.  Two
factorisation strategies are available: ``direct`` factors the full
(q+1)-fold block system; ``decoupled`` diagonalises the small temporal
coupling matrix and factors one spatial system per eigenvalue (complex
conjugate pairs share a factorisation), which is much lighter for large
meshes.  Both produce the same solution up to round-off.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse
import scipy.sparse.linalg as spla

from .assembly import BlockSystem, assemble_load, build_block_system
from .coefficients import ProblemData, SeparableSource
from .mesh import build_mesh
from .quadrature import weighted_gauss_radau
from .spaces import FieldPair, Lagrange1D, ScalarSpace, VectorSpace


class SlabBasis:
    """Lagrange time basis at the weighted Radau nodes of one slab."""

    def __init__(self, q: int, rho: float, tau: float):
        rule = weighted_gauss_radau(q, rho, tau)
        self.q = q
        self.rho = rho
        self.tau = tau
        self.nodes = rule.nodes                    # in (0, tau], last = tau
        self.weights = rule.weights
        self.lagrange = Lagrange1D(self.nodes)
        self.left_values = self.lagrange.values(np.array([0.0]))[0]
        self.deriv_at_nodes = self.lagrange.derivatives(self.nodes)  # [j, i] = l_i'(s_j)

    def values_at(self, s: float) -> np.ndarray:
        return self.lagrange.values(np.array([float(s)]))[0]


@dataclass(frozen=True)
class TimeMatrices:
    """Temporal coupling K, diagonal temporal mass, and jump vector."""

    K: np.ndarray
    Mt: np.ndarray
    jump: np.ndarray


def time_matrices(basis: SlabBasis) -> TimeMatrices:
    K = basis.weights[:, None] * basis.deriv_at_nodes \
        + np.outer(basis.left_values, basis.left_values)
    return TimeMatrices(K=K, Mt=np.diag(basis.weights), jump=basis.left_values.copy())


def build_slab_system(blocks: BlockSystem, basis: SlabBasis) -> sparse.csr_matrix:
    """The full slab matrix kron(K, M0) + kron(diag(w), M1 + A)."""
    tm = time_matrices(basis)
    m0 = blocks.m0()
    coupling = blocks.coupling()
    return (sparse.kron(sparse.csr_matrix(tm.K), m0)
            + sparse.kron(sparse.diags(basis.weights), coupling)).tocsr()


# the slab matrices have symmetric sparsity structure (masses plus the
# B_div/B_grad transpose pair), where SuperLU's symmetric mode gives an
# order-of-magnitude less fill than the default column ordering
_SPLU_OPTIONS = dict(permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.01,
                     options=dict(SymmetricMode=True))


def _factor(matrix):
    try:
        return spla.splu(matrix, **_SPLU_OPTIONS)
    except RuntimeError as err:
        raise RuntimeError("slab matrix factorisation failed (singular or "
                           f"ill-posed data): {err}") from err


class _DirectFactorisation:
    def __init__(self, blocks: BlockSystem, basis: SlabBasis):
        self._lu = _factor(build_slab_system(blocks, basis).tocsc())
        self._shape = (basis.q + 1, blocks.ndof)

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return self._lu.solve(rhs.ravel()).reshape(self._shape)


class _DecoupledFactorisation:
    """Diagonalise the temporal coupling; factor one spatial system per eigenvalue."""

    def __init__(self, blocks: BlockSystem, basis: SlabBasis):
        tm = time_matrices(basis)
        ktil = tm.K / basis.weights[:, None]
        lam, vmat = np.linalg.eig(ktil)
        vinv = np.linalg.inv(vmat)
        # enforce the exact conjugate-pair structure so that real input data
        # provably yields conjugate partial solutions
        used = np.zeros(len(lam), dtype=bool)
        self._plan = []   # (index, partner or None, real flag)
        for i in range(len(lam)):
            if used[i]:
                continue
            used[i] = True
            if abs(lam[i].imag) < 1e-12 * max(1.0, abs(lam[i])):
                lam[i] = lam[i].real
                vmat[:, i] = vmat[:, i].real
                vinv[i] = vinv[i].real
                self._plan.append((i, None, True))
                continue
            partner = None
            for j in range(i + 1, len(lam)):
                if not used[j] and abs(lam[j] - lam[i].conjugate()) < 1e-8 * abs(lam[i]):
                    partner = j
                    break
            if partner is None:
                raise RuntimeError("temporal eigenvalues do not pair up; "
                                   "use the direct solver")
            used[partner] = True
            lam[partner] = lam[i].conjugate()
            vmat[:, partner] = vmat[:, i].conjugate()
            vinv[partner] = vinv[i].conjugate()
            self._plan.append((i, partner, False))
        resid = np.abs(vmat @ vinv - np.eye(len(lam))).max()
        if not np.isfinite(resid) or resid > 1e-8:
            raise RuntimeError("temporal eigenbasis too ill-conditioned "
                               f"(residual {resid:.2e}); use the direct solver")
        self._lam, self._vmat, self._vinv = lam, vmat, vinv
        self._weights = basis.weights
        m0 = blocks.m0().tocsc()
        coupling = blocks.coupling().tocsc()
        self._lus = {}
        for i, partner, is_real in self._plan:
            mat = float(lam[i].real) * m0 + coupling if is_real else \
                complex(lam[i]) * m0.astype(np.complex128) + coupling.astype(np.complex128)
            self._lus[i] = _factor(mat.tocsc())

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        scaled = rhs / self._weights[:, None]
        transformed = self._vinv @ scaled
        out = np.empty_like(transformed)
        for i, partner, is_real in self._plan:
            if is_real:
                out[i] = self._lus[i].solve(transformed[i].real)
            else:
                y = self._lus[i].solve(transformed[i])
                out[i] = y
                out[partner] = y.conjugate()
        result = self._vmat @ out
        return np.ascontiguousarray(result.real)


def _make_factorisation(blocks: BlockSystem, basis: SlabBasis, method: str):
    if method == "auto":
        stacked = (basis.q + 1) * blocks.ndof
        method = "direct" if stacked <= 120_000 else "decoupled"
    if method == "direct":
        return _DirectFactorisation(blocks, basis)
    if method == "decoupled":
        return _DecoupledFactorisation(blocks, basis)
    raise ValueError(f"unknown solver method {method!r}")


def solve_slab(factorisation, basis: SlabBasis, blocks: BlockSystem,
               prev_trace: np.ndarray, loads: np.ndarray,
               m0=None) -> np.ndarray:
    """One slab solve: loads has shape (q+1, ndof), prev_trace shape (ndof,).

    Returns the nodal coefficient array of shape (q+1, ndof).  Passing the
    assembled ``m0`` avoids rebuilding the block-diagonal matrix per slab.
    """
    rhs = basis.weights[:, None] * loads
    jump_flux = (blocks.m0() if m0 is None else m0) @ prev_trace
    rhs += np.outer(basis.left_values, jump_flux)
    return factorisation.solve(rhs)


@dataclass
class DiscreteSolution:
    """Per-slab nodal trajectories of one space-time solve.

    ``initial_state`` is the datum x0 the first slab was coupled to; the
    trajectory itself lives on (0, T] (its value at 0+ is the first left
    trace, which differs from x0 by the first jump).
    """

    space_u: ScalarSpace
    space_v: VectorSpace
    basis: SlabBasis
    coeffs: np.ndarray          # (M, q+1, ndof_u + ndof_v)
    rho: float
    meta: dict = field(default_factory=dict)
    initial_state: np.ndarray | None = None

    @property
    def n_slabs(self) -> int:
        return self.coeffs.shape[0]

    @property
    def tau(self) -> float:
        return self.basis.tau

    @property
    def T(self) -> float:
        return self.n_slabs * self.basis.tau

    @property
    def ndof_u(self) -> int:
        return self.space_u.ndof

    def _check_slab(self, m: int):
        if not 0 <= m < self.n_slabs:
            raise IndexError(f"slab index {m} out of range [0, {self.n_slabs})")

    def right_trace(self, m: int) -> FieldPair:
        self._check_slab(m)
        return FieldPair.split(self.coeffs[m, -1], self.ndof_u)

    def left_trace(self, m: int) -> FieldPair:
        self._check_slab(m)
        vec = self.basis.left_values @ self.coeffs[m]
        return FieldPair.split(vec, self.ndof_u)

    def final_trace(self) -> FieldPair:
        return self.right_trace(self.n_slabs - 1)

    def coefficients_at(self, t: float, side: str = "-") -> np.ndarray:
        """Coefficient vector at time t; ``side`` picks the one-sided limit
        at slab boundaries ('-' from below, '+' from above)."""
        if side not in ("-", "+"):
            raise ValueError(f"side must be '-' or '+', got {side!r}")
        if t < -1e-12 or t > self.T + 1e-12:
            raise ValueError(f"time {t} outside [0, {self.T}]")
        r = t / self.tau
        nearest = int(round(r))
        if abs(r - nearest) < 1e-9:
            if side == "+":
                if nearest >= self.n_slabs:
                    raise ValueError(f"right-sided limit undefined at final time {t}")
                return self.basis.left_values @ self.coeffs[nearest]
            if nearest == 0:
                raise ValueError("left-sided limit undefined at t = 0")
            return self.coeffs[nearest - 1, -1].copy()
        m = min(int(r), self.n_slabs - 1)
        local = t - m * self.tau
        return self.basis.values_at(local) @ self.coeffs[m]

    def state_at(self, t: float, side: str = "-") -> FieldPair:
        return FieldPair.split(self.coefficients_at(t, side), self.ndof_u)


def left_trace(solution: DiscreteSolution, m: int) -> FieldPair:
    return solution.left_trace(m)


def right_trace(solution: DiscreteSolution, m: int) -> FieldPair:
    return solution.right_trace(m)


class _LoadStack:
    """Load vectors <F(t), Phi> for the scalar-source problem; for separable
    sources the spatial factor is assembled once."""

    def __init__(self, blocks: BlockSystem, problem_source, quad_points):
        self._blocks = blocks
        self._source = problem_source
        self._quad_points = quad_points
        self._spatial = None
        if isinstance(problem_source, SeparableSource):
            self._spatial = assemble_load(blocks.space_u,
                                          lambda t, x, y: problem_source.spatial(x, y),
                                          0.0, quad_points)

    def __call__(self, times) -> np.ndarray:
        ndof_u = self._blocks.space_u.ndof
        loads = np.zeros((len(times), self._blocks.ndof))
        for idx, t in enumerate(times):
            if self._spatial is not None:
                loads[idx, :ndof_u] = self._source.time_factor(float(t)) * self._spatial
            else:
                loads[idx, :ndof_u] = assemble_load(self._blocks.space_u, self._source,
                                                    float(t), self._quad_points)
        return loads


def run(problem: ProblemData, n: int, p: int, q: int, tau: float,
        x0: FieldPair | None = None, *, solver: str = "auto",
        load_quad_points: int | None = None,
        discrete_forcing: np.ndarray | None = None,
        blocks: BlockSystem | None = None) -> DiscreteSolution:
    """Solve the evolutionary problem on [0, T] with M = T/tau uniform slabs.

    ``discrete_forcing`` (shape (M, q+1, ndof_u + ndof_v)) replaces the
    problem source by a right-hand side given through its coefficients in
    the discrete space; this is how vector-valued or random discrete data is
    fed in.  ``x0`` defaults to rest.
    """
    T = problem.T
    n_slabs = int(round(T / tau))
    if abs(n_slabs * tau - T) > 1e-9 * max(T, 1.0) or n_slabs < 1:
        raise ValueError(f"final time {T} is not an integer multiple of tau={tau}")
    if blocks is None:
        mesh = build_mesh(n)
        space_u = ScalarSpace(mesh, p)
        space_v = VectorSpace(mesh, p)
        blocks = build_block_system(space_u, space_v, problem.s0, problem.s1)
    basis = SlabBasis(q, problem.rho, tau)
    fact = _make_factorisation(blocks, basis, solver)
    ndof = blocks.ndof
    if x0 is None:
        prev = np.zeros(ndof)
    else:
        prev = x0.concat()
        if prev.shape != (ndof,):
            raise ValueError(f"initial state has {prev.shape[0]} coefficients, expected {ndof}")
    mass_full = blocks.m_unweighted() if discrete_forcing is not None else None
    load_stack = None if discrete_forcing is not None else \
        _LoadStack(blocks, problem.source, load_quad_points)
    m0 = blocks.m0()
    coeffs = np.empty((n_slabs, q + 1, ndof))
    for m in range(n_slabs):
        node_times = m * tau + basis.nodes
        node_times[-1] = (m + 1) * tau
        if discrete_forcing is not None:
            loads = (mass_full @ discrete_forcing[m].T).T
        else:
            loads = load_stack(node_times)
        coeffs[m] = solve_slab(fact, basis, blocks, prev, loads, m0=m0)
        prev = coeffs[m, -1]
    return DiscreteSolution(space_u=blocks.space_u, space_v=blocks.space_v,
                            basis=basis, coeffs=coeffs, rho=problem.rho,
                            meta={"n": n, "p": p, "q": q, "tau": tau,
                                  "T": T, "rho": problem.rho},
                            initial_state=x0.concat() if x0 is not None
                            else np.zeros(ndof))


def save_solution(sol: DiscreteSolution, path) -> None:
    """Checkpoint a solution as plain text (metadata header + one line of
    shortest-roundtrip floats per slab node)."""
    with open(path, "w") as fh:
        fh.write("parahyp-solution 1\n")
        for key in ("n", "p", "q", "tau", "T", "rho"):
            fh.write(f"{key} {sol.meta[key]!r}\n")
        fh.write(f"slabs {sol.n_slabs}\n")
        fh.write(f"ndof_u {sol.space_u.ndof}\n")
        fh.write(f"ndof_v {sol.space_v.ndof}\n")
        fh.write("initial\n")
        x0 = sol.initial_state if sol.initial_state is not None \
            else np.zeros(sol.coeffs.shape[2])
        fh.write(" ".join(repr(float(v)) for v in x0))
        fh.write("\n")
        for m in range(sol.n_slabs):
            for i in range(sol.basis.q + 1):
                fh.write(f"slab {m} node {i}\n")
                # repr of Python floats is the shortest exact round-trip form
                fh.write(" ".join(repr(float(v)) for v in sol.coeffs[m, i]))
                fh.write("\n")


def load_solution(path) -> DiscreteSolution:
    """Rebuild a checkpointed solution (exact round-trip of save_solution)."""
    with open(path) as fh:
        magic = fh.readline().strip()
        if magic != "parahyp-solution 1":
            raise ValueError(f"{path}: not a solution checkpoint (header {magic!r})")
        meta = {}
        for key in ("n", "p", "q", "tau", "T", "rho"):
            name, value = fh.readline().split()
            if name != key:
                raise ValueError(f"{path}: expected metadata key {key}, got {name}")
            meta[key] = float(value) if key in ("tau", "T", "rho") else int(value)
        n_slabs = int(fh.readline().split()[1])
        ndof_u = int(fh.readline().split()[1])
        ndof_v = int(fh.readline().split()[1])
        if fh.readline().strip() != "initial":
            raise ValueError(f"{path}: missing initial-state record")
        x0 = np.array(fh.readline().split(), dtype=float)
        if x0.shape != (ndof_u + ndof_v,):
            raise ValueError(f"{path}: malformed initial-state record")
        mesh = build_mesh(meta["n"])
        space_u = ScalarSpace(mesh, meta["p"])
        space_v = VectorSpace(mesh, meta["p"])
        if (space_u.ndof, space_v.ndof) != (ndof_u, ndof_v):
            raise ValueError(f"{path}: checkpoint dimensions do not match its metadata")
        basis = SlabBasis(meta["q"], meta["rho"], meta["tau"])
        coeffs = np.empty((n_slabs, meta["q"] + 1, ndof_u + ndof_v))
        for m in range(n_slabs):
            for i in range(meta["q"] + 1):
                tag = fh.readline().split()
                if tag[:4:2] != ["slab", "node"] or (int(tag[1]), int(tag[3])) != (m, i):
                    raise ValueError(f"{path}: malformed record around slab {m} node {i}")
                row = np.array(fh.readline().split(), dtype=float)
                if row.shape != (ndof_u + ndof_v,):
                    raise ValueError(f"{path}: truncated coefficient record at slab {m}")
                coeffs[m, i] = row
    return DiscreteSolution(space_u=space_u, space_v=space_v, basis=basis,
                            coeffs=coeffs, rho=meta["rho"], meta=meta,
                            initial_state=x0)
