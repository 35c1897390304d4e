"""Gauss-Legendre rules and exponentially weighted right-sided Gauss-Radau rules.

The temporal rules integrate against the weight w(s) = exp(-2*rho*s) on a
slab (0, tau] and always place their last node at the right endpoint s = tau.
All scaling (interval length, weight) is absorbed into the returned weights,
so ``sum(w_i * g(s_i))`` approximates ``int_0^tau g(s) exp(-2 rho s) ds``
directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import exp, expm1, factorial

import numpy as np
import scipy.linalg


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes, weights and algebraic exactness degree of a quadrature rule.

    ``nodes`` has shape (k,) for 1D rules or (k, 2) for tensor rules on the
    unit square; ``weights`` always has shape (k,).
    """

    nodes: np.ndarray
    weights: np.ndarray
    exactness_degree: int

    def __post_init__(self):
        if len(self.weights) != len(self.nodes):
            raise ValueError("node/weight count mismatch")
        if np.any(self.weights <= 0.0):
            raise ValueError("quadrature weights must be strictly positive")
        self.nodes.setflags(write=False)
        self.weights.setflags(write=False)

    def __call__(self, f) -> float:
        vals = f(self.nodes) if callable(f) else np.asarray(f)
        return float(np.dot(self.weights, vals))


def gauss_legendre_1d(k: int) -> QuadratureRule:
    """k-point Gauss-Legendre rule on [0, 1], exact to degree 2k-1."""
    if k < 1:
        raise ValueError(f"need at least one node, got k={k}")
    x, w = np.polynomial.legendre.leggauss(k)
    return QuadratureRule(nodes=(x + 1.0) / 2.0, weights=w / 2.0,
                          exactness_degree=2 * k - 1)


def gauss_legendre_2d(k: int) -> QuadratureRule:
    """Tensor Gauss-Legendre rule on the unit square, k points per direction."""
    r = gauss_legendre_1d(k)
    xx, yy = np.meshgrid(r.nodes, r.nodes, indexing="ij")
    ww = np.outer(r.weights, r.weights)
    return QuadratureRule(nodes=np.column_stack([xx.ravel(), yy.ravel()]),
                          weights=ww.ravel(), exactness_degree=2 * k - 1)


def exponential_moments(rho: float, tau: float, k_max: int) -> np.ndarray:
    """Moments mu_k = int_0^tau s^k exp(-2 rho s) ds for k = 0..k_max.

    For 2*rho*tau >= 1 the forward recurrence
    mu_k = (k mu_{k-1} - tau^k e^{-2 rho tau}) / (2 rho) is used; for smaller
    exponents the recurrence cancels catastrophically and the series
    mu_k = tau^{k+1} sum_j (-2 rho tau)^j / (j! (k+j+1)) is summed instead.
    """
    if tau <= 0.0:
        raise ValueError(f"slab length must be positive, got tau={tau}")
    if rho < 0.0:
        raise ValueError(f"weight rate must be nonnegative, got rho={rho}")
    if k_max < 0:
        raise ValueError(f"k_max must be nonnegative, got k_max={k_max}")
    if not (np.isfinite(rho) and np.isfinite(tau)):
        raise ValueError("rho and tau must be finite")
    z = 2.0 * rho * tau
    mu = np.empty(k_max + 1)
    if rho == 0.0:
        k = np.arange(k_max + 1)
        return tau ** (k + 1) / (k + 1)
    if z >= 1.0:
        decay = exp(-z)
        mu[0] = -expm1(-z) / (2.0 * rho)
        for k in range(1, k_max + 1):
            mu[k] = (k * mu[k - 1] - tau**k * decay) / (2.0 * rho)
    else:
        j = np.arange(30)  # |term_j| <= z^j / j!, far below eps at j=30 for z<1
        jfac = np.array([factorial(int(i)) for i in j], dtype=float)
        for k in range(k_max + 1):
            mu[k] = tau ** (k + 1) * np.sum((-z) ** j / jfac / (k + j + 1))
    if not np.all(np.isfinite(mu)):
        raise OverflowError(f"moment recurrence overflowed for rho={rho}, tau={tau}")
    return mu


def _stieltjes_recurrence(x, w, n):
    """Monic three-term recurrence coefficients of the discrete measure (x, w).

    Returns (alpha[0..n-1], beta[0..n-1]) with beta[0] = sum(w).
    """
    alpha = np.empty(n)
    beta = np.empty(n)
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    norm2 = w.sum()
    beta[0] = norm2
    for j in range(n):
        alpha[j] = np.dot(w, x * p * p) / norm2
        if j + 1 == n:
            break
        p_next = (x - alpha[j]) * p - (beta[j] if j > 0 else 0.0) * p_prev
        norm2_next = np.dot(w, p_next * p_next)
        if norm2_next <= 0.0:
            raise RuntimeError("discrete measure lost positivity in Stieltjes recurrence")
        beta[j + 1] = norm2_next / norm2
        p_prev, p, norm2 = p, p_next, norm2_next
    return alpha, beta


def _monic_value(alpha, beta, degree, x):
    """Value of the monic orthogonal polynomial pi_degree at x."""
    p_prev, p = 0.0, 1.0
    for j in range(degree):
        p_prev, p = p, (x - alpha[j]) * p - (beta[j] if j > 0 else 0.0) * p_prev
    return p


@lru_cache(maxsize=None)
def weighted_gauss_radau(q: int, rho: float, tau: float) -> QuadratureRule:
    """(q+1)-node right-sided Gauss-Radau rule for the weight exp(-2 rho s).

    Exact for all polynomials of degree <= 2q against the weight on [0, tau];
    the last node is tau itself.  Construction: discretised Stieltjes
    procedure for the orthogonal-polynomial recurrence, Radau modification of
    the final recurrence coefficient so that the endpoint is a root, then the
    symmetric tridiagonal (Jacobi matrix) eigenproblem.
    """
    if q < 0:
        raise ValueError(f"polynomial degree must be nonnegative, got q={q}")
    if tau <= 0.0:
        raise ValueError(f"slab length must be positive, got tau={tau}")
    if rho < 0.0:
        raise ValueError(f"weight rate must be nonnegative, got rho={rho}")
    n = q + 1
    # Reference interval [0,1] with weight exp(-2*rho*tau*x); scale at the end.
    c = rho * tau
    aux = gauss_legendre_1d(max(48, 8 * n))
    xd = aux.nodes
    wd = aux.weights * np.exp(-2.0 * c * xd)
    alpha, beta = _stieltjes_recurrence(xd, wd, n)
    if n == 1:
        nodes = np.array([1.0])
        weights = np.array([beta[0]])
    else:
        pi_nm1 = _monic_value(alpha, beta, n - 1, 1.0)
        pi_nm2 = _monic_value(alpha, beta, n - 2, 1.0)
        if pi_nm1 == 0.0:
            raise RuntimeError(f"Radau endpoint modification failed for (q={q}, rho={rho}, tau={tau})")
        alpha_star = 1.0 - beta[n - 1] * pi_nm2 / pi_nm1
        diag = np.concatenate([alpha[: n - 1], [alpha_star]])
        off = np.sqrt(beta[1:n])
        try:
            eigvals, eigvecs = scipy.linalg.eigh_tridiagonal(diag, off)
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as err:
            raise RuntimeError(f"Radau node eigensolve failed for (q={q}, rho={rho}, tau={tau})") from err
        order = np.argsort(eigvals)
        nodes = eigvals[order]
        weights = beta[0] * eigvecs[0, order] ** 2
        # The endpoint is a node by construction; snap away the eigensolver's
        # last-digit noise so downstream trace logic can rely on it.
        if abs(nodes[-1] - 1.0) > 1e-10:
            raise RuntimeError(f"endpoint drifted off the node set for (q={q}, rho={rho}, tau={tau})")
        nodes[-1] = 1.0
    return QuadratureRule(nodes=nodes * tau, weights=weights * tau,
                          exactness_degree=2 * q)
