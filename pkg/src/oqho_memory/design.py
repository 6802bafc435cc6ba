"""Optimal energy matrix for a fixed coupling (Theorem-1-style stationarity).

For fixed coupling N, the quadratic coefficient ddot(Delta) of the
deviation is convex in the symmetric energy matrix R, and R maximizes the
quadratic decoherence-time approximation iff

    Theta Sigma Theta R P + P R Theta Sigma Theta + K = 0,
    K = (1/4) (Theta Sigma (B B^T + 2 Atilde P) - (B B^T + 2 P Atilde^T) Sigma Theta).

With P > 0 and Sigma > 0 the equation is solved through the algebraic
Lyapunov equation for G = P R P with the Hurwitz coefficient
Theta Sigma Theta P^{-1}; otherwise a minimum-norm least-squares solve on
the symmetric subspace is used and the residual reported.
"""

from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError
from .model import build_realization, ito_j, OqhoParams
from .numerics import LinearMatrixEquation, solve_lyapunov, solve_symmetric_constrained, sqrt_psd
from .errors import ResonanceError

__all__ = [
    "EnergyOptimum",
    "k_matrix",
    "optimal_energy_matrix",
    "grad_ddot_delta_wrt_energy",
    "zero_hamiltonian_condition",
    "a_hat_minimizer",
    "ddot_delta_of_state",
    "ddot_delta_of_energy",
    "ddot_delta_quad_form",
]


@dataclass(frozen=True)
class EnergyOptimum:
    r_star: np.ndarray
    k_matrix: np.ndarray
    stationarity_residual: float
    ddot_delta_at_opt: float
    method: str  # "ALE" or "LeastSquares"
    null_space_dim: int = 0


def _sym(x):
    return 0.5 * (x + x.T)


def ddot_delta_of_state(a, b, weighting, moments):
    """<Sigma, A B B^T + B B^T A^T + 2 A P A^T> for raw state matrices."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    bbt = b @ b.T
    return float(np.sum(weighting.sigma * (a @ bbt + bbt @ a.T + 2.0 * a @ moments.p @ a.T)))


def ddot_delta_of_energy(r, ccr, weighting, coupling_n, moments):
    """ddot(Delta) as a function of the energy matrix for fixed coupling."""
    real = build_realization(OqhoParams(ccr=ccr, energy=r, coupling=coupling_n,
                                        selector=np.eye(coupling_n.shape[0])))
    return ddot_delta_of_state(real.a, real.b, weighting, moments)


def k_matrix(ccr, weighting, b, a_tilde, moments):
    """Constant term of the stationarity equation (symmetric by construction)."""
    theta = ccr.theta
    sigma = weighting.sigma
    b = np.asarray(b, dtype=float)
    a_tilde = np.asarray(a_tilde, dtype=float)
    bbt = b @ b.T
    p = moments.p
    k = 0.25 * (theta @ sigma @ (bbt + 2.0 * a_tilde @ p)
                - (bbt + 2.0 * p @ a_tilde.T) @ sigma @ theta)
    return _sym(k)


def grad_ddot_delta_wrt_energy(ccr, weighting, system, moments):
    """Gradient of ddot(Delta) in R: -4 sym(Theta Sigma (B B^T + 2 A P))."""
    a = np.asarray(system.a, dtype=float)
    b = np.asarray(system.b, dtype=float)
    theta = ccr.theta
    sigma = weighting.sigma
    return -4.0 * _sym(theta @ sigma @ (b @ b.T + 2.0 * a @ moments.p))


def _stationarity_operator(ccr, weighting, moments):
    tst = ccr.theta @ weighting.sigma @ ccr.theta
    p = moments.p
    return lambda r: tst @ r @ p + p @ r @ tst, tst


def optimal_energy_matrix(ccr, weighting, coupling_n, moments):
    """Energy matrix maximizing the quadratic decoherence-time approximation."""
    coupling_n = np.asarray(coupling_n, dtype=float)
    n = ccr.n
    m = coupling_n.shape[0]
    j = ito_j(m)
    b = 2.0 * ccr.theta @ coupling_n.T
    a_tilde = 2.0 * ccr.theta @ coupling_n.T @ j @ coupling_n
    k = k_matrix(ccr, weighting, b, a_tilde, moments)

    op, tst = _stationarity_operator(ccr, weighting, moments)
    p = moments.p

    sigma_pd = np.min(np.linalg.eigvalsh(weighting.sigma)) > 1e-12
    p_pd = np.min(np.linalg.eigvalsh(p)) > 1e-12
    r_star = None
    method = "LeastSquares"
    null_dim = 0
    if sigma_pd and p_pd:
        p_inv = np.linalg.inv(p)
        try:
            g = solve_lyapunov(tst @ p_inv, k)
            r_star = _sym(p_inv @ g @ p_inv)
            method = "ALE"
        except ResonanceError:
            # Cannot occur for Hurwitz Theta Sigma Theta P^{-1}; guarded anyway.
            r_star = None
    if r_star is None:
        eq = LinearMatrixEquation(operator=op, q=k, kind="general", symmetric=True)
        r_star, _ = solve_symmetric_constrained(eq)
        method = "LeastSquares"
        # Dimension of the operator null space on the symmetric subspace.
        from .numerics import sym_basis
        cols = np.column_stack([op(e).ravel() for e in sym_basis(n)])
        null_dim = cols.shape[1] - np.linalg.matrix_rank(cols, tol=1e-12 * max(np.linalg.norm(cols), 1.0))

    residual = float(np.linalg.norm(op(r_star) + k))
    ddot_at_opt = ddot_delta_of_energy(r_star, ccr, weighting, coupling_n, moments)
    return EnergyOptimum(
        r_star=r_star,
        k_matrix=k,
        stationarity_residual=residual,
        ddot_delta_at_opt=ddot_at_opt,
        method=method,
        null_space_dim=int(null_dim),
    )


def zero_hamiltonian_condition(ccr, weighting, coupling_n, moments):
    """Residual whose vanishing certifies that R = 0 is optimal.

    Equals 4 ||K|| with Atilde expressed through B as -1/2 B J B^T Theta^{-1}.
    """
    coupling_n = np.asarray(coupling_n, dtype=float)
    m = coupling_n.shape[0]
    j = ito_j(m)
    theta = ccr.theta
    theta_inv = ccr.inverse
    sigma = weighting.sigma
    p = moments.p
    b = 2.0 * theta @ coupling_n.T
    bbt = b @ b.T
    bjbt = b @ j @ b.T
    expr = (theta @ sigma @ (bbt - bjbt @ theta_inv @ p)
            - (bbt - p @ theta_inv @ bjbt) @ sigma @ theta)
    return float(np.linalg.norm(expr))


def a_hat_minimizer(b, moments):
    """Unconstrained minimizer Ahat = -1/2 B B^T P^{-1} of ddot(Delta) over A."""
    b = np.asarray(b, dtype=float)
    p = moments.p
    if np.min(np.linalg.eigvalsh(p)) <= 0:
        raise PreconditionError("P must be positive definite for the completed square")
    return -0.5 * b @ b.T @ np.linalg.inv(p)


def ddot_delta_quad_form(a, b, weighting, moments):
    """Completed-square form 2||F(A - Ahat)sqrt(P)||^2 - 1/2||F B B^T P^{-1/2}||^2."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    f = weighting.f
    p = moments.p
    a_hat = a_hat_minimizer(b, moments)
    sqrt_p = moments.sqrt_p
    p_inv_half = np.linalg.inv(sqrt_psd(p))
    quad = 2.0 * np.linalg.norm(f @ (a - a_hat) @ sqrt_p) ** 2
    const = 0.5 * np.linalg.norm(f @ b @ b.T @ p_inv_half) ** 2
    return float(quad - const)
