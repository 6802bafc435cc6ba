"""Dense numerical kernels: matrix exponential, eigendecomposition, PSD
square root and Lyapunov/Sylvester/structured linear matrix equations.

All solvers are desk-scale (n <= a few hundred) and double precision.  The
Lyapunov and Sylvester paths delegate to LAPACK-backed Bartels-Stewart
routines after an explicit resonance pre-check; the symmetric-constrained
path vectorizes over an orthonormal basis of symmetric matrices and returns
the minimum-norm least-squares solution.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .errors import (
    DiagonalizabilityError,
    DimensionError,
    InvalidMomentMatrixError,
    NumericalError,
    ResonanceError,
)

__all__ = [
    "matrix_exp",
    "solve_lyapunov",
    "solve_sylvester",
    "LinearMatrixEquation",
    "solve_symmetric_constrained",
    "sqrt_psd",
    "eig_real",
    "sym_basis",
    "sym_to_vec",
    "vec_to_sym",
]

_PINV_RCOND = 1e-12


def matrix_exp(a, t=1.0):
    """exp(t*A) by scaling-and-squaring with Pade approximation."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"matrix must be square, got {a.shape}")
    if not np.all(np.isfinite(a)) or not np.isfinite(t):
        raise NumericalError("matrix_exp requires finite entries")
    out = scipy.linalg.expm(t * a)
    if not np.all(np.isfinite(out)):
        raise NumericalError(f"matrix exponential overflow at ||tA|| = {abs(t) * np.linalg.norm(a):.3e}")
    return out


def _check_resonance_pair(eigs1, eigs2, scale):
    """Raise if some lambda in eigs1 and mu in eigs2 have lambda + mu ~ 0."""
    s = np.abs(eigs1[:, None] + eigs2[None, :])
    i, j = np.unravel_index(np.argmin(s), s.shape)
    if s[i, j] <= 1e-10 * max(scale, 1.0):
        raise ResonanceError(
            f"resonant spectra: eigenvalues {eigs1[i]:.6g} and {eigs2[j]:.6g} sum to {eigs1[i] + eigs2[j]:.3e}",
            eig_pair=(eigs1[i], eigs2[j]),
        )


def solve_lyapunov(m, q):
    """Solve M X + X M^T + Q = 0 for symmetric Q (Bartels-Stewart).

    Raises ResonanceError when the spectra of M and -M^T intersect.
    """
    m = np.asarray(m, dtype=float)
    q = np.asarray(q, dtype=float)
    if m.shape != q.shape or m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"incompatible shapes M {m.shape}, Q {q.shape}")
    eigs = np.linalg.eigvals(m)
    _check_resonance_pair(eigs, eigs, np.max(np.abs(eigs)) if eigs.size else 1.0)
    x = scipy.linalg.solve_continuous_lyapunov(m, -q)
    if np.linalg.norm(q - q.T) <= 1e-12 * max(np.linalg.norm(q), 1.0):
        x = 0.5 * (x + x.T)
    res = np.linalg.norm(m @ x + x @ m.T + q)
    bound = 1e-10 * (np.linalg.norm(q) + np.linalg.norm(m) * np.linalg.norm(x) + 1.0)
    if res > bound:
        raise NumericalError(f"Lyapunov residual {res:.3e} exceeds bound {bound:.3e}")
    return x


def solve_sylvester(m1, m2, q):
    """Solve M1 X + X M2 + Q = 0 (Bartels-Stewart with resonance pre-check)."""
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    q = np.asarray(q, dtype=float)
    if q.shape != (m1.shape[0], m2.shape[0]):
        raise DimensionError(
            f"Q shape {q.shape} incompatible with M1 {m1.shape}, M2 {m2.shape}"
        )
    e1 = np.linalg.eigvals(m1)
    e2 = np.linalg.eigvals(m2)
    scale = max(np.max(np.abs(e1), initial=0.0), np.max(np.abs(e2), initial=0.0))
    _check_resonance_pair(e1, e2, scale)
    x = scipy.linalg.solve_sylvester(m1, m2, -q)
    res = np.linalg.norm(m1 @ x + x @ m2 + q)
    bound = 1e-10 * (np.linalg.norm(q) + scale * np.linalg.norm(x) + 1.0)
    if res > bound:
        raise NumericalError(f"Sylvester residual {res:.3e} exceeds bound {bound:.3e}")
    return x


def sym_basis(n):
    """Orthonormal basis of symmetric n x n matrices, upper-triangular order.

    Off-diagonal elements are scaled by 1/sqrt(2) so the basis is orthonormal
    under the Frobenius inner product.
    """
    basis = []
    isq2 = 1.0 / np.sqrt(2.0)
    for i in range(n):
        for j in range(i, n):
            e = np.zeros((n, n))
            if i == j:
                e[i, i] = 1.0
            else:
                e[i, j] = e[j, i] = isq2
            basis.append(e)
    return basis


def sym_to_vec(x):
    """Coordinates of a symmetric matrix in the sym_basis ordering."""
    n = x.shape[0]
    return np.array([np.sum(e * x) for e in sym_basis(n)])


def vec_to_sym(v, n):
    """Inverse of sym_to_vec."""
    x = np.zeros((n, n))
    for c, e in zip(v, sym_basis(n)):
        x += c * e
    return x


@dataclass(frozen=True)
class LinearMatrixEquation:
    """Linear matrix equation op(X) + Q = 0 with an optional symmetry constraint.

    kind is informational ("lyapunov", "sylvester" or "general"); the solve
    itself only uses the operator callable and the right-hand side.
    """

    operator: Callable[[np.ndarray], np.ndarray]
    q: np.ndarray
    kind: str = "general"
    symmetric: bool = True

    @classmethod
    def lyapunov(cls, m, q):
        m = np.asarray(m, dtype=float)
        return cls(operator=lambda x: m @ x + x @ m.T, q=np.asarray(q, dtype=float),
                   kind="lyapunov", symmetric=True)

    @classmethod
    def sylvester(cls, m1, m2, q):
        m1 = np.asarray(m1, dtype=float)
        m2 = np.asarray(m2, dtype=float)
        return cls(operator=lambda x: m1 @ x + x @ m2, q=np.asarray(q, dtype=float),
                   kind="sylvester", symmetric=False)


def solve_symmetric_constrained(equation):
    """Minimum-norm least-squares solution of op(X) + Q = 0.

    When equation.symmetric is set, X is restricted to the symmetric
    subspace.  Returns (X, residual) where residual = ||op(X) + Q||_F; a
    residual above ~1e-8 (scaled) indicates an inconsistent stationarity
    condition rather than a solver failure.
    """
    q = equation.q
    n_rows, n_cols = q.shape
    if equation.symmetric:
        if n_rows != n_cols:
            raise DimensionError("symmetric constraint requires a square right-hand side")
        basis = sym_basis(n_rows)
    else:
        basis = []
        for i in range(n_rows):
            for j in range(n_cols):
                e = np.zeros((n_rows, n_cols))
                e[i, j] = 1.0
                basis.append(e)
    cols = [equation.operator(e).ravel() for e in basis]
    op_mat = np.column_stack(cols) if cols else np.zeros((q.size, 0))
    rhs = -q.ravel()
    coeffs = np.linalg.pinv(op_mat, rcond=_PINV_RCOND) @ rhs
    x = np.zeros((n_rows, n_cols))
    for c, e in zip(coeffs, basis):
        x += c * e
    residual = float(np.linalg.norm(equation.operator(x) + q))
    return x, residual


def sqrt_psd(p, neg_tol=1e-8):
    """Unique PSD square root of a symmetric PSD matrix via eigendecomposition."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise DimensionError(f"matrix must be square, got {p.shape}")
    if np.linalg.norm(p - p.T) > 1e-10 * max(np.linalg.norm(p), 1.0):
        raise InvalidMomentMatrixError("matrix not symmetric")
    w, v = np.linalg.eigh(0.5 * (p + p.T))
    scale = max(np.max(np.abs(w), initial=0.0), 1e-300)
    if np.min(w) < -neg_tol * scale:
        raise InvalidMomentMatrixError(
            f"matrix has a significantly negative eigenvalue {np.min(w):.3e}"
        )
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ v.T


def eig_real(a, cond_limit=1e12):
    """Eigendecomposition of a real matrix with conjugate pairs paired up.

    Returns (eigenvalues, U) with A U = U diag(eigenvalues).  Complex
    eigenvalues are ordered as all upper-half-plane representatives first,
    followed by their conjugates in the same order (so for a purely
    imaginary spectrum the second half is the elementwise conjugate of the
    first).  Real eigenvalues precede the complex ones, in increasing order.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"matrix must be square, got {a.shape}")
    w, u = np.linalg.eig(a)
    cond = np.linalg.cond(u)
    if not np.isfinite(cond) or cond > cond_limit:
        raise DiagonalizabilityError(
            f"eigenvector matrix condition number {cond:.3e} exceeds {cond_limit:.1e}; "
            "matrix is (numerically) defective"
        )
    real_idx = [k for k in range(len(w)) if w[k].imag == 0.0]
    pos_idx = [k for k in range(len(w)) if w[k].imag > 0.0]
    real_idx.sort(key=lambda k: w[k].real)
    pos_idx.sort(key=lambda k: (w[k].imag, w[k].real))
    # Match each upper-half representative with its conjugate partner.
    neg_pool = [k for k in range(len(w)) if w[k].imag < 0.0]
    neg_idx = []
    for k in pos_idx:
        target = np.conj(w[k])
        best = min(neg_pool, key=lambda j: abs(w[j] - target))
        neg_pool.remove(best)
        neg_idx.append(best)
    order = real_idx + pos_idx + neg_idx
    return w[order], u[:, order]
