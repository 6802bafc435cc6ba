"""Independent reference implementations used only by the tests.

Everything here deliberately avoids the library's own solver paths:
Lyapunov/Sylvester equations are solved by dense Kronecker vectorization,
Gramians by adaptive quadrature, gradients by central differences, and
minimizers by plain steepest descent.  Agreement between these and the
library is the point of the tests.
"""

import numpy as np
import scipy.integrate
import scipy.linalg

from oqho_memory.model import J2, CcrMatrix, OqhoParams, build_realization, canonical_ccr, ito_j
from oqho_memory.numerics import sym_basis


# --- Kronecker-vectorized matrix-equation solves (row-major vec) ------------
#
# With x = X.ravel() (row-major): vec(M X) = (M kron I) x and
# vec(X M) = (I kron M^T) x.

def kron_solve_lyapunov(m, q):
    """Solve M X + X M^T + Q = 0 by a dense n^2 x n^2 linear system."""
    n = m.shape[0]
    eye = np.eye(n)
    lhs = np.kron(m, eye) + np.kron(eye, m)
    x = np.linalg.solve(lhs, -q.ravel())
    return x.reshape(n, n)


def kron_solve_sylvester(m1, m2, q):
    """Solve M1 X + X M2 + Q = 0 by dense vectorization."""
    p, s = m1.shape[0], m2.shape[0]
    lhs = np.kron(m1, np.eye(s)) + np.kron(np.eye(p), m2.T)
    x = np.linalg.solve(lhs, -q.ravel())
    return x.reshape(p, s)


# --- Quadrature Gramian ------------------------------------------------------

def quad_gramian(a, b, t, epsabs=1e-12, epsrel=1e-12):
    """int_0^t e^{sA} B Omega B^T e^{sA^T} ds by adaptive quadrature."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    omega = np.eye(b.shape[1]) + 1j * ito_j(b.shape[1])
    src = b @ omega @ b.T

    def integrand(s):
        e = scipy.linalg.expm(s * a)
        return e @ src @ e.T

    val, _ = scipy.integrate.quad_vec(integrand, 0.0, t, epsabs=epsabs, epsrel=epsrel)
    return val


# --- Finite-difference gradients ----------------------------------------------

def fd_gradient(fun, x0, h=1e-5):
    """Central-difference gradient of a scalar function of a flat vector."""
    x0 = np.asarray(x0, dtype=float)
    g = np.empty(x0.size)
    for i in range(x0.size):
        e = np.zeros(x0.size)
        e[i] = h
        g[i] = (fun(x0 + e) - fun(x0 - e)) / (2.0 * h)
    return g


def fd_sym_gradient(fun, r0, h=1e-5):
    """Central-difference gradient of fun over symmetric matrices.

    fun takes a symmetric matrix; the result is the symmetric matrix dual to
    the differential under the Frobenius inner product.
    """
    n = r0.shape[0]
    grad = np.zeros((n, n))
    for i in range(n):
        for j in range(i, n):
            e = np.zeros((n, n))
            e[i, j] = e[j, i] = 1.0
            d = (fun(r0 + h * e) - fun(r0 - h * e)) / (2.0 * h)
            grad[i, j] = grad[j, i] = d if i == j else 0.5 * d
    return grad


# --- Steepest-descent minimizer ------------------------------------------------
#
# Steepest descent on flat coordinates with Armijo backtracking, seeded at 0,
# gradient tolerance 1e-10, at most 1e5 iterations.  Gradients come from
# central differences with step h; h = 0.05 is exact for quadratics.  The
# acceptance test allows a rounding allowance of 32 eps |f| so the search can
# terminate once decreases fall below what doubles can represent.

def descent_minimize(f, dim, h=0.05, gtol=1e-10, max_iter=100000):
    x = np.zeros(dim)
    fx = f(x)
    for it in range(max_iter):
        g = np.empty(dim)
        for i in range(dim):
            e = np.zeros(dim)
            e[i] = h
            g[i] = (f(x + e) - f(x - e)) / (2.0 * h)
        gn = np.linalg.norm(g)
        if gn <= gtol:
            return x, it
        u = g / gn
        curv = (f(x + h * u) - 2.0 * fx + f(x - h * u)) / h ** 2
        t = gn / curv if curv > 0 else 1.0
        noise = 32.0 * np.finfo(float).eps * max(abs(fx), 1.0)
        accepted = False
        for _ in range(40):
            xn = x - t * u
            fn = f(xn)
            if fn <= fx - 1e-4 * t * gn + noise:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            return x, it
        x, fx = xn, fn
    return x, max_iter


def descent_minimize_sym(fun, n, **kw):
    """Minimize a function of a symmetric n x n matrix; returns the matrix."""
    basis = sym_basis(n)

    def f(v):
        r = np.zeros((n, n))
        for c, e in zip(v, basis):
            r = r + c * e
        return fun(r)

    v_star, iters = descent_minimize(f, len(basis), **kw)
    r_star = np.zeros((n, n))
    for c, e in zip(v_star, basis):
        r_star = r_star + c * e
    return r_star, iters


# --- Random instance generators -----------------------------------------------

def random_sym(rng, n, scale=1.0):
    g = scale * rng.standard_normal((n, n))
    return 0.5 * (g + g.T)


def random_spd(rng, n, shift=2.0, scale=1.0):
    g = scale * rng.standard_normal((n, n))
    return g @ g.T + shift * np.eye(n)


def random_ccr(rng, nu, perturb=0.2):
    """Random nonsingular antisymmetric CCR matrix congruent to the canonical one."""
    n = 2 * nu
    t = np.eye(n) + perturb * rng.standard_normal((n, n))
    return CcrMatrix(t @ canonical_ccr(nu).theta @ t.T)


def random_selector(m, r):
    """First r rows of I_m: orthonormal and conjugate-pair preserving."""
    return np.eye(m)[:r]


def random_params(rng, nu, m, r=None, ccr=None, scale=1.0):
    """Random OqhoParams over n = 2 nu variables and m field channels."""
    n = 2 * nu
    if ccr is None:
        ccr = canonical_ccr(nu)
    return OqhoParams(
        ccr=ccr,
        energy=random_sym(rng, n, scale),
        coupling=scale * rng.standard_normal((m, n)),
        selector=random_selector(m, m if r is None else r),
    )


def random_hurwitz_realization(rng, nu=1, m=2, re_min=None, re_max=None, max_tries=2000):
    """Rejection-sample a PR realization with Hurwitz A (optional Re-lambda band).

    Returns (params, realization).
    """
    from oqho_memory.model import classify_spectrum

    for _ in range(max_tries):
        params = random_params(rng, nu, m)
        real = build_realization(params)
        spec = classify_spectrum(real.a)
        if spec.category != "Hurwitz":
            continue
        re = spec.eigenvalues.real
        if re_max is not None and re.max() > re_max:
            continue
        if re_min is not None and re.min() < re_min:
            continue
        return params, real
    raise RuntimeError("no Hurwitz instance found")


def random_marginal_system(rng, freqs_lo=5.0, freqs_hi=20.0, gap=3.0,
                           t_perturb=0.1, b_scale=0.3):
    """A with distinct purely imaginary spectrum plus a mild similarity.

    Frequencies are kept well separated so the time-averaged Gramian growth
    converges to its linear rate within a few hundred time units.
    """
    freqs = np.sort(rng.uniform(freqs_lo, freqs_hi, 2))
    while freqs[1] - freqs[0] < gap or freqs[0] < gap / 2:
        freqs = np.sort(rng.uniform(freqs_lo, freqs_hi, 2))
    a0 = scipy.linalg.block_diag(*[f * J2 for f in freqs])
    t = np.eye(4) + t_perturb * rng.standard_normal((4, 4))
    a = t @ a0 @ np.linalg.inv(t)
    b = b_scale * rng.standard_normal((4, 2))
    return a, b
