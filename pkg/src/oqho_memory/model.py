"""Physical parameterization of a single open quantum harmonic oscillator.

An oscillator with n system variables (n even) is described by an
antisymmetric commutation matrix Theta, a symmetric energy matrix R, a
coupling matrix N to m external field channels and a row-selector D picking
r <= m output channels.  The induced state-space realization

    A = 2 Theta (R + N^T J N),   B = 2 Theta N^T,   C = 2 D J N

automatically satisfies the physical-realizability identity

    A Theta + Theta A^T + B J B^T = 0.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import DimensionError, NumericalError, ValidationError

__all__ = [
    "J2",
    "CcrMatrix",
    "ItoStructure",
    "OqhoParams",
    "Realization",
    "SpectralClass",
    "HURWITZ",
    "MARGINALLY_STABLE",
    "UNSTABLE",
    "canonical_ccr",
    "ito_j",
    "build_realization",
    "check_physical_realizability",
    "classify_spectrum",
]

# Single-channel symplectic unit.
J2 = np.array([[0.0, 1.0], [-1.0, 0.0]])

HURWITZ = "Hurwitz"
MARGINALLY_STABLE = "MarginallyStable"
UNSTABLE = "Unstable"

_ANTISYM_TOL = 1e-12


def ito_j(m):
    """Field commutation matrix J = I_{m/2} (x) J2 for m channels (m even)."""
    if m % 2 != 0 or m <= 0:
        raise ValidationError(f"channel count must be even and positive, got {m}")
    return np.kron(np.eye(m // 2), J2)


def canonical_ccr(nu):
    """Canonical position/momentum CCR matrix Theta = (1/2) I_nu (x) J2."""
    return CcrMatrix(0.5 * np.kron(np.eye(nu), J2))


@dataclass(frozen=True)
class CcrMatrix:
    """Antisymmetric, nonsingular commutation matrix of the system variables."""

    theta: np.ndarray
    singular_tol: float = 1e-10

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float)
        object.__setattr__(self, "theta", theta)
        if theta.ndim != 2 or theta.shape[0] != theta.shape[1]:
            raise DimensionError(f"CCR matrix must be square, got shape {theta.shape}")
        n = theta.shape[0]
        if n % 2 != 0 or n == 0:
            raise ValidationError(f"CCR matrix order must be even and positive, got {n}")
        if np.linalg.norm(theta + theta.T) > _ANTISYM_TOL:
            raise ValidationError("CCR matrix is not antisymmetric")
        sv = np.linalg.svd(theta, compute_uv=False)
        if sv[-1] <= self.singular_tol * sv[0]:
            raise ValidationError(
                f"CCR matrix singular: smallest singular value {sv[-1]:.3e}"
            )

    @property
    def n(self):
        return self.theta.shape[0]

    @property
    def inverse(self):
        return np.linalg.inv(self.theta)


@dataclass(frozen=True)
class ItoStructure:
    """Quantum Ito structure of m vacuum field channels: Omega = I + iJ."""

    m: int
    j: np.ndarray = field(init=False)
    omega: np.ndarray = field(init=False)

    def __post_init__(self):
        j = ito_j(self.m)
        object.__setattr__(self, "j", j)
        object.__setattr__(self, "omega", np.eye(self.m) + 1j * j)


@dataclass(frozen=True)
class OqhoParams:
    """Energy matrix R, external coupling N and output selector D of one OQHO."""

    ccr: CcrMatrix
    energy: np.ndarray
    coupling: np.ndarray
    selector: np.ndarray

    def __post_init__(self):
        n = self.ccr.n
        r_mat = np.array(self.energy, dtype=float)
        n_mat = np.array(self.coupling, dtype=float)
        d_mat = np.array(self.selector, dtype=float)
        object.__setattr__(self, "energy", r_mat)
        object.__setattr__(self, "coupling", n_mat)
        object.__setattr__(self, "selector", d_mat)

        if r_mat.shape != (n, n):
            raise DimensionError(
                f"energy matrix shape {r_mat.shape} does not match CCR order {n}"
            )
        if np.linalg.norm(r_mat - r_mat.T) > _ANTISYM_TOL:
            raise ValidationError("energy matrix not symmetric")
        if n_mat.ndim != 2 or n_mat.shape[1] != n:
            raise DimensionError(
                f"coupling matrix shape {n_mat.shape} incompatible with n={n}"
            )
        m = n_mat.shape[0]
        if m % 2 != 0:
            raise ValidationError(f"number of field channels must be even, got {m}")
        if d_mat.ndim != 2 or d_mat.shape[1] != m:
            raise DimensionError(
                f"selector shape {d_mat.shape} incompatible with m={m}"
            )
        r = d_mat.shape[0]
        if r % 2 != 0 or r > m:
            raise ValidationError(f"selector must have an even number r <= m of rows, got r={r}")
        j = ito_j(m)
        if np.linalg.norm(d_mat @ d_mat.T - np.eye(r)) > 1e-10:
            raise ValidationError("selector rows are not orthonormal (D D^T != I)")
        if np.linalg.norm(d_mat @ j @ d_mat.T - ito_j(r)) > 1e-10:
            raise ValidationError("selector rows do not form conjugate pairs (D J D^T invalid)")

    @property
    def n(self):
        return self.ccr.n

    @property
    def m(self):
        return self.coupling.shape[0]

    @property
    def r(self):
        return self.selector.shape[0]

    @property
    def ito(self):
        return ItoStructure(self.m)


@dataclass(frozen=True)
class Realization:
    """State-space quadruple (A, B, C, D) with the Hamiltonian split of A."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray
    a0: np.ndarray = None
    a_tilde: np.ndarray = None

    @classmethod
    def from_matrices(cls, a, b, c=None, d=None):
        """Wrap raw (A, B) for analysis without a physical parameterization."""
        a = np.array(a, dtype=float)
        b = np.array(b, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionError(f"A must be square, got {a.shape}")
        if b.ndim != 2 or b.shape[0] != a.shape[0]:
            raise DimensionError(f"B shape {b.shape} incompatible with A shape {a.shape}")
        return cls(a=a, b=b, c=c, d=d)

    @property
    def n(self):
        return self.a.shape[0]

    @property
    def m(self):
        return self.b.shape[1]


def build_realization(params):
    """State-space matrices of the OQHO induced by (Theta, R, N, D)."""
    theta = params.ccr.theta
    r_mat = params.energy
    n_mat = params.coupling
    d_mat = params.selector
    j = ito_j(params.m)

    a0 = 2.0 * theta @ r_mat
    a_tilde = 2.0 * theta @ n_mat.T @ j @ n_mat
    b = 2.0 * theta @ n_mat.T
    c = 2.0 * d_mat @ j @ n_mat
    return Realization(a=a0 + a_tilde, b=b, c=c, d=d_mat, a0=a0, a_tilde=a_tilde)


def check_physical_realizability(a, b, ccr, ito=None):
    """Frobenius residual of A Theta + Theta A^T + B J B^T = 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    theta = ccr.theta
    n = theta.shape[0]
    if a.shape != (n, n):
        raise DimensionError(f"A shape {a.shape} does not match CCR order {n}")
    if b.ndim != 2 or b.shape[0] != n:
        raise DimensionError(f"B shape {b.shape} does not match CCR order {n}")
    j = ito.j if ito is not None else ito_j(b.shape[1])
    return float(np.linalg.norm(a @ theta + theta @ a.T + b @ j @ b.T))


@dataclass(frozen=True)
class SpectralClass:
    """Eigenvalues of A with a stability category and a bisector flag.

    on_bisectors is true when some eigenvalue of A is purely imaginary
    (within tolerance), i.e. some square root of an eigenvalue lies on the
    two lines |Re| = |Im| bisecting the orthants of the complex plane.
    """

    eigenvalues: np.ndarray
    category: str
    on_bisectors: bool


def _schur_eigenvalues(a):
    """Eigenvalues of a real matrix extracted from its real Schur form."""
    try:
        t, _ = scipy.linalg.schur(a, output="real")
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(
            f"Schur decomposition failed (cond(A) ~ {np.linalg.cond(a):.3e}): {exc}"
        ) from exc
    n = a.shape[0]
    eigs = []
    k = 0
    while k < n:
        if k + 1 < n and abs(t[k + 1, k]) > 0.0:
            # 2x2 block with a complex-conjugate pair.
            blk = t[k : k + 2, k : k + 2]
            tr = 0.5 * (blk[0, 0] + blk[1, 1])
            det = blk[0, 0] * blk[1, 1] - blk[0, 1] * blk[1, 0]
            disc = det - tr * tr
            if disc > 0:
                im = np.sqrt(disc)
                eigs.extend([tr + 1j * im, tr - 1j * im])
            else:
                sq = np.sqrt(-disc)
                eigs.extend([tr + sq, tr - sq])
            k += 2
        else:
            eigs.append(t[k, k] + 0.0j)
            k += 1
    return np.array(eigs)


def classify_spectrum(a, tol=1e-9):
    """Stability classification of a real square matrix via real Schur form."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"matrix must be square, got {a.shape}")
    eigs = _schur_eigenvalues(a)
    re = eigs.real
    if np.max(re) > tol:
        category = UNSTABLE
    elif np.max(re) >= -tol:
        category = MARGINALLY_STABLE
    else:
        category = HURWITZ
    on_bisectors = bool(np.any(np.abs(re) <= tol))
    return SpectralClass(eigenvalues=eigs, category=category, on_bisectors=on_bisectors)
