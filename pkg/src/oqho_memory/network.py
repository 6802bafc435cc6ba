"""Coherent feedback interconnection of two oscillators.

Two OQHOs are coupled directly through an energy cross-term R12 and
indirectly through exchanged output fields (internal couplings L1, L2).
The closed loop is again an OQHO over the stacked variables; its block
state-space assembly must coincide with the realization built from the
closed-loop (Theta, R, N), which is the module's central consistency
identity.  optimal_r12 solves the closed-loop stationarity equation for the
direct coupling matrix.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .design import ddot_delta_of_state, k_matrix
from .errors import DimensionError, NumericalError, ResonanceError, ValidationError
from .model import CcrMatrix, OqhoParams, Realization, build_realization, ito_j
from .numerics import LinearMatrixEquation, solve_sylvester, solve_symmetric_constrained

__all__ = [
    "SubsystemParams",
    "Interconnection",
    "assemble",
    "zero_hamiltonian_r12",
    "q_matrix",
    "optimal_r12",
]

_CONSISTENCY_TOL = 1e-10


@dataclass(frozen=True)
class SubsystemParams:
    """One constituent oscillator with an extra internal coupling L.

    coupling_internal (L) couples this oscillator to the selected output of
    the other one, so L for subsystem k has r_{3-k} rows.
    """

    ccr: CcrMatrix
    energy: np.ndarray
    coupling_external: np.ndarray
    coupling_internal: np.ndarray
    selector: np.ndarray

    def __post_init__(self):
        # Reuse single-oscillator validation for (Theta, R, N, D).
        OqhoParams(ccr=self.ccr, energy=self.energy, coupling=self.coupling_external,
                   selector=self.selector)
        object.__setattr__(self, "energy", np.array(self.energy, dtype=float))
        object.__setattr__(self, "coupling_external", np.array(self.coupling_external, dtype=float))
        object.__setattr__(self, "coupling_internal", np.array(self.coupling_internal, dtype=float))
        object.__setattr__(self, "selector", np.array(self.selector, dtype=float))
        if self.coupling_internal.ndim != 2 or self.coupling_internal.shape[1] != self.ccr.n:
            raise DimensionError(
                f"internal coupling shape {self.coupling_internal.shape} incompatible with n={self.ccr.n}"
            )

    @property
    def n(self):
        return self.ccr.n

    @property
    def m(self):
        return self.coupling_external.shape[0]

    @property
    def r(self):
        return self.selector.shape[0]


@dataclass(frozen=True)
class Interconnection:
    sub1: SubsystemParams
    sub2: SubsystemParams
    r12: np.ndarray
    closed_theta: CcrMatrix
    closed_r: np.ndarray
    closed_n: np.ndarray
    closed_realization: Realization
    consistency_residual: float


def _check_internal_dims(sub1, sub2):
    if sub1.coupling_internal.shape[0] != sub2.r:
        raise DimensionError(
            f"L1 has {sub1.coupling_internal.shape[0]} rows but subsystem 2 selects r2={sub2.r} outputs"
        )
    if sub2.coupling_internal.shape[0] != sub1.r:
        raise DimensionError(
            f"L2 has {sub2.coupling_internal.shape[0]} rows but subsystem 1 selects r1={sub1.r} outputs"
        )


def assemble(sub1, sub2, r12):
    """Closed-loop OQHO of the two-oscillator coherent feedback loop."""
    _check_internal_dims(sub1, sub2)
    r12 = np.asarray(r12, dtype=float)
    if r12.shape != (sub1.n, sub2.n):
        raise DimensionError(f"R12 shape {r12.shape} must be ({sub1.n}, {sub2.n})")

    subs = (sub1, sub2)
    thetas = [s.ccr.theta for s in subs]
    js = [ito_j(s.m) for s in subs]
    jt = [s.selector @ ito_j(s.m) @ s.selector.T for s in subs]  # selected-output CCRs
    r_cross = [r12, r12.T]

    a_blk, b_blk, c_blk, e_blk, f_blk = [], [], [], [], []
    for k in range(2):
        o = 1 - k
        s = subs[k]
        nk, lk, dk = s.coupling_external, s.coupling_internal, s.selector
        a_blk.append(2.0 * thetas[k] @ (s.energy + nk.T @ js[k] @ nk + lk.T @ jt[o] @ lk))
        b_blk.append(2.0 * thetas[k] @ nk.T)
        c_blk.append(2.0 * dk @ js[k] @ nk)
        e_blk.append(2.0 * thetas[k] @ lk.T)
        f_blk.append(2.0 * thetas[k] @ r_cross[k])

    a_closed = np.block([
        [a_blk[0], f_blk[0] + e_blk[0] @ c_blk[1]],
        [f_blk[1] + e_blk[1] @ c_blk[0], a_blk[1]],
    ])
    b_closed = np.block([
        [b_blk[0], e_blk[0] @ subs[1].selector],
        [e_blk[1] @ subs[0].selector, b_blk[1]],
    ])

    # Closed-loop physical parameters.
    n1, n2 = sub1.n, sub2.n
    l1, l2 = sub1.coupling_internal, sub2.coupling_internal
    nn1, nn2 = sub1.coupling_external, sub2.coupling_external
    d1, d2 = sub1.selector, sub2.selector
    r_tilde_12 = l1.T @ d2 @ js[1] @ nn2 - nn1.T @ js[0] @ d1.T @ l2
    closed_r = np.block([
        [sub1.energy, r12 + r_tilde_12],
        [(r12 + r_tilde_12).T, sub2.energy],
    ])
    closed_n = np.block([
        [nn1, d1.T @ l2],
        [d2.T @ l1, nn2],
    ])
    closed_theta = CcrMatrix(scipy.linalg.block_diag(thetas[0], thetas[1]))

    # The block assembly must reproduce the PR construction from (Theta, R, N).
    ref = build_realization(OqhoParams(
        ccr=closed_theta,
        energy=closed_r,
        coupling=closed_n,
        selector=np.eye(closed_n.shape[0]),
    ))
    residual = max(
        float(np.linalg.norm(ref.a - a_closed)),
        float(np.linalg.norm(ref.b - b_closed)),
    )
    scale = max(np.linalg.norm(a_closed), np.linalg.norm(b_closed), 1.0)
    if residual > _CONSISTENCY_TOL * scale:
        raise NumericalError(
            f"closed-loop assembly inconsistent with PR construction (residual {residual:.3e}); "
            "this indicates an implementation bug"
        )

    d_closed = scipy.linalg.block_diag(d1, d2)
    c_closed = 2.0 * d_closed @ scipy.linalg.block_diag(js[0], js[1]) @ closed_n
    realization = Realization(
        a=a_closed,
        b=b_closed,
        c=c_closed,
        d=d_closed,
        a0=2.0 * closed_theta.theta @ closed_r,
        a_tilde=a_closed - 2.0 * closed_theta.theta @ closed_r,
    )
    return Interconnection(
        sub1=sub1,
        sub2=sub2,
        r12=r12,
        closed_theta=closed_theta,
        closed_r=closed_r,
        closed_n=closed_n,
        closed_realization=realization,
        consistency_residual=residual,
    )


def zero_hamiltonian_r12(sub1, sub2):
    """Direct coupling cancelling the field-mediated energy cross-term.

    Returns (R12, warning) where warning is set when R1 or R2 is nonzero, in
    which case the closed-loop energy matrix cannot vanish.
    """
    _check_internal_dims(sub1, sub2)
    j1 = ito_j(sub1.m)
    j2 = ito_j(sub2.m)
    r12 = (sub1.coupling_external.T @ j1 @ sub1.selector.T @ sub2.coupling_internal
           - sub1.coupling_internal.T @ sub2.selector @ j2 @ sub2.coupling_external)
    warning = None
    if np.linalg.norm(sub1.energy) > 0 or np.linalg.norm(sub2.energy) > 0:
        warning = "R1 or R2 nonzero: closed-loop energy matrix will not vanish"
    return r12, warning


def q_matrix(interconnection, weighting, moments):
    """(1,2) block of (1/2) sym(Theta Sigma (B B^T + 2 Abreve P)).

    Abreve is the closed-loop A with the direct coupling R12 removed, i.e.
    built from blockdiag(R1, R2) + Rtilde + N^T J N.
    """
    sub1, sub2 = interconnection.sub1, interconnection.sub2
    base = assemble(sub1, sub2, np.zeros((sub1.n, sub2.n)))
    a_breve = base.closed_realization.a
    b = base.closed_realization.b
    theta = base.closed_theta.theta
    sigma = weighting.sigma
    p = moments.p
    s = theta @ sigma @ (b @ b.T + 2.0 * a_breve @ p)
    sym_s = 0.25 * (s + s.T)  # (1/2) * symmetrizer
    return sym_s[: sub1.n, sub1.n :]


def _rase12_operator(sub1, sub2, weighting, moments):
    n1, n2 = sub1.n, sub2.n
    t1, t2 = sub1.ccr.theta, sub2.ccr.theta
    sigma = weighting.sigma
    p = moments.p
    s11 = t1 @ sigma[:n1, :n1] @ t1
    s22 = t2 @ sigma[n1:, n1:] @ t2
    s12 = t1 @ sigma[:n1, n1:] @ t2
    p11, p22, p12 = p[:n1, :n1], p[n1:, n1:], p[:n1, n1:]

    def op(x):
        return (s11 @ x @ p22 + p11 @ x @ s22
                + s12 @ x.T @ p12 + p12 @ x.T @ s12)

    return op, (s11, s22, s12, p11, p22, p12)


def optimal_r12(sub1, sub2, weighting, moments):
    """Direct-coupling matrix solving the closed-loop stationarity equation.

    Returns (r12, residual, method).  With block-diagonal Sigma or P the
    equation reduces to a Sylvester equation; otherwise (or on resonance)
    the full linear map over the n1*n2 unknowns is solved by minimum-norm
    least squares.
    """
    base = assemble(sub1, sub2, np.zeros((sub1.n, sub2.n)))
    q = q_matrix(base, weighting, moments)
    op, (s11, s22, s12, p11, p22, p12) = _rase12_operator(sub1, sub2, weighting, moments)

    decoupled = np.linalg.norm(s12) <= 1e-14 * max(np.linalg.norm(weighting.sigma), 1.0) \
        or np.linalg.norm(p12) <= 1e-14 * max(np.linalg.norm(moments.p), 1.0)
    if decoupled and np.min(np.abs(np.linalg.eigvalsh(p11))) > 1e-12 \
            and np.min(np.abs(np.linalg.eigvalsh(p22))) > 1e-12:
        # S11 X P22 + P11 X S22 + Q = 0  ->  standard Sylvester form.
        m1 = np.linalg.solve(p11, s11)
        m2 = s22 @ np.linalg.inv(p22)
        q_t = np.linalg.solve(p11, q) @ np.linalg.inv(p22)
        try:
            x = solve_sylvester(m1, m2, q_t)
            residual = float(np.linalg.norm(op(x) + q))
            return x, residual, "Sylvester"
        except ResonanceError:
            pass
    eq = LinearMatrixEquation(operator=op, q=q, kind="general", symmetric=False)
    x, residual = solve_symmetric_constrained(eq)
    return x, residual, "LeastSquares"
