"""Memory decoherence time and its small-fidelity expansion.

tau(eps) is the first time the deviation Delta(t) exceeds the relative
threshold eps * ||F sqrt(P)||^2 (inf over an empty set is +inf).  tau is
located by a dense grid scan followed by bisection of the first bracketing
interval; a pure root-finder could miss early excursions of an oscillatory
Delta.  The expansion coefficients are

    tau'  = ||F sqrt(P)||^2 / ||F B||^2,
    tau'' = -ddot(Delta) * tau'^2 / dot(Delta),
    tau_hat(eps) = tau' eps + (1/2) tau'' eps^2.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import delta, delta_derivatives, hurwitz_limit
from .errors import PreconditionError
from .model import HURWITZ, classify_spectrum

__all__ = [
    "DecoherenceReport",
    "decoherence_time",
    "tau_prime",
    "tau_second",
    "tau_hat",
    "CERT_DELTA_ZERO",
    "CERT_HURWITZ",
    "CERT_INCONCLUSIVE",
]

CERT_DELTA_ZERO = "delta_identically_zero"
CERT_HURWITZ = "hurwitz_below_threshold"
CERT_INCONCLUSIVE = "horizon_exhausted"
CERT_CROSSING = "crossing_found"

_MAX_BISECTIONS = 200


@dataclass(frozen=True)
class DecoherenceReport:
    epsilon: float
    threshold: float
    tau: float
    tau_prime: float
    tau_second: float
    tau_hat: float
    horizon_used: float
    certificate: str
    grid_points: int
    bisection_iterations: int
    expansion_valid: bool  # false when FB = 0 and the eps-expansion is inapplicable


def _system_matrices(system):
    if hasattr(system, "a") and hasattr(system, "b"):
        return np.asarray(system.a, dtype=float), np.asarray(system.b, dtype=float)
    a, b = system
    return np.asarray(a, dtype=float), np.asarray(b, dtype=float)


def tau_prime(b, weighting, moments):
    """Signal-to-noise-like ratio ||F sqrt(P)||^2 / ||F B||^2 (time units).

    Returns +inf when F B = 0, in which case the small-eps expansion of tau
    does not apply.
    """
    b = np.asarray(b, dtype=float)
    num = np.linalg.norm(weighting.f @ moments.sqrt_p) ** 2
    if num == 0.0:
        raise PreconditionError("F sqrt(P) = 0: decoherence time undefined")
    den = np.linalg.norm(weighting.f @ b) ** 2
    if den == 0.0:
        return math.inf
    return float(num / den)


def tau_second(system, weighting, moments):
    """Second derivative of tau in eps at 0: -ddot(Delta) tau'^2 / dot(Delta)."""
    a, b = _system_matrices(system)
    dot, ddot = delta_derivatives(a, b, weighting, moments)
    if dot == 0.0:
        raise PreconditionError("F B = 0: eps-expansion of tau inapplicable")
    tp = tau_prime(b, weighting, moments)
    return float(-ddot * tp * tp / dot)


def tau_hat(system, weighting, moments, epsilon):
    """Quadratic approximation tau' eps + (1/2) tau'' eps^2."""
    _, b = _system_matrices(system)
    tp = tau_prime(b, weighting, moments)
    if not math.isfinite(tp):
        raise PreconditionError("F B = 0: eps-expansion of tau inapplicable")
    ts = tau_second(system, weighting, moments)
    return float(tp * epsilon + 0.5 * ts * epsilon * epsilon)


def _hybrid_grid(horizon, points):
    """Log+linear hybrid grid on (0, horizon]; dense near 0 and uniform overall."""
    n_log = points // 2
    n_lin = points - n_log
    log_part = np.geomspace(horizon * 1e-8, horizon, n_log)
    lin_part = np.linspace(horizon / n_lin, horizon, n_lin)
    return np.unique(np.concatenate([log_part, lin_part]))


def decoherence_time(system, weighting, moments, epsilon, horizon=None, grid_points=2000):
    """Decoherence time tau(eps) with a crossing or no-crossing certificate.

    system may be a Realization (or anything with .a/.b) or an (A, B) pair.
    The scan evaluates Delta on a hybrid log/linear grid over [0, horizon];
    the first bracketing interval is refined by bisection and tau is the
    bracket midpoint.  +inf is returned with a certificate: the deviation is
    identically zero, or A is Hurwitz with its limit below the threshold;
    otherwise the horizon was exhausted and the result is inconclusive.
    """
    a, b = _system_matrices(system)
    if epsilon <= 0:
        raise PreconditionError(f"epsilon must be positive, got {epsilon}")
    fsp = np.linalg.norm(weighting.f @ moments.sqrt_p) ** 2
    if fsp == 0.0:
        raise PreconditionError("F sqrt(P) = 0: decoherence time undefined")
    threshold = float(epsilon * fsp)

    tp = tau_prime(b, weighting, moments)
    expansion_valid = math.isfinite(tp)
    if expansion_valid:
        ts = tau_second(system, weighting, moments)
        th = tau_hat(system, weighting, moments, epsilon)
    else:
        ts = math.nan
        th = math.nan

    if horizon is None:
        t_scale = 1.0 / max(np.linalg.norm(a), 1.0)
        horizon = 50.0 * max(tp if expansion_valid else 0.0, t_scale)
    if horizon <= 0:
        raise PreconditionError(f"horizon must be positive, got {horizon}")

    def make_report(tau, certificate, iters):
        return DecoherenceReport(
            epsilon=float(epsilon),
            threshold=threshold,
            tau=tau,
            tau_prime=tp,
            tau_second=ts,
            tau_hat=th,
            horizon_used=float(horizon),
            certificate=certificate,
            grid_points=grid_points,
            bisection_iterations=iters,
            expansion_valid=expansion_valid,
        )

    grid = _hybrid_grid(horizon, grid_points)
    t_lo = 0.0
    bracket = None
    max_delta = 0.0
    for t in grid:
        d = delta(a, b, weighting, moments, t)
        max_delta = max(max_delta, d)
        if d > threshold:
            bracket = (t_lo, t)
            break
        t_lo = t

    if bracket is None:
        if max_delta == 0.0 and np.linalg.norm(a) == 0.0 and np.linalg.norm(b) == 0.0:
            return make_report(math.inf, CERT_DELTA_ZERO, 0)
        if classify_spectrum(a).category == HURWITZ:
            if hurwitz_limit(a, b, weighting, moments) <= threshold:
                return make_report(math.inf, CERT_HURWITZ, 0)
        return make_report(math.inf, CERT_INCONCLUSIVE, 0)

    lo, hi = bracket
    iters = 0
    while hi - lo > 4.0 * np.spacing(hi) and iters < _MAX_BISECTIONS:
        mid = 0.5 * (lo + hi)
        if delta(a, b, weighting, moments, mid) > threshold:
            hi = mid
        else:
            lo = mid
        iters += 1
    return make_report(0.5 * (lo + hi), CERT_CROSSING, iters)
