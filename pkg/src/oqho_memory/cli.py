"""Scenario-file-driven command line interface.

A scenario is a JSON file with row-major nested arrays for all matrices.
Single-oscillator scenarios carry theta/energy/coupling/selector plus the
weighting factor F and initial moments P; interconnection scenarios carry
two subsystem blocks and an optional R12.  Numbers are emitted with 17
significant digits so output round-trips exactly.

Exit codes: 0 success, 1 validation failure, 2 parse failure, 3 I/O
failure, 4 numerical failure.
"""

import argparse
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import decoherence, design, dynamics, model, network
from .errors import (
    DimensionError,
    NumericalError,
    OqhoError,
    PreconditionError,
    ValidationError,
)

log = logging.getLogger("oqho")

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_PARSE = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4

_FMT = "%.17g"


class ScenarioParseError(Exception):
    def __init__(self, message, location="/"):
        super().__init__(f"{location}: {message}")
        self.location = location


@dataclass
class Scenario:
    schema_version: int
    mode: str  # "single" or "interconnection"
    weighting: dynamics.Weighting
    moments: dynamics.MomentData
    epsilon: list
    horizon: Optional[float]
    grid_points: int
    output: Optional[str]
    params: Optional[model.OqhoParams] = None
    sub1: Optional[network.SubsystemParams] = None
    sub2: Optional[network.SubsystemParams] = None
    r12: Optional[np.ndarray] = None


def _require(data, key, location):
    if key not in data:
        raise ScenarioParseError(f"missing required field '{key}'", location)
    return data[key]


def _matrix(data, key, location, required=True):
    if key not in data:
        if required:
            raise ScenarioParseError(f"missing required field '{key}'", location)
        return None
    try:
        m = np.array(data[key], dtype=float)
    except (TypeError, ValueError) as exc:
        raise ScenarioParseError(f"field '{key}' is not a numeric matrix: {exc}",
                                 f"{location}/{key}") from None
    if m.ndim != 2:
        raise ScenarioParseError(f"field '{key}' must be a 2-D array", f"{location}/{key}")
    return m


def _load_subsystem(data, location):
    theta = model.CcrMatrix(_matrix(data, "theta", location))
    return network.SubsystemParams(
        ccr=theta,
        energy=_matrix(data, "energy", location),
        coupling_external=_matrix(data, "coupling", location),
        coupling_internal=_matrix(data, "coupling_internal", location),
        selector=_matrix(data, "selector", location),
    )


def load_scenario(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError:
        raise
    except json.JSONDecodeError as exc:
        raise ScenarioParseError(f"invalid JSON: {exc}", "/") from None
    if not isinstance(data, dict):
        raise ScenarioParseError("scenario root must be an object", "/")

    version = _require(data, "schema_version", "/")
    if version != 1:
        raise ScenarioParseError(f"unsupported schema_version {version}", "/schema_version")
    mode = _require(data, "mode", "/")
    if mode not in ("single", "interconnection"):
        raise ScenarioParseError(f"mode must be 'single' or 'interconnection', got {mode!r}", "/mode")

    epsilon = data.get("epsilon", [0.01])
    if not isinstance(epsilon, list) or not all(isinstance(e, (int, float)) and e > 0 for e in epsilon):
        raise ScenarioParseError("epsilon must be a list of positive numbers", "/epsilon")
    horizon = data.get("horizon")
    if horizon is not None and (not isinstance(horizon, (int, float)) or horizon <= 0):
        raise ScenarioParseError("horizon must be a positive number", "/horizon")
    grid_points = data.get("grid_points", 2000)

    f_mat = _matrix(data, "weight_f", "/")
    p_mat = _matrix(data, "moments_p", "/")

    if mode == "single":
        theta = model.CcrMatrix(_matrix(data, "theta", "/"))
        params = model.OqhoParams(
            ccr=theta,
            energy=_matrix(data, "energy", "/"),
            coupling=_matrix(data, "coupling", "/"),
            selector=_matrix(data, "selector", "/"),
        )
        weighting = dynamics.Weighting(f_mat)
        moments = dynamics.MomentData(p=p_mat, ccr=theta)
        return Scenario(schema_version=version, mode=mode, weighting=weighting,
                        moments=moments, epsilon=[float(e) for e in epsilon],
                        horizon=horizon, grid_points=int(grid_points),
                        output=data.get("output"), params=params)

    subsystems = _require(data, "subsystems", "/")
    if not isinstance(subsystems, list) or len(subsystems) != 2:
        raise ScenarioParseError("subsystems must be a list of exactly two objects", "/subsystems")
    sub1 = _load_subsystem(subsystems[0], "/subsystems/0")
    sub2 = _load_subsystem(subsystems[1], "/subsystems/1")
    r12 = _matrix(data, "r12", "/", required=False)
    if r12 is None:
        r12 = np.zeros((sub1.n, sub2.n))
    closed_theta = model.CcrMatrix(
        np.block([
            [sub1.ccr.theta, np.zeros((sub1.n, sub2.n))],
            [np.zeros((sub2.n, sub1.n)), sub2.ccr.theta],
        ])
    )
    weighting = dynamics.Weighting(f_mat)
    moments = dynamics.MomentData(p=p_mat, ccr=closed_theta)
    return Scenario(schema_version=version, mode=mode, weighting=weighting,
                    moments=moments, epsilon=[float(e) for e in epsilon],
                    horizon=horizon, grid_points=int(grid_points),
                    output=data.get("output"), sub1=sub1, sub2=sub2, r12=r12)


def _scenario_system(scenario):
    """Closed (A, B) realization for either scenario mode."""
    if scenario.mode == "single":
        return model.build_realization(scenario.params)
    inter = network.assemble(scenario.sub1, scenario.sub2, scenario.r12)
    return inter.closed_realization


def _fmt(x):
    return _FMT % x


def _matrix_lines(m, indent="  "):
    return "\n".join(indent + "[" + ", ".join(_fmt(v) for v in row) + "]" for row in np.atleast_2d(m))


def _write_text(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def cmd_check(scenario, args):
    real = _scenario_system(scenario)
    theta = scenario.params.ccr if scenario.mode == "single" else scenario.moments.ccr
    pr = model.check_physical_realizability(real.a, real.b, theta)
    spec = model.classify_spectrum(real.a)
    pi_min = float(np.min(np.linalg.eigvalsh(scenario.moments.p + 1j * theta.theta)))
    print(f"PR residual:        {_fmt(pr)}")
    print(f"spectral class:     {spec.category}")
    print(f"imaginary-axis eig: {spec.on_bisectors}")
    print(f"min eig(P + iTheta): {_fmt(pi_min)}")
    tol = args.tolerance if args.tolerance is not None else 1e-10
    ok = pr <= max(tol, 1e-10) and pi_min >= -1e-10
    print("check: PASS" if ok else "check: FAIL")
    return EXIT_OK if ok else EXIT_VALIDATION


def cmd_spectrum(scenario, args):
    real = _scenario_system(scenario)
    spec = model.classify_spectrum(real.a)
    print(f"category: {spec.category}")
    print(f"on_bisectors: {spec.on_bisectors}")
    for lam in spec.eigenvalues:
        print(f"  {_fmt(lam.real)} {'+' if lam.imag >= 0 else '-'} {_fmt(abs(lam.imag))}j")
    return EXIT_OK


def cmd_delta_curve(scenario, args):
    real = _scenario_system(scenario)
    grid_points = args.grid_points or scenario.grid_points
    horizon = args.horizon or scenario.horizon
    times = dynamics.default_time_grid(real.a, t_ref=horizon, points=grid_points)
    curve = dynamics.compute_deviation_curve(real.a, real.b, scenario.weighting,
                                             scenario.moments, times=np.concatenate([[0.0], times])
                                             if times[0] > 0 else times)
    lines = ["t,delta,signal_term,noise_term"]
    for k in range(len(curve.times)):
        lines.append(",".join(_fmt(v) for v in (
            curve.times[k], curve.delta_values[k], curve.signal_term[k], curve.noise_term[k])))
    _write_text(args.out or scenario.output, "\n".join(lines) + "\n")
    return EXIT_OK


def _report_to_dict(rep):
    def clean(x):
        if isinstance(x, float) and math.isinf(x):
            return "inf"
        if isinstance(x, float) and math.isnan(x):
            return "nan"
        return x
    return {k: clean(getattr(rep, k)) for k in (
        "epsilon", "threshold", "tau", "tau_prime", "tau_second", "tau_hat",
        "horizon_used", "certificate", "grid_points", "bisection_iterations",
        "expansion_valid")}


def cmd_tau(scenario, args):
    real = _scenario_system(scenario)
    grid_points = args.grid_points or scenario.grid_points
    horizon = args.horizon or scenario.horizon
    reports = []
    for eps in scenario.epsilon:
        rep = decoherence.decoherence_time(real, scenario.weighting, scenario.moments,
                                           eps, horizon=horizon, grid_points=grid_points)
        reports.append(rep)
        print(f"epsilon={_fmt(eps)}: tau={_fmt(rep.tau)} tau'={_fmt(rep.tau_prime)} "
              f"tau''={_fmt(rep.tau_second)} tau_hat={_fmt(rep.tau_hat)} [{rep.certificate}]")
    payload = json.dumps([_report_to_dict(r) for r in reports], indent=2)
    if args.format == "json":
        _write_text(args.out, payload + "\n")
    elif args.out:
        _write_text(args.out, payload + "\n")
    else:
        print(payload)
    return EXIT_OK


def cmd_optimize_energy(scenario, args):
    if scenario.mode != "single":
        raise ValidationError("optimize-energy requires a single-oscillator scenario")
    params = scenario.params
    weighting, moments = scenario.weighting, scenario.moments
    before = model.build_realization(params)
    opt = design.optimal_energy_matrix(params.ccr, weighting, params.coupling, moments)
    after_params = model.OqhoParams(ccr=params.ccr, energy=opt.r_star,
                                    coupling=params.coupling, selector=params.selector)
    after = model.build_realization(after_params)
    zh = design.zero_hamiltonian_condition(params.ccr, weighting, params.coupling, moments)
    ddot_before = design.ddot_delta_of_state(before.a, before.b, weighting, moments)
    print(f"method: {opt.method}")
    print(f"stationarity residual: {_fmt(opt.stationarity_residual)}")
    print(f"zero-Hamiltonian condition residual: {_fmt(zh)}")
    print(f"ddot_delta before: {_fmt(ddot_before)}  after: {_fmt(opt.ddot_delta_at_opt)}")
    print("R_star:")
    print(_matrix_lines(opt.r_star))
    for eps in scenario.epsilon:
        try:
            th_before = decoherence.tau_hat(before, weighting, moments, eps)
            th_after = decoherence.tau_hat(after, weighting, moments, eps)
            print(f"epsilon={_fmt(eps)}: tau_hat before={_fmt(th_before)} after={_fmt(th_after)}")
        except PreconditionError as exc:
            print(f"epsilon={_fmt(eps)}: tau_hat unavailable ({exc})")
    return EXIT_OK


def cmd_optimize_r12(scenario, args):
    if scenario.mode != "interconnection":
        raise ValidationError("optimize-r12 requires an interconnection scenario")
    weighting, moments = scenario.weighting, scenario.moments
    before = network.assemble(scenario.sub1, scenario.sub2, scenario.r12)
    r12_star, residual, method = network.optimal_r12(scenario.sub1, scenario.sub2,
                                                     weighting, moments)
    after = network.assemble(scenario.sub1, scenario.sub2, r12_star)
    ddot_before = design.ddot_delta_of_state(before.closed_realization.a,
                                             before.closed_realization.b, weighting, moments)
    ddot_after = design.ddot_delta_of_state(after.closed_realization.a,
                                            after.closed_realization.b, weighting, moments)
    print(f"method: {method}")
    print(f"stationarity residual: {_fmt(residual)}")
    print(f"ddot_delta before: {_fmt(ddot_before)}  after: {_fmt(ddot_after)}")
    print("R12_star:")
    print(_matrix_lines(r12_star))
    for eps in scenario.epsilon:
        try:
            th_before = decoherence.tau_hat(before.closed_realization, weighting, moments, eps)
            th_after = decoherence.tau_hat(after.closed_realization, weighting, moments, eps)
            print(f"epsilon={_fmt(eps)}: tau_hat before={_fmt(th_before)} after={_fmt(th_after)}")
        except PreconditionError as exc:
            print(f"epsilon={_fmt(eps)}: tau_hat unavailable ({exc})")
    return EXIT_OK


def cmd_interconnect(scenario, args):
    if scenario.mode != "interconnection":
        raise ValidationError("interconnect requires an interconnection scenario")
    inter = network.assemble(scenario.sub1, scenario.sub2, scenario.r12)
    pr = model.check_physical_realizability(inter.closed_realization.a,
                                            inter.closed_realization.b, inter.closed_theta)
    zh_r12, warning = network.zero_hamiltonian_r12(scenario.sub1, scenario.sub2)
    print(f"consistency residual: {_fmt(inter.consistency_residual)}")
    print(f"PR residual: {_fmt(pr)}")
    print("closed-loop R:")
    print(_matrix_lines(inter.closed_r))
    print("zero-Hamiltonian R12:")
    print(_matrix_lines(zh_r12))
    if warning:
        print(f"warning: {warning}")
    return EXIT_OK


_COMMANDS = {
    "check": cmd_check,
    "spectrum": cmd_spectrum,
    "delta-curve": cmd_delta_curve,
    "tau": cmd_tau,
    "optimize-energy": cmd_optimize_energy,
    "optimize-r12": cmd_optimize_r12,
    "interconnect": cmd_interconnect,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="oqho",
        description="Decoherence-time analysis and optimization of open quantum harmonic oscillators",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--scenario", required=True, help="path to a JSON scenario file")
        p.add_argument("--out", default=None, help="output path ('-' for stdout)")
        p.add_argument("--grid-points", type=int, default=None, dest="grid_points")
        p.add_argument("--horizon", type=float, default=None)
        p.add_argument("--tolerance", type=float, default=None)
        p.add_argument("--format", choices=["csv", "json"], default="csv")
    return parser


def main(argv=None):
    level = os.environ.get("OQHO_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING))
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(args.scenario)
    except ScenarioParseError as exc:
        log.error("parse error: %s", exc)
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValidationError, DimensionError, OqhoError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    try:
        return _COMMANDS[args.command](scenario, args)
    except (ValidationError, DimensionError, PreconditionError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (NumericalError, OqhoError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
