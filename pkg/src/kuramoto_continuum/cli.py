"""Command-line entry point: simulate, picard, critical-angle, bands, compare-oracle.

Exit status is 0 on success, 1 when a run finishes but fails one of its
gates (an invariant, mass conservation, convergence or the oracle gate), and
2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__
from .asymptotics import (
    DegenerateMeanField,
    HorizonTooShort,
    NoSteadyState,
    band,
    comparison_check,
    critical_angle,
    epsilon_star,
    growth_identity_check,
    psi_limit,
)
from .characteristics import (
    InvariantViolation,
    MeanFieldTrace,
    SolverConfig,
    SolverError,
    evolve,
    read_trace_csv,
    trace_csv,
)
from .config import ConfigError, RunConfig, load_config
from .density import TWO_PI, fmt, mass
from .oracle import compare_solvers
from .picard import field_from_trace, picard_solve, sup_distance, worker_count

EXIT_OK, EXIT_GATE, EXIT_USAGE = 0, 1, 2

log = logging.getLogger("kuramoto_continuum")


class UsageError(Exception):
    pass


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="kuramoto-continuum", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, metavar="PATH", help="JSON run configuration")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides out_dir)")
    common.add_argument("--verbose", action="store_true", help="debug-level logging")
    sub.add_parser("simulate", parents=[common], help="forward characteristic solve")
    sub.add_parser("picard", parents=[common], help="Picard iteration to a fixed point")
    sub.add_parser("critical-angle", parents=[common], help="bracket the critical initial phase")
    b = sub.add_parser("bands", parents=[common], help="steady-state bands at reference times")
    b.add_argument("--at", type=float, action="append", metavar="TIME", help="reference time (repeatable)")
    o = sub.add_parser("compare-oracle", parents=[common], help="mean-field solver vs pairwise oracle")
    o.add_argument("--gate", type=float, metavar="REAL", help="maximum allowed phase deviation")
    return p


def _solver_config(cfg: RunConfig, **overrides) -> SolverConfig:
    base = dict(
        k=cfg.k,
        T=cfg.T,
        dt=cfg.dt,
        N=cfg.N,
        M=cfg.M,
        output_times=cfg.output_times,
        mass_tol=cfg.mass_tol,
        invariant_tol=cfg.invariant_tol,
        picard_tol=cfg.picard_tol,
        seed=cfg.seed,
        node_offset=cfg.node_offset,
    )
    base.update(overrides)
    return SolverConfig(**base)


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2, allow_nan=True) + "\n")


def _snapshot_name(t: float) -> str:
    return f"t_{fmt(t)}.csv"


def _snapshot_long_csv(snap) -> str:
    rows = ["theta,rho"] + [f"{fmt(th)},{fmt(v)}" for th, v in zip(snap.grid.nodes, snap.values)]
    return "\n".join(rows) + "\n"


# --- subcommands ----------------------------------------------------------------


def cmd_simulate(cfg: RunConfig, out: Path, args) -> int:
    rho0 = cfg.initial_density()
    try:
        run = evolve(rho0, _solver_config(cfg), history_stride=0)
    except InvariantViolation as exc:
        log.error("invariant violated: %s", exc)
        _write_json(out / "report.json", {"command": "simulate", "status": "invariant_violation", "invariant": exc.invariant, "t": exc.t, "detail": exc.detail})
        return EXIT_GATE
    (out / "trace.csv").write_text(trace_csv(run.trace))
    if run.snapshots:
        snap_dir = out / "snapshots"
        snap_dir.mkdir(exist_ok=True)
        for s in run.snapshots:
            (snap_dir / _snapshot_name(s.t)).write_text(_snapshot_long_csv(s))
    masses = {fmt(s.t): mass(s) for s in run.snapshots}
    status = "ok" if run.resolved else "mass_tolerance_exceeded"
    report = {
        "command": "simulate",
        "status": status,
        "C_final": float(run.trace.C[-1]),
        "psi_final": float(run.trace.psi[-1]),
        "C_monotone": bool(np.all(np.diff(run.trace.C) >= -1e-10)),
        "max_psi_residual": float(np.max(np.abs(run.psi_residual))),
        "mean_phase_drift": float(np.max(np.abs(run.mean_phase - run.mean_phase[0]))),
        "snapshot_masses": masses,
        "mass_tol": cfg.mass_tol,
    }
    _write_json(out / "report.json", report)
    log.info("simulate: C(T)=%s, status %s", fmt(run.trace.C[-1]), status)
    return EXIT_OK if run.resolved else EXIT_GATE


def cmd_picard(cfg: RunConfig, out: Path, args) -> int:
    rho0 = cfg.initial_density()
    dump = out / "iterates" if args.verbose else None
    field_, diag = picard_solve(
        rho0, cfg.k, cfg.T, cfg.picard_tol, cfg.max_iter, M=cfg.picard_M, dt_out=cfg.dt_out, dt=cfg.picard_dt, dump_dir=dump
    )
    run = evolve(rho0, _solver_config(cfg, output_times=()), history_stride=0, check_invariants=False)
    reference = field_from_trace(run.trace, rho0, cfg.k, field_.grid, field_.times)
    report = {"command": "picard", "diagnostics": diag.to_dict(), "sup_vs_characteristics": sup_distance(field_, reference)}
    _write_json(out / "report.json", report)
    log.info("picard: %d iterations, converged=%s", diag.iterations, diag.converged)
    return EXIT_OK if diag.converged else EXIT_GATE


def cmd_critical_angle(cfg: RunConfig, out: Path, args) -> int:
    rho0 = cfg.initial_density()
    run = evolve(rho0, _solver_config(cfg, T=cfg.horizon, output_times=()), history_stride=0, check_invariants=False)
    try:
        res = critical_angle(rho0, cfg.k, cfg.horizon, cfg.tol, probes=cfg.probes, run=run)
    except DegenerateMeanField as exc:
        _write_json(out / "report.json", {"command": "critical-angle", "status": "degenerate", "detail": str(exc)})
        return EXIT_GATE
    except HorizonTooShort as exc:
        _write_json(out / "report.json", {"command": "critical-angle", "status": "horizon_too_short", "detail": str(exc)})
        return EXIT_GATE
    limit = psi_limit(rho0, res.theta_c, res.j_C)
    psi_H = float(run.trace.psi[-1])
    gap = (limit - psi_H + math.pi) % TWO_PI - math.pi
    report = {
        "command": "critical-angle",
        "status": "ok",
        "critical_angle": res.to_dict(),
        "psi_limit": limit,
        "psi_limit_mod_2pi": limit % TWO_PI,
        "psi_at_horizon": psi_H,
        "psi_limit_gap": gap,
    }
    _write_json(out / "report.json", report)
    log.info("critical angle %s (j_C=%d)", fmt(res.theta_c), res.j_C)
    return EXIT_OK


def _eps_from_trace(trace: MeanFieldTrace) -> np.ndarray:
    """psi'(t) by centered differences, one-sided at the ends; exactly 0 for constant psi."""
    t, psi = trace.t, trace.psi
    eps = np.empty_like(psi)
    eps[1:-1] = (psi[2:] - psi[:-2]) / (t[2:] - t[:-2])
    eps[0] = (psi[1] - psi[0]) / (t[1] - t[0])
    eps[-1] = (psi[-1] - psi[-2]) / (t[-1] - t[-2])
    return eps


def cmd_bands(cfg: RunConfig, out: Path, args) -> int:
    times = tuple(args.at) if args.at else cfg.band_times
    if not times:
        raise UsageError("bands needs at least one reference time (--at or band_times)")
    if cfg.trace is not None:
        try:
            trace = read_trace_csv(Path(cfg.trace).read_text())
        except OSError as exc:
            raise UsageError(f"cannot read trace {cfg.trace}: {exc.strerror}") from exc
        except ValueError as exc:
            raise UsageError(f"bad trace {cfg.trace}: {exc}") from exc
        eps, run = _eps_from_trace(trace), None
    else:
        run = evolve(cfg.initial_density(), _solver_config(cfg, output_times=()), history_stride=1, check_invariants=False)
        trace, eps = run.trace, run.eps
    entries = []
    for T in times:
        if not T < trace.T:
            raise UsageError(f"reference time {T} must precede the end of the trace ({trace.T})")
        es = epsilon_star(eps, trace.t, T, trace.T)
        entry = {"T": T, "eps_star": es}
        try:
            entry.update(status="ok", band=band(T, trace, es, cfg.k).to_dict())
        except NoSteadyState as exc:
            entry.update(status="no_band", detail=str(exc))
        except DegenerateMeanField as exc:
            entry.update(status="degenerate", detail=str(exc))
        entries.append(entry)
    report = {"command": "bands", "T_end": trace.T, "bands": entries}
    if run is not None:
        report["growth_identity"] = growth_identity_check(run.trace, run.history, cfg.k).to_dict()
        checks = []
        for e in entries:
            if e["status"] == "ok":
                for th in np.linspace(0.0, TWO_PI, 10, endpoint=False):
                    checks.append(comparison_check(e["T"], float(th), trace, e["eps_star"], cfg.k).to_dict())
        report["comparison_checks"] = checks
    _write_json(out / "report.json", report)
    return EXIT_OK


def cmd_compare_oracle(cfg: RunConfig, out: Path, args) -> int:
    gate = args.gate if args.gate is not None else cfg.gate
    try:
        rep = compare_solvers(cfg.initial_density(), _solver_config(cfg, output_times=()), oracle_dt=cfg.oracle_dt, gate=gate)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    _write_json(out / "report.json", {"command": "compare-oracle", **rep.to_dict()})
    log.info("oracle max deviation %s (gate %s)", fmt(rep.max_deviation), gate)
    return EXIT_OK if rep.passed else EXIT_GATE


COMMANDS = {
    "simulate": cmd_simulate,
    "picard": cmd_picard,
    "critical-angle": cmd_critical_angle,
    "bands": cmd_bands,
    "compare-oracle": cmd_compare_oracle,
}


def _setup_logging(out: Path, verbose: bool) -> logging.Handler:
    log.setLevel(logging.DEBUG if verbose else logging.INFO)
    handler = logging.FileHandler(out / "run.log", mode="w")
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    log.addHandler(handler)
    if verbose:
        console = logging.StreamHandler(sys.stderr)
        console.setFormatter(logging.Formatter("%(levelname)s: %(message)s"))
        log.addHandler(console)
    return handler


def run(argv: list[str] | None = None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        cfg = load_config(args.config)
        worker_count()
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.out:
        cfg = replace(cfg, out_dir=args.out, applied_defaults=tuple(d for d in cfg.applied_defaults if d != "out_dir"))
    out = Path(cfg.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        print(f"error: output directory {out} is not writable: {exc.strerror}", file=sys.stderr)
        return EXIT_USAGE

    handlers = list(log.handlers)
    handler = _setup_logging(out, args.verbose)
    try:
        log.info("command: %s", args.command)
        for key in cfg.applied_defaults:
            log.info("default applied: %s = %s", key, json.dumps(getattr(cfg, key) if not isinstance(getattr(cfg, key), tuple) else list(getattr(cfg, key))))
        log.info("resolved config: %s", json.dumps(cfg.to_dict(), sort_keys=True))
        return COMMANDS[args.command](cfg, out, args)
    except UsageError as exc:
        log.error("%s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SolverError as exc:
        log.error("solver failure: %s", exc)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GATE
    finally:
        for h in list(log.handlers):
            if h not in handlers:
                log.removeHandler(h)
                h.close()


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
