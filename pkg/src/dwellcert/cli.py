"""Command-line interface.

Subcommands: bound (single-mu certificate), sweep (mu grid), verify
(recheck a certificate file), simulate (empirical trajectory checks).
Exit codes are stable API: 0 success, 1 input or IO error, 2 no
certificate (the LP solved but the decay rate is not positive), 3
verification or simulation checks failed.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from dwellcert import certificate as certmod
from dwellcert import simulation as sim
from dwellcert.lp_model import assemble, row_count
from dwellcert.solver import OPTIMAL, SolverConfig, available_backends, solve
from dwellcert.sweep import refine as sweep_refine
from dwellcert.sweep import sweep as run_sweep
from dwellcert.sweep import write_sweep_csv
from dwellcert.systems import DwellParams, SystemFormatError, load_system
from dwellcert.triangulation import build_fan

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NO_CERTIFICATE = 2
EXIT_CHECK_FAILED = 3


@dataclass
class RunConfig:
    command: str
    system_path: str | None = None
    K: int = 0
    mu: float = 1.0
    mu_range: tuple[float, float, float] | None = None
    a_lower: float = 1e-5
    a_upper: float = 10.0
    backend: str = "reference"
    cert_out: str | None = None
    cert_in: str | None = None
    out: str | None = None
    out_dir: str | None = None
    refine_iters: int = 0
    seeds: int = 0
    seed_base: int = 0
    tau_factor: float = 1.1
    horizon: float = 0.0
    sample_dt: float = 0.5
    as_json: bool = False


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="dwellcert",
        description="Certified average dwell-time bounds for switched "
                    "linear systems")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--format", choices=["text", "json"], default="text")

    sp = sub.add_parser("bound", help="compute and verify one certificate")
    sp.add_argument("--system", required=True)
    sp.add_argument("--K", type=int, required=True)
    sp.add_argument("--mu", type=float, required=True)
    sp.add_argument("--a-lower", type=float, default=1e-5)
    sp.add_argument("--a-upper", type=float, default=10.0)
    sp.add_argument("--backend", default="reference",
                    choices=available_backends())
    sp.add_argument("--cert", help="write the certificate here")
    common(sp)

    sp = sub.add_parser("sweep", help="sweep the jump factor mu")
    sp.add_argument("--system", required=True)
    sp.add_argument("--K", type=int, required=True)
    sp.add_argument("--mu-min", type=float, required=True)
    sp.add_argument("--mu-max", type=float, required=True)
    sp.add_argument("--mu-step", type=float, required=True)
    sp.add_argument("--a-lower", type=float, default=1e-5)
    sp.add_argument("--a-upper", type=float, default=10.0)
    sp.add_argument("--backend", default="reference",
                    choices=available_backends())
    sp.add_argument("--refine", type=int, default=0, metavar="ITERS")
    sp.add_argument("--out", required=True, help="CSV output path")
    common(sp)

    sp = sub.add_parser("verify", help="recheck a certificate file")
    sp.add_argument("--cert", required=True)
    common(sp)

    sp = sub.add_parser("simulate", help="empirical certificate checks")
    sp.add_argument("--cert", required=True)
    sp.add_argument("--seeds", type=int, required=True)
    sp.add_argument("--tau-factor", type=float, default=1.1)
    sp.add_argument("--horizon", type=float, default=0.0,
                    help="0 picks a horizon from the certified decay rate")
    sp.add_argument("--sample-dt", type=float, default=0.5)
    sp.add_argument("--seed-base", type=int, default=0)
    sp.add_argument("--out-dir", required=True)
    common(sp)
    return p


def _emit(doc: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(doc, indent=2))
        return
    for key, val in doc.items():
        print(f"{key}: {val}")


def cmd_bound(cfg: RunConfig) -> int:
    try:
        system = load_system(cfg.system_path)
    except (SystemFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    params = DwellParams(a_lower=cfg.a_lower, a_upper=cfg.a_upper, mu=cfg.mu)

    t0 = time.perf_counter()
    tri = build_fan(system.n, cfg.K)
    lp, vmap = assemble(tri, system, params)
    sol = solve(lp, SolverConfig(backend=cfg.backend))
    if sol.status != OPTIMAL:
        print(f"error: solver returned {sol.status}: {sol.message}",
              file=sys.stderr)
        return EXIT_ERROR
    try:
        cert = certmod.extract(sol, tri, system, params)
    except certmod.NoCertificateError as exc:
        print(f"no certificate: {exc}", file=sys.stderr)
        return EXIT_NO_CERTIFICATE
    report = certmod.verify(cert, tri, system)
    elapsed = time.perf_counter() - t0

    nvars, nc2, nc3 = row_count(tri, system.num_modes)
    doc = {
        "n": system.n, "K": cfg.K, "mu": cfg.mu,
        "alpha": cert.alpha,
        "a_upper_prime": cert.a_upper_prime,
        "tau_a": cert.tau_a,
        "bound_kind": ("common function, arbitrary switching"
                       if cfg.mu == 1.0 else
                       "infimal bound, stability guaranteed for any "
                       "average dwell-time strictly greater"),
        "lp_variables": nvars, "lp_decay_rows": nc2, "lp_jump_rows": nc3,
        "solver_iterations": sol.iterations,
        "solve_seconds": round(elapsed, 3),
        "verification": report.summary(),
    }
    _emit(doc, cfg.as_json)
    if cfg.cert_out:
        certmod.save_certificate(cert, cfg.cert_out)
        print(f"certificate written to {cfg.cert_out}")
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_sweep(cfg: RunConfig) -> int:
    try:
        system = load_system(cfg.system_path)
    except (SystemFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    lo, hi, step = cfg.mu_range
    if step <= 0 or hi < lo or lo < 1.0:
        print("error: need 1 <= mu-min <= mu-max and mu-step > 0",
              file=sys.stderr)
        return EXIT_ERROR
    grid = np.arange(lo, hi + 0.5 * step, step)
    params = DwellParams(a_lower=cfg.a_lower, a_upper=cfg.a_upper, mu=lo)
    result = run_sweep(system, cfg.K, grid, params,
                       SolverConfig(backend=cfg.backend))
    write_sweep_csv(result, cfg.out)

    best = result.best_point
    doc: dict = {"K": cfg.K, "points": len(result.points), "csv": cfg.out}
    if best is None:
        doc["best"] = "none (no positive decay rate on the grid)"
        _emit(doc, cfg.as_json)
        return EXIT_NO_CERTIFICATE
    doc.update({"best_mu": best.mu, "best_alpha": best.alpha,
                "best_tau_a": best.tau_a})
    if cfg.refine_iters > 0:
        idx = result.best
        lo_b = result.points[max(0, idx - 1)].mu
        hi_b = result.points[min(len(result.points) - 1, idx + 1)].mu
        refined = sweep_refine(system, cfg.K, (lo_b, hi_b), params,
                               cfg.refine_iters,
                               SolverConfig(backend=cfg.backend))
        if refined.tau_a < best.tau_a:
            doc.update({"refined_mu": refined.mu,
                        "refined_tau_a": refined.tau_a})
    _emit(doc, cfg.as_json)
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    try:
        cert = certmod.load_certificate(cfg.cert_in)
    except (certmod.CertificateFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    tri = cert.rebuild_triangulation()
    report = certmod.verify(cert, tri, cert.system)
    doc = {
        "n": cert.n, "K": cert.K, "mu": cert.params.mu,
        "alpha": cert.alpha, "tau_a": cert.tau_a,
        "passed": report.passed,
    }
    doc.update({f"residual_{k}": v for k, v in report.residuals.items()})
    if not report.passed:
        doc["offenders"] = [str(o) for o in report.offenders[:10]]
    _emit(doc, cfg.as_json)
    return EXIT_OK if report.passed else EXIT_CHECK_FAILED


def cmd_simulate(cfg: RunConfig) -> int:
    try:
        cert = certmod.load_certificate(cfg.cert_in)
    except (certmod.CertificateFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    tri = cert.rebuild_triangulation()
    system = cert.system

    arbitrary = cert.tau_a == 0.0
    signal_tau = 0.5 if arbitrary else cfg.tau_factor * cert.tau_a
    if not arbitrary and cfg.tau_factor <= 1.0:
        print("error: --tau-factor must exceed 1", file=sys.stderr)
        return EXIT_ERROR
    horizon = cfg.horizon
    if horizon <= 0.0:
        horizon = sim.suggest_horizon(cert, math_inf_if(arbitrary, signal_tau))

    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(12345)
    failures = 0
    rows = []
    for k in range(cfg.seeds):
        seed = cfg.seed_base + k
        signal = sim.generate_adt_signal(seed, system.num_modes, signal_tau,
                                         N0=2.0, horizon=horizon)
        x0 = rng.standard_normal(system.n)
        x0 /= np.linalg.norm(x0)
        rep = sim.check_certificate_empirically(
            cert, tri, system, signal, x0, sample_dt=cfg.sample_dt,
            require_faster_signal=not arbitrary)
        traj = sim.integrate(system, signal, x0, cfg.sample_dt)
        sim.write_trajectory_csv(traj, cert, tri,
                                 out_dir / f"trajectory_{seed}.csv")
        rows.append({"seed": seed, "passed": rep.passed,
                     "final_ratio": rep.final_ratio})
        if not rep.passed:
            failures += 1
    doc = {"seeds": cfg.seeds, "signal_tau_a": signal_tau,
           "horizon": horizon, "failures": failures,
           "out_dir": str(out_dir)}
    if cfg.as_json:
        doc["runs"] = rows
    _emit(doc, cfg.as_json)
    return EXIT_OK if failures == 0 else EXIT_CHECK_FAILED


def math_inf_if(cond: bool, value: float) -> float:
    return float("inf") if cond else value


def _to_config(ns: argparse.Namespace) -> RunConfig:
    cfg = RunConfig(command=ns.command, as_json=(ns.format == "json"))
    if ns.command in ("bound", "sweep"):
        cfg.system_path = ns.system
        cfg.K = ns.K
        cfg.a_lower = ns.a_lower
        cfg.a_upper = ns.a_upper
        cfg.backend = ns.backend
        if cfg.K < 1:
            raise ValueError("K must be a positive integer")
        if not (0 < cfg.a_lower < cfg.a_upper):
            raise ValueError("need 0 < a-lower < a-upper")
    if ns.command == "bound":
        cfg.mu = ns.mu
        cfg.cert_out = ns.cert
        if cfg.mu < 1.0:
            raise ValueError("mu must be at least 1")
    elif ns.command == "sweep":
        cfg.mu_range = (ns.mu_min, ns.mu_max, ns.mu_step)
        cfg.refine_iters = ns.refine
        cfg.out = ns.out
    elif ns.command == "verify":
        cfg.cert_in = ns.cert
    elif ns.command == "simulate":
        cfg.cert_in = ns.cert
        cfg.seeds = ns.seeds
        cfg.tau_factor = ns.tau_factor
        cfg.horizon = ns.horizon
        cfg.sample_dt = ns.sample_dt
        cfg.seed_base = ns.seed_base
        if cfg.seeds < 1:
            raise ValueError("--seeds must be positive")
    return cfg


def main(argv: list[str] | None = None) -> int:
    ns = _parser().parse_args(argv)
    try:
        cfg = _to_config(ns)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    handlers = {"bound": cmd_bound, "sweep": cmd_sweep,
                "verify": cmd_verify, "simulate": cmd_simulate}
    try:
        return handlers[cfg.command](cfg)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
