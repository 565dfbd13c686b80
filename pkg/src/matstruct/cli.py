"""Command-line front end.

    matstruct simulate    --config run.toml [--out DIR]
    matstruct analyze     --config run.toml [--out DIR]
    matstruct verify      --suite NAME|all
    matstruct sweep       --config sweep.toml [--workers N] [--out DIR]
    matstruct dump-tables --config run.toml [--out DIR]

Exit codes: 0 success, 1 runtime error or failed verification, 2 invalid
configuration or violated model hypothesis.
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__, analysis, io, solver, verify
from .characteristics import CharTables
from .config import ConfigError, RunConfig, build_spec
from .model import HypothesisViolation

log = logging.getLogger("matstruct")


def _config(args) -> RunConfig:
    if args.config is None:
        return RunConfig.from_dict({})
    return RunConfig.load(args.config)


def cmd_simulate(cfg: RunConfig, out: Path) -> int:
    spec, data = cfg.spec(), cfg.data()
    tables = CharTables(spec)
    sol = solver.simulate(spec, data, cfg.T, M=cfg.M, dt=cfg.dt, dump_times=cfg.dump_times(), tables=tables)
    io.write_fields_csv(out / "fields.csv", sol)
    traj = sol.boundary
    keep = traj.t <= cfg.T + 0.5 * sol.dt
    io.write_csv(out / "immature.csv", ["t", "x", "y"], zip(traj.t[keep], traj.x[keep], traj.y[keep]))
    io.write_initial_csv(out / "initial_mu.csv", out / "initial_gamma.csv", data, sol.m, sol.grid.tau_theta)
    diag = {k: v for k, v in sol.diagnostics.items() if not k.startswith("_")}
    io.write_json(out / "meta.json", {
        "version": __version__,
        "config": cfg.effective(),
        "model": spec.to_dict(),
        "initial_source": data.source,
        "dt": sol.dt,
        "dump_times": sol.t,
        "diagnostics": diag,
        "files": ["fields.csv", "immature.csv", "initial_mu.csv", "initial_gamma.csv"],
    })
    print(f"simulated to T={cfg.T:g} with M={cfg.M}, dt={sol.dt:.6g}: {diag['steps']} steps; wrote {out}")
    return 0


def cmd_analyze(cfg: RunConfig, out: Path) -> int:
    spec = cfg.spec()
    report = analysis.classify(spec, b=cfg.b, simulate_immature=cfg.simulate_immature)
    io.write_json(out / "stability.json", {"config": cfg.effective(), **report.to_dict()})
    print(report.summary())
    return 0


def cmd_verify(suite: str) -> int:
    names = list(verify.SUITES) if suite == "all" else [suite]
    ok = True
    for name in names:
        for check in verify.run_suite(name):
            print(f"[{name}] {check.line()}")
            ok &= check.passed
    print("verification passed" if ok else "verification FAILED")
    return 0 if ok else 1


def _sweep_point(model: dict) -> dict:
    try:
        report = analysis.classify(build_spec(model))
    except HypothesisViolation as exc:
        return {**model, "verdict": "HypothesisViolation", "error": str(exc)}
    lc, im = report.local, report.immature
    return {**model, "verdict": report.verdict, "local_lhs": lc.lhs, "local_rhs": lc.rhs,
            "delta_strict": report.delta_strict["holds"], "margin": im["margin"],
            "dominant_root": im["dominant_root"], "error": ""}


def cmd_sweep(cfg: RunConfig, out: Path, workers: int) -> int:
    points = cfg.sweep_points()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, points))
    else:
        rows = [_sweep_point(p) for p in points]
    header = list(rows[0])
    for r in rows[1:]:
        header += [k for k in r if k not in header]
    io.write_csv(out / "sweep.csv", header, ([r.get(k, "") for k in header] for r in rows))
    io.write_json(out / "sweep_meta.json", {"version": __version__, "config": cfg.effective(), "points": len(rows)})
    counts: dict = {}
    for r in rows:
        counts[r["verdict"]] = counts.get(r["verdict"], 0) + 1
    print(f"{len(rows)} points: " + ", ".join(f"{k} {v}" for k, v in sorted(counts.items())))
    return 0


def cmd_dump_tables(cfg: RunConfig, out: Path, n: int = 201) -> int:
    tables = CharTables(cfg.spec())
    m = np.linspace(0.0, 1.0, n)
    cols = [m, tables.h(m), tables.theta(m), tables.delta(m), tables.xi_bar(m), tables.pi_bar(m)]
    io.write_csv(out / "tables.csv", ["m", "h", "Theta", "Delta", "xi_bar", "pi_bar"], zip(*cols))
    print(f"wrote {out / 'tables.csv'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="matstruct", description="Maturity-structured cell population: simulation and checks.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, workers=False):
        sp.add_argument("--config", metavar="PATH", help="TOML run configuration (defaults apply if omitted)")
        sp.add_argument("--out", metavar="DIR", help="output directory (overrides config and $MATSTRUCT_OUT)")
        if workers:
            sp.add_argument("--workers", metavar="N", type=int, default=1, help="worker processes")

    common(sub.add_parser("simulate", help="run the field solver; writes fields.csv, immature.csv, meta.json"))
    common(sub.add_parser("analyze", help="evaluate the stability criteria; writes stability.json"))
    common(sub.add_parser("sweep", help="classify a grid of parameters; writes sweep.csv"), workers=True)
    common(sub.add_parser("dump-tables", help="write characteristic tables as CSV"))
    v = sub.add_parser("verify", help="run built-in verification suites")
    v.add_argument("--suite", metavar="NAME", default="all", choices=[*verify.SUITES, "all"],
                   help="one of: " + ", ".join([*verify.SUITES, "all"]))
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "verify":
            return cmd_verify(args.suite)
        cfg = _config(args)
        out = cfg.out_dir(args.out)
        if args.command == "simulate":
            return cmd_simulate(cfg, out)
        if args.command == "analyze":
            return cmd_analyze(cfg, out)
        if args.command == "sweep":
            return cmd_sweep(cfg, out, max(1, args.workers))
        return cmd_dump_tables(cfg, out)
    except HypothesisViolation as exc:
        print(f"error: model hypothesis violated: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - report any module error as a failed run
        log.debug("failure", exc_info=True)
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
