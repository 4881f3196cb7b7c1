"""Command-line runner: ``pvradar run <config> [--out DIR] [--seed N] [--models LIST] [--no-mc]``."""
from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .analytic import (MODELS, QuadratureError, interference_aaecc, interference_aaecc_approx,
                       interference_cbc, interference_cbc_approx)
from .circumradius import CircumradiusDistribution, SeriesAccuracyError, empirical_circumradius_sample
from .config import ConfigError, ScenarioConfig, load_config
from .montecarlo import SimulationPlan, sweep
from .results import ResultRow, emit_eta_table, write_fig3_svg, write_results_csv, write_timings_csv

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
THREADS_ENV = "PVRADAR_THREADS"
_EMPIRICAL_REF_INTENSITY = 1e-6  # per m^2; samples are rescaled to other densities

log = logging.getLogger("pvradar")


class _Failure(Exception):
    pass


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be >= 1")
    return n


def _analytic_point(cfg: ScenarioConfig, models, lam, r_exc, dist, empirical):
    """All analytic rows for one (lambda, r_exc) sweep point."""
    s = cfg.scenario(lam, r_exc)
    tol = cfg.analytic.tol
    p = s.elevation_parameter
    rows = []

    def row(model, variant, res, eta=None):
        rows.append(ResultRow(model, variant, lam, r_exc, res.mean_watts, res.error_db, p, eta,
                              res.metadata["wall_time_s"]))

    need_aaecc = {"aaecc", "cbc"} & set(models)
    aa = interference_aaecc(s, tol) if need_aaecc else None
    if "cbc" in models:
        c = interference_cbc(s, dist, tol)
        row("cbc", "analytic-fc", c, c.mean_watts / aa.mean_watts)
        if empirical is not None:
            ce = interference_cbc(s, empirical, tol)
            row("cbc", "empirical-fc", ce, ce.mean_watts / aa.mean_watts)
    if "aaecc" in models:
        row("aaecc", "average-area", aa)
    need_aa_approx = {"aaecc-approx", "cbc-approx"} & set(models)
    aap = interference_aaecc_approx(s) if need_aa_approx else None
    if "cbc-approx" in models:
        ca = interference_cbc_approx(s, dist)
        row("cbc-approx", "analytic-fc", ca, ca.mean_watts / aap.mean_watts)
        if empirical is not None:
            cae = interference_cbc_approx(s, empirical)
            row("cbc-approx", "empirical-fc", cae, cae.mean_watts / aap.mean_watts)
    if "aaecc-approx" in models:
        row("aaecc-approx", "average-area", aap)
    return rows


def run_config(cfg: ScenarioConfig, out_dir: Path, models, run_mc: bool = True,
               threads: int = 1) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    lams = cfg.network.lambda_bs_per_km2
    radii = cfg.network.r_exc_values()
    dkw = dict(series_terms=cfg.distribution.k_max, simplex_samples=cfg.distribution.simplex_samples)
    failures: list[str] = []
    rows: list[ResultRow] = []

    try:
        dists = {lam: CircumradiusDistribution(lam * 1e-6, **dkw) for lam in lams}
        empirical = {}
        if cfg.simulation.empirical_cells > 0 and ({"cbc", "cbc-approx"} & set(models)):
            ref = empirical_circumradius_sample(_EMPIRICAL_REF_INTENSITY,
                                                cfg.simulation.empirical_cells,
                                                seed=cfg.simulation.master_seed)
            # PPP scale invariance: radii scale as 1/sqrt(lam)
            empirical = {lam: ref * math.sqrt(_EMPIRICAL_REF_INTENSITY / (lam * 1e-6)) for lam in lams}
    except (SeriesAccuracyError, RuntimeError, ArithmeticError) as exc:
        print(f"error: circumradius distribution failed: {exc}", file=sys.stderr)
        return EXIT_NUMERIC

    analytic_models = [m for m in models if m != "monte-carlo"]
    points = [(lam, r) for lam in lams for r in radii]

    def work(pt):
        lam, r = pt
        try:
            return _analytic_point(cfg, analytic_models, lam, r, dists[lam], empirical.get(lam))
        except (QuadratureError, SeriesAccuracyError, ArithmeticError) as exc:
            return _Failure(f"lambda={lam:g}/km2 r_exc={r:g}km: {exc}")

    if analytic_models:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for res in pool.map(work, points):
                if isinstance(res, _Failure):
                    failures.append(str(res))
                else:
                    rows.extend(res)

    if run_mc and "monte-carlo" in models:
        sim = cfg.simulation
        base = cfg.scenario(lams[0], radii[0])
        t0 = time.perf_counter()
        try:
            plan = SimulationPlan(base, sim.n_realizations, sim.master_seed, sim.circumradius_mode,
                                  threads=threads, retain_totals=False)
            table = sweep(plan, [r * 1e3 for r in radii], [lam * 1e-6 for lam in lams])
        except (RuntimeError, ArithmeticError, ValueError) as exc:
            failures.append(f"monte-carlo: {exc}")
            table = {}
        elapsed = (time.perf_counter() - t0) / max(len(points), 1)
        for lam in lams:
            for r in radii:
                e = table.get((lam * 1e-6, r * 1e3))
                if e is None:
                    continue
                err_db = (10 * math.log10(1 + e.ci95_watts / e.mean_watts)
                          if e.mean_watts > 0 else math.inf)
                rows.append(ResultRow("monte-carlo", sim.circumradius_mode, lam, r, e.mean_watts,
                                      err_db, base.bs_array.height_m * math.sqrt(math.pi * lam * 1e-6),
                                      None, elapsed))

    good = [r for r in rows if r.ok]
    for r in rows:
        if not r.ok:
            failures.append(f"{r.model} [{r.variant}] lambda={r.lambda_bs_per_km2:g}/km2 "
                            f"r_exc={r.r_exc_km:g}km: non-finite result")

    try:
        eta_lams = cfg.eta_lambdas_per_km2()
        eta_scen = [cfg.scenario(lam, radii[0]) for lam in eta_lams]
        eta_dist = [CircumradiusDistribution(lam * 1e-6, **dkw) for lam in eta_lams]
        emit_eta_table(eta_scen, eta_dist, out_dir / "eta_table.csv")
    except (SeriesAccuracyError, ArithmeticError, ValueError) as exc:
        failures.append(f"eta table: {exc}")

    if "csv" in cfg.output.formats:
        write_results_csv(good, out_dir / "results.csv")
        write_timings_csv(good, out_dir / "timings.csv")
    if "svg" in cfg.output.formats and good:
        write_fig3_svg(good, out_dir / "fig3.svg")

    fail_log = out_dir / "failures.log"
    if failures:
        fail_log.write_text("\n".join(failures) + "\n", encoding="utf-8", newline="\n")
        for f in failures:
            print(f"error: {f}", file=sys.stderr)
        return EXIT_NUMERIC
    if fail_log.exists():
        fail_log.unlink()
    return EXIT_OK


def _parse_models(text: str):
    names = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in names if m not in MODELS]
    if bad or not names:
        raise ConfigError(f"unknown model(s) {bad or text!r}; choose from {', '.join(MODELS)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pvradar", description=__doc__.split("\n")[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="evaluate a scenario config and write result tables")
    run.add_argument("config", type=Path)
    run.add_argument("--out", type=Path, help="output directory (overrides output.directory)")
    run.add_argument("--seed", type=int, help="master seed (overrides simulation.master_seed)")
    run.add_argument("--models", help=f"comma-separated subset of {','.join(MODELS)}")
    run.add_argument("--no-mc", action="store_true", help="skip the Monte Carlo oracle")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.simulation.master_seed = args.seed
        models = _parse_models(args.models) if args.models else list(cfg.models)
        threads = thread_count()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    out = args.out if args.out is not None else Path(cfg.output.directory)
    np.seterr(all="ignore")
    return run_config(cfg, out, models, run_mc=not args.no_mc, threads=threads)


if __name__ == "__main__":
    sys.exit(main())
