"""Network Monte Carlo: sample BS deployments and sum worst-case per-BS interference."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytic import NetworkScenario
from .array import gain, max_gain_bound
from .channel import pathloss
from .circumradius import CircumradiusDistribution
from .tessellation import Annulus, PointPattern, build_tessellation, default_guard, sample_ppp

log = logging.getLogger(__name__)

MODES = ("true-voronoi", "iid-analytic", "fixed-average-area")
ANALYTIC_COUNTERPART = {"true-voronoi": "cbc", "iid-analytic": "cbc", "fixed-average-area": "aaecc"}


@dataclass(frozen=True)
class BoundaryPolicy:
    """How cells near the network edge get a circumradius in true-voronoi mode.

    ``guard_m=None`` uses 3/sqrt(pi*lam).  ``fallback='analytic'`` draws a
    replacement from the circumradius distribution; ``'discard'`` drops
    those transmitters.
    """

    guard_m: float | None = None
    fallback: str = "analytic"

    def __post_init__(self):
        if self.fallback not in ("analytic", "discard"):
            raise ValueError(f"unknown boundary fallback {self.fallback!r}")
        if self.guard_m is not None and not self.guard_m >= 0:
            raise ValueError("guard_m must be >= 0")


@dataclass
class SimulationPlan:
    scenario: NetworkScenario
    n_realizations: int = 200
    master_seed: int = 0
    circumradius_mode: str = "true-voronoi"
    boundary_policy: BoundaryPolicy = field(default_factory=BoundaryPolicy)
    distribution: CircumradiusDistribution | None = None
    threads: int = 1
    retain_totals: bool = True

    def __post_init__(self):
        if int(self.n_realizations) != self.n_realizations or self.n_realizations < 1:
            raise ValueError("n_realizations must be a positive integer")
        if self.circumradius_mode not in MODES:
            raise ValueError(f"unknown circumradius mode {self.circumradius_mode!r}")
        if not math.isfinite(self.scenario.r_net_m):
            raise ValueError("Monte Carlo needs a finite network radius")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")

    def realization_seed(self, i: int) -> np.random.SeedSequence:
        return np.random.SeedSequence([self.master_seed, i])


@dataclass
class SimulationEstimate:
    mean_watts: float
    std_error_watts: float
    n_realizations: int
    per_realization_totals: np.ndarray | None = None
    flagged_fraction: float = 0.0

    @property
    def ci95_watts(self) -> float:
        return 1.96 * self.std_error_watts


def _estimate(totals: np.ndarray, keep: bool, flagged_fraction: float) -> SimulationEstimate:
    n = len(totals)
    se = float(totals.std(ddof=1)) / math.sqrt(n) if n > 1 else math.inf
    return SimulationEstimate(float(totals.mean()), se, n, totals.copy() if keep else None,
                              flagged_fraction)


def _distribution(p: SimulationPlan, intensity: float) -> CircumradiusDistribution:
    d = p.distribution
    if d is None or not math.isclose(d.intensity, intensity, rel_tol=1e-12):
        d = CircumradiusDistribution(intensity)
    return d


def _deployment(s: NetworkScenario, intensity_max: float, seed):
    """PPP at the largest swept density on the disk of radius r_net, with per-point marks.

    Mark ``u`` thins the pattern to any lower density (keep ``u < lam/lam_max``);
    mark ``v`` is the shared uniform behind analytic circumradius draws.  Both
    couple the densities of a sweep so ratios between them are low-variance.
    """
    rng = np.random.default_rng(seed)
    pattern = sample_ppp(intensity_max, Annulus(0.0, s.r_net_m), rng)
    n = len(pattern)
    return pattern, rng.random(n), rng.random(n)


def _contributions(p: SimulationPlan, s: NetworkScenario, d, pattern, u, v, intensity_max):
    """Per-BS worst-case interference (W) and ground ranges at density ``s.intensity_bs``.

    The whole disk is populated so cells next to the exclusion zone keep
    their true shape; callers drop BSs inside r_exc.  Only BSs in the
    radar's front half-plane transmit toward it.
    """
    keep = u < s.intensity_bs / intensity_max
    pts = pattern.points[keep]
    v = v[keep]
    n = len(pts)
    mode = p.circumradius_mode
    flagged = np.zeros(n, dtype=bool)
    if mode == "fixed-average-area":
        rc = np.full(n, s.average_area_radius)
    elif mode == "iid-analytic":
        rc = d.quantile(v)
    else:
        guard = p.boundary_policy.guard_m
        if guard is None:
            guard = default_guard(s.intensity_bs)
        sub = PointPattern(pts, pattern.region, s.intensity_bs)
        rc = np.full(n, np.nan)
        if n >= 3:
            try:
                rc = build_tessellation(sub, guard).circumradii
            except ValueError:  # collinear: no bounded cells
                pass
        flagged = np.isnan(rc)
        if flagged.any() and p.boundary_policy.fallback == "analytic":
            rc[flagged] = d.quantile(v[flagged])

    r = np.hypot(pts[:, 0], pts[:, 1])
    theta = np.arctan2(pts[:, 1], pts[:, 0])
    tx = (theta >= -math.pi / 2) & (theta < math.pi / 2) & ~np.isnan(rc) & (r > 0)
    r, theta, rc = r[tx], theta[tx], rc[tx]
    phi_t = np.arctan(s.pathloss.height_difference / r)
    scan = s.radar_scan
    g_r = gain(s.radar_array, theta, -phi_t, scan.azimuth_rad, scan.elevation_rad)
    g_b = max_gain_bound(s.bs_array, phi_t, s.phi_m(rc))
    power = s.dl.per_user_power * pathloss(s.pathloss, r) * g_r * g_b / s.fdr if len(r) else r
    return np.atleast_1d(power), r, int(flagged.sum()), n


def _map(p: SimulationPlan, fn, n):
    if p.threads == 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=p.threads) as pool:
        return list(pool.map(fn, range(n)))  # results in realization order


def _run_grid(p: SimulationPlan, lambdas, r_exc_values):
    """Totals of shape (n_realizations, len(lambdas), len(r_exc_values)) and flagged fractions."""
    r_exc = np.asarray(r_exc_values, dtype=float)
    lam_max = max(lambdas)
    scenarios = [p.scenario.with_(intensity_bs=lam) for lam in lambdas]
    dists = [None if p.circumradius_mode == "fixed-average-area" else _distribution(p, lam)
             for lam in lambdas]

    def one(i):
        pattern, u, v = _deployment(p.scenario, lam_max, p.realization_seed(i))
        totals = np.zeros((len(lambdas), len(r_exc)))
        counts = np.zeros((len(lambdas), 2), dtype=np.int64)
        for j, (s, d) in enumerate(zip(scenarios, dists)):
            power, r, n_flag, n_pts = _contributions(p, s, d, pattern, u, v, lam_max)
            # thinning: BSs inside a larger exclusion radius are removed from the same pattern
            totals[j] = [power[r >= x].sum() for x in r_exc]
            counts[j] = n_flag, n_pts
        return totals, counts

    out = _map(p, one, p.n_realizations)
    totals = np.stack([o[0] for o in out])
    counts = np.sum([o[1] for o in out], axis=0)
    frac = np.divide(counts[:, 0], counts[:, 1], out=np.zeros(len(lambdas)),
                     where=counts[:, 1] > 0)
    if p.circumradius_mode == "true-voronoi":
        for lam, (n_flag, n_pts), f in zip(lambdas, counts, frac):
            if n_pts > 0 and n_flag == n_pts and p.boundary_policy.fallback == "discard":
                raise RuntimeError("boundary policy left no interior cells; enlarge the "
                                   "network or reduce the guard distance")
            log.info("lambda=%.3g/m^2: %.2f%% of cells boundary-flagged (%s fallback)",
                     lam, 100 * f, p.boundary_policy.fallback)
    return totals, frac


def run_simulation(p: SimulationPlan) -> SimulationEstimate:
    """Mean aggregate worst-case interference (W) at the radar over independent deployments."""
    totals, frac = _run_grid(p, [p.scenario.intensity_bs], [p.scenario.r_exc_m])
    return _estimate(totals[:, 0, 0], p.retain_totals, float(frac[0]))


def sweep(p: SimulationPlan, r_exc_values, lambda_values) -> dict[tuple[float, float], SimulationEstimate]:
    """Estimates keyed by ``(intensity per m^2, r_exc in m)``.

    Each realization is shared across all exclusion radii, so per-realization
    totals are non-increasing in r_exc, and lower densities are independent
    thinnings of the densest pattern.
    """
    r_list = [float(x) for x in r_exc_values]
    lam_list = [float(x) for x in lambda_values]
    if not r_list or not lam_list:
        raise ValueError("sweep grids must be non-empty")
    if min(r_list) <= 0 or max(r_list) >= p.scenario.r_net_m:
        raise ValueError("every r_exc must lie in (0, r_net)")
    totals, frac = _run_grid(p, lam_list, r_list)
    return {(lam, x): _estimate(totals[:, j, k], p.retain_totals, float(frac[j]))
            for j, lam in enumerate(lam_list) for k, x in enumerate(r_list)}
