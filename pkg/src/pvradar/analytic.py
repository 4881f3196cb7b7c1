"""Mean aggregate interference at a radar from a PPP of beamforming BSs.

Both cell models share one radial integral: for a BS at ground range r the
radar gain averaged over the front half-plane of azimuths is multiplied by
the expected BS gain bound, which is where the cell models differ.  The
circumcircle model (``cbc``) averages the bound over the circumradius
distribution; the average-area model (``aaecc``) uses the single radius
1/sqrt(pi*lam).  The ``-approx`` variants put both BS and radar at the
horizon and integrate the power law to infinity in closed form.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate

from .array import ArrayGeometry, BeamDirection, gain, max_gain_bound
from .channel import DownlinkConfig, PathlossModel, los_elevations
from .circumradius import CircumradiusDistribution

MODELS = ("cbc", "cbc-approx", "aaecc", "aaecc-approx", "monte-carlo")
_TAIL_FACTOR = 1e3  # infinite networks: quadrature to this multiple of r_exc, then a power-law tail


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""


@dataclass(frozen=True)
class NetworkScenario:
    bs_array: ArrayGeometry
    radar_array: ArrayGeometry
    radar_scan: BeamDirection
    dl: DownlinkConfig
    pathloss: PathlossModel
    intensity_bs: float  # per m^2
    r_exc_m: float
    r_net_m: float = 100e3
    fdr: float = 1.0

    def __post_init__(self):
        if not self.intensity_bs > 0:
            raise ValueError("intensity_bs must be > 0")
        if not 0 < self.r_exc_m < self.r_net_m:
            raise ValueError(f"need 0 < r_exc < r_net, got {self.r_exc_m}, {self.r_net_m}")
        if math.isinf(self.r_net_m) and not self.pathloss.alpha > 2:
            raise ValueError("an infinite network needs alpha > 2 for convergence")
        if (self.pathloss.h_bs_m, self.pathloss.h_rad_m) != (self.bs_array.height_m,
                                                             self.radar_array.height_m):
            raise ValueError("pathloss heights disagree with the array mount heights")

    @classmethod
    def reference_deployment(cls, lambda_bs_per_km2: float = 0.1, r_exc_km: float = 5.0,
                       **overrides) -> "NetworkScenario":
        """40x40 radar at 20 m scanning (60, -10) deg; 10x10 BSs at 50 m; 5 GHz; K=4; 1 W."""
        bs = ArrayGeometry(10, 10, 50.0)
        radar = ArrayGeometry(40, 40, 20.0)
        kw = dict(
            bs_array=bs, radar_array=radar,
            radar_scan=BeamDirection.from_degrees(60.0, -10.0),
            dl=DownlinkConfig(4, 1.0),
            pathloss=PathlossModel.uma_los(5.0, bs.height_m, radar.height_m),
            intensity_bs=lambda_bs_per_km2 * 1e-6,
            r_exc_m=r_exc_km * 1e3,
            r_net_m=100e3,
        )
        kw.update(overrides)
        return cls(**kw)

    def with_(self, **changes) -> "NetworkScenario":
        return replace(self, **changes)

    @property
    def average_area_radius(self) -> float:
        return 1.0 / math.sqrt(math.pi * self.intensity_bs)

    @property
    def elevation_parameter(self) -> float:
        """h_BS * sqrt(pi * lam_BS)."""
        return self.bs_array.height_m * math.sqrt(math.pi * self.intensity_bs)

    @property
    def prefactor(self) -> float:
        """lam * (P/K) * PL(r0) / FDR, in W / m^2 times the pathloss reference."""
        return (self.intensity_bs * self.dl.per_user_power * self.pathloss.pl_r0) / self.fdr

    def phi_m(self, r_c):
        """Lowest serving elevation for a cell of radius ``r_c``."""
        with np.errstate(divide="ignore"):
            return np.arctan(self.bs_array.height_m / np.asarray(r_c, dtype=float))


@dataclass
class InterferenceResult:
    model: str
    mean_watts: float
    error_estimate: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if not math.isfinite(self.mean_watts) or self.mean_watts < 0:
            raise ValueError(f"mean_watts must be finite and >= 0, got {self.mean_watts}")
        if not self.error_estimate >= 0:
            raise ValueError("error_estimate must be >= 0")

    @property
    def mean_dbm(self) -> float:
        return watts_to_dbm(self.mean_watts)

    @property
    def error_db(self) -> float:
        if self.mean_watts == 0:
            return math.inf
        return 10.0 * math.log10(1.0 + self.error_estimate / self.mean_watts)


def watts_to_dbm(w: float) -> float:
    return 10.0 * math.log10(w) + 30.0 if w > 0 else -math.inf


def dbm_to_watts(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


# --- 1D rules -----------------------------------------------------------------

_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _gauss_legendre(n):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def panel_quadrature(f, breaks, order: int = 16):
    """Composite Gauss-Legendre over panels ``breaks[i]..breaks[i+1]``.

    Returns the ``2*order`` estimate and its difference from the ``order``
    estimate as the error.  ``f`` must accept a 1D array.
    """
    b = np.asarray(breaks, dtype=float)
    lo, hi = b[:-1], b[1:]
    half, mid = 0.5 * (hi - lo), 0.5 * (hi + lo)
    estimates = []
    for n in (order, 2 * order):
        x, w = _gauss_legendre(n)
        nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        vals = np.asarray(f(nodes), dtype=float).reshape(len(lo), n)
        estimates.append(float(np.sum(half * (vals @ w))))
    return estimates[1], abs(estimates[1] - estimates[0])


def radar_azimuth_integral(g_rad: ArrayGeometry, scan: BeamDirection, phi_r: float,
                           order: int = 16):
    """Integral over azimuth in [-pi/2, pi/2] of the radar gain at elevation ``phi_r``.

    Panels are cut at the azimuth-factor nulls, spaced 2/n_az in the
    sine domain, so each panel holds a single lobe.
    """
    c = math.cos(phi_r)
    u_scan = math.sin(scan.azimuth_rad) * math.cos(scan.elevation_rad)
    step = 2.0 / g_rad.n_az
    m = np.arange(math.floor((-c - u_scan) / step), math.ceil((c - u_scan) / step) + 1)
    u = u_scan + step * m
    u = u[(u > -c) & (u < c)]
    th = np.arcsin(u / c)
    breaks = np.unique(np.concatenate([[-math.pi / 2, math.pi / 2], th,
                                       np.linspace(-math.pi / 2, math.pi / 2, 9)]))
    return panel_quadrature(
        lambda t: gain(g_rad, t, phi_r, scan.azimuth_rad, scan.elevation_rad), breaks, order)


# --- BS gain expectation --------------------------------------------------------

class _PlugIn:
    """Empirical circumradius sample used as a plug-in distribution."""

    def __init__(self, radii):
        self.radii = np.asarray(radii, dtype=float).ravel()
        if self.radii.size == 0 or np.any(~(self.radii > 0)):
            raise ValueError("circumradius sample must be non-empty and positive")

    def expected_bound(self, s: NetworkScenario, phi_t: float):
        return float(np.mean(max_gain_bound(s.bs_array, phi_t, s.phi_m(self.radii)))), 0.0


class _Analytic:
    def __init__(self, dist: CircumradiusDistribution, order: int = 32):
        self.dist = dist
        self.order = order
        self.r_hi = dist.truncation_radius(1e-6)
        # uniform sub-panels in r_c keep the density well resolved
        self.base = np.linspace(0.0, self.r_hi, 25)

    def expected_bound(self, s: NetworkScenario, phi_t: float):
        g, h = s.bs_array, s.bs_array.height_m
        kinks = []
        if phi_t > 0:
            kinks.append(h / math.tan(phi_t))  # bound saturates for larger cells
        sin_edge = math.sin(phi_t) + 1.0 / g.n_el
        if sin_edge < 1:
            kinks.append(h / math.tan(math.asin(sin_edge)))  # main-lobe/envelope switch
        breaks = np.unique(np.concatenate([self.base, [k for k in kinks if 0 < k < self.r_hi]]))
        return panel_quadrature(
            lambda rc: max_gain_bound(g, phi_t, s.phi_m(np.maximum(rc, 1e-12)))
            * self.dist.density(rc), breaks, self.order)


def _as_source(circumradius):
    if isinstance(circumradius, CircumradiusDistribution):
        return _Analytic(circumradius)
    return _PlugIn(circumradius)


# --- radial integral -----------------------------------------------------------------

def _radial_integral(s: NetworkScenario, source, tol: float, max_subdivisions: int = 200):
    g_rad, scan = s.radar_array, s.radar_scan
    dh = s.bs_array.height_m - s.radar_array.height_m
    alpha = s.pathloss.alpha
    inner_rel = [0.0]
    calls = [0]

    def radial_density(r):
        phi_t, phi_r = los_elevations(s.bs_array.height_m, s.radar_array.height_m, r)
        a, a_err = radar_azimuth_integral(g_rad, scan, float(phi_r))
        b, b_err = source.expected_bound(s, float(phi_t))
        calls[0] += 1
        if a > 0 and b > 0:
            inner_rel[0] = max(inner_rel[0], a_err / a + b_err / b)
        return r * (r * r + dh * dh) ** (-alpha / 2) * a * b

    r_end = s.r_net_m if math.isfinite(s.r_net_m) else _TAIL_FACTOR * s.r_exc_m
    # integrate in t = ln r: the power-law decay becomes a gentle exponential
    out = integrate.quad(
        lambda t: math.exp(t) * radial_density(math.exp(t)),
        math.log(s.r_exc_m), math.log(r_end),
        epsabs=0.0, epsrel=tol, limit=max_subdivisions, full_output=1)
    val, err = out[0], out[1]
    if len(out) > 3 or not math.isfinite(val):
        raise QuadratureError(f"radial quadrature did not converge: {out[-1] if len(out) > 3 else val}")
    tail = 0.0
    if math.isinf(s.r_net_m):
        # beyond r_end both elevation angles are ~0: gains frozen, pure power law
        tail = radial_density(r_end) * r_end / (alpha - 2)
    total = val + tail
    err_total = err + abs(total) * inner_rel[0]
    return s.prefactor * total, s.prefactor * err_total, calls[0]


def _result(model, s, value, err, t0, **meta):
    meta.update(intensity_bs=s.intensity_bs, r_exc_m=s.r_exc_m, r_net_m=s.r_net_m,
                wall_time_s=time.perf_counter() - t0)
    return InterferenceResult(model, float(value), float(err), meta)


def interference_cbc(s: NetworkScenario, d, tol: float = 1e-4) -> InterferenceResult:
    """Worst-case mean interference under the circumcircle cell model.

    ``d`` is a :class:`CircumradiusDistribution` or an array of empirical
    circumradii (m) used as a plug-in average.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    t0 = time.perf_counter()
    source = _as_source(d)
    val, err, n = _radial_integral(s, source, tol)
    kind = "analytic" if isinstance(source, _Analytic) else "plug-in"
    return _result("cbc", s, val, err, t0, circumradius=kind, evaluations=n)


def interference_aaecc(s: NetworkScenario, tol: float = 1e-4) -> InterferenceResult:
    """Nominal mean interference: every cell is a disk of area 1/lam."""
    t0 = time.perf_counter()
    val, err, n = _radial_integral(s, _PlugIn([s.average_area_radius]), tol)
    return _result("aaecc", s, val, err, t0, evaluations=n)


def _horizon_terms(s: NetworkScenario):
    if not s.pathloss.alpha > 2:
        raise ValueError("the closed-form approximations need alpha > 2")
    a, a_err = radar_azimuth_integral(s.radar_array, s.radar_scan, 0.0)
    return a, a_err


def expected_horizon_bound(s: NetworkScenario, d):
    """E[G_max(0, phi_m(R_C))] under ``d`` (distribution or sample)."""
    return _as_source(d).expected_bound(s, 0.0)


def _numerator(s, a, b):
    return s.prefactor * a * b


def interference_cbc_approx(s: NetworkScenario, d) -> InterferenceResult:
    t0 = time.perf_counter()
    a, a_err = _horizon_terms(s)
    b, b_err = expected_horizon_bound(s, d)
    alpha = s.pathloss.alpha
    val = _numerator(s, a, b) / ((alpha - 2) * s.r_exc_m ** (alpha - 2))
    err = val * (a_err / a + (b_err / b if b else 0.0))
    return _result("cbc-approx", s, val, err, t0, azimuth_integral=a, expected_bs_gain=b)


def interference_aaecc_approx(s: NetworkScenario) -> InterferenceResult:
    t0 = time.perf_counter()
    a, a_err = _horizon_terms(s)
    b = float(max_gain_bound(s.bs_array, 0.0, s.phi_m(s.average_area_radius)))
    alpha = s.pathloss.alpha
    val = _numerator(s, a, b) / ((alpha - 2) * s.r_exc_m ** (alpha - 2))
    return _result("aaecc-approx", s, val, val * a_err / a, t0, azimuth_integral=a,
                   expected_bs_gain=b)


def eta_ratio(s: NetworkScenario, d) -> float:
    """Ratio of the worst-case to nominal approximate interference (>= 1 in practice)."""
    b, _ = expected_horizon_bound(s, d)
    return b / float(max_gain_bound(s.bs_array, 0.0, s.phi_m(s.average_area_radius)))


def solve_exclusion_radius(s: NetworkScenario, d, threshold_watts: float) -> float:
    """Exclusion radius (m) at which the approximate worst-case interference equals the threshold."""
    if not threshold_watts > 0:
        raise ValueError("threshold must be > 0")
    a, _ = _horizon_terms(s)
    b, _ = expected_horizon_bound(s, d)
    alpha = s.pathloss.alpha
    return (_numerator(s, a, b) / ((alpha - 2) * threshold_watts)) ** (1.0 / (alpha - 2))
