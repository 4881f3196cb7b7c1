"""BS-to-radar propagation, downlink beamforming and per-BS interference."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .array import ArrayGeometry, BeamDirection, gain, normalized_gain, steering_vector

MIN_DISTANCE_M = 1.0
VARIANTS = ("reference-exponent", "uma-los")


@dataclass(frozen=True)
class PathlossModel:
    """beta(d) = pl_r0 * d^-alpha on the 3D distance d (meters), linear scale.

    ``pl_r0`` is a gain (< 1 for a loss).  Use :meth:`uma_los` for the 3GPP
    3D-UMa LoS model, which has alpha = 4.
    """

    variant: str = "reference-exponent"
    pl_r0: float = 1.0
    alpha: float = 4.0
    fc_ghz: float = 5.0
    h_bs_m: float = 50.0
    h_rad_m: float = 20.0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown pathloss variant {self.variant!r}")
        if not self.alpha > 2:
            raise ValueError(f"pathloss exponent must satisfy alpha > 2 for the "
                             f"interference integrals to converge, got {self.alpha}")
        if not self.pl_r0 > 0 or not self.fc_ghz > 0:
            raise ValueError("pl_r0 and fc_ghz must be positive")
        if self.variant == "uma-los" and self.alpha != 4.0:
            raise ValueError("uma-los has a fixed exponent alpha = 4")

    @classmethod
    def uma_los(cls, fc_ghz: float, h_bs_m: float, h_rad_m: float) -> "PathlossModel":
        if h_bs_m == h_rad_m:
            raise ValueError("uma-los needs h_bs != h_rad")
        const_db = 28.0 - 9.0 * math.log10((h_bs_m - h_rad_m) ** 2) + 20.0 * math.log10(fc_ghz)
        return cls("uma-los", 10.0 ** (-const_db / 10.0), 4.0, fc_ghz, h_bs_m, h_rad_m)

    @property
    def height_difference(self) -> float:
        return self.h_bs_m - self.h_rad_m

    def beta_3d(self, d):
        return self.pl_r0 * np.asarray(d, dtype=float) ** (-self.alpha)


def pathloss(m: PathlossModel, ground_range_m):
    """Linear channel power gain at a ground range (m), via the 3D distance."""
    r = np.asarray(ground_range_m, dtype=float)
    if np.any(r <= 0):
        raise ValueError("ground range must be > 0")
    d = np.hypot(r, m.height_difference)
    if np.any(d < MIN_DISTANCE_M):
        raise ValueError(f"3D distance below the {MIN_DISTANCE_M} m floor")
    out = m.beta_3d(d)
    return out if out.ndim else float(out)


def pathloss_db(m: PathlossModel, ground_range_m):
    return -10.0 * np.log10(pathloss(m, ground_range_m))


def los_elevations(h_bs_m: float, h_rad_m: float, ground_range_m):
    """(departure elevation at the BS, arrival elevation at the radar).

    Positive angles point below the horizon, so a BS mounted above the radar
    sees it at a positive departure angle and the radar sees the BS at the
    mirrored negative angle.
    """
    phi_t = np.arctan((h_bs_m - h_rad_m) / np.asarray(ground_range_m, dtype=float))
    return phi_t, -phi_t


@dataclass(frozen=True)
class DownlinkConfig:
    k_users: int = 4
    p_bs_watts: float = 1.0
    diuc_beam: BeamDirection | None = None  # beam of the dominant interfering cluster

    def __post_init__(self):
        if int(self.k_users) != self.k_users or self.k_users < 1:
            raise ValueError("k_users must be a positive integer")
        if not self.p_bs_watts > 0:
            raise ValueError("p_bs_watts must be > 0")

    @property
    def per_user_power(self) -> float:
        return self.p_bs_watts / self.k_users


def worst_case_bs_interference(g_bs: ArrayGeometry, g_rad: ArrayGeometry, scan: BeamDirection,
                               dl: DownlinkConfig, m: PathlossModel, ground_range_m: float,
                               azimuth_rad: float = 0.0, fdr: float = 1.0) -> float:
    """Mean interference (W) at the radar from one BS serving its DIUC.

    The BS boresight faces the radar, so the LoS departs at azimuth 0; the
    radar sees the BS at ``azimuth_rad``.
    """
    if dl.diuc_beam is None:
        raise ValueError("DownlinkConfig.diuc_beam is required")
    phi_t, phi_r = los_elevations(g_bs.height_m, g_rad.height_m, ground_range_m)
    g_r = normalized_gain(g_rad, BeamDirection(azimuth_rad, float(phi_r)), scan)
    g_b = normalized_gain(g_bs, BeamDirection(0.0, float(phi_t)), dl.diuc_beam)
    return pathloss(m, ground_range_m) * g_r * g_b * dl.per_user_power / fdr


@dataclass(frozen=True)
class NlosAngleLaw:
    """Independent uniform laws for NLoS departure/arrival angles (radians)."""

    azimuth: tuple[float, float] = (-math.pi / 2, math.pi / 2)
    elevation: tuple[float, float] = (0.0, math.radians(20.0))

    def draw(self, n: int, rng: np.random.Generator) -> dict[str, np.ndarray]:
        az = lambda: rng.uniform(*self.azimuth, n)  # noqa: E731
        el = lambda: rng.uniform(*self.elevation, n)  # noqa: E731
        return {"theta_t": az(), "phi_t": el(), "theta_r": az(), "phi_r": el()}


@dataclass(frozen=True)
class RicianChannelParams:
    k_factor: float = 100.0  # linear; math.inf gives a LoS-only channel
    n_paths: int = 8
    nlos_angle_law: NlosAngleLaw = field(default_factory=NlosAngleLaw)
    seed: int = 0

    def __post_init__(self):
        if not self.k_factor > 0:
            raise ValueError("k_factor must be > 0")
        if self.n_paths < 1:
            raise ValueError("n_paths must be >= 1")


def _radar_combiner(g_rad, scan):
    return steering_vector(g_rad, scan) / math.sqrt(g_rad.size)


def _path_coefficients(g_bs, g_rad, scan, w_rf, departures, arrivals):
    """(w_rad^H a_r) * (a_t^H w_rf) for each (departure, arrival) pair."""
    w_rad = _radar_combiner(g_rad, scan)
    out = np.empty(len(departures), dtype=complex)
    for i, (dep, arr) in enumerate(zip(departures, arrivals)):
        out[i] = (np.vdot(w_rad, steering_vector(g_rad, arr))
                  * np.vdot(steering_vector(g_bs, dep), w_rf))
    return out


@dataclass
class SingleBsLink:
    """Fixed geometry of one BS-radar link: LoS plus drawn NLoS angles."""

    beta: float
    los: complex
    nlos: np.ndarray  # complex path coefficients, one per MPC
    radar_gain_los: float
    radar_gain_nlos: np.ndarray

    @property
    def los_dominates(self) -> bool:
        """Radar gain toward the LoS exceeds the gain toward every MPC."""
        return bool(np.all(self.radar_gain_los > self.radar_gain_nlos))


def single_bs_link(params: RicianChannelParams, g_bs, g_rad, scan, dl, m,
                   ground_range_m, azimuth_rad=0.0) -> SingleBsLink:
    if dl.diuc_beam is None:
        raise ValueError("DownlinkConfig.diuc_beam is required")
    rng = np.random.default_rng(params.seed)
    ang = params.nlos_angle_law.draw(params.n_paths, rng)
    phi_t, phi_r = los_elevations(g_bs.height_m, g_rad.height_m, ground_range_m)
    w_rf = steering_vector(g_bs, dl.diuc_beam) / math.sqrt(g_bs.size)
    los_arr = BeamDirection(azimuth_rad, float(phi_r))
    los = _path_coefficients(g_bs, g_rad, scan, w_rf,
                             [BeamDirection(0.0, float(phi_t))], [los_arr])[0]
    deps = [BeamDirection(a, e) for a, e in zip(ang["theta_t"], ang["phi_t"])]
    arrs = [BeamDirection(a, e) for a, e in zip(ang["theta_r"], ang["phi_r"])]
    nlos = _path_coefficients(g_bs, g_rad, scan, w_rf, deps, arrs)
    g_los = abs(np.vdot(_radar_combiner(g_rad, scan), steering_vector(g_rad, los_arr))) ** 2
    g_nlos = gain(g_rad, ang["theta_r"], ang["phi_r"], scan.azimuth_rad, scan.elevation_rad)
    return SingleBsLink(pathloss(m, ground_range_m), los, nlos, float(g_los), np.asarray(g_nlos))


def rician_average_interference(link: SingleBsLink, k_factor: float, per_user_power: float) -> float:
    """Exact E|i_rad|^2 for fixed path angles: LoS term plus uncorrelated MPC terms."""
    los = abs(link.los) ** 2
    nlos = float(np.mean(np.abs(link.nlos) ** 2))
    if math.isinf(k_factor):
        return link.beta * los * per_user_power
    return link.beta * per_user_power * (k_factor * los + nlos) / (k_factor + 1.0)


def mc_single_bs_interference(params: RicianChannelParams, g_bs: ArrayGeometry,
                              g_rad: ArrayGeometry, scan: BeamDirection, dl: DownlinkConfig,
                              m: PathlossModel, ground_range_m: float, n_realizations: int,
                              azimuth_rad: float = 0.0, fdr: float = 1.0):
    """Sample mean of |i_rad|^2 (W) over fading, phase and symbol draws.

    NLoS angles are drawn once from ``params.seed`` and held fixed; the
    baseband precoder is the identity and only the DIUC beam transmits.
    Symbols are constant-modulus with random phase, so E[|d_k|^2] = P/K
    holds exactly.  Returns ``(mean, 95% confidence half-width)``.
    """
    if n_realizations < 1:
        raise ValueError("n_realizations must be >= 1")
    link = single_bs_link(params, g_bs, g_rad, scan, dl, m, ground_range_m, azimuth_rad)
    rng = np.random.default_rng([params.seed, 1])
    n = n_realizations
    sym = math.sqrt(dl.per_user_power) * np.exp(2j * np.pi * rng.random(n))
    los_phase = np.exp(-2j * np.pi * rng.random(n))
    kr = params.k_factor
    if math.isinf(kr):
        field_ = link.los * los_phase
    else:
        gamma = (rng.standard_normal((n, params.n_paths))
                 + 1j * rng.standard_normal((n, params.n_paths))) / math.sqrt(2.0)
        resid = np.exp(-2j * np.pi * rng.random((n, params.n_paths)))
        scatter = (np.conj(gamma) * resid) @ link.nlos / math.sqrt(params.n_paths)
        field_ = (math.sqrt(kr) * link.los * los_phase + scatter) / math.sqrt(kr + 1.0)
    power = link.beta * np.abs(field_ * sym) ** 2 / fdr
    mean = float(power.mean())
    half = 1.96 * float(power.std(ddof=1)) / math.sqrt(n) if n > 1 else math.inf
    return mean, half


def precoder_diagonality_check(g_bs: ArrayGeometry, cluster_beams) -> float:
    """Largest off-diagonal magnitude of W_RF^H W_RF for unit-norm cluster beams."""
    beams = list(cluster_beams)
    if len(beams) < 2:
        raise ValueError("need at least two cluster beams")
    w = np.column_stack([steering_vector(g_bs, b) for b in beams]) / math.sqrt(g_bs.size)
    gram = w.conj().T @ w
    off = gram - np.diag(np.diag(gram))
    return float(np.abs(off).max())
