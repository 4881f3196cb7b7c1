"""Uniform rectangular array (URA) response with half-wavelength spacing.

Angles follow the radar-coexistence convention: azimuth in [-pi/2, pi/2),
elevation in [-pi/2, pi/2] with negative values above the horizon and
positive values below it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

# |sin x| below this is treated as the removable singularity of sin^2(Nx)/sin^2(x)
_SINGULAR_EPS = 1e-9


@dataclass(frozen=True)
class ArrayGeometry:
    n_az: int
    n_el: int
    height_m: float = 0.0

    def __post_init__(self):
        if int(self.n_az) != self.n_az or self.n_az < 1:
            raise ValueError(f"n_az must be a positive integer, got {self.n_az!r}")
        if int(self.n_el) != self.n_el or self.n_el < 1:
            raise ValueError(f"n_el must be a positive integer, got {self.n_el!r}")
        if not self.height_m >= 0:
            raise ValueError(f"height_m must be >= 0, got {self.height_m!r}")

    @property
    def size(self) -> int:
        return self.n_az * self.n_el


@dataclass(frozen=True)
class BeamDirection:
    azimuth_rad: float
    elevation_rad: float

    def __post_init__(self):
        half = math.pi / 2
        if not -half <= self.azimuth_rad < half:
            raise ValueError(f"azimuth {self.azimuth_rad!r} outside [-pi/2, pi/2)")
        if not -half <= self.elevation_rad <= half:
            raise ValueError(f"elevation {self.elevation_rad!r} outside [-pi/2, pi/2]")

    @classmethod
    def from_degrees(cls, azimuth_deg: float, elevation_deg: float) -> "BeamDirection":
        return cls(math.radians(azimuth_deg), math.radians(elevation_deg))


def steering_vector(g: ArrayGeometry, d: BeamDirection) -> np.ndarray:
    """Kronecker product of the azimuth and elevation steering vectors."""
    m = np.arange(g.n_az)
    n = np.arange(g.n_el)
    a_az = np.exp(-1j * np.pi * m * math.sin(d.azimuth_rad) * math.cos(d.elevation_rad))
    a_el = np.exp(-1j * np.pi * n * math.sin(d.elevation_rad))
    return np.kron(a_az, a_el)


def dirichlet_sq(n, delta):
    """sin^2(n*pi*delta/2) / sin^2(pi*delta/2), equal to n^2 at the singular points.

    ``delta`` is the difference of direction sines; the result is the
    squared magnitude of the inner product of two length-``n`` ULA
    steering vectors.
    """
    x = 0.5 * np.pi * np.asarray(delta, dtype=float)
    s = np.sin(x)
    singular = np.abs(s) < _SINGULAR_EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.sin(n * x) ** 2 / s**2
    return np.where(singular, float(n * n), ratio)


def gain(g: ArrayGeometry, obs_az, obs_el, beam_az, beam_el):
    """Vectorized |a^H(obs) a(beam)|^2 / (n_az n_el) over broadcast angle arrays."""
    u_obs = np.sin(obs_az) * np.cos(obs_el)
    u_beam = np.sin(beam_az) * np.cos(beam_el)
    az = dirichlet_sq(g.n_az, u_obs - u_beam)
    el = dirichlet_sq(g.n_el, np.sin(obs_el) - np.sin(beam_el))
    return az * el / g.size


def normalized_gain(g: ArrayGeometry, observe: BeamDirection, beam: BeamDirection) -> float:
    """Beamforming gain toward ``observe`` of a matched beam steered at ``beam``.

    Also the radar receive gain, since the radar combiner is a normalized
    steering vector.
    """
    return float(gain(g, observe.azimuth_rad, observe.elevation_rad,
                      beam.azimuth_rad, beam.elevation_rad))


def max_gain_bound(g: ArrayGeometry, phi, phi_m):
    """Azimuth-free upper bound on the gain toward elevation ``phi`` when the
    serving beam elevation is restricted to ``[phi_m, pi/2)``.

    Piecewise: full gain once ``phi_m <= phi``; the exact main-lobe gain at
    ``phi_m`` while the sine offset stays within ``1/n_el``; otherwise the
    sidelobe envelope ``(n_az/n_el) / sin^2(pi*offset/2)``.  For ``phi < 0``
    the reachable offsets extend past 1 toward the grating lobe at 2, so the
    envelope is also taken at the far end of the range and the result is
    capped at ``n_az*n_el``.  Broadcasts over array inputs.
    """
    phi = np.asarray(phi, dtype=float)
    phi_m = np.asarray(phi_m, dtype=float)
    full = float(g.size)
    offset = np.sin(phi_m) - np.sin(phi)
    far = 1.0 - np.sin(phi)

    mainlobe = g.n_az * dirichlet_sq(g.n_el, offset) / g.n_el
    s2 = np.sin(0.5 * np.pi * offset) ** 2
    s2_far = np.where(far > 1.0, np.sin(0.5 * np.pi * far) ** 2, 1.0)
    with np.errstate(divide="ignore"):
        envelope = (g.n_az / g.n_el) / np.minimum(s2, s2_far)
    envelope = np.minimum(envelope, full)

    out = np.where(offset * g.n_el <= 1.0, mainlobe, envelope)
    out = np.where(phi_m <= phi, full, out)
    return out if out.ndim else float(out)
