"""Scenario configuration: a validated YAML/JSON document with deployment defaults."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Literal, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .analytic import MODELS, NetworkScenario
from .array import ArrayGeometry, BeamDirection
from .channel import DownlinkConfig, PathlossModel
from .montecarlo import MODES

# h_BS * sqrt(pi * lam) values of the reference eta table
DEFAULT_ELEVATION_PARAMETERS = (0.0089, 0.0198, 0.028, 0.044, 0.0886, 0.1253)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class RadarSection(_Section):
    n_az: int = Field(40, ge=1)
    n_el: int = Field(40, ge=1)
    height_m: float = Field(20.0, ge=0)
    scan_az_deg: float = Field(60.0, ge=-90, lt=90)
    scan_el_deg: float = Field(-10.0, ge=-90, le=90)


class BsSection(_Section):
    n_az: int = Field(10, ge=1)
    n_el: int = Field(10, ge=1)
    height_m: float = Field(50.0, ge=0)


class RangeSpec(_Section):
    start: float = Field(gt=0)
    stop: float = Field(gt=0)
    step: float = Field(gt=0)

    def values(self) -> list[float]:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [self.start + i * self.step for i in range(max(n, 0))]


class NetworkSection(_Section):
    lambda_bs_per_km2: list[float] = Field(default_factory=lambda: [0.01, 0.1, 1.0], min_length=1)
    r_exc_km: Union[list[float], RangeSpec] = Field(
        default_factory=lambda: [5.0, 10.0, 15.0, 20.0, 25.0, 30.0])
    r_net_km: float = 100.0

    @field_validator("lambda_bs_per_km2")
    @classmethod
    def _positive(cls, v):
        if any(not x > 0 or not math.isfinite(x) for x in v):
            raise ValueError("every BS density must be finite and > 0")
        return v

    @model_validator(mode="after")
    def _radii(self):
        r = self.r_exc_values()
        if not r:
            raise ValueError("r_exc_km is empty")
        if min(r) <= 0 or max(r) >= self.r_net_km:
            raise ValueError("need 0 < r_exc < r_net for every exclusion radius")
        return self

    def r_exc_values(self) -> list[float]:
        return list(self.r_exc_km) if isinstance(self.r_exc_km, list) else self.r_exc_km.values()


class DownlinkSection(_Section):
    k_users: int = Field(4, ge=1)
    p_bs_watts: float = Field(1.0, gt=0)


class PathlossSection(_Section):
    variant: Literal["uma-los", "reference-exponent"] = "uma-los"
    alpha: float = 4.0
    pl_r0_db: float | None = None  # loss at 1 m, reference-exponent only


class DistributionSection(_Section):
    k_max: int = Field(8, ge=1)
    simplex_samples: int = Field(200_000, ge=16)


class SimulationSection(_Section):
    n_realizations: int = Field(200, ge=1)
    master_seed: int = 0
    circumradius_mode: Literal["true-voronoi", "iid-analytic", "fixed-average-area"] = "true-voronoi"
    empirical_cells: int = Field(10_000, ge=0)  # plug-in circumradius sample size; 0 disables


class AnalyticSection(_Section):
    tol: float = Field(1e-4, gt=0, lt=1)


class EtaSection(_Section):
    elevation_parameters: list[float] = Field(
        default_factory=lambda: list(DEFAULT_ELEVATION_PARAMETERS), min_length=1)


class OutputSection(_Section):
    directory: str = "results"
    formats: list[Literal["csv", "svg"]] = Field(default_factory=lambda: ["csv", "svg"])


class ScenarioConfig(_Section):
    fc_ghz: float = Field(5.0, gt=0)
    radar: RadarSection = Field(default_factory=RadarSection)
    bs: BsSection = Field(default_factory=BsSection)
    network: NetworkSection = Field(default_factory=NetworkSection)
    downlink: DownlinkSection = Field(default_factory=DownlinkSection)
    pathloss: PathlossSection = Field(default_factory=PathlossSection)
    distribution: DistributionSection = Field(default_factory=DistributionSection)
    simulation: SimulationSection = Field(default_factory=SimulationSection)
    analytic: AnalyticSection = Field(default_factory=AnalyticSection)
    eta: EtaSection = Field(default_factory=EtaSection)
    models: list[Literal["cbc", "cbc-approx", "aaecc", "aaecc-approx", "monte-carlo"]] = Field(
        default_factory=lambda: list(MODELS), min_length=1)
    output: OutputSection = Field(default_factory=OutputSection)

    @model_validator(mode="after")
    def _consistency(self):
        pl = self.pathloss
        if not pl.alpha > 2:
            where = "an infinite network (r_net_km = inf)" if math.isinf(self.network.r_net_km) \
                else "the closed-form approximations"
            raise ValueError(f"pathloss alpha = {pl.alpha} violates the convergence condition "
                             f"alpha > 2 required by {where}")
        if pl.variant == "uma-los":
            if pl.alpha != 4.0:
                raise ValueError("uma-los has a fixed exponent alpha = 4")
            if pl.pl_r0_db is not None:
                raise ValueError("pl_r0_db applies to the reference-exponent variant only")
            if self.bs.height_m == self.radar.height_m:
                raise ValueError("uma-los needs distinct BS and radar heights")
        elif pl.pl_r0_db is None:
            raise ValueError("reference-exponent pathloss needs pl_r0_db")
        if self.bs.height_m <= 0:
            raise ValueError("bs.height_m must be > 0")
        return self

    def pathloss_model(self) -> PathlossModel:
        pl, h_bs, h_rad = self.pathloss, self.bs.height_m, self.radar.height_m
        if pl.variant == "uma-los":
            return PathlossModel.uma_los(self.fc_ghz, h_bs, h_rad)
        return PathlossModel("reference-exponent", 10.0 ** (-pl.pl_r0_db / 10.0), pl.alpha,
                             self.fc_ghz, h_bs, h_rad)

    def scenario(self, lambda_bs_per_km2: float, r_exc_km: float) -> NetworkScenario:
        r = self.radar
        return NetworkScenario(
            bs_array=ArrayGeometry(self.bs.n_az, self.bs.n_el, self.bs.height_m),
            radar_array=ArrayGeometry(r.n_az, r.n_el, r.height_m),
            radar_scan=BeamDirection.from_degrees(r.scan_az_deg, r.scan_el_deg),
            dl=DownlinkConfig(self.downlink.k_users, self.downlink.p_bs_watts),
            pathloss=self.pathloss_model(),
            intensity_bs=lambda_bs_per_km2 * 1e-6,
            r_exc_m=r_exc_km * 1e3,
            r_net_m=self.network.r_net_km * 1e3,
        )

    def eta_lambdas_per_km2(self) -> list[float]:
        """Densities (per km^2) matching the configured elevation parameters."""
        h = self.bs.height_m
        return [float((p / h) ** 2 / np.pi * 1e6) for p in self.eta.elevation_parameters]


class ConfigError(ValueError):
    """Unreadable or schema-invalid configuration."""


def load_config(path) -> ScenarioConfig:
    """Read YAML or JSON (by suffix; YAML otherwise) and validate."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from exc
    try:
        doc = json.loads(text) if p.suffix.lower() == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse config {p}: {exc}") from exc
    if doc is None:
        doc = {}
    if not isinstance(doc, dict):
        raise ConfigError("config root must be a mapping")
    try:
        return ScenarioConfig.model_validate(doc)
    except ValueError as exc:  # pydantic.ValidationError subclasses ValueError
        raise ConfigError(str(exc)) from exc


__all__ = ["ScenarioConfig", "ConfigError", "load_config", "MODES", "DEFAULT_ELEVATION_PARAMETERS"]
