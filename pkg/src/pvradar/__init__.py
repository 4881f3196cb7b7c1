"""Mean radar interference from Poisson fields of elevation-beamforming base stations."""
from .analytic import (InterferenceResult, NetworkScenario, QuadratureError, eta_ratio,
                       interference_aaecc, interference_aaecc_approx, interference_cbc,
                       interference_cbc_approx, solve_exclusion_radius)
from .array import (ArrayGeometry, BeamDirection, gain, max_gain_bound, normalized_gain,
                    steering_vector)
from .channel import (DownlinkConfig, PathlossModel, RicianChannelParams, mc_single_bs_interference,
                      pathloss, precoder_diagonality_check, worst_case_bs_interference)
from .circumradius import (CircumradiusDistribution, SeriesAccuracyError,
                           empirical_circumradius_sample)
from .montecarlo import BoundaryPolicy, SimulationEstimate, SimulationPlan, run_simulation, sweep
from .tessellation import (Annulus, PointPattern, Tessellation, build_tessellation,
                           cell_circumradius, sample_ppp)

__all__ = [
    "ArrayGeometry", "BeamDirection", "steering_vector", "gain", "normalized_gain", "max_gain_bound",
    "Annulus", "PointPattern", "Tessellation", "sample_ppp", "build_tessellation",
    "cell_circumradius", "CircumradiusDistribution", "SeriesAccuracyError",
    "empirical_circumradius_sample", "PathlossModel", "DownlinkConfig", "RicianChannelParams",
    "pathloss", "worst_case_bs_interference", "mc_single_bs_interference",
    "precoder_diagonality_check", "NetworkScenario", "InterferenceResult", "QuadratureError",
    "interference_cbc", "interference_cbc_approx", "interference_aaecc",
    "interference_aaecc_approx", "eta_ratio", "solve_exclusion_radius", "SimulationPlan",
    "SimulationEstimate", "BoundaryPolicy", "run_simulation", "sweep",
]
__version__ = "0.1.0"
