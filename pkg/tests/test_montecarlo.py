import math

import numpy as np
import pytest

from pvradar.analytic import NetworkScenario, interference_aaecc, interference_cbc
from pvradar.circumradius import CircumradiusDistribution
from pvradar.montecarlo import (BoundaryPolicy, SimulationPlan, run_simulation, sweep)

LAMS = (0.01e-6, 0.1e-6)
RADII = (5e3, 10e3, 20e3, 30e3)


def scen(lam=0.01, r=5.0, **kw):
    return NetworkScenario.reference_deployment(lam, r, **kw)


@pytest.fixture(scope="module")
def sweeps():
    """1000-realization sweeps per mode; heavy tails near the radar need the count."""
    return {mode: sweep(SimulationPlan(scen(), 1000, 0, mode), RADII, LAMS)
            for mode in ("true-voronoi", "iid-analytic", "fixed-average-area")}


def analytic(model, lam, r):
    s = scen(lam * 1e6, r / 1e3)
    if model == "aaecc":
        return interference_aaecc(s).mean_watts
    return interference_cbc(s, CircumradiusDistribution(lam)).mean_watts


class TestPlan:
    @pytest.mark.parametrize("kw", [dict(n_realizations=0), dict(circumradius_mode="x"),
                                    dict(threads=0)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            SimulationPlan(scen(), **kw)

    def test_infinite_network_rejected(self):
        with pytest.raises(ValueError):
            SimulationPlan(scen(r_net_m=math.inf))

    def test_boundary_policy_validation(self):
        with pytest.raises(ValueError):
            BoundaryPolicy(fallback="ignore")
        with pytest.raises(ValueError):
            BoundaryPolicy(guard_m=-1.0)


class TestRunSimulation:
    def test_empty_network(self):
        e = run_simulation(SimulationPlan(scen(1e-9), 20, 0))
        assert e.mean_watts == 0.0

    def test_seed_determinism(self):
        a = run_simulation(SimulationPlan(scen(0.1), 10, 7))
        b = run_simulation(SimulationPlan(scen(0.1), 10, 7))
        np.testing.assert_array_equal(a.per_realization_totals, b.per_realization_totals)
        c = run_simulation(SimulationPlan(scen(0.1), 10, 8))
        assert not np.array_equal(a.per_realization_totals, c.per_realization_totals)

    def test_threads_do_not_change_results(self):
        a = run_simulation(SimulationPlan(scen(0.1), 12, 3, threads=1))
        b = run_simulation(SimulationPlan(scen(0.1), 12, 3, threads=4))
        np.testing.assert_array_equal(a.per_realization_totals, b.per_realization_totals)

    def test_std_error_definition(self):
        e = run_simulation(SimulationPlan(scen(0.1), 30, 1))
        t = e.per_realization_totals
        assert e.std_error_watts == pytest.approx(t.std(ddof=1) / math.sqrt(len(t)), rel=1e-12)
        assert e.n_realizations == 30

    def test_boundary_fraction_reported(self):
        e = run_simulation(SimulationPlan(scen(0.1), 5, 1))
        assert 0 < e.flagged_fraction < 0.5

    def test_discard_policy_reduces_transmitters(self):
        keep = run_simulation(SimulationPlan(scen(0.1, 80.0), 20, 2))
        drop = run_simulation(SimulationPlan(scen(0.1, 80.0), 20, 2,
                                             boundary_policy=BoundaryPolicy(fallback="discard")))
        assert np.all(drop.per_realization_totals <= keep.per_realization_totals)

    def test_no_interior_cells(self):
        plan = SimulationPlan(scen(0.1), 3, 0,
                              boundary_policy=BoundaryPolicy(guard_m=1e9, fallback="discard"))
        with pytest.raises(RuntimeError):
            run_simulation(plan)


class TestSweep:
    def test_empty_grids(self):
        p = SimulationPlan(scen(), 2)
        with pytest.raises(ValueError):
            sweep(p, [], LAMS)
        with pytest.raises(ValueError):
            sweep(p, RADII, [])

    def test_radius_outside_network(self):
        with pytest.raises(ValueError):
            sweep(SimulationPlan(scen(), 2), [200e3], LAMS)

    def test_totals_non_increasing_in_r_exc(self, sweeps):
        for lam in LAMS:
            t = np.column_stack([sweeps["true-voronoi"][(lam, r)].per_realization_totals
                                 for r in RADII])
            assert np.all(np.diff(t, axis=1) <= 0)

    def test_single_point_sweep_matches_run(self):
        p = SimulationPlan(scen(0.1, 10.0), 8, 5)
        a = run_simulation(p)
        b = sweep(p, [10e3], [0.1e-6])[(0.1e-6, 10e3)]
        np.testing.assert_array_equal(a.per_realization_totals, b.per_realization_totals)

    def test_fixed_average_area_matches_aaecc(self, sweeps):
        for (lam, r), e in sweeps["fixed-average-area"].items():
            assert abs(e.mean_watts - analytic("aaecc", lam, r)) < 3 * e.std_error_watts

    def test_iid_analytic_matches_cbc(self, sweeps):
        for (lam, r), e in sweeps["iid-analytic"].items():
            assert abs(e.mean_watts - analytic("cbc", lam, r)) < 3 * e.std_error_watts

    def test_true_voronoi_bounded_by_cbc(self, sweeps):
        for r in RADII:
            e = sweeps["true-voronoi"][(LAMS[0], r)]
            c = analytic("cbc", LAMS[0], r)
            assert e.mean_watts - 3 * e.std_error_watts <= c
            assert abs(10 * math.log10(c / e.mean_watts)) <= 1.0

    def test_linear_scaling_saturated(self):
        lo, hi = 0.0025e-6, 0.005e-6
        tab = sweep(SimulationPlan(scen(), 1500, 0, "fixed-average-area"), [30e3], [lo, hi])
        a, b = tab[(lo, 30e3)], tab[(hi, 30e3)]
        se = math.hypot(2 * a.std_error_watts, b.std_error_watts)
        assert abs(b.mean_watts - 2 * a.mean_watts) < 3 * se
