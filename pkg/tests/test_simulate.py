import dataclasses

import numpy as np
import pytest

from pursuit_rf import pontryagin as pg
from pursuit_rf import simple_motion as sm
from pursuit_rf.errors import StepTooCoarse
from pursuit_rf.evaders import EvaderSpec, suite
from pursuit_rf.simulate import monitor_invariants, run_pontryagin, run_simple_motion

ZERO = EvaderSpec("zero")
P2 = sm.SimpleMotionParams(2.0, 1.0, 0.0, n=2)
Z0 = np.array([3.0, 0.0])
PB = pg.PontryaginParams(1, 1, 1, 1, rho=2, sigma=1)
ZB = pg.PontryaginState([1.0], [0.0], [0.0])


class TestSimpleMotion:
    def test_zero_evader_point_capture(self):
        traj, rep = run_simple_motion(P2, Z0, ZERO, 1e-3)
        assert rep.captured and rep.capture_reason == "resource"
        assert rep.capture_time == pytest.approx(3.0, abs=1e-9)
        assert rep.final_miss == pytest.approx(0.0, abs=1e-9)
        assert rep.invariant_violations == []

    def test_zero_evader_l_capture(self):
        P = dataclasses.replace(P2, l=1.0)
        _, rep = run_simple_motion(P, Z0, ZERO, 1e-3)
        assert rep.capture_time == pytest.approx(4 / 3, abs=1e-9)
        assert rep.invariant_violations == []

    def test_geometric_capture_lands_on_sphere(self):
        P = sm.SimpleMotionParams(3.0, 1.5, 0.5, n=3)
        z0 = np.array([2.0, -1.0, 1.5])
        spec = EvaderSpec("seeded_random", {"seed": 7, "segments": 12})
        traj, rep = run_simple_motion(P, z0, spec, sm.capture_bound(z0, 3.0, 1.5, 0.5) / 5000)
        assert rep.capture_reason == "geometric"
        assert rep.final_miss == pytest.approx(0.0, abs=1e-12)
        assert rep.invariant_violations == []

    def test_radial_flee_hits_sign_gate(self):
        spec = EvaderSpec("radial_flee", {"k": 0.5})
        traj, rep = run_simple_motion(sm.SimpleMotionParams(2.0, 1.9, 0.0), Z0, spec, 1e-3)
        assert rep.captured
        assert rep.invariant_violations == []
        assert np.any(traj.lam[:-1] == 0.0)  # the resolving function clips at zero early on

    def test_step_too_coarse(self):
        with pytest.raises(StepTooCoarse):
            run_simple_motion(P2, Z0, ZERO, 0.05)

    def test_forged_doubled_u_is_flagged(self):
        traj, _ = run_simple_motion(P2, Z0, ZERO, 1e-3)
        forged = dataclasses.replace(traj, u=2 * traj.u)
        viols = monitor_invariants(forged, "simple_motion")
        assert any("pursuer spent" in v for v in viols)
        assert any("energy identity" in v for v in viols)

    def test_forged_evader_overspend(self):
        traj, _ = run_simple_motion(P2, Z0, EvaderSpec("constant_decay", {"k": 1.0}), 1e-3)
        forged = dataclasses.replace(traj, v_spent=traj.v_spent * 1.5)
        assert any("evader spent" in v for v in monitor_invariants(forged, "simple_motion"))

    def test_deterministic(self):
        spec = EvaderSpec("seeded_random", {"seed": 3})
        a, ra = run_simple_motion(P2, Z0, spec, 1e-3)
        b, rb = run_simple_motion(P2, Z0, spec, 1e-3)
        np.testing.assert_array_equal(a.z, b.z)
        np.testing.assert_array_equal(a.u, b.u)
        assert ra.to_dict() == rb.to_dict()

    def test_time_step_convergence_against_moving_evader(self):
        # capture time converges to a fine-step reference with order at least one
        P = sm.SimpleMotionParams(2.0, 1.0, 1.0)
        z0 = np.array([6.0, 0.0])
        spec = EvaderSpec("constant_decay", {"k": 0.5, "direction": [-1.0, 0.3]})
        ref = run_simple_motion(P, z0, spec, 1e-5, monitors=False)[1].capture_time
        errs = np.array([abs(run_simple_motion(P, z0, spec, dt, monitors=False)[1].capture_time - ref)
                         for dt in (1.6e-2, 8e-3, 4e-3, 2e-3)])
        orders = np.log2(errs[:-1] / errs[1:])
        assert np.all(orders >= 1.0), (errs, orders)

    @pytest.mark.parametrize("spec", suite(2), ids=lambda s: s.kind)
    def test_suite_within_bound(self, spec):
        P = sm.SimpleMotionParams(2.5, 1.0, 0.4, n=2)
        z0 = np.array([-1.0, 2.5])
        bound = sm.capture_bound(z0, 2.5, 1.0, 0.4)
        _, rep = run_simple_motion(P, z0, spec, bound / 5000)
        assert rep.captured and rep.capture_time <= bound + bound / 5000
        assert rep.invariant_violations == []


class TestPontryagin:
    def test_zero_evader(self):
        traj, rep = run_pontryagin(PB, ZB, ZERO, 2.3 / 5000)
        assert rep.captured
        assert rep.capture_time == pytest.approx(2.305565473575983, abs=1e-12)
        assert rep.final_miss < 1e-3
        assert rep.invariant_violations == []

    def test_full_energy_evader(self):
        spec = EvaderSpec("constant_decay", {"k": 1.0})
        traj, rep = run_pontryagin(PB, ZB, spec, 2.3 / 5000)
        assert traj.v_spent[-1] == pytest.approx(1 - np.exp(-2 * 2.305565473575983), rel=1e-9)
        assert rep.final_miss < 1e-3
        assert traj.u_spent[-1] <= 4 * (1 + 1e-6)
        switches = [e for e in traj.events if e[1] == "mode_switch"]
        assert len(switches) == 1

    def test_switch_at_integral_crossing(self):
        spec = EvaderSpec("piecewise", {"breakpoints": [0.3, 0.6, 0.9, 1.2]})
        traj, _ = run_pontryagin(PB, ZB, spec, 2.3 / 5000)
        (t_sw, _), = [e for e in traj.events if e[1] == "mode_switch"]
        # the recorded resource hits zero in the step that contains the switch
        k = int(np.searchsorted(traj.times, t_sw))
        assert traj.r[k] == pytest.approx(0.0, abs=1e-12)
        assert traj.r[k - 1] > 0

    def test_sigma_zero_open_loop(self):
        P = pg.PontryaginParams(1, 2, 1, 1, rho=1, sigma=0)
        traj, rep = run_pontryagin(P, ZB, ZERO, pg.guaranteed_time_theta(ZB, P) / 5000)
        assert rep.captured and rep.invariant_violations == []
        assert np.all(traj.u[:-1, 0] <= 0)  # thrust along -xi

    def test_step_too_coarse(self):
        with pytest.raises(StepTooCoarse):
            run_pontryagin(PB, ZB, ZERO, 0.1)

    def test_forged_second_switch(self):
        traj, _ = run_pontryagin(PB, ZB, EvaderSpec("constant_decay", {"k": 1.0}), 2.3 / 5000)
        forged = dataclasses.replace(traj, events=traj.events + [(2.0, "mode_switch")])
        assert any("mode switches" in v for v in monitor_invariants(forged, "pontryagin"))

    def test_planar_perturbed(self):
        P = pg.PontryaginParams(2.0, 1.0, 1.5, 1.0, rho=3, sigma=1, n=2)
        z0 = pg.PontryaginState([1.5, -0.5], [0.2, 0.0], [-0.3, 0.4])
        T = pg.guaranteed_time_theta(z0, P)
        traj, rep = run_pontryagin(P, z0, EvaderSpec("seeded_random", {"seed": 1}), T / 5000)
        assert rep.final_miss <= 1e-3 * np.linalg.norm(z0.z1)
        assert rep.invariant_violations == []
