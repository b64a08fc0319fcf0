import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from pursuit_rf import simple_motion as sm
from pursuit_rf.errors import DegenerateStart, InsideTerminal

Z0 = np.array([3.0, 0.0])
vec2 = arrays(np.float64, 2, elements=st.floats(-5, 5))


class TestLambda:
    @pytest.mark.parametrize("v,expected", [([0, 0], 0.75), ([1, 0], 1.75), ([-1, 0], 0.0)])
    def test_known(self, v, expected):
        assert sm.lambda_l(v, Z0, 3.0, 1.0) == pytest.approx(expected, abs=1e-14)

    def test_point_capture(self):
        assert sm.lambda_I([0, 0], Z0, 3.0) == pytest.approx(1 / 3)
        assert sm.lambda_I([1, 1], Z0, 3.0) == pytest.approx(1.0)
        assert sm.lambda_I([-0.5, 4.0], Z0, 3.0) == 0.0  # <v, z0> = -delta/2

    @settings(max_examples=200, deadline=None)
    @given(vec2, vec2.filter(lambda z: np.linalg.norm(z) > 1e-3), st.floats(0.01, 10))
    def test_l_zero_reduces(self, v, z0, delta):
        assert sm.lambda_l(v, z0, delta, 0.0) == pytest.approx(sm.lambda_I(v, z0, delta), rel=1e-9, abs=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(vec2, st.floats(0.01, 10), st.floats(0, 2), st.floats(0.05, 5))
    def test_root_of_contact_quadratic(self, v, delta, l, gap):
        # at lam > 0 the target ball lam*(ball(l) - z0) touches the reachable ball of radius sqrt(|v|^2 + delta lam)
        z0 = np.array([l + gap, 0.0])
        lam = sm.lambda_l(v, z0, delta, l)
        if lam > 0:
            dist = np.linalg.norm(v - lam * z0)
            assert dist == pytest.approx(np.sqrt(v @ v + delta * lam) + lam * l, rel=1e-9, abs=1e-9)

    def test_batch_matches_single(self):
        rng = np.random.default_rng(1)
        V = rng.standard_normal((50, 3))
        z0 = np.array([1.0, 2.0, -0.5])
        batch = sm.lambda_l(V, z0, 2.0, 0.3)
        assert batch.shape == (50,)
        np.testing.assert_allclose(batch, [sm.lambda_l(v, z0, 2.0, 0.3) for v in V], rtol=0, atol=0)

    def test_inside_rejected(self):
        with pytest.raises(InsideTerminal):
            sm.lambda_l([0, 0], [1, 0], 3.0, 1.0)


class TestStrategy:
    def test_hand_value(self):
        u = sm.pi_l_strategy([0, 0], Z0, 3.0, 1.0)
        np.testing.assert_allclose(u, [-1.5, 0.0], atol=1e-14)
        assert u @ u == pytest.approx(3.0 * 0.75)

    def test_zero_lambda_copies_v(self):
        np.testing.assert_allclose(sm.pi_l_strategy([-1, 0], Z0, 3.0, 1.0), [-1, 0])

    def test_point_capture_form(self):
        v = np.array([0.3, -0.8])
        lam = sm.lambda_I(v, Z0, 3.0)
        np.testing.assert_allclose(sm.pi_l_strategy(v, Z0, 3.0, 0.0), v - lam * Z0, atol=1e-14)
        np.testing.assert_allclose(sm.pi_I_strategy(v, Z0, 3.0), v - lam * Z0, atol=1e-14)

    @settings(max_examples=300, deadline=None)
    @given(arrays(np.float64, 3, elements=st.floats(-5, 5)),
           arrays(np.float64, 3, elements=st.floats(-10, 10)).filter(lambda z: np.linalg.norm(z) > 0.1),
           st.floats(0.01, 10), st.floats(0, 1))
    def test_energy_identity(self, v, z0, delta, frac):
        l = frac * 0.99 * np.linalg.norm(z0)
        u = sm.pi_l_strategy(v, z0, delta, l)
        lam = sm.lambda_l(v, z0, delta, l)
        assert abs(u @ u - v @ v - delta * lam) < 1e-9 * (1 + v @ v + delta * lam)


class TestBounds:
    def test_capture_bound(self):
        assert sm.capture_bound(Z0, 2, 1, 0) == pytest.approx(9.0)
        assert sm.capture_bound(Z0, 2, 0, 0) == pytest.approx((3 / 2) ** 2)
        assert sm.capture_bound(Z0, 2, 1, 3 - 1e-9) == pytest.approx(0.0, abs=1e-15)

    def test_containment_ball(self):
        c, r = sm.containment_ball([3, 0], [0, 0], 2, 1)
        np.testing.assert_allclose(c, [-1, 0])
        assert r == pytest.approx(2.0)
        c, r = sm.containment_ball([3, 1], [1, 1], 2, 0)
        np.testing.assert_allclose(c, [1, 1])
        assert r == 0

    def test_degenerate_start(self):
        with pytest.raises(DegenerateStart):
            sm.containment_ball([1, 1], [1, 1], 2, 1)

    def test_params_gate(self):
        with pytest.raises(ValueError, match="rho must exceed sigma"):
            sm.SimpleMotionParams(1.0, 1.0)


def test_sign_characterisation():
    # lam > 0 exactly when delta + 2<v, z0> + 2 l |v| > 0, also right next to the boundary
    rng = np.random.default_rng(0)
    for i in range(10_000):
        n = int(rng.integers(1, 4))
        delta, l = rng.uniform(0.1, 10), rng.uniform(0, 2)
        z0 = rng.standard_normal(n)
        z0 *= (l + rng.uniform(0.05, 5)) / np.linalg.norm(z0)
        v = rng.uniform(-5, 5, n)
        pull = -2 * (v @ z0) - 2 * l * np.linalg.norm(v)
        if i % 2 and pull > 0:
            v *= delta / pull * (1 + rng.uniform(-1e-6, 1e-6))
        gate = delta + 2 * (v @ z0) + 2 * l * np.linalg.norm(v)
        assert (sm.lambda_l(v, z0, delta, l) > 0) == (gate > 0)
