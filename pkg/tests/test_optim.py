import numpy as np
import pytest

from defvec.autoencoder.optim import Adam, learning_rate


class TestAdam:
    def test_first_step_hand_computed(self):
        # p=1, g=1, lr=0.001: m_hat=g, sqrt(v_hat)=|g| so p' = 1 - lr/(1+eps*...)
        p = np.array([1.0])
        opt = Adam([p], lr=0.001)
        opt.step([np.array([1.0])])
        expected = 1.0 - 0.001 * (1.0 / (1.0 + 1e-8))
        assert p[0] == pytest.approx(expected, abs=1e-12)

    def test_zero_gradient_leaves_params(self):
        p = np.array([3.0, -2.0])
        opt = Adam([p], lr=0.1)
        opt.step([np.zeros(2)])
        assert np.array_equal(p, [3.0, -2.0])
        assert opt.t == 1

    def test_deterministic(self):
        def run():
            p = np.linspace(-1, 1, 10)
            opt = Adam([p], lr=0.01)
            rng = np.random.default_rng(4)
            for _ in range(50):
                opt.step([rng.standard_normal(10)])
            return p

        assert np.array_equal(run(), run())

    def test_second_step_recurrence(self):
        # follow the recurrence by hand for two steps on a scalar
        p = np.array([0.5])
        opt = Adam([p], lr=0.01)
        g1, g2 = 0.3, -0.7
        opt.step([np.array([g1])])
        opt.step([np.array([g2])])
        m = 0.1 * g1
        v = 0.001 * g1 * g1
        p_ref = 0.5 - 0.01 * (m / (1 - 0.9)) / (np.sqrt(v / (1 - 0.999)) + 1e-8)
        m = 0.9 * m + 0.1 * g2
        v = 0.999 * v + 0.001 * g2 * g2
        p_ref -= 0.01 * (m / (1 - 0.9**2)) / (np.sqrt(v / (1 - 0.999**2)) + 1e-8)
        assert p[0] == pytest.approx(p_ref, abs=1e-12)

    def test_shape_mismatch(self):
        opt = Adam([np.zeros(3)], lr=0.1)
        with pytest.raises(ValueError):
            opt.step([np.zeros(4)])

    def test_gradient_count_mismatch(self):
        opt = Adam([np.zeros(3)], lr=0.1)
        with pytest.raises(ValueError):
            opt.step([])


class TestSchedule:
    def test_halving_every_five_epochs(self):
        assert learning_rate(0) == 0.00215
        assert learning_rate(4) == 0.00215
        assert learning_rate(5) == 0.001075
        assert learning_rate(9) == 0.001075
        assert learning_rate(20) == pytest.approx(0.000134375, abs=0)
        assert learning_rate(24) == pytest.approx(0.000134375, abs=0)

    def test_exactly_five_distinct_values_over_25_epochs(self):
        values = {learning_rate(e) for e in range(25)}
        assert len(values) == 5

    def test_formula(self):
        for e in range(25):
            assert learning_rate(e) == 0.00215 * 2.0 ** -(e // 5)
