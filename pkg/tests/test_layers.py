import numpy as np
import pytest

from conftest import fd_gradient, max_rel_err
from defvec.autoencoder.layers import AvgPool2, ConvLayer, Upsample2, relu, sigmoid


def conv_reference(x, w, b):
    """Six-nested-loop 3x3 stride-1 pad-1 convolution, the independent oracle."""
    batch, cin, height, width = x.shape
    cout = w.shape[0]
    out = np.zeros((batch, cout, height, width), dtype=np.float64)
    for n in range(batch):
        for o in range(cout):
            for i in range(height):
                for j in range(width):
                    acc = b[o]
                    for c in range(cin):
                        for u in range(3):
                            for v in range(3):
                                ii, jj = i + u - 1, j + v - 1
                                if 0 <= ii < height and 0 <= jj < width:
                                    acc += w[o, c, u, v] * x[n, c, ii, jj]
                    out[n, o, i, j] = acc
    return out


def make_conv(rng, cin, cout, kind="conv", activation="none"):
    return ConvLayer(cin, cout, kind=kind, activation=activation, rng=rng,
                     dtype=np.float64)


class TestConvForward:
    def test_shape_preserved(self, rng):
        layer = make_conv(rng, 3, 7)
        out = layer.forward(rng.random((2, 3, 32, 32)))
        assert out.shape == (2, 7, 32, 32)

    def test_identity_kernel(self, rng):
        layer = make_conv(rng, 1, 1)
        layer.weights[:] = 0.0
        layer.weights[0, 0, 1, 1] = 1.0
        layer.bias[:] = 0.0
        x = rng.random((1, 1, 6, 6))
        assert np.allclose(layer.forward(x), x)

    def test_matches_loop_reference(self, rng):
        layer = make_conv(rng, 2, 3)
        x = rng.standard_normal((1, 2, 4, 4))
        expected = conv_reference(x, layer.weights, layer.bias)
        assert np.abs(layer.forward(x) - expected).max() < 1e-6

    def test_transpose_is_flipped_conv(self, rng):
        layer = make_conv(rng, 2, 2, kind="conv_transpose")
        x = rng.standard_normal((1, 2, 5, 5))
        flipped = layer.weights[:, :, ::-1, ::-1]
        expected = conv_reference(x, flipped, layer.bias)
        assert np.abs(layer.forward(x) - expected).max() < 1e-6

    def test_shape_mismatch(self, rng):
        layer = make_conv(rng, 3, 4)
        with pytest.raises(ValueError, match="incompatible"):
            layer.forward(rng.random((1, 2, 8, 8)))


class TestConvBackward:
    @pytest.mark.parametrize("kind", ["conv", "conv_transpose"])
    @pytest.mark.parametrize("activation", ["none", "sigmoid"])
    def test_matches_finite_differences(self, rng, kind, activation):
        layer = make_conv(rng, 2, 3, kind=kind, activation=activation)
        x = rng.standard_normal((2, 2, 4, 4))
        gout = rng.standard_normal((2, 3, 4, 4))
        layer.forward(x)
        gx = layer.backward(gout)

        def loss():
            return float((layer.forward(x) * gout).sum())

        assert max_rel_err(gx, fd_gradient(loss, x)) < 1e-4
        assert max_rel_err(layer.grad_weights, fd_gradient(loss, layer.weights)) < 1e-4
        assert max_rel_err(layer.grad_bias, fd_gradient(loss, layer.bias)) < 1e-4

    def test_zero_grad_out_gives_zero_grads(self, rng):
        layer = make_conv(rng, 2, 2, activation="relu")
        x = rng.standard_normal((1, 2, 4, 4))
        layer.forward(x)
        gx = layer.backward(np.zeros((1, 2, 4, 4)))
        assert not gx.any()
        assert not layer.grad_weights.any()
        assert not layer.grad_bias.any()

    def test_bias_grad_is_sum_of_grad_out(self, rng):
        layer = make_conv(rng, 2, 3, activation="none")
        x = rng.standard_normal((2, 2, 4, 4))
        gout = rng.standard_normal((2, 3, 4, 4))
        layer.forward(x)
        layer.backward(gout)
        assert np.allclose(layer.grad_bias, gout.sum(axis=(0, 2, 3)))


class TestPoolAndUpsample:
    def test_pool_constant(self):
        pool = AvgPool2()
        x = np.full((1, 2, 8, 8), 0.3)
        out = pool.forward(x)
        assert out.shape == (1, 2, 4, 4)
        assert np.allclose(out, 0.3)

    def test_pool_odd_dims_error(self):
        with pytest.raises(ValueError, match="odd"):
            AvgPool2().forward(np.zeros((1, 1, 5, 4)))

    def test_upsample_then_pool_is_identity(self, rng):
        x = rng.random((2, 3, 4, 4))
        up = Upsample2()
        pool = AvgPool2()
        assert np.allclose(pool.forward(up.forward(x)), x)

    def test_pool_of_block_constant_then_upsample_is_identity(self, rng):
        coarse = rng.random((1, 2, 3, 3))
        x = np.repeat(np.repeat(coarse, 2, axis=2), 2, axis=3)
        assert np.allclose(Upsample2().forward(AvgPool2().forward(x)), x)

    @pytest.mark.parametrize("op", [AvgPool2, Upsample2])
    def test_backward_matches_finite_differences(self, rng, op):
        layer = op()
        x = rng.standard_normal((1, 2, 4, 4))
        out = layer.forward(x)
        gout = rng.standard_normal(out.shape)
        gx = layer.backward(gout)

        def loss():
            return float((layer.forward(x) * gout).sum())

        assert max_rel_err(gx, fd_gradient(loss, x)) < 1e-6

    def test_backward_is_exact_adjoint(self, rng):
        # <Ax, y> == <x, A^T y> for both linear ops
        for layer in (AvgPool2(), Upsample2()):
            x = rng.standard_normal((1, 2, 4, 4))
            out = layer.forward(x)
            y = rng.standard_normal(out.shape)
            assert float((out * y).sum()) == pytest.approx(
                float((x * layer.backward(y)).sum())
            )


class TestActivations:
    def test_relu(self):
        assert np.array_equal(relu(np.array([-1.0, 0.0, 2.0])), [0.0, 0.0, 2.0])

    def test_sigmoid_stable_extremes(self):
        out = sigmoid(np.array([-500.0, 0.0, 500.0]))
        assert np.all(np.isfinite(out))
        assert out[0] == pytest.approx(0.0, abs=1e-200)
        assert out[1] == 0.5
        assert out[2] == pytest.approx(1.0, abs=1e-15)

    def test_sigmoid_symmetric(self, rng):
        x = rng.standard_normal(100)
        assert np.allclose(sigmoid(x) + sigmoid(-x), 1.0)
