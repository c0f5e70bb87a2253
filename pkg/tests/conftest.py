import numpy as np
import pytest

from defvec.ppm import bilinear_resize


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


class PlantedSource:
    """Test image source with category-level images: every term of a category
    gets the same five perturbations of that category's prototype, so words
    within a category have bit-identical image sets."""

    def __init__(self, categories, seed=5):
        self.categories = list(categories)
        self.seed = seed
        self._cache = {}

    def _category(self, term):
        for cat in self.categories:
            if term.startswith(cat):
                return cat
        raise KeyError(term)

    def images_for(self, term):
        cat = self._category(term)
        if cat not in self._cache:
            ci = self.categories.index(cat)
            proto_rng = np.random.Generator(
                np.random.Philox(counter=[0, 0, 0, 0], key=[self.seed + 1000, ci])
            )
            u = proto_rng.random(3)
            color = 0.5 + 0.45 * np.sign(u - 0.5) * np.abs(2 * u - 1) ** 0.25
            field = bilinear_resize(proto_rng.random((4, 4, 3)), 32, 32)
            proto = np.clip(0.9 * color[None, None, :] + 0.1 * field, 0.05, 0.95)
            images = []
            for k in range(5):
                slot_rng = np.random.Generator(
                    np.random.Philox(counter=[k, 0, 0, 0], key=[self.seed, ci])
                )
                noise = (slot_rng.random((32, 32, 3)) - 0.5) * 0.08
                images.append(
                    np.clip(proto + noise, 0.02, 0.98)
                    .transpose(2, 0, 1)
                    .astype(np.float32)
                )
            self._cache[cat] = images
        return self._cache[cat]


def fd_gradient(f, x, h=1e-3):
    """Central finite differences of scalar f() with respect to array x,
    perturbing x in place."""
    g = np.zeros_like(x, dtype=np.float64)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        orig = x[i]
        x[i] = orig + h
        fp = f()
        x[i] = orig - h
        fm = f()
        x[i] = orig
        g[i] = (fp - fm) / (2.0 * h)
    return g


def relu_gates(model):
    """Bit pattern of every ReLU gate in the model's cached forward pass."""
    gates = []
    for layer in model.layers():
        if layer.activation == "relu":
            gates.append(np.packbits(layer._cache[1] > 0).tobytes())
    return tuple(gates)


def fd_gradient_gated(loss_fn, gates_fn, x, h=1e-3):
    """Central finite differences of loss_fn() with respect to x, masking out
    coordinates whose +/-h evaluations flip a ReLU gate: the FD hypothesis
    (local smoothness) does not hold across a kink.

    Returns (gradient, valid_mask).
    """
    g = np.zeros_like(x, dtype=np.float64)
    valid = np.ones(x.shape, dtype=bool)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        orig = x[i]
        x[i] = orig + h
        fp = loss_fn()
        gates_p = gates_fn()
        x[i] = orig - h
        fm = loss_fn()
        gates_m = gates_fn()
        x[i] = orig
        g[i] = (fp - fm) / (2.0 * h)
        if gates_p != gates_m:
            valid[i] = False
    return g, valid


def max_rel_err(analytic, numeric):
    """Relative error with a unit floor so near-zero gradients compare absolutely."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    denom = np.maximum(1.0, np.abs(analytic) + np.abs(numeric))
    return float((np.abs(analytic - numeric) / denom).max())
