"""The convolutional autoencoder: five Conv-ReLU encoder blocks each followed
by 2x2 average pooling, and five upsample + ConvTranspose-ReLU decoder blocks
with a terminal sigmoid. A 3x32x32 input bottlenecks to a 32-dim latent
(spatial trace 32 -> 16 -> 8 -> 4 -> 2 -> 1).

Stride-1 / padding-1 3x3 layers preserve spatial size, so the down/upsampling
steps around each block are what realize the bottleneck; the channel plan
(3 -> 8 -> 16 -> 32 -> 32 -> 32, mirrored) is a configurable default.

Also houses the BCE reconstruction loss and binary checkpoint I/O.
"""

from __future__ import annotations

import struct

import numpy as np

from .layers import AvgPool2, ConvLayer, Upsample2
from .optim import Adam

ENCODER_CHANNELS = (3, 8, 16, 32, 32, 32)
LATENT_DIM = 32
INPUT_SHAPE = (3, 32, 32)
BCE_EPS = 1e-7

CHECKPOINT_MAGIC = b"DFVC"
CHECKPOINT_VERSION = 1
_KIND_CODES = {"conv": 0, "conv_transpose": 1}
_KIND_NAMES = {v: k for k, v in _KIND_CODES.items()}
_ACT_CODES = {"none": 0, "relu": 1, "sigmoid": 2}
_ACT_NAMES = {v: k for k, v in _ACT_CODES.items()}


class CheckpointError(ValueError):
    pass


class AutoencoderModel:
    def __init__(self, seed: int = 0, channels=ENCODER_CHANNELS, dtype=np.float32):
        self.seed = int(seed)
        self.channels = tuple(channels)
        rng = np.random.default_rng(self.seed)
        self.encoder = [
            ConvLayer(cin, cout, kind="conv", activation="relu", rng=rng, dtype=dtype)
            for cin, cout in zip(self.channels, self.channels[1:])
        ]
        decoder_channels = tuple(reversed(self.channels))
        self.decoder = [
            ConvLayer(
                cin,
                cout,
                kind="conv_transpose",
                activation="sigmoid" if i == len(decoder_channels) - 2 else "relu",
                rng=rng,
                dtype=dtype,
            )
            for i, (cin, cout) in enumerate(zip(decoder_channels, decoder_channels[1:]))
        ]
        self._pools = [AvgPool2() for _ in self.encoder]
        self._upsamples = [Upsample2() for _ in self.decoder]

    @property
    def latent_dim(self):
        return self.channels[-1]

    def encode(self, x: np.ndarray) -> np.ndarray:
        """(B, 3, 32, 32) in [0,1] -> (B, latent, 1, 1). Spatial dims must be
        divisible by 2^depth; the standard 5-block model needs 32x32."""
        factor = 2 ** len(self.encoder)
        if (
            x.ndim != 4
            or x.shape[1] != self.channels[0]
            or x.shape[2] % factor
            or x.shape[3] % factor
        ):
            raise ValueError(
                f"expected (B, {self.channels[0]}, H, W) input with H, W "
                f"divisible by {factor}, got {x.shape}"
            )
        h = x
        for conv, pool in zip(self.encoder, self._pools):
            h = pool.forward(conv.forward(h))
        return h

    def decode(self, z: np.ndarray) -> np.ndarray:
        """(B, latent, 1, 1) -> (B, 3, 32, 32) in (0, 1)."""
        if z.ndim != 4 or z.shape[1] != self.latent_dim:
            raise ValueError(
                f"expected (B, {self.latent_dim}, h, w) latent, got {z.shape}"
            )
        h = z
        for up, conv in zip(self._upsamples, self.decoder):
            h = conv.forward(up.forward(h))
        return h

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self.decode(self.encode(x))

    def backward(self, grad_recon: np.ndarray) -> np.ndarray:
        """Backpropagate through decode then encode; fills per-layer param grads
        and returns the gradient with respect to the input."""
        g = grad_recon
        for up, conv in zip(reversed(self._upsamples), reversed(self.decoder)):
            g = up.backward(conv.backward(g))
        for conv, pool in zip(reversed(self.encoder), reversed(self._pools)):
            g = conv.backward(pool.backward(g))
        return g

    def layers(self):
        return self.encoder + self.decoder

    def parameters(self):
        return [p for layer in self.layers() for p in layer.parameters()]

    def gradients(self):
        return [g for layer in self.layers() for g in layer.gradients()]


def bce_loss(recon: np.ndarray, target: np.ndarray) -> float:
    """Mean binary cross-entropy; recon is clamped to [eps, 1-eps] before logs."""
    if recon.shape != target.shape:
        raise ValueError(f"shape mismatch {recon.shape} vs {target.shape}")
    r = np.clip(recon.astype(np.float64), BCE_EPS, 1.0 - BCE_EPS)
    t = target.astype(np.float64)
    return float(np.mean(-(t * np.log(r) + (1.0 - t) * np.log(1.0 - r))))


def bce_grad(recon: np.ndarray, target: np.ndarray) -> np.ndarray:
    """Gradient of bce_loss with respect to recon (zero where clamped)."""
    if recon.shape != target.shape:
        raise ValueError(f"shape mismatch {recon.shape} vs {target.shape}")
    r = np.clip(recon, BCE_EPS, 1.0 - BCE_EPS)
    grad = (r - target) / (r * (1.0 - r)) / recon.size
    inside = (recon > BCE_EPS) & (recon < 1.0 - BCE_EPS)
    return (grad * inside).astype(recon.dtype)


def _write_array(fh, arr):
    fh.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def _read_array(buf, pos, shape):
    count = int(np.prod(shape))
    end = pos + 4 * count
    if end > len(buf):
        raise CheckpointError("truncated checkpoint")
    arr = np.frombuffer(buf[pos:end], dtype="<f4").reshape(shape).copy()
    return arr.astype(np.float32), end


def save_checkpoint(model: AutoencoderModel, path, adam: Adam | None = None) -> None:
    """Binary little-endian checkpoint; round-trips bit-exactly."""
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<IQ I", CHECKPOINT_VERSION, model.seed,
                             len(model.layers())))
        for layer in model.layers():
            fh.write(struct.pack(
                "<BBII",
                _KIND_CODES[layer.kind],
                _ACT_CODES[layer.activation],
                layer.in_ch,
                layer.out_ch,
            ))
            _write_array(fh, layer.weights)
            _write_array(fh, layer.bias)
        if adam is None:
            fh.write(struct.pack("<B", 0))
        else:
            fh.write(struct.pack("<BQ", 1, adam.t))
            for m in adam.m:
                _write_array(fh, m)
            for v in adam.v:
                _write_array(fh, v)


def load_checkpoint(path, lr: float = 0.0):
    """Returns (model, adam_or_none); adam gets the given lr (schedule-owned)."""
    with open(path, "rb") as fh:
        buf = fh.read()
    if buf[:4] != CHECKPOINT_MAGIC:
        raise CheckpointError("not a defvec checkpoint")
    pos = 4
    try:
        version, seed, layer_count = struct.unpack_from("<IQI", buf, pos)
    except struct.error as exc:
        raise CheckpointError("truncated checkpoint") from exc
    pos += struct.calcsize("<IQI")
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")

    specs = []
    arrays = []
    for _ in range(layer_count):
        try:
            kind_code, act_code, in_ch, out_ch = struct.unpack_from("<BBII", buf, pos)
        except struct.error as exc:
            raise CheckpointError("truncated checkpoint") from exc
        pos += struct.calcsize("<BBII")
        if kind_code not in _KIND_NAMES or act_code not in _ACT_NAMES:
            raise CheckpointError("corrupt layer descriptor")
        w, pos = _read_array(buf, pos, (out_ch, in_ch, 3, 3))
        b, pos = _read_array(buf, pos, (out_ch,))
        specs.append((_KIND_NAMES[kind_code], _ACT_NAMES[act_code], in_ch, out_ch))
        arrays.append((w, b))

    conv_specs = [s for s in specs if s[0] == "conv"]
    convt_specs = [s for s in specs if s[0] == "conv_transpose"]
    if len(conv_specs) + len(convt_specs) != layer_count or not conv_specs:
        raise CheckpointError("unexpected layer mix")
    channels = (conv_specs[0][2],) + tuple(s[3] for s in conv_specs)
    model = AutoencoderModel(seed=seed, channels=channels)
    if len(model.layers()) != layer_count:
        raise CheckpointError("layer count does not match architecture")
    for layer, spec, (w, b) in zip(model.layers(), specs, arrays):
        kind, act, in_ch, out_ch = spec
        if (layer.kind, layer.activation, layer.in_ch, layer.out_ch) != spec:
            raise CheckpointError("layer descriptor does not match architecture")
        layer.weights = w
        layer.bias = b

    if pos >= len(buf):
        raise CheckpointError("truncated checkpoint")
    (has_adam,) = struct.unpack_from("<B", buf, pos)
    pos += 1
    adam = None
    if has_adam:
        try:
            (t,) = struct.unpack_from("<Q", buf, pos)
        except struct.error as exc:
            raise CheckpointError("truncated checkpoint") from exc
        pos += 8
        adam = Adam(model.parameters(), lr=lr)
        adam.t = t
        adam.m = []
        adam.v = []
        for p in model.parameters():
            m, pos = _read_array(buf, pos, p.shape)
            adam.m.append(m)
        for p in model.parameters():
            v, pos = _read_array(buf, pos, p.shape)
            adam.v.append(v)
    return model, adam
