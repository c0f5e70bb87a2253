"""Mini-batch trainer: Adam, BCE reconstruction loss, learning rate halved
every 5 epochs, seeded shuffling. Fixed seed gives a bit-identical trajectory
on the same platform."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import AutoencoderModel, bce_grad, bce_loss
from .optim import Adam, learning_rate


@dataclass
class TrainConfig:
    epochs: int = 25
    lr0: float = 0.00215
    lr_halving_period: int = 5
    batch_size: int = 64
    seed: int = 0


@dataclass
class TrainResult:
    epoch_losses: list
    epoch_lrs: list


def train(model: AutoencoderModel, images: np.ndarray, cfg: TrainConfig,
          optimizer: Adam | None = None) -> TrainResult:
    """Train in place on an (N, 3, 32, 32) image array; returns per-epoch mean
    loss and the learning rate used for each epoch."""
    images = np.asarray(images, dtype=np.float32)
    if images.ndim != 4 or images.shape[0] == 0:
        raise ValueError("training set must be a non-empty (N, 3, 32, 32) array")
    rng = np.random.default_rng(cfg.seed)
    opt = optimizer or Adam(model.parameters(), lr=cfg.lr0)
    epoch_losses = []
    epoch_lrs = []
    n = images.shape[0]
    for epoch in range(cfg.epochs):
        opt.lr = learning_rate(epoch, cfg.lr0, cfg.lr_halving_period)
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, cfg.batch_size):
            batch = images[order[start : start + cfg.batch_size]]
            recon = model.forward(batch)
            total += bce_loss(recon, batch) * batch.shape[0]
            model.backward(bce_grad(recon, batch))
            opt.step(model.gradients())
        epoch_losses.append(total / n)
        epoch_lrs.append(opt.lr)
    return TrainResult(epoch_losses=epoch_losses, epoch_lrs=epoch_lrs)
