from .layers import AvgPool2, ConvLayer, Upsample2, relu, sigmoid
from .model import (
    AutoencoderModel,
    CheckpointError,
    ENCODER_CHANNELS,
    LATENT_DIM,
    bce_grad,
    bce_loss,
    load_checkpoint,
    save_checkpoint,
)
from .optim import Adam, learning_rate
from .train import TrainConfig, TrainResult, train

__all__ = [
    "Adam",
    "AutoencoderModel",
    "AvgPool2",
    "CheckpointError",
    "ConvLayer",
    "ENCODER_CHANNELS",
    "LATENT_DIM",
    "TrainConfig",
    "TrainResult",
    "Upsample2",
    "bce_grad",
    "bce_loss",
    "learning_rate",
    "load_checkpoint",
    "relu",
    "save_checkpoint",
    "sigmoid",
    "train",
]
