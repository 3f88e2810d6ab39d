"""Multi-head convolutional date classifier written directly in numpy."""
from .augment import affine_jitter, random_erase
from .checkpoint import load_checkpoint, save_checkpoint
from .model import (
    ConvBlock,
    Model,
    ModelConfig,
    Prediction,
    Predictions,
    adapt_model,
    backward,
    forward,
    forward_cached,
    init_model,
    predict,
    predict_batch,
)
from .optim import TrainConfig, lr_schedule, sgd_step
from .train import EpochRecord, TrainLog, train

__all__ = [
    "ConvBlock", "Model", "ModelConfig", "Prediction", "Predictions", "TrainConfig",
    "EpochRecord", "TrainLog", "adapt_model", "affine_jitter", "backward", "forward",
    "forward_cached", "init_model", "load_checkpoint", "lr_schedule", "predict",
    "predict_batch", "random_erase", "save_checkpoint", "sgd_step", "train",
]
