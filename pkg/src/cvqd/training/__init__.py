"""Losses, gradient estimators, Adam and the training loops."""

from cvqd.training.trainer import TrainingResult, train_generative, train_restoration

__all__ = [
    "TrainingResult",
    "train_generative",
    "train_restoration",
]
