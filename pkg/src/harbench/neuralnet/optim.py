"""Adadelta and the shared training configuration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_EPOCHS = 200
STOP_LOSS = 0.2
BATCH_SIZE = 1000
LARGE_DATASET_BATCH_SIZE = 250


@dataclass(frozen=True)
class TrainConfig:
    max_epochs: int = MAX_EPOCHS
    stop_loss: float = STOP_LOSS
    batch_size: int = BATCH_SIZE
    rho: float = 0.95
    eps: float = 1e-6
    lr: float = 1.0
    seed: int = 0
    large_dataset: bool = False

    def __post_init__(self):
        if self.max_epochs < 0:
            raise ValueError("max_epochs must be nonnegative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")
        if not 0.0 <= self.rho < 1.0:
            raise ValueError("rho must lie in [0, 1)")
        if not self.eps > 0:
            raise ValueError("eps must be positive")

    @property
    def effective_batch_size(self) -> int:
        return LARGE_DATASET_BATCH_SIZE if self.large_dataset else self.batch_size


class AdadeltaState:
    """Running averages of squared gradients and squared updates per tensor."""

    def __init__(self, params: dict):
        self.sq_grad = {k: np.zeros_like(v) for k, v in params.items()}
        self.sq_delta = {k: np.zeros_like(v) for k, v in params.items()}


def adadelta_step(params: dict, grads: dict, state: AdadeltaState, rho=0.95, eps=1e-6, lr=1.0) -> dict:
    """In-place Adadelta update; returns ``params``.

    E[g^2] <- rho E[g^2] + (1-rho) g^2
    dx     <- -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
    E[dx^2] <- rho E[dx^2] + (1-rho) dx^2
    """
    for k, g in grads.items():
        p = params[k]
        if p.shape != g.shape:
            raise ValueError(f"{k}: gradient shape {g.shape} != parameter shape {p.shape}")
        eg = state.sq_grad[k]
        ed = state.sq_delta[k]
        eg *= rho
        eg += (1.0 - rho) * g * g
        delta = -np.sqrt(ed + eps) / np.sqrt(eg + eps) * g
        ed *= rho
        ed += (1.0 - rho) * delta * delta
        p += lr * delta
    return params
