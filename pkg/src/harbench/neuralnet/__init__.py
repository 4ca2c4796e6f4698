"""Small dense/convolutional network engine trained with Adadelta."""

from .builders import (
    assemble_modalities,
    batch_signal_image,
    build_chen_xue,
    build_ha2015,
    build_ha2016,
    build_jiang_yin,
    modality_groups,
    pair_cover_sequence,
    signal_image,
)
from .layers import (
    Activation,
    AvgPool,
    Conv2D,
    Dense,
    Flatten,
    InsertZeroColumns,
    MaxPool,
    ShapeError,
    Softmax,
    conv2d_backward,
    conv2d_forward,
    softmax,
    softmax_cross_entropy,
)
from .network import NetSpec, TrainedNet, TrainingDivergence, fit, grad_check, init_params, loss_and_grads, predict_proba
from .optim import AdadeltaState, TrainConfig, adadelta_step
