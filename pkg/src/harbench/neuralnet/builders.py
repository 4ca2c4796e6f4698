"""The four convolutional architectures and their input transforms.

All convolutions are valid (no padding) with stride 1, and every
architecture ends in flatten -> dense(n_classes) -> softmax.
"""

from __future__ import annotations

from collections import OrderedDict

import numpy as np

from .layers import Activation, AvgPool, Conv2D, Dense, Flatten, InsertZeroColumns, MaxPool, ShapeError, Softmax
from .network import NetSpec


def _head(n_classes):
    return [Flatten(), Dense(n_classes), Softmax()]


def build_chen_xue(input_shape, n_classes, filters=(18, 36, 24), activation="relu") -> NetSpec:
    """conv 12x2 -> pool 2x1 -> conv 12x1 -> pool 2x1 -> conv 12x1 -> pool 2x1."""
    h, w = input_shape[:2]
    f1, f2, f3 = filters
    layers = [
        Conv2D(f1, 12, 2), Activation(activation), MaxPool(2, 1),
        Conv2D(f2, 12, 1), Activation(activation), MaxPool(2, 1),
        Conv2D(f3, 12, 1), Activation(activation), MaxPool(2, 1),
    ] + _head(n_classes)
    return NetSpec((h, w, 1), layers, "chen_xue")


# ---------------------------------------------------------------------------
# signal image
# ---------------------------------------------------------------------------


def pair_cover_sequence(n_channels: int) -> list[int]:
    """Channel order in which every unordered pair is adjacent at least once.

    Greedy walk: always step to the lowest-numbered channel whose pair with
    the current one is still uncovered; when stuck, jump to the lowest channel
    that still has an uncovered pair (the jump itself may repeat a pair).
    """
    if n_channels < 2:
        raise ValueError("a signal image needs at least two channels")
    todo = {(i, j) for i in range(n_channels) for j in range(i + 1, n_channels)}
    seq = [0]
    while todo:
        cur = seq[-1]
        nxt = [j for j in range(n_channels) if j != cur and (min(cur, j), max(cur, j)) in todo]
        if nxt:
            j = nxt[0]
            todo.discard((min(cur, j), max(cur, j)))
            seq.append(j)
        else:
            j = min(min(p) for p in todo)
            if j == cur:  # unreachable: cur has no uncovered pair here
                j = min(max(p) for p in todo)
            seq.append(j)
    return seq


def signal_image(window, n_channels=None) -> np.ndarray:
    """Magnitude of the centred 2-D DFT of the pair-covering channel stack.

    Input is ``(T, C)``; output is ``(T, L)`` where L is the sequence length,
    i.e. time stays on the height axis like the other networks.
    """
    x = np.asarray(getattr(window, "data", window), dtype=np.float64)
    seq = pair_cover_sequence(x.shape[1])
    img = x[:, seq]
    return np.abs(np.fft.fftshift(np.fft.fft2(img)))


def batch_signal_image(stacked: np.ndarray) -> np.ndarray:
    seq = pair_cover_sequence(stacked.shape[2])
    img = stacked[:, :, seq]
    return np.abs(np.fft.fftshift(np.fft.fft2(img, axes=(1, 2)), axes=(1, 2)))


def build_jiang_yin(input_shape, n_classes, filters=(5, 10), activation="relu") -> NetSpec:
    """``input_shape`` is the raw ``(T, C)`` window; the net sees the signal image."""
    t, c = input_shape[:2]
    if c < 2:
        raise ShapeError("signal image needs at least two channels")
    width = len(pair_cover_sequence(c))
    layers = [
        Conv2D(filters[0], 5, 5), Activation(activation), AvgPool(4, 4),
        Conv2D(filters[1], 5, 5), Activation(activation), AvgPool(2, 2),
    ] + _head(n_classes)
    return NetSpec((t, width, 1), layers, "jiang_yin")


# ---------------------------------------------------------------------------
# modality-separated inputs
# ---------------------------------------------------------------------------


def modality_groups(channels) -> list[list[int]]:
    """Channel indices grouped by sensor kind, in first-appearance order."""
    groups = OrderedDict()
    for i, ch in enumerate(channels):
        groups.setdefault(getattr(ch, "sensor_kind", ch), []).append(i)
    return list(groups.values())


def assemble_modalities(stacked: np.ndarray, groups) -> np.ndarray:
    """``(N, T, C)`` -> ``(N, T, W)`` with one zero column between groups."""
    n, t, _ = stacked.shape
    parts = []
    for gi, g in enumerate(groups):
        if gi:
            parts.append(np.zeros((n, t, 1)))
        parts.append(stacked[:, :, g])
    return np.concatenate(parts, axis=2)


def _padded_width(groups):
    return sum(len(g) for g in groups) + len(groups) - 1


def _boundaries(groups):
    """Indices of the zero columns in the assembled input."""
    out, pos = [], 0
    for g in groups[:-1]:
        pos += len(g)
        out.append(pos)
        pos += 1
    return out


def _ha_layers(n_classes, groups, reinsert, filters, activation, kernel=3):
    layers = [Conv2D(filters[0], kernel, kernel), Activation(activation)]
    if reinsert:
        # feature column j sees input columns j..j+k-1; the zero column at z
        # sits at the centre of feature column z - k//2
        layers.append(InsertZeroColumns(tuple(z - kernel // 2 for z in _boundaries(groups))))
    layers += [MaxPool(2, 1), Conv2D(filters[1], kernel, kernel), Activation(activation), MaxPool(2, 1)]
    return layers + _head(n_classes)


def _check_groups(groups):
    if len(groups) < 2:
        raise ShapeError("modality separation needs at least two modality groups")


def build_ha2015(input_shape, groups, n_classes, filters=(32, 64), activation="relu") -> NetSpec:
    """conv 3x3 -> pool 2x1 -> conv 3x3 -> pool 2x1 on zero-separated modalities."""
    _check_groups(groups)
    t = input_shape[0]
    return NetSpec((t, _padded_width(groups), 1), _ha_layers(n_classes, groups, False, filters, activation), "ha2015")


def build_ha2016(input_shape, groups, n_classes, filters=(32, 64), activation="relu") -> NetSpec:
    """As :func:`build_ha2015` plus zero columns re-inserted after the first conv."""
    _check_groups(groups)
    t = input_shape[0]
    return NetSpec((t, _padded_width(groups), 1), _ha_layers(n_classes, groups, True, filters, activation), "ha2016")
