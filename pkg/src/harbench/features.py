"""Handcrafted window descriptors."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    schema: tuple[str, ...]

    def __post_init__(self):
        if len(self.values) != len(self.schema):
            raise ValueError("feature values and schema differ in length")
        if not np.isfinite(self.values).all():
            raise ValueError("non-finite feature value")


def _as_matrix(window) -> np.ndarray:
    data = getattr(window, "data", window)
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 2 or data.shape[0] == 0:
        raise ValueError("window must be a nonempty (time, channel) matrix")
    return data


def _names(window, n):
    names = getattr(window, "channel_names", None)
    return list(names) if names else [f"ch{i}" for i in range(n)]


def features_mean_std(window, channel_names=None) -> FeatureVector:
    """Per channel mean and population std, concatenated in channel order."""
    x = _as_matrix(window)
    names = list(channel_names) if channel_names else _names(window, x.shape[1])
    vals = np.empty(2 * x.shape[1])
    vals[0::2] = x.mean(axis=0)
    vals[1::2] = x.std(axis=0)
    schema = tuple(s for n in names for s in (f"{n}_mean", f"{n}_std"))
    return FeatureVector(vals, schema)


def _pair_corr(x: np.ndarray) -> np.ndarray:
    """Pearson correlation for every channel pair (upper triangle, row-major).

    Pairs involving a zero-variance channel get 0.
    """
    xc = x - x.mean(axis=0)
    ss = np.sqrt((xc * xc).sum(axis=0))
    iu, ju = np.triu_indices(x.shape[1], k=1)
    num = (xc[:, iu] * xc[:, ju]).sum(axis=0)
    den = ss[iu] * ss[ju]
    out = np.zeros_like(num)
    ok = den > 0
    out[ok] = np.clip(num[ok] / den[ok], -1.0, 1.0)
    return out


def features_mean_corr(window, channel_names=None) -> FeatureVector:
    x = _as_matrix(window)
    if x.shape[1] < 2:
        raise ValueError("correlation features need at least two channels")
    names = list(channel_names) if channel_names else _names(window, x.shape[1])
    vals = np.concatenate([x.mean(axis=0), _pair_corr(x)])
    schema = tuple(f"{n}_mean" for n in names) + tuple(
        f"corr_{names[i]}_{names[j]}" for i, j in combinations(range(len(names)), 2)
    )
    return FeatureVector(vals, schema)


# batched forms used by the experiment runner; rows match the per-window functions


def batch_mean_std(stacked: np.ndarray) -> np.ndarray:
    """``(N, T, C)`` -> ``(N, 2C)`` in the same layout as :func:`features_mean_std`."""
    out = np.empty((stacked.shape[0], 2 * stacked.shape[2]))
    out[:, 0::2] = stacked.mean(axis=1)
    out[:, 1::2] = stacked.std(axis=1)
    return out


def batch_mean_corr(stacked: np.ndarray) -> np.ndarray:
    n, _, c = stacked.shape
    if c < 2:
        raise ValueError("correlation features need at least two channels")
    mean = stacked.mean(axis=1)
    xc = stacked - mean[:, None, :]
    ss = np.sqrt((xc * xc).sum(axis=1))
    iu, ju = np.triu_indices(c, k=1)
    num = (xc[:, :, iu] * xc[:, :, ju]).sum(axis=1)
    den = ss[:, iu] * ss[:, ju]
    corr = np.zeros_like(num)
    ok = den > 0
    corr[ok] = np.clip(num[ok] / den[ok], -1.0, 1.0)
    return np.concatenate([mean, corr], axis=1)


def schema_mean_std(channel_names) -> tuple[str, ...]:
    return tuple(s for n in channel_names for s in (f"{n}_mean", f"{n}_std"))


def schema_mean_corr(channel_names) -> tuple[str, ...]:
    names = list(channel_names)
    return tuple(f"{n}_mean" for n in names) + tuple(
        f"corr_{names[i]}_{names[j]}" for i, j in combinations(range(len(names)), 2)
    )
