"""Hot numeric kernels with a numba path and a pure-numpy path.

Every kernel exists twice: ``*_loops`` is plain Python written for numba
(compiled at import when numba is enabled) and ``*_np`` is vectorised numpy.
The public names dispatch to the compiled loops when available.

Array conventions: images are ``(N, H, W, C)`` (H = time, W = sensor axis),
convolution kernels are ``(KH, KW, C, F)``.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import lfilter

from ._accel import NUMBA_ENABLED, njit

# ---------------------------------------------------------------------------
# 2-D valid convolution, stride 1
# ---------------------------------------------------------------------------


def conv2d_forward_np(x, k, b):
    kh, kw = k.shape[0], k.shape[1]
    win = sliding_window_view(x, (kh, kw), axis=(1, 2))  # N,Ho,Wo,C,KH,KW
    out = np.tensordot(win, k.transpose(2, 0, 1, 3), axes=3)
    return out + b


def conv2d_backward_np(x, k, dout):
    kh, kw = k.shape[0], k.shape[1]
    win = sliding_window_view(x, (kh, kw), axis=(1, 2))
    dk = np.tensordot(win, dout, axes=([0, 1, 2], [0, 1, 2]))  # C,KH,KW,F
    dk = dk.transpose(1, 2, 0, 3)
    db = dout.sum(axis=(0, 1, 2))
    padded = np.pad(dout, ((0, 0), (kh - 1, kh - 1), (kw - 1, kw - 1), (0, 0)))
    pwin = sliding_window_view(padded, (kh, kw), axis=(1, 2))  # N,H,W,F,KH,KW
    flipped = k[::-1, ::-1].transpose(3, 0, 1, 2)  # F,KH,KW,C
    dx = np.tensordot(pwin, flipped, axes=3)
    return dx, dk, db


def conv2d_forward_loops(x, k, b):
    n, h, w, c = x.shape
    kh, kw, _, f = k.shape
    ho, wo = h - kh + 1, w - kw + 1
    out = np.empty((n, ho, wo, f))
    # filter index innermost: contiguous in both k and out, so it vectorises
    for i in range(n):
        for r in range(ho):
            for s in range(wo):
                for q in range(f):
                    out[i, r, s, q] = b[q]
                for u in range(kh):
                    for v in range(kw):
                        for ch in range(c):
                            xv = x[i, r + u, s + v, ch]
                            for q in range(f):
                                out[i, r, s, q] += xv * k[u, v, ch, q]
    return out


def conv2d_backward_loops(x, k, dout):
    n, h, w, c = x.shape
    kh, kw, _, f = k.shape
    ho, wo = dout.shape[1], dout.shape[2]
    dx = np.zeros_like(x)
    dk = np.zeros_like(k)
    db = np.zeros(f)
    for i in range(n):
        for r in range(ho):
            for s in range(wo):
                for q in range(f):
                    db[q] += dout[i, r, s, q]
                for u in range(kh):
                    for v in range(kw):
                        for ch in range(c):
                            xv = x[i, r + u, s + v, ch]
                            acc = 0.0
                            for q in range(f):
                                g = dout[i, r, s, q]
                                dk[u, v, ch, q] += g * xv
                                acc += g * k[u, v, ch, q]
                            dx[i, r + u, s + v, ch] += acc
    return dx, dk, db


# ---------------------------------------------------------------------------
# max pooling (truncating, non-overlapping)
# ---------------------------------------------------------------------------


def maxpool_forward_np(x, ph, pw):
    n, h, w, c = x.shape
    ho, wo = h // ph, w // pw
    blocks = x[:, : ho * ph, : wo * pw, :].reshape(n, ho, ph, wo, pw, c)
    blocks = blocks.transpose(0, 1, 3, 5, 2, 4).reshape(n, ho, wo, c, ph * pw)
    arg = blocks.argmax(axis=-1)  # first occurrence on ties
    out = np.take_along_axis(blocks, arg[..., None], axis=-1)[..., 0]
    return out, arg


def maxpool_backward_np(dout, arg, in_shape, ph, pw):
    n, h, w, c = in_shape
    ho, wo = dout.shape[1], dout.shape[2]
    onehot = np.zeros((n, ho, wo, c, ph * pw))
    np.put_along_axis(onehot, arg[..., None], dout[..., None], axis=-1)
    onehot = onehot.reshape(n, ho, wo, c, ph, pw).transpose(0, 1, 4, 2, 5, 3)
    dx = np.zeros(in_shape)
    dx[:, : ho * ph, : wo * pw, :] = onehot.reshape(n, ho * ph, wo * pw, c)
    return dx


def maxpool_forward_loops(x, ph, pw):
    n, h, w, c = x.shape
    ho, wo = h // ph, w // pw
    out = np.empty((n, ho, wo, c))
    arg = np.empty((n, ho, wo, c), dtype=np.int64)
    for i in range(n):
        for r in range(ho):
            for s in range(wo):
                for ch in range(c):
                    best = x[i, r * ph, s * pw, ch]
                    bi = 0
                    for u in range(ph):
                        for v in range(pw):
                            val = x[i, r * ph + u, s * pw + v, ch]
                            if val > best:
                                best = val
                                bi = u * pw + v
                    out[i, r, s, ch] = best
                    arg[i, r, s, ch] = bi
    return out, arg


def maxpool_backward_loops(dout, arg, in_shape, ph, pw):
    dx = np.zeros(in_shape)
    n, ho, wo, c = dout.shape
    for i in range(n):
        for r in range(ho):
            for s in range(wo):
                for ch in range(c):
                    a = arg[i, r, s, ch]
                    dx[i, r * ph + a // pw, s * pw + a % pw, ch] += dout[i, r, s, ch]
    return dx


# ---------------------------------------------------------------------------
# AR(1) recursion  y[t] = phi * y[t-1] + e[t]
# ---------------------------------------------------------------------------


def ar1_np(innov, phi, y0):
    y, _ = lfilter([1.0], [1.0, -phi], innov, zi=np.array([phi * y0]))
    return y


def ar1_loops(innov, phi, y0):
    out = np.empty_like(innov)
    prev = y0
    for t in range(innov.shape[0]):
        prev = phi * prev + innov[t]
        out[t] = prev
    return out


# ---------------------------------------------------------------------------
# Gini best split for a binary tree
# ---------------------------------------------------------------------------


def best_split_np(X, y, n_classes, min_leaf):
    """Return (feature, threshold, weighted_gini); feature -1 if no split.

    Ties resolve to the lowest feature index, then the lowest threshold.
    """
    n, d = X.shape
    best_f, best_t, best_g = -1, 0.0, np.inf
    if n < 2:
        return best_f, best_t, best_g
    onehot = np.eye(n_classes)[y]
    total = onehot.sum(axis=0)
    for j in range(d):
        order = np.argsort(X[:, j], kind="stable")
        xs = X[order, j]
        left = np.cumsum(onehot[order], axis=0)[:-1]  # left counts after i+1 points
        nl = np.arange(1, n, dtype=float)
        nr = n - nl
        right = total - left
        gl = 1.0 - ((left / nl[:, None]) ** 2).sum(axis=1)
        gr = 1.0 - ((right / nr[:, None]) ** 2).sum(axis=1)
        g = (nl * gl + nr * gr) / n
        ok = (xs[1:] > xs[:-1]) & (nl >= min_leaf) & (nr >= min_leaf)
        if not ok.any():
            continue
        g = np.where(ok, g, np.inf)
        i = int(np.argmin(g))
        if g[i] < best_g:
            best_f, best_g = j, float(g[i])
            best_t = 0.5 * (xs[i] + xs[i + 1])
    return best_f, best_t, best_g


def best_split_loops(X, y, n_classes, min_leaf):
    n, d = X.shape
    best_f, best_t, best_g = -1, 0.0, np.inf
    total = np.zeros(n_classes)
    for i in range(n):
        total[y[i]] += 1.0
    left = np.empty(n_classes)
    for j in range(d):
        order = np.argsort(X[:, j], kind="mergesort")
        left[:] = 0.0
        for i in range(n - 1):
            left[y[order[i]]] += 1.0
            nl = i + 1.0
            nr = n - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            a, b = X[order[i], j], X[order[i + 1], j]
            if not b > a:
                continue
            sl = 0.0
            sr = 0.0
            for q in range(n_classes):
                sl += (left[q] / nl) ** 2
                sr += ((total[q] - left[q]) / nr) ** 2
            g = (nl * (1.0 - sl) + nr * (1.0 - sr)) / n
            if g < best_g:
                best_f, best_g, best_t = j, g, 0.5 * (a + b)
    return best_f, best_t, best_g


# ---------------------------------------------------------------------------
# interval overlap pair counting for leakage audits
# ---------------------------------------------------------------------------


def pair_counts_np(tr_trial, tr_subj, tr_start, tr_end, te_trial, te_subj, te_start, te_end):
    """Count (overlap, same_trial, same_subject) over all train x test pairs.

    Trial and subject ids are integer-coded so equal codes mean equal ids.
    """
    same_trial = tr_trial[:, None] == te_trial[None, :]
    same_subj = tr_subj[:, None] == te_subj[None, :]
    inter = (tr_start[:, None] < te_end[None, :]) & (te_start[None, :] < tr_end[:, None])
    return (
        int((same_trial & inter).sum()),
        int(same_trial.sum()),
        int(same_subj.sum()),
    )


def pair_counts_loops(tr_trial, tr_subj, tr_start, tr_end, te_trial, te_subj, te_start, te_end):
    ov = 0
    st = 0
    ss = 0
    for i in range(tr_trial.shape[0]):
        for j in range(te_trial.shape[0]):
            if tr_subj[i] == te_subj[j]:
                ss += 1
            if tr_trial[i] == te_trial[j]:
                st += 1
                if tr_start[i] < te_end[j] and te_start[j] < tr_end[i]:
                    ov += 1
    return ov, st, ss


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------

_PAIRS = {
    "conv2d_forward": (conv2d_forward_loops, conv2d_forward_np),
    "conv2d_backward": (conv2d_backward_loops, conv2d_backward_np),
    "maxpool_forward": (maxpool_forward_loops, maxpool_forward_np),
    "maxpool_backward": (maxpool_backward_loops, maxpool_backward_np),
    "ar1": (ar1_loops, ar1_np),
    "best_split": (best_split_loops, best_split_np),
    "pair_counts": (pair_counts_loops, pair_counts_np),
}

COMPILED = {}
if NUMBA_ENABLED:
    COMPILED = {name: njit(loops) for name, (loops, _) in _PAIRS.items()}
NUMPY = {name: np_fn for name, (_, np_fn) in _PAIRS.items()}

_ACTIVE = COMPILED if NUMBA_ENABLED else NUMPY

conv2d_forward = _ACTIVE["conv2d_forward"]
conv2d_backward = _ACTIVE["conv2d_backward"]
maxpool_forward = _ACTIVE["maxpool_forward"]
maxpool_backward = _ACTIVE["maxpool_backward"]
ar1 = _ACTIVE["ar1"]
best_split = _ACTIVE["best_split"]
pair_counts = _ACTIVE["pair_counts"]
