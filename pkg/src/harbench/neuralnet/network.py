"""Network specs, parameter containers, training and gradient checking."""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from .layers import Activation, MaxPool, ShapeError, Softmax, softmax_cross_entropy
from .optim import AdadeltaState, TrainConfig, adadelta_step


class TrainingDivergence(RuntimeError):
    pass


@dataclass(frozen=True)
class NetSpec:
    """Ordered layers on an ``(H, W, C)`` input; the last layer is Softmax."""

    input_shape: tuple[int, ...]
    layers: tuple
    name: str = "net"

    def __post_init__(self):
        object.__setattr__(self, "input_shape", tuple(int(v) for v in self.input_shape))
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers or not isinstance(self.layers[-1], Softmax):
            raise ShapeError("a network must end with a softmax layer")
        self.shapes()

    def shapes(self) -> list[tuple[int, ...]]:
        """Shape after every layer, starting with the input; rejects non-positive sizes."""
        s = self.input_shape
        if any(v < 1 for v in s):
            raise ShapeError(f"{self.name}: non-positive input shape {s}")
        out = [s]
        for i, layer in enumerate(self.layers):
            s = layer.out_shape(s)
            if any(v < 1 for v in s):
                raise ShapeError(f"{self.name}: layer {i} ({type(layer).__name__}) output shape {s} collapses")
            out.append(s)
        return out

    @property
    def n_outputs(self) -> int:
        return self.shapes()[-1][0]


def init_params(spec: NetSpec, seed: int) -> list[dict]:
    rng = np.random.default_rng(seed)
    shapes = spec.shapes()
    return [layer.init(s, rng) for layer, s in zip(spec.layers, shapes[:-1])]


def _flat(params: list[dict]) -> dict:
    return {f"{i}.{k}": v for i, p in enumerate(params) for k, v in p.items()}


def _reshape_input(spec, x):
    x = np.asarray(x, dtype=np.float64)
    if len(spec.input_shape) == 3 and x.ndim == 3:
        x = x[..., None]
    if x.shape[1:] != spec.input_shape:
        raise ShapeError(f"{spec.name}: input shape {x.shape[1:]} != {spec.input_shape}")
    return x


def logits_and_caches(spec: NetSpec, params, x):
    caches = []
    for layer, p in zip(spec.layers[:-1], params[:-1]):
        x, c = layer.forward(p, x)
        caches.append(c)
    return x, caches


def predict_proba(spec: NetSpec, params, x, batch_size: int = 1000) -> np.ndarray:
    x = _reshape_input(spec, x)
    out = []
    for i in range(0, x.shape[0], batch_size):
        z, _ = logits_and_caches(spec, params, x[i : i + batch_size])
        out.append(spec.layers[-1].forward({}, z)[0])
    return np.concatenate(out) if out else np.empty((0, spec.n_outputs))


def loss_and_grads(spec: NetSpec, params, x, y):
    """Mean softmax cross-entropy and its gradient for every parameter."""
    z, caches = logits_and_caches(spec, params, x)
    loss, d, _ = softmax_cross_entropy(z, y)
    grads = [None] * len(params)
    grads[-1] = {}
    for i in range(len(spec.layers) - 2, -1, -1):
        d, g = spec.layers[i].backward(params[i], caches[i], d)
        grads[i] = g
    return loss, grads


def _branch_pattern(spec, caches):
    """Which branch every ReLU and max-pool took; central differences are
    only valid when a perturbation leaves this unchanged."""
    out = []
    for layer, c in zip(spec.layers, caches):
        if isinstance(layer, MaxPool):
            out.append(c[0])
        elif isinstance(layer, Activation) and layer.fn == "relu":
            out.append(c)
    return out


def _same_pattern(a, b) -> bool:
    return all(np.array_equal(u, v) for u, v in zip(a, b))


def grad_check(
    spec: NetSpec, x, y=None, eps: float = 1e-4, seed: int = 0, params=None, floor: float = 1e-6, min_eps: float = 1e-8
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Relative error is ``|a - n| / max(|a|, |n|, floor)``; ``floor`` keeps
    parameters with vanishing gradient from dividing round-off by ~0.

    ReLU and max-pool are piecewise smooth. When a +-eps nudge flips a ReLU
    or changes a pooling winner the difference quotient straddles a kink and
    says nothing about the gradient, so the step is shrunk by 10x until both
    sides keep the unperturbed branch pattern (down to ``min_eps``; past
    that the coordinate is scored at the smallest step anyway).
    """
    x = _reshape_input(spec, x)
    rng = np.random.default_rng(seed)
    if params is None:
        params = init_params(spec, seed)
    if y is None:
        y = rng.integers(0, spec.n_outputs, size=x.shape[0])
    z0, caches0 = logits_and_caches(spec, params, x)
    _, grads = loss_and_grads(spec, params, x, y)
    base = _branch_pattern(spec, caches0)

    def loss_at(flat, j, value):
        old = flat[j]
        flat[j] = value
        z, caches = logits_and_caches(spec, params, x)
        flat[j] = old
        return softmax_cross_entropy(z, y)[0], _branch_pattern(spec, caches)

    worst = 0.0
    for p, g in zip(params, grads):
        for k, arr in p.items():
            flat = arr.reshape(-1)
            gflat = g[k].reshape(-1)
            for j in range(flat.size):
                h = eps
                while True:
                    lp, pp = loss_at(flat, j, flat[j] + h)
                    lm, pm = loss_at(flat, j, flat[j] - h)
                    if (_same_pattern(pp, base) and _same_pattern(pm, base)) or h / 10 < min_eps:
                        break
                    h /= 10
                num = (lp - lm) / (2 * h)
                den = max(abs(num), abs(gflat[j]), floor)
                worst = max(worst, abs(num - gflat[j]) / den)
    return worst


@dataclass
class TrainedNet:
    spec: NetSpec
    params: list
    class_list: tuple
    log: list = field(default_factory=list)

    def predict_proba(self, x) -> np.ndarray:
        return predict_proba(self.spec, self.params, x)

    def predict(self, x):
        prob = self.predict_proba(x)
        idx = prob.argmax(axis=1)
        return [self.class_list[i] for i in idx], prob

    def write_log(self, path) -> None:
        with open(path, "w") as fh:
            for rec in self.log:
                fh.write(json.dumps(rec) + "\n")


def fit(spec: NetSpec, x, y, config: TrainConfig = TrainConfig(), class_list=None) -> TrainedNet:
    """Mini-batch Adadelta training with early stop on mean epoch loss.

    ``y`` holds labels; ``class_list`` fixes the output order (default:
    sorted unique labels, which must number ``spec.n_outputs`` or fewer).
    """
    x = _reshape_input(spec, x)
    if x.shape[0] == 0:
        raise ValueError("empty training set")
    class_list = tuple(class_list) if class_list is not None else tuple(sorted(set(y)))
    if len(class_list) > spec.n_outputs:
        raise ShapeError(f"{len(class_list)} classes but {spec.n_outputs} outputs")
    index = {c: i for i, c in enumerate(class_list)}
    yi = np.array([index[v] for v in y], dtype=np.int64)
    params = init_params(spec, config.seed)
    flat = _flat(params)
    state = AdadeltaState(flat)
    rng = np.random.default_rng([config.seed, 1])
    bs = config.effective_batch_size
    n = x.shape[0]
    log = []
    t0 = time.perf_counter()
    for epoch in range(config.max_epochs):
        order = rng.permutation(n)
        total = 0.0
        for i in range(0, n, bs):
            idx = order[i : i + bs]
            loss, grads = loss_and_grads(spec, params, x[idx], yi[idx])
            if not np.isfinite(loss):
                raise TrainingDivergence(f"{spec.name}: non-finite loss at epoch {epoch}")
            total += loss * len(idx)
            adadelta_step(flat, _flat(grads), state, config.rho, config.eps, config.lr)
        mean_loss = total / n
        log.append({"epoch": epoch, "loss": mean_loss, "wall_time": time.perf_counter() - t0})
        if mean_loss <= config.stop_loss:
            break
    return TrainedNet(spec, params, class_list, log)
