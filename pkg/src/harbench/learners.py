"""Classical classifiers: Gini tree, softmax regression, MLP, bagging, soft voting.

Every learner returns a :class:`TrainedModel`; :func:`predict` gives labels
and posterior rows for any of them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .neuralnet import layers as L
from .neuralnet.network import NetSpec, TrainedNet, fit
from .neuralnet.optim import TrainConfig

MODEL_FORMAT_VERSION = 1
KINDS = ("tree", "logreg", "mlp", "bagging", "voting")


class SchemaMismatch(ValueError):
    pass


@dataclass
class TrainedModel:
    kind: str
    parameters: dict
    class_list: tuple
    train_schema: tuple[str, ...]


def _prepare(X, y, schema):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be 2-D")
    y = list(y)
    if X.shape[0] == 0 or len(y) == 0:
        raise ValueError("empty training set")
    if X.shape[0] != len(y):
        raise ValueError(f"{X.shape[0]} rows but {len(y)} labels")
    if not np.isfinite(X).all():
        raise ValueError("non-finite feature value")
    if schema is None:
        schema = tuple(f"f{i}" for i in range(X.shape[1]))
    schema = tuple(schema)
    if len(schema) != X.shape[1]:
        raise SchemaMismatch(f"schema has {len(schema)} names for {X.shape[1]} columns")
    return X, y, schema


def _encode(y, class_list):
    index = {c: i for i, c in enumerate(class_list)}
    return np.array([index[v] for v in y], dtype=np.int64)


# ---------------------------------------------------------------------------
# decision tree
# ---------------------------------------------------------------------------


def _grow(X, yi, n_classes, max_depth, min_leaf):
    feature, threshold, left, right, value = [], [], [], [], []

    def node(idx, depth):
        nid = len(feature)
        counts = np.bincount(yi[idx], minlength=n_classes).astype(float)
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(counts / counts.sum())
        pure = np.count_nonzero(counts) <= 1
        if pure or (max_depth is not None and depth >= max_depth) or len(idx) < 2 * min_leaf:
            return nid
        f, t, _ = kernels.best_split(np.ascontiguousarray(X[idx]), yi[idx], n_classes, min_leaf)
        if f < 0:
            return nid
        go_left = X[idx, f] <= t
        feature[nid] = int(f)
        threshold[nid] = float(t)
        left[nid] = node(idx[go_left], depth + 1)
        right[nid] = node(idx[~go_left], depth + 1)
        return nid

    node(np.arange(X.shape[0]), 0)
    return {
        "feature": np.array(feature, dtype=np.int64),
        "threshold": np.array(threshold),
        "left": np.array(left, dtype=np.int64),
        "right": np.array(right, dtype=np.int64),
        "value": np.array(value),
    }


def train_tree(X, y, max_depth=None, min_leaf=1, schema=None, class_list=None) -> TrainedModel:
    """Unpruned binary tree with greedy Gini splits at value midpoints.

    Every impure node is split if any valid threshold exists, even when the
    split does not lower impurity (so XOR-like data is separable).
    """
    X, y, schema = _prepare(X, y, schema)
    class_list = tuple(class_list) if class_list is not None else tuple(sorted(set(y)))
    yi = _encode(y, class_list)
    tree = _grow(X, yi, len(class_list), max_depth, max(1, int(min_leaf)))
    return TrainedModel("tree", tree, class_list, schema)


def _tree_leaves(tree, X):
    node = np.zeros(X.shape[0], dtype=np.int64)
    feat, thr, lft, rgt = tree["feature"], tree["threshold"], tree["left"], tree["right"]
    active = feat[node] >= 0
    while active.any():
        i = np.nonzero(active)[0]
        n = node[i]
        go_left = X[i, feat[n]] <= thr[n]
        node[i] = np.where(go_left, lft[n], rgt[n])
        active = feat[node] >= 0
    return node


def tree_depth(model: TrainedModel) -> int:
    t = model.parameters

    def depth(n):
        if t["feature"][n] < 0:
            return 0
        return 1 + max(depth(t["left"][n]), depth(t["right"][n]))

    return depth(0)


# ---------------------------------------------------------------------------
# softmax regression and MLP on the shared network engine
# ---------------------------------------------------------------------------


def _scaler(X):
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    return mean, std


def _train_net(kind, layers, X, y, schema, opt_cfg, full_batch):
    X, y, schema = _prepare(X, y, schema)
    class_list = tuple(sorted(set(y)))
    mean, std = _scaler(X)
    Z = (X - mean) / std
    spec = NetSpec((X.shape[1],), layers(len(class_list)), kind)
    cfg = opt_cfg or TrainConfig()
    if full_batch:
        cfg = replace(cfg, batch_size=X.shape[0], large_dataset=False)
    net = fit(spec, Z, y, cfg, class_list)
    return TrainedModel(kind, {"net": net, "mean": mean, "std": std}, class_list, schema)


def train_logreg(X, y, opt_cfg: TrainConfig | None = None, schema=None) -> TrainedModel:
    """Multinomial logistic regression, full-batch Adadelta on standardized inputs."""
    return _train_net("logreg", lambda c: [L.Dense(c), L.Softmax()], X, y, schema, opt_cfg, True)


def mlp_hidden_size(n_features: int) -> int:
    return max(16, 2 * n_features)


def train_mlp(X, y, hidden=None, opt_cfg: TrainConfig | None = None, schema=None) -> TrainedModel:
    """One tanh hidden layer, softmax output, mini-batch Adadelta with early stop."""
    d = np.asarray(X).shape[1]
    h = hidden or mlp_hidden_size(d)
    return _train_net(
        "mlp", lambda c: [L.Dense(h), L.Activation("tanh"), L.Dense(c), L.Softmax()], X, y, schema, opt_cfg, False
    )


# ---------------------------------------------------------------------------
# ensembles
# ---------------------------------------------------------------------------


def train_bagging(X, y, n_trees=10, seed=0, max_depth=None, min_leaf=1, schema=None) -> TrainedModel:
    """Bootstrap-aggregated trees; prediction is a majority vote."""
    X, y, schema = _prepare(X, y, schema)
    class_list = tuple(sorted(set(y)))
    rng = np.random.default_rng(seed)
    n = X.shape[0]
    trees, samples = [], []
    for _ in range(n_trees):
        idx = rng.integers(0, n, size=n)
        samples.append(idx)
        trees.append(train_tree(X[idx], [y[i] for i in idx], max_depth, min_leaf, schema, class_list))
    return TrainedModel("bagging", {"members": trees, "bootstrap": samples}, class_list, schema)


def train_voting(X, y, members=("mlp", "tree", "logreg"), opt_cfg: TrainConfig | None = None, schema=None) -> TrainedModel:
    """Members trained on identical data; prediction averages their posteriors."""
    X, y, schema = _prepare(X, y, schema)
    class_list = tuple(sorted(set(y)))
    trained = []
    for m in members:
        if m == "mlp":
            trained.append(train_mlp(X, y, opt_cfg=opt_cfg, schema=schema))
        elif m == "tree":
            trained.append(train_tree(X, y, schema=schema, class_list=class_list))
        elif m == "logreg":
            trained.append(train_logreg(X, y, opt_cfg=opt_cfg, schema=schema))
        else:
            raise ValueError(f"unknown voting member {m!r}")
    return TrainedModel("voting", {"members": trained, "names": tuple(members)}, class_list, schema)


def soft_vote(posteriors) -> tuple[int, np.ndarray]:
    """Index of the winning class and the averaged posterior row(s).

    ``posteriors`` is a sequence of equal-shape rows (or matrices); ties go
    to the lowest class index.
    """
    avg = np.mean(np.asarray(posteriors, dtype=np.float64), axis=0)
    return np.argmax(avg, axis=-1), avg


# ---------------------------------------------------------------------------
# prediction
# ---------------------------------------------------------------------------


def _aligned(model, class_list, prob):
    """Reorder/expand member posteriors into ``class_list`` order."""
    if tuple(model.class_list) == tuple(class_list):
        return prob
    out = np.zeros((prob.shape[0], len(class_list)))
    pos = {c: i for i, c in enumerate(class_list)}
    for j, c in enumerate(model.class_list):
        out[:, pos[c]] = prob[:, j]
    return out


def predict_proba(model: TrainedModel, X, schema=None) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be 2-D")
    if schema is not None and tuple(schema) != tuple(model.train_schema):
        raise SchemaMismatch("feature schema differs from the training schema")
    if X.shape[1] != len(model.train_schema):
        raise SchemaMismatch(f"{X.shape[1]} columns but model expects {len(model.train_schema)}")
    p = model.parameters
    if model.kind == "tree":
        return p["value"][_tree_leaves(p, X)]
    if model.kind in ("logreg", "mlp"):
        net: TrainedNet = p["net"]
        return net.predict_proba((X - p["mean"]) / p["std"])
    if model.kind == "bagging":
        votes = np.zeros((X.shape[0], len(model.class_list)))
        for t in p["members"]:
            pr = _aligned(t, model.class_list, predict_proba(t, X))
            votes[np.arange(X.shape[0]), pr.argmax(axis=1)] += 1.0
        return votes / len(p["members"])
    if model.kind == "voting":
        rows = [_aligned(m, model.class_list, predict_proba(m, X)) for m in p["members"]]
        return soft_vote(rows)[1]
    raise ValueError(f"unknown model kind {model.kind!r}")


def predict(model: TrainedModel, X, schema=None):
    """Labels (ties to the earliest class) and posterior rows."""
    prob = predict_proba(model, X, schema)
    idx = prob.argmax(axis=1)
    return [model.class_list[i] for i in idx], prob


# ---------------------------------------------------------------------------
# JSON serialization (test fixtures; not a stability guarantee)
# ---------------------------------------------------------------------------

_LAYER_TYPES = {cls.__name__: cls for cls in (L.Dense, L.Activation, L.Softmax)}


def _enc(obj):
    if isinstance(obj, TrainedModel):
        return {
            "__model__": True,
            "kind": obj.kind,
            "class_list": list(obj.class_list),
            "train_schema": list(obj.train_schema),
            "parameters": {k: _enc(v) for k, v in obj.parameters.items()},
        }
    if isinstance(obj, TrainedNet):
        return {
            "__net__": True,
            "input_shape": list(obj.spec.input_shape),
            "layers": [{"type": type(l).__name__, **l.__dict__} for l in obj.spec.layers],
            "params": [{k: _enc(v) for k, v in p.items()} for p in obj.params],
            "class_list": list(obj.class_list),
        }
    if isinstance(obj, np.ndarray):
        return {"__array__": obj.tolist(), "dtype": str(obj.dtype)}
    if isinstance(obj, (list, tuple)):
        return [_enc(v) for v in obj]
    return obj


def _dec(obj):
    if isinstance(obj, dict):
        if "__array__" in obj:
            return np.array(obj["__array__"], dtype=obj["dtype"])
        if obj.get("__model__"):
            return TrainedModel(
                obj["kind"],
                {k: _dec(v) for k, v in obj["parameters"].items()},
                tuple(obj["class_list"]),
                tuple(obj["train_schema"]),
            )
        if obj.get("__net__"):
            layers = [_LAYER_TYPES[d.pop("type")](**d) for d in (dict(x) for x in obj["layers"])]
            spec = NetSpec(tuple(obj["input_shape"]), tuple(layers))
            params = [{k: _dec(v) for k, v in p.items()} for p in obj["params"]]
            return TrainedNet(spec, params, tuple(obj["class_list"]))
        return {k: _dec(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_dec(v) for v in obj]
    return obj


def model_to_json(model: TrainedModel) -> str:
    return json.dumps({"version": MODEL_FORMAT_VERSION, "model": _enc(model)})


def model_from_json(text: str) -> TrainedModel:
    doc = json.loads(text)
    if doc.get("version") != MODEL_FORMAT_VERSION:
        raise ValueError(f"unsupported model format version {doc.get('version')}")
    return _dec(doc["model"])
