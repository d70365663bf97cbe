"""Feed-forward demand forecaster trained with plain mini-batch backpropagation."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .workload import DemandVector, FeatureVector

FORMAT_VERSION = 1
DEFAULT_LAYERS = (8, 32, 16, 3)


@dataclass(frozen=True)
class Normalization:
    x_mean: np.ndarray
    x_std: np.ndarray
    y_mean: np.ndarray
    y_std: np.ndarray

    @classmethod
    def fit(cls, X: np.ndarray, Y: np.ndarray) -> "Normalization":
        def stats(a):
            mu = a.mean(axis=0)
            sd = a.std(axis=0)
            sd = np.where(sd > 1e-12, sd, 1.0)
            return mu, sd
        xm, xs = stats(X)
        ym, ys = stats(Y)
        return cls(xm, xs, ym, ys)


@dataclass(frozen=True)
class NetworkParams:
    layer_sizes: Tuple[int, ...]
    weights: Tuple[np.ndarray, ...]  # W_l has shape (out_l, in_l)
    biases: Tuple[np.ndarray, ...]
    hidden_activation: str = "relu"
    output_activation: str = "linear"
    normalization: Optional[Normalization] = None

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.layer_sizes)
        object.__setattr__(self, "layer_sizes", sizes)
        if len(self.weights) != len(sizes) - 1 or len(self.biases) != len(sizes) - 1:
            raise ValueError("need one weight matrix and bias per layer transition")
        for l, (W, b) in enumerate(zip(self.weights, self.biases)):
            if W.shape != (sizes[l + 1], sizes[l]) or b.shape != (sizes[l + 1],):
                raise ValueError(f"layer {l}: shapes {W.shape}, {b.shape} do not match sizes")
            if not (np.all(np.isfinite(W)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {l}: non-finite parameters")

    @property
    def n_in(self) -> int:
        return self.layer_sizes[0]

    @property
    def n_out(self) -> int:
        return self.layer_sizes[-1]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.01
    epochs: int = 200
    batch_size: int = 16
    seed: int = 0
    normalize: bool = True

    def __post_init__(self):
        if not self.learning_rate >= 0:
            # zero is allowed as a no-op schedule
            raise ValueError("learning_rate must be >= 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


def init_params(layer_sizes: Sequence[int], seed: int) -> NetworkParams:
    """Glorot-uniform weights, zero biases."""
    sizes = [int(s) for s in layer_sizes]
    if len(sizes) < 2 or any(s < 1 for s in sizes):
        raise ValueError(f"invalid layer sizes {layer_sizes}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        s = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-s, s, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return NetworkParams(tuple(sizes), tuple(weights), tuple(biases))


def _as_matrix(x, n_in: int) -> np.ndarray:
    if isinstance(x, FeatureVector):
        x = x.values
    a = np.asarray(x, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.shape[-1] != n_in:
        raise ValueError(f"input has {a.shape[-1]} features, network expects {n_in}")
    return a


def _forward_cache(params: NetworkParams, X: np.ndarray):
    """Row-batch forward pass; returns output and the per-layer (input, pre-activation)."""
    cache = []
    a = X
    last = len(params.weights) - 1
    for l, (W, b) in enumerate(zip(params.weights, params.biases)):
        z = a @ W.T + b
        cache.append((a, z))
        a = z if l == last else np.maximum(z, 0.0)
    return a, cache


def forward_raw(params: NetworkParams, X) -> np.ndarray:
    """Unclamped network output in the network's own (possibly standardized) space."""
    out, _ = _forward_cache(params, _as_matrix(X, params.n_in))
    return out


def forward(params: NetworkParams, x) -> np.ndarray:
    out = forward_raw(params, x)
    out = np.maximum(out, 0.0)
    return out[0] if np.ndim(x) == 1 or isinstance(x, FeatureVector) else out


def _demand_array(ys) -> np.ndarray:
    return np.array([y.as_array() if isinstance(y, DemandVector) else np.asarray(y, dtype=float)
                     for y in ys], dtype=float)


def mse(predictions, actuals) -> float:
    """Mean over samples of the squared Euclidean error."""
    P = _demand_array(predictions) if not isinstance(predictions, np.ndarray) else predictions
    A = _demand_array(actuals) if not isinstance(actuals, np.ndarray) else actuals
    if len(P) == 0 or P.shape != A.shape:
        raise ValueError(f"mse needs equal non-empty shapes, got {P.shape} and {A.shape}")
    return float(np.mean(np.sum((P - A) ** 2, axis=1)))


def _split_batch(batch, n_in: int):
    X = np.array([_as_matrix(x, n_in)[0] for x, _ in batch])
    Y = _demand_array([y for _, y in batch])
    return X, Y


def _grads_arrays(params: NetworkParams, X: np.ndarray, Y: np.ndarray):
    out, cache = _forward_cache(params, X)
    if Y.shape != out.shape:
        raise ValueError(f"targets have shape {Y.shape}, network produces {out.shape}")
    T = X.shape[0]
    delta = 2.0 * (out - Y) / T
    grads = [None] * len(params.weights)
    for l in range(len(params.weights) - 1, -1, -1):
        a_in, z = cache[l]
        if l != len(params.weights) - 1:
            delta = delta * (z > 0)
        grads[l] = (delta.T @ a_in, delta.sum(axis=0))
        delta = delta @ params.weights[l]
    return grads


def backprop_grads(params: NetworkParams, batch) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Exact gradients of the batch MSE, one (dW, db) pair per layer.

    ``batch`` is a sequence of (features, target) pairs; targets may be
    DemandVectors or arrays of the network's output width.
    """
    if len(batch) == 0:
        raise ValueError("empty batch")
    X, Y = _split_batch(batch, params.n_in)
    return _grads_arrays(params, X, Y)


def _sgd_step(params: NetworkParams, grads, lr: float) -> NetworkParams:
    W = tuple(w - lr * g[0] for w, g in zip(params.weights, grads))
    b = tuple(v - lr * g[1] for v, g in zip(params.biases, grads))
    return replace(params, weights=W, biases=b)


def predict_array(params: NetworkParams, X) -> np.ndarray:
    """Batched prediction in target units: normalize, forward, invert, clamp."""
    X = _as_matrix(X, params.n_in)
    norm = params.normalization
    if norm is not None:
        X = (X - norm.x_mean) / norm.x_std
    out = forward_raw(params, X)
    if norm is not None:
        out = out * norm.y_std + norm.y_mean
    return np.maximum(out, 0.0)


def predict_demand(params: NetworkParams, features) -> DemandVector:
    out = predict_array(params, features)[0]
    if out.shape[0] < 3:
        raise ValueError("network must produce at least 3 outputs to form a demand vector")
    return DemandVector(float(out[0]), float(out[1]), float(out[2]))


def dataset_arrays(dataset) -> Tuple[np.ndarray, np.ndarray]:
    X = np.array([x.as_array() if isinstance(x, FeatureVector) else np.asarray(x, float)
                  for x, _ in dataset])
    Y = _demand_array([y for _, y in dataset])
    return X, Y


def dataset_mse(params: NetworkParams, dataset) -> float:
    X, Y = dataset_arrays(dataset)
    P = predict_array(params, X)[:, :Y.shape[1]]
    return mse(P, Y)


def train(params: NetworkParams, dataset, cfg: TrainConfig):
    """Mini-batch gradient descent; returns (trained params, per-epoch dataset MSE).

    Losses are measured the way predictions are served: in target units,
    after de-standardization and the non-negativity clamp.
    """
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    X, Y = dataset_arrays(dataset)
    if cfg.normalize:
        norm = Normalization.fit(X, Y)
        Xn = (X - norm.x_mean) / norm.x_std
        Yn = (Y - norm.y_mean) / norm.y_std
    else:
        norm = None
        Xn, Yn = X, Y
    params = replace(params, normalization=norm)
    rng = np.random.default_rng(cfg.seed)
    n = len(X)
    history = []
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            idx = order[start:start + cfg.batch_size]
            grads = _grads_arrays(params, Xn[idx], Yn[idx])
            params = _sgd_step(params, grads, cfg.learning_rate)
        history.append(mse(predict_array(params, X)[:, :Y.shape[1]], Y))
    return params, history


def gradient_check(params: NetworkParams, X: np.ndarray, Y: np.ndarray,
                   step: float = 1e-5) -> float:
    """Max elementwise relative error of backprop against central differences."""
    analytic = _grads_arrays(params, X, Y)

    def loss(p):
        return mse(forward_raw(p, X), Y)

    worst = 0.0
    for l in range(len(params.weights)):
        for kind in (0, 1):
            base = params.weights[l] if kind == 0 else params.biases[l]
            for idx in np.ndindex(base.shape):
                plus, minus = base.copy(), base.copy()
                plus[idx] += step
                minus[idx] -= step

                def swap(arr):
                    if kind == 0:
                        ws = list(params.weights)
                        ws[l] = arr
                        return replace(params, weights=tuple(ws))
                    bs = list(params.biases)
                    bs[l] = arr
                    return replace(params, biases=tuple(bs))

                numeric = (loss(swap(plus)) - loss(swap(minus))) / (2 * step)
                a = analytic[l][kind][idx]
                denom = max(abs(a), abs(numeric), 1e-8)
                worst = max(worst, abs(a - numeric) / denom)
    return worst


def min_abs_preactivation(params: NetworkParams, X: np.ndarray) -> float:
    _, cache = _forward_cache(params, X)
    hidden = [z for _, z in cache[:-1]]
    return min((float(np.min(np.abs(z))) for z in hidden), default=np.inf)


def save_params(params: NetworkParams, path) -> None:
    doc = {
        "format_version": FORMAT_VERSION,
        "layer_sizes": list(params.layer_sizes),
        "hidden_activation": params.hidden_activation,
        "output_activation": params.output_activation,
        "weights": [W.tolist() for W in params.weights],
        "biases": [b.tolist() for b in params.biases],
        "normalization": None if params.normalization is None else {
            k: getattr(params.normalization, k).tolist()
            for k in ("x_mean", "x_std", "y_mean", "y_std")},
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_params(path) -> NetworkParams:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported model format_version {doc.get('format_version')!r}")
    norm = doc.get("normalization")
    return NetworkParams(
        tuple(doc["layer_sizes"]),
        tuple(np.array(W, dtype=float).reshape(o, i) for W, o, i in
              zip(doc["weights"], doc["layer_sizes"][1:], doc["layer_sizes"][:-1])),
        tuple(np.array(b, dtype=float) for b in doc["biases"]),
        doc.get("hidden_activation", "relu"),
        doc.get("output_activation", "linear"),
        None if norm is None else Normalization(**{k: np.array(v, dtype=float) for k, v in norm.items()}),
    )


def linear_demand_dataset(n_samples: int = 256, seed: int = 0, n_in: int = 8, n_out: int = 3):
    """Features in [0, 1) mapped through a fixed non-negative matrix: demand = A @ x."""
    rng = np.random.default_rng(seed)
    A = rng.uniform(0.0, 2.0, size=(n_out, n_in))
    X = rng.uniform(0.0, 1.0, size=(n_samples, n_in))
    return [(FeatureVector(tuple(x), t), DemandVector(*(A @ x))) for t, x in enumerate(X)], A
