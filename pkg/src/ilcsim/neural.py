"""Small fully connected network mapping reference (position, velocity)
samples to the nonlinear part of the learned effort, trained with Adam on
mean squared error. Implemented directly on numpy arrays; training is
single-threaded and bit-reproducible for a fixed seed.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import NormalizationError
from .signals import ReferenceCommand, SampleSpec, Signal, generate_reference

HIDDEN_SIZES = (8, 16, 8)
MODEL_FORMAT_MAGIC = b"ILCSIM-MLP"
MODEL_FORMAT_VERSION = 1


def _frozen(arrs):
    out = []
    for a in arrs:
        a = np.array(a, dtype=float)
        a.flags.writeable = False
        out.append(a)
    return tuple(out)


@dataclass(frozen=True)
class MlpModel:
    """Weights, biases and the input normalizer of the effort estimator.

    Architecture is fixed at 2 -> 8 -> 16 -> 8 -> 1 with ReLU on the hidden
    layers (the third hidden layer's activation is switchable to linear) and
    a linear output. Inputs are z-scored with statistics frozen at training
    time so inference is self-contained.
    """

    weights: tuple
    biases: tuple
    norm_mean: np.ndarray
    norm_std: np.ndarray
    hidden3_relu: bool = True

    def __post_init__(self):
        object.__setattr__(self, "weights", _frozen(self.weights))
        object.__setattr__(self, "biases", _frozen(self.biases))
        mean, std = _frozen([self.norm_mean, self.norm_std])
        if np.any(std <= 0):
            raise ValueError("normalizer standard deviations must be positive")
        object.__setattr__(self, "norm_mean", mean)
        object.__setattr__(self, "norm_std", std)
        sizes = self.layer_sizes
        if sizes != (2, *HIDDEN_SIZES, 1):
            raise ValueError(f"unsupported layer sizes {sizes}")

    @property
    def layer_sizes(self) -> tuple:
        return (self.weights[0].shape[0],
                *(w.shape[1] for w in self.weights))

    @classmethod
    def initialize(cls, seed: int, hidden3_relu: bool = True) -> "MlpModel":
        """Seeded He-uniform weights, zero biases, identity normalizer."""
        rng = np.random.default_rng(seed)
        sizes = (2, *HIDDEN_SIZES, 1)
        weights, biases = [], []
        for nin, nout in zip(sizes[:-1], sizes[1:]):
            lim = math.sqrt(6.0 / nin)
            weights.append(rng.uniform(-lim, lim, size=(nin, nout)))
            biases.append(np.zeros(nout))
        return cls(weights=tuple(weights), biases=tuple(biases),
                   norm_mean=np.zeros(2), norm_std=np.ones(2),
                   hidden3_relu=hidden3_relu)


@dataclass(frozen=True)
class TrainingSet:
    """Per-sample rows: features (reference position, reference velocity),
    targets (nonlinear effort, volts)."""

    features: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        f = np.array(self.features, dtype=float)
        t = np.array(self.targets, dtype=float).reshape(-1)
        if f.ndim != 2 or f.shape[1] != 2:
            raise ValueError(f"features must be n x 2, got {f.shape}")
        if len(f) != len(t):
            raise ValueError("feature and target row counts differ")
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(t))):
            raise ValueError("training data contains non-finite values")
        f.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "features", f)
        object.__setattr__(self, "targets", t)

    def __len__(self) -> int:
        return len(self.targets)


@dataclass(frozen=True)
class TrainSpec:
    epochs: int = 100
    batch_size: int = 128
    shuffle_seed: int = 0

    def __post_init__(self):
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


@dataclass(frozen=True)
class AdamState:
    """First/second moment accumulators plus the shared step counter."""

    m_w: tuple
    v_w: tuple
    m_b: tuple
    v_b: tuple
    t: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8

    @classmethod
    def for_model(cls, model: MlpModel, lr: float = 1e-3, beta1: float = 0.9,
                  beta2: float = 0.999, epsilon: float = 1e-8) -> "AdamState":
        return cls(m_w=tuple(np.zeros_like(w) for w in model.weights),
                   v_w=tuple(np.zeros_like(w) for w in model.weights),
                   m_b=tuple(np.zeros_like(b) for b in model.biases),
                   v_b=tuple(np.zeros_like(b) for b in model.biases),
                   t=0, lr=lr, beta1=beta1, beta2=beta2, epsilon=epsilon)


def _hidden_act(model: MlpModel, layer: int, z: np.ndarray) -> np.ndarray:
    if layer == 2 and not model.hidden3_relu:
        return z
    return np.maximum(z, 0.0)


def _forward_cached(model: MlpModel, X: np.ndarray):
    """Activations and pre-activations for every layer, batch input."""
    h = (X - model.norm_mean) / model.norm_std
    acts = [h]
    pres = []
    for li in range(len(model.weights) - 1):
        z = h @ model.weights[li] + model.biases[li]
        pres.append(z)
        h = _hidden_act(model, li, z)
        acts.append(h)
    out = h @ model.weights[-1] + model.biases[-1]
    return acts, pres, out.ravel()


def mlp_forward_batch(model: MlpModel, X: np.ndarray) -> np.ndarray:
    """Network output for an n x 2 batch of raw (unnormalized) inputs."""
    _, _, out = _forward_cached(model, np.asarray(X, dtype=float))
    return out


def mlp_forward(model: MlpModel, x) -> float:
    """Scalar effort prediction for one (position, velocity) input."""
    return float(mlp_forward_batch(model, np.asarray(x, dtype=float).reshape(1, 2))[0])


def mlp_gradients(model: MlpModel, batch: TrainingSet):
    """Exact gradients of batch-mean squared error for every parameter.

    Returns (weight grads, bias grads, batch loss).
    """
    if len(batch) == 0:
        raise ValueError("batch must be non-empty")
    X, y = batch.features, batch.targets
    acts, pres, out = _forward_cached(model, X)
    m = len(y)
    delta = (2.0 / m) * (out - y)[:, None]
    n_layers = len(model.weights)
    g_w = [None] * n_layers
    g_b = [None] * n_layers
    g_w[-1] = acts[-1].T @ delta
    g_b[-1] = delta.sum(axis=0)
    d = delta @ model.weights[-1].T
    for li in range(n_layers - 2, -1, -1):
        if li == 2 and not model.hidden3_relu:
            pass
        else:
            d = d * (pres[li] > 0.0)
        g_w[li] = acts[li].T @ d
        g_b[li] = d.sum(axis=0)
        if li > 0:
            d = d @ model.weights[li].T
    loss = float(np.mean((out - y) ** 2))
    return g_w, g_b, loss


def adam_step(opt: AdamState, model: MlpModel, g_w, g_b):
    """One bias-corrected Adam update. Returns (new model, new optimizer)."""
    t = opt.t + 1
    c1 = 1.0 - opt.beta1 ** t
    c2 = 1.0 - opt.beta2 ** t
    new_w, new_b = [], []
    m_w, v_w, m_b, v_b = [], [], [], []
    for li in range(len(model.weights)):
        mw = opt.beta1 * opt.m_w[li] + (1 - opt.beta1) * g_w[li]
        vw = opt.beta2 * opt.v_w[li] + (1 - opt.beta2) * g_w[li] ** 2
        mb = opt.beta1 * opt.m_b[li] + (1 - opt.beta1) * g_b[li]
        vb = opt.beta2 * opt.v_b[li] + (1 - opt.beta2) * g_b[li] ** 2
        new_w.append(model.weights[li] - opt.lr * (mw / c1) / (np.sqrt(vw / c2) + opt.epsilon))
        new_b.append(model.biases[li] - opt.lr * (mb / c1) / (np.sqrt(vb / c2) + opt.epsilon))
        m_w.append(mw); v_w.append(vw); m_b.append(mb); v_b.append(vb)
    model = replace(model, weights=tuple(new_w), biases=tuple(new_b))
    opt = replace(opt, m_w=tuple(m_w), v_w=tuple(v_w), m_b=tuple(m_b),
                  v_b=tuple(v_b), t=t)
    return model, opt


def fit(model: MlpModel, data: TrainingSet, spec: TrainSpec,
        opt: AdamState | None = None):
    """Mini-batch Adam training with per-epoch shuffling.

    The z-score normalizer is fit on the training features and stored in the
    returned model. Returns (trained model, per-epoch mean batch loss).
    """
    if len(data) == 0:
        raise ValueError("training set is empty")
    mean = data.features.mean(axis=0)
    std = data.features.std(axis=0)
    for idx, s in enumerate(std):
        if s <= 0:
            raise NormalizationError(
                f"feature {idx} has zero variance; cannot normalize")
    model = replace(model, norm_mean=mean, norm_std=std)
    if opt is None:
        opt = AdamState.for_model(model)
    rng = np.random.default_rng(spec.shuffle_seed)
    losses = []
    m = len(data)
    for _ in range(spec.epochs):
        order = rng.permutation(m)
        total = 0.0
        batches = 0
        for s in range(0, m, spec.batch_size):
            sel = order[s:s + spec.batch_size]
            batch = TrainingSet(features=data.features[sel],
                                targets=data.targets[sel])
            g_w, g_b, loss = mlp_gradients(model, batch)
            model, opt = adam_step(opt, model, g_w, g_b)
            total += loss
            batches += 1
        losses.append(total / batches)
    return model, losses


def predict_effort_series(model: MlpModel, cmd: ReferenceCommand,
                          spec: SampleSpec) -> Signal:
    """Predicted nonlinear effort along a reference trajectory."""
    pos, vel = generate_reference(cmd, spec)
    X = np.column_stack([pos.samples, vel.samples])
    return Signal(spec, mlp_forward_batch(model, X))


def output_bound(model: MlpModel, n_std: float = 3.0) -> float:
    """Worst-case |output| over inputs within n_std of the training
    distribution, from layer operator norms (ReLU is 1-Lipschitz and maps 0
    near 0, so |h_{l+1}| <= |W_l||h_l| + |b_l|)."""
    radius = n_std * math.sqrt(len(model.norm_mean))
    for w, b in zip(model.weights, model.biases):
        radius = float(np.linalg.norm(w, 2)) * radius + float(np.linalg.norm(b))
    return radius


def save_model(model: MlpModel, path) -> None:
    """Flat versioned binary: one JSON header line, then raw float64 data."""
    header = {
        "format": MODEL_FORMAT_MAGIC.decode(),
        "version": MODEL_FORMAT_VERSION,
        "layer_sizes": list(model.layer_sizes),
        "hidden3_relu": model.hidden3_relu,
        "arrays": [],
    }
    arrays = []
    for name, arr in _named_arrays(model):
        header["arrays"].append({"name": name, "shape": list(arr.shape)})
        arrays.append(np.ascontiguousarray(arr, dtype="<f8"))
    blob = json.dumps(header, sort_keys=True).encode() + b"\n"
    with open(path, "wb") as fh:
        fh.write(blob)
        for arr in arrays:
            fh.write(arr.tobytes())


def load_model(path) -> MlpModel:
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode())
        if header.get("format") != MODEL_FORMAT_MAGIC.decode():
            raise ValueError(f"{path} is not a model file")
        if header.get("version") != MODEL_FORMAT_VERSION:
            raise ValueError(f"unsupported model format version {header.get('version')}")
        data = {}
        for meta in header["arrays"]:
            shape = tuple(meta["shape"])
            count = int(np.prod(shape)) if shape else 1
            raw = fh.read(8 * count)
            if len(raw) != 8 * count:
                raise ValueError(f"truncated model file {path}")
            data[meta["name"]] = np.frombuffer(raw, dtype="<f8").reshape(shape)
    n_layers = len(header["layer_sizes"]) - 1
    return MlpModel(
        weights=tuple(data[f"w{i}"] for i in range(n_layers)),
        biases=tuple(data[f"b{i}"] for i in range(n_layers)),
        norm_mean=data["norm_mean"],
        norm_std=data["norm_std"],
        hidden3_relu=bool(header["hidden3_relu"]),
    )


def _named_arrays(model: MlpModel):
    for i, w in enumerate(model.weights):
        yield f"w{i}", w
    for i, b in enumerate(model.biases):
        yield f"b{i}", b
    yield "norm_mean", model.norm_mean
    yield "norm_std", model.norm_std
