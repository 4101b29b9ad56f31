"""Evidence MLPs with hand-written backprop.

Each net is affine layers with ReLU between them and a softplus head, so the
output is nonnegative evidence. The "features" of a net are the activations
feeding the head (the input itself when there are no hidden layers). The
multi-view model adds a pseudo-view net that reads the concatenated features
of all view nets.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .dirichlet import DimensionError


@dataclass(frozen=True)
class MlpConfig:
    input_dim: int
    hidden_dims: tuple[int, ...] = ()
    num_classes: int = 2
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden_dims", tuple(int(h) for h in self.hidden_dims))
        if self.input_dim < 1 or any(h < 1 for h in self.hidden_dims):
            raise ValueError(f"layer sizes must be >= 1: {self}")
        if self.num_classes < 2:
            raise ValueError(f"num_classes must be >= 2, got {self.num_classes}")

    @property
    def layer_sizes(self) -> list[int]:
        return [self.input_dim, *self.hidden_dims, self.num_classes]

    @property
    def feature_dim(self) -> int:
        return self.hidden_dims[-1] if self.hidden_dims else self.input_dim


def softplus(z):
    return np.logaddexp(0.0, z)


def sigmoid(z):
    return np.exp(-np.logaddexp(0.0, -z))


@dataclass
class ModelParams:
    """Per-layer weights ``(in, out)`` and biases ``(out,)``."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def arrays(self) -> list[np.ndarray]:
        """Parameters in stable order: W0, b0, W1, b1, ..."""
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays()])

    def with_flat(self, vec) -> "ModelParams":
        vec = np.asarray(vec, dtype=float)
        if vec.size != self.size:
            raise DimensionError(f"flat vector has {vec.size} entries, expected {self.size}")
        arrays, pos = [], 0
        for a in self.arrays():
            arrays.append(vec[pos:pos + a.size].reshape(a.shape).copy())
            pos += a.size
        return ModelParams(arrays[0::2], arrays[1::2])

    @property
    def size(self) -> int:
        return sum(a.size for a in self.arrays())

    def copy(self) -> "ModelParams":
        return ModelParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])


def init(config: MlpConfig) -> ModelParams:
    """He-scaled normal weights, zero biases, seeded."""
    rng = np.random.default_rng(config.seed)
    sizes = config.layer_sizes
    weights, biases = [], []
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / n_in), size=(n_in, n_out)))
        biases.append(np.zeros(n_out))
    return ModelParams(weights, biases)


@dataclass
class Cache:
    inputs: list[np.ndarray]  # input to each affine layer
    pre: list[np.ndarray]  # pre-activation of each layer
    n_layers: int


def forward_evidence(params: ModelParams, x):
    """Evidence, features and backprop cache for a batch ``x`` of shape (n, d).

    A 1-D ``x`` is treated as a single row and 1-D outputs are returned.
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != params.weights[0].shape[0]:
        raise DimensionError(f"input has {x.shape[1]} features, net expects {params.weights[0].shape[0]}")
    h = x
    inputs, pre = [], []
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        inputs.append(h)
        z = h @ w + b
        pre.append(z)
        h = np.maximum(z, 0.0) if i < last else softplus(z)
    features = inputs[-1]
    cache = Cache(inputs, pre, len(params.weights))
    if single:
        return h[0], features[0], cache
    return h, features, cache


def backward(params: ModelParams, cache: Cache, grad_evidence, grad_features=None):
    """Backprop through the net.

    ``grad_features`` is an optional upstream gradient on the feature output
    (used when the features feed the pseudo-view net). Returns the parameter
    gradients as a :class:`ModelParams` and the gradient w.r.t. the input.
    """
    if cache.n_layers != len(params.weights):
        raise ValueError("cache does not belong to these params")
    g = np.asarray(grad_evidence, dtype=float)
    if g.ndim == 1:
        g = g[None, :]
    if g.shape != cache.pre[-1].shape:
        raise ValueError(f"grad_evidence shape {g.shape} does not match forward output {cache.pre[-1].shape}")
    gw = [None] * cache.n_layers
    gb = [None] * cache.n_layers
    g = g * sigmoid(cache.pre[-1])
    for i in range(cache.n_layers - 1, -1, -1):
        gw[i] = cache.inputs[i].T @ g
        gb[i] = g.sum(axis=0)
        g = g @ params.weights[i].T
        if i == cache.n_layers - 1 and grad_features is not None:
            gf = np.asarray(grad_features, dtype=float)
            g = g + (gf[None, :] if gf.ndim == 1 else gf)
        if i > 0:
            g = g * (cache.pre[i - 1] > 0.0)
    return ModelParams(gw, gb), g


@dataclass
class MultiViewModel:
    view_configs: list[MlpConfig]
    view_nets: list[ModelParams]
    pseudo_config: MlpConfig | None = None
    pseudo_net: ModelParams | None = None

    @property
    def num_views(self) -> int:
        return len(self.view_nets)

    @property
    def use_pseudo(self) -> bool:
        return self.pseudo_net is not None

    def parameter_arrays(self) -> list[np.ndarray]:
        out = [a for p in self.view_nets for a in p.arrays()]
        if self.pseudo_net is not None:
            out += self.pseudo_net.arrays()
        return out

    def copy(self) -> "MultiViewModel":
        return MultiViewModel(
            list(self.view_configs),
            [p.copy() for p in self.view_nets],
            self.pseudo_config,
            None if self.pseudo_net is None else self.pseudo_net.copy(),
        )

    def to_json(self) -> dict:
        return {
            "format": "hdmvl-checkpoint/1",
            "views": [
                {"config": asdict(c), "params": p.flat().tolist()}
                for c, p in zip(self.view_configs, self.view_nets)
            ],
            "pseudo": None if self.pseudo_net is None else {
                "config": asdict(self.pseudo_config),
                "params": self.pseudo_net.flat().tolist(),
            },
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MultiViewModel":
        configs, nets = [], []
        for v in obj["views"]:
            c = MlpConfig(**v["config"])
            configs.append(c)
            nets.append(init(c).with_flat(v["params"]))
        pc = pn = None
        if obj.get("pseudo"):
            pc = MlpConfig(**obj["pseudo"]["config"])
            pn = init(pc).with_flat(obj["pseudo"]["params"])
        return cls(configs, nets, pc, pn)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> "MultiViewModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def build_model(view_configs: Sequence[MlpConfig], pseudo_hidden: Sequence[int] | None = (),
                pseudo_seed: int | None = None) -> MultiViewModel:
    """Initialize view nets and (unless ``pseudo_hidden`` is None) a pseudo net."""
    view_configs = list(view_configs)
    ks = {c.num_classes for c in view_configs}
    if len(ks) != 1:
        raise DimensionError(f"view nets disagree on num_classes: {sorted(ks)}")
    nets = [init(c) for c in view_configs]
    if pseudo_hidden is None:
        return MultiViewModel(view_configs, nets)
    seed = pseudo_seed if pseudo_seed is not None else 1 + max(c.seed for c in view_configs)
    pc = MlpConfig(sum(c.feature_dim for c in view_configs), tuple(pseudo_hidden), ks.pop(), seed)
    return MultiViewModel(view_configs, nets, pc, init(pc))


def pseudo_features(model: MultiViewModel, x_views):
    """Concatenate per-view features in view order."""
    if len(x_views) != model.num_views:
        raise DimensionError(f"got {len(x_views)} views, model has {model.num_views}")
    feats = [forward_evidence(p, x)[1] for p, x in zip(model.view_nets, x_views)]
    return np.concatenate(feats, axis=-1)


@dataclass
class ForwardPass:
    view_evidence: list[np.ndarray]
    pseudo_evidence: np.ndarray | None
    view_caches: list[Cache] = field(repr=False)
    pseudo_cache: Cache | None = field(repr=False)
    feature_dims: list[int] = field(repr=False)


def model_forward(model: MultiViewModel, x_views) -> ForwardPass:
    if len(x_views) != model.num_views:
        raise DimensionError(f"got {len(x_views)} views, model has {model.num_views}")
    evs, feats, caches = [], [], []
    for p, x in zip(model.view_nets, x_views):
        x = np.asarray(x, dtype=float)
        e, f, c = forward_evidence(p, x if x.ndim == 2 else x[None, :])
        evs.append(e)
        feats.append(f)
        caches.append(c)
    pe = pc = None
    if model.pseudo_net is not None:
        pe, _, pc = forward_evidence(model.pseudo_net, np.concatenate(feats, axis=1))
    return ForwardPass(evs, pe, caches, pc, [f.shape[1] for f in feats])


def model_backward(model: MultiViewModel, fp: ForwardPass, view_grads, pseudo_grad=None):
    """Gradients for every parameter array, ordered like ``parameter_arrays``."""
    feat_grads = [None] * model.num_views
    pseudo_out = []
    if model.pseudo_net is not None and pseudo_grad is not None:
        gp, g_in = backward(model.pseudo_net, fp.pseudo_cache, pseudo_grad)
        pseudo_out = gp.arrays()
        feat_grads = np.split(g_in, np.cumsum(fp.feature_dims)[:-1], axis=1)
    elif model.pseudo_net is not None:
        pseudo_out = [np.zeros_like(a) for a in model.pseudo_net.arrays()]
    out = []
    for p, c, g, gf in zip(model.view_nets, fp.view_caches, view_grads, feat_grads):
        gp, _ = backward(p, c, g, gf)
        out += gp.arrays()
    return out + pseudo_out
