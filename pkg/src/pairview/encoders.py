"""View-level encoders, projection heads, and the classifier head.

Three encoder families cover the three input geometries: a layer-weighted
pointwise stack for (layers, T, feat) feature stacks from a frozen upstream
speech model, a small CNN for spectrograms, and an MLP for fixed-width
descriptor vectors. All encoders emit 128-dimensional representations by
default.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ShapeError
from .tensor import (
    Parameter,
    Tensor,
    add_bias,
    conv2d,
    conv_pointwise_1d,
    init_weight,
    matmul,
    maxpool2d,
    mean_axis,
    mean_over_time,
    relu,
    reshape,
    softmax_rows,
    weighted_layer_sum,
)

ENCODER_KINDS = ("w2v2_pointwise", "spec_cnn", "vector_mlp")


@dataclass(frozen=True)
class EncoderSpec:
    view: str
    kind: str
    input_dims: tuple[int, ...]
    output_dim: int = 128

    def __post_init__(self):
        if self.kind not in ENCODER_KINDS:
            raise ContractError(f"unknown encoder kind {self.kind!r}")

    def to_dict(self) -> dict:
        return {"view": self.view, "kind": self.kind,
                "input_dims": list(self.input_dims), "output_dim": self.output_dim}

    @staticmethod
    def from_dict(d: dict) -> "EncoderSpec":
        return EncoderSpec(d["view"], d["kind"], tuple(d["input_dims"]), d["output_dim"])


def _rng_for(seed: int, tag: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((int(seed), zlib.crc32(tag.encode()))))


class Module:
    """A flat bag of named parameters with a forward method."""

    def __init__(self):
        self.params: list[Parameter] = []

    def _param(self, name: str, data: np.ndarray) -> Parameter:
        p = Parameter(name, data)
        self.params.append(p)
        return p

    def forward(self, x: Tensor) -> Tensor:
        raise NotImplementedError

    def __call__(self, x: Tensor) -> Tensor:
        return self.forward(x)


class W2v2PointwiseEncoder(Module):
    """Softmax-weighted layer average -> two pointwise conv layers -> mean pool.

    Input is (N, n_layers, T, feat). The layer weights are stored as raw
    logits and normalised in the forward pass, so they stay a probability
    vector no matter what the optimizer does to the logits.
    """

    def __init__(self, spec: EncoderSpec, rng: np.random.Generator,
                 hidden: int = 128, dtype=np.float32):
        super().__init__()
        self.spec = spec
        self.n_layers = spec.input_dims[0]
        self.feat = spec.input_dims[-1]
        prefix = f"enc.{spec.view}"
        self.layer_logits = self._param(f"{prefix}.layer_logits",
                                        np.zeros(self.n_layers, dtype=dtype))
        self.w1 = self._param(f"{prefix}.w1", init_weight(rng, (self.feat, hidden), self.feat, dtype))
        self.b1 = self._param(f"{prefix}.b1", np.zeros(hidden, dtype=dtype))
        self.w2 = self._param(f"{prefix}.w2", init_weight(rng, (hidden, spec.output_dim), hidden, dtype))
        self.b2 = self._param(f"{prefix}.b2", np.zeros(spec.output_dim, dtype=dtype))

    def layer_weights(self) -> Tensor:
        w2d = softmax_rows(reshape(self.layer_logits, (1, self.n_layers)))
        return reshape(w2d, (self.n_layers,))

    def forward(self, x: Tensor) -> Tensor:
        if x.data.ndim != 4 or x.data.shape[1] != self.n_layers or x.data.shape[3] != self.feat:
            raise ShapeError(f"expected (N, {self.n_layers}, T, {self.feat}), got {x.shape}")
        h = weighted_layer_sum(x, self.layer_weights())
        h = relu(conv_pointwise_1d(h, self.w1, self.b1))
        h = conv_pointwise_1d(h, self.w2, self.b2)
        return mean_over_time(h)


class SpecCnnEncoder(Module):
    """Three conv blocks (3x3, same padding, 2x2 max pool), time-averaged,
    then a linear layer to the output width."""

    def __init__(self, spec: EncoderSpec, rng: np.random.Generator,
                 channels: tuple[int, int, int] = (8, 16, 32), dtype=np.float32):
        super().__init__()
        self.spec = spec
        self.n_mels = spec.input_dims[0]
        self.channels = channels
        shrink = 2 ** len(channels)
        if self.n_mels % shrink != 0:
            raise ContractError(f"mel bins {self.n_mels} must be divisible by {shrink}")
        prefix = f"enc.{spec.view}"
        self.convs = []
        c_in = 1
        for i, c_out in enumerate(channels):
            w = self._param(f"{prefix}.conv{i}.w",
                            init_weight(rng, (c_out, c_in, 3, 3), c_in * 9, dtype))
            b = self._param(f"{prefix}.conv{i}.b", np.zeros(c_out, dtype=dtype))
            self.convs.append((w, b))
            c_in = c_out
        flat = channels[-1] * (self.n_mels // shrink)
        self.fc_w = self._param(f"{prefix}.fc.w", init_weight(rng, (flat, spec.output_dim), flat, dtype))
        self.fc_b = self._param(f"{prefix}.fc.b", np.zeros(spec.output_dim, dtype=dtype))

    def forward(self, x: Tensor) -> Tensor:
        if x.data.ndim != 3 or x.data.shape[1] != self.n_mels:
            raise ShapeError(f"expected (N, {self.n_mels}, frames), got {x.shape}")
        n, _, frames = x.data.shape
        if frames < 2 ** len(self.channels):
            raise ShapeError(f"need at least {2 ** len(self.channels)} frames, got {frames}")
        h = reshape(x, (n, 1, self.n_mels, frames))
        for w, b in self.convs:
            h = maxpool2d(relu(conv2d(h, w, b)), 2)
        h = mean_axis(h, 3)  # average over the time axis
        h = reshape(h, (n, h.data.shape[1] * h.data.shape[2]))
        return add_bias(matmul(h, self.fc_w), self.fc_b)


class MlpEncoder(Module):
    """input_dim -> hidden -> output, ReLU after the first layer."""

    def __init__(self, spec: EncoderSpec, rng: np.random.Generator,
                 hidden: int = 256, dtype=np.float32):
        super().__init__()
        self.spec = spec
        self.input_dim = spec.input_dims[-1]
        prefix = f"enc.{spec.view}"
        self.w1 = self._param(f"{prefix}.w1", init_weight(rng, (self.input_dim, hidden), self.input_dim, dtype))
        self.b1 = self._param(f"{prefix}.b1", np.zeros(hidden, dtype=dtype))
        self.w2 = self._param(f"{prefix}.w2", init_weight(rng, (hidden, spec.output_dim), hidden, dtype))
        self.b2 = self._param(f"{prefix}.b2", np.zeros(spec.output_dim, dtype=dtype))

    def forward(self, x: Tensor) -> Tensor:
        if x.data.ndim != 2 or x.data.shape[1] != self.input_dim:
            raise ShapeError(f"expected (N, {self.input_dim}), got {x.shape}")
        h = relu(add_bias(matmul(x, self.w1), self.b1))
        return add_bias(matmul(h, self.w2), self.b2)


class ProjectionHead(Module):
    """128 -> 256 -> 128 projection into the contrastive space."""

    def __init__(self, view: str, rng: np.random.Generator, in_dim: int = 128,
                 hidden: int = 256, out_dim: int = 128, dtype=np.float32):
        super().__init__()
        self.in_dim, self.out_dim = in_dim, out_dim
        prefix = f"proj.{view}"
        self.w1 = self._param(f"{prefix}.w1", init_weight(rng, (in_dim, hidden), in_dim, dtype))
        self.b1 = self._param(f"{prefix}.b1", np.zeros(hidden, dtype=dtype))
        self.w2 = self._param(f"{prefix}.w2", init_weight(rng, (hidden, out_dim), hidden, dtype))
        self.b2 = self._param(f"{prefix}.b2", np.zeros(out_dim, dtype=dtype))

    def forward(self, x: Tensor) -> Tensor:
        if x.data.ndim != 2 or x.data.shape[1] != self.in_dim:
            raise ShapeError(f"expected (N, {self.in_dim}), got {x.shape}")
        h = relu(add_bias(matmul(x, self.w1), self.b1))
        return add_bias(matmul(h, self.w2), self.b2)


class ClassifierHead(Module):
    """Linear layer producing class logits; ``classify`` applies softmax."""

    def __init__(self, n_classes: int, rng: np.random.Generator,
                 in_dim: int = 128, dtype=np.float32):
        super().__init__()
        self.in_dim, self.n_classes = in_dim, n_classes
        self.w = self._param("clf.w", init_weight(rng, (in_dim, n_classes), in_dim, dtype))
        self.b = self._param("clf.b", np.zeros(n_classes, dtype=dtype))

    def forward(self, x: Tensor) -> Tensor:
        if x.data.ndim != 2 or x.data.shape[1] != self.in_dim:
            raise ShapeError(f"expected (N, {self.in_dim}), got {x.shape}")
        return add_bias(matmul(x, self.w), self.b)

    def classify(self, reps: Tensor) -> Tensor:
        return softmax_rows(self.forward(reps))


_KIND_TO_CLASS = {
    "w2v2_pointwise": W2v2PointwiseEncoder,
    "spec_cnn": SpecCnnEncoder,
    "vector_mlp": MlpEncoder,
}


def build_encoder(spec: EncoderSpec, seed: int, dtype=np.float32) -> Module:
    """Seed-deterministic encoder construction; same (spec, seed) gives
    bit-identical parameters."""
    rng = _rng_for(seed, f"enc.{spec.view}")
    return _KIND_TO_CLASS[spec.kind](spec, rng, dtype=dtype)


def build_projection_head(view: str, seed: int, in_dim: int = 128, dtype=np.float32) -> ProjectionHead:
    return ProjectionHead(view, _rng_for(seed, f"proj.{view}"), in_dim=in_dim, dtype=dtype)


def build_classifier(n_classes: int, seed: int, in_dim: int = 128, dtype=np.float32) -> ClassifierHead:
    return ClassifierHead(n_classes, _rng_for(seed, "clf"), in_dim=in_dim, dtype=dtype)


class MultiViewModel:
    """Per-view encoders plus projection heads used during pre-training."""

    def __init__(self, encoders: dict[str, Module], heads: dict[str, ProjectionHead]):
        if sorted(encoders) != sorted(heads):
            raise ContractError("encoders and projection heads must cover the same views")
        self.views = sorted(encoders)
        self.encoders = encoders
        self.heads = heads

    def parameters(self) -> list[Parameter]:
        out: list[Parameter] = []
        for v in self.views:
            out.extend(self.encoders[v].params)
        for v in self.views:
            out.extend(self.heads[v].params)
        return out

    def project(self, view: str, x: Tensor) -> Tensor:
        return self.heads[view].forward(self.encoders[view].forward(x))


class ClassifierModel:
    """One view encoder with a classification head (projection head dropped)."""

    def __init__(self, encoder: Module, head: ClassifierHead):
        self.encoder = encoder
        self.head = head
        self.view = encoder.spec.view

    def parameters(self, include_encoder: bool = True) -> list[Parameter]:
        out = list(self.encoder.params) if include_encoder else []
        out.extend(self.head.params)
        return out

    def logits(self, x: Tensor) -> Tensor:
        return self.head.forward(self.encoder.forward(x))

    def predict(self, x: Tensor) -> np.ndarray:
        return self.logits(x).data.argmax(axis=1)


def parameter_count(module: Module) -> int:
    return sum(p.data.size for p in module.params)
