"""Small flat-parameter classifiers trained with mini-batch SGD.

Two architectures: plain multinomial logistic regression and a one-hidden-
layer ReLU perceptron.  Parameters live in a single flat float64 vector so
aggregation rules never see layer structure; pack order is W1, b1, (W2, b2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError

MODEL_KINDS = ("logistic", "mlp1")


@dataclass(frozen=True)
class ModelSpec:
    kind: str = "logistic"
    input_dim: int = 20
    class_count: int = 4
    hidden_dim: int = 32  # mlp1 only

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {self.kind!r}; valid: {', '.join(MODEL_KINDS)}")
        if self.input_dim < 1 or self.class_count < 2:
            raise ConfigError("need input_dim >= 1 and class_count >= 2")
        if self.kind == "mlp1" and self.hidden_dim < 1:
            raise ConfigError(f"hidden_dim must be >= 1, got {self.hidden_dim}")

    @property
    def param_count(self) -> int:
        q, c, h = self.input_dim, self.class_count, self.hidden_dim
        if self.kind == "logistic":
            return c * q + c
        return h * q + h + c * h + c

    def layer_shapes(self) -> list[tuple[int, ...]]:
        q, c, h = self.input_dim, self.class_count, self.hidden_dim
        if self.kind == "logistic":
            return [(c, q), (c,)]
        return [(h, q), (h,), (c, h), (c,)]


def init_params(spec: ModelSpec, rng: np.random.Generator) -> np.ndarray:
    """Per-layer scaled uniform init: U(-a, a) with a = 1/sqrt(fan_in)."""
    parts = []
    for shape in spec.layer_shapes():
        fan_in = shape[1] if len(shape) == 2 else shape[0]
        a = 1.0 / np.sqrt(fan_in)
        parts.append(rng.uniform(-a, a, size=shape).ravel())
    return np.concatenate(parts)


def unpack(spec: ModelSpec, flat: np.ndarray) -> list[np.ndarray]:
    if flat.size != spec.param_count:
        raise DimensionError(f"expected {spec.param_count} parameters, got {flat.size}")
    out = []
    at = 0
    for shape in spec.layer_shapes():
        size = int(np.prod(shape))
        out.append(flat[at:at + size].reshape(shape))
        at += size
    return out


def forward_logits(spec: ModelSpec, flat: np.ndarray, features: np.ndarray) -> np.ndarray:
    if spec.kind == "logistic":
        w, b = unpack(spec, flat)
        return features @ w.T + b
    w1, b1, w2, b2 = unpack(spec, flat)
    hidden = np.maximum(features @ w1.T + b1, 0.0)
    return hidden @ w2.T + b2


def predict_proba(spec: ModelSpec, flat: np.ndarray, features: np.ndarray) -> np.ndarray:
    return _softmax(forward_logits(spec, flat, features))


def loss_and_grad(spec: ModelSpec, flat: np.ndarray, features: np.ndarray,
                  labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy over the batch and its flat gradient."""
    m = features.shape[0]
    if spec.kind == "logistic":
        w, b = unpack(spec, flat)
        loss, probs = _ce_loss(features @ w.T + b, labels)
        delta = probs
        delta[np.arange(m), labels] -= 1.0
        delta /= m
        grad = np.concatenate([(delta.T @ features).ravel(), delta.sum(axis=0)])
    else:
        w1, b1, w2, b2 = unpack(spec, flat)
        pre = features @ w1.T + b1
        hidden = np.maximum(pre, 0.0)
        loss, probs = _ce_loss(hidden @ w2.T + b2, labels)
        delta = probs
        delta[np.arange(m), labels] -= 1.0
        delta /= m
        d_hidden = (delta @ w2) * (pre > 0.0)
        grad = np.concatenate([
            (d_hidden.T @ features).ravel(),
            d_hidden.sum(axis=0),
            (delta.T @ hidden).ravel(),
            delta.sum(axis=0),
        ])
    return loss, grad


def _ce_loss(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean cross-entropy via log-softmax (no clipping) plus the probabilities."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    log_norm = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    log_probs = shifted - log_norm
    loss = -float(np.mean(log_probs[np.arange(logits.shape[0]), labels]))
    return loss, np.exp(log_probs)


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = np.exp(logits - logits.max(axis=1, keepdims=True))
    return z / z.sum(axis=1, keepdims=True)
