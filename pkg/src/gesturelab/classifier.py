"""Feed-forward sigmoid network for silhouette classification.

The model is deliberately plain: fully connected layers, sigmoid on every
layer, squared-error loss, minibatch gradient descent. Weights live in
(fan_out, fan_in) matrices so row k holds the incoming weights of output
neuron k; activations flow as z = W @ a + b.

Gesture classes are numbered 1..10. Class 0 is reserved for "no gesture"
and never appears as a network output; it exists only downstream where a
confidence gate can reject a prediction.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

#: Layer sizes used on the capture rig (50*50 inputs, 10 gesture classes).
FULL_ARCH = (2500, 2500, 1200, 10)
#: Slimmer stack with the same input/output contract, for test rigs and CI.
COMPACT_ARCH = (2500, 64, 32, 10)

NUM_CLASSES = 10


@dataclass
class Network:
    arch: tuple[int, ...]
    weights: list[np.ndarray]
    biases: list[np.ndarray]

    def __post_init__(self) -> None:
        if len(self.arch) < 2:
            raise ValueError("arch needs at least an input and an output layer")
        if len(self.weights) != len(self.arch) - 1 or len(self.biases) != len(self.arch) - 1:
            raise ValueError("layer count does not match arch")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            want = (self.arch[i + 1], self.arch[i])
            if w.shape != want:
                raise ValueError(f"layer {i} weight shape {w.shape} != {want}")
            if b.shape != (self.arch[i + 1],):
                raise ValueError(f"layer {i} bias shape {b.shape} != ({self.arch[i + 1]},)")


@dataclass(frozen=True)
class Prediction:
    """num is the 1-based winning class; num_prob its raw output activation."""

    num: int
    num_prob: float
    outputs: np.ndarray


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 1e-5
    epochs: int = 5000
    batch_size: int = 32
    seed: int = 0
    shuffle: bool = True


@dataclass
class TrainingResult:
    losses: list[float] = field(default_factory=list)

    @property
    def epochs_run(self) -> int:
        return len(self.losses)


def sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


def init_network(arch, seed: int = 0) -> Network:
    """Uniform init over +-sqrt(6 / (fan_in + fan_out)) per layer, zero biases."""
    arch = tuple(int(n) for n in arch)
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(arch, arch[1:]):
        r = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-r, r, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return Network(arch, weights, biases)


def forward(net: Network, batch: np.ndarray) -> list[np.ndarray]:
    """Run a (n, inputs) batch through the net; returns activations per layer.

    Element 0 is the input batch itself, the last element the outputs.
    """
    batch = np.atleast_2d(np.asarray(batch, dtype=np.float64))
    if batch.shape[1] != net.arch[0]:
        raise ValueError(f"batch has {batch.shape[1]} features, net wants {net.arch[0]}")
    activations = [batch]
    for w, b in zip(net.weights, net.biases):
        activations.append(sigmoid(activations[-1] @ w.T + b))
    return activations


def predict(net: Network, x: np.ndarray) -> Prediction:
    outputs = forward(net, x)[-1][0]
    num = int(np.argmax(outputs)) + 1
    return Prediction(num=num, num_prob=float(outputs[num - 1]), outputs=outputs)


def one_hot(label: int, classes: int = NUM_CLASSES) -> np.ndarray:
    if not 1 <= label <= classes:
        raise ValueError(f"label must be 1..{classes}, got {label}")
    t = np.zeros(classes)
    t[label - 1] = 1.0
    return t


def loss(outputs: np.ndarray, targets: np.ndarray) -> float:
    """Half squared error summed per sample, averaged over the batch."""
    outputs = np.atleast_2d(outputs)
    targets = np.atleast_2d(targets)
    return float((0.5 * ((outputs - targets) ** 2).sum(axis=1)).mean())


def backprop(net: Network, batch: np.ndarray, targets: np.ndarray):
    """Batch-mean gradients; returns (weight_grads, bias_grads, batch_loss)."""
    targets = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    activations = forward(net, batch)
    out = activations[-1]
    n = out.shape[0]

    delta = (out - targets) * out * (1.0 - out)
    weight_grads = [None] * len(net.weights)
    bias_grads = [None] * len(net.biases)
    for layer in range(len(net.weights) - 1, -1, -1):
        weight_grads[layer] = delta.T @ activations[layer] / n
        bias_grads[layer] = delta.mean(axis=0)
        if layer > 0:
            prev = activations[layer]
            delta = (delta @ net.weights[layer]) * prev * (1.0 - prev)
    return weight_grads, bias_grads, loss(out, targets)


def train(net: Network, samples: np.ndarray, targets: np.ndarray,
          config: TrainingConfig = TrainingConfig()) -> TrainingResult:
    """Minibatch gradient descent, in place. Loss history has one entry per epoch."""
    samples = np.asarray(samples, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if samples.shape[0] != targets.shape[0]:
        raise ValueError("samples and targets disagree on batch size")
    rng = np.random.default_rng(config.seed)
    result = TrainingResult()
    count = samples.shape[0]
    for _ in range(config.epochs):
        order = rng.permutation(count) if config.shuffle else np.arange(count)
        epoch_losses = []
        for start in range(0, count, config.batch_size):
            pick = order[start:start + config.batch_size]
            wg, bg, batch_loss = backprop(net, samples[pick], targets[pick])
            for w, g in zip(net.weights, wg):
                w -= config.learning_rate * g
            for b, g in zip(net.biases, bg):
                b -= config.learning_rate * g
            epoch_losses.append(batch_loss)
        result.losses.append(float(np.mean(epoch_losses)))
    return result


def accuracy(net: Network, samples: np.ndarray, labels) -> float:
    outputs = forward(net, samples)[-1]
    predicted = outputs.argmax(axis=1) + 1
    return float((predicted == np.asarray(labels)).mean())


def gradient_check(net: Network, x: np.ndarray, target: np.ndarray,
                   step: float = 1e-4) -> float:
    """Compare analytic and central-difference gradients on one sample.

    Returns |analytic - numeric| / (|analytic| + |numeric|) over all
    parameters jointly (vector 2-norms). Healthy implementations land
    far below 1e-5 in double precision.
    """
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    target = np.atleast_2d(np.asarray(target, dtype=np.float64))
    wg, bg, _ = backprop(net, x, target)
    analytic = np.concatenate([g.ravel() for g in wg] + [g.ravel() for g in bg])

    numeric = []
    for param in list(net.weights) + list(net.biases):
        flat = param.ravel()
        grads = np.empty(flat.size)
        for i in range(flat.size):
            keep = flat[i]
            flat[i] = keep + step
            up = loss(forward(net, x)[-1], target)
            flat[i] = keep - step
            down = loss(forward(net, x)[-1], target)
            flat[i] = keep
            grads[i] = (up - down) / (2.0 * step)
        numeric.append(grads)
    numeric = np.concatenate(numeric)

    denom = np.linalg.norm(analytic) + np.linalg.norm(numeric)
    if denom == 0.0:
        return 0.0
    return float(np.linalg.norm(analytic - numeric) / denom)


# --- weight persistence -------------------------------------------------------


def to_json(net: Network) -> dict:
    return {
        "arch": list(net.arch),
        "activation": "sigmoid",
        "layers": [
            {"w": w.tolist(), "b": b.tolist()}
            for w, b in zip(net.weights, net.biases)
        ],
    }


def from_json(doc: dict) -> Network:
    if doc.get("activation") != "sigmoid":
        raise ValueError(f"unsupported activation {doc.get('activation')!r}")
    arch = tuple(int(n) for n in doc["arch"])
    weights = [np.asarray(layer["w"], dtype=np.float64) for layer in doc["layers"]]
    biases = [np.asarray(layer["b"], dtype=np.float64) for layer in doc["layers"]]
    return Network(arch, weights, biases)


def save_weights(net: Network, path: str) -> None:
    """Write weights as JSON, atomically (full float round trip)."""
    tmp = f"{path}.tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(to_json(net), fh)
    os.replace(tmp, path)


def load_weights(path: str) -> Network:
    with open(path, "r", encoding="utf-8") as fh:
        return from_json(json.load(fh))
