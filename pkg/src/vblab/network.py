"""Small dense-network engine in float64 numpy.

Everything a training step needs lives here: a fully-connected network
with an explicit forward cache, manual backpropagation from a gradient
at the logits, probability utilities (stabilised softmax with optional
class masking, cross-entropy, KL divergence, mean squared error), SGD
with momentum and weight decay, deep snapshots, and a flat-binary
checkpoint format.

Hidden layers use one nonlinearity ('relu' or 'tanh'); the output layer
is linear, so losses are defined on raw logits.  All arrays are float64
and all randomness comes from generators passed in by the caller.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, MaskError, StateError

PROB_FLOOR = 1e-12  # probabilities are clamped here before any log

_ACTIVATIONS = ("relu", "tanh")


def _act(name: str, z: np.ndarray) -> np.ndarray:
    if name == "relu":
        return np.maximum(z, 0.0)
    return np.tanh(z)


def _act_deriv(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    # derivative expressed from whichever of (pre-activation, activation) is cheaper
    if name == "relu":
        return (z > 0.0).astype(np.float64)
    return 1.0 - a * a


@dataclass
class LogitBatch:
    """Raw network outputs for one batch, with optional labels and class mask.

    ``class_mask`` is a boolean vector (shared by every row) or matrix
    (one row per sample); True marks an admissible class.  Masking is
    applied by :func:`softmax`, never inside the network itself.
    """

    logits: np.ndarray
    labels: np.ndarray | None = None
    class_mask: np.ndarray | None = None

    @property
    def n_rows(self) -> int:
        return self.logits.shape[0]


def softmax(logits: np.ndarray, class_mask: np.ndarray | None = None) -> np.ndarray:
    """Row-wise softmax, stabilised by max subtraction.

    Masked-out classes receive probability exactly 0 and take no part in
    the normalisation.  A row whose mask admits no class raises
    :class:`MaskError`.
    """
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim == 1:
        return softmax(z[None, :], class_mask)[0]
    if z.ndim != 2:
        raise DimensionError(f"softmax expects a vector or matrix, got ndim={z.ndim}")
    if class_mask is None:
        m = np.max(z, axis=1, keepdims=True)
        e = np.exp(z - m)
        return e / np.sum(e, axis=1, keepdims=True)
    mask = np.broadcast_to(np.asarray(class_mask, dtype=bool), z.shape)
    if not np.all(np.any(mask, axis=1)):
        bad = int(np.flatnonzero(~np.any(mask, axis=1))[0])
        raise MaskError(f"class mask admits no class in row {bad}")
    neg = np.where(mask, z, -np.inf)
    m = np.max(neg, axis=1, keepdims=True)
    e = np.where(mask, np.exp(neg - m), 0.0)
    return e / np.sum(e, axis=1, keepdims=True)


def _check_prob_rows(probs: np.ndarray, name: str) -> np.ndarray:
    p = np.asarray(probs, dtype=np.float64)
    if p.ndim != 2:
        raise DimensionError(f"{name} expects a matrix of probability rows, got ndim={p.ndim}")
    sums = np.sum(p, axis=1)
    if not np.all(np.abs(sums - 1.0) <= 1e-9):
        bad = int(np.flatnonzero(np.abs(sums - 1.0) > 1e-9)[0])
        raise ValueError(f"{name}: row {bad} sums to {sums[bad]!r}, expected 1 within 1e-9")
    return p


def cross_entropy(probs: np.ndarray, labels: np.ndarray) -> float:
    """Mean negative log-probability of the true class.

    ``probs`` must hold probability rows (each summing to 1 within 1e-9);
    probabilities are clamped at ``PROB_FLOOR`` before the log, so a
    zero-probability true class yields a large finite loss.
    """
    p = _check_prob_rows(probs, "cross_entropy")
    y = np.asarray(labels)
    if y.shape != (p.shape[0],):
        raise DimensionError(f"cross_entropy: {p.shape[0]} rows but labels shape {y.shape}")
    if np.any(y < 0) or np.any(y >= p.shape[1]):
        raise ValueError("cross_entropy: label out of range")
    picked = p[np.arange(p.shape[0]), y]
    return float(np.mean(-np.log(np.maximum(picked, PROB_FLOOR))))


def kl_divergence(p: np.ndarray, q: np.ndarray) -> float:
    """KL(p || q) for two probability vectors, with clamped logs.

    Terms where p is (numerically) zero contribute nothing.  Always
    non-negative up to clamping error.
    """
    pv = np.asarray(p, dtype=np.float64)
    qv = np.asarray(q, dtype=np.float64)
    if pv.shape != qv.shape or pv.ndim != 1:
        raise DimensionError(f"kl_divergence expects two equal-length vectors, got {pv.shape} and {qv.shape}")
    for name, v in (("p", pv), ("q", qv)):
        if abs(float(np.sum(v)) - 1.0) > 1e-9:
            raise ValueError(f"kl_divergence: {name} sums to {float(np.sum(v))!r}, expected 1 within 1e-9")
    pc = np.maximum(pv, PROB_FLOOR)
    qc = np.maximum(qv, PROB_FLOOR)
    return float(np.sum(np.where(pv > 0.0, pv * (np.log(pc) - np.log(qc)), 0.0)))


def kl_divergence_rows(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Row-wise KL(p || q); vectorised companion of :func:`kl_divergence`."""
    pm = np.asarray(p, dtype=np.float64)
    qm = np.asarray(q, dtype=np.float64)
    if pm.shape != qm.shape or pm.ndim != 2:
        raise DimensionError(f"kl_divergence_rows expects two equal-shape matrices, got {pm.shape} and {qm.shape}")
    pc = np.maximum(pm, PROB_FLOOR)
    qc = np.maximum(qm, PROB_FLOOR)
    terms = np.where(pm > 0.0, pm * (np.log(pc) - np.log(qc)), 0.0)
    return np.sum(terms, axis=1)


def mean_squared_error(a: np.ndarray, b: np.ndarray) -> float:
    """Mean over all elements of the squared difference."""
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    if x.shape != y.shape:
        raise DimensionError(f"mean_squared_error: shapes {x.shape} and {y.shape} differ")
    return float(np.mean((x - y) ** 2))


@dataclass
class _ForwardCache:
    inputs: np.ndarray
    pre_activations: list[np.ndarray]  # z_1 .. z_L
    activations: list[np.ndarray]  # a_0 (= inputs) .. a_{L-1}


class Network:
    """Fully-connected network with linear output and manual gradients.

    ``layer_dims`` runs input -> hidden... -> output; the final width is
    the total class count.  Weights are (fan_in, fan_out) so the forward
    pass is ``a @ W + b``.
    """

    def __init__(self, layer_dims: list[int], activation: str = "relu", seed: int | None = None):
        if len(layer_dims) < 2 or any(int(d) <= 0 for d in layer_dims):
            raise ValueError(f"layer_dims must list >=2 positive widths, got {layer_dims}")
        if activation not in _ACTIVATIONS:
            raise ValueError(f"activation must be one of {_ACTIVATIONS}, got {activation!r}")
        self.layer_dims = [int(d) for d in layer_dims]
        self.activation = activation
        self.seed = seed
        self.weights: list[np.ndarray] = [
            np.zeros((i, o)) for i, o in zip(self.layer_dims[:-1], self.layer_dims[1:])
        ]
        self.biases: list[np.ndarray] = [np.zeros(o) for o in self.layer_dims[1:]]
        self.grad_weights: list[np.ndarray] = [np.zeros_like(w) for w in self.weights]
        self.grad_biases: list[np.ndarray] = [np.zeros_like(b) for b in self.biases]
        self._cache: _ForwardCache | None = None

    # -- construction -------------------------------------------------

    @classmethod
    def initialize(
        cls,
        layer_dims: list[int],
        activation: str = "relu",
        rng: np.random.Generator | None = None,
        seed: int | None = None,
    ) -> "Network":
        """Build a network with uniform(+-sqrt(6/(fan_in+fan_out))) weights and zero biases."""
        if rng is None:
            if seed is None:
                raise ValueError("initialize needs an rng or a seed")
            rng = np.random.default_rng(seed)
        net = cls(layer_dims, activation, seed=seed)
        for li, (fan_in, fan_out) in enumerate(zip(net.layer_dims[:-1], net.layer_dims[1:])):
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            net.weights[li] = rng.uniform(-bound, bound, size=(fan_in, fan_out))
        return net

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def n_params(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)

    # -- forward / backward -------------------------------------------

    def forward(
        self,
        inputs: np.ndarray,
        labels: np.ndarray | None = None,
        class_mask: np.ndarray | None = None,
    ) -> LogitBatch:
        """Run the batch through the network and cache activations for backward."""
        x = np.asarray(inputs, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.layer_dims[0]:
            raise DimensionError(
                f"forward expects (rows, {self.layer_dims[0]}) inputs, got shape {x.shape}"
            )
        pre: list[np.ndarray] = []
        acts: list[np.ndarray] = [x]
        a = x
        for li in range(self.n_layers):
            z = a @ self.weights[li] + self.biases[li]
            pre.append(z)
            if li < self.n_layers - 1:
                a = _act(self.activation, z)
                acts.append(a)
            else:
                a = z  # linear output
        self._cache = _ForwardCache(inputs=x, pre_activations=pre, activations=acts)
        lab = None if labels is None else np.asarray(labels)
        return LogitBatch(logits=a, labels=lab, class_mask=class_mask)

    def features(self, inputs: np.ndarray) -> np.ndarray:
        """Activations of the last hidden layer (the inputs themselves if depth is 1).

        Does not disturb the forward cache.
        """
        x = np.asarray(inputs, dtype=np.float64)
        if x.ndim == 1:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.layer_dims[0]:
            raise DimensionError(
                f"features expects (rows, {self.layer_dims[0]}) inputs, got shape {x.shape}"
            )
        a = x
        for li in range(self.n_layers - 1):
            a = _act(self.activation, a @ self.weights[li] + self.biases[li])
        return a

    def zero_grad(self) -> None:
        for g in self.grad_weights:
            g[...] = 0.0
        for g in self.grad_biases:
            g[...] = 0.0

    def backward(self, dlogits: np.ndarray) -> None:
        """Fill ``grad_weights``/``grad_biases`` from a gradient at the logits.

        Requires the cache left by the most recent :meth:`forward`; the
        cache is dropped by :func:`sgd_step` because a parameter update
        invalidates it.  Gradients are written, not accumulated, so the
        gradient of a weighted sum of losses is obtained by passing the
        weighted sum of their logit gradients.
        """
        if self._cache is None:
            raise StateError("backward called with no cached forward pass (run forward first)")
        cache = self._cache
        d = np.asarray(dlogits, dtype=np.float64)
        rows = cache.inputs.shape[0]
        if d.shape != (rows, self.layer_dims[-1]):
            raise DimensionError(
                f"backward expects dlogits of shape ({rows}, {self.layer_dims[-1]}), got {d.shape}"
            )
        dz = d
        for li in range(self.n_layers - 1, -1, -1):
            self.grad_weights[li][...] = cache.activations[li].T @ dz
            self.grad_biases[li][...] = np.sum(dz, axis=0)
            if li > 0:
                da = dz @ self.weights[li].T
                dz = da * _act_deriv(
                    self.activation, cache.pre_activations[li - 1], cache.activations[li]
                )

    # -- persistence ---------------------------------------------------

    def snapshot(self) -> "Network":
        """Deep copy of parameters and structure; grads zeroed, cache dropped."""
        twin = Network(self.layer_dims, self.activation, seed=self.seed)
        twin.weights = [w.copy() for w in self.weights]
        twin.biases = [b.copy() for b in self.biases]
        return twin

    def save(self, path: str) -> None:
        """Write a checkpoint: one JSON header line, then all parameters
        as a flat little-endian float64 stream (per layer: weights row-major,
        then biases)."""
        header = {"layer_dims": self.layer_dims, "activation": self.activation, "seed": self.seed}
        flat = np.concatenate(
            [np.concatenate([w.ravel(), b.ravel()]) for w, b in zip(self.weights, self.biases)]
        )
        with open(path, "wb") as fh:
            fh.write(json.dumps(header, sort_keys=True).encode("utf-8"))
            fh.write(b"\n")
            fh.write(flat.astype("<f8").tobytes())

    @classmethod
    def load(cls, path: str) -> "Network":
        with open(path, "rb") as fh:
            header_line = fh.readline()
            payload = fh.read()
        header = json.loads(header_line.decode("utf-8"))
        net = cls(header["layer_dims"], header["activation"], seed=header["seed"])
        flat = np.frombuffer(payload, dtype="<f8").astype(np.float64)
        if flat.size != net.n_params:
            raise ValueError(f"checkpoint holds {flat.size} values, network needs {net.n_params}")
        pos = 0
        for li in range(net.n_layers):
            w, b = net.weights[li], net.biases[li]
            net.weights[li] = flat[pos : pos + w.size].reshape(w.shape).copy()
            pos += w.size
            net.biases[li] = flat[pos : pos + b.size].copy()
            pos += b.size
        return net


@dataclass
class OptimizerState:
    """SGD with classical momentum and (coupled) weight decay.

    The update per parameter tensor is::

        g = grad + weight_decay * theta
        v = momentum * v + g
        theta = theta - learning_rate * v

    With momentum and decay both zero this is exactly theta - lr * grad.
    """

    learning_rate: float
    momentum: float = 0.0
    weight_decay: float = 0.0
    velocity_weights: list[np.ndarray] = field(default_factory=list)
    velocity_biases: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self) -> None:
        if self.learning_rate <= 0.0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if not 0.0 <= self.momentum < 1.0:
            raise ValueError(f"momentum must lie in [0, 1), got {self.momentum}")
        if self.weight_decay < 0.0:
            raise ValueError(f"weight_decay must be non-negative, got {self.weight_decay}")

    @classmethod
    def for_network(
        cls, net: Network, learning_rate: float, momentum: float = 0.0, weight_decay: float = 0.0
    ) -> "OptimizerState":
        state = cls(learning_rate=learning_rate, momentum=momentum, weight_decay=weight_decay)
        state.velocity_weights = [np.zeros_like(w) for w in net.weights]
        state.velocity_biases = [np.zeros_like(b) for b in net.biases]
        return state


def sgd_step(net: Network, opt: OptimizerState) -> None:
    """Apply one SGD update from ``net``'s current gradients.

    Drops the forward cache: cached activations no longer describe the
    updated parameters.
    """
    if len(opt.velocity_weights) != net.n_layers:
        raise DimensionError("optimizer state was built for a different network")
    for li in range(net.n_layers):
        gw = net.grad_weights[li] + opt.weight_decay * net.weights[li]
        opt.velocity_weights[li] = opt.momentum * opt.velocity_weights[li] + gw
        net.weights[li] = net.weights[li] - opt.learning_rate * opt.velocity_weights[li]
        gb = net.grad_biases[li] + opt.weight_decay * net.biases[li]
        opt.velocity_biases[li] = opt.momentum * opt.velocity_biases[li] + gb
        net.biases[li] = net.biases[li] - opt.learning_rate * opt.velocity_biases[li]
    net._cache = None
