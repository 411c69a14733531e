"""Dense feed-forward networks with an exact backward pass.

Only what the adversarial model needs: fully connected layers with ReLU,
sigmoid or identity activations, float64 throughout. ``backward`` returns
the gradient with respect to the input as well, so a loss on a
discriminator can be pushed back into the generator that fed it.
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

# sigmoid output is kept inside the open interval (0, 1)
_SIG_LO = np.nextafter(0.0, 1.0)
_SIG_HI = np.nextafter(1.0, 0.0)


class ShapeError(ValueError):
    pass


class Activation(enum.Enum):
    RELU = "relu"
    SIGMOID = "sigmoid"
    IDENTITY = "identity"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())

    def __call__(self, z):
        if self is Activation.RELU:
            return np.maximum(z, 0.0)
        if self is Activation.SIGMOID:
            # split by sign so exp never overflows
            out = np.empty_like(z)
            pos = z >= 0
            out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
            ez = np.exp(z[~pos])
            out[~pos] = ez / (1.0 + ez)
            return np.clip(out, _SIG_LO, _SIG_HI)
        return z.copy()

    def derivative(self, z, a):
        """d act / d z, given pre-activation ``z`` and output ``a``."""
        if self is Activation.RELU:
            return (z > 0).astype(np.float64)
        if self is Activation.SIGMOID:
            return a * (1.0 - a)
        return np.ones_like(z)


@dataclass
class DenseLayer:
    weights: np.ndarray  # (out_dim, in_dim)
    bias: np.ndarray  # (out_dim,)
    activation: Activation

    @property
    def in_dim(self):
        return self.weights.shape[1]

    @property
    def out_dim(self):
        return self.weights.shape[0]


class Mlp:
    def __init__(self, layers):
        layers = list(layers)
        if not layers:
            raise ShapeError("an Mlp needs at least one layer")
        for k, layer in enumerate(layers):
            w = np.asarray(layer.weights, dtype=np.float64)
            b = np.asarray(layer.bias, dtype=np.float64)
            if w.ndim != 2 or b.shape != (w.shape[0],):
                raise ShapeError(f"layer {k}: weights {w.shape} and bias {b.shape} disagree")
            if k > 0 and w.shape[1] != layers[k - 1].weights.shape[0]:
                raise ShapeError(f"layer {k} expects {w.shape[1]} inputs, "
                                 f"previous layer gives {layers[k - 1].weights.shape[0]}")
            if not (np.all(np.isfinite(w)) and np.all(np.isfinite(b))):
                raise ValueError(f"layer {k} has non-finite parameters")
            layer.weights, layer.bias = w, b
            layer.activation = Activation.parse(layer.activation)
        self.layers = layers

    @property
    def in_dim(self):
        return self.layers[0].in_dim

    @property
    def out_dim(self):
        return self.layers[-1].out_dim

    @property
    def dims(self):
        return [self.in_dim] + [layer.out_dim for layer in self.layers]

    def params(self):
        """Parameter arrays in a fixed order: W0, b0, W1, b1, ..."""
        out = []
        for layer in self.layers:
            out += [layer.weights, layer.bias]
        return out

    def with_params(self, params):
        params = list(params)
        if len(params) != 2 * len(self.layers):
            raise ShapeError("parameter list length does not match the network")
        layers = []
        for k, layer in enumerate(self.layers):
            w, b = params[2 * k], params[2 * k + 1]
            if w.shape != layer.weights.shape or b.shape != layer.bias.shape:
                raise ShapeError(f"layer {k}: parameter shapes changed")
            layers.append(DenseLayer(np.array(w, dtype=np.float64), np.array(b, dtype=np.float64),
                                     layer.activation))
        return Mlp(layers)

    def copy(self):
        return self.with_params(self.params())

    def to_dict(self):
        return {
            "layers": [
                {
                    "in_dim": layer.in_dim,
                    "out_dim": layer.out_dim,
                    "activation": layer.activation.value,
                    "weights": layer.weights.tolist(),
                    "bias": layer.bias.tolist(),
                }
                for layer in self.layers
            ]
        }

    @classmethod
    def from_dict(cls, data):
        layers = []
        for layer in data["layers"]:
            w = np.array(layer["weights"], dtype=np.float64).reshape(layer["out_dim"], layer["in_dim"])
            b = np.array(layer["bias"], dtype=np.float64).reshape(layer["out_dim"])
            layers.append(DenseLayer(w, b, Activation.parse(layer["activation"])))
        return cls(layers)

    def equals(self, other):
        if len(self.layers) != len(other.layers):
            return False
        return all(
            a.activation is b.activation
            and np.array_equal(a.weights, b.weights)
            and np.array_equal(a.bias, b.bias)
            for a, b in zip(self.layers, other.layers)
        )

    def __call__(self, batch):
        return forward(self, batch).output

    def __repr__(self):
        acts = ",".join(layer.activation.value for layer in self.layers)
        return f"Mlp(dims={self.dims}, activations=[{acts}])"


@dataclass
class GradientSet:
    weights: list
    biases: list

    def as_list(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    @classmethod
    def from_list(cls, arrays):
        return cls(list(arrays[0::2]), list(arrays[1::2]))

    @classmethod
    def zeros_like(cls, mlp):
        return cls([np.zeros_like(layer.weights) for layer in mlp.layers],
                   [np.zeros_like(layer.bias) for layer in mlp.layers])

    def __add__(self, other):
        return GradientSet.from_list([a + b for a, b in zip(self.as_list(), other.as_list())])

    def scaled(self, factor):
        return GradientSet.from_list([factor * a for a in self.as_list()])

    def is_finite(self):
        return all(np.all(np.isfinite(a)) for a in self.as_list())


@dataclass
class ForwardTrace:
    inputs: np.ndarray
    pre: list = field(default_factory=list)
    post: list = field(default_factory=list)

    @property
    def output(self):
        return self.post[-1]


def init(layer_dims, activations, seed):
    """Glorot-uniform weights, zero biases, deterministic in ``seed``."""
    layer_dims = [int(d) for d in layer_dims]
    activations = [Activation.parse(a) for a in activations]
    if len(layer_dims) < 2:
        raise ShapeError("need at least an input and an output dimension")
    if len(activations) != len(layer_dims) - 1:
        raise ShapeError(f"{len(layer_dims) - 1} layers but {len(activations)} activations")
    if min(layer_dims) < 1:
        raise ShapeError("all layer dimensions must be >= 1")
    rng = np.random.default_rng(seed)
    layers = []
    for fan_in, fan_out, act in zip(layer_dims[:-1], layer_dims[1:], activations):
        limit = math.sqrt(6.0 / (fan_in + fan_out))
        w = rng.uniform(-limit, limit, size=(fan_out, fan_in))
        layers.append(DenseLayer(w, np.zeros(fan_out), act))
    return Mlp(layers)


def forward(mlp, batch):
    x = np.asarray(batch, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.ndim != 2 or x.shape[1] != mlp.in_dim:
        raise ShapeError(f"batch width {x.shape[-1]} does not match network input {mlp.in_dim}")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite input to forward")
    trace = ForwardTrace(inputs=x)
    a = x
    for layer in mlp.layers:
        z = a @ layer.weights.T + layer.bias
        a = layer.activation(z)
        trace.pre.append(z)
        trace.post.append(a)
    return trace


def backward(mlp, trace, upstream):
    """Gradients of sum(upstream * output) w.r.t. parameters and inputs."""
    g = np.asarray(upstream, dtype=np.float64)
    if g.shape != trace.output.shape:
        raise ShapeError(f"upstream shape {g.shape} does not match output {trace.output.shape}")
    dws, dbs = [None] * len(mlp.layers), [None] * len(mlp.layers)
    for k in range(len(mlp.layers) - 1, -1, -1):
        layer = mlp.layers[k]
        delta = g * layer.activation.derivative(trace.pre[k], trace.post[k])
        a_prev = trace.post[k - 1] if k > 0 else trace.inputs
        dws[k] = delta.T @ a_prev
        dbs[k] = delta.sum(axis=0)
        g = delta @ layer.weights
    return GradientSet(dws, dbs), g


def finite_diff_grad(mlp, scalar_loss, eps=1e-5):
    """Central-difference gradient of ``scalar_loss(mlp)`` for every parameter."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    work = mlp.copy()
    grads = []
    for p in work.params():
        gp = np.zeros_like(p)
        flat, gflat = p.reshape(-1), gp.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + eps
            hi = scalar_loss(work)
            flat[i] = orig - eps
            lo = scalar_loss(work)
            flat[i] = orig
            if not (math.isfinite(hi) and math.isfinite(lo)):
                raise ValueError("loss is non-finite under perturbation")
            gflat[i] = (hi - lo) / (2.0 * eps)
        grads.append(gp)
    return GradientSet.from_list(grads)
