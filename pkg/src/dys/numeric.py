"""Dense numeric kernels: small MLPs with hand-written backprop, Adam,
the smooth-step gate nonlinearity, and a finite-difference gradient oracle.

Everything runs in float64. Operations are pure functions of their inputs
except ``adam_step``, which mutates the optimizer state it is handed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteError, ParameterError, ShapeMismatchError

Array = np.ndarray


# ---------------------------------------------------------------------------
# MLP parameters
# ---------------------------------------------------------------------------

@dataclass
class MLPParams:
    """Weights of a fully connected net: ReLU after every layer but the last.

    weights[i] has shape [out_i, in_i]; biases[i] has shape [out_i].
    Adjacent layers must chain: out_i == in_{i+1}.
    """

    weights: list[Array]
    biases: list[Array]
    activation: str = "relu"

    def __post_init__(self):
        if self.activation != "relu":
            raise ParameterError(f"unsupported activation {self.activation!r}")
        if len(self.weights) != len(self.biases) or not self.weights:
            raise ShapeMismatchError("weights and biases must pair up, one per layer")
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2 or b.ndim != 1 or w.shape[0] != b.shape[0]:
                raise ShapeMismatchError(
                    f"layer {i}: weight {w.shape} incompatible with bias {b.shape}"
                )
            if i > 0 and w.shape[1] != self.weights[i - 1].shape[0]:
                raise ShapeMismatchError(
                    f"layer {i}: input dim {w.shape[1]} != previous output "
                    f"{self.weights[i - 1].shape[0]}"
                )

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[0]

    def copy(self) -> "MLPParams":
        return MLPParams([w.copy() for w in self.weights],
                         [b.copy() for b in self.biases])


def init_mlp(rng: np.random.Generator, dims: list[int]) -> MLPParams:
    """He-normal hidden layers, smaller-scale linear output, zero biases.

    dims = [in, hidden..., out].
    """
    weights, biases = [], []
    for i in range(len(dims) - 1):
        fan_in, fan_out = dims[i], dims[i + 1]
        last = i == len(dims) - 2
        scale = np.sqrt(1.0 / fan_in) if last else np.sqrt(2.0 / fan_in)
        weights.append(rng.normal(0.0, scale, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MLPParams(weights, biases)


def mlp_forward(params: MLPParams, x: Array) -> Array:
    """Forward pass for a single input vector; returns final-layer logits."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (params.in_dim,):
        raise ShapeMismatchError(f"input shape {x.shape}, expected ({params.in_dim},)")
    h = x
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        h = w @ h + b
        if i != last:
            h = np.maximum(h, 0.0)
    return h


def mlp_forward_batch(params: MLPParams, X: Array) -> Array:
    """Forward pass for a [n, in_dim] batch; returns [n, out_dim] logits."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != params.in_dim:
        raise ShapeMismatchError(f"batch shape {X.shape}, expected (n, {params.in_dim})")
    h = X
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        h = h @ w.T + b
        if i != last:
            h = np.maximum(h, 0.0)
    return h


def mlp_backward(
    params: MLPParams, x: Array, upstream_grad: Array
) -> tuple[MLPParams, Array]:
    """Reverse-mode gradients of ``upstream_grad . mlp_forward(params, x)``.

    Returns (parameter gradients packed as an MLPParams, gradient wrt x).
    ReLU subgradient at 0 is taken as 0.
    """
    x = np.asarray(x, dtype=np.float64)
    g = np.asarray(upstream_grad, dtype=np.float64)
    if g.shape != (params.out_dim,):
        raise ShapeMismatchError(
            f"upstream grad shape {g.shape}, expected ({params.out_dim},)"
        )

    # forward, caching pre-activations
    acts = [x]
    pre = []
    h = x
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = w @ h + b
        pre.append(z)
        h = np.maximum(z, 0.0) if i != last else z
        acts.append(h)

    dW = [np.zeros_like(w) for w in params.weights]
    db = [np.zeros_like(b) for b in params.biases]
    dh = g
    for i in range(last, -1, -1):
        dz = dh if i == last else dh  # dh already wrt this layer's output
        if i != last:
            dz = dh * (pre[i] > 0.0)
        dW[i] = np.outer(dz, acts[i])
        db[i] = dz
        dh = params.weights[i].T @ dz
    grads = MLPParams(dW, db)
    return grads, dh


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------

@dataclass
class AdamState:
    """Adam accumulators over a dict of named parameter arrays."""

    learning_rate: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    step: int = 0
    m: dict[str, Array] = field(default_factory=dict)
    v: dict[str, Array] = field(default_factory=dict)


def adam_step(state: AdamState, params: dict[str, Array], grads: dict[str, Array]) -> None:
    """One Adam update with bias correction, in place on ``params``.

    Raises NonFiniteError if any gradient entry is NaN/inf.
    """
    state.step += 1
    t = state.step
    bc1 = 1.0 - state.beta1 ** t
    bc2 = 1.0 - state.beta2 ** t
    for key, g in grads.items():
        if not np.all(np.isfinite(g)):
            raise NonFiniteError(f"non-finite gradient for parameter {key!r} at step {t}")
        if key not in state.m:
            state.m[key] = np.zeros_like(params[key])
            state.v[key] = np.zeros_like(params[key])
        m, v = state.m[key], state.v[key]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        params[key] -= state.learning_rate * (m / bc1) / (np.sqrt(v / bc2) + state.epsilon)


# ---------------------------------------------------------------------------
# Smooth-step gate nonlinearity
# ---------------------------------------------------------------------------

def smooth_step(x, gamma: float = 1.0):
    """Piecewise-cubic step: exactly 0 below -gamma/2, exactly 1 above +gamma/2,
    C1-smooth cubic in between. Accepts scalars or arrays.
    """
    if gamma <= 0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    x = np.asarray(x, dtype=np.float64)
    half = gamma / 2.0
    inner = (-2.0 / gamma**3) * x**3 + (1.5 / gamma) * x + 0.5
    out = np.where(x <= -half, 0.0, np.where(x >= half, 1.0, inner))
    return out if out.ndim else float(out)


def smooth_step_grad(x, gamma: float = 1.0):
    """Derivative of smooth_step: 0 outside the band, quadratic inside."""
    if gamma <= 0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    x = np.asarray(x, dtype=np.float64)
    half = gamma / 2.0
    inner = (-6.0 / gamma**3) * x**2 + 1.5 / gamma
    out = np.where(np.abs(x) >= half, 0.0, inner)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Finite-difference oracle + gradient check
# ---------------------------------------------------------------------------

def finite_diff_grad(loss_fn, params: dict[str, Array], h: float = 1e-5) -> dict[str, Array]:
    """Central-difference gradient of ``loss_fn(params)`` per coordinate.

    ``loss_fn`` must be deterministic. Parameters are perturbed coordinate by
    coordinate on copies; the originals are left untouched.
    """
    if h <= 0:
        raise ParameterError(f"h must be positive, got {h}")
    work = {k: np.array(v, dtype=np.float64, copy=True) for k, v in params.items()}
    grads = {}
    for key, arr in work.items():
        g = np.zeros_like(arr)
        flat = arr.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.size):
            orig = flat[i]
            flat[i] = orig + h
            up = loss_fn(work)
            flat[i] = orig - h
            down = loss_fn(work)
            flat[i] = orig
            gflat[i] = (up - down) / (2.0 * h)
        grads[key] = g
    return grads


@dataclass
class GradCheckReport:
    """Worst-case comparison of analytic vs finite-difference gradients."""

    max_relative_error: float
    worst_parameter_index: tuple[str, int]


def grad_check(
    analytic: dict[str, Array], numeric: dict[str, Array], floor: float = 1e-4
) -> GradCheckReport:
    """Per-coordinate |a - n| / max(|a|, |n|, floor), reporting the worst one.

    The floor keeps near-zero coordinates (where central differences bottom
    out at roundoff) from dominating the relative error.
    """
    worst = 0.0
    worst_idx = ("", -1)
    for key in analytic:
        a = analytic[key].reshape(-1)
        n = numeric[key].reshape(-1)
        if a.shape != n.shape:
            raise ShapeMismatchError(f"gradient shape mismatch for {key!r}")
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), floor)
        rel = np.abs(a - n) / denom
        i = int(np.argmax(rel))
        if rel[i] >= worst:
            worst = float(rel[i])
            worst_idx = (key, i)
    return GradCheckReport(max_relative_error=worst, worst_parameter_index=worst_idx)
