"""Complex-valued dense autoencoder with amplitude-aware activations.

Layers hold complex weights/biases. Three ReLU extensions are provided for
complex inputs plus a plain real ReLU for real-mode networks:

* ``crelu``    — ReLU applied separately to real and imaginary parts;
* ``modrelu``  — soft-thresholds the modulus, preserves the phase;
* ``ead``      — exponential amplitude decay ``(1 - exp(-b|z|^2)) e^{i phi}``,
  which maps amplitudes into [0, 1) and, when ``b`` matches the Rayleigh
  parameter of the input amplitudes, yields uniformly distributed output
  amplitudes.

Gradients are taken with respect to every real degree of freedom (real and
imaginary parts of weights/biases, activation parameters). A packed
convention is used: gradient arrays are complex with d/d(Re p) in the real
part and d/d(Im p) in the imaginary part. ReLU-family kinks use subgradient
zero.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import TrainingDiverged

EAD_MIN_B = 1e-6

DEFAULT_HIDDEN = (64, 64, 32, 64, 64)

ACTIVATION_KINDS = ("linear", "relu", "crelu", "modrelu", "ead")

_COMPLEX_KINDS = ("crelu", "modrelu", "ead")


# ---------------------------------------------------------------------------
# Activations
# ---------------------------------------------------------------------------


@dataclass
class Activation:
    """Activation descriptor; ``b`` is the raw trainable parameter.

    ``b`` has shape ``()`` for one shared parameter per layer (the default)
    or ``(nodes,)`` for the per-node variant. For ``ead`` the effective
    parameter is clamped to ``max(b, 1e-6)`` so it stays positive; for
    ``modrelu`` the threshold is unconstrained.
    """

    kind: str
    b: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ACTIVATION_KINDS:
            raise ValueError(f"unknown activation kind {self.kind!r}")
        if self.kind in ("modrelu", "ead"):
            if self.b is None:
                self.b = np.asarray(1.0)
            self.b = np.asarray(self.b, dtype=np.float64)
        else:
            self.b = None

    @property
    def trainable(self) -> bool:
        return self.kind in ("modrelu", "ead")

    def effective_b(self) -> np.ndarray:
        if self.kind == "ead":
            return np.maximum(self.b, EAD_MIN_B)
        return self.b


def crelu(z: np.ndarray) -> np.ndarray:
    """ReLU on the real and imaginary parts independently."""
    z = np.asarray(z, dtype=np.complex128)
    return np.maximum(z.real, 0.0) + 1j * np.maximum(z.imag, 0.0)


def modrelu(z: np.ndarray, b: float) -> np.ndarray:
    """Soft-threshold the modulus by ``b``; phase is preserved.

    Output is ``ReLU(|z| - b) e^{i phi_z}``, i.e. zero wherever ``|z| <= b``.
    """
    z = np.ascontiguousarray(np.atleast_2d(np.asarray(z, dtype=np.complex128)))
    b_arr = np.ascontiguousarray(np.broadcast_to(float(b), (z.shape[1],)).astype(np.float64))
    out, _ = _kernels.modrelu_fwd(z, b_arr)
    return out[0] if out.shape[0] == 1 else out


def ead(z: np.ndarray, b: float) -> np.ndarray:
    """Exponential amplitude decay ``(1 - exp(-b |z|^2)) e^{i phi_z}``.

    Requires ``b > 0``. The output modulus lies in [0, 1) — it can round to
    exactly 1.0 in f64 once ``b |z|^2`` exceeds ~37 — increases
    monotonically with ``|z|``, and the phase of nonzero inputs is kept
    exactly; ``z = 0`` maps to 0.
    """
    if not b > 0.0:
        raise ValueError("ead requires b > 0")
    z = np.ascontiguousarray(np.atleast_2d(np.asarray(z, dtype=np.complex128)))
    b_arr = np.ascontiguousarray(np.broadcast_to(float(b), (z.shape[1],)).astype(np.float64))
    out, _, _ = _kernels.ead_fwd(z, b_arr)
    return out[0] if out.shape[0] == 1 else out


def _node_b(act: Activation, n: int) -> np.ndarray:
    return np.ascontiguousarray(
        np.broadcast_to(act.effective_b(), (n,)).astype(np.float64)
    )


def _act_forward(act: Activation, z: np.ndarray):
    """Apply activation to a (batch, nodes) pre-activation; returns (out, cache)."""
    if act.kind == "linear":
        return z, None
    if act.kind == "relu":
        mask = z.real > 0.0
        return np.where(mask, z.real, 0.0).astype(np.complex128), mask
    if act.kind == "crelu":
        mre = z.real > 0.0
        mim = z.imag > 0.0
        out = np.where(mre, z.real, 0.0) + 1j * np.where(mim, z.imag, 0.0)
        return out, (mre, mim)
    b_arr = _node_b(act, z.shape[1])
    if act.kind == "modrelu":
        out, r = _kernels.modrelu_fwd(z, b_arr)
        return out, (r, b_arr)
    out, r, emb = _kernels.ead_fwd(z, b_arr)
    return out, (r, emb, b_arr)


def _act_backward(act: Activation, z: np.ndarray, gout: np.ndarray, cache):
    """Backpropagate a packed gradient through the activation.

    Returns ``(gz, gb)`` where ``gb`` matches the shape of ``act.b`` (or is
    None for parameter-free activations).
    """
    if act.kind == "linear":
        return gout, None
    if act.kind == "relu":
        return np.where(cache, gout.real, 0.0).astype(np.complex128), None
    if act.kind == "crelu":
        mre, mim = cache
        gz = np.where(mre, gout.real, 0.0) + 1j * np.where(mim, gout.imag, 0.0)
        return gz, None
    if act.kind == "modrelu":
        r, b_arr = cache
        gz, gb_node = _kernels.modrelu_bwd(gout, z, r, b_arr)
    else:
        r, emb, b_arr = cache
        gz, gb_node = _kernels.ead_bwd(gout, z, r, emb, b_arr)
        # clamp subgradient: effective b is frozen at the floor
        gb_node = np.where(np.broadcast_to(act.b, gb_node.shape) > EAD_MIN_B,
                           gb_node, 0.0) if act.kind == "ead" else gb_node
    if act.b.ndim == 0:
        return gz, np.asarray(gb_node.sum())
    return gz, gb_node


# ---------------------------------------------------------------------------
# Model
# ---------------------------------------------------------------------------


@dataclass
class DenseLayer:
    """Complex affine map plus activation: ``act(W z + bias)``."""

    weights: np.ndarray  # (out, in) complex128
    bias: np.ndarray     # (out,) complex128
    activation: Activation

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.complex128)
        self.bias = np.asarray(self.bias, dtype=np.complex128)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ValueError("inconsistent layer shapes")
        if not (np.all(np.isfinite(self.weights.view(np.float64)))
                and np.all(np.isfinite(self.bias.view(np.float64)))):
            raise ValueError("layer parameters must be finite")


@dataclass
class TrainReport:
    initial_loss: float
    final_loss: float
    epoch_losses: list[float]  # mean squared reconstruction error per sample


@dataclass
class ComplexAutoencoder:
    layers: list[DenseLayer]
    input_dim: int
    train_report: TrainReport | None = None

    def __post_init__(self):
        dim = self.input_dim
        for layer in self.layers:
            if layer.weights.shape[1] != dim:
                raise ValueError("layer input size does not chain")
            dim = layer.weights.shape[0]
        if self.layers and dim != self.input_dim:
            raise ValueError("decoder must map back to the input dimension")


def build_autoencoder(
    input_dim: int,
    activation: str = "ead",
    hidden: tuple[int, ...] = DEFAULT_HIDDEN,
    seed: int = 0,
    per_node_b: bool = False,
    b_init: float = 1.0,
) -> ComplexAutoencoder:
    """Construct an autoencoder with the given hidden widths.

    Hidden layers use ``activation``; the output layer mapping back to
    ``input_dim`` is linear. Complex weights draw their real and imaginary
    parts from ``N(0, 1/(fan_in + fan_out))``. With ``activation="relu"``
    the network is built in real mode: imaginary parts start at zero and
    the real parts use ``N(0, 2/(fan_in + fan_out))``.
    """
    if activation not in ("relu", "crelu", "modrelu", "ead"):
        raise ValueError(f"unsupported hidden activation {activation!r}")
    rng = np.random.default_rng(seed)
    dims = [input_dim, *hidden, input_dim]
    real_mode = activation == "relu"
    layers = []
    for li in range(len(dims) - 1):
        fan_in, fan_out = dims[li], dims[li + 1]
        if real_mode:
            w = rng.normal(0.0, math.sqrt(2.0 / (fan_in + fan_out)),
                           (fan_out, fan_in)).astype(np.float64)
            weights = w.astype(np.complex128)
        else:
            scale = math.sqrt(1.0 / (fan_in + fan_out))
            weights = (rng.normal(0.0, scale, (fan_out, fan_in))
                       + 1j * rng.normal(0.0, scale, (fan_out, fan_in)))
        bias = np.zeros(fan_out, dtype=np.complex128)
        last = li == len(dims) - 2
        if last:
            act = Activation("linear")
        elif activation in ("modrelu", "ead"):
            b0 = np.full(fan_out, b_init) if per_node_b else np.asarray(b_init)
            act = Activation(activation, b=b0)
        else:
            act = Activation(activation)
        layers.append(DenseLayer(weights=weights, bias=bias, activation=act))
    return ComplexAutoencoder(layers=layers, input_dim=input_dim)


def _as_batch(x, input_dim: int) -> np.ndarray:
    arr = np.asarray(x)
    if arr.ndim == 1:
        arr = arr[None, :]
    elif arr.ndim != 2:
        arr = np.stack([np.asarray(v) for v in x])
    if arr.shape[1] != input_dim:
        raise ValueError(
            f"input dimension {arr.shape[1]} does not match model ({input_dim})"
        )
    return np.ascontiguousarray(arr.astype(np.complex128))


def _forward_cached(ae: ComplexAutoencoder, X: np.ndarray):
    """Forward pass keeping pre/post activations for backprop."""
    a = X
    pres, posts, caches = [], [], []
    for layer in ae.layers:
        z = a @ layer.weights.T + layer.bias
        z = np.ascontiguousarray(z)
        a, cache = _act_forward(layer.activation, z)
        pres.append(z)
        posts.append(a)
        caches.append(cache)
    return pres, posts, caches


def forward(ae: ComplexAutoencoder, x: np.ndarray) -> np.ndarray:
    """Run the autoencoder on one vector or a batch of row vectors."""
    single = np.asarray(x).ndim == 1
    X = _as_batch(x, ae.input_dim)
    _, posts, _ = _forward_cached(ae, X)
    out = posts[-1] if ae.layers else X
    return out[0] if single else out


def reconstruction_loss(batch, ae: ComplexAutoencoder) -> float:
    """Sum over the batch of squared moduli of reconstruction residuals."""
    X = _as_batch(batch, ae.input_dim)
    if X.shape[0] == 0:
        raise ValueError("empty batch")
    diff = X - forward(ae, X)
    return float(np.sum(diff.real**2 + diff.imag**2))


@dataclass
class LayerGrads:
    weights: np.ndarray         # packed complex, same shape as layer.weights
    bias: np.ndarray            # packed complex, same shape as layer.bias
    act_b: np.ndarray | None    # same shape as activation.b


def grad(ae: ComplexAutoencoder, batch) -> list[LayerGrads]:
    """Reverse-mode gradient of :func:`reconstruction_loss` on ``batch``.

    Packed convention: for a complex parameter ``p`` the returned array ``g``
    satisfies ``g.real = dL/d(Re p)`` and ``g.imag = dL/d(Im p)``.
    """
    X = _as_batch(batch, ae.input_dim)
    if X.shape[0] == 0:
        raise ValueError("empty batch")
    pres, posts, caches = _forward_cached(ae, X)
    g = np.ascontiguousarray(2.0 * (posts[-1] - X))
    grads: list[LayerGrads] = [None] * len(ae.layers)  # type: ignore[list-item]
    for li in range(len(ae.layers) - 1, -1, -1):
        layer = ae.layers[li]
        gz, gb = _act_backward(layer.activation, pres[li], g, caches[li])
        a_prev = posts[li - 1] if li > 0 else X
        gw = gz.T @ a_prev.conj()
        gbias = gz.sum(axis=0)
        grads[li] = LayerGrads(weights=gw, bias=gbias, act_b=gb)
        if li > 0:
            g = np.ascontiguousarray(gz @ layer.weights.conj())
    return grads


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------


@dataclass
class TrainConfig:
    epochs: int = 200
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    optimizer: str = "adam"  # or "sgd"

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate < 0.0:
            raise ValueError("learning rate must be nonnegative")
        if self.optimizer not in ("adam", "sgd"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")


def _param_views(ae: ComplexAutoencoder):
    """Writable real-valued views of every trainable degree of freedom."""
    views = []
    for layer in ae.layers:
        views.append(layer.weights.real)
        views.append(layer.weights.imag)
        views.append(layer.bias.real)
        views.append(layer.bias.imag)
        if layer.activation.trainable:
            views.append(layer.activation.b)
    return views


def _grad_views(grads: list[LayerGrads]):
    views = []
    for g in grads:
        views.append(g.weights.real)
        views.append(g.weights.imag)
        views.append(g.bias.real)
        views.append(g.bias.imag)
        if g.act_b is not None:
            views.append(np.atleast_1d(g.act_b) if g.act_b.ndim == 0 else g.act_b)
    return views


class _Adam:
    def __init__(self, shapes, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.b1, self.b2, self.eps = lr, beta1, beta2, eps
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.t = 0

    def step(self, params, grads):
        self.t += 1
        c1 = 1.0 - self.b1**self.t
        c2 = 1.0 - self.b2**self.t
        for p, g, m, v in zip(params, grads, self.m, self.v):
            g = np.reshape(g, np.shape(p))
            m *= self.b1
            m += (1.0 - self.b1) * g
            v *= self.b2
            v += (1.0 - self.b2) * g * g
            p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


class _Sgd:
    def __init__(self, lr):
        self.lr = lr

    def step(self, params, grads):
        for p, g in zip(params, grads):
            p -= self.lr * np.reshape(g, np.shape(p))


def train(ae: ComplexAutoencoder, dataset, cfg: TrainConfig) -> ComplexAutoencoder:
    """Train a copy of ``ae`` to minimize the summed reconstruction loss.

    Deterministic for a fixed config seed and starting model. Raises
    :class:`TrainingDiverged` if the loss stops being finite. The returned
    model carries a :class:`TrainReport` in ``train_report``.
    """
    X = _as_batch(dataset, ae.input_dim)
    if X.shape[0] == 0:
        raise ValueError("empty training dataset")
    model = copy.deepcopy(ae)
    model.train_report = None
    params = _param_views(model)
    if cfg.optimizer == "adam":
        opt = _Adam([p.shape for p in params], cfg.learning_rate)
    else:
        opt = _Sgd(cfg.learning_rate)
    rng = np.random.default_rng(cfg.seed)
    n = X.shape[0]
    bs = max(1, min(cfg.batch_size, n))
    initial = reconstruction_loss(X, model)
    epoch_losses = []
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        total = 0.0
        with np.errstate(over="ignore", invalid="ignore"):
            for start in range(0, n, bs):
                idx = order[start : start + bs]
                batch = np.ascontiguousarray(X[idx])
                grads = grad(model, batch)
                opt.step(params, _grad_views(grads))
                diff = batch - forward(model, batch)
                total += float(np.sum(diff.real**2 + diff.imag**2))
        mean_loss = total / n
        if not math.isfinite(mean_loss):
            raise TrainingDiverged(f"training loss became non-finite ({mean_loss})")
        epoch_losses.append(mean_loss)
    final = reconstruction_loss(X, model)
    if not math.isfinite(final):
        raise TrainingDiverged("final loss is non-finite")
    model.train_report = TrainReport(initial_loss=initial, final_loss=final,
                                     epoch_losses=epoch_losses)
    return model


# ---------------------------------------------------------------------------
# Amplitude statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AmplitudeStats:
    """First four normalized moments of an amplitude distribution."""

    mean: float
    variance: float
    skewness: float
    kurtosis: float  # normalized (3 for a Gaussian)

    def __post_init__(self):
        if self.variance < 0.0:
            raise ValueError("variance must be nonnegative")

    @property
    def excess_kurtosis(self) -> float:
        return self.kurtosis - 3.0


def ead_statistics(b: float, omega: float) -> AmplitudeStats:
    """Closed-form moments of ``u = exp(-b r^2)`` for Rayleigh ``r``.

    ``r`` follows the density ``2 omega r exp(-omega r^2)``. With
    ``t = b/omega`` the statistics reduce to

    * mean            ``1/(1+t)``
    * variance        ``t^2 / ((1+2t)(1+t)^2)``
    * skewness        ``2(t-1) sqrt(1+2t) / (1+3t)``
    * kurtosis        ``3(2t^2 - t + 3)(1+2t) / ((1+4t)(1+3t))``

    At ``b == omega`` these are exactly the uniform-distribution values
    (1/2, 1/12, 0, 9/5). At ``b == 0`` the variable degenerates to the
    constant 1; the skewness/kurtosis fields then hold the limiting values
    (-2, 9) of the vanishing fluctuation.
    """
    if omega <= 0.0:
        raise ValueError("omega must be positive")
    if b < 0.0:
        raise ValueError("b must be nonnegative")
    t = b / omega
    mean = 1.0 / (1.0 + t)
    variance = t * t / ((1.0 + 2.0 * t) * (1.0 + t) ** 2)
    skewness = 2.0 * (t - 1.0) * math.sqrt(1.0 + 2.0 * t) / (1.0 + 3.0 * t)
    kurtosis = (3.0 * (2.0 * t * t - t + 3.0) * (1.0 + 2.0 * t)
                / ((1.0 + 4.0 * t) * (1.0 + 3.0 * t)))
    return AmplitudeStats(mean=mean, variance=variance, skewness=skewness,
                          kurtosis=kurtosis)


def ead_output_statistics(b: float, omega: float) -> AmplitudeStats:
    """Moments of the activation output amplitude ``v = 1 - exp(-b r^2)``.

    Same variance and kurtosis as :func:`ead_statistics`; mean reflects,
    skewness flips sign.
    """
    s = ead_statistics(b, omega)
    return AmplitudeStats(mean=1.0 - s.mean, variance=s.variance,
                          skewness=-s.skewness, kurtosis=s.kurtosis)


def empirical_amplitude_stats(values: np.ndarray) -> AmplitudeStats:
    """Sample mean/variance/skewness/kurtosis of pooled amplitudes.

    Needs at least 4 samples and nonzero variance.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size < 4:
        raise ValueError("need at least 4 amplitude samples")
    m = float(v.mean())
    c = v - m
    m2 = float(np.mean(c * c))
    if m2 <= 1e-20 * max(1.0, m * m):
        raise ValueError("amplitude distribution is degenerate (zero variance)")
    m3 = float(np.mean(c**3))
    m4 = float(np.mean(c**4))
    return AmplitudeStats(mean=m, variance=m2, skewness=m3 / m2**1.5,
                          kurtosis=m4 / (m2 * m2))


def layer_amplitude_stats(ae: ComplexAutoencoder, dataset) -> list[AmplitudeStats]:
    """Post-activation amplitude statistics per layer, pooled over the
    dataset and all nodes."""
    X = _as_batch(dataset, ae.input_dim)
    _, posts, _ = _forward_cached(ae, X)
    return [empirical_amplitude_stats(np.abs(a)) for a in posts]


# ---------------------------------------------------------------------------
# Persistence (exact for f64 via shortest round-trip decimal repr)
# ---------------------------------------------------------------------------


def _act_to_dict(act: Activation) -> dict:
    doc: dict = {"kind": act.kind}
    if act.b is not None:
        doc["b"] = float(act.b) if act.b.ndim == 0 else [float(v) for v in act.b]
    return doc


def _act_from_dict(doc: dict) -> Activation:
    b = doc.get("b")
    if b is not None:
        b = np.asarray(b, dtype=np.float64)
    return Activation(kind=doc["kind"], b=b)


def ae_to_dict(ae: ComplexAutoencoder) -> dict:
    layers = []
    for layer in ae.layers:
        rows, cols = layer.weights.shape
        layers.append({
            "rows": rows,
            "cols": cols,
            "activation": _act_to_dict(layer.activation),
            "weights_re": layer.weights.real.tolist(),
            "weights_im": layer.weights.imag.tolist(),
            "bias_re": layer.bias.real.tolist(),
            "bias_im": layer.bias.imag.tolist(),
        })
    return {"input_dim": ae.input_dim, "layers": layers}


def ae_from_dict(doc: dict) -> ComplexAutoencoder:
    layers = []
    for ld in doc["layers"]:
        weights = np.asarray(ld["weights_re"], dtype=np.float64) \
            + 1j * np.asarray(ld["weights_im"], dtype=np.float64)
        bias = np.asarray(ld["bias_re"], dtype=np.float64) \
            + 1j * np.asarray(ld["bias_im"], dtype=np.float64)
        if weights.shape != (ld["rows"], ld["cols"]):
            raise ValueError("weight matrix shape disagrees with rows/cols")
        layers.append(DenseLayer(weights=weights, bias=bias,
                                 activation=_act_from_dict(ld["activation"])))
    return ComplexAutoencoder(layers=layers, input_dim=doc["input_dim"])


def save_autoencoder(path, ae: ComplexAutoencoder, extra: dict | None = None) -> None:
    doc = ae_to_dict(ae)
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh)


def load_autoencoder(path) -> tuple[ComplexAutoencoder, dict]:
    """Load a model; returns the autoencoder and any extra top-level keys."""
    with open(path) as fh:
        doc = json.load(fh)
    extras = {k: v for k, v in doc.items() if k not in ("input_dim", "layers")}
    return ae_from_dict(doc), extras
