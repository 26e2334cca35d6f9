"""Small dense networks on numpy: forward/backward passes, Adam, checkpoints.

Everything is float64 and fully deterministic given a seeded Generator.
Inputs may be single vectors (d,) or batches (n, d); gradients follow suit.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

ACTIVATIONS = ("relu", "tanh", "identity")

# module-wide forward counter, used by the harness tests to audit that the
# warm-up phase never touches a policy network
forward_calls = 0


@dataclass
class DenseNet:
    """Chain of affine layers, each followed by an elementwise activation."""

    weights: list  # per layer, shape (fan_in, fan_out)
    biases: list   # per layer, shape (fan_out,)
    activations: tuple

    @property
    def sizes(self):
        return (self.weights[0].shape[0],) + tuple(w.shape[1] for w in self.weights)

    def n_params(self):
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))


@dataclass
class Gradients:
    weights: list
    biases: list


def dense(sizes, activations, rng) -> DenseNet:
    """New network with uniform +-1/sqrt(fan_in) init for weights and biases."""
    if len(activations) != len(sizes) - 1:
        raise ValueError("need one activation per layer")
    for a in activations:
        if a not in ACTIVATIONS:
            raise ValueError(f"unknown activation {a!r}")
    ws, bs = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        ws.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        bs.append(rng.uniform(-bound, bound, size=fan_out))
    return DenseNet(ws, bs, tuple(activations))


def _act(name, z):
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "tanh":
        return np.tanh(z)
    return z


def _act_grad(name, z, post):
    # relu at exactly 0 uses subgradient 0 (strict inequality)
    if name == "relu":
        return (z > 0.0).astype(np.float64)
    if name == "tanh":
        return 1.0 - post * post
    return np.ones_like(z)


def forward(net: DenseNet, x):
    y, _ = forward_cache(net, x)
    return y


def forward_cache(net: DenseNet, x):
    """Run the net, returning the output and the cache needed by backward()."""
    global forward_calls
    forward_calls += 1
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    a = x.reshape(1, -1) if single else x
    if a.shape[1] != net.weights[0].shape[0]:
        raise ValueError(
            f"input width {a.shape[1]} != first layer fan_in {net.weights[0].shape[0]}")
    inputs, preacts, posts = [a], [], []
    for w, b, act in zip(net.weights, net.biases, net.activations):
        z = a @ w + b
        a = _act(act, z)
        preacts.append(z)
        posts.append(a)
        inputs.append(a)
    y = a[0] if single else a
    return y, (single, inputs, preacts, posts)


def backward(net: DenseNet, cache, grad_out):
    """Reverse-mode pass. Returns (Gradients, grad wrt the input)."""
    single, inputs, preacts, posts = cache
    g = np.asarray(grad_out, dtype=np.float64)
    if single:
        g = g.reshape(1, -1)
    dws = [None] * len(net.weights)
    dbs = [None] * len(net.biases)
    for l in range(len(net.weights) - 1, -1, -1):
        dz = g * _act_grad(net.activations[l], preacts[l], posts[l])
        dws[l] = inputs[l].T @ dz
        dbs[l] = dz.sum(axis=0)
        g = dz @ net.weights[l].T
    grad_in = g[0] if single else g
    return Gradients(dws, dbs), grad_in


def add_grads(a: Gradients, b: Gradients) -> Gradients:
    return Gradients([x + y for x, y in zip(a.weights, b.weights)],
                     [x + y for x, y in zip(a.biases, b.biases)])


def scale_grads(g: Gradients, c: float) -> Gradients:
    return Gradients([c * w for w in g.weights], [c * b for b in g.biases])


@dataclass
class AdamState:
    """Per-parameter first/second moments plus the shared step counter."""

    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m_w: list = field(default_factory=list)
    v_w: list = field(default_factory=list)
    m_b: list = field(default_factory=list)
    v_b: list = field(default_factory=list)


def adam_init(net: DenseNet, lr, beta1=0.9, beta2=0.999, eps=1e-8) -> AdamState:
    st = AdamState(lr=lr, beta1=beta1, beta2=beta2, eps=eps)
    st.m_w = [np.zeros_like(w) for w in net.weights]
    st.v_w = [np.zeros_like(w) for w in net.weights]
    st.m_b = [np.zeros_like(b) for b in net.biases]
    st.v_b = [np.zeros_like(b) for b in net.biases]
    return st


def adam_step(net: DenseNet, grads: Gradients, st: AdamState):
    """One bias-corrected Adam update, applied in place to net and state."""
    st.t += 1
    step = st.lr / (1.0 - st.beta1 ** st.t)
    inv_sc2 = 1.0 / np.sqrt(1.0 - st.beta2 ** st.t)
    for params, gs, ms, vs in ((net.weights, grads.weights, st.m_w, st.v_w),
                               (net.biases, grads.biases, st.m_b, st.v_b)):
        for p, g, m, v in zip(params, gs, ms, vs):
            m *= st.beta1
            m += (1.0 - st.beta1) * g
            v *= st.beta2
            gg = np.multiply(g, g)
            gg *= 1.0 - st.beta2
            v += gg
            denom = np.sqrt(v, out=gg)
            denom *= inv_sc2
            denom += st.eps
            np.divide(m, denom, out=denom)
            denom *= step
            p -= denom


def clone(net: DenseNet) -> DenseNet:
    return DenseNet([w.copy() for w in net.weights],
                    [b.copy() for b in net.biases], net.activations)


def soft_update(target: DenseNet, online: DenseNet, tau: float):
    """target <- (1-tau)*target + tau*online, in place."""
    for tw, w in zip(target.weights, online.weights):
        tw *= 1.0 - tau
        tw += tau * w
    for tb, b in zip(target.biases, online.biases):
        tb *= 1.0 - tau
        tb += tau * b


# ---------------------------------------------------------------------------
# checkpoint format: magic, version, layer count, sizes, activation codes,
# then the raw row-major float64 parameters (W then b, layer by layer)

_MAGIC = b"DNET"
_FORMAT_VERSION = 1
_ACT_CODE = {name: i for i, name in enumerate(ACTIVATIONS)}


def save_net(net: DenseNet, path):
    sizes = net.sizes
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<II", _FORMAT_VERSION, len(net.weights)))
        f.write(struct.pack(f"<{len(sizes)}I", *sizes))
        f.write(bytes(_ACT_CODE[a] for a in net.activations))
        for w, b in zip(net.weights, net.biases):
            f.write(np.ascontiguousarray(w, dtype=np.float64).tobytes())
            f.write(np.ascontiguousarray(b, dtype=np.float64).tobytes())


def load_net(path) -> DenseNet:
    with open(path, "rb") as f:
        if f.read(4) != _MAGIC:
            raise ValueError(f"{path}: not a net checkpoint")
        version, n_layers = struct.unpack("<II", f.read(8))
        if version != _FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version {version}")
        sizes = struct.unpack(f"<{n_layers + 1}I", f.read(4 * (n_layers + 1)))
        acts = tuple(ACTIVATIONS[c] for c in f.read(n_layers))
        ws, bs = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            ws.append(np.frombuffer(f.read(8 * fan_in * fan_out),
                                    dtype=np.float64).reshape(fan_in, fan_out).copy())
            bs.append(np.frombuffer(f.read(8 * fan_out), dtype=np.float64).copy())
    return DenseNet(ws, bs, acts)


def save_net_meta(path, meta: dict):
    with open(path, "w") as f:
        json.dump(meta, f, sort_keys=True, indent=1)
        f.write("\n")


def load_net_meta(path) -> dict:
    with open(path) as f:
        return json.load(f)


# ---------------------------------------------------------------------------
# finite-difference gradient verification

def numeric_grad(loss_fn, net: DenseNet, layer: int, kind: str, index, h=1e-5):
    """Central finite difference of loss_fn(net) wrt one parameter entry."""
    params = net.weights[layer] if kind == "w" else net.biases[layer]
    orig = params[index]
    params[index] = orig + h
    hi = loss_fn(net)
    params[index] = orig - h
    lo = loss_fn(net)
    params[index] = orig
    return (hi - lo) / (2.0 * h)


def gradcheck(loss_and_grads, net: DenseNet, rng, n_coords=20, h=1e-5):
    """Compare analytic and central-difference gradients at sampled coordinates.

    loss_and_grads(net) must return (scalar loss, Gradients). Returns the
    maximum relative error |analytic - numeric| / (|analytic| + 1e-8) over
    the sampled coordinates.

    Central differences are only valid where the loss is locally smooth; a
    probe that straddles a relu kink is detected by comparing estimates at h
    and h/2 (they disagree at a kink, while a genuinely wrong analytic
    gradient still fails against the consistent pair) and resampled.
    """
    _, grads = loss_and_grads(net)

    def loss_only(n):
        return loss_and_grads(n)[0]

    worst = 0.0
    checked = 0
    attempts = 0
    while checked < n_coords and attempts < 20 * n_coords:
        attempts += 1
        layer = int(rng.integers(len(net.weights)))
        if rng.random() < 0.5 or net.weights[layer].size == 0:
            kind, arr, analytic = "b", net.biases[layer], grads.biases[layer]
            index = (int(rng.integers(arr.size)),)
        else:
            kind, arr, analytic = "w", net.weights[layer], grads.weights[layer]
            flat = int(rng.integers(arr.size))
            index = np.unravel_index(flat, arr.shape)
        num = numeric_grad(loss_only, net, layer, kind, index, h=h)
        num_half = numeric_grad(loss_only, net, layer, kind, index, h=h / 2)
        if abs(num - num_half) > 1e-4 * (abs(num) + abs(num_half)) + 1e-12:
            continue  # non-smooth probe, finite differences meaningless here
        err = abs(analytic[index] - num) / (abs(analytic[index]) + 1e-8)
        worst = max(worst, err)
        checked += 1
    return worst
