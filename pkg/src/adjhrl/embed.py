"""Adjacency embedding network: maps goal-space points to a 32-d space where
Euclidean distance, thresholded at eps_k, classifies k-step adjacency.

Trained by contrastive distillation from an adjacency matrix; consumed by the
high-level actor through a differentiable hinge penalty on non-adjacent
subgoals. The penalty trains the actor only: the embedding is frozen while it
is evaluated.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import nets
from .adjacency import AdjacencyMatrix, sample_pairs
from .gridworld import GridState, Subgoal, goal_map

EMBED_DIM = 32
HIDDEN = (128, 128, 128)


def hinge(x: float, k: int) -> float:
    """Constraint relaxation: zero inside the k-step region, linear outside."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return max(x / k - 1.0, 0.0)


@dataclass
class AdjacencyNet:
    net: nets.DenseNet
    k: int
    extent: tuple          # (max x, max y), for input normalization to [-1, 1]
    eps_k: float = 1.0
    delta: float = 0.2


def make_adjacency_net(k: int, extent, rng, eps_k: float = 1.0,
                       delta: float = 0.2) -> AdjacencyNet:
    net = nets.dense((2,) + HIDDEN + (EMBED_DIM,),
                     ("relu", "relu", "relu", "identity"), rng)
    return AdjacencyNet(net, k, (float(extent[0]), float(extent[1])), eps_k, delta)


def normalize_goals(psi: AdjacencyNet, goals: np.ndarray) -> np.ndarray:
    ext = np.array(psi.extent)
    return 2.0 * np.asarray(goals, dtype=np.float64) / ext - 1.0


def embed(psi: AdjacencyNet, g: Subgoal) -> np.ndarray:
    return nets.forward(psi.net, normalize_goals(psi, g.as_array()))


def embed_many(psi: AdjacencyNet, goals: np.ndarray) -> np.ndarray:
    """Embed an (n, 2) array of goal points."""
    return nets.forward(psi.net, normalize_goals(psi, goals))


def approx_distance(psi: AdjacencyNet, g1: Subgoal, g2: Subgoal) -> float:
    """Parameterized stand-in for the shortest transition distance:
    (k / eps_k) * ||psi(g1) - psi(g2)||."""
    return psi.k / psi.eps_k * float(np.linalg.norm(embed(psi, g1) - embed(psi, g2)))


def contrastive_loss(psi: AdjacencyNet, pairs):
    """Mean two-sided hinge over a batch of labeled pairs.

    Adjacent pairs are penalized for embedding distance above eps_k,
    non-adjacent pairs for distance below eps_k + delta. Returns the loss and
    its gradients with respect to the network parameters.
    """
    if not pairs:
        raise ValueError("empty batch")
    n = len(pairs)
    gi = np.array([p.g_i for p in pairs], dtype=np.float64)
    gj = np.array([p.g_j for p in pairs], dtype=np.float64)
    labels = np.array([p.label for p in pairs], dtype=np.float64)

    ei, cache_i = nets.forward_cache(psi.net, normalize_goals(psi, gi))
    ej, cache_j = nets.forward_cache(psi.net, normalize_goals(psi, gj))
    diff = ei - ej
    dist = np.linalg.norm(diff, axis=1)

    pos = np.maximum(dist - psi.eps_k, 0.0)
    neg = np.maximum(psi.eps_k + psi.delta - dist, 0.0)
    loss = float(np.mean(labels * pos + (1.0 - labels) * neg))

    # d loss / d dist, then through dist = ||ei - ej||
    ddist = (labels * (pos > 0.0) - (1.0 - labels) * (neg > 0.0)) / n
    safe = np.where(dist > 0.0, dist, 1.0)
    up_i = (ddist / safe)[:, None] * diff
    grads_i, _ = nets.backward(psi.net, cache_i, up_i)
    grads_j, _ = nets.backward(psi.net, cache_j, -up_i)
    return loss, nets.add_grads(grads_i, grads_j)


def make_holdout(m: AdjacencyMatrix, fraction: float, rng) -> frozenset:
    """Seeded held-out split: a fraction of the unordered off-diagonal cell
    pairs, never to be sampled for training."""
    n = m.n_cells
    ii, jj = np.triu_indices(n, k=1)
    take = rng.random(ii.size) < fraction
    return frozenset(zip(ii[take].tolist(), jj[take].tolist()))


def distill(psi: AdjacencyNet, m: AdjacencyMatrix, epochs: int, rng,
            batch_size: int = 64, lr: float = 2e-4,
            batches_per_epoch: int | None = None, holdout=None,
            balanced: bool = False):
    """Train the embedding on pairs sampled from the matrix.

    One epoch covers the explored pair set once in expectation. Returns the
    per-epoch mean loss. A matrix whose sampled pairs are all one class still
    trains (the loss is attainable); a warning is attached to the history in
    that case.
    """
    if m.n_cells < 2:
        raise ValueError("matrix too small to distill from")
    if batches_per_epoch is None:
        batches_per_epoch = max(1, int(np.ceil(m.n_cells ** 2 / batch_size)))
    off_diag = m.bits[~np.eye(m.n_cells, dtype=bool)]
    single_class = off_diag.size == 0 or off_diag.min() == off_diag.max()
    opt = nets.adam_init(psi.net, lr=lr)
    history = []
    for _ in range(epochs):
        total = 0.0
        for _ in range(batches_per_epoch):
            pairs = sample_pairs(m, batch_size, rng, exclude=holdout,
                                 balanced=balanced)
            loss, grads = contrastive_loss(psi, pairs)
            nets.adam_step(psi.net, grads, opt)
            total += loss
        history.append(total / batches_per_epoch)
    return {"epoch_loss": history, "single_class": single_class}


def distill_from_pairs(psi: AdjacencyNet, sampler, epochs: int,
                       batches_per_epoch: int, batch_size: int = 64,
                       lr: float = 2e-4):
    """Distillation loop fed by an arbitrary pair sampler (the no-matrix
    baseline plugs its trajectory sampler in here)."""
    opt = nets.adam_init(psi.net, lr=lr)
    history = []
    for _ in range(epochs):
        total = 0.0
        for _ in range(batches_per_epoch):
            loss, grads = contrastive_loss(psi, sampler(batch_size))
            nets.adam_step(psi.net, grads, opt)
            total += loss
        history.append(total / batches_per_epoch)
    return {"epoch_loss": history}


def classify_pairs(psi: AdjacencyNet, m: AdjacencyMatrix, id_pairs):
    """Predicted and true labels for the given (i, j) cell-id pairs.

    Prediction: adjacent iff embedding distance <= eps_k.
    """
    emb = embed_many(psi, np.array(m.cells, dtype=np.float64))
    bits = m.bits
    ii = np.array([p[0] for p in id_pairs], dtype=np.int64)
    jj = np.array([p[1] for p in id_pairs], dtype=np.int64)
    dist = np.linalg.norm(emb[ii] - emb[jj], axis=1)
    pred = (dist <= psi.eps_k).astype(np.uint8)
    true = bits[ii, jj]
    return pred, true


def pair_accuracy(pred, true):
    """(plain accuracy, balanced accuracy); balanced is the mean of per-class
    recalls and equals plain accuracy when only one class is present."""
    acc = float(np.mean(pred == true))
    rates = []
    for c in (0, 1):
        mask = true == c
        if mask.any():
            rates.append(float(np.mean(pred[mask] == c)))
    return acc, float(np.mean(rates))


def evaluate_split(psi: AdjacencyNet, m: AdjacencyMatrix, holdout: frozenset):
    """Accuracy on training pairs (all off-diagonal pairs not held out) and on
    the held-out pairs."""
    n = m.n_cells
    ii, jj = np.triu_indices(n, k=1)
    all_pairs = list(zip(ii.tolist(), jj.tolist()))
    train_pairs = [p for p in all_pairs if p not in holdout]
    held = sorted(holdout)
    out = {}
    out["train"] = pair_accuracy(*classify_pairs(psi, m, train_pairs))
    if held:
        out["holdout"] = pair_accuracy(*classify_pairs(psi, m, held))
    return out


def adjacency_loss(psi: AdjacencyNet, s: GridState, g: Subgoal):
    """Hinge on the embedding distance between the current state's goal-space
    image and the subgoal. Returns (value, gradient wrt the subgoal); the
    embedding parameters receive no update from this path.
    """
    value, dg = adjacency_loss_batch(psi,
                                     goal_map(s).as_array()[None, :],
                                     g.as_array()[None, :])
    return float(value[0]), dg[0]


def adjacency_loss_batch(psi: AdjacencyNet, state_goals: np.ndarray,
                         subgoals: np.ndarray):
    """Vectorized adjacency loss for (n, 2) arrays of state projections and
    subgoals. Returns per-row losses and d loss / d subgoal."""
    es = nets.forward(psi.net, normalize_goals(psi, state_goals))
    eg, cache = nets.forward_cache(psi.net, normalize_goals(psi, subgoals))
    diff = es - eg
    dist = np.linalg.norm(diff, axis=1)
    losses = np.maximum(dist - psi.eps_k, 0.0)
    active = losses > 0.0
    safe = np.where(dist > 0.0, dist, 1.0)
    upstream = -(active / safe)[:, None] * diff
    _, dnorm = nets.backward(psi.net, cache, upstream)
    # chain through the input normalization g -> 2 g / extent - 1
    dg = dnorm * (2.0 / np.array(psi.extent))
    return losses, dg


# ---------------------------------------------------------------------------
# checkpointing: net blob plus a JSON sidecar carrying the scaling constants

def save_adjacency_net(psi: AdjacencyNet, path_prefix: str):
    nets.save_net(psi.net, f"{path_prefix}.ckpt")
    nets.save_net_meta(f"{path_prefix}.json", {
        "eps_k": psi.eps_k, "delta": psi.delta, "k": psi.k,
        "extent": list(psi.extent),
    })


def load_adjacency_net(path_prefix: str) -> AdjacencyNet:
    net = nets.load_net(f"{path_prefix}.ckpt")
    meta = nets.load_net_meta(f"{path_prefix}.json")
    return AdjacencyNet(net, int(meta["k"]), tuple(meta["extent"]),
                        float(meta["eps_k"]), float(meta["delta"]))
