"""Two-level policy: a TD3-style high level that emits a subgoal every k
steps, trained with the differentiable adjacency penalty in its actor
objective, and an advantage actor-critic low level that chases subgoals for
binary intrinsic reward.

Subgoals are handled as absolute desired positions. The actor emits a
tanh-scaled offset from the current position; the offset form and the
absolute form are interchangeable through the per-step goal transition,
which keeps the absolute desired position constant across a window.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np

from . import nets
from .embed import AdjacencyNet, adjacency_loss_batch
from .gridworld import EnvConfig, GridState, Subgoal

POLICY_HIDDEN = (300, 300)


def state_features(env: EnvConfig, s: GridState) -> np.ndarray:
    """Normalized observation: position in [-1, 1], plus the key flag as
    +-1 on Key-Chest."""
    ex, ey = env.layout.extent
    feats = [2.0 * s.x / ex - 1.0, 2.0 * s.y / ey - 1.0]
    if env.reward_scheme == "keychest_sparse":
        feats.append(1.0 if s.has_key else -1.0)
    return np.array(feats, dtype=np.float64)


def state_dim(env: EnvConfig) -> int:
    return 3 if env.reward_scheme == "keychest_sparse" else 2


def normalize_goal(env: EnvConfig, g: np.ndarray) -> np.ndarray:
    return 2.0 * g / np.array(env.layout.extent) - 1.0


def relative_goal_features(env: EnvConfig, s: GridState, g: Subgoal) -> np.ndarray:
    ext = np.array(env.layout.extent)
    return (g.as_array() - np.array([s.x, s.y], dtype=np.float64)) / ext


# ---------------------------------------------------------------------------
# goal transition and intrinsic reward

def goal_transition(g: Subgoal, s_prev: GridState, s_now: GridState) -> Subgoal:
    """Per-step update of a directional subgoal: g + s_prev - s_now.

    Shifts the relative goal by exactly the agent's displacement, so the
    absolute desired position s_prev + g stays fixed within a window.
    """
    return Subgoal(g.gx + s_prev.x - s_now.x, g.gy + s_prev.y - s_now.y)


def to_absolute(g_rel: Subgoal, s: GridState) -> Subgoal:
    return Subgoal(g_rel.gx + s.x, g_rel.gy + s.y)


def to_relative(g_abs: Subgoal, s: GridState) -> Subgoal:
    return Subgoal(g_abs.gx - s.x, g_abs.gy - s.y)


def intrinsic_reward(s_next: GridState, g: Subgoal, mode: str = "binary") -> float:
    """Subgoal-reaching reward against the absolute desired position.

    Binary: 1 when both coordinate deviations are at most 0.5 (boundary
    inclusive). Dense: negative Euclidean distance.
    """
    dx = abs(s_next.x - g.gx)
    dy = abs(s_next.y - g.gy)
    if mode == "binary":
        return 1.0 if dx <= 0.5 and dy <= 0.5 else 0.0
    if mode == "dense":
        return -float(np.hypot(dx, dy))
    raise ValueError(f"unknown intrinsic reward mode {mode!r}")


# ---------------------------------------------------------------------------
# replay

@dataclass(frozen=True)
class HighLevelTransition:
    s: GridState
    g: Subgoal            # absolute desired position at emission time
    reward: float         # sum of external rewards over the window
    s_next: GridState
    done: bool            # episode ended at this window's close
    truncated: bool = False   # done by step limit or a short terminal window


class ReplayBuffer:
    """Fixed-capacity FIFO ring with uniform sampling."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._items = []
        self._pos = 0

    def add(self, tr: HighLevelTransition):
        if len(self._items) < self.capacity:
            self._items.append(tr)
        else:
            self._items[self._pos] = tr
            self._pos = (self._pos + 1) % self.capacity

    def sample(self, n: int, rng):
        idx = rng.integers(len(self._items), size=n)
        return [self._items[i] for i in idx]

    def __len__(self):
        return len(self._items)


# ---------------------------------------------------------------------------
# high level: TD3 over subgoal emissions

@dataclass
class HighLevelPolicy:
    actor: nets.DenseNet
    critic1: nets.DenseNet
    critic2: nets.DenseNet
    target_actor: nets.DenseNet
    target_critic1: nets.DenseNet
    target_critic2: nets.DenseNet
    actor_opt: nets.AdamState
    critic1_opt: nets.AdamState
    critic2_opt: nets.AdamState
    scale: np.ndarray          # tanh output -> offset, per axis
    sigma: float               # exploration noise, in grid cells
    eta: float                 # adjacency loss coefficient
    gamma: float = 0.99
    tau: float = 0.001
    policy_freq: int = 2
    policy_noise: float = 1.0  # target policy smoothing, in grid cells
    noise_clip: float = 2.0
    update_count: int = 0


def make_high_level(env: EnvConfig, rng, sigma: float, eta: float,
                    actor_lr: float = 1e-4, critic_lr: float = 1e-3,
                    gamma: float = 0.99, tau: float = 0.001,
                    policy_freq: int = 2, policy_noise: float = 1.0,
                    noise_clip: float = 2.0) -> HighLevelPolicy:
    ds = state_dim(env)
    actor = nets.dense((ds,) + POLICY_HIDDEN + (2,), ("relu", "relu", "tanh"), rng)
    critic1 = nets.dense((ds + 2,) + POLICY_HIDDEN + (1,),
                         ("relu", "relu", "identity"), rng)
    critic2 = nets.dense((ds + 2,) + POLICY_HIDDEN + (1,),
                         ("relu", "relu", "identity"), rng)
    return HighLevelPolicy(
        actor, critic1, critic2,
        nets.clone(actor), nets.clone(critic1), nets.clone(critic2),
        nets.adam_init(actor, actor_lr),
        nets.adam_init(critic1, critic_lr),
        nets.adam_init(critic2, critic_lr),
        scale=np.array(env.layout.extent), sigma=sigma, eta=eta, gamma=gamma,
        tau=tau, policy_freq=policy_freq, policy_noise=policy_noise,
        noise_clip=noise_clip)


def actor_subgoal(hl: HighLevelPolicy, env: EnvConfig, s: GridState) -> np.ndarray:
    """Deterministic actor output as an absolute desired position (unclamped)."""
    u = nets.forward(hl.actor, state_features(env, s))
    return np.array([s.x, s.y], dtype=np.float64) + u * hl.scale


def emit_subgoal(hl: HighLevelPolicy, env: EnvConfig, s: GridState,
                 explore: bool, rng) -> Subgoal:
    """Subgoal for a new window: actor offset from the current position, plus
    Gaussian exploration noise when exploring, clamped to the grid extents."""
    g = actor_subgoal(hl, env, s)
    if explore:
        g = g + rng.normal(0.0, hl.sigma, size=2)
    g = np.clip(g, 0.0, hl.scale)
    return Subgoal.from_array(g)


def _critic_input(env, feats, goals):
    return np.concatenate([feats, normalize_goal(env, goals)], axis=1)


def train_high_level(hl: HighLevelPolicy, psi: AdjacencyNet,
                     buffer: ReplayBuffer, env: EnvConfig, rng,
                     batch_size: int = 64):
    """One TD3 step: both critics toward the clipped twin target, actor (every
    policy_freq steps) on -Q1 plus eta times the adjacency penalty, computed
    with psi frozen. Returns stats, or None when the buffer is too small."""
    if len(buffer) < batch_size:
        warnings.warn("replay buffer smaller than batch; skipping update")
        return None
    batch = buffer.sample(batch_size, rng)
    n = batch_size
    feats = np.array([state_features(env, t.s) for t in batch])
    pos = np.array([[t.s.x, t.s.y] for t in batch], dtype=np.float64)
    goals = np.array([[t.g.gx, t.g.gy] for t in batch])
    rewards = np.array([t.reward for t in batch])
    nfeats = np.array([state_features(env, t.s_next) for t in batch])
    npos = np.array([[t.s_next.x, t.s_next.y] for t in batch], dtype=np.float64)
    terminal = np.array([t.done and not t.truncated for t in batch], dtype=np.float64)

    # twin-critic target with smoothed target-policy action
    u_t = nets.forward(hl.target_actor, nfeats)
    next_goal = npos + u_t * hl.scale
    noise = np.clip(rng.normal(0.0, hl.policy_noise, size=(n, 2)),
                    -hl.noise_clip, hl.noise_clip)
    next_goal = np.clip(next_goal + noise, 0.0, hl.scale)
    q1_t = nets.forward(hl.target_critic1, _critic_input(env, nfeats, next_goal))
    q2_t = nets.forward(hl.target_critic2, _critic_input(env, nfeats, next_goal))
    y = rewards + hl.gamma * (1.0 - terminal) * np.minimum(q1_t, q2_t)[:, 0]

    critic_in = _critic_input(env, feats, goals)
    critic_loss = 0.0
    for critic, opt in ((hl.critic1, hl.critic1_opt), (hl.critic2, hl.critic2_opt)):
        q, cache = nets.forward_cache(critic, critic_in)
        err = q[:, 0] - y
        critic_loss += float(np.mean(err ** 2))
        grads, _ = nets.backward(critic, cache, (2.0 * err / n)[:, None])
        nets.adam_step(critic, grads, opt)

    hl.update_count += 1
    stats = {"critic_loss": critic_loss / 2.0}
    if hl.update_count % hl.policy_freq == 0:
        u, cache_a = nets.forward_cache(hl.actor, feats)
        g_pi = pos + u * hl.scale
        q, cache_q = nets.forward_cache(hl.critic1, _critic_input(env, feats, g_pi))
        _, dinput = nets.backward(hl.critic1, cache_q, np.full((n, 1), -1.0 / n))
        dgoal = dinput[:, -2:] * (2.0 / hl.scale)   # through goal normalization

        adj, dgoal_adj = adjacency_loss_batch(psi, pos, g_pi)
        dgoal = dgoal + (hl.eta / n) * dgoal_adj

        grads_a, _ = nets.backward(hl.actor, cache_a, dgoal * hl.scale)
        nets.adam_step(hl.actor, grads_a, hl.actor_opt)

        nets.soft_update(hl.target_actor, hl.actor, hl.tau)
        nets.soft_update(hl.target_critic1, hl.critic1, hl.tau)
        nets.soft_update(hl.target_critic2, hl.critic2, hl.tau)

        stats["actor_q"] = float(np.mean(q))
        stats["adj_loss_mean"] = float(np.mean(adj))
        stats["adj_zero_frac"] = float(np.mean(adj == 0.0))
    return stats


def negreward_wrap(hl: HighLevelPolicy, psi: AdjacencyNet,
                   tr: HighLevelTransition) -> HighLevelTransition:
    """Reward-penalty variant of the constraint: subtract 1 from the stored
    high-level reward when the emitted subgoal is judged non-adjacent. Used
    with eta = 0, so the actor objective carries no adjacency gradient."""
    loss, _ = adjacency_loss_batch(
        psi, np.array([[tr.s.x, tr.s.y]], dtype=np.float64),
        np.array([[tr.g.gx, tr.g.gy]]))
    if loss[0] > 0.0:
        return replace(tr, reward=tr.reward - 1.0)
    return tr


# ---------------------------------------------------------------------------
# low level: advantage actor-critic over primitive actions

@dataclass
class LowLevelPolicy:
    actor: nets.DenseNet
    critic: nets.DenseNet
    actor_opt: nets.AdamState
    critic_opt: nets.AdamState
    gamma: float = 0.99
    entropy_weight: float = 0.01
    rollout_n: int = 5


def make_low_level(env: EnvConfig, rng, actor_lr: float = 1e-4,
                   critic_lr: float = 1e-4, gamma: float = 0.99,
                   entropy_weight: float = 0.01, rollout_n: int = 5) -> LowLevelPolicy:
    din = state_dim(env) + 2
    actor = nets.dense((din,) + POLICY_HIDDEN + (4,), ("relu", "relu", "identity"), rng)
    critic = nets.dense((din,) + POLICY_HIDDEN + (1,), ("relu", "relu", "identity"), rng)
    return LowLevelPolicy(actor, critic,
                          nets.adam_init(actor, actor_lr),
                          nets.adam_init(critic, critic_lr),
                          gamma=gamma, entropy_weight=entropy_weight,
                          rollout_n=rollout_n)


def low_level_input(env: EnvConfig, s: GridState, g: Subgoal) -> np.ndarray:
    return np.concatenate([state_features(env, s),
                           relative_goal_features(env, s, g)])


def _log_softmax(logits):
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def action_probs(ll: LowLevelPolicy, x: np.ndarray) -> np.ndarray:
    return np.exp(_log_softmax(nets.forward(ll.actor, x)))


def sample_action(ll: LowLevelPolicy, x: np.ndarray, rng) -> int:
    p = action_probs(ll, x)
    return int(np.searchsorted(np.cumsum(p), rng.random()))


def greedy_action(ll: LowLevelPolicy, x: np.ndarray) -> int:
    return int(np.argmax(action_probs(ll, x)))


def train_low_level(ll: LowLevelPolicy, inputs: np.ndarray, actions: np.ndarray,
                    rewards: np.ndarray, bootstrap: float):
    """A2C update on one on-policy segment.

    The critic regresses to n-step intrinsic returns bootstrapped with the
    given terminal value; the actor follows advantage-weighted log-probability
    gradients plus an entropy bonus.
    """
    n = len(actions)
    returns = np.empty(n)
    acc = bootstrap
    for t in range(n - 1, -1, -1):
        acc = rewards[t] + ll.gamma * acc
        returns[t] = acc

    v, cache_v = nets.forward_cache(ll.critic, inputs)
    v = v[:, 0]
    critic_loss = float(np.mean((v - returns) ** 2))
    grads_v, _ = nets.backward(ll.critic, cache_v, (2.0 * (v - returns) / n)[:, None])
    nets.adam_step(ll.critic, grads_v, ll.critic_opt)

    adv = returns - v
    logits, cache_a = nets.forward_cache(ll.actor, inputs)
    logp = _log_softmax(logits)
    probs = np.exp(logp)
    entropy = -(probs * logp).sum(axis=1)
    onehot = np.zeros_like(probs)
    onehot[np.arange(n), actions] = 1.0
    # d/dlogits of mean(-adv * log pi[a] - w * entropy)
    dlogits = (adv[:, None] * (probs - onehot)
               + ll.entropy_weight * probs * (logp + entropy[:, None])) / n
    grads_a, _ = nets.backward(ll.actor, cache_a, dlogits)
    nets.adam_step(ll.actor, grads_a, ll.actor_opt)

    return {"critic_loss": critic_loss,
            "entropy": float(np.mean(entropy)),
            "mean_intrinsic": float(np.mean(rewards))}
