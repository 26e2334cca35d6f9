"""Experiment orchestration: seeded runs of the full training procedure
(random-policy warm-up, adjacency matrix construction, embedding
pre-training, then the episode loop with periodic matrix updates and
embedding fine-tuning), the ablation variants, metrics files, and cross-seed
curve aggregation.

A run is a pure function of (config, seed): metrics and eval files are
byte-identical across repeats. Wall-clock timings go to a separate run log
that is excluded from that guarantee.
"""
from __future__ import annotations

import dataclasses
import hashlib
import json
import os
import time
from dataclasses import dataclass

import numpy as np

from . import agent as ag
from . import embed as em
from . import nets
from .adjacency import (AdjacencyMatrix, Trajectory, TrajectoryBuffer,
                        matrix_from_perfect, sample_pairs_noadj, update_matrix)
from .gridworld import (ACTION_DELTAS, N_ACTIONS, EnvConfig, goal_map,
                        grid_to_mdp, is_success, make_env, reset, step)
from .oracle import perfect_adjacency_matrix, shortest_transition_distance

VARIANTS = ("hrac", "hrac_o", "noadj", "negreward", "eta_sweep")


@dataclass
class RunConfig:
    env: str = "keychest"
    variant: str = "hrac"
    noise: float = 0.25
    max_steps: int = 0              # 0: environment default
    total_episodes: int = 1000
    seeds: tuple = (0, 1, 2, 3, 4)
    # hierarchy
    k: int = 10
    eta: float = 20.0
    eta_values: tuple = (1.0, 5.0, 10.0, 20.0)
    sigma: float = 5.0              # subgoal exploration noise (3.0 on maze)
    reward_scale: float = 1.0
    # high-level TD3
    hl_actor_lr: float = 0.0001
    hl_critic_lr: float = 0.001
    replay_size: int = 20000        # 10000 on maze
    batch_size: int = 64
    tau: float = 0.001
    policy_freq: int = 2
    hl_gamma: float = 0.99
    policy_noise: float = 1.0
    noise_clip: float = 2.0
    # low-level A2C
    ll_actor_lr: float = 0.0001
    ll_critic_lr: float = 0.0001
    entropy_weight: float = 0.01
    ll_gamma: float = 0.99
    rollout_n: int = 5
    intrinsic: str = "binary"
    # adjacency matrix and embedding training
    adj_lr: float = 0.0002
    adj_batch: int = 64
    eps_k: float = 1.0
    delta: float = 0.2
    warmup_steps: int = 50000
    pretrain_epochs: int = 50
    online_epochs: int = 25
    online_freq_steps: int = 50000
    online_freq_episodes: int = 0   # 0: use the step trigger
    batches_per_epoch: int = 0      # 0: cover the explored pair set once
    balanced_pairs: bool = False
    noadj_gap_factor: int = 4
    # evaluation protocol
    eval_every: int = 25
    eval_episodes: int = 10

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")


def config_to_text(cfg: RunConfig) -> str:
    lines = []
    for f in dataclasses.fields(RunConfig):
        v = getattr(cfg, f.name)
        if isinstance(v, tuple):
            v = ",".join(str(x) for x in v)
        lines.append(f"{f.name} = {v}")
    return "\n".join(lines) + "\n"


def config_from_text(text: str) -> RunConfig:
    """Parse the flat key = value config format; unknown keys are rejected."""
    fields = {f.name: f for f in dataclasses.fields(RunConfig)}
    defaults = RunConfig()
    kwargs = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in fields:
            raise ValueError(f"line {lineno}: unknown config key {key!r}")
        default = getattr(defaults, key)
        if isinstance(default, bool):
            if value.lower() not in ("true", "false"):
                raise ValueError(f"line {lineno}: {key} expects true/false")
            kwargs[key] = value.lower() == "true"
        elif isinstance(default, int):
            kwargs[key] = int(value)
        elif isinstance(default, float):
            kwargs[key] = float(value)
        elif isinstance(default, tuple):
            parts = [p for p in value.split(",") if p.strip()]
            cast = float if key == "eta_values" else int
            kwargs[key] = tuple(cast(p) for p in parts)
        else:
            kwargs[key] = value
    return RunConfig(**kwargs)


def load_config(path: str | None, overrides: dict | None = None) -> RunConfig:
    if path is None:
        cfg = RunConfig()
    else:
        with open(path) as f:
            cfg = config_from_text(f.read())
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    return cfg


def config_dict(cfg: RunConfig) -> dict:
    d = dataclasses.asdict(cfg)
    d["seeds"] = list(cfg.seeds)
    d["eta_values"] = list(cfg.eta_values)
    return d


def config_hash(cfg: RunConfig) -> str:
    blob = json.dumps(config_dict(cfg), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


# ---------------------------------------------------------------------------
# warm-up exploration: a fresh randomly-parameterized policy each episode

REVERSE = {0: 1, 1: 0, 2: 3, 3: 2}


class RandomWalker:
    """Per-episode random exploration policy, drawn from a small family:
    corridor-following momentum walks (turn only when the heading is blocked
    or at a small per-step rate), uniform walks, and direction-biased drift
    walks. The mix of distinct per-episode policies stands in for the diverse
    policy set that the trajectory-based distance approximation relies on.
    No learned networks are involved."""

    def __init__(self, rng):
        u = rng.random()
        self.mode = "corridor" if u < 0.5 else ("uniform" if u < 0.75 else "drift")
        self.heading = int(rng.integers(N_ACTIONS))
        self.turn_p = float(rng.uniform(0.0, 0.08))
        if self.mode == "drift":
            self.cum = np.cumsum(rng.dirichlet([0.35] * N_ACTIONS))

    def act(self, rng, env: EnvConfig, s) -> int:
        if self.mode == "uniform":
            return int(rng.integers(N_ACTIONS))
        if self.mode == "drift":
            return int(np.searchsorted(self.cum, rng.random()))
        free = [a for a in range(N_ACTIONS)
                if env.layout.is_free(s.x + ACTION_DELTAS[a][0],
                                      s.y + ACTION_DELTAS[a][1])]
        if self.heading in free and rng.random() >= self.turn_p:
            return self.heading
        cand = [a for a in free if a != REVERSE[self.heading]] or free
        self.heading = cand[int(rng.integers(len(cand)))] if cand else self.heading
        return self.heading


def collect_random_episodes(env: EnvConfig, rng, buf: TrajectoryBuffer,
                            step_budget: int | None = None,
                            episode_budget: int | None = None) -> int:
    """Roll random-walker episodes until a step or episode budget is hit,
    storing goal-space trajectories. Returns environment steps taken."""
    steps = 0
    episode = 0
    while True:
        if episode_budget is not None and episode >= episode_budget:
            break
        if step_budget is not None and steps >= step_budget:
            break
        s = reset(env, rng)
        cells = [s.pos]
        walker = RandomWalker(rng)
        for t in range(env.max_steps):
            res = step(env, s, walker.act(rng, env, s), rng, t)
            s = res.next_state
            cells.append(s.pos)
            steps += 1
            if res.done or (step_budget is not None and steps >= step_budget):
                break
        buf.add(Trajectory(cells, episode))
        episode += 1
    return steps


def greedy_eval(env: EnvConfig, hl, ll, psi, k: int, episodes: int, rng) -> dict:
    """Greedy evaluation protocol: deterministic subgoals, argmax low-level
    actions, environment stochasticity still active. Also reports the
    fraction of emitted subgoals the embedding judges adjacent."""
    rewards, successes, adj_zero = [], [], []
    for _ in range(episodes):
        s = reset(env, rng)
        total = 0.0
        g_abs = None
        for t in range(env.max_steps):
            if t % k == 0:
                g_abs = ag.emit_subgoal(hl, env, s, False, rng)
                val, _ = em.adjacency_loss(psi, s, g_abs)
                adj_zero.append(1.0 if val == 0.0 else 0.0)
            res = step(env, s, ag.greedy_action(
                ll, ag.low_level_input(env, s, g_abs)), rng, t)
            total += res.reward
            s = res.next_state
            if res.done:
                break
        rewards.append(total)
        successes.append(1.0 if is_success(env, s) else 0.0)
    return {
        "mean_reward": float(np.mean(rewards)),
        "success_rate": float(np.mean(successes)),
        "adj_zero_frac": float(np.mean(adj_zero)),
    }


# ---------------------------------------------------------------------------
# metrics files: CSV with a JSON header line

METRIC_COLUMNS = ("episode", "env_steps", "reward", "success", "adj_loss_mean",
                  "adj_zero_frac", "distill_loss", "matrix_cells", "tbuf_size",
                  "distilled")
EVAL_COLUMNS = ("episode", "env_steps", "mean_reward", "success_rate",
                "adj_zero_frac")


class RunAbort(RuntimeError):
    pass


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def write_table(path: str, header: dict, columns, rows):
    with open(path, "w") as f:
        f.write("# " + json.dumps(header, sort_keys=True) + "\n")
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(_cell(row.get(c)) for c in columns) + "\n")


def read_table(path: str):
    with open(path) as f:
        header = json.loads(f.readline().lstrip("# "))
        columns = f.readline().strip().split(",")
        rows = []
        for line in f:
            vals = line.rstrip("\n").split(",")
            rows.append({c: (None if v == "" else float(v))
                         for c, v in zip(columns, vals)})
    return header, rows


# ---------------------------------------------------------------------------
# the training run

def _finite(name, *values):
    for v in values:
        if v is not None and not np.isfinite(v):
            raise RunAbort(f"non-finite {name}: {v}")


def _make_matrix_streams(seed: int):
    ss = np.random.SeedSequence(seed)
    names = ("env", "warmup", "init", "agent", "distill", "eval")
    return dict(zip(names, (np.random.default_rng(c) for c in ss.spawn(len(names)))))


def _episode_budget_pairs(cfg: RunConfig, m_cells: int) -> int:
    if cfg.batches_per_epoch > 0:
        return cfg.batches_per_epoch
    return max(1, int(np.ceil(m_cells ** 2 / cfg.adj_batch)))


class Run:
    """State of one seeded training run; `execute` drives it to completion."""

    def __init__(self, cfg: RunConfig, seed: int, outdir: str):
        self.cfg = cfg
        self.seed = seed
        self.outdir = outdir
        self.env = make_env(cfg.env, noise=cfg.noise,
                            max_steps=cfg.max_steps or None)
        self.rngs = _make_matrix_streams(seed)
        self.env_steps = 0
        self.metrics_rows = []
        self.eval_rows = []
        self.log_lines = []
        self.last_distill_loss = None
        self.steps_since_update = 0

    def log(self, msg: str):
        self.log_lines.append(f"[{time.strftime('%H:%M:%S')}] {msg}")

    # -- phases -------------------------------------------------------------

    def warmup(self, tbuf: TrajectoryBuffer):
        if self.cfg.variant == "hrac_o":
            return  # the oracle-matrix variant needs no exploration data
        taken = collect_random_episodes(self.env, self.rngs["warmup"], tbuf,
                                        step_budget=self.cfg.warmup_steps)
        self.env_steps += taken
        self.log(f"warmup: {taken} steps, {len(tbuf)} trajectories")

    def build_matrix(self, tbuf: TrajectoryBuffer):
        cfg = self.cfg
        if cfg.variant == "hrac_o":
            mdp, cells = grid_to_mdp(self.env.layout)
            d = shortest_transition_distance(mdp)
            return matrix_from_perfect(cells, perfect_adjacency_matrix(d, cfg.k, symmetric=True), cfg.k)
        if cfg.variant == "noadj":
            return None
        m = AdjacencyMatrix(cfg.k)
        update_matrix(m, tbuf)
        return m

    def pretrain_embedding(self, psi, matrix, tbuf):
        cfg = self.cfg
        rng = self.rngs["distill"]
        if cfg.variant == "noadj":
            cells = {c for tr in tbuf for c in tr.cells}
            bpe = _episode_budget_pairs(cfg, len(cells))
            hist = em.distill_from_pairs(
                psi, lambda n: sample_pairs_noadj(tbuf, n, cfg.k, rng,
                                                  cfg.noadj_gap_factor),
                cfg.pretrain_epochs, bpe, cfg.adj_batch, cfg.adj_lr)
        else:
            hist = em.distill(psi, matrix, cfg.pretrain_epochs, rng,
                              batch_size=cfg.adj_batch, lr=cfg.adj_lr,
                              batches_per_epoch=cfg.batches_per_epoch or None,
                              balanced=cfg.balanced_pairs)
        self.last_distill_loss = hist["epoch_loss"][-1]
        _finite("distillation loss", self.last_distill_loss)
        self.log(f"pre-train: final epoch loss {self.last_distill_loss:.5f}")

    def finetune_embedding(self, psi, matrix, tbuf):
        cfg = self.cfg
        rng = self.rngs["distill"]
        if cfg.variant == "noadj":
            cells = {c for tr in tbuf for c in tr.cells}
            if not tbuf or len(cells) < 2:
                return False
            bpe = _episode_budget_pairs(cfg, len(cells))
            hist = em.distill_from_pairs(
                psi, lambda n: sample_pairs_noadj(tbuf, n, cfg.k, rng,
                                                  cfg.noadj_gap_factor),
                cfg.online_epochs, bpe, cfg.adj_batch, cfg.adj_lr)
        else:
            hist = em.distill(psi, matrix, cfg.online_epochs, rng,
                              batch_size=cfg.adj_batch, lr=cfg.adj_lr,
                              batches_per_epoch=cfg.batches_per_epoch or None,
                              balanced=cfg.balanced_pairs)
        self.last_distill_loss = hist["epoch_loss"][-1]
        _finite("distillation loss", self.last_distill_loss)
        return True

    def training_episode(self, hl, ll, psi, replay):
        """One exploratory episode: low level trains on intrinsic-reward
        segments as it goes, windows land in replay, and the high level takes
        one update per collected window at the end (with the embedding held
        frozen throughout)."""
        cfg, env = self.cfg, self.env
        rng_env, rng_agent = self.rngs["env"], self.rngs["agent"]
        s = reset(env, rng_env)
        cells = [s.pos]
        g_abs = None
        window_start = None
        window_reward = 0.0
        ep_reward = 0.0
        n_windows = 0
        adj_vals = []
        seg_in, seg_a, seg_r = [], [], []
        t = 0
        while True:
            if t % cfg.k == 0:
                g_abs = ag.emit_subgoal(hl, env, s, True, rng_agent)
                window_start = s
                window_reward = 0.0
                val, _ = em.adjacency_loss(psi, s, g_abs)
                adj_vals.append(val)
            x = ag.low_level_input(env, s, g_abs)
            a = ag.sample_action(ll, x, rng_agent)
            res = step(env, s, a, rng_env, t)
            self.env_steps += 1
            ep_reward += res.reward
            window_reward += res.reward * cfg.reward_scale
            seg_in.append(x)
            seg_a.append(a)
            seg_r.append(ag.intrinsic_reward(res.next_state, g_abs, cfg.intrinsic))
            t += 1
            s_next = res.next_state
            window_end = (t % cfg.k == 0) or res.done
            if len(seg_a) >= cfg.rollout_n or res.done or window_end:
                boot = 0.0 if res.done else float(
                    nets.forward(ll.critic, ag.low_level_input(env, s_next, g_abs))[0])
                stats = ag.train_low_level(ll, np.array(seg_in),
                                           np.array(seg_a, dtype=np.int64),
                                           np.array(seg_r), boot)
                _finite("low-level loss", stats["critic_loss"])
                seg_in, seg_a, seg_r = [], [], []
            if window_end:
                success = is_success(env, s_next)
                truncated = (t % cfg.k != 0) or (res.done and not success)
                tr = ag.HighLevelTransition(window_start, g_abs, window_reward,
                                            s_next, res.done, truncated)
                if cfg.variant == "negreward":
                    tr = ag.negreward_wrap(hl, psi, tr)
                replay.add(tr)
                n_windows += 1
            s = s_next
            cells.append(s.pos)
            if res.done:
                break

        hl_adj = []
        for _ in range(n_windows):
            stats = ag.train_high_level(hl, psi, replay, env, rng_agent,
                                        cfg.batch_size)
            if stats is not None:
                _finite("high-level loss", stats.get("critic_loss"),
                        stats.get("actor_q"))
                if "adj_loss_mean" in stats:
                    hl_adj.append(stats["adj_loss_mean"])
        adj_arr = np.array(adj_vals)
        return {
            "trajectory": Trajectory(cells, 0),
            "reward": ep_reward,
            "success": is_success(env, s),
            "steps": t,
            "adj_loss_mean": float(adj_arr.mean()),
            "adj_zero_frac": float((adj_arr == 0.0).mean()),
        }

    def eval_point(self, hl, ll, psi):
        return greedy_eval(self.env, hl, ll, psi, self.cfg.k,
                           self.cfg.eval_episodes, self.rngs["eval"])

    # -- whole run ----------------------------------------------------------

    def execute(self):
        cfg = self.cfg
        os.makedirs(self.outdir, exist_ok=True)
        t_start = time.time()

        tbuf = TrajectoryBuffer()
        self.warmup(tbuf)
        matrix = self.build_matrix(tbuf)

        rng_init = self.rngs["init"]
        psi = em.make_adjacency_net(cfg.k, self.env.layout.extent, rng_init,
                                    eps_k=cfg.eps_k, delta=cfg.delta)
        hl = ag.make_high_level(self.env, rng_init, sigma=cfg.sigma,
                                eta=0.0 if cfg.variant == "negreward" else cfg.eta,
                                actor_lr=cfg.hl_actor_lr,
                                critic_lr=cfg.hl_critic_lr, gamma=cfg.hl_gamma,
                                tau=cfg.tau, policy_freq=cfg.policy_freq,
                                policy_noise=cfg.policy_noise,
                                noise_clip=cfg.noise_clip)
        ll = ag.make_low_level(self.env, rng_init, actor_lr=cfg.ll_actor_lr,
                               critic_lr=cfg.ll_critic_lr, gamma=cfg.ll_gamma,
                               entropy_weight=cfg.entropy_weight,
                               rollout_n=cfg.rollout_n)
        replay = ag.ReplayBuffer(cfg.replay_size)

        self.pretrain_embedding(psi, matrix, tbuf)
        tbuf.clear()
        self.steps_since_update = 0

        for ep in range(1, cfg.total_episodes + 1):
            try:
                stats = self.training_episode(hl, ll, psi, replay)
            except RunAbort as err:
                self._dump_abort(ep, err)
                raise
            if cfg.variant != "hrac_o":
                tbuf.add(stats["trajectory"])
            self.steps_since_update += stats["steps"]

            distilled = 0
            matrix_updated = 0
            if cfg.variant != "hrac_o" and self._update_due(ep):
                if cfg.variant in ("hrac", "negreward", "eta_sweep"):
                    update_matrix(matrix, tbuf)
                    matrix_updated = 1
                if self.finetune_embedding(psi, matrix, tbuf):
                    distilled = 1
                tbuf.clear()
                self.steps_since_update = 0
                self.log(f"episode {ep}: matrix/embedding update "
                         f"(cells={matrix.n_cells if matrix else 0})")

            self.metrics_rows.append({
                "episode": ep,
                "env_steps": self.env_steps,
                "reward": stats["reward"],
                "success": int(stats["success"]),
                "adj_loss_mean": stats["adj_loss_mean"],
                "adj_zero_frac": stats["adj_zero_frac"],
                "distill_loss": self.last_distill_loss if distilled else None,
                "matrix_cells": matrix.n_cells if matrix is not None else 0,
                "tbuf_size": len(tbuf),
                "distilled": distilled,
            })

            if cfg.eval_every > 0 and ep % cfg.eval_every == 0:
                point = self.eval_point(hl, ll, psi)
                point.update(episode=ep, env_steps=self.env_steps)
                self.eval_rows.append(point)

        self._write_outputs(hl, ll, psi, time.time() - t_start)
        return self

    def _update_due(self, ep: int) -> bool:
        if self.cfg.online_freq_episodes > 0:
            return ep % self.cfg.online_freq_episodes == 0
        return self.steps_since_update >= self.cfg.online_freq_steps

    def _header(self) -> dict:
        return {"config": config_dict(self.cfg), "seed": self.seed,
                "config_hash": config_hash(self.cfg), "format": 1}

    def _dump_abort(self, episode: int, err: Exception):
        with open(os.path.join(self.outdir, "abort.json"), "w") as f:
            json.dump({"episode": episode, "env_steps": self.env_steps,
                       "error": str(err)}, f, sort_keys=True, indent=1)

    def _write_outputs(self, hl, ll, psi, elapsed: float):
        out = self.outdir
        write_table(os.path.join(out, "metrics.csv"), self._header(),
                    METRIC_COLUMNS, self.metrics_rows)
        write_table(os.path.join(out, "eval.csv"), self._header(),
                    EVAL_COLUMNS, self.eval_rows)
        ckpt = os.path.join(out, "checkpoints")
        os.makedirs(ckpt, exist_ok=True)
        nets.save_net(hl.actor, os.path.join(ckpt, "high_actor.ckpt"))
        nets.save_net(hl.critic1, os.path.join(ckpt, "high_critic1.ckpt"))
        nets.save_net(hl.critic2, os.path.join(ckpt, "high_critic2.ckpt"))
        nets.save_net(ll.actor, os.path.join(ckpt, "low_actor.ckpt"))
        nets.save_net(ll.critic, os.path.join(ckpt, "low_critic.ckpt"))
        em.save_adjacency_net(psi, os.path.join(ckpt, "adjacency"))
        nets.save_net_meta(os.path.join(ckpt, "agent.json"), {
            "env": self.cfg.env, "noise": self.cfg.noise, "k": self.cfg.k,
            "sigma": self.cfg.sigma, "max_steps": self.cfg.max_steps,
            "intrinsic": self.cfg.intrinsic, "seed": self.seed,
            "variant": self.cfg.variant,
        })
        self.log(f"run complete in {elapsed:.1f}s, {self.env_steps} env steps")
        with open(os.path.join(out, "runlog.txt"), "w") as f:
            f.write("\n".join(self.log_lines) + "\n")


def run(cfg: RunConfig, seed: int, outdir: str) -> Run:
    """Execute one seeded run; returns the Run with file paths populated."""
    return Run(cfg, seed, outdir).execute()


def load_agent(ckpt_dir: str):
    """Rebuild an evaluable agent (high level, low level, embedding, env)
    from a checkpoint directory written by a run."""
    meta = nets.load_net_meta(os.path.join(ckpt_dir, "agent.json"))
    env = make_env(meta["env"], noise=meta["noise"],
                   max_steps=meta["max_steps"] or None)
    rng = np.random.default_rng(0)
    hl = ag.make_high_level(env, rng, sigma=meta["sigma"], eta=0.0)
    hl.actor = nets.load_net(os.path.join(ckpt_dir, "high_actor.ckpt"))
    hl.critic1 = nets.load_net(os.path.join(ckpt_dir, "high_critic1.ckpt"))
    hl.critic2 = nets.load_net(os.path.join(ckpt_dir, "high_critic2.ckpt"))
    ll = ag.make_low_level(env, rng)
    ll.actor = nets.load_net(os.path.join(ckpt_dir, "low_actor.ckpt"))
    ll.critic = nets.load_net(os.path.join(ckpt_dir, "low_critic.ckpt"))
    psi = em.load_adjacency_net(os.path.join(ckpt_dir, "adjacency"))
    return env, hl, ll, psi, meta


def run_eta_sweep(cfg: RunConfig, seed: int, outdir: str):
    """One run per value of the adjacency-loss coefficient; emits one metrics
    file per value under <outdir>/eta_<value>/."""
    outs = []
    for eta in cfg.eta_values:
        sub = dataclasses.replace(cfg, variant="hrac", eta=eta)
        outs.append(run(sub, seed, os.path.join(outdir, f"eta_{eta:g}")))
    return outs


# ---------------------------------------------------------------------------
# aggregation across seeds

def aggregate(paths, value: str | None = None, x_key: str = "episode",
              smooth_window: int = 1, label: str | None = None,
              bin_size: float = 0.0) -> dict:
    """Combine metric/eval files from repeated runs into a curve summary:
    mean and standard error of the mean per x position (or per x bin when
    bin_size is set). Files must come from identical configs."""
    if not paths:
        raise ValueError("no input files")
    headers, tables = [], []
    for p in paths:
        header, rows = read_table(p)
        headers.append(header)
        tables.append(rows)
    ref = headers[0]["config_hash"]
    for h, p in zip(headers[1:], paths[1:]):
        if h["config_hash"] != ref:
            raise ValueError(f"{p}: config mismatch with {paths[0]}")
    if value is None:
        value = "mean_reward" if tables[0] and "mean_reward" in tables[0][0] else "reward"

    per_run = {}
    for run_i, rows in enumerate(tables):
        xs = np.array([r[x_key] for r in rows])
        vs = np.array([r[value] for r in rows], dtype=np.float64)
        if smooth_window > 1:
            kernel = np.ones(smooth_window) / smooth_window
            pad = np.concatenate([np.full(smooth_window - 1, vs[0]), vs])
            vs = np.convolve(pad, kernel, mode="valid")
        if bin_size > 0:
            xs = np.floor(xs / bin_size) * bin_size
        for x, v in zip(xs, vs):
            per_run.setdefault(float(x), {}).setdefault(run_i, []).append(v)

    out_x, out_mean, out_sem = [], [], []
    for x in sorted(per_run):
        samples = [float(np.mean(v)) for v in per_run[x].values()]
        out_x.append(x)
        out_mean.append(float(np.mean(samples)))
        if len(samples) > 1:
            out_sem.append(float(np.std(samples, ddof=1) / np.sqrt(len(samples))))
        else:
            out_sem.append(0.0)
    return {"label": label or value, "value": value, "x_key": x_key,
            "x": out_x, "mean": out_mean, "sem": out_sem,
            "n_runs": len(paths), "smooth_window": smooth_window,
            "bin_size": bin_size, "config_hash": ref}


def save_summary(summary: dict, path: str):
    with open(path, "w") as f:
        json.dump(summary, f, sort_keys=True)
        f.write("\n")


def load_summary(path: str) -> dict:
    with open(path) as f:
        return json.load(f)
