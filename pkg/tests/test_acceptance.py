"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

Run with `pytest tests/test_acceptance.py -s`. The comparative training study
(criteria 6 and 7) trains 15 seeded runs and dominates the wall-clock; the
whole module is expected to take a few hours.
"""
import concurrent.futures
import dataclasses
import os
import time

import numpy as np
import pytest

from adjhrl import adjacency as adj
from adjhrl import agent as ag
from adjhrl import embed, harness, nets, oracle
from adjhrl import gridworld as gw


def report(name: str, ok: bool, detail: str):
    print(f"\n[{'PASS' if ok else 'FAIL'}] {name}: {detail}")
    assert ok, f"{name}: {detail}"


# ---------------------------------------------------------------------------
# criterion 1: theorem oracle suite on 100 random MDPs

def test_criterion_1_theorem_oracles():
    t0 = time.time()
    rng = np.random.default_rng(0)
    triangle = surrogate = value = 0
    failures = []
    for i in range(100):
        n = int(rng.integers(5, 31))
        mdp = gw.gen_random_mdp(n, int(rng.integers(2, 5)), rng)
        d = oracle.shortest_transition_distance(mdp)
        policy = oracle.optimal_goal_policy(mdp, d)
        ok, triple = oracle.check_triangle_inequality(d)
        triangle += 1
        if not ok:
            failures.append(("triangle", i, triple))
        for k in (2, 3, 5):
            for s in range(n):
                for g in range(n):
                    if not k <= d[s, g] < n:
                        continue
                    res = oracle.check_theorem1(mdp, s, g, k, d, policy)
                    surrogate += 1
                    if not res.ok:
                        failures.append(("surrogate", i, s, g, k, res.reason))
        rewards = rng.normal(size=(n, mdp.n_actions))
        for k in (2, 3):
            for T in (2, 3):
                res = oracle.check_theorem2(mdp, rewards, k, T, d=d)
                value += 1
                if not res.ok:
                    failures.append(("value", i, k, T, res.reason))
    elapsed = time.time() - t0
    report("criterion 1 (theorem oracles)",
           not failures and elapsed <= 300.0,
           f"{triangle} triangle + {surrogate} surrogate + {value} value "
           f"checks, {len(failures)} failures, {elapsed:.1f}s (limit 300s)")


# ---------------------------------------------------------------------------
# criterion 2: gradient integrity on every network architecture

ARCHITECTURES = (
    ("adjacency", (2, 128, 128, 128, 32), ("relu", "relu", "relu", "identity")),
    ("high_actor", (3, 300, 300, 2), ("relu", "relu", "tanh")),
    ("high_critic", (5, 300, 300, 1), ("relu", "relu", "identity")),
    ("low_actor", (5, 300, 300, 4), ("relu", "relu", "identity")),
    ("low_critic", (5, 300, 300, 1), ("relu", "relu", "identity")),
)


def test_criterion_2_gradient_integrity():
    worst_overall = 0.0
    details = []
    for name, sizes, acts in ARCHITECTURES:
        worst = 0.0
        for point in range(50):
            rng = np.random.default_rng(1000 + point)
            net = nets.dense(sizes, acts, rng)
            x = rng.normal(size=(3, sizes[0]))
            target = rng.normal(size=(3, sizes[-1]))

            def loss_and_grads(n):
                y, cache = nets.forward_cache(n, x)
                loss = float(((y - target) ** 2).sum())
                grads, _ = nets.backward(n, cache, 2.0 * (y - target))
                return loss, grads

            worst = max(worst, nets.gradcheck(loss_and_grads, net, rng,
                                              n_coords=8))
        details.append(f"{name}: {worst:.2e}")
        worst_overall = max(worst_overall, worst)
    report("criterion 2 (gradient integrity)", worst_overall <= 1e-4,
           "max relative error per architecture over 50 points each: "
           + ", ".join(details) + " (tolerance 1e-4)")


# ---------------------------------------------------------------------------
# criterion 3: adjacency-matrix convergence on the deterministic maze

def test_criterion_3_matrix_convergence():
    env = gw.make_env("maze", noise=0.0)
    mdp, cells = gw.grid_to_mdp(env.layout)
    d = oracle.shortest_transition_distance(mdp)
    perfect = oracle.perfect_adjacency_matrix(d, 10, symmetric=True)
    idx = {c: i for i, c in enumerate(cells)}

    buf = adj.TrajectoryBuffer()
    harness.collect_random_episodes(env, np.random.default_rng(2025), buf,
                                    episode_budget=1000)
    matrix = adj.update_matrix(adj.AdjacencyMatrix(k=10), buf)
    ids = np.array([idx[c] for c in matrix.cells])
    sub = perfect[np.ix_(ids, ids)]
    wrong = int((matrix.bits != sub).sum())
    report("criterion 3 (matrix convergence)", wrong == 0,
           f"1000 random-policy episodes, {matrix.n_cells}/{len(cells)} cells "
           f"visited, {wrong} entries differ from the BFS oracle "
           f"(exact equality required)")


# ---------------------------------------------------------------------------
# criterion 4: distillation fidelity against the maze oracle matrix

def test_criterion_4_distillation_fidelity():
    t0 = time.time()
    env = gw.make_env("maze", noise=0.0)
    mdp, cells = gw.grid_to_mdp(env.layout)
    d = oracle.shortest_transition_distance(mdp)
    matrix = adj.matrix_from_perfect(
        cells, oracle.perfect_adjacency_matrix(d, 10, symmetric=True), 10)

    rng = np.random.default_rng(6)
    holdout = embed.make_holdout(matrix, 0.1, rng)
    psi = embed.make_adjacency_net(10, env.layout.extent, rng,
                                   eps_k=1.0, delta=0.2)
    bpe = 8 * max(1, int(np.ceil(matrix.n_cells ** 2 / 64)))
    hist = embed.distill(psi, matrix, epochs=50, rng=rng, batch_size=64,
                         lr=2e-4, batches_per_epoch=bpe, holdout=holdout,
                         balanced=True)
    res = embed.evaluate_split(psi, matrix, holdout)
    train_acc = res["train"][0]
    hold_acc, hold_bal = res["holdout"]
    final_loss = hist["epoch_loss"][-1]
    elapsed = time.time() - t0
    ok = (train_acc >= 0.99 and hold_acc >= 0.95 and hold_bal >= 0.95
          and final_loss < 0.05 and elapsed <= 600.0)
    report("criterion 4 (distillation fidelity)", ok,
           f"train accuracy {train_acc:.4f} (>= 0.99), held-out {hold_acc:.4f} "
           f"(>= 0.95, balanced {hold_bal:.4f}), final epoch loss "
           f"{final_loss:.4f} (< 0.05), {elapsed:.0f}s (limit 600s)")


# ---------------------------------------------------------------------------
# criterion 5: hinge, goal-transition, and intrinsic-reward identities

def test_criterion_5_exact_identities():
    checks = []
    checks.append(embed.hinge(10, 10) == 0.0)
    checks.append(embed.hinge(20, 10) == 1.0)

    rng = np.random.default_rng(3)
    for _ in range(200):
        s = gw.GridState(int(rng.integers(17)), int(rng.integers(13)))
        # dyadic goal coordinates keep every float sum exact, so the
        # algebraic identity is checkable with strict equality
        g_rel = gw.Subgoal(float(rng.integers(-512, 512)) / 64.0,
                           float(rng.integers(-512, 512)) / 64.0)
        absolute = ag.to_absolute(g_rel, s)
        for _ in range(10):  # one k-step window
            nxt = gw.GridState(s.x + int(rng.integers(-1, 2)),
                               s.y + int(rng.integers(-1, 2)))
            g_rel = ag.goal_transition(g_rel, s, nxt)
            s = nxt
            now = ag.to_absolute(g_rel, s)
            checks.append((now.gx, now.gy) == (absolute.gx, absolute.gy))

    checks.append(ag.intrinsic_reward(gw.GridState(3, 5), gw.Subgoal(3.0, 5.0)) == 1.0)
    checks.append(ag.intrinsic_reward(gw.GridState(3, 5), gw.Subgoal(3.5, 5.0)) == 1.0)
    checks.append(ag.intrinsic_reward(gw.GridState(3, 5), gw.Subgoal(4.0, 5.0)) == 0.0)
    checks.append(ag.intrinsic_reward(gw.GridState(3, 5), gw.Subgoal(3.5, 5.5)) == 1.0)
    report("criterion 5 (exact identities)", all(checks),
           f"{len(checks)} exact checks: hinge boundary values, absolute-goal "
           f"invariance across 200 random windows, intrinsic-reward box edges")


# ---------------------------------------------------------------------------
# criteria 6 and 7: comparative Key-Chest study

COMPARATIVE_SEEDS = (0, 1, 2, 3, 4)
COMPARATIVE_EPISODES = 700
STEP_BUDGET = 500_000


def _comparative_cfg(variant_key: str) -> harness.RunConfig:
    base = harness.RunConfig(
        env="keychest", variant="hrac", noise=0.25, k=10, sigma=5.0,
        total_episodes=COMPARATIVE_EPISODES, warmup_steps=50_000,
        pretrain_epochs=50, online_epochs=25, online_freq_steps=50_000,
        batches_per_epoch=120, replay_size=20_000, eval_every=25,
        eval_episodes=10)
    if variant_key == "hrac":
        return dataclasses.replace(base, eta=20.0)
    if variant_key == "eta0":
        return dataclasses.replace(base, eta=0.0)
    if variant_key == "noadj":
        return dataclasses.replace(base, variant="noadj", eta=20.0)
    raise ValueError(variant_key)


def _run_one(args):
    variant_key, seed, outdir = args
    run = harness.run(_comparative_cfg(variant_key), seed, outdir)
    return variant_key, seed, run.env_steps, os.path.join(outdir, "eval.csv")


@pytest.fixture(scope="session")
def comparative_study(tmp_path_factory):
    root = tmp_path_factory.mktemp("comparative")
    jobs = [(v, s, str(root / v / f"s{s}"))
            for v in ("hrac", "eta0", "noadj") for s in COMPARATIVE_SEEDS]
    results = {}
    steps = {}
    workers = min(2, os.cpu_count() or 1)
    with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
        for variant_key, seed, env_steps, path in pool.map(_run_one, jobs):
            results.setdefault(variant_key, []).append(path)
            steps[(variant_key, seed)] = env_steps
    return results, steps


@pytest.mark.slow
def test_criterion_6_comparative(comparative_study):
    results, steps = comparative_study
    budget_ok = all(v <= STEP_BUDGET for v in steps.values())
    curves = {key: harness.aggregate(sorted(paths), value="mean_reward",
                                     smooth_window=3, label=key)
              for key, paths in results.items()}
    final = {key: (c["mean"][-1], c["sem"][-1]) for key, c in curves.items()}
    hrac_mean, hrac_sem = final["hrac"]
    ordered = all(hrac_mean >= final[k][0] for k in ("eta0", "noadj"))
    separated = all(hrac_mean - hrac_sem > final[k][0] + final[k][1]
                    for k in ("eta0", "noadj"))
    detail = ", ".join(f"{k}: {m:.3f} +- {s:.3f}" for k, (m, s) in final.items())
    max_steps = max(steps.values())
    report("criterion 6 (comparative training)",
           budget_ok and ordered and separated,
           f"final smoothed eval reward over 5 seeds: {detail}; "
           f"max run budget {max_steps} env steps (<= {STEP_BUDGET})")


@pytest.mark.slow
def test_criterion_7_adjacent_subgoals(comparative_study):
    results, _ = comparative_study
    fractions = []
    for path in results["hrac"]:
        _, rows = harness.read_table(path)
        fractions.append(rows[-1]["adj_zero_frac"])
    pooled = float(np.mean(fractions))
    report("criterion 7 (adjacent subgoals)", pooled >= 0.90,
           f"final-eval fraction of emitted subgoals with zero adjacency "
           f"penalty, per seed: {[f'{f:.3f}' for f in fractions]}, "
           f"pooled {pooled:.3f} (>= 0.90)")


# ---------------------------------------------------------------------------
# criterion 8: byte-identical metrics for identical (config, seed)

@pytest.mark.filterwarnings("ignore:replay buffer")
def test_criterion_8_determinism(tmp_path):
    cfg = harness.RunConfig(env="keychest", variant="hrac", noise=0.25,
                            sigma=5.0, total_episodes=6, warmup_steps=2000,
                            pretrain_epochs=2, online_epochs=1,
                            online_freq_steps=2000, batches_per_epoch=10,
                            eval_every=3, eval_episodes=2, batch_size=16,
                            replay_size=2000)
    harness.run(cfg, seed=7, outdir=str(tmp_path / "a"))
    harness.run(cfg, seed=7, outdir=str(tmp_path / "b"))
    same = all((tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
               for f in ("metrics.csv", "eval.csv"))
    report("criterion 8 (determinism)", same,
           "metrics.csv and eval.csv byte-identical across repeated "
           "(config, seed) runs")
