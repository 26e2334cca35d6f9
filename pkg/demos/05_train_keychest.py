"""A short end-to-end training run of the full two-level agent on Key-Chest
with the adjacency penalty, followed by aggregation and an SVG learning
curve. Uses a reduced budget so it finishes in a few minutes; see the README
for full-scale comparative runs.

Run: python demos/05_train_keychest.py
"""
import numpy as np

from adjhrl import harness, plotting

cfg = harness.RunConfig(
    env="keychest", variant="hrac", noise=0.25, eta=20.0, sigma=5.0,
    total_episodes=120, warmup_steps=8000, pretrain_epochs=8,
    online_epochs=4, online_freq_steps=25000, batches_per_epoch=120,
    eval_every=20, eval_episodes=5)

print("training two seeds at a demo-scale budget ...")
files = []
for seed in (0, 1):
    r = harness.run(cfg, seed=seed, outdir=f"runs/demo_keychest/s{seed}")
    files.append(f"{r.outdir}/eval.csv")
    last = r.eval_rows[-1]
    print(f"  seed {seed}: {r.env_steps} env steps, final eval reward "
          f"{last['mean_reward']:.2f}, adjacent-subgoal fraction "
          f"{last['adj_zero_frac']:.2f}")

summary = harness.aggregate(files, label="hrac (demo budget)")
harness.save_summary(summary, "runs/demo_keychest/summary.json")
svg = plotting.line_chart([summary], title="keychest, demo budget",
                          x_label="episode", y_label="mean episode reward")
with open("runs/demo_keychest/curve.svg", "w") as f:
    f.write(svg)
print("\ncurve written to runs/demo_keychest/curve.svg")
print("evaluate a checkpoint with:")
print("  adjhrl eval --checkpoint runs/demo_keychest/s0/checkpoints --episodes 20")
