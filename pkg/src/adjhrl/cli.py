"""Command-line entry points: train, eval, oracle-check, embed-eval,
aggregate, and plot."""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import harness, oracle, plotting
from . import embed as em
from .gridworld import (GridState, Subgoal, gen_random_mdp, goal_map,
                        grid_to_mdp, load_layout, make_env)


def _add_train(sub):
    p = sub.add_parser("train", help="run one seeded training run")
    p.add_argument("--config", default=None, help="flat key=value config file")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--outdir", default="runs/run0")
    p.add_argument("--env", choices=("maze", "keychest"), default=None)
    p.add_argument("--noise", type=float, default=None)
    p.add_argument("--variant", choices=harness.VARIANTS, default=None)
    p.add_argument("--episodes", type=int, default=None)
    p.add_argument("--print-config", action="store_true",
                   help="print the effective config and exit")


def _cmd_train(args) -> int:
    overrides = {}
    if args.env is not None:
        overrides["env"] = args.env
    if args.noise is not None:
        overrides["noise"] = args.noise
    if args.variant is not None:
        overrides["variant"] = args.variant
    if args.episodes is not None:
        overrides["total_episodes"] = args.episodes
    cfg = harness.load_config(args.config, overrides)
    if args.print_config:
        sys.stdout.write(harness.config_to_text(cfg))
        return 0
    if cfg.variant == "eta_sweep":
        runs = harness.run_eta_sweep(cfg, args.seed, args.outdir)
        for r in runs:
            print(f"eta={r.cfg.eta:g}: metrics in {r.outdir}/metrics.csv")
        return 0
    r = harness.run(cfg, args.seed, args.outdir)
    print(f"metrics in {r.outdir}/metrics.csv ({r.env_steps} env steps)")
    return 0


def _add_eval(sub):
    p = sub.add_parser("eval", help="evaluate a checkpointed agent")
    p.add_argument("--checkpoint", required=True, help="checkpoint directory")
    p.add_argument("--episodes", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)


def _cmd_eval(args) -> int:
    env, hl, ll, psi, meta = harness.load_agent(args.checkpoint)
    rng = np.random.default_rng(args.seed)
    out = harness.greedy_eval(env, hl, ll, psi, meta["k"], args.episodes, rng)
    print(f"episodes: {args.episodes}")
    print(f"mean episode reward: {out['mean_reward']:.3f}")
    print(f"success rate: {out['success_rate']:.3f}")
    print(f"adjacent subgoal fraction: {out['adj_zero_frac']:.3f}")
    return 0


def _add_oracle_check(sub):
    p = sub.add_parser("oracle-check",
                       help="run the theorem suite on random MDP fixtures")
    p.add_argument("--fixtures", type=int, default=100)
    p.add_argument("--k", default="2,3,5", help="comma-separated window sizes")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-states", type=int, default=30)
    p.add_argument("--horizons", default="2,3",
                   help="planning horizons for the value-equality check")
    p.add_argument("--out", default=None, help="write the JSON report here")


def _cmd_oracle_check(args) -> int:
    ks = [int(v) for v in args.k.split(",") if v.strip()]
    horizons = [int(v) for v in args.horizons.split(",") if v.strip()]
    rng = np.random.default_rng(args.seed)
    report = {"fixtures": args.fixtures, "k": ks, "horizons": horizons,
              "seed": args.seed, "triangle_failures": 0,
              "surrogate_checks": 0, "surrogate_failures": 0,
              "value_checks": 0, "value_failures": 0, "failures": []}
    for i in range(args.fixtures):
        n = int(rng.integers(5, args.max_states + 1))
        na = int(rng.integers(2, 5))
        mdp = gen_random_mdp(n, na, rng)
        d = oracle.shortest_transition_distance(mdp)
        pol = oracle.optimal_goal_policy(mdp, d)
        ok, triple = oracle.check_triangle_inequality(d)
        if not ok:
            report["triangle_failures"] += 1
            report["failures"].append({"fixture": i, "kind": "triangle",
                                       "triple": list(triple)})
        for k in ks:
            for s in range(n):
                for g in range(n):
                    if not k <= d[s, g] < n:
                        continue
                    res = oracle.check_theorem1(mdp, s, g, k, d, pol)
                    report["surrogate_checks"] += 1
                    if not res.ok:
                        report["surrogate_failures"] += 1
                        report["failures"].append(
                            {"fixture": i, "kind": "surrogate", "s": s,
                             "g": g, "k": k, "reason": res.reason})
        rewards = rng.normal(size=(n, mdp.n_actions))
        for k in (v for v in ks if v <= 3):
            for T in horizons:
                res = oracle.check_theorem2(mdp, rewards, k, T, d=d)
                report["value_checks"] += 1
                if not res.ok:
                    report["value_failures"] += 1
                    report["failures"].append(
                        {"fixture": i, "kind": "value", "k": k, "T": T,
                         "reason": res.reason})
    report["ok"] = (report["triangle_failures"] == 0
                    and report["surrogate_failures"] == 0
                    and report["value_failures"] == 0)
    text = json.dumps(report, sort_keys=True, indent=1)
    if args.out:
        with open(args.out, "w") as f:
            f.write(text + "\n")
    print(text)
    return 0 if report["ok"] else 1


def _add_embed_eval(sub):
    p = sub.add_parser("embed-eval",
                       help="score an embedding checkpoint against the oracle "
                            "and draw an adjacency heatmap")
    p.add_argument("--checkpoint", required=True,
                   help="checkpoint path prefix (without .ckpt/.json)")
    p.add_argument("--env", choices=("maze", "keychest"), default="maze")
    p.add_argument("--from", dest="origin", default=None,
                   help="reference cell 'x,y' for the heatmap")
    p.add_argument("--out", default=None, help="heatmap SVG path")


def _cmd_embed_eval(args) -> int:
    psi = em.load_adjacency_net(args.checkpoint)
    layout = load_layout(args.env)
    mdp, cells = grid_to_mdp(layout)
    d = oracle.shortest_transition_distance(mdp)
    true = oracle.perfect_adjacency_matrix(d, psi.k, symmetric=True)

    emb = em.embed_many(psi, np.array(cells, dtype=np.float64))
    n = len(cells)
    ii, jj = np.triu_indices(n, 1)
    dist = np.linalg.norm(emb[ii] - emb[jj], axis=1)
    pred = (dist <= psi.eps_k).astype(np.uint8)
    acc, bal = em.pair_accuracy(pred, true[ii, jj])
    print(f"cells: {n}  pairs: {ii.size}")
    print(f"accuracy vs oracle: {acc:.4f}  balanced: {bal:.4f}")

    if args.origin:
        x, y = (float(v) for v in args.origin.split(","))
    else:
        x, y = (layout.start or cells[len(cells) // 2])
    origin = goal_map(GridState(int(x), int(y)))
    values = np.full((layout.height, layout.width), np.nan)
    for (cx, cy) in cells:
        values[cy, cx] = em.approx_distance(psi, origin, Subgoal(float(cx), float(cy)))
    svg = plotting.grid_heatmap(values, layout.walls,
                                title=f"approx distance from ({int(x)}, {int(y)})",
                                marks={(int(x), int(y)): "s"})
    out = args.out or f"heatmap_{args.env}.svg"
    with open(out, "w") as f:
        f.write(svg)
    print(f"heatmap written to {out}")
    return 0


def _add_aggregate(sub):
    p = sub.add_parser("aggregate",
                       help="combine metric files from repeated runs into a "
                            "mean +- SEM curve summary")
    p.add_argument("inputs", nargs="+", help="metrics.csv or eval.csv files")
    p.add_argument("--out", required=True)
    p.add_argument("--value", default=None, help="value column to aggregate")
    p.add_argument("--x", dest="x_key", default="episode",
                   choices=("episode", "env_steps"))
    p.add_argument("--smooth", type=int, default=1)
    p.add_argument("--bin", dest="bin_size", type=float, default=0.0)
    p.add_argument("--label", default=None)


def _cmd_aggregate(args) -> int:
    summary = harness.aggregate(args.inputs, value=args.value, x_key=args.x_key,
                                smooth_window=args.smooth, label=args.label,
                                bin_size=args.bin_size)
    harness.save_summary(summary, args.out)
    print(f"summary with {len(summary['x'])} points -> {args.out}")
    return 0


def _add_plot(sub):
    p = sub.add_parser("plot", help="render curve summaries as an SVG chart")
    p.add_argument("inputs", nargs="+", help="summary JSON files")
    p.add_argument("--out", required=True)
    p.add_argument("--title", default="")
    p.add_argument("--xlabel", default="")
    p.add_argument("--ylabel", default="")


def _cmd_plot(args) -> int:
    summaries = [harness.load_summary(p) for p in args.inputs]
    svg = plotting.line_chart(summaries, title=args.title,
                              x_label=args.xlabel, y_label=args.ylabel)
    with open(args.out, "w") as f:
        f.write(svg)
    print(f"chart -> {args.out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="adjhrl",
        description="grid-world lab for hierarchical RL with a k-step "
                    "adjacency constraint")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_train(sub)
    _add_eval(sub)
    _add_oracle_check(sub)
    _add_embed_eval(sub)
    _add_aggregate(sub)
    _add_plot(sub)
    args = parser.parse_args(argv)
    return {"train": _cmd_train, "eval": _cmd_eval,
            "oracle-check": _cmd_oracle_check, "embed-eval": _cmd_embed_eval,
            "aggregate": _cmd_aggregate, "plot": _cmd_plot}[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
