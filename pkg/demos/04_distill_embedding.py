"""Distilling the adjacency matrix into the embedding network and reading
distances back out of it, including an adjacency heatmap like the ones used
to visualize subgoal reachability.

Run: python demos/04_distill_embedding.py      (about a minute)
"""
import numpy as np

from adjhrl import adjacency as adj
from adjhrl import embed, plotting
from adjhrl import gridworld as gw
from adjhrl import oracle

env = gw.make_env("maze", noise=0.0)
mdp, cells = gw.grid_to_mdp(env.layout)
d = oracle.shortest_transition_distance(mdp)
matrix = adj.matrix_from_perfect(
    cells, oracle.perfect_adjacency_matrix(d, k=10, symmetric=True), k=10)

rng = np.random.default_rng(5)
holdout = embed.make_holdout(matrix, 0.1, rng)
psi = embed.make_adjacency_net(10, env.layout.extent, rng)

print("training the embedding on the oracle matrix (short schedule) ...")
hist = embed.distill(psi, matrix, epochs=12, rng=rng, holdout=holdout,
                     balanced=True, batches_per_epoch=400)
for i, loss in enumerate(hist["epoch_loss"]):
    if i % 3 == 0 or i == len(hist["epoch_loss"]) - 1:
        print(f"  epoch {i:2d}: mean loss {loss:.4f}")

res = embed.evaluate_split(psi, matrix, holdout)
print(f"\nthreshold-at-eps accuracy: train {res['train'][0]:.3f}, "
      f"held out {res['holdout'][0]:.3f} (balanced {res['holdout'][1]:.3f})")

origin = gw.goal_map(gw.GridState(*env.layout.start))
print(f"\napproximate distances from the start cell {env.layout.start}:")
for target in [(4, 1), (14, 1), (15, 3), (1, 5)]:
    approx = embed.approx_distance(psi, origin, gw.Subgoal(*map(float, target)))
    true = d[cells.index(env.layout.start), cells.index(target)]
    print(f"  to {target}: approx {approx:5.1f}, true {true:3d}, "
          f"adjacent={'yes' if approx <= 10 else 'no '} (true: "
          f"{'yes' if true <= 10 else 'no'})")

values = np.full((env.layout.height, env.layout.width), np.nan)
for (cx, cy) in cells:
    values[cy, cx] = embed.approx_distance(psi, origin,
                                           gw.Subgoal(float(cx), float(cy)))
svg = plotting.grid_heatmap(values, env.layout.walls,
                            title="approximate transition distance from A",
                            marks={env.layout.start: "A"})
with open("heatmap_maze.svg", "w") as f:
    f.write(svg)
print("\nheatmap written to heatmap_maze.svg (colder = closer)")

s = gw.GridState(8, 5)
near, far = gw.Subgoal(10.0, 5.0), gw.Subgoal(15.0, 11.0)
for g in (near, far):
    loss, grad = embed.adjacency_loss(psi, s, g)
    print(f"adjacency penalty of subgoal ({g.gx:.0f}, {g.gy:.0f}) from "
          f"{s.pos}: {loss:.3f}, gradient wrt subgoal {np.round(grad, 3)}")
