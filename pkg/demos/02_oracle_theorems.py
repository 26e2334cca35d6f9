"""Brute-force verification of the surrogate-goal theory on small MDPs:
shortest transition distances by BFS, the triangle inequality, and the two
surrogate-goal theorems checked constructively.

Run: python demos/02_oracle_theorems.py
"""
import numpy as np

from adjhrl import gridworld as gw
from adjhrl import oracle

rng = np.random.default_rng(7)

print("=== distances on a random deterministic MDP ===")
mdp = gw.gen_random_mdp(12, 3, rng)
d = oracle.shortest_transition_distance(mdp)
print(f"12 states, 3 actions; strongly connected: "
      f"{oracle.is_strongly_connected(d)}")
print(f"distance matrix (first 6 rows):\n{d[:6, :6]}")
ok, _ = oracle.check_triangle_inequality(d)
print(f"triangle inequality holds: {ok}")

print("\n=== Euclidean distance misleads, transition distance does not ===")
corridor = gw.Layout("#########\n#...#...#\n#...#...#\n#...#...#\n#.......#\n#########")
cmdp, cells = gw.grid_to_mdp(corridor)
idx = {c: i for i, c in enumerate(cells)}
cd = oracle.shortest_transition_distance(cmdp)
a, b = (3, 1), (5, 1)
print(f"cells {a} and {b}: Euclidean distance 2, "
      f"transition distance {cd[idx[a], idx[b]]}")

print("\n=== surrogate goals (single subgoal) ===")
policy = oracle.optimal_goal_policy(mdp, d)
s, g = 0, int(np.argmax(d[0] * (d[0] < 12)))
k = 2
res = oracle.check_theorem1(mdp, s, g, k, d, policy)
print(f"goal {g} is {d[s, g]} steps from state {s}; with k={k} the surrogate "
      f"{res.surrogate} is only {d[s, res.surrogate]} steps away")
print(f"same first-{k} actions under both goals: {res.ok}")

print("\n=== surrogate subgoal trajectories (value equality) ===")
checks = 0
for i in range(20):
    n = int(rng.integers(6, 25))
    m = gw.gen_random_mdp(n, 3, rng)
    rewards = rng.normal(size=(n, 3))
    for kk in (2, 3):
        for T in (2, 3):
            assert oracle.check_theorem2(m, rewards, kk, T).ok
            checks += 1
print(f"{checks} random (mdp, k, T) fixtures: optimal Q values unchanged "
      f"when every optimal subgoal is replaced by its adjacent surrogate")
