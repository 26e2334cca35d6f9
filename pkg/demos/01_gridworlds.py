"""Tour of the two grid tasks: layouts, dynamics, rewards, and the effect of
action noise.

Run: python demos/01_gridworlds.py
"""
import numpy as np

from adjhrl import gridworld as gw

rng = np.random.default_rng(0)

print("=== Maze (dense reward, fixed start) ===")
maze = gw.make_env("maze", noise=0.0)
print(gw.render(maze))
s = gw.reset(maze, rng)
print(f"\nstart: {s.pos}, goal: {maze.layout.goal}, step limit {maze.max_steps}")

print("\nwalking right along the top corridor:")
for t in range(3):
    res = gw.step(maze, s, 3, rng, t)
    print(f"  step right -> {res.next_state.pos}, reward {res.reward:+.1f}")
    s = res.next_state

print("\n=== Key-Chest (sparse reward, random start) ===")
kc = gw.make_env("keychest", noise=0.25)
print(gw.render(kc, gw.reset(kc, rng)))
print(f"\nkey at {kc.layout.key}, chest at {kc.layout.chest}, "
      f"step limit {kc.max_steps}, action noise {kc.random_action_prob}")

# a random stroll: count how often the commanded action is replaced
s = gw.reset(kc, rng)
replaced = 0
for t in range(200):
    before = s.pos
    res = gw.step(kc, s, 3, rng, t)  # always command "right"
    moved = (res.next_state.x - s.x, res.next_state.y - s.y)
    if moved not in ((1, 0), (0, 0)):
        replaced += 1
    s = res.next_state
print(f"\nover 200 'right' commands the agent visibly moved another way "
      f"{replaced} times (noise at work)")

print("\ngoal-space mapping drops the key flag:")
st = gw.GridState(3, 5, has_key=True)
print(f"  {st} -> {gw.goal_map(st)}")
print(f"  nearest free cell to (8.0, 4.2) in the maze: "
      f"{gw.goal_unmap(maze, gw.Subgoal(8.0, 4.2)).pos}")
