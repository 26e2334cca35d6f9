"""Grid environments (Maze, Key-Chest), layout files, and random tabular MDPs.

Environments are immutable configs plus pure transition functions: the caller
owns the state, the step counter, and the random source, so independent runs
can share nothing. Coordinates are (x, y) = (column, row); action indices are
0=up, 1=down, 2=left, 3=right.
"""
from __future__ import annotations

from dataclasses import dataclass
from importlib import resources

import numpy as np

N_ACTIONS = 4
ACTION_NAMES = ("up", "down", "left", "right")
ACTION_DELTAS = ((0, -1), (0, 1), (-1, 0), (1, 0))

MAZE_MAX_STEPS = 200
KEYCHEST_MAX_STEPS = 500
DEFAULT_NOISE = 0.25


@dataclass(frozen=True)
class GridState:
    x: int
    y: int
    has_key: bool = False

    @property
    def pos(self):
        return (self.x, self.y)


@dataclass(frozen=True)
class Subgoal:
    """A point in the 2-d goal space: an absolute desired (x, y) position."""

    gx: float
    gy: float

    def as_array(self):
        return np.array([self.gx, self.gy], dtype=np.float64)

    @staticmethod
    def from_array(a) -> "Subgoal":
        return Subgoal(float(a[0]), float(a[1]))


@dataclass(frozen=True)
class StepResult:
    next_state: GridState
    reward: float
    done: bool


class Layout:
    """Parsed wall bitmap plus the special cells marked in the layout file.

    Characters: '#' wall, '.' free, 'A' start, 'G' goal, 'K' key, 'C' chest.
    The marked cells are free cells.
    """

    def __init__(self, text: str, name: str = "custom"):
        rows = [line for line in text.splitlines() if line.strip()]
        if not rows:
            raise ValueError("empty layout")
        width = len(rows[0])
        if any(len(r) != width for r in rows):
            raise ValueError("ragged layout rows")
        self.name = name
        self.height = len(rows)
        self.width = width
        self.walls = np.zeros((self.height, width), dtype=bool)
        self.start = self.goal = self.key = self.chest = None
        for y, row in enumerate(rows):
            for x, ch in enumerate(row):
                if ch == "#":
                    self.walls[y, x] = True
                elif ch == "A":
                    self.start = (x, y)
                elif ch == "G":
                    self.goal = (x, y)
                elif ch == "K":
                    self.key = (x, y)
                elif ch == "C":
                    self.chest = (x, y)
                elif ch != ".":
                    raise ValueError(f"unknown layout character {ch!r} at ({x}, {y})")
        self.free_cells = tuple((x, y)
                                for y in range(self.height)
                                for x in range(width)
                                if not self.walls[y, x])
        if not self.free_cells:
            raise ValueError("layout has no free cell")

    def is_free(self, x, y) -> bool:
        return 0 <= x < self.width and 0 <= y < self.height and not self.walls[y, x]

    @property
    def extent(self):
        """(max x, max y) of the goal space."""
        return (float(self.width - 1), float(self.height - 1))


def load_layout(name: str) -> Layout:
    """Load a shipped layout ('maze', 'keychest') or a layout file path."""
    if name in ("maze", "keychest"):
        text = resources.files("adjhrl.layouts").joinpath(f"{name}.txt").read_text()
        return Layout(text, name=name)
    with open(name) as f:
        return Layout(f.read(), name=name)


@dataclass(frozen=True)
class EnvConfig:
    layout: Layout
    random_action_prob: float
    max_steps: int
    reward_scheme: str  # "maze_dense" | "keychest_sparse"

    def __post_init__(self):
        if not 0.0 <= self.random_action_prob <= 1.0:
            raise ValueError("random_action_prob outside [0, 1]")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.reward_scheme not in ("maze_dense", "keychest_sparse"):
            raise ValueError(f"unknown reward scheme {self.reward_scheme!r}")
        if self.reward_scheme == "maze_dense" and (
                self.layout.start is None or self.layout.goal is None):
            raise ValueError("maze layout needs A and G cells")
        if self.reward_scheme == "keychest_sparse" and (
                self.layout.key is None or self.layout.chest is None):
            raise ValueError("keychest layout needs K and C cells")


def make_env(name: str, noise: float = DEFAULT_NOISE, max_steps: int | None = None,
             layout: Layout | None = None) -> EnvConfig:
    if name == "maze":
        return EnvConfig(layout or load_layout("maze"), noise,
                         max_steps or MAZE_MAX_STEPS, "maze_dense")
    if name == "keychest":
        return EnvConfig(layout or load_layout("keychest"), noise,
                         max_steps or KEYCHEST_MAX_STEPS, "keychest_sparse")
    raise ValueError(f"unknown environment {name!r}")


def start_cells(env: EnvConfig):
    """Support of the initial-state distribution."""
    if env.reward_scheme == "maze_dense":
        return (env.layout.start,)
    exclude = {env.layout.key, env.layout.chest}
    return tuple(c for c in env.layout.free_cells if c not in exclude)


def reset(env: EnvConfig, rng) -> GridState:
    cells = start_cells(env)
    if len(cells) == 1:
        return GridState(*cells[0])
    x, y = cells[int(rng.integers(len(cells)))]
    return GridState(x, y)


def step(env: EnvConfig, s: GridState, a: int, rng, t: int = 0) -> StepResult:
    """One transition. t is the number of steps already taken this episode;
    the step limit fires when t + 1 reaches max_steps."""
    if not isinstance(a, (int, np.integer)) or not 0 <= a < N_ACTIONS:
        raise ValueError(f"invalid action index {a!r}")
    executed = int(a)
    if env.random_action_prob > 0.0 and rng.random() < env.random_action_prob:
        executed = int(rng.integers(N_ACTIONS))
    dx, dy = ACTION_DELTAS[executed]
    nx, ny = s.x + dx, s.y + dy
    if not env.layout.is_free(nx, ny):
        nx, ny = s.x, s.y

    if env.reward_scheme == "maze_dense":
        gx, gy = env.layout.goal
        d_old = np.hypot(s.x - gx, s.y - gy)
        d_new = np.hypot(nx - gx, ny - gy)
        reward = 0.1 if d_new < d_old else (-0.1 if d_new > d_old else 0.0)
        next_state = GridState(nx, ny)
        task_done = (nx, ny) == env.layout.goal
    else:
        reward = 0.0
        has_key = s.has_key
        if not has_key and (nx, ny) == env.layout.key:
            reward += 1.0
            has_key = True
        task_done = has_key and (nx, ny) == env.layout.chest
        if task_done:
            reward += 5.0
        next_state = GridState(nx, ny, has_key)

    done = task_done or (t + 1 >= env.max_steps)
    return StepResult(next_state, reward, done)


def is_success(env: EnvConfig, s: GridState) -> bool:
    """Task completion: goal reached (Maze) or chest opened (Key-Chest)."""
    if env.reward_scheme == "maze_dense":
        return s.pos == env.layout.goal
    return s.has_key and s.pos == env.layout.chest


def goal_map(s: GridState) -> Subgoal:
    """The state-to-goal-space projection: position only, key flag dropped."""
    return Subgoal(float(s.x), float(s.y))


def goal_unmap(env: EnvConfig, g: Subgoal) -> GridState:
    """Nearest free cell to the goal point; ties go to lowest y, then lowest x."""
    if not (np.isfinite(g.gx) and np.isfinite(g.gy)):
        raise ValueError("non-finite subgoal")
    cells = env.layout.free_cells
    xs = np.fromiter((c[0] for c in cells), dtype=np.float64, count=len(cells))
    ys = np.fromiter((c[1] for c in cells), dtype=np.float64, count=len(cells))
    d2 = (xs - g.gx) ** 2 + (ys - g.gy) ** 2
    best = np.lexsort((xs, ys, d2))[0]
    return GridState(int(xs[best]), int(ys[best]))


def render(env: EnvConfig, s: GridState | None = None) -> str:
    """Ascii picture of the layout, with the agent drawn as '@'."""
    lay = env.layout
    marks = {lay.start: "A", lay.goal: "G", lay.key: "K", lay.chest: "C"}
    rows = []
    for y in range(lay.height):
        row = []
        for x in range(lay.width):
            if s is not None and (x, y) == s.pos:
                row.append("@")
            elif lay.walls[y, x]:
                row.append("#")
            else:
                row.append(marks.get((x, y), "."))
        rows.append("".join(row))
    return "\n".join(rows)


# ---------------------------------------------------------------------------
# tabular MDPs for the oracle machinery

@dataclass(frozen=True)
class TabularMDP:
    """Deterministic transition table: next_state[s, a] is a state id."""

    next_state: np.ndarray

    @property
    def n_states(self):
        return self.next_state.shape[0]

    @property
    def n_actions(self):
        return self.next_state.shape[1]


def gen_random_mdp(n_states: int, n_actions: int, rng) -> TabularMDP:
    """Random deterministic MDP, strongly connected by construction.

    A random Hamiltonian cycle is written into one random action slot per
    state before the remaining slots are filled uniformly.
    """
    if n_states < 2 or n_actions < 2:
        raise ValueError("need n_states >= 2 and n_actions >= 2")
    table = rng.integers(n_states, size=(n_states, n_actions))
    perm = rng.permutation(n_states)
    for i in range(n_states):
        s, nxt = perm[i], perm[(i + 1) % n_states]
        table[s, int(rng.integers(n_actions))] = nxt
    return TabularMDP(table.astype(np.int64))


def grid_to_mdp(layout: Layout):
    """Deterministic movement MDP over the layout's free cells.

    Returns (mdp, cells) where cells[i] is the (x, y) position of state i,
    in row-major order. Key-Chest flags are not part of this graph: adjacency
    lives in the 2-d goal space.
    """
    cells = list(layout.free_cells)
    index = {c: i for i, c in enumerate(cells)}
    table = np.empty((len(cells), N_ACTIONS), dtype=np.int64)
    for i, (x, y) in enumerate(cells):
        for a, (dx, dy) in enumerate(ACTION_DELTAS):
            table[i, a] = index[(x + dx, y + dy)] if layout.is_free(x + dx, y + dy) else i
    return TabularMDP(table), cells
