import numpy as np
import pytest

from adjhrl import gridworld as gw
from adjhrl import oracle

# small corridor fixture: two cells on either side of a wall are Euclidean
# neighbors but far apart in transition distance
CORRIDOR = """\
#########
#...#...#
#...#...#
#...#...#
#.......#
#########
"""

# open room, start and goal in opposite corners
OPEN = """\
#########
#A......#
#.......#
#.......#
#.......#
#.......#
#......G#
#########
"""


@pytest.fixture(scope="session")
def maze_env():
    return gw.make_env("maze", noise=0.0)


@pytest.fixture(scope="session")
def keychest_env():
    return gw.make_env("keychest", noise=0.25)


@pytest.fixture(scope="session")
def corridor_layout():
    return gw.Layout(CORRIDOR, name="corridor")


@pytest.fixture(scope="session")
def open_env():
    return gw.EnvConfig(gw.Layout(OPEN, name="open"), 0.0, 100, "maze_dense")


@pytest.fixture(scope="session")
def maze_oracle(maze_env):
    mdp, cells = gw.grid_to_mdp(maze_env.layout)
    d = oracle.shortest_transition_distance(mdp)
    return mdp, cells, d


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
