import pytest

from losstomo.decompose import decompose
from losstomo.harness import SETTINGS
from losstomo.topology import parse_topology

# the 25-node two-source network used throughout: two binary trees whose
# subtrees below node 2 coincide
BIG_NETWORK = """
node 16
node 0
node 17
node 1
node 18
node 2
node 3
node 19
node 20
node 4
node 5
node 6
node 7
node 21
node 22
node 23
node 24
node 8
node 9
node 10
node 11
node 12
node 13
node 14
node 15
link 0 16 17 0.01
link 1 0 1 0.01
link 2 17 18 0.01
link 3 17 2 0.01
link 4 1 2 0.01
link 5 1 3 0.01
link 6 18 19 0.01
link 7 18 20 0.01
link 8 2 4 0.01
link 9 2 5 0.01
link 10 3 6 0.01
link 11 3 7 0.01
link 12 19 21 0.01
link 13 19 22 0.01
link 14 20 23 0.01
link 15 20 24 0.01
link 16 4 8 0.01
link 17 4 9 0.01
link 18 5 10 0.01
link 19 5 11 0.01
link 20 6 12 0.01
link 21 6 13 0.01
link 22 7 14 0.01
link 23 7 15 0.01
source 16
source 0
receiver 21
receiver 22
receiver 23
receiver 24
receiver 8
receiver 9
receiver 10
receiver 11
receiver 12
receiver 13
receiver 14
receiver 15
"""

SINGLE_TREE = """
node 0
node 1
node 2
node 3
node 4
node 5
link 1 0 1 0.02
link 2 1 2 0.05
link 3 1 3 0.1
link 4 3 4 0.05
link 5 3 5 0.02
source 0
receiver 2
receiver 4
receiver 5
"""


@pytest.fixture
def big_topology():
    return parse_topology(BIG_NETWORK)


@pytest.fixture
def big_plan(big_topology):
    return decompose(big_topology)


@pytest.fixture
def star22():
    return parse_topology(SETTINGS["2x2-equal"])


@pytest.fixture
def star22_plan(star22):
    return decompose(star22)


@pytest.fixture
def single_tree():
    return parse_topology(SINGLE_TREE)
