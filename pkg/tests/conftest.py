import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from infocore.graph import InteractionList, build_graph

# Small worked example used throughout: four users, five objects, eleven
# links. u1 collects o1-o3, u2 collects o1/o2/o4, u3 collects o2-o5, u4
# collects only o5. Dense ids follow first appearance: u1..u4 -> 0..3,
# o1..o5 -> 0..4.
G1_PAIRS = (
    ("u1", "o1"), ("u1", "o2"), ("u1", "o3"),
    ("u2", "o1"), ("u2", "o2"), ("u2", "o4"),
    ("u3", "o2"), ("u3", "o3"), ("u3", "o4"), ("u3", "o5"),
    ("u4", "o5"),
)


@pytest.fixture(scope="session")
def g1_interactions():
    return InteractionList(pairs=G1_PAIRS, provenance="g1")


@pytest.fixture(scope="session")
def g1(g1_interactions):
    return build_graph(g1_interactions)
