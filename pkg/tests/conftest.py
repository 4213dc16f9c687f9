import pytest

from helpers import fn_group
from pantsdecomp.surface import FNCoordinates, bolza_group, build_pants_graph, fn_to_group


@pytest.fixture(scope="session")
def bolza():
    return bolza_group()


@pytest.fixture(scope="session")
def theta3():
    """Genus 2, every edge length 3, no twist."""
    return fn_group((3.0, 3.0, 3.0), (0.0, 0.0, 0.0))


@pytest.fixture(scope="session")
def dumbbell():
    """Genus 2 whose middle edge (index 1) is separating."""
    graph = build_pants_graph(2, [(0, 0, 0, 1), (0, 2, 1, 2), (1, 0, 1, 1)])
    return fn_to_group(graph, FNCoordinates((3.0, 3.0, 3.0), (0.2, 0.4, 0.1)))
