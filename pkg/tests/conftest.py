"""Shared worked-example models.

Vertex numbering is 0-based in code; names V1.. in comments match the
1-based convention of the file formats.
"""

import pytest

from semica.graph import Dag
from semica.sem import LinearSem


@pytest.fixture
def ex1_weights():
    # V2->V1 (e), V4->V1 (d), V2->V3 (a), V2->V4 (b), V3->V4 (c)
    return dict(a=0.5, b=-0.7, c=1.3, d=0.8, e=-0.25)


@pytest.fixture
def ex1_graph(ex1_weights):
    w = ex1_weights
    return Dag.from_edges(4, {
        (1, 0): w["e"], (3, 0): w["d"], (1, 2): w["a"], (1, 3): w["b"], (2, 3): w["c"],
    })


@pytest.fixture
def fig2_weights():
    # V4->V1 (a), V4->V2 (c), V1->V2 (d), V3->V2 (e), V4->V3 (b)
    return dict(a=0.6, b=-1.1, c=0.45, d=0.9, e=0.35)


@pytest.fixture
def fig2_sem(fig2_weights):
    w = fig2_weights
    graph = Dag.from_edges(4, {
        (3, 0): w["a"], (3, 1): w["c"], (0, 1): w["d"], (2, 1): w["e"], (3, 2): w["b"],
    })
    return LinearSem.from_graph(graph, observed=[0, 1])


@pytest.fixture
def chain_sem():
    # V3 -> V1 -> V2 with weights alpha, beta; V3 latent
    alpha, beta = 0.8, -0.6
    graph = Dag.from_edges(3, {(2, 0): alpha, (0, 1): beta})
    return LinearSem.from_graph(graph, observed=[0, 1]), alpha, beta


@pytest.fixture
def fig3_weights():
    # V3->V4 (alp), V3->V5 (bet), V4->V5 (gam), V4->V7 (eta),
    # V5->V1, V5->V2, V6->V2, V8->V1, V8->V2
    return dict(alp=0.7, bet=-0.5, gam=1.2, eta=0.4,
                w51=0.9, w52=-0.8, w62=0.65, w81=1.1, w82=-0.3)


@pytest.fixture
def fig3_sem(fig3_weights):
    w = fig3_weights
    graph = Dag.from_edges(8, {
        (2, 3): w["alp"], (2, 4): w["bet"], (3, 4): w["gam"], (3, 6): w["eta"],
        (4, 0): w["w51"], (4, 1): w["w52"], (5, 1): w["w62"],
        (7, 0): w["w81"], (7, 1): w["w82"],
    })
    return LinearSem.from_graph(graph, observed=[0, 1])


def triangle_sem(alpha=0.9, beta=0.9, gamma=0.9):
    """V3 latent; V3->V1 (alpha), V3->V2 (gamma), V1->V2 (beta)."""
    graph = Dag.from_edges(3, {(2, 0): alpha, (2, 1): gamma, (0, 1): beta})
    return LinearSem.from_graph(graph, observed=[0, 1])


def fork_sem(weight=0.9):
    """V3 latent; V3->V1, V3->V2."""
    graph = Dag.from_edges(3, {(2, 0): weight, (2, 1): weight})
    return LinearSem.from_graph(graph, observed=[0, 1])


def fig6_sem(weight=0.9):
    """V4 latent; V4->V1, V4->V2, V4->V3, V2->V1."""
    graph = Dag.from_edges(4, {
        (3, 0): weight, (3, 1): weight, (3, 2): weight, (1, 0): weight,
    })
    return LinearSem.from_graph(graph, observed=[0, 1, 2])


@pytest.fixture
def triangle():
    return triangle_sem()


@pytest.fixture
def fork():
    return fork_sem()


@pytest.fixture
def fig6():
    return fig6_sem()
