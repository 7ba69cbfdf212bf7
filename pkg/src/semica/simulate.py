"""Synthetic model generation and sampling."""

from __future__ import annotations

import numpy as np

from .errors import NonPositivePrice
from .graph import Dag
from .ica import SampleMatrix
from .sem import LinearSem, Noise, total_effect_matrix


def random_dag(p: int, edge_prob: float, weight: float = 0.9, seed: int = 0) -> Dag:
    """Draw a random causal order, then include each order-respecting edge
    independently with probability ``edge_prob``; all weights equal."""
    if p < 2:
        raise ValueError("need at least two vertices")
    if not 0.0 <= edge_prob <= 1.0:
        raise ValueError("edge_prob must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    order = rng.permutation(p)
    edges = {}
    for a in range(p):
        for b in range(a + 1, p):
            if rng.random() < edge_prob:
                edges[(int(order[a]), int(order[b]))] = weight
    return Dag.from_edges(p, edges)


def random_sem(
    p: int,
    edge_prob: float,
    weight: float = 0.9,
    latent_fraction: float = 0.5,
    seed: int = 0,
    noise_family: str = "uniform",
) -> LinearSem:
    """Random DAG with ``floor(latent_fraction * p)`` vertices hidden at random."""
    graph = random_dag(p, edge_prob, weight, seed)
    rng = np.random.default_rng([seed, 1])
    n_latent = int(latent_fraction * p)
    if p - n_latent < 2:
        raise ValueError("latent fraction leaves fewer than two observed variables")
    latent = rng.choice(p, size=n_latent, replace=False)
    observed = sorted(set(range(p)) - set(int(v) for v in latent))
    return LinearSem.from_graph(graph, observed, noise_family)


def sample_noise(noise: Noise, n: int, rng: np.random.Generator) -> np.ndarray:
    if noise.family == "uniform":
        lo, hi = noise.params
        return rng.uniform(lo, hi, n)
    if noise.family == "laplace":
        loc, scale = noise.params
        return rng.laplace(loc, scale, n)
    if noise.family == "gaussian":
        mean, std = noise.params
        return rng.normal(mean, std, n)
    if noise.family == "zero":
        return np.zeros(n)
    out = np.zeros(n)
    for coeff, term in noise.terms:
        out += coeff * sample_noise(term, n, rng)
    return out


def simulate_samples(sem: LinearSem, n: int, seed: int = 0) -> SampleMatrix:
    """Draw V = B N column-wise and return the observed rows only.

    Noise draws are i.i.d. across samples, independent across vertices,
    generated in ascending vertex order from one seeded stream.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    rng = np.random.default_rng(seed)
    p = sem.graph.num_vertices
    noises = np.empty((p, n))
    for v in range(p):
        noises[v] = sample_noise(sem.noise[v], n, rng)
    values = total_effect_matrix(sem) @ noises
    names = tuple(f"V{v + 1}" for v in sem.observed)
    return SampleMatrix(values[list(sem.observed)], names)


def returns_from_prices(prices: SampleMatrix) -> SampleMatrix:
    """Per-period relative changes R(t) = (c(t) - c(t-1)) / c(t-1).

    Expects strictly positive, fully aligned series (CSV ingestion drops
    dates with missing entries); the output has one fewer time point.
    """
    values = prices.values
    if values.shape[1] < 2:
        raise ValueError("need at least two time points")
    if np.any(values <= 0.0):
        bad = prices.variable_names[int(np.argwhere(values <= 0.0)[0][0])]
        raise NonPositivePrice(f"series {bad} has a non-positive price")
    rets = (values[:, 1:] - values[:, :-1]) / values[:, :-1]
    return SampleMatrix(rets, prices.variable_names)
