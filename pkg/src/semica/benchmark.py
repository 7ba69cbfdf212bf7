"""Random-graph benchmark: path-verdict error versus sample size."""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .graph import reachability
from .ica import derived_seed
from .inference import PairVerdict, PathVerdictMatrix
from .pipeline import DiscoveryConfig, path_analysis
from .sem import LinearSem
from .simulate import random_sem, simulate_samples


@dataclass(frozen=True)
class BenchmarkConfig:
    p_values: tuple[int, ...] = (6,)
    edge_prob: float = 0.3
    weight: float = 0.9
    latent_fraction: float = 0.5
    sample_sizes: tuple[int, ...] = (1000,)
    num_graphs: int = 50
    seed: int = 0
    discovery: DiscoveryConfig = field(default_factory=DiscoveryConfig)
    threads: int = 1

    def __post_init__(self):
        if not 0.0 < self.edge_prob < 1.0:
            raise ValueError("edge_prob must lie in (0, 1)")
        if not 0.0 <= self.latent_fraction < 1.0:
            raise ValueError("latent_fraction must lie in [0, 1)")
        if list(self.sample_sizes) != sorted(self.sample_sizes):
            raise ValueError("sample sizes must be ascending")


@dataclass(frozen=True)
class BenchmarkRow:
    p: int
    n: int
    mean_error: float
    stderr: float
    graphs: int
    failures: int
    mean_error_observed: float
    stderr_observed: float


@dataclass(frozen=True)
class BenchmarkResult:
    rows: tuple[BenchmarkRow, ...]

    def row(self, p: int, n: int) -> BenchmarkRow:
        for r in self.rows:
            if r.p == p and r.n == n:
                return r
        raise KeyError(f"no row for p={p}, n={n}")


def normalized_error(
    true_sem: LinearSem,
    verdicts: PathVerdictMatrix,
    observed_pairs_denominator: bool = False,
) -> float:
    """Fraction of ordered pairs with a wrong path/no-path verdict.

    Ground truth is reachability in the full graph; an Undecided verdict
    counts as wrong exactly when the truth has a path. The denominator is
    p(p-1) over all variables (the protocol's convention) unless
    ``observed_pairs_denominator`` selects p_o(p_o-1).
    """
    reach = reachability(true_sem.graph)
    obs = list(true_sem.observed)
    wrong = 0
    for a, va in enumerate(obs):
        for b, vb in enumerate(obs):
            if a == b:
                continue
            predicted = verdicts.verdict(a, b) is PairVerdict.PATH
            if predicted != bool(reach[va, vb]):
                wrong += 1
    p = len(obs) if observed_pairs_denominator else true_sem.graph.num_vertices
    return wrong / (p * (p - 1))


def _one_graph(config: BenchmarkConfig, p: int, n: int, g: int) -> tuple[float, float] | None:
    sem = random_sem(
        p, config.edge_prob, config.weight, config.latent_fraction,
        seed=derived_seed(config.seed, p, g),
    )
    data = simulate_samples(sem, n, seed=derived_seed(config.seed, p, g, n))
    disc = config.discovery.with_seed(derived_seed(config.seed, p, g, n, 1))
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ref, _, _, verdicts = path_analysis(data, disc)
    except Exception:  # noqa: BLE001 - failures are data, reported per row
        return None
    if not ref.solution.converged:
        return None
    return (
        normalized_error(sem, verdicts),
        normalized_error(sem, verdicts, observed_pairs_denominator=True),
    )


def run_benchmark(config: BenchmarkConfig) -> BenchmarkResult:
    """Mean normalized error per (p, n) over seeded random models.

    Graph topologies are shared across sample sizes (same graph seed per
    (p, graph index)), pairing the n-comparison. Pipelines that raise or
    fail to converge count as failures and are excluded from the means.
    """
    rows = []
    for p in config.p_values:
        for n in config.sample_sizes:
            tasks = [(p, n, g) for g in range(config.num_graphs)]
            if config.threads > 1:
                with ThreadPoolExecutor(max_workers=config.threads) as pool:
                    outcomes = list(pool.map(lambda t: _one_graph(config, *t), tasks))
            else:
                outcomes = [_one_graph(config, *t) for t in tasks]
            errors = np.array([o[0] for o in outcomes if o is not None])
            errors_obs = np.array([o[1] for o in outcomes if o is not None])
            failures = sum(1 for o in outcomes if o is None)
            rows.append(
                BenchmarkRow(
                    p=p,
                    n=n,
                    mean_error=float(errors.mean()) if errors.size else float("nan"),
                    stderr=float(errors.std(ddof=1) / np.sqrt(errors.size))
                    if errors.size > 1 else 0.0,
                    graphs=int(errors.size),
                    failures=failures,
                    mean_error_observed=float(errors_obs.mean()) if errors_obs.size else float("nan"),
                    stderr_observed=float(errors_obs.std(ddof=1) / np.sqrt(errors_obs.size))
                    if errors_obs.size > 1 else 0.0,
                )
            )
    return BenchmarkResult(tuple(rows))
