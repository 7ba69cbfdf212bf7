"""Bootstrap recovery of the zero pattern of the estimated mixing matrix.

Each bootstrap resample is refit at the reference column count, columns are
matched across replicates (sign-folded, optimal one-to-one assignment), and
every entry gets a two-sided t-test of mean zero.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.stats import t as student_t

from .ica import IcaConfig, SampleMatrix, derived_seed, fit_mixing_fixed_k, reference_fit
from .sem import MixingMatrix

# Below this magnitude a zero-variance entry counts as zero outright;
# the t statistic is undefined there.
_ZERO_VARIANCE_MEAN = 1e-6

# Sign-folded distance between normalized columns under which a replicate
# counts as degenerate (it collapsed two of its k components).
_DEGENERATE_COLUMN_DISTANCE = 0.1


@dataclass(frozen=True)
class BootstrapEnsemble:
    """Normalized replicate estimates plus their alignment to replicate 1.

    ``alignment[r]`` permutes replicate r's columns into replicate 0's
    order; ``signs[r]`` holds the per-column sign that minimized the
    matching distance.
    """

    replicates: tuple[MixingMatrix, ...]
    alignment: tuple[tuple[int, ...], ...]
    signs: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        shapes = {m.shape for m in self.replicates}
        if len(shapes) != 1:
            raise ValueError("replicates must share one shape")
        for perm in self.alignment:
            if sorted(perm) != list(range(self.replicates[0].shape[1])):
                raise ValueError("alignment entries must be permutations")

    def aligned_stack(self) -> np.ndarray:
        """(replicates, p_o, k) array with columns aligned and sign-folded."""
        out = []
        for rep, perm, sign in zip(self.replicates, self.alignment, self.signs):
            out.append(rep.entries[:, list(perm)] * np.asarray(sign)[None, :])
        return np.stack(out)


@dataclass(frozen=True)
class SupportMatrix:
    """Statistically nonzero entries of the mixing estimate.

    ``support[i, j]`` is True when the t-test rejects zero at level
    ``alpha``; ``mean`` and ``stderr`` are the per-entry bootstrap
    statistics behind the verdicts.
    """

    support: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    alpha: float

    def __post_init__(self):
        support = np.asarray(self.support, dtype=bool)
        support.setflags(write=False)
        object.__setattr__(self, "support", support)
        for name in ("mean", "stderr"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != support.shape:
                raise ValueError(f"{name} shape must match support")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def from_exact(cls, entries: np.ndarray, tol: float = 1e-9) -> "SupportMatrix":
        """Support of an exactly-known matrix (entries beyond tol are nonzero)."""
        entries = np.asarray(entries, dtype=float)
        return cls(np.abs(entries) > tol, entries, np.zeros_like(entries), 0.0)

    @property
    def shape(self) -> tuple[int, int]:
        return self.support.shape

    def column_patterns(self) -> tuple[frozenset[int], ...]:
        return tuple(
            frozenset(int(i) for i in np.flatnonzero(self.support[:, c]))
            for c in range(self.support.shape[1])
        )

    def to_json_dict(self) -> dict:
        return {
            "support": [[bool(v) for v in row] for row in self.support],
            "mean": [[float(v) for v in row] for row in self.mean],
            "stderr": [[float(v) for v in row] for row in self.stderr],
            "alpha": self.alpha,
            "column_order": list(range(self.support.shape[1])),
        }


def _signed_match(
    reference: np.ndarray, other: np.ndarray, greedy: bool = False
) -> tuple[np.ndarray, np.ndarray]:
    """Match other's columns to reference's, folding signs.

    Returns (perm, signs): column j of the reference corresponds to
    signs[j] * other[:, perm[j]].
    """
    k = reference.shape[1]
    minus = np.zeros((k, k))
    plus = np.zeros((k, k))
    for a in range(k):
        diff_m = reference[:, a, None] - other
        diff_p = reference[:, a, None] + other
        minus[a] = np.sum(diff_m * diff_m, axis=0)
        plus[a] = np.sum(diff_p * diff_p, axis=0)
    cost = np.minimum(minus, plus)
    if greedy:
        perm = np.full(k, -1)
        used: set[int] = set()
        for a in range(k):
            order = np.argsort(cost[a], kind="stable")
            perm[a] = next(int(b) for b in order if b not in used)
            used.add(int(perm[a]))
    else:
        rows, cols = linear_sum_assignment(cost)
        perm = cols[np.argsort(rows)]
    signs = np.where(minus[np.arange(k), perm] <= plus[np.arange(k), perm], 1.0, -1.0)
    return perm.astype(int), signs


def match_columns(reference: MixingMatrix, other: MixingMatrix, greedy: bool = False) -> np.ndarray:
    """Permutation matching ``other``'s columns to ``reference``'s.

    Minimum total squared distance under a one-to-one assignment, each
    pair's sign disambiguated (min over ±). ``greedy`` reproduces the
    simpler nearest-unused-column matching instead.
    """
    if reference.shape != other.shape:
        raise ValueError(f"shape mismatch: {reference.shape} vs {other.shape}")
    perm, _ = _signed_match(reference.entries, other.entries, greedy)
    return perm


def _degenerate(estimate: MixingMatrix) -> bool:
    """A fixed-k fit that collapsed two components into near-equal columns."""
    entries = estimate.entries
    for a in range(entries.shape[1]):
        for b in range(a + 1, entries.shape[1]):
            dist = min(
                float(np.linalg.norm(entries[:, a] - entries[:, b])),
                float(np.linalg.norm(entries[:, a] + entries[:, b])),
            )
            if dist <= _DEGENERATE_COLUMN_DISTANCE:
                return True
    return False


def _one_replicate(
    data: SampleMatrix, config: IcaConfig, k_star: int, seed: int, r: int
) -> MixingMatrix | None:
    n = data.num_samples
    for attempt in (0, 1):
        rng = np.random.default_rng(derived_seed(seed, r, attempt))
        idx = rng.integers(0, n, size=n)
        resample = SampleMatrix(data.values[:, idx], data.variable_names)
        cfg = replace(config, seed=derived_seed(seed, r, attempt, 1))
        try:
            estimate = fit_mixing_fixed_k(resample, k_star, cfg)
            if _degenerate(estimate):
                raise RuntimeError("fit collapsed two mixing columns")
            return estimate
        except Exception as exc:  # noqa: BLE001 - replicate dropped below
            if attempt == 1:
                warnings.warn(f"bootstrap replicate {r} dropped: {exc}")
    return None


def bootstrap_replicates(
    data: SampleMatrix,
    config: IcaConfig,
    reps: int = 10,
    seed: int | None = None,
    k_star: int | None = None,
    greedy_match: bool = False,
    threads: int = 1,
) -> BootstrapEnsemble:
    """Refit the mixing on ``reps`` with-replacement resamples at fixed k.

    k is frozen from a reference fit on the full data unless supplied.
    A replicate whose fit raises is retried once with a fresh derived seed,
    then dropped with a warning; at least two must survive. Replicates use
    independent derived seeds, so results are identical for any thread
    count.
    """
    if reps < 2:
        raise ValueError("need at least two bootstrap replicates")
    if seed is None:
        seed = config.seed
    if k_star is None:
        k_star = reference_fit(data, config).k
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            fits = list(pool.map(
                lambda r: _one_replicate(data, config, k_star, seed, r), range(reps)
            ))
    else:
        fits = [_one_replicate(data, config, k_star, seed, r) for r in range(reps)]
    estimates: list[MixingMatrix] = [m for m in fits if m is not None]
    if len(estimates) < 2:
        raise RuntimeError("fewer than two bootstrap replicates survived")
    perms, signs = [tuple(range(estimates[0].shape[1]))], [(1.0,) * estimates[0].shape[1]]
    for rep in estimates[1:]:
        perm, sign = _signed_match(estimates[0].entries, rep.entries, greedy_match)
        perms.append(tuple(int(v) for v in perm))
        signs.append(tuple(float(v) for v in sign))
    return BootstrapEnsemble(tuple(estimates), tuple(perms), tuple(signs))


def zero_support(ensemble: BootstrapEnsemble, alpha: float = 0.05) -> SupportMatrix:
    """Two-sided bootstrap t-test of zero for every aligned entry.

    The replicate spread estimates the sampling error of the entry's
    estimate (the bootstrap principle), so zero is rejected at level
    ``alpha`` when the mean exceeds the t critical value times the
    replicate standard deviation — equivalently, when 0 falls outside the
    bootstrap confidence interval of the entry. Entries with zero variance
    across replicates bypass the statistic: they are nonzero iff their
    common value exceeds a small threshold.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    stack = ensemble.aligned_stack()
    m = stack.shape[0]
    mean = stack.mean(axis=0)
    sd = stack.std(axis=0, ddof=1)
    stderr = sd / np.sqrt(m)
    crit = float(student_t.ppf(1.0 - alpha / 2.0, df=m - 1))
    support = np.where(
        sd == 0.0,
        np.abs(mean) > _ZERO_VARIANCE_MEAN,
        np.abs(mean) > crit * sd,
    )
    return SupportMatrix(support, mean, stderr, alpha)
