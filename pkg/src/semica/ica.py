"""Overcomplete mixing-matrix estimation: whitening plus a reconstruction-ICA fit.

The estimator whitens the observed samples, minimizes a smooth contrast with
a reconstruction penalty over a p_o x k feature matrix Z, selects k on a
held-out split, and maps the solution back through the coloring transform.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import DegenerateCovariance
from .sem import MixingMatrix

_LOG2 = float(np.log(2.0))


def derived_seed(*parts: int) -> int:
    """Deterministic child seed for independent substreams."""
    return int(np.random.SeedSequence(list(parts)).generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class SampleMatrix:
    """Observational data, one row per variable and one column per sample."""

    values: np.ndarray
    variable_names: tuple[str, ...]

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("values must be a matrix (variables x samples)")
        if not np.all(np.isfinite(values)):
            raise ValueError("values must be finite")
        if len(self.variable_names) != values.shape[0]:
            raise ValueError("one name per variable required")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "variable_names", tuple(self.variable_names))

    @property
    def num_variables(self) -> int:
        return self.values.shape[0]

    @property
    def num_samples(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class WhiteningTransform:
    """Centering plus rotation/scaling making the sample covariance identity.

    ``basis`` holds unit eigenvectors of the sample covariance as columns
    (descending eigenvalue); ``scales`` are the corresponding standard
    deviations, so whitening is diag(1/scales) @ basis.T @ (x - mean).
    """

    mean: np.ndarray
    basis: np.ndarray
    scales: np.ndarray

    def apply(self, values: np.ndarray) -> np.ndarray:
        centered = values - self.mean[:, None]
        return (self.basis.T @ centered) / self.scales[:, None]

    def color_matrix(self) -> np.ndarray:
        """Map whitened-space mixing columns back to data space."""
        return self.basis * self.scales[None, :]


@dataclass(frozen=True)
class RicaSolution:
    z: np.ndarray
    objective_value: float
    converged: bool
    iterations: int


def whiten(data: SampleMatrix) -> tuple[WhiteningTransform, SampleMatrix]:
    """Eigen-decompose the sample covariance and rescale to unit covariance.

    Raises DegenerateCovariance when some eigenvalue falls below
    1e-12 times the largest (naming the near-null direction).
    """
    if data.num_samples <= data.num_variables:
        raise DegenerateCovariance(
            f"need more than {data.num_variables} samples to whiten "
            f"{data.num_variables} variables"
        )
    mean = data.values.mean(axis=1)
    centered = data.values - mean[:, None]
    cov = centered @ centered.T / (data.num_samples - 1)
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1]
    eigvals, eigvecs = eigvals[order], eigvecs[:, order]
    for c in range(eigvecs.shape[1]):
        pivot = eigvecs[np.argmax(np.abs(eigvecs[:, c])), c]
        if pivot < 0:
            eigvecs[:, c] = -eigvecs[:, c]
    if eigvals[-1] <= 1e-12 * eigvals[0]:
        loadings = ", ".join(
            f"{name}: {w:+.3f}" for name, w in zip(data.variable_names, eigvecs[:, -1])
        )
        raise DegenerateCovariance(
            f"sample covariance is rank deficient along ({loadings})",
            direction=eigvecs[:, -1],
        )
    transform = WhiteningTransform(mean, eigvecs, np.sqrt(eigvals))
    whitened = SampleMatrix(transform.apply(data.values), data.variable_names)
    return transform, whitened


def _logcosh(u: np.ndarray) -> np.ndarray:
    return np.logaddexp(u, -u) - _LOG2


def rica_objective(
    z: np.ndarray, batch: np.ndarray, lam: float, contrast_sign: float = 1.0
) -> tuple[float, np.ndarray]:
    """Value and gradient of the reconstruction-ICA objective.

    value = contrast_sign * sum_ij log cosh(Z[:,j]ᵀ w_i)
            + (lam / n) * sum_i ||Z Zᵀ w_i - w_i||².

    ``contrast_sign`` +1 rewards heavy-tailed (sparse) feature responses,
    -1 rewards light-tailed ones, which is the correct direction for
    sub-Gaussian sources such as uniform noise.
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    n = batch.shape[1]
    features = z.T @ batch
    residual = z @ features - batch
    value = contrast_sign * float(np.sum(_logcosh(features)))
    value += lam / n * float(np.sum(residual * residual))
    grad = contrast_sign * (batch @ np.tanh(features).T)
    grad += (2.0 * lam / n) * (residual @ features.T + batch @ (z.T @ residual).T)
    return value, grad


def rica_fit(
    whitened: SampleMatrix,
    k: int,
    lam: float,
    seed: int = 0,
    restarts: int = 5,
    max_iters: int = 5000,
    grad_tol: float = 1e-6,
    contrast_sign: float = 1.0,
) -> RicaSolution:
    """Minimize the objective over Z (p_o x k) with multi-restart L-BFGS.

    Deterministic given the seed; restart r uses an independent substream.
    The best objective across restarts wins; ``converged`` is False only
    when every restart hit the iteration cap.
    """
    p = whitened.num_variables
    if k < p:
        raise ValueError(f"k must be at least the number of variables ({p})")
    batch = whitened.values

    def fun(z_flat: np.ndarray) -> tuple[float, np.ndarray]:
        value, grad = rica_objective(z_flat.reshape(p, k), batch, lam, contrast_sign)
        return value, grad.ravel()

    best: RicaSolution | None = None
    any_converged = False
    for r in range(restarts):
        rng = np.random.default_rng(derived_seed(seed, k, r))
        z0 = rng.standard_normal((p, k)) / np.sqrt(p)
        res = minimize(
            fun,
            z0.ravel(),
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": max_iters, "maxfun": 4 * max_iters,
                     "ftol": 1e-10, "gtol": grad_tol},
        )
        converged = bool(res.status == 0) or float(np.max(np.abs(res.jac))) <= grad_tol
        any_converged = any_converged or converged
        if best is None or res.fun < best.objective_value:
            best = RicaSolution(res.x.reshape(p, k), float(res.fun), converged, int(res.nit))
    return replace(best, converged=any_converged)


# Whitened-space cosine above which two fitted columns count as one
# component. The fit objective gains by splitting a direction across
# duplicate columns, so held-out costs are computed on the folded solution.
_FOLD_COSINE = 0.95


def fold_duplicate_columns(z: np.ndarray, tol: float = _FOLD_COSINE) -> np.ndarray:
    """Merge near-collinear columns of Z, largest radius first.

    Folded radii combine in quadrature, so Z Zᵀ (hence the reconstruction
    term) is preserved exactly for perfect duplicates.
    """
    radii = np.linalg.norm(z, axis=0)
    units = z / np.where(radii > 0, radii, 1.0)
    keep: list[int] = []
    mass: dict[int, float] = {}
    for c in np.argsort(-radii):
        rep = next((m for m in keep if abs(units[:, c] @ units[:, m]) >= tol), None)
        if rep is None and radii[c] > 0:
            keep.append(c)
            mass[c] = radii[c] ** 2
        elif rep is not None:
            mass[rep] += radii[c] ** 2
    keep.sort()
    return np.stack([units[:, m] * np.sqrt(mass[m]) for m in keep], axis=1)


def select_model(
    train: SampleMatrix,
    holdout: SampleMatrix,
    k_range: Sequence[int],
    lam: float,
    seed: int = 0,
    restarts: int = 5,
    max_iters: int = 5000,
    grad_tol: float = 1e-6,
    contrast_sign: float = 1.0,
) -> tuple[int, dict[int, float]]:
    """Pick the column count whose fit scores best on the held-out split.

    Fits every k on the training data, evaluates the objective of each
    solution on the whitened hold-out samples, and returns the argmin
    (ties toward smaller k) with the per-k costs. Each solution is scored
    after folding duplicate columns: redundant columns re-express the same
    component, so they may not pad the hold-out cost. A k whose fit raises
    is excluded with a warning.
    """
    ks = sorted(set(int(k) for k in k_range))
    if not ks:
        raise ValueError("k range is empty")
    if ks[0] < train.num_variables:
        raise ValueError("smallest k must be at least the number of variables")
    transform, train_w = whiten(train)
    holdout_w = transform.apply(holdout.values)
    costs: dict[int, float] = {}
    for k in ks:
        try:
            sol = rica_fit(train_w, k, lam, seed, restarts, max_iters, grad_tol, contrast_sign)
        except Exception as exc:  # noqa: BLE001 - excluded k is reported
            warnings.warn(f"model with k={k} failed to fit: {exc}")
            continue
        costs[k] = rica_objective(fold_duplicate_columns(sol.z), holdout_w, lam, contrast_sign)[0]
    if not costs:
        raise RuntimeError("every candidate column count failed to fit")
    k_star = min(costs, key=lambda k: (costs[k], k))
    return k_star, costs


@dataclass(frozen=True)
class IcaConfig:
    """Estimation knobs; None fields are resolved from the data dimension.

    ``lam`` defaults to 1/p_o and the k range to p_o..2*p_o. ``iid`` marks
    whether the hold-out split may simply take the trailing samples.
    """

    lam: float | None = None
    k_min: int | None = None
    k_max: int | None = None
    holdout_frac: float = 0.25
    restarts: int = 5
    max_iters: int = 5000
    grad_tol: float = 1e-6
    seed: int = 0
    contrast_sign: float = -1.0
    iid: bool = True

    def resolved(self, p: int) -> "IcaConfig":
        return replace(
            self,
            lam=self.lam if self.lam is not None else 1.0 / p,
            k_min=self.k_min if self.k_min is not None else p,
            k_max=self.k_max if self.k_max is not None else 2 * p,
        )


@dataclass(frozen=True)
class ReferenceFit:
    """Full-data estimate plus the model-selection evidence behind it."""

    mixing: MixingMatrix
    k: int
    holdout_costs: dict[int, float]
    solution: RicaSolution
    transform: WhiteningTransform


def split_holdout(data: SampleMatrix, config: IcaConfig) -> tuple[SampleMatrix, SampleMatrix]:
    """Split off ceil(holdout_frac * n) samples for model selection.

    I.i.d.-flagged data gives up its trailing block; otherwise a seeded
    uniform subset is taken.
    """
    n = data.num_samples
    n_hold = int(np.ceil(config.holdout_frac * n))
    if not 0 < n_hold < n:
        raise ValueError("holdout fraction leaves an empty split")
    if config.iid:
        hold_idx = np.arange(n - n_hold, n)
    else:
        rng = np.random.default_rng(derived_seed(config.seed, 0x51))
        hold_idx = np.sort(rng.choice(n, size=n_hold, replace=False))
    mask = np.ones(n, dtype=bool)
    mask[hold_idx] = False
    train = SampleMatrix(data.values[:, mask], data.variable_names)
    holdout = SampleMatrix(data.values[:, ~mask], data.variable_names)
    return train, holdout


def fit_mixing_fixed_k(data: SampleMatrix, k: int, config: IcaConfig) -> MixingMatrix:
    """Whiten all of ``data``, fit at a fixed k, and color back (normalized)."""
    cfg = config.resolved(data.num_variables)
    transform, whitened = whiten(data)
    sol = rica_fit(
        whitened, k, cfg.lam, cfg.seed, cfg.restarts, cfg.max_iters,
        cfg.grad_tol, cfg.contrast_sign,
    )
    raw = MixingMatrix(transform.color_matrix() @ sol.z, None, "exact")
    return raw.normalized()


def reference_fit(data: SampleMatrix, config: IcaConfig) -> ReferenceFit:
    """Hold-out model selection followed by a fit at the selected k."""
    cfg = config.resolved(data.num_variables)
    train, holdout = split_holdout(data, cfg)
    k_star, costs = select_model(
        train, holdout, range(cfg.k_min, cfg.k_max + 1), cfg.lam, cfg.seed,
        cfg.restarts, cfg.max_iters, cfg.grad_tol, cfg.contrast_sign,
    )
    transform, train_w = whiten(train)
    sol = rica_fit(
        train_w, k_star, cfg.lam, cfg.seed, cfg.restarts, cfg.max_iters,
        cfg.grad_tol, cfg.contrast_sign,
    )
    raw = MixingMatrix(transform.color_matrix() @ sol.z, None, "exact")
    return ReferenceFit(raw.normalized(), k_star, costs, sol, transform)


def estimate_mixing(data: SampleMatrix, config: IcaConfig) -> MixingMatrix:
    """Estimated overcomplete mixing matrix, columns normalized, unlabeled."""
    return reference_fit(data, config).mixing
