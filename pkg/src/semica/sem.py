"""Linear SEMs with latent variables and exact mixing-matrix algebra.

A model V = A V + N over a DAG determines V = B N with B = (I - A)^{-1}.
Restricting to observed rows gives the overcomplete mixing B' whose columns
carry one exogenous noise each; merging linearly dependent columns yields
the reduced mixing B'' that an overcomplete ICA can identify.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import IllConditioned, ObservedColumnsDependent
from .graph import CausalOrder, Dag, validate_dag

_ROOT3 = float(np.sqrt(3.0))
_COND_LIMIT = 1e12


@dataclass(frozen=True)
class Noise:
    """Exogenous-noise descriptor.

    Families: ``uniform`` (params = endpoints), ``laplace`` (loc, scale),
    ``gaussian`` (mean, std), ``zero`` (degenerate, used for absorbed
    vertices) and ``sum`` (linear combination of independent terms).
    Defaults are zero-mean with unit variance.
    """

    family: str = "uniform"
    params: tuple[float, ...] = (-_ROOT3, _ROOT3)
    terms: tuple[tuple[float, "Noise"], ...] = ()

    def __post_init__(self):
        if self.family not in ("uniform", "laplace", "gaussian", "zero", "sum"):
            raise ValueError(f"unknown noise family {self.family!r}")
        if self.family == "sum" and not self.terms:
            raise ValueError("sum noise needs at least one term")

    @classmethod
    def unit(cls, family: str = "uniform") -> "Noise":
        if family == "uniform":
            return cls("uniform", (-_ROOT3, _ROOT3))
        if family == "laplace":
            return cls("laplace", (0.0, 1.0 / np.sqrt(2.0)))
        if family == "gaussian":
            return cls("gaussian", (0.0, 1.0))
        if family == "zero":
            return cls("zero", ())
        raise ValueError(f"no unit parameterization for {family!r}")

    def is_zero(self) -> bool:
        return self.family == "zero"

    def scaled_plus(self, coeff: float, other: "Noise") -> "Noise":
        """Noise equal to self + coeff * other (independent draws)."""
        base = self.terms if self.family == "sum" else ((1.0, self),)
        return Noise("sum", (), base + ((float(coeff), other),))


@dataclass(frozen=True)
class LinearSem:
    """A weighted DAG plus an observed/latent partition and noise specs."""

    graph: Dag
    observed: tuple[int, ...]
    latent: tuple[int, ...]
    noise: tuple[Noise, ...]

    def __post_init__(self):
        p = self.graph.num_vertices
        object.__setattr__(self, "observed", tuple(sorted(self.observed)))
        object.__setattr__(self, "latent", tuple(sorted(self.latent)))
        if sorted(self.observed + self.latent) != list(range(p)):
            raise ValueError("observed and latent must partition the vertices")
        if len(self.observed) < 1:
            raise ValueError("at least one observed variable required")
        if len(self.noise) != p:
            raise ValueError("one noise spec per vertex required")
        validate_dag(self.graph)  # rejects cyclic graphs up front

    @classmethod
    def from_graph(cls, graph: Dag, observed: Sequence[int], noise_family: str = "uniform") -> "LinearSem":
        observed = tuple(sorted(observed))
        latent = tuple(v for v in range(graph.num_vertices) if v not in observed)
        return cls(graph, observed, latent, (Noise.unit(noise_family),) * graph.num_vertices)

    @property
    def num_observed(self) -> int:
        return len(self.observed)

    @property
    def num_latent(self) -> int:
        return len(self.latent)

    def is_observed(self, v: int) -> bool:
        return v in set(self.observed)

    def causal_order(self) -> CausalOrder:
        return validate_dag(self.graph)


@dataclass(frozen=True)
class ColumnLabel:
    """Provenance of one mixing column: the vertex owning its noise.

    ``absorbed`` lists (vertex, alpha) pairs whose noises were merged into
    this column, in merge order.
    """

    vertex: int
    observed: bool
    absorbed: tuple[tuple[int, float], ...] = ()


@dataclass(frozen=True)
class MergeRecord:
    """One column merge: removed latent column = alpha * absorber column.

    ``absorber`` is None for exactly-zero columns (noise dropped outright).
    """

    removed: int
    absorber: int | None
    alpha: float


@dataclass(frozen=True)
class MixingMatrix:
    """p_o x k mixing matrix with optional per-column provenance labels.

    ``scale_convention`` is ``exact`` (columns are true noise coefficients,
    observed columns have a unit entry on their own row) or ``normalized``
    (every column divided by its maximum-absolute entry, sign-flipped so
    that entry is +1).
    """

    entries: np.ndarray
    column_labels: tuple[ColumnLabel, ...] | None = None
    scale_convention: str = "exact"

    def __post_init__(self):
        entries = np.array(self.entries, dtype=float)
        if entries.ndim != 2:
            raise ValueError("entries must be a matrix")
        if not np.all(np.isfinite(entries)):
            raise ValueError("entries must be finite")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        if self.scale_convention not in ("exact", "normalized"):
            raise ValueError(f"unknown scale convention {self.scale_convention!r}")
        if self.column_labels is not None and len(self.column_labels) != entries.shape[1]:
            raise ValueError("one label per column required")

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def column_of(self, vertex: int) -> int:
        if self.column_labels is None:
            raise ValueError("matrix has no column labels")
        for idx, lab in enumerate(self.column_labels):
            if lab.vertex == vertex:
                return idx
        raise KeyError(f"no column for vertex {vertex}")

    def normalized(self) -> "MixingMatrix":
        """Scale every column so its maximum-absolute entry becomes +1."""
        out = np.array(self.entries)
        for c in range(out.shape[1]):
            pivot = out[np.argmax(np.abs(out[:, c])), c]
            if pivot != 0.0:
                out[:, c] /= pivot
        return MixingMatrix(out, self.column_labels, "normalized")

    def support(self, tol: float = 1e-9) -> np.ndarray:
        return np.abs(self.entries) > tol


def total_effect_matrix(sem: LinearSem) -> np.ndarray:
    """B = (I - A)^{-1}; entry (j, i) sums path weights over all paths i ⇝ j."""
    a = sem.graph.adjacency_matrix()
    return _solve_unipotent(np.eye(len(a)) - a, np.eye(len(a)), "I - A")


def observed_direct_matrix(sem: LinearSem) -> np.ndarray:
    """D = A_oo + A_ol (I - A_ll)^{-1} A_lo, the reduced direct effects
    among observed variables once latent routes are marginalized."""
    a = sem.graph.adjacency_matrix()
    obs, lat = list(sem.observed), list(sem.latent)
    a_oo = a[np.ix_(obs, obs)]
    if not lat:
        return a_oo
    a_ol = a[np.ix_(obs, lat)]
    a_lo = a[np.ix_(lat, obs)]
    a_ll = a[np.ix_(lat, lat)]
    through = _solve_unipotent(np.eye(len(lat)) - a_ll.T, a_ol.T, "I - A_ll").T
    return a_oo + through @ a_lo


def observed_mixing(sem: LinearSem) -> MixingMatrix:
    """B' = [(I - D)^{-1} | (I - D)^{-1} A_ol (I - A_ll)^{-1}] in exact mode.

    Rows are observed variables (ascending vertex); columns carry the
    observed noises first, then the latent noises, both ascending.
    """
    a = sem.graph.adjacency_matrix()
    obs, lat = list(sem.observed), list(sem.latent)
    d = observed_direct_matrix(sem)
    b_o = _solve_unipotent(np.eye(len(obs)) - d, np.eye(len(obs)), "I - D")
    labels = [ColumnLabel(v, True) for v in obs]
    if lat:
        a_ol = a[np.ix_(obs, lat)]
        a_ll = a[np.ix_(lat, lat)]
        lat_cols = _solve_unipotent(np.eye(len(lat)) - a_ll.T, a_ol.T, "I - A_ll").T
        b_l = b_o @ lat_cols
        entries = np.hstack([b_o, b_l])
        labels += [ColumnLabel(v, False) for v in lat]
    else:
        entries = b_o
    return MixingMatrix(entries, tuple(labels), "exact")


def reduce_mixing(
    m: MixingMatrix, tol: float = 1e-9
) -> tuple[MixingMatrix, tuple[MergeRecord, ...]]:
    """Merge linearly dependent latent columns of an exact mixing matrix.

    Latent columns are scanned in ascending vertex order; each dependent one
    is merged into its lowest-index surviving partner, observed partners
    preferred. Exactly-zero latent columns are dropped (absorber None).
    Observed columns always survive; if two of them are dependent within
    ``tol`` the model is unfaithful and ObservedColumnsDependent is raised.
    """
    if m.scale_convention != "exact":
        raise ValueError("reduce_mixing requires an exact-mode matrix")
    if m.column_labels is None:
        raise ValueError("reduce_mixing requires column labels")
    labels = list(m.column_labels)
    cols = [np.array(m.entries[:, c]) for c in range(m.entries.shape[1])]

    obs_idx = [c for c, lab in enumerate(labels) if lab.observed]
    for a_pos, ca in enumerate(obs_idx):
        for cb in obs_idx[a_pos + 1:]:
            if _dependent(cols[ca], cols[cb], tol) is not None:
                raise ObservedColumnsDependent(
                    f"columns of V{labels[ca].vertex + 1} and V{labels[cb].vertex + 1} "
                    "are linearly dependent (faithfulness violation)"
                )

    log: list[MergeRecord] = []
    removed: set[int] = set()
    scan = sorted(
        (c for c, lab in enumerate(labels) if not lab.observed),
        key=lambda c: labels[c].vertex,
    )
    for c in scan:
        col = cols[c]
        if float(np.linalg.norm(col)) <= tol:
            log.append(MergeRecord(labels[c].vertex, None, 0.0))
            removed.add(c)
            continue
        partners = sorted(
            (o for o in range(len(cols)) if o != c and o not in removed),
            key=lambda o: (not labels[o].observed, labels[o].vertex),
        )
        for o in partners:
            alpha = _dependent(col, cols[o], tol)
            if alpha is not None:
                log.append(MergeRecord(labels[c].vertex, labels[o].vertex, alpha))
                labels[o] = replace(
                    labels[o], absorbed=labels[o].absorbed + ((labels[c].vertex, alpha),)
                )
                removed.add(c)
                break

    keep = [c for c in range(len(cols)) if c not in removed]
    reduced = MixingMatrix(
        np.stack([cols[c] for c in keep], axis=1),
        tuple(labels[c] for c in keep),
        "exact",
    )
    return reduced, tuple(log)


def _dependent(col: np.ndarray, other: np.ndarray, tol: float) -> float | None:
    """Return alpha with col ≈ alpha * other when the two are dependent.

    The test is scale-free: both columns are normalized to unit Euclidean
    norm and compared up to sign.
    """
    na, nb = float(np.linalg.norm(col)), float(np.linalg.norm(other))
    if na <= tol or nb <= tol:
        return None
    ua, ub = col / na, other / nb
    if min(np.linalg.norm(ua - ub), np.linalg.norm(ua + ub)) > tol:
        return None
    sign = 1.0 if float(ua @ ub) >= 0 else -1.0
    return sign * na / nb


def _solve_unipotent(mat: np.ndarray, rhs: np.ndarray, name: str) -> np.ndarray:
    """LU solve guarded by a condition-number check.

    The matrices inverted here are unipotent-triangular up to permutation,
    so ill conditioning indicates a malformed model rather than bad luck.
    """
    if mat.size and np.linalg.cond(mat) > _COND_LIMIT:
        raise IllConditioned(f"{name} has condition number above {_COND_LIMIT:g}")
    return np.linalg.solve(mat, rhs)
