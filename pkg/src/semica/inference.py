"""Causal conclusions from a recovered mixing support.

Pairwise path decisions come from counting zero/nonzero column patterns;
a causal order follows from the induced auxiliary graph; total-effect
matrices are read off by matching column patterns to observed descendant
sets, either uniquely or as an enumerated candidate family. The module
also builds the observationally equivalent alternative models showing why
effects are not always unique.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import (
    AmbiguousColumn,
    CycleDetected,
    InconsistentVerdicts,
    NoMatchingColumn,
    StructureUnsupported,
)
from .graph import CausalOrder, Dag, all_paths, descendants, path_weight, validate_dag
from .sem import LinearSem, MixingMatrix, Noise
from .support import SupportMatrix


class PairVerdict(Enum):
    PATH = "path"
    NO_PATH = "no-path"
    UNDECIDED = "undecided"


@dataclass(frozen=True)
class PairDecision:
    """Outcome for an ordered observed pair (i, j).

    ``n_zero_nonzero`` counts columns vanishing at i but not at j (evidence
    for i ⇝ j); ``n_nonzero_zero`` the reverse. ``forward`` is the verdict
    for i ⇝ j, ``backward`` for j ⇝ i.
    """

    n_zero_nonzero: int
    n_nonzero_zero: int
    forward: PairVerdict
    backward: PairVerdict


def pairwise_path(support: SupportMatrix, i: int, j: int) -> PairDecision:
    """Decide the path relation between observed variables i and j.

    i ⇝ j exactly when some column vanishes at i but not at j and none does
    the reverse. Both counts positive means no path either way; both zero
    leaves the pair undecided (impossible on exact faithful input, where
    each variable's own-noise column separates it, but possible after
    support errors).
    """
    if i == j:
        raise ValueError("pairwise_path needs two distinct variables")
    row_i, row_j = support.support[i], support.support[j]
    n_zero_nonzero = int(np.sum(~row_i & row_j))
    n_nonzero_zero = int(np.sum(row_i & ~row_j))
    if n_zero_nonzero > 0 and n_nonzero_zero == 0:
        forward, backward = PairVerdict.PATH, PairVerdict.NO_PATH
    elif n_nonzero_zero > 0 and n_zero_nonzero == 0:
        forward, backward = PairVerdict.NO_PATH, PairVerdict.PATH
    elif n_zero_nonzero > 0 and n_nonzero_zero > 0:
        forward = backward = PairVerdict.NO_PATH
    else:
        forward = backward = PairVerdict.UNDECIDED
    return PairDecision(n_zero_nonzero, n_nonzero_zero, forward, backward)


@dataclass(frozen=True)
class PathVerdictMatrix:
    """Ternary path relation over all ordered observed pairs.

    ``counts[i, j]`` holds the number of columns zero at i and nonzero at
    j, so counts[j, i] is the reverse count for the same pair.
    """

    verdicts: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        verdicts = np.asarray(self.verdicts, dtype=object)
        counts = np.asarray(self.counts, dtype=int)
        verdicts.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "verdicts", verdicts)
        object.__setattr__(self, "counts", counts)

    @property
    def num_variables(self) -> int:
        return self.verdicts.shape[0]

    def verdict(self, i: int, j: int) -> PairVerdict:
        return self.verdicts[i, j]

    def path_edges(self) -> tuple[tuple[int, int], ...]:
        p = self.num_variables
        return tuple(
            (i, j) for i in range(p) for j in range(p)
            if i != j and self.verdicts[i, j] is PairVerdict.PATH
        )

    def to_json_dict(self, names: Sequence[str] | None = None) -> dict:
        p = self.num_variables
        if names is None:
            names = [f"V{i + 1}" for i in range(p)]
        return {
            "variables": list(names),
            "verdicts": [
                [None if i == j else self.verdicts[i, j].value for j in range(p)]
                for i in range(p)
            ],
            "counts": [[int(v) for v in row] for row in self.counts],
        }


def all_verdicts(support: SupportMatrix) -> PathVerdictMatrix:
    """Pairwise decisions for every ordered pair; the diagonal is NO_PATH."""
    p = support.shape[0]
    verdicts = np.full((p, p), PairVerdict.NO_PATH, dtype=object)
    counts = np.zeros((p, p), dtype=int)
    for i in range(p):
        for j in range(i + 1, p):
            d = pairwise_path(support, i, j)
            counts[i, j] = d.n_zero_nonzero
            counts[j, i] = d.n_nonzero_zero
            verdicts[i, j] = d.forward
            verdicts[j, i] = d.backward
    return PathVerdictMatrix(verdicts, counts)


@dataclass(frozen=True)
class OrderResult:
    auxiliary: Dag
    order: CausalOrder
    dropped_edges: tuple[tuple[int, int], ...]


def causal_order_infer(
    support: SupportMatrix | PathVerdictMatrix, break_cycles: bool = False
) -> OrderResult:
    """Build the auxiliary path graph and topologically order it.

    Cyclic verdicts raise InconsistentVerdicts unless ``break_cycles`` is
    set, in which case the cycle edge with the weakest supporting count is
    dropped (ties lexicographic) until the graph is acyclic. Verdicts
    derived from one support matrix are strict-subset relations between
    column sets and can never cycle; the recovery path exists for verdict
    matrices supplied directly (e.g. merged from several runs).
    """
    verdicts = support if isinstance(support, PathVerdictMatrix) else all_verdicts(support)
    edges = set(verdicts.path_edges())
    dropped: list[tuple[int, int]] = []
    while True:
        graph = Dag.from_edges(verdicts.num_variables, {e: 1.0 for e in edges})
        try:
            order = validate_dag(graph)
        except CycleDetected as exc:
            cycle_edges = list(zip(exc.cycle, exc.cycle[1:] + exc.cycle[:1]))
            if not break_cycles:
                raise InconsistentVerdicts(exc.cycle) from exc
            weakest = min(cycle_edges, key=lambda e: (verdicts.counts[e[0], e[1]], e))
            edges.discard(weakest)
            dropped.append(weakest)
            continue
        return OrderResult(graph, order, tuple(dropped))


@dataclass(frozen=True)
class DescendantSets:
    """Per-column sets of observed row indices with nonzero support."""

    sets: tuple[frozenset[int], ...]

    @classmethod
    def from_support(cls, support: SupportMatrix) -> "DescendantSets":
        return cls(support.column_patterns())

    def __len__(self) -> int:
        return len(self.sets)


def descendant_sets(support: SupportMatrix) -> DescendantSets:
    return DescendantSets.from_support(support)


def observed_patterns(des: DescendantSets, num_observed: int) -> tuple[frozenset[int], ...]:
    """Observed descendant set of each observed variable, from the columns.

    Variable i's set is {i} plus every j with a path verdict i ⇝ j; the
    verdicts are recomputed from the column patterns.
    """
    def n_zn(i: int, j: int) -> int:
        return sum(1 for s in des.sets if i not in s and j in s)

    out = []
    for i in range(num_observed):
        mine = {i}
        for j in range(num_observed):
            if j != i and n_zn(i, j) > 0 and n_zn(j, i) == 0:
                mine.add(j)
        out.append(frozenset(mine))
    return tuple(out)


@dataclass(frozen=True)
class EffectCandidateSet:
    """Every total-effect matrix compatible with the recovered support.

    ``candidates[c]`` selects column ``choices[c][i]`` for observed
    variable i, normalized to a unit diagonal. ``multiplicity`` is the
    product of the per-variable candidate counts ``r``; numerically
    singular selections are dropped from ``candidates`` into ``rejected``
    (a measure-zero event), so len(candidates) can fall short of it.
    """

    candidates: tuple[np.ndarray, ...]
    choices: tuple[tuple[int, ...], ...]
    r: tuple[int, ...]
    multiplicity: int
    rejected: tuple[tuple[int, ...], ...] = ()
    has_duplicates: bool = False

    def to_json_dict(self) -> dict:
        return {
            "multiplicity": self.multiplicity,
            "r": list(self.r),
            "candidates": [
                {"choice": list(choice), "matrix": [[float(v) for v in row] for row in cand]}
                for choice, cand in zip(self.choices, self.candidates)
            ],
            "rejected": [list(c) for c in self.rejected],
            "has_duplicates": self.has_duplicates,
        }


def _candidate_columns(
    mixing: MixingMatrix, des: DescendantSets
) -> tuple[tuple[frozenset[int], ...], list[list[int]]]:
    p_o = mixing.shape[0]
    if len(des) != mixing.shape[1]:
        raise ValueError("one descendant set per column required")
    patterns = observed_patterns(des, p_o)
    per_variable = []
    for i, pattern in enumerate(patterns):
        matches = [c for c, s in enumerate(des.sets) if s == pattern]
        if not matches:
            raise NoMatchingColumn(
                f"no column matches the descendant pattern of V{i + 1} "
                f"({sorted(v + 1 for v in pattern)})"
            )
        per_variable.append(matches)
    return patterns, per_variable


def enumerate_effect_sets(mixing: MixingMatrix, des: DescendantSets) -> EffectCandidateSet:
    """All candidate observed total-effect matrices (one column per variable).

    Candidate columns for variable i are the columns whose nonzero pattern
    equals its observed descendant set; the Cartesian product over
    variables, in lexicographic choice order, gives the full family.
    """
    _, per_variable = _candidate_columns(mixing, des)
    r = tuple(len(m) for m in per_variable)
    multiplicity = int(np.prod(r))
    candidates, choices, rejected = [], [], []
    for combo in itertools.product(*per_variable):
        pivots = np.array([mixing.entries[i, c] for i, c in enumerate(combo)])
        if np.any(pivots == 0.0):
            rejected.append(tuple(combo))
            continue
        matrix = np.stack(
            [mixing.entries[:, c] / mixing.entries[i, c] for i, c in enumerate(combo)],
            axis=1,
        )
        if np.linalg.cond(matrix) > 1e12:
            warnings.warn(
                f"candidate {combo} is numerically singular; rejected "
                "(a measure-zero coincidence)"
            )
            rejected.append(tuple(combo))
            continue
        candidates.append(matrix)
        choices.append(tuple(combo))
    has_duplicates = any(
        np.allclose(a, b, atol=1e-9)
        for idx, a in enumerate(candidates) for b in candidates[idx + 1:]
    )
    return EffectCandidateSet(
        tuple(candidates), tuple(choices), r, multiplicity, tuple(rejected), has_duplicates
    )


def unique_effects(mixing: MixingMatrix, des: DescendantSets) -> np.ndarray:
    """The unique observed total-effect matrix, when patterns pin it down.

    Requires every observed variable's descendant pattern to match exactly
    one column (the unique-identifiability condition); the matched column,
    normalized by its own-variable entry, is that variable's effect column.
    """
    _, per_variable = _candidate_columns(mixing, des)
    ambiguous = [i for i, m in enumerate(per_variable) if len(m) > 1]
    if ambiguous:
        detail = ", ".join(
            f"V{i + 1} matches columns {per_variable[i]}" for i in ambiguous
        )
        raise AmbiguousColumn(
            f"descendant patterns do not identify a unique column: {detail}"
        )
    p_o = mixing.shape[0]
    effects = np.empty((p_o, p_o))
    for i, (col,) in enumerate(per_variable):
        effects[:, i] = mixing.entries[:, col] / mixing.entries[i, col]
    return effects


def reconstruct_sem(
    candidate: np.ndarray, residual_columns: np.ndarray, tol: float = 1e-9
) -> LinearSem:
    """SEM whose observed mixing reproduces a candidate selection exactly.

    Direct effects among observed variables are I - candidate^{-1}; every
    residual column becomes a parentless latent feeding the observed block.
    Entries below ``tol`` are treated as structural zeros.
    """
    p_o = candidate.shape[0]
    inv = np.linalg.solve(candidate, np.eye(p_o))
    a_oo = np.eye(p_o) - inv
    a_ol = inv @ residual_columns
    p_l = residual_columns.shape[1]
    edges: dict[tuple[int, int], float] = {}
    for i in range(p_o):
        for j in range(p_o):
            if abs(a_oo[i, j]) > tol:
                edges[(j, i)] = a_oo[i, j]
    for i in range(p_o):
        for j in range(p_l):
            if abs(a_ol[i, j]) > tol:
                edges[(p_o + j, i)] = a_ol[i, j]
    graph = Dag.from_edges(p_o + p_l, edges)
    return LinearSem.from_graph(graph, observed=range(p_o))


def construct_equivalent_model(
    sem: LinearSem,
    i: int,
    j: int,
    k: int,
    paths: tuple[Sequence[int], Sequence[int], Sequence[int]],
) -> LinearSem:
    """Observationally equivalent model with a different i -> j total effect.

    Given observed i, j, a parentless latent k that is i's only parent,
    and chosen paths P1: k ⇝ i, P2: k ⇝ j avoiding i (first intermediates
    distinct), and P3: i ⇝ j, adjusts the first edge weight of each chosen
    path so the total effects k → i, k → j, i → j become 1, -gamma/alpha
    and beta + gamma/alpha, and swaps the noises of i and k (i's becomes
    alpha times k's). The observed joint distribution is unchanged while
    the i -> j total effect moves to beta + gamma/alpha. Latent chains are
    admissible on the k ⇝ j and i ⇝ j families only: an intermediate on
    k ⇝ i would keep a noise whose j-coefficient shifts with the new
    i -> j effect.
    """
    p1, p2, p3 = (tuple(p) for p in paths)
    _check_structure(sem, i, j, k, p1, p2, p3)

    fam_ki = list(all_paths(sem.graph, k, i))
    fam_kj = list(all_paths(sem.graph, k, j, avoid=(i,)))
    fam_ij = list(all_paths(sem.graph, i, j))
    alpha = sum(path_weight(sem.graph, p) for p in fam_ki)
    gamma = sum(path_weight(sem.graph, p) for p in fam_kj)
    beta = sum(path_weight(sem.graph, p) for p in fam_ij)
    if alpha == 0.0:
        raise StructureUnsupported("total effect of the latent source on i vanishes")

    u1, u2, u3 = p1[1], p2[1], p3[1]
    wmap = sem.graph.weight_map

    def grouped(family, first_edge):
        hit = sum(path_weight(sem.graph, p) for p in family if (p[0], p[1]) == first_edge)
        return hit, sum(path_weight(sem.graph, p) for p in family) - hit

    s_i_u1, _ = grouped(fam_ki, (k, u1))
    s_i_u2, _ = grouped(fam_ki, (k, u2))
    s_i_rest = alpha - s_i_u1 - s_i_u2
    s_j_u1, _ = grouped(fam_kj, (k, u1))
    s_j_u2, _ = grouped(fam_kj, (k, u2))
    s_j_rest = gamma - s_j_u1 - s_j_u2
    s_ij_u3, _ = grouped(fam_ij, (i, u3))
    s_ij_rest = beta - s_ij_u3

    system = np.array([[s_i_u1, s_i_u2], [s_j_u1, s_j_u2]])
    rhs = np.array([1.0 - s_i_rest, -gamma / alpha - s_j_rest])
    if abs(np.linalg.det(system)) < 1e-12:
        raise StructureUnsupported("path-weight system for the two adjusted edges is singular")
    x1, x2 = np.linalg.solve(system, rhs)
    x3 = (beta + gamma / alpha - s_ij_rest) / s_ij_u3

    new_weights = dict(wmap)
    new_weights[(k, u1)] = wmap[(k, u1)] * x1
    new_weights[(k, u2)] = wmap[(k, u2)] * x2
    new_weights[(i, u3)] = wmap[(i, u3)] * x3
    for edge, w in list(new_weights.items()):
        if w == 0.0:
            raise StructureUnsupported(f"adjusted weight of edge {edge} vanishes")
    graph = Dag.from_edges(sem.graph.num_vertices, new_weights)

    noise = list(sem.noise)
    noise[i], noise[k] = Noise("sum", (), ((alpha, sem.noise[k]),)), sem.noise[i]
    return LinearSem(graph, sem.observed, sem.latent, tuple(noise))


def _check_structure(sem, i, j, k, p1, p2, p3):
    observed = set(sem.observed)
    if i not in observed or j not in observed:
        raise StructureUnsupported("i and j must be observed")
    if k in observed:
        raise StructureUnsupported("the source vertex must be latent")
    if sem.graph.parents(k):
        raise StructureUnsupported("the latent source must have no parents")
    if tuple(sem.graph.parents(i)) != (k,):
        # an ancestor u of i other than k keeps its own noise, whose
        # coefficient on j scales with the adjusted i -> j effect; nothing
        # compensates, so the construction requires i's sole parent to be k
        raise StructureUnsupported("i must have the latent source as its only parent")

    fam_ki = list(all_paths(sem.graph, k, i))
    fam_kj = list(all_paths(sem.graph, k, j, avoid=(i,)))
    fam_ij = list(all_paths(sem.graph, i, j))
    if not fam_kj:
        raise StructureUnsupported("no path from the latent source to j avoids i")
    if not fam_ki or not fam_ij:
        raise StructureUnsupported("paths k ⇝ i and i ⇝ j are both required")
    for fam, ends in ((fam_ki, {k, i}), (fam_kj, {k, j}), (fam_ij, {i, j})):
        for path in fam:
            if any(v in observed and v not in ends for v in path[1:-1]):
                raise StructureUnsupported(
                    "every intermediate vertex on the three path families must be latent"
                )
    if tuple(p1) not in {tuple(p) for p in fam_ki}:
        raise StructureUnsupported("P1 must be a path from k to i")
    if tuple(p2) not in {tuple(p) for p in fam_kj}:
        raise StructureUnsupported("P2 must be a path from k to j avoiding i")
    if tuple(p3) not in {tuple(p) for p in fam_ij}:
        raise StructureUnsupported("P3 must be a path from i to j")
    if p1[1] == p2[1]:
        raise StructureUnsupported("P1 and P2 must have distinct first intermediates")

    others = observed - {i, j}
    reach = descendants(sem.graph, k) | descendants(sem.graph, i)
    if others & reach:
        raise StructureUnsupported(
            "observed variables outside {i, j} may not descend from the source or i"
        )
