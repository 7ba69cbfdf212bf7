"""Absorbing latent noises: graphical conditions, reduction to minimal form.

A latent vertex whose influence on the observed variables factors through a
single vertex (or vanishes) can donate its exogenous noise to that vertex
without changing the observed joint distribution. A model with no such
latent is minimal, which is exactly when the number of variables is
recoverable from the observed mixing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotAbsorbable
from .graph import eliminate_vertex
from .sem import LinearSem, Noise, total_effect_matrix


@dataclass(frozen=True)
class AbsorbAction:
    """Move ``absorbed``'s noise onto ``target`` (None = drop it).

    ``scalar`` is the total effect of ``absorbed`` on ``target`` — the
    coefficient the donated noise picks up — and 0.0 for target None.
    """

    absorbed: int
    target: int | None
    scalar: float


@dataclass(frozen=True)
class MinimalityReport:
    """Absorbability summary for a model (before reduction).

    ``absorbable`` pairs each absorbable latent with its legal targets
    (None stands for dropping the noise; a latent with no observable
    descendants lists only None, any target being equivalent for it).
    ``count_identifiable`` mirrors ``is_minimal``: the number of variables
    is recoverable exactly when no latent is absorbable.
    """

    is_minimal: bool
    count_identifiable: bool
    absorbable: tuple[tuple[int, tuple[int | None, ...]], ...]
    actions: tuple[AbsorbAction, ...]

    def to_json_dict(self) -> dict:
        return {
            "is_minimal": self.is_minimal,
            "count_identifiable": self.count_identifiable,
            "absorbable": [
                {
                    "latent": latent + 1,
                    "targets": [None if t is None else t + 1 for t in targets],
                }
                for latent, targets in self.absorbable
            ],
            "actions": [
                {
                    "absorbed": a.absorbed + 1,
                    "target": None if a.target is None else a.target + 1,
                    "scalar": a.scalar,
                }
                for a in self.actions
            ],
        }


@dataclass(frozen=True)
class ReductionResult:
    """Minimal model plus the replayable actions that produced it.

    ``vertex_map`` sends original vertex indices to indices in the reduced
    model (None for removed vertices). Actions use original indices and
    replay on the original model via apply_absorb.
    """

    sem: LinearSem
    actions: tuple[AbsorbAction, ...]
    report: MinimalityReport
    vertex_map: tuple[int | None, ...]


def observable_descendants(sem: LinearSem, v: int) -> frozenset[int]:
    """Observed vertices reachable from ``v`` by a directed path (v excluded)."""
    stack, seen = [v], set()
    while stack:
        for c in sem.graph.children(stack.pop()):
            if c not in seen:
                seen.add(c)
                stack.append(c)
    return frozenset(seen & set(sem.observed))


def is_absorbable(sem: LinearSem, latent_v: int, target: int | None) -> bool:
    """Graphical absorbability test.

    Target None: ``latent_v`` has no observable descendant. Target vertex:
    every path from ``latent_v`` to an observed vertex passes through the
    target, checked by deleting the target and re-testing reachability.
    """
    if latent_v not in sem.latent:
        raise ValueError(f"V{latent_v + 1} is not latent")
    if target is None:
        return not observable_descendants(sem, latent_v)
    if not 0 <= target < sem.graph.num_vertices:
        raise ValueError(f"target V{target + 1} out of range")
    if target == latent_v:
        return False
    stack, seen = [latent_v], set()
    while stack:
        for c in sem.graph.children(stack.pop()):
            if c != target and c not in seen:
                seen.add(c)
                stack.append(c)
    return not (seen & set(sem.observed))


def absorb_action(sem: LinearSem, latent_v: int, target: int | None) -> AbsorbAction:
    """Build the action for an absorbable latent, with its exact scalar."""
    if not is_absorbable(sem, latent_v, target):
        where = "the empty target" if target is None else f"V{target + 1}"
        raise NotAbsorbable(f"V{latent_v + 1} is not absorbable in {where}")
    if target is None:
        return AbsorbAction(latent_v, None, 0.0)
    scalar = float(total_effect_matrix(sem)[target, latent_v])
    return AbsorbAction(latent_v, target, scalar)


def apply_absorb(sem: LinearSem, action: AbsorbAction) -> LinearSem:
    """Zero the absorbed vertex's noise, augmenting the target's noise.

    The graph is unchanged; the absorbed vertex stays as a zero-noise
    pass-through (minimal_reduction removes such vertices). The observed
    joint coefficients against all surviving noises are preserved.
    """
    checked = absorb_action(sem, action.absorbed, action.target)
    if action.target is not None and not np.isclose(
        checked.scalar, action.scalar, rtol=1e-9, atol=1e-12
    ):
        raise ValueError(
            f"action scalar {action.scalar!r} does not match the model's "
            f"total effect {checked.scalar!r}"
        )
    noise = list(sem.noise)
    if action.target is not None:
        noise[action.target] = noise[action.target].scaled_plus(
            checked.scalar, noise[action.absorbed]
        )
    noise[action.absorbed] = Noise("zero", ())
    return LinearSem(sem.graph, sem.observed, sem.latent, tuple(noise))


def absorbable_latents(sem: LinearSem) -> tuple[tuple[int, tuple[int | None, ...]], ...]:
    """Each absorbable latent with its legal targets, ascending."""
    out = []
    for v in sem.latent:
        if is_absorbable(sem, v, None):
            out.append((v, (None,)))
            continue
        targets = tuple(
            t for t in range(sem.graph.num_vertices)
            if t != v and is_absorbable(sem, v, t)
        )
        if targets:
            out.append((v, targets))
    return tuple(out)


def minimal_reduction(sem: LinearSem) -> ReductionResult:
    """Absorb latents until none is absorbable, removing absorbed vertices.

    One pass policy, restarted after every action: first any latent with no
    observable descendant is dropped (ascending index), then condition-(b)
    latents are scanned ascending, preferring observed targets, then the
    lowest-index live latent. Removed vertices are spliced out by edge
    contraction, which preserves every remaining total effect, so recorded
    scalars match the original model and the actions replay on it.
    """
    absorbable = absorbable_latents(sem)
    work = sem
    cur_to_orig = list(range(sem.graph.num_vertices))
    actions: list[AbsorbAction] = []

    while True:
        action = _next_action(work)
        if action is None:
            break
        actions.append(
            AbsorbAction(
                cur_to_orig[action.absorbed],
                None if action.target is None else cur_to_orig[action.target],
                action.scalar,
            )
        )
        work = apply_absorb(work, action)
        work = _remove_vertex(work, action.absorbed)
        del cur_to_orig[action.absorbed]

    vertex_map: list[int | None] = [None] * sem.graph.num_vertices
    for new, orig in enumerate(cur_to_orig):
        vertex_map[orig] = new
    report = MinimalityReport(
        is_minimal=not absorbable,
        count_identifiable=not absorbable,
        absorbable=absorbable,
        actions=tuple(actions),
    )
    return ReductionResult(work, tuple(actions), report, tuple(vertex_map))


def _next_action(sem: LinearSem) -> AbsorbAction | None:
    live = [v for v in sem.latent if not sem.noise[v].is_zero()]
    for v in live:
        if is_absorbable(sem, v, None):
            return AbsorbAction(v, None, 0.0)
    for v in live:
        for t in list(sem.observed) + [t for t in live if t != v]:
            if is_absorbable(sem, v, t):
                return absorb_action(sem, v, t)
    return None


def _remove_vertex(sem: LinearSem, v: int) -> LinearSem:
    """Splice a zero-noise vertex out of the model (indices compact)."""
    if not sem.noise[v].is_zero():
        raise ValueError("only zero-noise vertices can be removed")
    graph = eliminate_vertex(sem.graph, v)
    shift = lambda u: u if u < v else u - 1
    observed = tuple(shift(u) for u in sem.observed if u != v)
    latent = tuple(shift(u) for u in sem.latent if u != v)
    noise = tuple(n for u, n in enumerate(sem.noise) if u != v)
    return LinearSem(graph, observed, latent, noise)
