"""End-to-end discovery: estimate, bootstrap, test, orient, read off effects."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AmbiguousColumn, NoMatchingColumn
from .ica import IcaConfig, ReferenceFit, SampleMatrix, reference_fit
from .inference import (
    DescendantSets,
    EffectCandidateSet,
    OrderResult,
    PathVerdictMatrix,
    all_verdicts,
    causal_order_infer,
    descendant_sets,
    enumerate_effect_sets,
    unique_effects,
)
from .sem import MixingMatrix
from .support import BootstrapEnsemble, SupportMatrix, bootstrap_replicates, zero_support


@dataclass(frozen=True)
class DiscoveryConfig:
    """Knobs for the full pipeline; ICA settings nest in ``ica``."""

    ica: IcaConfig = field(default_factory=IcaConfig)
    bootstrap_reps: int = 10
    alpha: float = 0.05
    greedy_match: bool = False
    enumerate_all: bool = False
    break_cycles: bool = False
    threads: int = 1

    def with_seed(self, seed: int) -> "DiscoveryConfig":
        return replace(self, ica=replace(self.ica, seed=seed))


@dataclass(frozen=True)
class DiscoveryResult:
    reference: ReferenceFit
    ensemble: BootstrapEnsemble
    support: SupportMatrix
    verdicts: PathVerdictMatrix
    order: OrderResult | None
    effects: np.ndarray | None
    candidates: EffectCandidateSet | None
    effects_error: str | None
    names: tuple[str, ...]

    @property
    def mixing(self) -> MixingMatrix:
        return self.reference.mixing


def path_analysis(
    data: SampleMatrix, config: DiscoveryConfig
) -> tuple[ReferenceFit, BootstrapEnsemble, SupportMatrix, PathVerdictMatrix]:
    """The support-recovery front of the pipeline (no ordering or effects)."""
    ref = reference_fit(data, config.ica)
    ensemble = bootstrap_replicates(
        data, config.ica, config.bootstrap_reps, k_star=ref.k,
        greedy_match=config.greedy_match, threads=config.threads,
    )
    support = zero_support(ensemble, config.alpha)
    return ref, ensemble, support, all_verdicts(support)


def _duplicate_groups(support: SupportMatrix) -> list[list[int]]:
    """Group columns that re-express one component.

    When the selected column count overshoots, the extra column duplicates
    an existing one: same zero pattern, near-identical entries
    (sign-folded distance of the normalized means <= 0.15). Genuinely
    distinct columns sit far apart.
    """
    patterns = support.column_patterns()
    groups: list[list[int]] = []
    for c in range(support.shape[1]):
        for group in groups:
            rep = group[0]
            a, b = support.mean[:, rep], support.mean[:, c]
            if patterns[rep] == patterns[c] and min(
                np.linalg.norm(a - b), np.linalg.norm(a + b)
            ) <= 0.15:
                group.append(c)
                break
        else:
            groups.append([c])
    return groups


def merge_duplicate_columns(support: SupportMatrix) -> SupportMatrix:
    """Fold duplicate support columns into one (entries averaged)."""
    groups = _duplicate_groups(support)
    if all(len(g) == 1 for g in groups):
        return support
    mean = np.stack([support.mean[:, g].mean(axis=1) for g in groups], axis=1)
    stderr = np.stack([support.stderr[:, g].max(axis=1) for g in groups], axis=1)
    sup = np.stack([support.support[:, g[0]] for g in groups], axis=1)
    return SupportMatrix(sup, mean, stderr, support.alpha)


def discover(data: SampleMatrix, config: DiscoveryConfig) -> DiscoveryResult:
    """Run the whole pipeline on observational samples.

    Effects come from the bootstrap median matrix (aligned with the
    support, robust to a stray replicate): the unique read-off when
    descendant patterns identify each observed column, otherwise the
    enumerated candidate family (also forced by ``enumerate_all``).
    Support columns that duplicate one component are folded first. Raises
    InconsistentVerdicts for cyclic verdicts unless ``break_cycles`` is
    set.
    """
    ref, ensemble, raw_support, _ = path_analysis(data, config)
    groups = _duplicate_groups(raw_support)
    support = merge_duplicate_columns(raw_support)
    verdicts = all_verdicts(support)
    order = causal_order_infer(support, break_cycles=config.break_cycles)

    median = np.median(ensemble.aligned_stack(), axis=0)
    entries = np.stack([median[:, g].mean(axis=1) for g in groups], axis=1)
    mean_mixing = MixingMatrix(entries, None, "exact").normalized()
    des = descendant_sets(support)
    effects = None
    candidates = None
    effects_error = None
    try:
        if config.enumerate_all:
            candidates = enumerate_effect_sets(mean_mixing, des)
            if candidates.multiplicity == 1 and candidates.candidates:
                effects = candidates.candidates[0]
        else:
            effects = unique_effects(mean_mixing, des)
    except AmbiguousColumn:
        try:
            candidates = enumerate_effect_sets(mean_mixing, des)
        except NoMatchingColumn as exc:
            effects_error = str(exc)
    except NoMatchingColumn as exc:
        effects_error = str(exc)
    return DiscoveryResult(
        ref, ensemble, support, verdicts, order, effects, candidates,
        effects_error, data.variable_names,
    )
