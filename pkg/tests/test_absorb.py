import numpy as np
import pytest

from semica.absorb import (
    AbsorbAction,
    absorb_action,
    absorbable_latents,
    apply_absorb,
    is_absorbable,
    minimal_reduction,
)
from semica.errors import NotAbsorbable
from semica.graph import Dag
from semica.sem import LinearSem, observed_mixing, reduce_mixing
from semica.simulate import random_dag

from .conftest import fig6_sem

# 0-based handles for the 8-vertex worked example (observed V1, V2)
V1, V2, V3, V4, V5, V6, V7, V8 = range(8)


def random_weighted_sem(p, latent_count, seed, continuous=True):
    rng = np.random.default_rng(seed)
    base = random_dag(p, edge_prob=0.4, weight=0.9, seed=seed)
    if continuous:
        weights = {
            e: float(rng.uniform(0.3, 1.5) * rng.choice([-1.0, 1.0]))
            for e in base.edges
        }
        base = Dag.from_edges(p, weights)
    latent = sorted(int(v) for v in rng.choice(p, size=latent_count, replace=False))
    observed = [v for v in range(p) if v not in latent]
    if len(observed) < 1:
        observed, latent = latent[:1], latent[1:]
    return LinearSem.from_graph(base, observed)


class TestIsAbsorbable:
    def test_childless_latent_absorbs_to_empty(self, fig3_sem):
        assert is_absorbable(fig3_sem, V7, None)

    def test_upstream_latents_absorb_into_bottleneck(self, fig3_sem):
        assert is_absorbable(fig3_sem, V3, V5)
        assert is_absorbable(fig3_sem, V4, V5)

    def test_branching_latents_do_not_absorb_into_observed(self, fig3_sem):
        assert not is_absorbable(fig3_sem, V5, V1)
        assert not is_absorbable(fig3_sem, V5, V2)
        assert not is_absorbable(fig3_sem, V8, V1)
        assert not is_absorbable(fig3_sem, V8, V2)

    def test_single_child_latent_absorbs_into_it(self, fig3_sem):
        assert is_absorbable(fig3_sem, V6, V2)

    def test_observed_vertex_rejected(self, fig3_sem):
        with pytest.raises(ValueError):
            is_absorbable(fig3_sem, V1, V2)


class TestApplyAbsorb:
    def test_scalar_accumulates_both_routes(self, fig3_sem, fig3_weights):
        w = fig3_weights
        action = absorb_action(fig3_sem, V3, V5)
        assert action.scalar == pytest.approx(w["bet"] + w["alp"] * w["gam"], abs=1e-12)
        action4 = absorb_action(fig3_sem, V4, V5)
        assert action4.scalar == pytest.approx(w["gam"], abs=1e-12)

    def test_chain_absorb_augments_target_noise(self, chain_sem):
        sem, alpha, _ = chain_sem
        out = apply_absorb(sem, absorb_action(sem, 2, 0))
        assert out.noise[2].is_zero()
        assert out.noise[0].family == "sum"
        assert out.noise[0].terms[-1][0] == pytest.approx(alpha)

    def test_childless_absorb_to_empty_keeps_observed_columns(self, fig3_sem):
        before = observed_mixing(fig3_sem)
        col = before.column_of(V7)
        assert np.allclose(before.entries[:, col], 0.0, atol=1e-12)
        out = apply_absorb(fig3_sem, absorb_action(fig3_sem, V7, None))
        assert out.noise[V7].is_zero()

    def test_rejects_illegal_action(self, fig3_sem):
        with pytest.raises(NotAbsorbable):
            absorb_action(fig3_sem, V5, V1)
        with pytest.raises(NotAbsorbable):
            apply_absorb(fig3_sem, AbsorbAction(V5, V1, 0.123))

    def test_absorb_preserves_observed_coefficients(self):
        # the donated noise reappears on the target column with the scalar
        checked = 0
        for seed in range(40):
            sem = random_weighted_sem(7, 3, seed)
            mix = observed_mixing(sem)
            for v in sem.latent:
                col_v = mix.entries[:, mix.column_of(v)]
                if is_absorbable(sem, v, None):
                    assert np.allclose(col_v, 0.0, atol=1e-10)
                    checked += 1
                    continue
                for t in range(7):
                    if t != v and is_absorbable(sem, v, t):
                        action = absorb_action(sem, v, t)
                        apply_absorb(sem, action)  # must not raise
                        col_t = mix.entries[:, mix.column_of(t)]
                        assert np.allclose(action.scalar * col_t, col_v, atol=1e-10)
                        checked += 1
        assert checked > 10


class TestMinimalReduction:
    def test_worked_example_walkthrough(self, fig3_sem, fig3_weights):
        w = fig3_weights
        result = minimal_reduction(fig3_sem)
        kinds = [(a.absorbed, a.target) for a in result.actions]
        assert kinds == [(V7, None), (V3, V5), (V4, V5), (V6, V2)]
        assert result.actions[1].scalar == pytest.approx(w["bet"] + w["alp"] * w["gam"])
        assert result.actions[2].scalar == pytest.approx(w["gam"])
        assert result.actions[3].scalar == pytest.approx(w["w62"])
        # V5 and V8 survive with both observed variables
        assert result.sem.graph.num_vertices == 4
        assert result.sem.observed == (0, 1)
        assert result.sem.num_latent == 2
        assert result.vertex_map[V1] == 0 and result.vertex_map[V2] == 1
        assert result.vertex_map[V3] is None and result.vertex_map[V7] is None
        absorbed = {latent for latent, _ in result.report.absorbable}
        assert absorbed == {V3, V4, V6, V7}
        assert not result.report.is_minimal
        assert not result.report.count_identifiable

    def test_fully_observed_is_minimal(self, ex1_graph):
        sem = LinearSem.from_graph(ex1_graph, observed=range(4))
        result = minimal_reduction(sem)
        assert result.report.is_minimal
        assert result.report.count_identifiable
        assert result.actions == ()
        assert result.sem == sem

    def test_chain_absorbs_latent_root(self, chain_sem):
        sem, alpha, _ = chain_sem
        result = minimal_reduction(sem)
        assert [(a.absorbed, a.target) for a in result.actions] == [(2, 0)]
        assert result.actions[0].scalar == pytest.approx(alpha)
        assert not result.report.count_identifiable
        assert result.sem.num_latent == 0

    def test_replay_reproduces_observed_coefficients(self, fig3_sem):
        self._check_replay(fig3_sem)

    def test_replay_on_random_models(self):
        for seed in range(30):
            self._check_replay(random_weighted_sem(8, 4, seed))

    @staticmethod
    def _check_replay(sem):
        before = observed_mixing(sem)
        result = minimal_reduction(sem)
        replayed = sem
        for action in result.actions:
            replayed = apply_absorb(replayed, action)
        # each original noise must land on a surviving column with the
        # composed scalar, reproducing its observed coefficients
        owner = {v: (v, 1.0) for v in range(sem.graph.num_vertices)}
        for action in result.actions:
            for orig, (vertex, scale) in list(owner.items()):
                if vertex == action.absorbed:
                    if action.target is None:
                        owner[orig] = (None, 0.0)
                    else:
                        owner[orig] = (action.target, scale * action.scalar)
        for orig, (vertex, scale) in owner.items():
            col = before.entries[:, before.column_of(orig)]
            if vertex is None:
                assert np.allclose(col, 0.0, atol=1e-10)
            else:
                target_col = before.entries[:, before.column_of(vertex)]
                assert np.allclose(scale * target_col, col, atol=1e-10)

    def test_reduced_model_mixing_matches_reduced_columns(self, fig3_sem):
        # the reduced SEM's observed mixing equals the irreducible columns
        result = minimal_reduction(fig3_sem)
        reduced_mix = observed_mixing(result.sem)
        exact, _ = reduce_mixing(observed_mixing(fig3_sem))
        assert reduced_mix.shape == exact.shape
        # match columns up to order by vertex mapping
        for idx, lab in enumerate(exact.column_labels):
            new_vertex = result.vertex_map[lab.vertex]
            assert new_vertex is not None
            got = reduced_mix.entries[:, reduced_mix.column_of(new_vertex)]
            assert np.allclose(got, exact.entries[:, idx], atol=1e-10)

    def test_count_confluence_under_random_action_order(self):
        rng = np.random.default_rng(7)
        for seed in range(25):
            sem = random_weighted_sem(7, 3, 1000 + seed)
            want = minimal_reduction(sem).sem.num_latent
            for _ in range(3):
                got = self._randomized_surviving_latents(sem, rng)
                assert got == want

    @staticmethod
    def _randomized_surviving_latents(sem, rng):
        work = sem
        while True:
            live = [v for v in work.latent if not work.noise[v].is_zero()]
            legal = []
            for v in live:
                if is_absorbable(work, v, None):
                    legal.append((v, None))
                for t in list(work.observed) + [u for u in live if u != v]:
                    if is_absorbable(work, v, t):
                        legal.append((v, t))
            if not legal:
                return len(live)
            v, t = legal[rng.integers(len(legal))]
            work = apply_absorb(work, absorb_action(work, v, t))

    def test_no_latent_with_two_nonabsorbable_children_is_absorbable(self):
        for seed in range(60):
            sem = random_weighted_sem(8, 4, 2000 + seed)
            absorbable = {latent for latent, _ in absorbable_latents(sem)}
            for v in sem.latent:
                hard_children = [
                    c for c in sem.graph.children(v)
                    if c in sem.observed or c not in absorbable
                ]
                if len(hard_children) >= 2:
                    assert v not in absorbable

    def test_reducibility_matches_absorbability(self):
        # continuous weights: dependent mixing columns iff non-minimal,
        # and the merge count equals the absorbed-vertex count
        for seed in range(60):
            sem = random_weighted_sem(8, 4, 3000 + seed)
            _, log = reduce_mixing(observed_mixing(sem))
            result = minimal_reduction(sem)
            assert bool(log) == (not result.report.is_minimal)
            assert len(log) == len(result.actions)
