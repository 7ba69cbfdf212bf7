import numpy as np
import pytest

from semica.ica import IcaConfig
from semica.sem import MixingMatrix, observed_mixing, reduce_mixing
from semica.simulate import simulate_samples
from semica.support import (
    BootstrapEnsemble,
    SupportMatrix,
    bootstrap_replicates,
    match_columns,
    zero_support,
)

from .conftest import triangle_sem


def normalized(entries):
    return MixingMatrix(np.asarray(entries, dtype=float), None, "exact").normalized()


def synthetic_ensemble(base, reps, noise_scale, seed, permute=True):
    """Replicates = normalized(base + noise), randomly permuted columns."""
    rng = np.random.default_rng(seed)
    replicates = []
    for r in range(reps):
        jitter = rng.normal(0.0, noise_scale, size=base.shape)
        entries = np.asarray(base) + jitter
        if permute and r > 0:
            entries = entries[:, rng.permutation(base.shape[1])]
        replicates.append(normalized(entries))
    perms, signs = [tuple(range(base.shape[1]))], [(1.0,) * base.shape[1]]
    for rep in replicates[1:]:
        perm = match_columns(replicates[0], rep)
        perms.append(tuple(int(v) for v in perm))
        signs.append((1.0,) * base.shape[1])
    return BootstrapEnsemble(tuple(replicates), tuple(perms), tuple(signs))


class TestMatchColumns:
    def test_recovers_column_swap(self):
        ref = normalized([[1.0, 0.1, 0.6], [0.2, 1.0, 1.0]])
        other = MixingMatrix(ref.entries[:, [1, 0, 2]], None, "normalized")
        assert list(match_columns(ref, other)) == [1, 0, 2]

    def test_sign_flip_is_folded(self):
        ref = normalized([[1.0, 0.1], [0.2, 1.0]])
        flipped = MixingMatrix(ref.entries * np.array([-1.0, 1.0]), None, "normalized")
        assert list(match_columns(ref, flipped)) == [0, 1]

    def test_small_perturbation_recovers_shuffle(self):
        rng = np.random.default_rng(0)
        ref = normalized(rng.uniform(-1, 1, size=(3, 5)))
        shuffle = rng.permutation(5)
        perturbed = MixingMatrix(
            ref.entries[:, shuffle] + rng.normal(0, 0.01, (3, 5)), None, "normalized"
        )
        perm = match_columns(ref, perturbed)
        assert [int(shuffle[c]) for c in perm] == [0, 1, 2, 3, 4]

    def test_shape_mismatch_rejected(self):
        a = normalized(np.eye(2))
        b = normalized(np.eye(3))
        with pytest.raises(ValueError):
            match_columns(a, b)

    def test_greedy_option_matches_obvious_case(self):
        ref = normalized([[1.0, 0.0], [0.0, 1.0]])
        other = MixingMatrix(ref.entries[:, [1, 0]], None, "normalized")
        assert list(match_columns(ref, other, greedy=True)) == [1, 0]


class TestBootstrapReplicates:
    def test_shapes_and_count(self, triangle):
        data = simulate_samples(triangle, 800, seed=0)
        ensemble = bootstrap_replicates(data, IcaConfig(seed=0), reps=4)
        assert len(ensemble.replicates) == 4
        assert all(m.shape == (2, 3) for m in ensemble.replicates)
        assert ensemble.aligned_stack().shape == (4, 2, 3)

    def test_single_replicate_rejected(self, triangle):
        data = simulate_samples(triangle, 400, seed=1)
        with pytest.raises(ValueError):
            bootstrap_replicates(data, IcaConfig(seed=1), reps=1)

    def test_deterministic_per_seed(self, triangle):
        data = simulate_samples(triangle, 600, seed=2)
        config = IcaConfig(seed=5, restarts=2)
        a = bootstrap_replicates(data, config, reps=3, k_star=3)
        b = bootstrap_replicates(data, config, reps=3, k_star=3)
        for ra, rb in zip(a.replicates, b.replicates):
            assert np.array_equal(ra.entries, rb.entries)
        assert a.alignment == b.alignment

    def test_threaded_matches_sequential(self, triangle):
        data = simulate_samples(triangle, 600, seed=3)
        config = IcaConfig(seed=6, restarts=2)
        seq = bootstrap_replicates(data, config, reps=3, k_star=3, threads=1)
        par = bootstrap_replicates(data, config, reps=3, k_star=3, threads=3)
        for ra, rb in zip(seq.replicates, par.replicates):
            assert np.array_equal(ra.entries, rb.entries)


class TestZeroSupport:
    def test_constant_one_entries_are_nonzero(self):
        base = np.ones((2, 2))
        ensemble = synthetic_ensemble(base, 5, 0.0, seed=0, permute=False)
        support = zero_support(ensemble)
        assert support.support.all()

    def test_constant_zero_entries_are_zero(self):
        base = np.array([[0.0, 1.0], [1.0, 0.0]])
        ensemble = synthetic_ensemble(base, 5, 0.0, seed=1, permute=False)
        support = zero_support(ensemble)
        assert np.array_equal(support.support, base.astype(bool))

    def test_triangle_pattern_recovered(self):
        exact = reduce_mixing(observed_mixing(triangle_sem()))[0].entries
        ensemble = synthetic_ensemble(exact, 10, 0.02, seed=2)
        support = zero_support(ensemble)
        assert sorted(map(tuple, support.support.T)) == sorted(
            [(False, True), (True, True), (True, True)]
        )

    def test_alpha_monotonicity(self):
        exact = reduce_mixing(observed_mixing(triangle_sem()))[0].entries
        ensemble = synthetic_ensemble(exact, 8, 0.05, seed=3)
        tight = zero_support(ensemble, alpha=0.01)
        loose = zero_support(ensemble, alpha=0.10)
        assert np.all(loose.support | ~tight.support)

    def test_permutation_invariance(self):
        exact = reduce_mixing(observed_mixing(triangle_sem()))[0].entries
        ensemble = synthetic_ensemble(exact, 6, 0.03, seed=4)
        perm = [2, 0, 1]
        replicates = tuple(
            MixingMatrix(m.entries[:, perm], None, "normalized")
            for m in ensemble.replicates
        )
        perms = [tuple(range(3))]
        for rep in replicates[1:]:
            perms.append(tuple(int(v) for v in match_columns(replicates[0], rep)))
        permuted = BootstrapEnsemble(replicates, tuple(perms), ensemble.signs)
        a = zero_support(ensemble)
        b = zero_support(permuted)
        assert sorted(map(tuple, a.support.T)) == sorted(map(tuple, b.support.T))

    def test_near_exact_ensembles_recover_pattern(self):
        # tiny gaussian perturbations of the exact reduced mixing keep the
        # zero pattern right for 99% of entries (true zeros are rejected at
        # most at the test's own alpha)
        exact = reduce_mixing(observed_mixing(triangle_sem()))[0].entries
        want = np.abs(exact) > 1e-9
        correct = 0
        trials = 100
        for t in range(trials):
            ensemble = synthetic_ensemble(exact, 10, 0.01, seed=100 + t, permute=False)
            support = zero_support(ensemble)
            correct += int(np.sum(support.support == want))
        assert correct / (trials * exact.size) >= 0.99

    def test_from_exact_support(self):
        m = np.array([[1.0, 0.0], [1e-12, 1.0]])
        support = SupportMatrix.from_exact(m)
        assert support.support.tolist() == [[True, False], [False, True]]
