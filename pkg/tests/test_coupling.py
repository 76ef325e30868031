import inspect

import numpy as np
import pytest

import stability_lab.coupling as coupling_mod
from conftest import dist, domain, random_distribution, random_pair
from stability_lab import (
    CouplingTape,
    coupled_sample,
    coupled_sample_index,
    disagreement_estimate,
    new_tape,
    tv_distance,
)
from stability_lab.coupling import _exp_variates, coupled_marginal_counts, race_matrix
from stability_lab.errors import DomainMismatch


class TestNewTape:
    def test_deterministic(self):
        d = domain(5)
        t1, t2 = new_tape(d, 42), new_tape(d, 42)
        assert np.array_equal(t1.variates, t2.variates)

    def test_seeds_differ(self):
        d = domain(5)
        assert not np.array_equal(new_tape(d, 1).variates, new_tape(d, 2).variates)

    def test_variates_positive_finite(self):
        t = new_tape(domain(100), 7)
        assert np.all(t.variates > 0) and np.all(np.isfinite(t.variates))

    def test_exponential_mean(self):
        # Exp(1) mean over 1e4 variates: 1 within 3 sigma = 3/sqrt(1e4)
        t = new_tape(domain(10_000), 2024)
        assert abs(t.variates.mean() - 1.0) <= 0.03

    def test_no_dataset_enters_tape_creation(self):
        assert "dataset" not in inspect.signature(new_tape).parameters

    def test_validation(self):
        d = domain(3)
        with pytest.raises(ValueError):
            CouplingTape(domain=d, variates=np.array([1.0, 2.0]), seed=0)
        with pytest.raises(ValueError):
            CouplingTape(domain=d, variates=np.array([1.0, 0.0, 2.0]), seed=0)

    def test_batch_matches_single_tapes(self):
        # trial i of the Monte Carlo helpers uses exactly new_tape(seed + i)
        d = domain(6)
        seeds = np.arange(50, dtype=np.uint64) + np.uint64(123)
        batch = _exp_variates(seeds, 6)
        for i in range(50):
            assert np.array_equal(batch[i], new_tape(d, 123 + i).variates)


class TestCoupledSample:
    def test_point_mass(self):
        q = dist([0.0, 0.0, 1.0])
        for seed in range(20):
            assert coupled_sample(new_tape(domain(3), seed), q) == "z2"

    def test_equal_inputs_equal_outputs(self):
        tape = new_tape(domain(4), 9)
        q = dist([0.1, 0.2, 0.3, 0.4])
        q_clone = dist([0.1, 0.2, 0.3, 0.4])
        assert coupled_sample(tape, q) == coupled_sample(tape, q_clone)

    def test_pure_function(self):
        tape = new_tape(domain(4), 11)
        q = dist([0.4, 0.3, 0.2, 0.1])
        assert coupled_sample(tape, q) == coupled_sample(tape, q)

    def test_zero_weight_never_wins(self):
        q = dist([0.5, 0.0, 0.5])
        for seed in range(200):
            assert coupled_sample(new_tape(domain(3), seed), q) != "z1"

    def test_domain_mismatch(self):
        with pytest.raises(DomainMismatch):
            coupled_sample(new_tape(domain(3), 0), dist([0.5, 0.5]))

    def test_marginal_uniform(self):
        q = dist([0.25, 0.25, 0.25, 0.25])
        n = 10**5
        freqs = coupled_marginal_counts(q, n, seed=31) / n
        assert np.all(np.abs(freqs - 0.25) <= 0.01)

    def test_marginal_chi_square(self):
        from scipy.stats import chisquare

        rng = np.random.default_rng(3)
        for trial in range(3):
            size = int(rng.integers(2, 9))
            q = random_distribution(rng, size)
            counts = coupled_marginal_counts(q, 10**5, seed=100 + trial)
            assert chisquare(counts, q.weights * 10**5).pvalue > 0.001

    def test_race_matrix_matches_scalar(self):
        rng = np.random.default_rng(8)
        tape = new_tape(domain(5), 77)
        models = [random_distribution(rng, 5, sparsify=0.3) for _ in range(20)]
        stacked = np.stack([m.weights for m in models])
        batch = race_matrix(tape, stacked)
        for i, m in enumerate(models):
            assert batch[i] == coupled_sample_index(tape, m)


class TestDisagreementEstimate:
    def test_identical_is_zero(self):
        q = dist([0.3, 0.7])
        assert disagreement_estimate(q, q, 5000, seed=1) == 0.0

    def test_disjoint_is_one(self):
        est = disagreement_estimate(dist([1.0, 0.0]), dist([0.0, 1.0]), 5000, seed=2)
        assert est == 1.0  # bound 2*1/(1+1) = 1 is tight here

    def test_hand_pair_against_bound(self):
        # TV = 0.25, bound 2*0.25/1.25 = 0.4 (true disagreement is 0.25)
        n = 10**5
        est = disagreement_estimate(dist([0.5, 0.5]), dist([0.25, 0.75]), n, seed=5)
        assert est <= 0.4 + 3 * np.sqrt(0.4 * 0.6 / n)
        assert abs(est - 0.25) <= 0.02

    def test_pairwise_bound_random_pairs(self):
        rng = np.random.default_rng(23)
        n = 20_000
        for trial in range(10):
            q1, q2 = random_pair(rng, int(rng.integers(2, 9)), sparsify=0.2)
            est = disagreement_estimate(q1, q2, n, seed=1000 + trial)
            tv = tv_distance(q1, q2)
            bound = 2 * tv / (1 + tv)
            assert est <= bound + 3 * np.sqrt(max(bound * (1 - bound), 1e-12) / n) + 1e-12

    def test_independent_of_chunking(self, monkeypatch):
        q1, q2 = dist([0.6, 0.4]), dist([0.2, 0.8])
        full = disagreement_estimate(q1, q2, 3000, seed=9)
        monkeypatch.setattr(coupling_mod, "_CHUNK_CELLS", 64)
        assert disagreement_estimate(q1, q2, 3000, seed=9) == full

    def test_trials_validation(self):
        q = dist([0.5, 0.5])
        with pytest.raises(ValueError):
            disagreement_estimate(q, q, 0, seed=0)

    def test_domain_mismatch(self):
        with pytest.raises(DomainMismatch):
            disagreement_estimate(dist([0.5, 0.5]), dist([0.4, 0.3, 0.3]), 10, seed=0)
