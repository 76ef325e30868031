import numpy as np
import pytest

from conftest import dist, domain
from stability_lab import derive_seed, new_tape, transform_bound_experiment
from stability_lab.learners import learner_empirical
from stability_lab.transform import TransformConfig
from stability_lab.util import map_indexed, worker_count


class TestDeriveSeed:
    def test_frozen_values(self):
        # pinned so seed derivation stays stable across platforms/releases
        assert derive_seed(0, "x", 0) == 7060657385327961287
        assert derive_seed(12345, "tape", 7) == 2523506291143471698

    def test_distinct_across_labels_and_indices(self):
        seeds = {
            derive_seed(1, label, i)
            for label in ("a", "b", "tape", "noise")
            for i in range(100)
        }
        assert len(seeds) == 400

    def test_index_defaults_to_zero(self):
        assert derive_seed(9, "lab") == derive_seed(9, "lab", 0)


class TestTapeDeterminism:
    def test_frozen_variates(self):
        t = new_tape(domain(3), 42)
        assert np.allclose(
            t.variates,
            [1.069174108948, 0.022473870422, 0.806119092329],
            atol=1e-12,
        )


class TestWorkers:
    def test_worker_count_default(self, monkeypatch):
        monkeypatch.delenv("STABILITY_LAB_THREADS", raising=False)
        assert worker_count() == 1

    def test_worker_count_parsing(self, monkeypatch):
        monkeypatch.setenv("STABILITY_LAB_THREADS", "4")
        assert worker_count() == 4
        monkeypatch.setenv("STABILITY_LAB_THREADS", "junk")
        assert worker_count() == 1
        monkeypatch.setenv("STABILITY_LAB_THREADS", "-2")
        assert worker_count() == 1

    def test_map_indexed_order(self, monkeypatch):
        monkeypatch.setenv("STABILITY_LAB_THREADS", "4")
        assert map_indexed(lambda i: i * i, 20) == [i * i for i in range(20)]

    def test_experiment_identical_across_worker_counts(self, monkeypatch):
        config = TransformConfig.from_params(epsilon=2.0, delta=0.05, eta=0.3, m=3)
        data = dist([0.4, 0.3, 0.2, 0.1])
        learner = learner_empirical(1.0)

        def run():
            return transform_bound_experiment(
                learner, data, config, outer_trials=4, inner_trials=5, seed=3,
                premise_trials=5,
            )

        monkeypatch.setenv("STABILITY_LAB_THREADS", "1")
        serial = run()
        monkeypatch.setenv("STABILITY_LAB_THREADS", "3")
        threaded = run()
        assert serial.per_trial_tv == threaded.per_trial_tv
        assert serial.alpha_hat == threaded.alpha_hat
