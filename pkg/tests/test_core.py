import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import dist, domain, random_distribution, random_pair
from stability_lab import (
    ContentDomain,
    Dataset,
    DiscreteDistribution,
    Event,
    load_dataset,
    make_distribution,
    min_envelope,
    read_distribution,
    sample,
    sample_indices,
    tv_distance,
    tv_event_form,
    write_distribution,
)
from stability_lab.errors import (
    DomainMismatch,
    DomainTooLarge,
    EmptyList,
    LengthMismatch,
    NegativeWeight,
    NotNormalized,
)


class TestContentDomain:
    def test_bijection(self):
        d = domain(3)
        assert d.size == 3
        for i, s in enumerate(d.symbols):
            assert d.index_of(s) == i
        assert "z1" in d and "w" not in d

    def test_rejects_duplicates(self):
        with pytest.raises(ValueError):
            ContentDomain(("a", "a"))

    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            ContentDomain(())

    def test_unknown_symbol(self):
        with pytest.raises(DomainMismatch):
            domain(2).index_of("nope")


class TestMakeDistribution:
    def test_uniform(self):
        q = make_distribution(domain(2), [0.5, 0.5])
        assert np.array_equal(q.weights, [0.5, 0.5])

    def test_point_mass(self):
        q = make_distribution(domain(2), [1.0, 0.0])
        assert q.prob("z0") == 1.0 and q.prob("z1") == 0.0

    def test_not_normalized(self):
        with pytest.raises(NotNormalized):
            make_distribution(domain(2), [0.6, 0.6])

    def test_negative_weight(self):
        with pytest.raises(NegativeWeight):
            make_distribution(domain(2), [1.2, -0.2])

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            make_distribution(domain(2), [1.0])

    def test_non_finite(self):
        with pytest.raises(NegativeWeight):
            make_distribution(domain(2), [np.nan, 1.0])

    def test_tolerance(self):
        make_distribution(domain(2), [0.5, 0.5 + 5e-10])
        with pytest.raises(NotNormalized):
            make_distribution(domain(2), [0.5, 0.5 + 5e-9])

    def test_immutable(self):
        q = dist([0.5, 0.5])
        with pytest.raises(ValueError):
            q.weights[0] = 0.9
        with pytest.raises(AttributeError):
            q.weights = np.array([1.0, 0.0])

    def test_zero_weights_keep_indices(self):
        q = dist([0.5, 0.0, 0.5])
        assert q.weights.shape == (3,)
        assert list(q.support_indices()) == [0, 2]


class TestTvDistance:
    def test_identity(self):
        q = dist([0.3, 0.7])
        assert tv_distance(q, q) == 0.0

    def test_disjoint(self):
        assert tv_distance(dist([1.0, 0.0]), dist([0.0, 1.0])) == 1.0

    def test_hand_value(self):
        assert tv_distance(dist([0.8, 0.2]), dist([0.2, 0.8])) == pytest.approx(
            0.6, abs=1e-15
        )

    def test_domain_mismatch(self):
        with pytest.raises(DomainMismatch):
            tv_distance(dist([0.5, 0.5]), dist([0.4, 0.3, 0.3]))


def _normalized(ws):
    w = np.asarray(ws)
    return w / w.sum()


weights_strategy = st.lists(
    st.floats(min_value=0.001, max_value=1.0), min_size=2, max_size=8
)


@settings(max_examples=120, deadline=None)
@given(weights_strategy, weights_strategy)
def test_tv_metric_symmetry_and_range(wa, wb):
    size = min(len(wa), len(wb))
    qa = dist(_normalized(wa[:size]))
    qb = dist(_normalized(wb[:size]))
    d_ab = tv_distance(qa, qb)
    assert 0.0 <= d_ab <= 1.0
    assert d_ab == tv_distance(qb, qa)
    assert tv_distance(qa, qa) <= 1e-12


@settings(max_examples=120, deadline=None)
@given(weights_strategy, weights_strategy, weights_strategy)
def test_tv_triangle_inequality(wa, wb, wc):
    size = min(len(wa), len(wb), len(wc))
    qa = dist(_normalized(wa[:size]))
    qb = dist(_normalized(wb[:size]))
    qc = dist(_normalized(wc[:size]))
    assert tv_distance(qa, qc) <= tv_distance(qa, qb) + tv_distance(qb, qc) + 1e-12


class TestTvEventForm:
    def test_disjoint_supports(self):
        value, event = tv_event_form(dist([1.0, 0.0]), dist([0.0, 1.0]))
        assert value == 1.0
        assert event.symbols == ("z0",)

    def test_identity(self):
        value, _ = tv_event_form(dist([0.25, 0.75]), dist([0.25, 0.75]))
        assert value == 0.0

    def test_hand_value(self):
        value, event = tv_event_form(dist([0.8, 0.2]), dist([0.2, 0.8]))
        assert value == pytest.approx(0.6, abs=1e-15)
        assert event.symbols == ("z0",)

    def test_matches_summation_form(self):
        rng = np.random.default_rng(7)
        for _ in range(60):
            size = int(rng.integers(2, 13))
            q1, q2 = random_pair(rng, size, sparsify=0.2)
            value, event = tv_event_form(q1, q2)
            assert abs(value - tv_distance(q1, q2)) <= 1e-12
            # the returned event attains the value
            assert event.probability(q1) - event.probability(q2) == pytest.approx(
                value, abs=1e-12
            )

    def test_domain_cap_boundary(self):
        at_cap = ContentDomain(tuple(f"s{i}" for i in range(20)))
        q1 = make_distribution(at_cap, np.linspace(1, 20, 20) / np.linspace(1, 20, 20).sum())
        q2 = make_distribution(at_cap, np.ones(20) / 20)
        value, _ = tv_event_form(q1, q2)  # 2^20 events still enumerable
        assert abs(value - tv_distance(q1, q2)) <= 1e-12

    def test_domain_cap(self):
        big = ContentDomain(tuple(f"s{i}" for i in range(21)))
        q = make_distribution(big, np.ones(21) / 21)
        with pytest.raises(DomainTooLarge):
            tv_event_form(q, q)


class TestSample:
    def test_point_mass(self):
        q = dist([0.0, 0.0, 0.0, 1.0])
        assert all(sample(q, seed) == "z3" for seed in range(10))

    def test_deterministic(self):
        q = dist([0.3, 0.4, 0.3])
        assert sample(q, 42) == sample(q, 42)

    def test_zero_probability_never_emitted(self):
        q = dist([0.5, 0.0, 0.5])
        idx = sample_indices(q, 10**5, seed=3)
        assert not np.any(idx == 1)

    def test_uniform_frequencies(self):
        from scipy.stats import chisquare

        q = dist([0.25, 0.25, 0.25, 0.25])
        n = 10**5
        idx = sample_indices(q, n, seed=11)
        freqs = np.bincount(idx, minlength=4) / n
        assert np.all(np.abs(freqs - 0.25) <= 0.01)
        assert chisquare(np.bincount(idx, minlength=4)).pvalue > 0.001

    def test_marginal_chi_square_nonuniform(self):
        from scipy.stats import chisquare

        rng = np.random.default_rng(5)
        q = random_distribution(rng, 6)
        n = 10**5
        counts = np.bincount(sample_indices(q, n, seed=13), minlength=6)
        assert chisquare(counts, q.weights * n).pvalue > 0.001


class TestMinEnvelope:
    def test_single_model(self):
        q = dist([0.3, 0.7])
        assert np.array_equal(min_envelope([q]), q.weights)

    def test_disjoint(self):
        env = min_envelope([dist([1.0, 0.0]), dist([0.0, 1.0])])
        assert np.array_equal(env, [0.0, 0.0])

    def test_hand_value(self):
        env = min_envelope([dist([0.8, 0.2]), dist([0.2, 0.8])])
        assert np.allclose(env, [0.2, 0.2], atol=0)

    def test_empty(self):
        with pytest.raises(EmptyList):
            min_envelope([])

    def test_domain_mismatch(self):
        with pytest.raises(DomainMismatch):
            min_envelope([dist([0.5, 0.5]), dist([0.4, 0.3, 0.3])])

    def test_mass_identity_with_tv(self):
        rng = np.random.default_rng(17)
        for _ in range(50):
            q1, q2 = random_pair(rng, int(rng.integers(2, 10)))
            mass = float(min_envelope([q1, q2]).sum())
            assert abs(mass - (1.0 - tv_distance(q1, q2))) <= 1e-12


class TestDataset:
    def test_counts_and_items(self):
        d = domain(3)
        s = Dataset(d, ["z0", "z0", "z1"])
        assert s.size == 3
        assert s.items == ("z0", "z0", "z1")
        assert list(s.counts()) == [2, 1, 0]

    def test_membership_enforced(self):
        with pytest.raises(DomainMismatch):
            Dataset(domain(2), ["z0", "nope"])

    def test_from_indices_bounds(self):
        with pytest.raises(DomainMismatch):
            Dataset.from_indices(domain(2), [0, 2])

    def test_slice(self):
        s = Dataset(domain(2), ["z0", "z1", "z0", "z0"])
        assert s.slice(1, 3).items == ("z1", "z0")


class TestEvent:
    def test_from_symbols_round_trip(self):
        d = domain(4)
        e = Event.from_symbols(d, ["z1", "z3"])
        assert e.symbols == ("z1", "z3")
        assert "z1" in e and "z0" not in e

    def test_probability(self):
        e = Event.from_symbols(domain(3), ["z0", "z2"])
        assert e.probability(dist([0.2, 0.3, 0.5])) == pytest.approx(0.7)

    def test_mask_range(self):
        with pytest.raises(ValueError):
            Event(domain(2), 4)


class TestSerialization:
    def test_distribution_json_round_trip(self, tmp_path):
        q = dist([0.25, 0.75])
        path = tmp_path / "q.json"
        write_distribution(path, q)
        assert read_distribution(path) == q
        obj = json.loads(path.read_text())
        assert set(obj) == {"symbols", "weights"}

    def test_read_against_expected_domain(self, tmp_path):
        q = dist([0.25, 0.75])
        path = tmp_path / "q.json"
        write_distribution(path, q)
        with pytest.raises(DomainMismatch):
            read_distribution(path, domain(3))

    def test_domain_json_round_trip(self):
        d = domain(4)
        assert ContentDomain.from_json_obj(d.to_json_obj()) == d

    def test_load_dataset(self, tmp_path):
        path = tmp_path / "data.txt"
        path.write_text("a\nb\n\na\n")
        d = ContentDomain(("a", "b"))
        assert load_dataset(path, d).items == ("a", "b", "a")
