"""Turning an output-stable learner into a differentially private one.

The pipeline: split the private sample into k shards, train the base
learner on each, draw one coupled sample per shard model from a single
shared tape, release a private histogram of those k samples, and project
the histogram back onto the simplex within an l_inf box. Each input item
influences exactly one shard, hence one coupled sample, so the histogram's
(epsilon, delta) guarantee covers the whole pipeline; everything after the
histogram is data-independent post-processing.

If the base learner maps same-distribution samples to models at expected
total variation alpha, the averaged output model stays within
2*alpha/(1+alpha) + O(eta) of a freshly trained base model, and
`transform_bound_experiment` measures that end to end.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .core import (
    ContentDomain,
    Dataset,
    DiscreteDistribution,
    make_distribution,
    sample_dataset,
    tv_distance,
)
from .coupling import new_tape, race_matrix
from .dp import DpParams, NoisyHistogram, _histogram_from_counts, required_k
from .errors import SizeMismatch
from .util import derive_seed, map_indexed

# Coefficient on eta in the reported deviation bound: the accuracy chain
# contributes 3*eta, the histogram failure event at most eta more, and the
# projection slack eta again; 5 covers the sum with headroom.
ETA_COEFFICIENT = 5.0


@dataclass(frozen=True)
class Learner:
    """Deterministic map from (dataset, seed) to an output distribution."""

    name: str
    train: Callable[[Dataset, int], DiscreteDistribution]
    m: int | None = None


@dataclass(frozen=True)
class TransformConfig:
    """Shard layout and privacy parameters for the transform.

    The histogram failure probability is tied to eta, which fixes the
    shard count k and hence the private sample size m_priv = k * m.
    """

    epsilon: float
    delta: float
    eta: float
    m: int
    k: int
    m_priv: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("base sample size m must be >= 1")
        expected_k = required_k(self.params)
        if self.k != expected_k:
            raise ValueError(f"k must equal required_k(...) = {expected_k}")
        if self.m_priv != self.k * self.m:
            raise ValueError("m_priv must equal k * m")

    @property
    def params(self) -> DpParams:
        return DpParams(
            epsilon=self.epsilon, delta=self.delta, eta=self.eta, beta=self.eta
        )

    @classmethod
    def from_params(
        cls, epsilon: float, delta: float, eta: float, m: int
    ) -> "TransformConfig":
        k = required_k(DpParams(epsilon=epsilon, delta=delta, eta=eta, beta=eta))
        return cls(epsilon=epsilon, delta=delta, eta=eta, m=m, k=k, m_priv=k * m)


def estimate_premise_alpha(
    learner: Learner,
    data_dist: DiscreteDistribution,
    m: int,
    trials: int,
    seed: int,
) -> float:
    """Mean TV between models trained on two independent m-samples.

    This is the output-stability level the transform's bound is stated
    against; constant learners score exactly zero.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    total = 0.0
    for t in range(trials):
        s1 = sample_dataset(data_dist, m, derive_seed(seed, "premise-sample-a", t))
        s2 = sample_dataset(data_dist, m, derive_seed(seed, "premise-sample-b", t))
        q1 = learner.train(s1, derive_seed(seed, "premise-train-a", t))
        q2 = learner.train(s2, derive_seed(seed, "premise-train-b", t))
        total += tv_distance(q1, q2)
    return total / trials


def simplex_project_linf(
    domain: ContentDomain, values: np.ndarray, eta: float
) -> DiscreteDistribution | None:
    """A distribution within eta of `values` in l_inf, or None if none exists.

    The box [max(0, a-eta), min(1, a+eta)] meets the simplex exactly when
    the lower bounds sum to at most 1 and the upper bounds to at least 1.
    Construction: clip the input into [0, 1], then push the mass surplus
    or deficit through the coordinates in index order within each
    coordinate's remaining slack.
    """
    if eta <= 0:
        raise ValueError("eta must be positive")
    a = np.asarray(values, dtype=np.float64)
    lower = np.maximum(a - eta, 0.0)
    upper = np.minimum(a + eta, 1.0)
    if lower.sum() > 1.0 or upper.sum() < 1.0:
        return None
    x = np.clip(a, 0.0, 1.0)
    residual = 1.0 - float(x.sum())
    for i in range(x.size):
        if residual > 0:
            step = min(residual, float(upper[i] - x[i]))
        else:
            step = max(residual, float(lower[i] - x[i]))
        x[i] += step
        residual -= step
    return make_distribution(domain, x)


@dataclass(frozen=True, eq=False)
class TransformTrace:
    """Intermediates of one transform run, for instrumentation and tests."""

    shard_weights: np.ndarray
    coupled_indices: np.ndarray
    histogram: NoisyHistogram
    fallback_used: bool
    output: DiscreteDistribution


def _shard_weight_matrix(
    learner: Learner, sample: Dataset, config: TransformConfig, train_seed: int
) -> np.ndarray:
    """Train the k shard models; rows are their weight vectors."""
    if sample.size != config.m_priv:
        raise SizeMismatch(
            f"expected k*m = {config.m_priv} items, got {sample.size}"
        )
    rows = []
    for i in range(config.k):
        shard = sample.slice(i * config.m, (i + 1) * config.m)
        q = learner.train(shard, derive_seed(train_seed, "shard-train", i))
        rows.append(q.weights)
    return np.stack(rows)


def _transform_from_weights(
    domain: ContentDomain,
    shard_weights: np.ndarray,
    config: TransformConfig,
    tape_seed: int,
    noise_seed: int,
) -> TransformTrace:
    tape = new_tape(domain, tape_seed)
    coupled = race_matrix(tape, shard_weights)
    counts = np.bincount(coupled, minlength=domain.size)
    hist = _histogram_from_counts(
        domain, counts, config.epsilon, config.delta, noise_seed
    )
    projected = simplex_project_linf(domain, hist.values, config.eta)
    fallback = projected is None
    if fallback:
        # Any distribution is admissible when the box misses the simplex;
        # uniform is the neutral choice.
        projected = make_distribution(domain, np.full(domain.size, 1.0 / domain.size))
    return TransformTrace(
        shard_weights=shard_weights,
        coupled_indices=coupled,
        histogram=hist,
        fallback_used=fallback,
        output=projected,
    )


def dp_transform_trace(
    learner: Learner,
    sample: Dataset,
    config: TransformConfig,
    tape_seed: int,
    noise_seed: int,
    train_seed: int = 0,
) -> TransformTrace:
    """dp_transform plus all intermediates."""
    weights = _shard_weight_matrix(learner, sample, config, train_seed)
    return _transform_from_weights(
        sample.domain, weights, config, tape_seed, noise_seed
    )


def dp_transform(
    learner: Learner,
    sample: Dataset,
    config: TransformConfig,
    tape_seed: int,
    noise_seed: int,
    train_seed: int = 0,
) -> DiscreteDistribution:
    """(epsilon, delta)-DP output model from a sample of k*m items.

    Steps: shard the sample in input order, train per shard, draw one
    coupled sample per shard model from a single tape, release the private
    histogram of those samples, and project it onto the simplex within
    eta per coordinate (uniform fallback if the projection is infeasible).

    tape_seed drives the shared tape, noise_seed the histogram noise, and
    train_seed the learner's own randomness; keeping the three apart lets
    callers average over fresh (tape, noise) pairs while holding the
    trained shards fixed.
    """
    return dp_transform_trace(
        learner, sample, config, tape_seed, noise_seed, train_seed
    ).output


@dataclass(frozen=True, eq=False)
class BoundExperimentReport:
    """Measured deviation of the transformed learner against its bound."""

    config: TransformConfig
    outer_trials: int
    inner_trials: int
    premise_trials: int
    seed: int
    alpha_hat: float
    per_trial_tv: tuple[float, ...]
    grand_mean_tv: float
    bound: float
    eta_coefficient: float = ETA_COEFFICIENT

    def within_bound(self, margin: float = 0.0) -> bool:
        return self.grand_mean_tv <= self.bound + margin

    def to_json_obj(self) -> dict:
        return {
            "epsilon": self.config.epsilon,
            "delta": self.config.delta,
            "eta": self.config.eta,
            "m": self.config.m,
            "k": self.config.k,
            "m_priv": self.config.m_priv,
            "outer_trials": self.outer_trials,
            "inner_trials": self.inner_trials,
            "premise_trials": self.premise_trials,
            "seed": self.seed,
            "alpha_hat": self.alpha_hat,
            "grand_mean_tv": self.grand_mean_tv,
            "bound": self.bound,
            "eta_coefficient": self.eta_coefficient,
            "per_trial_tv": list(self.per_trial_tv),
        }


def deviation_bound(alpha: float, eta: float) -> float:
    """2*alpha/(1+alpha) + ETA_COEFFICIENT * eta, monotone in alpha."""
    return 2.0 * alpha / (1.0 + alpha) + ETA_COEFFICIENT * eta


def transform_bound_experiment(
    learner: Learner,
    data_dist: DiscreteDistribution,
    config: TransformConfig,
    outer_trials: int,
    inner_trials: int,
    seed: int,
    premise_trials: int = 200,
) -> BoundExperimentReport:
    """Measure E[TV(mean transformed model, fresh base model)] vs the bound.

    Each outer trial draws a base sample and a private sample, trains the
    base model, and averages `inner_trials` transform outputs over fresh
    (tape, noise) seeds with the shard models held fixed (the shards are
    a deterministic function of the private sample, so this matches
    re-running dp_transform with the same train seed). The premise level
    alpha_hat is estimated on the side and turned into the reported bound.
    """
    if outer_trials < 1 or inner_trials < 1:
        raise ValueError("trial counts must be >= 1")
    alpha_hat = estimate_premise_alpha(
        learner, data_dist, config.m, premise_trials, derive_seed(seed, "premise")
    )
    domain = data_dist.domain

    def one_outer(t: int) -> float:
        base_sample = sample_dataset(data_dist, config.m, derive_seed(seed, "base-sample", t))
        priv_sample = sample_dataset(
            data_dist, config.m_priv, derive_seed(seed, "private-sample", t)
        )
        base_model = learner.train(base_sample, derive_seed(seed, "base-train", t))
        weights = _shard_weight_matrix(
            learner, priv_sample, config, derive_seed(seed, "transform-train", t)
        )
        acc = np.zeros(domain.size)
        for j in range(inner_trials):
            trace = _transform_from_weights(
                domain,
                weights,
                config,
                derive_seed(seed, "tape", t * inner_trials + j),
                derive_seed(seed, "noise", t * inner_trials + j),
            )
            acc += trace.output.weights
        mean_model = make_distribution(domain, acc / inner_trials)
        return tv_distance(mean_model, base_model)

    per_trial = map_indexed(one_outer, outer_trials)
    grand_mean = float(np.mean(per_trial))
    return BoundExperimentReport(
        config=config,
        outer_trials=outer_trials,
        inner_trials=inner_trials,
        premise_trials=premise_trials,
        seed=seed,
        alpha_hat=alpha_hat,
        per_trial_tv=tuple(per_trial),
        grand_mean_tv=grand_mean,
        bound=deviation_bound(alpha_hat, config.eta),
    )
