"""Shared helpers for the test suite."""

from __future__ import annotations

import numpy as np

from stability_lab import ContentDomain, DiscreteDistribution, make_distribution

_DOMAINS: dict[int, ContentDomain] = {}


def domain(size: int) -> ContentDomain:
    """Cached domain z0..z{size-1}."""
    if size not in _DOMAINS:
        _DOMAINS[size] = ContentDomain(tuple(f"z{i}" for i in range(size)))
    return _DOMAINS[size]


def dist(weights) -> DiscreteDistribution:
    return make_distribution(domain(len(weights)), weights)


def random_distribution(
    rng: np.random.Generator, size: int, sparsify: float = 0.0
) -> DiscreteDistribution:
    """Dirichlet(1,..,1) draw; optionally zero out coordinates and renormalize."""
    w = rng.dirichlet(np.ones(size))
    if sparsify > 0:
        keep = rng.random(size) >= sparsify
        if not keep.any():
            keep[rng.integers(size)] = True
        w = np.where(keep, w, 0.0)
        w = w / w.sum()
    return make_distribution(domain(size), w)


def random_pair(rng: np.random.Generator, size: int, sparsify: float = 0.0):
    return (
        random_distribution(rng, size, sparsify),
        random_distribution(rng, size, sparsify),
    )
