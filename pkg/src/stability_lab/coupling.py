"""Shared-randomness coupling of every distribution on a domain.

One tape of i.i.d. unit-rate exponential variates, one per symbol, couples
the whole family of distributions at once: the sample for q is the winner
of the exponential race, argmin_z E_z / q(z). Minima of independent
exponentials give the exact marginal, P(winner = z) = q(z), and two
distributions disagree with probability at most 2*TV / (1 + TV).

Tapes are generated by a counter-based hash (splitmix64 applied twice),
so the tape for any (seed, symbol) cell is addressable directly. That
keeps Monte Carlo runs over millions of fresh tapes cheap and makes the
per-trial convention used by `disagreement_estimate` (tape seed =
root seed + trial index) identical no matter how trials are batched or
parallelized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ContentDomain, DiscreteDistribution
from .errors import DomainMismatch

_GOLD = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64_MASK = (1 << 64) - 1

# Largest chunk of (trials x symbols) variate cells materialized at once.
_CHUNK_CELLS = 4_000_000


def _splitmix64(x: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer over a uint64 array (wrapping arithmetic)."""
    z = x + _GOLD
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _exp_variates(seeds: np.ndarray, size: int) -> np.ndarray:
    """Unit-rate exponential variates, one row per seed, `size` per row.

    Row i, column z is a pure function of (seeds[i], z): the seed is mixed
    into a stream key, the symbol index is folded in, and the resulting 64
    bits become a uniform in (0,1) mapped through -log. Values are strictly
    positive and finite by construction.
    """
    keys = _splitmix64(np.asarray(seeds, dtype=np.uint64))[:, None]
    cells = _splitmix64(keys + np.arange(size, dtype=np.uint64)[None, :])
    u = ((cells >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return -np.log(u)


@dataclass(frozen=True, eq=False)
class CouplingTape:
    """One realization of the coupling's randomness for a whole domain.

    Fully determined by (domain, seed); independent of any dataset by
    construction (nothing data-dependent enters tape creation).
    """

    domain: ContentDomain
    variates: np.ndarray
    seed: int

    def __post_init__(self):
        v = np.array(self.variates, dtype=np.float64)
        if v.shape != (self.domain.size,):
            raise ValueError("tape needs one variate per domain symbol")
        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise ValueError("tape variates must be strictly positive and finite")
        v.flags.writeable = False
        object.__setattr__(self, "variates", v)


def new_tape(domain: ContentDomain, seed: int) -> CouplingTape:
    """Fresh tape of |Z| unit-rate exponentials, deterministic in the seed."""
    variates = _exp_variates(np.array([seed & _U64_MASK], dtype=np.uint64), domain.size)[0]
    return CouplingTape(domain=domain, variates=variates, seed=seed)


def _race_rows(variates: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """argmin_z variates[i, z] / weights[z] per row, zero weights excluded.

    np.argmin takes the first minimum, which implements the lowest-index
    tie rule.
    """
    ratios = np.full_like(variates, np.inf)
    support = weights > 0
    ratios[:, support] = variates[:, support] / weights[support]
    return np.argmin(ratios, axis=1)


def coupled_sample_index(tape: CouplingTape, q: DiscreteDistribution) -> int:
    """Index form of coupled_sample."""
    if q.domain != tape.domain:
        raise DomainMismatch("tape and distribution domains differ")
    return int(_race_rows(tape.variates[None, :], q.weights)[0])


def coupled_sample(tape: CouplingTape, q: DiscreteDistribution) -> str:
    """Winner of the exponential race on this tape for distribution q.

    Pure function of (tape, q); over fresh tapes the marginal law is
    exactly q. Ties (probability zero in exact arithmetic) go to the
    lowest symbol index.
    """
    return tape.domain.symbols[coupled_sample_index(tape, q)]


def race_matrix(tape: CouplingTape, weight_matrix: np.ndarray) -> np.ndarray:
    """Coupled sample index for each row of a (n_models, |Z|) weight matrix.

    Row i equals coupled_sample_index(tape, q_i); all rows share the one
    tape, which is the point of the coupling.
    """
    if weight_matrix.shape[1] != tape.domain.size:
        raise DomainMismatch("weight matrix width does not match the domain")
    ratios = np.full(weight_matrix.shape, np.inf)
    support = weight_matrix > 0
    spread = np.broadcast_to(tape.variates, weight_matrix.shape)
    ratios[support] = spread[support] / weight_matrix[support]
    return np.argmin(ratios, axis=1)


def disagreement_estimate(
    q1: DiscreteDistribution, q2: DiscreteDistribution, trials: int, seed: int
) -> float:
    """Fraction of fresh tapes on which q1's and q2's samples differ.

    Trial i uses the tape with seed `seed + i`, so splitting trials across
    workers cannot change the estimate. The expected value is bounded by
    2*TV(q1,q2) / (1 + TV(q1,q2)).
    """
    if q1.domain != q2.domain:
        raise DomainMismatch("coupled distributions must share a domain")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    size = q1.domain.size
    chunk = max(1, _CHUNK_CELLS // size)
    base = seed & _U64_MASK
    disagreements = 0
    for start in range(0, trials, chunk):
        count = min(chunk, trials - start)
        seeds = np.uint64(base) + np.arange(start, start + count, dtype=np.uint64)
        variates = _exp_variates(seeds, size)
        x1 = _race_rows(variates, q1.weights)
        x2 = _race_rows(variates, q2.weights)
        disagreements += int(np.count_nonzero(x1 != x2))
    return disagreements / trials


def coupled_marginal_counts(
    q: DiscreteDistribution, trials: int, seed: int
) -> np.ndarray:
    """Histogram of coupled samples over `trials` fresh tapes (seed + i)."""
    size = q.domain.size
    chunk = max(1, _CHUNK_CELLS // size)
    base = seed & _U64_MASK
    counts = np.zeros(size, dtype=np.int64)
    for start in range(0, trials, chunk):
        count = min(chunk, trials - start)
        seeds = np.uint64(base) + np.arange(start, start + count, dtype=np.uint64)
        x = _race_rows(_exp_variates(seeds, size), q.weights)
        counts += np.bincount(x, minlength=size)
    return counts
