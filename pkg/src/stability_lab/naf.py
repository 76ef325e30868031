"""Near-access-freeness: safe models, the alpha check, and its limits.

A safe assignment maps each protected content item c to a model q_c that
is considered non-infringing for c. A model p is alpha-NAF when
p(z) <= e^alpha * q_c(z) for every protected c and every symbol z; the
check, the smallest achievable alpha, the pointwise-minimum envelope that
lower-bounds any achievable alpha, the censored probability mass, and the
no-free-lunch witness for far-apart safe models are all computed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

from .core import (
    ContentDomain,
    Dataset,
    DiscreteDistribution,
    min_envelope,
    tv_distance,
)
from .errors import (
    DatasetTooSmall,
    DegenerateTV,
    DomainMismatch,
    EmptySafeAssignment,
)


class Violation(NamedTuple):
    """One exceeded constraint: p(z) > e^alpha * q_c(z)."""

    content_id: str
    symbol: str
    log_ratio: float


class NflWitness(NamedTuple):
    """Symbol certifying the lower bound p(z) >= min(q1(z), q2(z)) / (2(1-a))."""

    symbol: str
    p_value: float
    threshold: float


@dataclass(frozen=True, eq=False)
class SafeAssignment:
    """Mapping from protected content identifiers to their safe models."""

    entries: tuple[tuple[str, DiscreteDistribution], ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        ids = [cid for cid, _ in self.entries]
        if len(set(ids)) != len(ids):
            raise ValueError("protected content identifiers must be unique")
        domains = {q.domain for _, q in self.entries}
        if len(domains) > 1:
            raise DomainMismatch("all safe models must share one domain")

    @classmethod
    def from_models(cls, models: Iterable[DiscreteDistribution]) -> "SafeAssignment":
        return cls(tuple((f"c{i}", q) for i, q in enumerate(models)))

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(cid for cid, _ in self.entries)

    @property
    def models(self) -> tuple[DiscreteDistribution, ...]:
        return tuple(q for _, q in self.entries)

    @property
    def domain(self) -> ContentDomain:
        self._require_nonempty()
        return self.entries[0][1].domain

    def envelope(self) -> np.ndarray:
        """Pointwise minimum over the safe models, min_c q_c(z)."""
        self._require_nonempty()
        return min_envelope(self.models)

    def _require_nonempty(self):
        if not self.entries:
            raise EmptySafeAssignment("the safe assignment has no entries")


def safe_leave_one_out(learner, dataset: Dataset, seed: int) -> SafeAssignment:
    """One safe model per distinct item: retrain without one occurrence of it.

    Entries follow first-occurrence order; the removed occurrence is the
    first one.
    """
    if dataset.size < 2:
        raise DatasetTooSmall("leave-one-out needs at least two items")
    entries = []
    seen = set()
    for pos, idx in enumerate(dataset.indices):
        if int(idx) in seen:
            continue
        seen.add(int(idx))
        reduced = Dataset.from_indices(
            dataset.domain, np.delete(dataset.indices, pos)
        )
        symbol = dataset.domain.symbols[int(idx)]
        entries.append((symbol, learner.train(reduced, seed)))
    return SafeAssignment(tuple(entries))


def safe_sharded(learner, dataset: Dataset, seed: int) -> SafeAssignment:
    """Two-shard safety: each item's safe model is trained on the other half.

    The dataset is split in two by a seeded permutation. An item occurring
    in both halves has no occurrence-free half; the tie goes to the model
    of shard 0.
    """
    if dataset.size < 2:
        raise DatasetTooSmall("sharded safety needs at least two items")
    perm = np.random.default_rng(seed).permutation(dataset.size)
    half = dataset.size // 2
    shards = [
        Dataset.from_indices(dataset.domain, dataset.indices[np.sort(perm[:half])]),
        Dataset.from_indices(dataset.domain, dataset.indices[np.sort(perm[half:])]),
    ]
    models = [learner.train(shard, seed) for shard in shards]
    in_shard = [set(int(i) for i in shard.indices) for shard in shards]
    entries = []
    seen = set()
    for idx in dataset.indices:
        idx = int(idx)
        if idx in seen:
            continue
        seen.add(idx)
        symbol = dataset.domain.symbols[idx]
        if idx in in_shard[0] and idx in in_shard[1]:
            entries.append((symbol, models[0]))
        elif idx in in_shard[0]:
            entries.append((symbol, models[1]))
        else:
            entries.append((symbol, models[0]))
    return SafeAssignment(tuple(entries))


def _require_common_domain(p: DiscreteDistribution, safes: SafeAssignment):
    safes._require_nonempty()
    if p.domain != safes.domain:
        raise DomainMismatch("model and safe models live on different domains")


def naf_alpha(p: DiscreteDistribution, safes: SafeAssignment) -> float:
    """Smallest alpha >= 0 with p(z) <= e^alpha * q_c(z) for all c, z.

    Equals the largest log-ratio ln(p(z)/q_c(z)) over symbols in p's
    support; +inf when some safe model puts zero mass where p does not.
    Symbols with p(z) = 0 impose no constraint.
    """
    _require_common_domain(p, safes)
    support = p.weights > 0
    log_p = np.log(p.weights[support])
    worst = 0.0
    for _, q in safes:
        qw = q.weights[support]
        if np.any(qw == 0):
            return math.inf
        worst = max(worst, float((log_p - np.log(qw)).max()))
    return worst


def is_naf(
    p: DiscreteDistribution, safes: SafeAssignment, alpha: float
) -> tuple[bool, list[Violation]]:
    """Check p against every safe model at level alpha.

    Returns (ok, violations): ok is True when no constraint is exceeded,
    and the list names every (c, z) whose log-ratio exceeds alpha, so a
    failed check doubles as a soft flag report rather than a bare verdict.
    """
    _require_common_domain(p, safes)
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    support = np.flatnonzero(p.weights > 0)
    log_p = np.log(p.weights[support])
    symbols = p.domain.symbols
    violations = []
    for cid, q in safes:
        qw = q.weights[support]
        with np.errstate(divide="ignore"):
            ratios = log_p - np.log(qw)
        for pos in np.flatnonzero(ratios > alpha):
            violations.append(
                Violation(cid, symbols[int(support[pos])], float(ratios[pos]))
            )
    return (not violations), violations


def feasibility_alpha(safes: SafeAssignment) -> float:
    """Smallest alpha any NAF model could possibly achieve for these safes.

    p <= e^alpha * min_c q_c pointwise and sum(p) = 1 force
    alpha >= -ln(sum_z min_c q_c(z)); +inf when the envelope has no mass.
    """
    mass = float(safes.envelope().sum())
    if mass == 0.0:
        return math.inf
    return 0.0 if mass == 1.0 else -math.log(mass)


def nfl_witness(
    p: DiscreteDistribution,
    q1: DiscreteDistribution,
    q2: DiscreteDistribution,
) -> NflWitness:
    """Symbol where p is forced above min(q1, q2) / (2 * (1 - TV(q1, q2))).

    Whatever p is, some symbol meets the threshold; the returned symbol
    maximizes the slack p(z) - threshold(z). At TV = 1 the denominator
    vanishes and the bound is uninformative, which is reported as
    DegenerateTV instead of a vacuous witness.
    """
    _require_pair_domain(p, q1, q2)
    alpha = tv_distance(q1, q2)
    if alpha >= 1.0 - 1e-12:
        raise DegenerateTV("safe models are at total variation 1")
    thresholds = np.minimum(q1.weights, q2.weights) / (2.0 * (1.0 - alpha))
    best = int(np.argmax(p.weights - thresholds))
    return NflWitness(
        symbol=p.domain.symbols[best],
        p_value=float(p.weights[best]),
        threshold=float(thresholds[best]),
    )


def _require_pair_domain(p, q1, q2):
    if q1.domain != p.domain or q2.domain != p.domain:
        raise DomainMismatch("all three distributions must share a domain")


@dataclass(frozen=True, eq=False)
class CensorshipReport:
    """How much probability mass the safe models force any NAF model to drop.

    bounds[z] = min(1, e^alpha * min_c q_c(z)) caps what an alpha-NAF
    model may put on z; the deficit is the mass that cannot be placed
    anywhere, max(0, 1 - sum(bounds)).
    """

    alpha: float
    domain: ContentDomain
    bounds: np.ndarray
    allowed_mass: float
    deficit: float

    def to_json_obj(self) -> dict:
        return {
            "alpha": self.alpha,
            "allowed_mass": self.allowed_mass,
            "deficit": self.deficit,
            "bounds": {
                s: float(b) for s, b in zip(self.domain.symbols, self.bounds)
            },
        }


def censorship_report(safes: SafeAssignment, alpha: float) -> CensorshipReport:
    """Per-symbol allowed-mass caps and the total withheld mass at level alpha."""
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    bounds = np.minimum(math.exp(alpha) * safes.envelope(), 1.0)
    allowed = float(bounds.sum())
    return CensorshipReport(
        alpha=alpha,
        domain=safes.domain,
        bounds=bounds,
        allowed_mass=allowed,
        deficit=max(0.0, 1.0 - allowed),
    )


@dataclass(frozen=True, eq=False)
class NafReport:
    """Full diagnostic for one model against one safe assignment."""

    alpha: float
    alpha_star: float
    violations: tuple[Violation, ...]
    feasibility_alpha: float
    censorship: CensorshipReport

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_json_obj(self) -> dict:
        return {
            "alpha": self.alpha,
            "alpha_star": self.alpha_star,
            "ok": self.ok,
            "violations": [
                {"content_id": c, "symbol": z, "log_ratio": r}
                for c, z, r in self.violations
            ],
            "feasibility_alpha": self.feasibility_alpha,
            "censorship": self.censorship.to_json_obj(),
        }


def naf_report(
    p: DiscreteDistribution, safes: SafeAssignment, alpha: float
) -> NafReport:
    """Bundle the alpha check, achievable alpha, feasibility, and censorship."""
    _, violations = is_naf(p, safes, alpha)
    return NafReport(
        alpha=alpha,
        alpha_star=naf_alpha(p, safes),
        violations=tuple(violations),
        feasibility_alpha=feasibility_alpha(safes),
        censorship=censorship_report(safes, alpha),
    )
