"""stability-lab: executable stability notions over finite content domains.

Distributions, total variation, shared-randomness couplings, exact DP
divergences, private histograms, near-access-freeness diagnostics, and a
stability-to-DP learner transform, all small enough to check against
brute-force oracles.
"""

from .core import (
    ContentDomain,
    Dataset,
    DiscreteDistribution,
    Event,
    load_dataset,
    make_distribution,
    min_envelope,
    read_distribution,
    sample,
    sample_dataset,
    sample_indices,
    tv_distance,
    tv_event_form,
    write_distribution,
)
from .coupling import (
    CouplingTape,
    coupled_sample,
    coupled_sample_index,
    disagreement_estimate,
    new_tape,
)
from .dp import (
    DpParams,
    HistogramDpAudit,
    NoisyHistogram,
    audit_histogram_dp,
    dp_beta,
    dp_beta_event_form,
    freq,
    histogram_output_law,
    histogram_threshold,
    private_histogram,
    required_k,
    symmetric_dp_beta,
)
from .naf import (
    CensorshipReport,
    NafReport,
    NflWitness,
    SafeAssignment,
    Violation,
    censorship_report,
    feasibility_alpha,
    is_naf,
    naf_alpha,
    naf_report,
    nfl_witness,
    safe_leave_one_out,
    safe_sharded,
)
from .transform import (
    BoundExperimentReport,
    Learner,
    TransformConfig,
    deviation_bound,
    dp_transform,
    dp_transform_trace,
    estimate_premise_alpha,
    simplex_project_linf,
    transform_bound_experiment,
)
from .learners import ingest_corpus, learner_constant, learner_empirical
from .util import derive_seed

__all__ = [
    "ContentDomain",
    "Dataset",
    "DiscreteDistribution",
    "Event",
    "load_dataset",
    "make_distribution",
    "min_envelope",
    "read_distribution",
    "sample",
    "sample_dataset",
    "sample_indices",
    "tv_distance",
    "tv_event_form",
    "write_distribution",
    "CouplingTape",
    "coupled_sample",
    "coupled_sample_index",
    "disagreement_estimate",
    "new_tape",
    "DpParams",
    "HistogramDpAudit",
    "NoisyHistogram",
    "audit_histogram_dp",
    "dp_beta",
    "dp_beta_event_form",
    "freq",
    "histogram_output_law",
    "histogram_threshold",
    "private_histogram",
    "required_k",
    "symmetric_dp_beta",
    "CensorshipReport",
    "NafReport",
    "NflWitness",
    "SafeAssignment",
    "Violation",
    "censorship_report",
    "feasibility_alpha",
    "is_naf",
    "naf_alpha",
    "naf_report",
    "nfl_witness",
    "safe_leave_one_out",
    "safe_sharded",
    "BoundExperimentReport",
    "Learner",
    "TransformConfig",
    "deviation_bound",
    "dp_transform",
    "dp_transform_trace",
    "estimate_premise_alpha",
    "simplex_project_linf",
    "transform_bound_experiment",
    "ingest_corpus",
    "learner_constant",
    "learner_empirical",
    "derive_seed",
]

__version__ = "0.1.0"
