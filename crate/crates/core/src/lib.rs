//! Deterministic election tabulation with exact rational arithmetic.
//!
//! The crate models weighted ranked-ballot elections and tabulates them
//! under nine voting rules, alongside demographic reweighting, pairwise
//! Condorcet analysis, and an exhaustive counterexample prober. Every score
//! is an exact rational, so equal tallies compare equal on every platform
//! and ties are detected rather than decided by rounding noise.

pub mod canonical;
pub mod condorcet;
pub mod mechanisms;
pub mod model;
pub mod probe;
pub mod ratio;
pub mod report;
pub mod survey;
pub mod weighting;

pub use condorcet::{condorcet_winner, pairwise_matrix, CondorcetVerdict, PairwiseMatrix};
pub use mechanisms::{tabulate, Mechanism, MechanismConfig, ModerationStart, RunoffVoteSource};
pub use model::{
    break_tie, validate_profile, Ballot, Candidate, CandidateId, MechanismOutcome, Profile, Rank,
    Round, RoundReason, TieContext, TieEvent, TiePolicy, Violation, ViolationKind, Weight,
};
pub use canonical::{parse_election, parse_targets, render_election, render_targets, CanonicalError};
pub use probe::{probe_condorcet_condition, EnumerationSpec, ProbeError, ProbeOutcome};
pub use report::{comparison_matrix, compute_divergence, ComparisonMatrix, DivergenceReport};
pub use survey::{ingest_csv, ingest_csv_reader, IngestError, IngestReport, SurveyCsvSchema};
pub use weighting::{
    apply_weights, build_plan, sample_shares, Normalization, PlanIssue, TargetMarginals,
    WeightingError, WeightingPlan,
};
