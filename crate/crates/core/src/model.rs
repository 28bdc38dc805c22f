//! Election data model: candidates, ballots, profiles, and outcomes.
//!
//! A [`Profile`] is an immutable election instance: an ordered candidate
//! roster plus a sequence of weighted ballots. Every ballot carries a
//! complete strict ranking of the roster (no truncation, no duplicates),
//! an acceptability cutoff, optional demographics, and an exact rational
//! weight. All downstream tabulation consumes validated profiles and is
//! purely functional, so profiles are safe to share between threads.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num::rational::BigRational;
use num::{BigInt, Signed, Zero};
use thiserror::Error;

/// Stable candidate token. Ordering is case-sensitive byte order, which is
/// also the ordering every deterministic tie rule relies on.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CandidateId(String);

impl CandidateId {
    /// Tokens must be non-empty printable text without commas or newlines
    /// so they can appear verbatim in CSV cells and report tables.
    pub fn new(token: impl Into<String>) -> Result<Self, ModelError> {
        let token = token.into();
        if token.is_empty() {
            return Err(ModelError::EmptyCandidateToken);
        }
        if token.chars().any(|c| c.is_control() || c == ',') {
            return Err(ModelError::InvalidCandidateToken(token));
        }
        Ok(CandidateId(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Roster entry: token plus a human-readable label for reports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Candidate {
    pub id: CandidateId,
    pub name: String,
}

impl Candidate {
    pub fn new(id: CandidateId, name: impl Into<String>) -> Self {
        Candidate {
            id,
            name: name.into(),
        }
    }
}

/// 1-based position in a ranking; 1 is most preferred.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Rank(usize);

impl Rank {
    pub fn new(position: usize) -> Option<Self> {
        if position >= 1 {
            Some(Rank(position))
        } else {
            None
        }
    }

    pub fn get(self) -> usize {
        self.0
    }
}

/// Exact non-negative rational ballot weight, kept in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Weight(BigRational);

impl Weight {
    pub fn new(value: BigRational) -> Result<Self, ModelError> {
        if value.is_negative() {
            return Err(ModelError::NegativeWeight(crate::ratio::fraction_string(
                &value,
            )));
        }
        Ok(Weight(value))
    }

    pub fn one() -> Self {
        Weight(BigRational::from_integer(BigInt::from(1)))
    }

    pub fn as_ratio(&self) -> &BigRational {
        &self.0
    }

    pub fn into_ratio(self) -> BigRational {
        self.0
    }
}

impl Default for Weight {
    fn default() -> Self {
        Weight::one()
    }
}

/// One respondent's ballot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ballot {
    pub voter_id: String,
    /// Complete strict ranking of the roster, most preferred first.
    pub ranking: Vec<CandidateId>,
    /// Index of the last acceptable candidate; 0 means none acceptable.
    pub cutoff: usize,
    /// Candidate this voter says they would back in a first election round,
    /// which may differ from `ranking[0]`.
    pub declared_first_vote: Option<CandidateId>,
    /// dimension name -> category name, e.g. "age" -> "18-29".
    pub demographics: BTreeMap<String, String>,
    pub weight: Weight,
}

impl Ballot {
    pub fn new(voter_id: impl Into<String>, ranking: Vec<CandidateId>, cutoff: usize) -> Self {
        Ballot {
            voter_id: voter_id.into(),
            ranking,
            cutoff,
            declared_first_vote: None,
            demographics: BTreeMap::new(),
            weight: Weight::one(),
        }
    }

    pub fn with_weight(mut self, weight: Weight) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_declared(mut self, declared: CandidateId) -> Self {
        self.declared_first_vote = Some(declared);
        self
    }

    pub fn with_demographic(mut self, dimension: impl Into<String>, category: impl Into<String>) -> Self {
        self.demographics.insert(dimension.into(), category.into());
        self
    }

    pub fn rank_of(&self, candidate: &CandidateId) -> Option<Rank> {
        self.ranking
            .iter()
            .position(|c| c == candidate)
            .map(|idx| Rank(idx + 1))
    }

    /// Whether the candidate falls within the acceptable prefix.
    pub fn approves(&self, candidate: &CandidateId) -> bool {
        match self.rank_of(candidate) {
            Some(rank) => rank.get() <= self.cutoff,
            None => false,
        }
    }

    /// True when this ballot ranks `x` above `y`.
    pub fn prefers(&self, x: &CandidateId, y: &CandidateId) -> bool {
        match (self.rank_of(x), self.rank_of(y)) {
            (Some(rx), Some(ry)) => rx < ry,
            _ => false,
        }
    }

    /// Most preferred candidate among `active`; `None` if no active candidate
    /// appears on the ballot.
    pub fn top_among<'a>(&'a self, active: &BTreeSet<CandidateId>) -> Option<&'a CandidateId> {
        self.ranking.iter().find(|c| active.contains(c))
    }

    /// Least preferred candidate among `active`.
    pub fn last_among<'a>(&'a self, active: &BTreeSet<CandidateId>) -> Option<&'a CandidateId> {
        self.ranking.iter().rev().find(|c| active.contains(c))
    }
}

/// An immutable election instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profile {
    pub roster: Vec<Candidate>,
    pub ballots: Vec<Ballot>,
    pub metadata: BTreeMap<String, String>,
}

impl Profile {
    pub fn new(roster: Vec<Candidate>, ballots: Vec<Ballot>) -> Self {
        Profile {
            roster,
            ballots,
            metadata: BTreeMap::new(),
        }
    }

    pub fn candidate_ids(&self) -> impl Iterator<Item = &CandidateId> {
        self.roster.iter().map(|c| &c.id)
    }

    pub fn candidate_set(&self) -> BTreeSet<CandidateId> {
        self.candidate_ids().cloned().collect()
    }

    pub fn candidate_name(&self, id: &CandidateId) -> Option<&str> {
        self.roster
            .iter()
            .find(|c| &c.id == id)
            .map(|c| c.name.as_str())
    }

    pub fn num_candidates(&self) -> usize {
        self.roster.len()
    }

    pub fn total_weight(&self) -> BigRational {
        self.ballots
            .iter()
            .fold(BigRational::zero(), |acc, b| acc + b.weight.as_ratio())
    }

    /// Checks every roster and ballot invariant, returning the complete list
    /// of violations rather than stopping at the first.
    pub fn validate(&self) -> Result<(), Vec<Violation>> {
        validate_profile(self)
    }
}

/// Invariant breach discovered by [`validate_profile`]. `ballot` is `None`
/// for roster- or profile-level problems.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub ballot: Option<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.ballot {
            Some(idx) => write!(f, "ballot {}: {}", idx, self.kind),
            None => write!(f, "profile: {}", self.kind),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ViolationKind {
    #[error("roster has fewer than two candidates")]
    EmptyRoster,
    #[error("duplicate candidate `{0}` in roster")]
    DuplicateCandidateInRoster(CandidateId),
    #[error("candidate `{0}` appears more than once in the ranking")]
    DuplicateCandidateInRanking(CandidateId),
    #[error("ranking does not cover the roster (expected {expected} candidates, found {found})")]
    IncompleteRanking { expected: usize, found: usize },
    #[error("`{0}` is not a roster candidate")]
    UnknownCandidate(CandidateId),
    #[error("cutoff {cutoff} outside 0..={num_candidates}")]
    CutoffOutOfRange { cutoff: usize, num_candidates: usize },
    #[error("negative weight {0}")]
    NegativeWeight(String),
    #[error("profile total weight is zero")]
    ZeroTotalWeight,
}

/// Checks one ballot against a roster. Shared by profile validation and
/// survey-row screening, so both report identical violation kinds.
pub fn ballot_violations(
    roster_ids: &BTreeSet<CandidateId>,
    num_candidates: usize,
    ballot: &Ballot,
) -> Vec<ViolationKind> {
    let mut kinds = Vec::new();
    let mut seen = BTreeSet::new();
    let mut known = 0usize;
    for candidate in &ballot.ranking {
        if !roster_ids.contains(candidate) {
            kinds.push(ViolationKind::UnknownCandidate(candidate.clone()));
            continue;
        }
        known += 1;
        if !seen.insert(candidate.clone()) {
            kinds.push(ViolationKind::DuplicateCandidateInRanking(candidate.clone()));
        }
    }
    if seen.len() != num_candidates {
        kinds.push(ViolationKind::IncompleteRanking {
            expected: num_candidates,
            found: known,
        });
    }
    if ballot.cutoff > num_candidates {
        kinds.push(ViolationKind::CutoffOutOfRange {
            cutoff: ballot.cutoff,
            num_candidates,
        });
    }
    if let Some(declared) = &ballot.declared_first_vote {
        if !roster_ids.contains(declared) {
            kinds.push(ViolationKind::UnknownCandidate(declared.clone()));
        }
    }
    if ballot.weight.as_ratio().is_negative() {
        kinds.push(ViolationKind::NegativeWeight(crate::ratio::fraction_string(
            ballot.weight.as_ratio(),
        )));
    }
    kinds
}

/// Validates a profile against every model invariant. Returns `Ok(())` iff
/// the profile is well-formed; otherwise the full violation list, each entry
/// tagged with the offending ballot index.
pub fn validate_profile(profile: &Profile) -> Result<(), Vec<Violation>> {
    let mut violations = Vec::new();
    let mut push = |ballot, kind| violations.push(Violation { ballot, kind });

    if profile.roster.len() < 2 {
        push(None, ViolationKind::EmptyRoster);
    }
    let mut roster_ids = BTreeSet::new();
    for candidate in &profile.roster {
        if !roster_ids.insert(candidate.id.clone()) {
            push(
                None,
                ViolationKind::DuplicateCandidateInRoster(candidate.id.clone()),
            );
        }
    }

    let num_candidates = profile.roster.len();
    for (idx, ballot) in profile.ballots.iter().enumerate() {
        for kind in ballot_violations(&roster_ids, num_candidates, ballot) {
            push(Some(idx), kind);
        }
    }

    if !profile.total_weight().is_positive() {
        push(None, ViolationKind::ZeroTotalWeight);
    }

    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Deterministic tie rule. The only policy today is byte-order on the
/// candidate token; the enum leaves room for alternatives without breaking
/// the trace format.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TiePolicy {
    #[default]
    Lexicographic,
}

impl TiePolicy {
    pub fn token(self) -> &'static str {
        match self {
            TiePolicy::Lexicographic => "lexicographic",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "lexicographic" => Some(TiePolicy::Lexicographic),
            _ => None,
        }
    }
}

/// Picks one candidate from a tied set. Pure and platform-independent:
/// the same inputs always select the same candidate.
pub fn break_tie(tied: &BTreeSet<CandidateId>, policy: TiePolicy) -> Result<CandidateId, ModelError> {
    match policy {
        TiePolicy::Lexicographic => tied.iter().next().cloned().ok_or(ModelError::EmptyTieSet),
    }
}

/// Where a tie rule was applied during tabulation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TieContext {
    /// Choosing the final winner from `winner_set`.
    Winner,
    /// Choosing which candidate to eliminate this round.
    Elimination,
    /// Choosing which candidates advance to a runoff.
    Finalist,
}

impl TieContext {
    pub fn token(self) -> &'static str {
        match self {
            TieContext::Winner => "winner",
            TieContext::Elimination => "elimination",
            TieContext::Finalist => "finalist",
        }
    }
}

/// Record of one tie-rule application. `round` is 0 for winner selection,
/// otherwise the 1-based round in which the tie arose.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TieEvent {
    pub round: usize,
    pub tied: BTreeSet<CandidateId>,
    pub rule: TiePolicy,
    pub context: TieContext,
}

/// Why a tabulation round ended the way it did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RoundReason {
    /// Candidate with the least first-place weight was eliminated.
    FewestFirstPlace,
    /// Candidate with the most last-place weight was eliminated.
    MostLastPlace,
    /// A candidate's first-place weight strictly exceeded half the total.
    MajorityReached,
    /// Initial runoff round; the two strongest candidates advance.
    FinalistsSelected,
    /// Head-to-head runoff between the two finalists.
    RunoffTally,
}

impl RoundReason {
    pub fn token(self) -> &'static str {
        match self {
            RoundReason::FewestFirstPlace => "fewest-first-place",
            RoundReason::MostLastPlace => "most-last-place",
            RoundReason::MajorityReached => "majority",
            RoundReason::FinalistsSelected => "finalists",
            RoundReason::RunoffTally => "runoff",
        }
    }
}

/// One round of an elimination or runoff mechanism: the tallies the decision
/// was based on, who was eliminated (if anyone), and why the round ended.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Round {
    pub number: usize,
    pub tallies: BTreeMap<CandidateId, BigRational>,
    pub eliminated: Option<CandidateId>,
    pub reason: RoundReason,
}

/// Complete result of running one mechanism over a profile: a full ranking
/// with exact scores, the pre-tie-break winner set, the tie-broken winner,
/// per-round traces for multi-round mechanisms, and every tie application.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MechanismOutcome {
    pub mechanism: crate::mechanisms::Mechanism,
    pub ranking: Vec<(CandidateId, BigRational)>,
    pub winner_set: BTreeSet<CandidateId>,
    pub winner: CandidateId,
    pub rounds: Option<Vec<Round>>,
    pub tie_events: Vec<TieEvent>,
}

impl MechanismOutcome {
    /// 1-based position of a candidate in the full ranking.
    pub fn rank_of(&self, candidate: &CandidateId) -> Option<usize> {
        self.ranking
            .iter()
            .position(|(c, _)| c == candidate)
            .map(|idx| idx + 1)
    }

    pub fn score_of(&self, candidate: &CandidateId) -> Option<&BigRational> {
        self.ranking
            .iter()
            .find(|(c, _)| c == candidate)
            .map(|(_, s)| s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("candidate token is empty")]
    EmptyCandidateToken,
    #[error("candidate token `{0}` contains control characters or commas")]
    InvalidCandidateToken(String),
    #[error("negative weight {0}")]
    NegativeWeight(String),
    #[error("cannot break a tie over an empty candidate set")]
    EmptyTieSet,
}
