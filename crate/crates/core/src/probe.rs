//! Exhaustive search for Condorcet-condition counterexamples.
//!
//! The prober enumerates every profile in a bounded space (strict rankings
//! over a small roster, unit weights, optionally every cutoff position) and
//! returns the first profile — in a fixed, reproducible order — where a
//! Condorcet winner exists but the probed mechanism elects someone else.
//!
//! Enumeration order: ballot types are ordered lexicographically (ranking
//! first, then cutoff), and profiles by the mixed-radix index of their
//! ballot-type sequence. Because every implemented mechanism is anonymous,
//! the first counterexample sequence is always sorted, so the search space
//! can be reduced to nondecreasing type tuples (ballot multisets) without
//! changing the answer; [`probe_by_sequences`] keeps the unreduced walk
//! around so the reduction stays checkable.

use std::collections::BTreeMap;

use itertools::Itertools;
use thiserror::Error;

use crate::condorcet::{condorcet_winner, pairwise_matrix};
use crate::mechanisms::{tabulate, Mechanism, MechanismConfig};
use crate::model::{Ballot, Candidate, CandidateId, Profile};

pub const DEFAULT_CAP: u64 = 10_000_000;

/// Bounds of the profile space to enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationSpec {
    pub candidates: usize,
    pub voters: usize,
    /// When set, each ranking is paired with every cutoff 0..=candidates;
    /// otherwise every ballot accepts the full roster. Needed for approval
    /// and polarization probes.
    pub enumerate_cutoffs: bool,
    /// Upper bound on the sequence-space size `types^voters`.
    pub cap: u64,
}

impl EnumerationSpec {
    pub fn new(candidates: usize, voters: usize, enumerate_cutoffs: bool) -> Self {
        EnumerationSpec {
            candidates,
            voters,
            enumerate_cutoffs,
            cap: DEFAULT_CAP,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProbeOutcome {
    /// First profile in enumeration order with a Condorcet winner the
    /// mechanism fails to elect.
    Counterexample {
        profile: Box<Profile>,
        condorcet_winner: CandidateId,
        mechanism_winner: CandidateId,
    },
    /// The whole space was searched without finding one.
    Exhausted { profiles_checked: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ProbeError {
    #[error("enumeration space has {required} profiles, above the cap of {cap}")]
    SpaceTooLarge { required: u128, cap: u64 },
    #[error("{0}")]
    InvalidBounds(String),
}

/// A ballot shape available to every voter: a ranking plus a cutoff.
#[derive(Clone, Debug, PartialEq, Eq)]
struct BallotType {
    ranking: Vec<CandidateId>,
    cutoff: usize,
}

fn roster_for(candidates: usize) -> Vec<Candidate> {
    (0..candidates)
        .map(|i| {
            let token = char::from(b'A' + i as u8).to_string();
            Candidate::new(CandidateId::new(token.clone()).unwrap(), token)
        })
        .collect()
}

/// All ballot types in canonical order: rankings lexicographically, then
/// cutoffs ascending within a ranking.
fn ballot_types(roster: &[Candidate], enumerate_cutoffs: bool) -> Vec<BallotType> {
    let ids: Vec<CandidateId> = roster.iter().map(|c| c.id.clone()).collect();
    let n = ids.len();
    let mut types = Vec::new();
    for ranking in ids.iter().permutations(n) {
        let ranking: Vec<CandidateId> = ranking.into_iter().cloned().collect();
        if enumerate_cutoffs {
            for cutoff in 0..=n {
                types.push(BallotType {
                    ranking: ranking.clone(),
                    cutoff,
                });
            }
        } else {
            types.push(BallotType {
                ranking,
                cutoff: n,
            });
        }
    }
    types
}

fn check_bounds(spec: &EnumerationSpec, num_types: usize) -> Result<(), ProbeError> {
    if !(2..=4).contains(&spec.candidates) {
        return Err(ProbeError::InvalidBounds(format!(
            "candidate count {} outside 2..=4",
            spec.candidates
        )));
    }
    if !(1..=5).contains(&spec.voters) {
        return Err(ProbeError::InvalidBounds(format!(
            "voter count {} outside 1..=5",
            spec.voters
        )));
    }
    let required = (num_types as u128).pow(spec.voters as u32);
    if required > spec.cap as u128 {
        return Err(ProbeError::SpaceTooLarge {
            required,
            cap: spec.cap,
        });
    }
    Ok(())
}

fn profile_from_types(
    roster: &[Candidate],
    types: &[BallotType],
    assignment: &[usize],
    spec: &EnumerationSpec,
    mechanism: Mechanism,
) -> Profile {
    let ballots = assignment
        .iter()
        .enumerate()
        .map(|(voter, &type_idx)| {
            let t = &types[type_idx];
            Ballot::new(format!("v{}", voter + 1), t.ranking.clone(), t.cutoff)
        })
        .collect();
    let mut profile = Profile::new(roster.to_vec(), ballots);
    profile.metadata = BTreeMap::from([
        ("source".to_string(), "condorcet-probe".to_string()),
        ("mechanism".to_string(), mechanism.token().to_string()),
        ("candidates".to_string(), spec.candidates.to_string()),
        ("voters".to_string(), spec.voters.to_string()),
        ("cutoffs".to_string(), spec.enumerate_cutoffs.to_string()),
    ]);
    profile
}

/// Does this assignment witness a Condorcet-condition failure?
fn violates_condorcet_condition(
    profile: &Profile,
    mechanism: Mechanism,
    config: &MechanismConfig,
) -> Option<(CandidateId, CandidateId)> {
    let verdict = condorcet_winner(&pairwise_matrix(profile));
    let cw = verdict.winner?;
    let outcome = tabulate(profile, mechanism, config);
    if outcome.winner != cw {
        Some((cw, outcome.winner))
    } else {
        None
    }
}

/// Advances a nondecreasing type tuple to its lexicographic successor.
/// Returns false when the tuple was the last one.
fn next_nondecreasing(tuple: &mut [usize], num_types: usize) -> bool {
    for i in (0..tuple.len()).rev() {
        if tuple[i] + 1 < num_types {
            let bumped = tuple[i] + 1;
            for slot in tuple.iter_mut().skip(i) {
                *slot = bumped;
            }
            return true;
        }
    }
    false
}

/// Advances a mixed-radix counter (most significant digit first).
fn next_sequence(tuple: &mut [usize], num_types: usize) -> bool {
    for i in (0..tuple.len()).rev() {
        if tuple[i] + 1 < num_types {
            tuple[i] += 1;
            for slot in tuple.iter_mut().skip(i + 1) {
                *slot = 0;
            }
            return true;
        }
    }
    false
}

fn run_probe(
    mechanism: Mechanism,
    spec: &EnumerationSpec,
    config: &MechanismConfig,
    advance: fn(&mut [usize], usize) -> bool,
) -> Result<ProbeOutcome, ProbeError> {
    let roster = roster_for(spec.candidates);
    let types = ballot_types(&roster, spec.enumerate_cutoffs);
    check_bounds(spec, types.len())?;

    let mut assignment = vec![0usize; spec.voters];
    let mut checked: u64 = 0;
    loop {
        checked += 1;
        let profile = profile_from_types(&roster, &types, &assignment, spec, mechanism);
        if let Some((cw, winner)) = violates_condorcet_condition(&profile, mechanism, config) {
            return Ok(ProbeOutcome::Counterexample {
                profile: Box::new(profile),
                condorcet_winner: cw,
                mechanism_winner: winner,
            });
        }
        if !advance(&mut assignment, types.len()) {
            return Ok(ProbeOutcome::Exhausted {
                profiles_checked: checked,
            });
        }
    }
}

/// Searches the space for the first profile where a Condorcet winner exists
/// but `mechanism` elects a different candidate. Enumerates ballot multisets
/// (nondecreasing type tuples); by anonymity this returns exactly the
/// witness the full sequence walk would.
pub fn probe_condorcet_condition(
    mechanism: Mechanism,
    spec: &EnumerationSpec,
    config: &MechanismConfig,
) -> Result<ProbeOutcome, ProbeError> {
    run_probe(mechanism, spec, config, next_nondecreasing)
}

/// Reference walk over the full `types^voters` sequence space. Slower than
/// [`probe_condorcet_condition`] but enumerates every voter ordering;
/// used to verify the multiset reduction.
pub fn probe_by_sequences(
    mechanism: Mechanism,
    spec: &EnumerationSpec,
    config: &MechanismConfig,
) -> Result<ProbeOutcome, ProbeError> {
    run_probe(mechanism, spec, config, next_sequence)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config() -> MechanismConfig {
        MechanismConfig::default()
    }

    fn witness_profile(outcome: ProbeOutcome) -> (Profile, CandidateId, CandidateId) {
        match outcome {
            ProbeOutcome::Counterexample {
                profile,
                condorcet_winner,
                mechanism_winner,
            } => (*profile, condorcet_winner, mechanism_winner),
            ProbeOutcome::Exhausted { .. } => panic!("expected a counterexample"),
        }
    }

    #[test]
    fn approval_with_cutoffs_has_a_counterexample() {
        let spec = EnumerationSpec::new(3, 3, true);
        let outcome = probe_condorcet_condition(Mechanism::Approval, &spec, &config()).unwrap();
        let (profile, cw, winner) = witness_profile(outcome);
        assert!(profile.validate().is_ok());
        assert_ne!(cw, winner);
        // The witness must actually violate the condition when re-checked.
        let verdict = condorcet_winner(&pairwise_matrix(&profile));
        assert_eq!(verdict.winner, Some(cw));
        let rerun = tabulate(&profile, Mechanism::Approval, &config());
        assert_eq!(rerun.winner, winner);
    }

    #[test]
    fn copeland_exhausts_the_space() {
        let spec = EnumerationSpec::new(3, 3, false);
        let outcome = probe_condorcet_condition(Mechanism::Copeland, &spec, &config()).unwrap();
        assert!(matches!(outcome, ProbeOutcome::Exhausted { .. }));
    }

    #[test]
    fn cap_is_enforced_on_the_sequence_space() {
        let mut spec = EnumerationSpec::new(3, 5, true);
        spec.cap = 1000; // 24^5 sequences is far above this
        let err = probe_condorcet_condition(Mechanism::Approval, &spec, &config()).unwrap_err();
        assert!(matches!(err, ProbeError::SpaceTooLarge { .. }));
    }

    #[test]
    fn bounds_are_validated() {
        let spec = EnumerationSpec::new(5, 3, false);
        assert!(matches!(
            probe_condorcet_condition(Mechanism::Borda, &spec, &config()),
            Err(ProbeError::InvalidBounds(_))
        ));
        let spec = EnumerationSpec::new(3, 6, false);
        assert!(matches!(
            probe_condorcet_condition(Mechanism::Borda, &spec, &config()),
            Err(ProbeError::InvalidBounds(_))
        ));
    }

    /// The multiset reduction must agree with the unreduced sequence walk on
    /// every three-voter space: same verdict, same witness.
    #[test]
    fn multiset_reduction_matches_sequence_enumeration() {
        for mechanism in Mechanism::ALL {
            let cutoffs = matches!(mechanism, Mechanism::Approval | Mechanism::Polarization);
            let spec = EnumerationSpec::new(3, 3, cutoffs);
            let reduced = probe_condorcet_condition(mechanism, &spec, &config()).unwrap();
            let full = probe_by_sequences(mechanism, &spec, &config()).unwrap();
            match (&reduced, &full) {
                (
                    ProbeOutcome::Counterexample { profile: a, .. },
                    ProbeOutcome::Counterexample { profile: b, .. },
                ) => assert_eq!(a.ballots, b.ballots, "{}", mechanism.token()),
                (ProbeOutcome::Exhausted { .. }, ProbeOutcome::Exhausted { .. }) => {}
                _ => panic!(
                    "enumeration strategies disagree for {}",
                    mechanism.token()
                ),
            }
        }
    }

    #[test]
    fn nondecreasing_walk_visits_multisets_in_order() {
        let mut tuple = vec![0, 0];
        let mut seen = vec![tuple.clone()];
        while next_nondecreasing(&mut tuple, 3) {
            seen.push(tuple.clone());
        }
        assert_eq!(
            seen,
            vec![
                vec![0, 0],
                vec![0, 1],
                vec![0, 2],
                vec![1, 1],
                vec![1, 2],
                vec![2, 2]
            ]
        );
    }
}
