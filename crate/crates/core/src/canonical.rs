//! Canonical election and target-marginal files.
//!
//! Both formats are JSON with a fixed field order, sorted maps, two-space
//! indentation, and a trailing newline, so rendering is byte-deterministic
//! and `render(parse(file)) == file` for any file this module wrote.
//! Weights and shares are carried as `numerator/denominator` strings —
//! never decimals — so exact values survive the round trip. Decimal input
//! (e.g. `"0.36"`) is accepted and converted exactly.
//!
//! Election file shape:
//!
//! ```json
//! {
//!   "roster": [
//!     { "id": "A", "name": "Candidate A" }
//!   ],
//!   "ballots": [
//!     {
//!       "voter": "v1",
//!       "ranking": ["A", "B"],
//!       "cutoff": 2,
//!       "declared": "B",
//!       "demographics": { "age": "18-29" },
//!       "weight": "1/1"
//!     }
//!   ],
//!   "metadata": { "label": "example" }
//! }
//! ```
//!
//! `declared`, `demographics`, and `metadata` are omitted when empty;
//! `weight` defaults to 1 when omitted on input but is always written.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Ballot, Candidate, CandidateId, ModelError, Profile, Weight};
use crate::ratio::{fraction_string, parse_ratio, RatioParseError};
use crate::weighting::{TargetMarginals, WeightingError};

#[derive(Debug, Error)]
pub enum CanonicalError {
    #[error("malformed document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("roster entry {index}: {source}")]
    BadRosterEntry { index: usize, source: ModelError },
    #[error("ballot {index} ({field}): {message}")]
    BadBallotField {
        index: usize,
        field: &'static str,
        message: String,
    },
    #[error("targets {dimension}/{category}: {source}")]
    BadShare {
        dimension: String,
        category: String,
        source: RatioParseError,
    },
    #[error(transparent)]
    Weighting(#[from] WeightingError),
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ElectionDoc {
    roster: Vec<CandidateDoc>,
    ballots: Vec<BallotDoc>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    metadata: BTreeMap<String, String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CandidateDoc {
    id: String,
    name: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BallotDoc {
    voter: String,
    ranking: Vec<String>,
    cutoff: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    declared: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    demographics: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    weight: Option<String>,
}

/// Parses a canonical election document. Syntax and token-level problems
/// are errors here; profile-level invariants (complete rankings, cutoff
/// ranges, positive total weight) are the caller's [`Profile::validate`].
pub fn parse_election(text: &str) -> Result<Profile, CanonicalError> {
    let doc: ElectionDoc = serde_json::from_str(text)?;

    let mut roster = Vec::with_capacity(doc.roster.len());
    for (index, entry) in doc.roster.into_iter().enumerate() {
        let id = CandidateId::new(entry.id)
            .map_err(|source| CanonicalError::BadRosterEntry { index, source })?;
        roster.push(Candidate::new(id, entry.name));
    }

    let mut ballots = Vec::with_capacity(doc.ballots.len());
    for (index, entry) in doc.ballots.into_iter().enumerate() {
        let mut ranking = Vec::with_capacity(entry.ranking.len());
        for token in entry.ranking {
            ranking.push(CandidateId::new(token).map_err(|e| CanonicalError::BadBallotField {
                index,
                field: "ranking",
                message: e.to_string(),
            })?);
        }
        let declared = entry
            .declared
            .map(CandidateId::new)
            .transpose()
            .map_err(|e| CanonicalError::BadBallotField {
                index,
                field: "declared",
                message: e.to_string(),
            })?;
        let weight = match entry.weight {
            Some(text) => {
                let ratio = parse_ratio(&text).map_err(|e| CanonicalError::BadBallotField {
                    index,
                    field: "weight",
                    message: e.to_string(),
                })?;
                Weight::new(ratio).map_err(|e| CanonicalError::BadBallotField {
                    index,
                    field: "weight",
                    message: e.to_string(),
                })?
            }
            None => Weight::one(),
        };
        let mut ballot = Ballot::new(entry.voter, ranking, entry.cutoff).with_weight(weight);
        ballot.declared_first_vote = declared;
        ballot.demographics = entry.demographics;
        ballots.push(ballot);
    }

    let mut profile = Profile::new(roster, ballots);
    profile.metadata = doc.metadata;
    Ok(profile)
}

/// Renders a profile in canonical form. Byte-deterministic: the same
/// profile always produces the same text.
pub fn render_election(profile: &Profile) -> String {
    let doc = ElectionDoc {
        roster: profile
            .roster
            .iter()
            .map(|c| CandidateDoc {
                id: c.id.as_str().to_string(),
                name: c.name.clone(),
            })
            .collect(),
        ballots: profile
            .ballots
            .iter()
            .map(|b| BallotDoc {
                voter: b.voter_id.clone(),
                ranking: b.ranking.iter().map(|c| c.as_str().to_string()).collect(),
                cutoff: b.cutoff,
                declared: b.declared_first_vote.as_ref().map(|c| c.as_str().to_string()),
                demographics: b.demographics.clone(),
                weight: Some(fraction_string(b.weight.as_ratio())),
            })
            .collect(),
        metadata: profile.metadata.clone(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("infallible serialization");
    text.push('\n');
    text
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TargetsDoc {
    dimensions: BTreeMap<String, BTreeMap<String, String>>,
}

/// Parses a target-marginals document: dimension -> category -> share,
/// shares as fraction or decimal strings. Validates that each dimension's
/// shares are non-negative and sum to exactly 1.
pub fn parse_targets(text: &str) -> Result<TargetMarginals, CanonicalError> {
    let doc: TargetsDoc = serde_json::from_str(text)?;
    let mut dimensions = BTreeMap::new();
    for (dimension, categories) in doc.dimensions {
        let mut shares = BTreeMap::new();
        for (category, share_text) in categories {
            let share = parse_ratio(&share_text).map_err(|source| CanonicalError::BadShare {
                dimension: dimension.clone(),
                category: category.clone(),
                source,
            })?;
            shares.insert(category, share);
        }
        dimensions.insert(dimension, shares);
    }
    Ok(TargetMarginals::new(dimensions)?)
}

pub fn render_targets(targets: &TargetMarginals) -> String {
    let doc = TargetsDoc {
        dimensions: targets
            .dimensions()
            .iter()
            .map(|(dimension, shares)| {
                (
                    dimension.clone(),
                    shares
                        .iter()
                        .map(|(category, share)| (category.clone(), fraction_string(share)))
                        .collect(),
                )
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("infallible serialization");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio::parse_ratio;

    fn cid(s: &str) -> CandidateId {
        CandidateId::new(s).unwrap()
    }

    fn sample_profile() -> Profile {
        let roster = vec![
            Candidate::new(cid("A"), "Candidate A"),
            Candidate::new(cid("B"), "Candidate B"),
        ];
        let ballots = vec![
            Ballot::new("v1", vec![cid("A"), cid("B")], 1)
                .with_weight(Weight::new(parse_ratio("3/2").unwrap()).unwrap())
                .with_declared(cid("B"))
                .with_demographic("age", "18-29"),
            Ballot::new("v2", vec![cid("B"), cid("A")], 2),
        ];
        let mut profile = Profile::new(roster, ballots);
        profile.metadata.insert("label".into(), "sample".into());
        profile
    }

    #[test]
    fn parse_render_is_the_identity_on_profiles() {
        let profile = sample_profile();
        let text = render_election(&profile);
        let parsed = parse_election(&text).unwrap();
        assert_eq!(parsed, profile);
        // And rendering the reparse reproduces the bytes.
        assert_eq!(render_election(&parsed), text);
    }

    #[test]
    fn weights_are_written_as_fractions() {
        let text = render_election(&sample_profile());
        assert!(text.contains("\"weight\": \"3/2\""));
        assert!(text.contains("\"weight\": \"1/1\""));
        assert!(!text.contains("1.5"));
    }

    #[test]
    fn omitted_weight_defaults_to_one() {
        let text = r#"{
          "roster": [{"id": "A", "name": "A"}, {"id": "B", "name": "B"}],
          "ballots": [{"voter": "v1", "ranking": ["A", "B"], "cutoff": 2}]
        }"#;
        let profile = parse_election(text).unwrap();
        assert_eq!(profile.ballots[0].weight, Weight::one());
    }

    #[test]
    fn negative_weight_and_bad_tokens_are_parse_errors() {
        let negative = r#"{
          "roster": [{"id": "A", "name": "A"}, {"id": "B", "name": "B"}],
          "ballots": [{"voter": "v1", "ranking": ["A", "B"], "cutoff": 2, "weight": "-1/2"}]
        }"#;
        assert!(matches!(
            parse_election(negative),
            Err(CanonicalError::BadBallotField { field: "weight", .. })
        ));
        let bad_id = r#"{
          "roster": [{"id": "A,B", "name": "A"}, {"id": "B", "name": "B"}],
          "ballots": []
        }"#;
        assert!(matches!(
            parse_election(bad_id),
            Err(CanonicalError::BadRosterEntry { index: 0, .. })
        ));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let text = r#"{
          "roster": [{"id": "A", "name": "A"}, {"id": "B", "name": "B"}],
          "ballots": [],
          "surprise": true
        }"#;
        assert!(matches!(parse_election(text), Err(CanonicalError::Json(_))));
    }

    #[test]
    fn targets_round_trip_and_accept_decimals() {
        let text = r#"{
          "dimensions": {
            "party": { "D": "0.36", "R": "0.33", "I": "31/100" }
          }
        }"#;
        let targets = parse_targets(text).unwrap();
        assert_eq!(
            targets.dimensions()["party"]["D"],
            parse_ratio("9/25").unwrap()
        );
        let rendered = render_targets(&targets);
        assert!(rendered.contains("\"D\": \"9/25\""));
        let reparsed = parse_targets(&rendered).unwrap();
        assert_eq!(reparsed, targets);
    }

    #[test]
    fn target_shares_must_sum_to_one() {
        let text = r#"{"dimensions": {"party": {"D": "1/2", "R": "1/3"}}}"#;
        assert!(matches!(
            parse_targets(text),
            Err(CanonicalError::Weighting(
                WeightingError::TargetSharesDoNotSumToOne { .. }
            ))
        ));
    }
}
