//! Report rendering and outcome serialization.
//!
//! Two output formats exist side by side. The *machine* format is a JSON
//! document with fixed field order, sorted maps, and `numerator/denominator`
//! score strings: identical inputs always produce identical bytes, and the
//! rendered scores reparse to the same rationals. The *table* format is
//! fixed-width text for humans and carries no stability promise.

use std::collections::BTreeMap;

use num::rational::BigRational;
use num::Zero;
use serde::Serialize;
use thiserror::Error;

use crate::condorcet::{CondorcetVerdict, PairwiseMatrix};
use crate::mechanisms::Mechanism;
use crate::model::{CandidateId, MechanismOutcome, Profile};
use crate::probe::{EnumerationSpec, ProbeOutcome};
use crate::ratio::{display_string, fraction_string};
use crate::survey::IngestReport;
use crate::weighting::{sample_shares, PlanIssue, TargetMarginals, WeightingPlan};

/// Serializes any machine document: pretty JSON plus a trailing newline.
pub fn machine_string<T: Serialize>(doc: &T) -> String {
    let mut text = serde_json::to_string_pretty(doc).expect("infallible serialization");
    text.push('\n');
    text
}

// ---------------------------------------------------------------------------
// Machine documents
// ---------------------------------------------------------------------------

#[derive(Serialize)]
pub struct TabulateDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub weighting: Option<WeightingDoc>,
    pub outcomes: Vec<OutcomeDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonDoc>,
}

#[derive(Serialize)]
pub struct WeightingDoc {
    pub normalization: String,
    pub unmatched_policy: String,
    pub constants: BTreeMap<String, BTreeMap<String, String>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub uncorrectable: Vec<UncorrectableDoc>,
    pub total_weight: String,
}

#[derive(Serialize)]
pub struct UncorrectableDoc {
    pub dimension: String,
    pub category: String,
}

#[derive(Serialize)]
pub struct OutcomeDoc {
    pub mechanism: String,
    pub winner: String,
    pub winner_set: Vec<String>,
    pub ranking: Vec<RankEntryDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<Vec<RoundDoc>>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub ties: Vec<TieDoc>,
}

#[derive(Serialize)]
pub struct RankEntryDoc {
    pub rank: usize,
    pub candidate: String,
    pub score: String,
}

#[derive(Serialize)]
pub struct RoundDoc {
    pub number: usize,
    pub reason: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eliminated: Option<String>,
    pub tallies: BTreeMap<String, String>,
}

#[derive(Serialize)]
pub struct TieDoc {
    pub round: usize,
    pub context: String,
    pub policy: String,
    pub tied: Vec<String>,
}

#[derive(Serialize)]
pub struct ComparisonDoc {
    pub mechanisms: Vec<String>,
    pub candidates: Vec<String>,
    /// `ranks[i][j]`: rank of candidate `i` under mechanism `j`.
    pub ranks: Vec<Vec<usize>>,
}

#[derive(Serialize)]
pub struct CondorcetDoc {
    pub candidates: Vec<String>,
    pub total_weight: String,
    /// `prefer[x][y]`: weight ranking `x` above `y`.
    pub prefer: BTreeMap<String, BTreeMap<String, String>>,
    pub beats: BTreeMap<String, usize>,
    pub winner: Option<String>,
}

#[derive(Serialize)]
pub struct DivergenceDoc {
    pub declared_weight: String,
    pub switched_weight: String,
    pub fraction: String,
    pub transitions: Vec<TransitionDoc>,
}

#[derive(Serialize)]
pub struct TransitionDoc {
    pub from: String,
    pub to: String,
    pub weight: String,
}

#[derive(Serialize)]
pub struct IngestDoc {
    pub rows_read: usize,
    pub accepted: usize,
    pub rejected: Vec<RejectionDoc>,
}

#[derive(Serialize)]
pub struct RejectionDoc {
    pub row: usize,
    pub reasons: Vec<String>,
}

#[derive(Serialize)]
pub struct ProbeDoc {
    pub mechanism: String,
    pub candidates: usize,
    pub voters: usize,
    pub cutoffs: bool,
    pub result: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profiles_checked: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condorcet_winner: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mechanism_winner: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness_file: Option<String>,
}

pub fn outcome_doc(outcome: &MechanismOutcome) -> OutcomeDoc {
    OutcomeDoc {
        mechanism: outcome.mechanism.token().to_string(),
        winner: outcome.winner.as_str().to_string(),
        winner_set: outcome
            .winner_set
            .iter()
            .map(|c| c.as_str().to_string())
            .collect(),
        ranking: outcome
            .ranking
            .iter()
            .enumerate()
            .map(|(idx, (candidate, score))| RankEntryDoc {
                rank: idx + 1,
                candidate: candidate.as_str().to_string(),
                score: fraction_string(score),
            })
            .collect(),
        rounds: outcome.rounds.as_ref().map(|rounds| {
            rounds
                .iter()
                .map(|round| RoundDoc {
                    number: round.number,
                    reason: round.reason.token().to_string(),
                    eliminated: round.eliminated.as_ref().map(|c| c.as_str().to_string()),
                    tallies: round
                        .tallies
                        .iter()
                        .map(|(c, t)| (c.as_str().to_string(), fraction_string(t)))
                        .collect(),
                })
                .collect()
        }),
        ties: outcome
            .tie_events
            .iter()
            .map(|tie| TieDoc {
                round: tie.round,
                context: tie.context.token().to_string(),
                policy: tie.rule.token().to_string(),
                tied: tie.tied.iter().map(|c| c.as_str().to_string()).collect(),
            })
            .collect(),
    }
}

pub fn weighting_doc(
    plan: &WeightingPlan,
    issues: &[PlanIssue],
    total_weight: &BigRational,
) -> WeightingDoc {
    WeightingDoc {
        normalization: plan.normalization.token().to_string(),
        unmatched_policy: plan.unmatched_policy.token().to_string(),
        constants: plan
            .constants
            .iter()
            .map(|(dimension, categories)| {
                (
                    dimension.clone(),
                    categories
                        .iter()
                        .map(|(category, constant)| (category.clone(), fraction_string(constant)))
                        .collect(),
                )
            })
            .collect(),
        uncorrectable: issues
            .iter()
            .map(|issue| match issue {
                PlanIssue::ZeroSampleShareForTargetedCategory {
                    dimension,
                    category,
                } => UncorrectableDoc {
                    dimension: dimension.clone(),
                    category: category.clone(),
                },
            })
            .collect(),
        total_weight: fraction_string(total_weight),
    }
}

pub fn condorcet_doc(matrix: &PairwiseMatrix, verdict: &CondorcetVerdict) -> CondorcetDoc {
    let candidates: Vec<String> = matrix
        .roster()
        .iter()
        .map(|c| c.as_str().to_string())
        .collect();
    let mut prefer: BTreeMap<String, BTreeMap<String, String>> = BTreeMap::new();
    for ((x, y), weight) in matrix.entries() {
        prefer
            .entry(x.as_str().to_string())
            .or_default()
            .insert(y.as_str().to_string(), fraction_string(weight));
    }
    CondorcetDoc {
        candidates,
        total_weight: fraction_string(matrix.total_weight()),
        prefer,
        beats: verdict
            .beats
            .iter()
            .map(|(c, wins)| (c.as_str().to_string(), *wins))
            .collect(),
        winner: verdict.winner.as_ref().map(|c| c.as_str().to_string()),
    }
}

pub fn divergence_doc(report: &DivergenceReport) -> DivergenceDoc {
    DivergenceDoc {
        declared_weight: fraction_string(&report.declared_weight),
        switched_weight: fraction_string(&report.switched_weight),
        fraction: fraction_string(&report.fraction),
        transitions: report
            .transitions
            .iter()
            .map(|((from, to), weight)| TransitionDoc {
                from: from.as_str().to_string(),
                to: to.as_str().to_string(),
                weight: fraction_string(weight),
            })
            .collect(),
    }
}

pub fn ingest_doc(report: &IngestReport) -> IngestDoc {
    IngestDoc {
        rows_read: report.rows_read,
        accepted: report.profile.ballots.len(),
        rejected: report
            .rejections
            .iter()
            .map(|rejection| RejectionDoc {
                row: rejection.row,
                reasons: rejection.reasons.iter().map(|r| r.to_string()).collect(),
            })
            .collect(),
    }
}

pub fn probe_doc(
    mechanism: Mechanism,
    spec: &EnumerationSpec,
    outcome: &ProbeOutcome,
    witness_file: Option<&str>,
) -> ProbeDoc {
    let mut doc = ProbeDoc {
        mechanism: mechanism.token().to_string(),
        candidates: spec.candidates,
        voters: spec.voters,
        cutoffs: spec.enumerate_cutoffs,
        result: String::new(),
        profiles_checked: None,
        condorcet_winner: None,
        mechanism_winner: None,
        witness_file: witness_file.map(str::to_string),
    };
    match outcome {
        ProbeOutcome::Counterexample {
            condorcet_winner,
            mechanism_winner,
            ..
        } => {
            doc.result = "counterexample".to_string();
            doc.condorcet_winner = Some(condorcet_winner.as_str().to_string());
            doc.mechanism_winner = Some(mechanism_winner.as_str().to_string());
        }
        ProbeOutcome::Exhausted { profiles_checked } => {
            doc.result = "exhausted".to_string();
            doc.profiles_checked = Some(*profiles_checked);
        }
    }
    doc
}

// ---------------------------------------------------------------------------
// Cross-mechanism comparison
// ---------------------------------------------------------------------------

/// Per-candidate rank under each mechanism, candidates in roster order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComparisonMatrix {
    pub mechanisms: Vec<Mechanism>,
    pub candidates: Vec<CandidateId>,
    pub ranks: Vec<Vec<usize>>,
}

pub fn comparison_matrix(profile: &Profile, outcomes: &[MechanismOutcome]) -> ComparisonMatrix {
    let candidates: Vec<CandidateId> = profile.candidate_ids().cloned().collect();
    let ranks = candidates
        .iter()
        .map(|candidate| {
            outcomes
                .iter()
                .map(|outcome| outcome.rank_of(candidate).expect("candidate in ranking"))
                .collect()
        })
        .collect();
    ComparisonMatrix {
        mechanisms: outcomes.iter().map(|o| o.mechanism).collect(),
        candidates,
        ranks,
    }
}

pub fn comparison_doc(matrix: &ComparisonMatrix) -> ComparisonDoc {
    ComparisonDoc {
        mechanisms: matrix
            .mechanisms
            .iter()
            .map(|m| m.token().to_string())
            .collect(),
        candidates: matrix
            .candidates
            .iter()
            .map(|c| c.as_str().to_string())
            .collect(),
        ranks: matrix.ranks.clone(),
    }
}

// ---------------------------------------------------------------------------
// Declared-vote divergence
// ---------------------------------------------------------------------------

/// How much ballot weight declares a first-round vote that differs from the
/// ballot's own top rank, with the per-(top, declared) transition tally.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivergenceReport {
    /// Total weight of ballots that carry a declared vote.
    pub declared_weight: BigRational,
    /// Weight whose declared vote differs from the top rank.
    pub switched_weight: BigRational,
    /// `switched_weight / declared_weight` (0 when no declared weight).
    pub fraction: BigRational,
    /// (top rank, declared) -> weight, for differing pairs only.
    pub transitions: BTreeMap<(CandidateId, CandidateId), BigRational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DivergenceError {
    #[error("no ballot carries a declared first-round vote")]
    NoDeclaredVotes,
}

pub fn compute_divergence(profile: &Profile) -> Result<DivergenceReport, DivergenceError> {
    let mut declared_weight = BigRational::zero();
    let mut switched_weight = BigRational::zero();
    let mut transitions: BTreeMap<(CandidateId, CandidateId), BigRational> = BTreeMap::new();
    let mut any = false;

    for ballot in &profile.ballots {
        let Some(declared) = &ballot.declared_first_vote else {
            continue;
        };
        any = true;
        let weight = ballot.weight.as_ratio();
        declared_weight += weight;
        let top = ballot.ranking.first();
        if top != Some(declared) {
            switched_weight += weight;
            if let Some(top) = top {
                *transitions
                    .entry((top.clone(), declared.clone()))
                    .or_insert_with(BigRational::zero) += weight;
            }
        }
    }

    if !any {
        return Err(DivergenceError::NoDeclaredVotes);
    }
    let fraction = if declared_weight.is_zero() {
        BigRational::zero()
    } else {
        &switched_weight / &declared_weight
    };
    Ok(DivergenceReport {
        declared_weight,
        switched_weight,
        fraction,
        transitions,
    })
}

// ---------------------------------------------------------------------------
// Human tables
// ---------------------------------------------------------------------------

/// Fixed-width table: headers, a dash rule, then rows.
fn fmt_table(headers: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = headers.iter().map(|h| h.chars().count()).collect();
    for row in rows {
        for (i, cell) in row.iter().enumerate() {
            widths[i] = widths[i].max(cell.chars().count());
        }
    }
    fn push_row(out: &mut String, cells: &[String], widths: &[usize]) {
        for (i, cell) in cells.iter().enumerate() {
            if i > 0 {
                out.push_str(" | ");
            }
            out.push_str(cell);
            for _ in cell.chars().count()..widths[i] {
                out.push(' ');
            }
        }
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    }
    let mut out = String::new();
    let header_cells: Vec<String> = headers.iter().map(|h| h.to_string()).collect();
    push_row(&mut out, &header_cells, &widths);
    let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
    out.push_str(&rule.join("-+-"));
    out.push('\n');
    for row in rows {
        push_row(&mut out, row, &widths);
    }
    out
}

fn display_name(profile: &Profile, candidate: &CandidateId) -> String {
    profile
        .candidate_name(candidate)
        .filter(|name| !name.is_empty())
        .unwrap_or(candidate.as_str())
        .to_string()
}

fn tie_lines(outcome: &MechanismOutcome, profile: &Profile) -> String {
    let mut out = String::new();
    for tie in &outcome.tie_events {
        let members = tie
            .tied
            .iter()
            .map(|c| display_name(profile, c))
            .collect::<Vec<_>>()
            .join(", ");
        let place = if tie.round == 0 {
            "final".to_string()
        } else {
            format!("round {}", tie.round)
        };
        out.push_str(&format!(
            "tie ({place}, {}): {members} -> {}\n",
            tie.context.token(),
            tie.rule.token()
        ));
    }
    out
}

/// Human ranking table for one mechanism, with runoff / elimination-round
/// columns where the mechanism has them, followed by its round trace.
pub fn outcome_text(profile: &Profile, outcome: &MechanismOutcome) -> String {
    let mut out = format!(
        "== {} ({}) ==\nwinner: {}\n",
        outcome.mechanism.label(),
        outcome.mechanism.token(),
        display_name(profile, &outcome.winner)
    );
    if outcome.winner_set.len() > 1 {
        let members = outcome
            .winner_set
            .iter()
            .map(|c| display_name(profile, c))
            .collect::<Vec<_>>()
            .join(", ");
        out.push_str(&format!("winner set: {{{members}}}\n"));
    }
    out.push_str(&tie_lines(outcome, profile));

    let is_runoff = outcome.mechanism == Mechanism::Runoff;
    let is_elimination = matches!(
        outcome.mechanism,
        Mechanism::RankedChoice | Mechanism::Coombs | Mechanism::Moderation
    );

    let runoff_tallies = outcome.rounds.as_ref().and_then(|rounds| {
        rounds
            .iter()
            .find(|r| r.reason == crate::model::RoundReason::RunoffTally)
            .map(|r| r.tallies.clone())
    });
    let elimination_round = |candidate: &CandidateId| -> Option<usize> {
        outcome.rounds.as_ref().and_then(|rounds| {
            rounds
                .iter()
                .find(|r| r.eliminated.as_ref() == Some(candidate))
                .map(|r| r.number)
        })
    };

    let mut headers = vec!["Rank", "Candidate", "Score"];
    if is_runoff {
        headers.push("Runoff");
    }
    if is_elimination {
        headers.push("Eliminated in");
    }
    let rows: Vec<Vec<String>> = outcome
        .ranking
        .iter()
        .enumerate()
        .map(|(idx, (candidate, score))| {
            let mut row = vec![
                (idx + 1).to_string(),
                display_name(profile, candidate),
                display_string(score),
            ];
            if is_runoff {
                row.push(
                    runoff_tallies
                        .as_ref()
                        .and_then(|t| t.get(candidate))
                        .map(display_string)
                        .unwrap_or_else(|| "-".to_string()),
                );
            }
            if is_elimination {
                row.push(
                    elimination_round(candidate)
                        .map(|n| n.to_string())
                        .unwrap_or_else(|| "-".to_string()),
                );
            }
            row
        })
        .collect();
    out.push_str(&fmt_table(&headers, &rows));

    if let Some(rounds) = &outcome.rounds {
        for round in rounds {
            let tallies = round
                .tallies
                .iter()
                .map(|(c, t)| format!("{}={}", display_name(profile, c), display_string(t)))
                .collect::<Vec<_>>()
                .join(", ");
            let action = match &round.eliminated {
                Some(c) => format!("eliminated {}", display_name(profile, c)),
                None => "no elimination".to_string(),
            };
            out.push_str(&format!(
                "round {} [{}] {}: {}\n",
                round.number,
                round.reason.token(),
                action,
                tallies
            ));
        }
    }
    out
}

pub fn comparison_text(profile: &Profile, matrix: &ComparisonMatrix) -> String {
    let mut headers = vec!["Candidate"];
    let labels: Vec<&str> = matrix.mechanisms.iter().map(|m| m.token()).collect();
    headers.extend(labels.iter().copied());
    let rows: Vec<Vec<String>> = matrix
        .candidates
        .iter()
        .zip(&matrix.ranks)
        .map(|(candidate, ranks)| {
            let mut row = vec![display_name(profile, candidate)];
            row.extend(ranks.iter().map(|r| r.to_string()));
            row
        })
        .collect();
    format!("== Mechanism comparison ==\n{}", fmt_table(&headers, &rows))
}

pub fn condorcet_text(
    profile: &Profile,
    matrix: &PairwiseMatrix,
    verdict: &CondorcetVerdict,
) -> String {
    let roster = matrix.roster();
    let mut headers = vec!["prefers ->"];
    let names: Vec<String> = roster.iter().map(|c| display_name(profile, c)).collect();
    headers.extend(names.iter().map(String::as_str));
    let rows: Vec<Vec<String>> = roster
        .iter()
        .map(|x| {
            let mut row = vec![display_name(profile, x)];
            for y in roster {
                row.push(if x == y {
                    "-".to_string()
                } else {
                    display_string(matrix.prefer(x, y))
                });
            }
            row
        })
        .collect();
    let mut out = format!("== Pairwise matrix ==\n{}", fmt_table(&headers, &rows));
    out.push_str(&format!(
        "total weight: {}\n",
        display_string(matrix.total_weight())
    ));
    let beats = verdict
        .beats
        .iter()
        .map(|(c, wins)| format!("{}={}", display_name(profile, c), wins))
        .collect::<Vec<_>>()
        .join(", ");
    out.push_str(&format!("head-to-head victories: {beats}\n"));
    match &verdict.winner {
        Some(winner) => out.push_str(&format!(
            "Condorcet winner: {}\n",
            display_name(profile, winner)
        )),
        None => out.push_str("Condorcet winner: none (cycle or tie)\n"),
    }
    out
}

pub fn weighting_text(
    profile: &Profile,
    targets: &TargetMarginals,
    plan: &WeightingPlan,
    issues: &[PlanIssue],
) -> String {
    let mut out = format!(
        "== Weighting plan (normalization: {}, unmatched: {}) ==\n",
        plan.normalization.token(),
        plan.unmatched_policy.token()
    );
    for (dimension, constants) in &plan.constants {
        let shares = sample_shares(profile, dimension).unwrap_or_default();
        let target_shares = targets.dimensions().get(dimension);
        let rows: Vec<Vec<String>> = constants
            .iter()
            .map(|(category, constant)| {
                vec![
                    category.clone(),
                    shares
                        .get(category)
                        .map(display_string)
                        .unwrap_or_else(|| "-".to_string()),
                    target_shares
                        .and_then(|t| t.get(category))
                        .map(display_string)
                        .unwrap_or_else(|| "-".to_string()),
                    display_string(constant),
                ]
            })
            .collect();
        out.push_str(&format!("dimension: {dimension}\n"));
        out.push_str(&fmt_table(
            &["Category", "Sample share", "Target share", "Constant"],
            &rows,
        ));
    }
    for issue in issues {
        match issue {
            PlanIssue::ZeroSampleShareForTargetedCategory {
                dimension,
                category,
            } => out.push_str(&format!(
                "uncorrectable: {dimension}/{category} has no sample presence\n"
            )),
        }
    }
    out
}

pub fn divergence_text(profile: &Profile, report: &DivergenceReport) -> String {
    let mut out = format!(
        "declared-vote weight: {}\nswitched weight: {}\ndivergence fraction: {}\n",
        display_string(&report.declared_weight),
        display_string(&report.switched_weight),
        display_string(&report.fraction)
    );
    if report.transitions.is_empty() {
        out.push_str("no top-rank -> declared-vote switches\n");
    } else {
        let rows: Vec<Vec<String>> = report
            .transitions
            .iter()
            .map(|((from, to), weight)| {
                vec![
                    display_name(profile, from),
                    display_name(profile, to),
                    display_string(weight),
                ]
            })
            .collect();
        out.push_str(&fmt_table(&["Top rank", "Declared", "Weight"], &rows));
    }
    out
}

pub fn ingest_text(report: &IngestReport) -> String {
    let mut out = format!(
        "read {} rows: {} ballots accepted, {} rejected\n",
        report.rows_read,
        report.profile.ballots.len(),
        report.rejections.len()
    );
    for rejection in &report.rejections {
        for reason in &rejection.reasons {
            out.push_str(&format!("row {}: {}\n", rejection.row, reason));
        }
    }
    out
}
