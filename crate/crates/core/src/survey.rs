//! Survey CSV ingestion.
//!
//! Raw survey exports arrive as CSV (RFC 4180 quoting, UTF-8) with one row
//! per respondent. A user-supplied [`SurveyCsvSchema`] maps columns onto
//! ballot fields; nothing about the export layout is guessed. Rows that
//! fail any ballot invariant are excluded and itemized — ingestion never
//! silently drops or aborts on dirty data.

use std::collections::BTreeSet;
use std::fmt;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ballot_violations, Ballot, Candidate, CandidateId, Profile, ViolationKind};

/// Column mapping for a survey export. Exactly one of `rank_columns`
/// (one column per rank position, values are candidate ids) or
/// `ranking_column` (a single delimiter-separated list) must be given,
/// and `rank_columns` must cover every position `1..=|roster|`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurveyCsvSchema {
    pub voter_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rank_columns: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranking_column: Option<String>,
    /// Separator for `ranking_column` values, default `>`.
    #[serde(default = "default_separator")]
    pub ranking_separator: String,
    pub cutoff: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_vote: Option<String>,
    /// Demographic columns; the column name doubles as the dimension name.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub demographics: Vec<String>,
}

fn default_separator() -> String {
    ">".to_string()
}

impl SurveyCsvSchema {
    pub fn from_json(text: &str) -> Result<Self, IngestError> {
        serde_json::from_str(text).map_err(|e| IngestError::SchemaInvalid(e.to_string()))
    }
}

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read `{path}`: {message}")]
    FileUnreadable { path: String, message: String },
    #[error("schema names column `{0}` which the CSV header does not contain")]
    SchemaColumnMissing(String),
    #[error("schema is invalid: {0}")]
    SchemaInvalid(String),
    #[error("CSV is malformed: {0}")]
    Csv(#[from] csv::Error),
}

/// Why a row was excluded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RejectionReason {
    /// A cell could not be interpreted (bad candidate token, non-integer
    /// cutoff, short row).
    InvalidField { column: String, message: String },
    /// The decoded ballot breaks a model invariant.
    Violation(ViolationKind),
}

impl fmt::Display for RejectionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectionReason::InvalidField { column, message } => {
                write!(f, "column `{column}`: {message}")
            }
            RejectionReason::Violation(kind) => write!(f, "{kind}"),
        }
    }
}

/// One excluded row: its 1-based data row number and everything wrong
/// with it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rejection {
    pub row: usize,
    pub reasons: Vec<RejectionReason>,
}

/// Result of an ingestion pass: the accepted ballots in row order plus the
/// itemized rejects.
#[derive(Debug)]
pub struct IngestReport {
    pub profile: Profile,
    pub rows_read: usize,
    pub rejections: Vec<Rejection>,
}

/// Ingests a survey CSV from disk. See [`ingest_csv_reader`].
pub fn ingest_csv(
    path: &Path,
    schema: &SurveyCsvSchema,
    roster: &[Candidate],
) -> Result<IngestReport, IngestError> {
    let file = File::open(path).map_err(|e| IngestError::FileUnreadable {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    ingest_csv_reader(file, schema, roster)
}

/// Ingests survey rows from any reader. Each well-formed row becomes a
/// unit-weight ballot; malformed rows are excluded and reported with every
/// reason found. Row order is preserved.
pub fn ingest_csv_reader(
    reader: impl Read,
    schema: &SurveyCsvSchema,
    roster: &[Candidate],
) -> Result<IngestReport, IngestError> {
    let columns = SchemaColumns::resolve(schema, roster)?;
    let mut csv_reader = csv::ReaderBuilder::new().from_reader(reader);

    let headers = csv_reader.headers()?.clone();
    let find = |name: &str| -> Result<usize, IngestError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::SchemaColumnMissing(name.to_string()))
    };

    let voter_idx = find(&schema.voter_id)?;
    let cutoff_idx = find(&schema.cutoff)?;
    let declared_idx = schema.declared_vote.as_deref().map(find).transpose()?;
    let demographic_idx: Vec<(String, usize)> = schema
        .demographics
        .iter()
        .map(|name| Ok((name.clone(), find(name)?)))
        .collect::<Result<_, IngestError>>()?;
    let ranking_idx: RankingColumns = match &columns.ranking {
        RankingSource::PerPosition(names) => {
            RankingColumns::PerPosition(names.iter().map(|n| find(n)).collect::<Result<_, _>>()?)
        }
        RankingSource::Delimited(name) => RankingColumns::Delimited(find(name)?),
    };

    let roster_ids: BTreeSet<CandidateId> = roster.iter().map(|c| c.id.clone()).collect();
    let num_candidates = roster.len();

    let mut ballots = Vec::new();
    let mut rejections = Vec::new();
    let mut rows_read = 0usize;

    for (row_number, record) in csv_reader.records().enumerate() {
        let row = row_number + 1;
        rows_read += 1;
        let record = record?;
        let mut reasons = Vec::new();

        let cell = |idx: usize, column: &str, reasons: &mut Vec<RejectionReason>| -> String {
            match record.get(idx) {
                Some(value) => value.trim().to_string(),
                None => {
                    reasons.push(RejectionReason::InvalidField {
                        column: column.to_string(),
                        message: "missing cell".to_string(),
                    });
                    String::new()
                }
            }
        };

        let voter_id = cell(voter_idx, &schema.voter_id, &mut reasons);

        let mut ranking = Vec::with_capacity(num_candidates);
        let mut push_token = |token: &str, column: &str, reasons: &mut Vec<RejectionReason>| {
            match CandidateId::new(token.trim()) {
                Ok(id) => ranking.push(id),
                Err(e) => reasons.push(RejectionReason::InvalidField {
                    column: column.to_string(),
                    message: e.to_string(),
                }),
            }
        };
        match &ranking_idx {
            RankingColumns::PerPosition(indices) => {
                for (position, idx) in indices.iter().enumerate() {
                    let column = &columns.position_names[position];
                    let token = cell(*idx, column, &mut reasons);
                    push_token(&token, column, &mut reasons);
                }
            }
            RankingColumns::Delimited(idx) => {
                let column = match &columns.ranking {
                    RankingSource::Delimited(name) => name.as_str(),
                    RankingSource::PerPosition(_) => unreachable!(),
                };
                let raw = cell(*idx, column, &mut reasons);
                for token in raw.split(schema.ranking_separator.as_str()) {
                    push_token(token, column, &mut reasons);
                }
            }
        }

        let cutoff_raw = cell(cutoff_idx, &schema.cutoff, &mut reasons);
        let cutoff = match cutoff_raw.parse::<usize>() {
            Ok(value) => value,
            Err(_) => {
                reasons.push(RejectionReason::InvalidField {
                    column: schema.cutoff.clone(),
                    message: format!("`{cutoff_raw}` is not a non-negative integer"),
                });
                0
            }
        };

        let declared = match declared_idx {
            Some(idx) => {
                let raw = cell(idx, schema.declared_vote.as_deref().unwrap_or(""), &mut reasons);
                if raw.is_empty() {
                    None
                } else {
                    match CandidateId::new(raw) {
                        Ok(id) => Some(id),
                        Err(e) => {
                            reasons.push(RejectionReason::InvalidField {
                                column: schema.declared_vote.clone().unwrap_or_default(),
                                message: e.to_string(),
                            });
                            None
                        }
                    }
                }
            }
            None => None,
        };

        let mut ballot = Ballot::new(voter_id, ranking, cutoff);
        ballot.declared_first_vote = declared;
        for (dimension, idx) in &demographic_idx {
            if let Some(value) = record.get(*idx) {
                let value = value.trim();
                if !value.is_empty() {
                    ballot.demographics.insert(dimension.clone(), value.to_string());
                }
            }
        }

        for kind in ballot_violations(&roster_ids, num_candidates, &ballot) {
            reasons.push(RejectionReason::Violation(kind));
        }

        if reasons.is_empty() {
            ballots.push(ballot);
        } else {
            rejections.push(Rejection { row, reasons });
        }
    }

    let profile = Profile::new(roster.to_vec(), ballots);
    Ok(IngestReport {
        profile,
        rows_read,
        rejections,
    })
}

enum RankingSource {
    PerPosition(Vec<String>),
    Delimited(String),
}

enum RankingColumns {
    PerPosition(Vec<usize>),
    Delimited(usize),
}

struct SchemaColumns {
    ranking: RankingSource,
    position_names: Vec<String>,
}

impl SchemaColumns {
    fn resolve(schema: &SurveyCsvSchema, roster: &[Candidate]) -> Result<Self, IngestError> {
        match (&schema.rank_columns, &schema.ranking_column) {
            (Some(columns), None) => {
                if columns.len() != roster.len() {
                    return Err(IngestError::SchemaInvalid(format!(
                        "rank_columns must cover every position 1..={}, got {} columns",
                        roster.len(),
                        columns.len()
                    )));
                }
                Ok(SchemaColumns {
                    position_names: columns.clone(),
                    ranking: RankingSource::PerPosition(columns.clone()),
                })
            }
            (None, Some(column)) => {
                if schema.ranking_separator.is_empty() {
                    return Err(IngestError::SchemaInvalid(
                        "ranking_separator must be non-empty".to_string(),
                    ));
                }
                Ok(SchemaColumns {
                    position_names: Vec::new(),
                    ranking: RankingSource::Delimited(column.clone()),
                })
            }
            (Some(_), Some(_)) => Err(IngestError::SchemaInvalid(
                "give either rank_columns or ranking_column, not both".to_string(),
            )),
            (None, None) => Err(IngestError::SchemaInvalid(
                "schema must name rank_columns or a ranking_column".to_string(),
            )),
        }
    }
}
