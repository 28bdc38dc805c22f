//! Demographic post-stratification.
//!
//! Survey samples rarely match the voting population, so each demographic
//! dimension gets a per-category correction constant: the category's target
//! share divided by its share of the sample. A ballot's weight is its prior
//! weight times the product of the constants for its own labels, one factor
//! per dimension. Ballots missing a dimension fall in a reserved `∅`
//! category, which is never corrected unless the targets address it
//! explicitly.

use std::collections::BTreeMap;

use num::rational::BigRational;
use num::{BigInt, One, Zero};
use thiserror::Error;

use crate::model::{Profile, Weight};

/// Reserved category for ballots that do not carry a dimension.
pub const MISSING_CATEGORY: &str = "∅";

/// Desired population shares per demographic dimension. Within a dimension
/// the shares are non-negative and sum to exactly 1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TargetMarginals {
    dimensions: BTreeMap<String, BTreeMap<String, BigRational>>,
}

impl TargetMarginals {
    pub fn new(
        dimensions: BTreeMap<String, BTreeMap<String, BigRational>>,
    ) -> Result<Self, WeightingError> {
        for (dimension, shares) in &dimensions {
            let mut sum = BigRational::zero();
            for (category, share) in shares {
                if share < &BigRational::zero() {
                    return Err(WeightingError::NegativeTargetShare {
                        dimension: dimension.clone(),
                        category: category.clone(),
                    });
                }
                sum += share;
            }
            if !sum.is_one() {
                return Err(WeightingError::TargetSharesDoNotSumToOne {
                    dimension: dimension.clone(),
                    sum: crate::ratio::fraction_string(&sum),
                });
            }
        }
        Ok(TargetMarginals { dimensions })
    }

    pub fn dimensions(&self) -> &BTreeMap<String, BTreeMap<String, BigRational>> {
        &self.dimensions
    }
}

/// How categories that appear in the sample but not in the targets are
/// handled: they keep a neutral constant of 1.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum UnmatchedPolicy {
    #[default]
    NeutralOne,
}

impl UnmatchedPolicy {
    pub fn token(self) -> &'static str {
        match self {
            UnmatchedPolicy::NeutralOne => "neutral-one",
        }
    }
}

/// Whether combined weights are rescaled so the mean ballot weight is
/// exactly 1. Winner sets are invariant under the rescale; it only keeps
/// weighted totals comparable to raw ballot counts.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Normalization {
    #[default]
    MeanOne,
    None,
}

impl Normalization {
    pub fn token(self) -> &'static str {
        match self {
            Normalization::MeanOne => "mean-one",
            Normalization::None => "none",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "mean-one" => Some(Normalization::MeanOne),
            "none" => Some(Normalization::None),
            _ => None,
        }
    }
}

/// Correction constants derived from one profile + target pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightingPlan {
    /// dimension -> category -> constant. Includes neutral 1 entries for
    /// sample categories the targets do not mention.
    pub constants: BTreeMap<String, BTreeMap<String, BigRational>>,
    pub unmatched_policy: UnmatchedPolicy,
    pub normalization: Normalization,
}

/// A targeted category that could not be corrected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PlanIssue {
    /// The category has zero presence in the sample, so no finite constant
    /// exists; it is reported and omitted from the plan.
    ZeroSampleShareForTargetedCategory { dimension: String, category: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum WeightingError {
    #[error("no ballot carries demographic dimension `{0}`")]
    UnknownDimension(String),
    #[error("target shares for `{dimension}` sum to {sum}, expected 1")]
    TargetSharesDoNotSumToOne { dimension: String, sum: String },
    #[error("negative target share for `{dimension}` / `{category}`")]
    NegativeTargetShare { dimension: String, category: String },
}

/// Unweighted ballot-count shares of each category of `dimension`. Ballots
/// without the dimension count under [`MISSING_CATEGORY`]; the shares sum
/// to 1 over the categories present.
pub fn sample_shares(
    profile: &Profile,
    dimension: &str,
) -> Result<BTreeMap<String, BigRational>, WeightingError> {
    if !profile
        .ballots
        .iter()
        .any(|b| b.demographics.contains_key(dimension))
    {
        return Err(WeightingError::UnknownDimension(dimension.to_string()));
    }
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for ballot in &profile.ballots {
        let category = ballot
            .demographics
            .get(dimension)
            .map(String::as_str)
            .unwrap_or(MISSING_CATEGORY);
        *counts.entry(category.to_string()).or_insert(0) += 1;
    }
    let total = BigInt::from(profile.ballots.len() as u64);
    Ok(counts
        .into_iter()
        .map(|(category, count)| {
            (
                category,
                BigRational::new(BigInt::from(count), total.clone()),
            )
        })
        .collect())
}

/// Builds correction constants: `target_share / sample_share` for every
/// category present in both, a neutral 1 for sample categories the targets
/// do not mention, and a reported [`PlanIssue`] for targeted categories
/// with no sample presence.
pub fn build_plan(
    profile: &Profile,
    targets: &TargetMarginals,
    normalization: Normalization,
) -> (WeightingPlan, Vec<PlanIssue>) {
    let mut constants = BTreeMap::new();
    let mut issues = Vec::new();

    for (dimension, target_shares) in targets.dimensions() {
        let shares = match sample_shares(profile, dimension) {
            Ok(shares) => shares,
            // Dimension absent from the sample entirely: every targeted
            // category is uncorrectable.
            Err(WeightingError::UnknownDimension(_)) => BTreeMap::new(),
            Err(_) => unreachable!("sample_shares only fails with UnknownDimension"),
        };
        let mut dimension_constants = BTreeMap::new();
        for (category, target_share) in target_shares {
            match shares.get(category) {
                Some(sample_share) if !sample_share.is_zero() => {
                    dimension_constants.insert(category.clone(), target_share / sample_share);
                }
                _ => issues.push(PlanIssue::ZeroSampleShareForTargetedCategory {
                    dimension: dimension.clone(),
                    category: category.clone(),
                }),
            }
        }
        for category in shares.keys() {
            dimension_constants
                .entry(category.clone())
                .or_insert_with(BigRational::one);
        }
        constants.insert(dimension.clone(), dimension_constants);
    }

    (
        WeightingPlan {
            constants,
            unmatched_policy: UnmatchedPolicy::NeutralOne,
            normalization,
        },
        issues,
    )
}

/// Reweights every ballot: prior weight times the product of the plan's
/// constants for the ballot's labels (missing labels read as `∅`, absent
/// constants read as 1). Rankings, cutoffs, declared votes, demographics,
/// and ballot order never change. Under mean-one normalization all weights
/// are then scaled by one common rational so the mean is exactly 1.
pub fn apply_weights(profile: &Profile, plan: &WeightingPlan) -> Profile {
    let mut reweighted = profile.clone();
    for ballot in &mut reweighted.ballots {
        let mut factor = BigRational::one();
        for (dimension, dimension_constants) in &plan.constants {
            let category = ballot
                .demographics
                .get(dimension)
                .map(String::as_str)
                .unwrap_or(MISSING_CATEGORY);
            if let Some(constant) = dimension_constants.get(category) {
                factor *= constant;
            }
        }
        let new_weight = ballot.weight.as_ratio() * factor;
        ballot.weight = Weight::new(new_weight).expect("non-negative times non-negative");
    }

    if plan.normalization == Normalization::MeanOne && !reweighted.ballots.is_empty() {
        let sum = reweighted.total_weight();
        if !sum.is_zero() {
            let count = BigRational::from_integer(BigInt::from(reweighted.ballots.len() as u64));
            let scale = count / sum;
            for ballot in &mut reweighted.ballots {
                let scaled = ballot.weight.as_ratio() * &scale;
                ballot.weight = Weight::new(scaled).expect("positive scale");
            }
        }
    }

    reweighted
}
