//! Weighted head-to-head preference tallies and Condorcet-winner detection.

use std::collections::BTreeMap;

use num::rational::BigRational;
use num::Zero;

use crate::model::{CandidateId, Profile};

/// Head-to-head tallies for every ordered candidate pair. `prefer[(x, y)]`
/// is the total weight of ballots ranking `x` above `y`; because rankings
/// are complete, `prefer(x, y) + prefer(y, x)` equals the total ballot
/// weight for every pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairwiseMatrix {
    roster: Vec<CandidateId>,
    prefer: BTreeMap<(CandidateId, CandidateId), BigRational>,
    total_weight: BigRational,
}

impl PairwiseMatrix {
    /// Candidates in the profile's roster order.
    pub fn roster(&self) -> &[CandidateId] {
        &self.roster
    }

    pub fn total_weight(&self) -> &BigRational {
        &self.total_weight
    }

    /// Weight of ballots ranking `x` above `y`. Panics if either candidate
    /// is not part of the matrix.
    pub fn prefer(&self, x: &CandidateId, y: &CandidateId) -> &BigRational {
        &self.prefer[&(x.clone(), y.clone())]
    }

    /// Candidates `c` strictly beats head-to-head.
    pub fn victories(&self, c: &CandidateId) -> usize {
        self.roster
            .iter()
            .filter(|other| *other != c && self.prefer(c, other) > self.prefer(other, c))
            .count()
    }

    /// Candidates `c` strictly loses to head-to-head. Exact ties count as
    /// neither victory nor defeat.
    pub fn defeats(&self, c: &CandidateId) -> usize {
        self.roster
            .iter()
            .filter(|other| *other != c && self.prefer(other, c) > self.prefer(c, other))
            .count()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(CandidateId, CandidateId), &BigRational)> {
        self.prefer.iter()
    }
}

/// Whether a profile has a Condorcet winner: a candidate with a strict
/// pairwise victory over every other candidate. At most one can exist.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CondorcetVerdict {
    pub winner: Option<CandidateId>,
    /// Strict pairwise victory counts per candidate.
    pub beats: BTreeMap<CandidateId, usize>,
}

/// Builds the weighted pairwise preference matrix for a validated profile.
pub fn pairwise_matrix(profile: &Profile) -> PairwiseMatrix {
    let roster: Vec<CandidateId> = profile.candidate_ids().cloned().collect();
    let mut prefer: BTreeMap<(CandidateId, CandidateId), BigRational> = BTreeMap::new();
    for x in &roster {
        for y in &roster {
            if x != y {
                prefer.insert((x.clone(), y.clone()), BigRational::zero());
            }
        }
    }
    for ballot in &profile.ballots {
        let weight = ballot.weight.as_ratio();
        for (i, x) in ballot.ranking.iter().enumerate() {
            for y in ballot.ranking.iter().skip(i + 1) {
                if let Some(entry) = prefer.get_mut(&(x.clone(), y.clone())) {
                    *entry += weight;
                }
            }
        }
    }
    PairwiseMatrix {
        roster,
        prefer,
        total_weight: profile.total_weight(),
    }
}

/// Finds the Condorcet winner, if any: the candidate whose strict victory
/// count equals the number of opponents.
pub fn condorcet_winner(matrix: &PairwiseMatrix) -> CondorcetVerdict {
    let opponents = matrix.roster().len().saturating_sub(1);
    let beats: BTreeMap<CandidateId, usize> = matrix
        .roster()
        .iter()
        .map(|c| (c.clone(), matrix.victories(c)))
        .collect();
    let winner = beats
        .iter()
        .find(|(_, wins)| **wins == opponents)
        .map(|(c, _)| c.clone());
    CondorcetVerdict { winner, beats }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Ballot, Candidate, CandidateId};
    use num::BigInt;

    fn cid(s: &str) -> CandidateId {
        CandidateId::new(s).unwrap()
    }

    fn profile(rankings: &[&[&str]]) -> Profile {
        let roster = ["A", "B", "C"]
            .iter()
            .map(|s| Candidate::new(cid(s), *s))
            .collect();
        let ballots = rankings
            .iter()
            .enumerate()
            .map(|(i, order)| {
                Ballot::new(
                    format!("v{}", i + 1),
                    order.iter().map(|s| cid(s)).collect(),
                    order.len(),
                )
            })
            .collect();
        Profile::new(roster, ballots)
    }

    fn int(n: i64) -> BigRational {
        BigRational::from_integer(BigInt::from(n))
    }

    /// Three-ballot cycle: every candidate wins exactly one matchup 2-1.
    #[test]
    fn cyclic_profile_has_no_winner() {
        let p = profile(&[&["A", "B", "C"], &["B", "C", "A"], &["C", "A", "B"]]);
        let m = pairwise_matrix(&p);
        assert_eq!(*m.prefer(&cid("A"), &cid("B")), int(2));
        assert_eq!(*m.prefer(&cid("B"), &cid("C")), int(2));
        assert_eq!(*m.prefer(&cid("C"), &cid("A")), int(2));
        assert_eq!(*m.prefer(&cid("B"), &cid("A")), int(1));
        assert_eq!(*m.prefer(&cid("C"), &cid("B")), int(1));
        assert_eq!(*m.prefer(&cid("A"), &cid("C")), int(1));
        let verdict = condorcet_winner(&m);
        assert_eq!(verdict.winner, None);
        assert!(verdict.beats.values().all(|&wins| wins == 1));
    }

    #[test]
    fn unanimity_gives_the_top_candidate() {
        let p = profile(&[&["A", "B", "C"], &["A", "B", "C"], &["A", "B", "C"]]);
        let m = pairwise_matrix(&p);
        assert_eq!(*m.prefer(&cid("A"), &cid("B")), int(3));
        assert_eq!(*m.prefer(&cid("A"), &cid("C")), int(3));
        assert_eq!(*m.prefer(&cid("B"), &cid("C")), int(3));
        assert_eq!(*m.prefer(&cid("B"), &cid("A")), int(0));
        assert_eq!(condorcet_winner(&m).winner, Some(cid("A")));
    }

    /// Five-ballot profile where the middle candidate beats both wings 3-2.
    #[test]
    fn middle_candidate_wins_head_to_head() {
        let p = profile(&[
            &["A", "B", "C"],
            &["A", "B", "C"],
            &["C", "B", "A"],
            &["C", "B", "A"],
            &["B", "A", "C"],
        ]);
        let m = pairwise_matrix(&p);
        assert_eq!(*m.prefer(&cid("B"), &cid("A")), int(3));
        assert_eq!(*m.prefer(&cid("B"), &cid("C")), int(3));
        assert_eq!(*m.prefer(&cid("A"), &cid("C")), int(3));
        let verdict = condorcet_winner(&m);
        assert_eq!(verdict.winner, Some(cid("B")));
        assert_eq!(verdict.beats[&cid("B")], 2);
        assert_eq!(verdict.beats[&cid("A")], 1);
        assert_eq!(verdict.beats[&cid("C")], 0);
    }

    #[test]
    fn pair_totals_conserve_total_weight() {
        let p = profile(&[
            &["A", "B", "C"],
            &["B", "C", "A"],
            &["C", "A", "B"],
            &["A", "C", "B"],
        ]);
        let m = pairwise_matrix(&p);
        let total = p.total_weight();
        for x in p.candidate_ids() {
            for y in p.candidate_ids() {
                if x != y {
                    assert_eq!(m.prefer(x, y) + m.prefer(y, x), total);
                }
            }
        }
    }
}
