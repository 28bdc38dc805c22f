//! The nine tabulation rules.
//!
//! Each rule is a pure function from a validated [`Profile`] (plus a
//! [`MechanismConfig`]) to a [`MechanismOutcome`] carrying the full candidate
//! ranking with exact rational scores, the pre-tie-break winner set, round
//! traces for multi-round rules, and a record of every tie-rule application.
//!
//! Score semantics per rule:
//! * plurality / borda / approval / copeland / polarization rank by their
//!   natural scores;
//! * elimination rules (irv, coombs, moderation) rank by survival — the
//!   reported score of the k-th ranked candidate is `|A| - k + 1`;
//! * runoff ranks the two finalists first and reports first-round scores,
//!   with the head-to-head tallies in the round trace.

use std::collections::{BTreeMap, BTreeSet};

use num::rational::BigRational;
use num::{BigInt, Zero};

use crate::condorcet::pairwise_matrix;
use crate::model::{
    break_tie, CandidateId, MechanismOutcome, Profile, Round, RoundReason, TieContext, TieEvent,
    TiePolicy,
};

/// Closed set of mechanism tokens used by the CLI, config files, and report
/// headers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mechanism {
    Plurality,
    Runoff,
    RankedChoice,
    Coombs,
    Borda,
    Approval,
    Copeland,
    Moderation,
    Polarization,
}

impl Mechanism {
    pub const ALL: [Mechanism; 9] = [
        Mechanism::Plurality,
        Mechanism::Runoff,
        Mechanism::RankedChoice,
        Mechanism::Coombs,
        Mechanism::Borda,
        Mechanism::Approval,
        Mechanism::Copeland,
        Mechanism::Moderation,
        Mechanism::Polarization,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Mechanism::Plurality => "plurality",
            Mechanism::Runoff => "runoff",
            Mechanism::RankedChoice => "irv",
            Mechanism::Coombs => "coombs",
            Mechanism::Borda => "borda",
            Mechanism::Approval => "approval",
            Mechanism::Copeland => "copeland",
            Mechanism::Moderation => "moderation",
            Mechanism::Polarization => "polarization",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        Mechanism::ALL.into_iter().find(|m| m.token() == token)
    }

    /// Label for table headers.
    pub fn label(self) -> &'static str {
        match self {
            Mechanism::Plurality => "Plurality",
            Mechanism::Runoff => "Plurality with Runoff",
            Mechanism::RankedChoice => "Ranked Choice",
            Mechanism::Coombs => "Coombs' Method",
            Mechanism::Borda => "Borda Count",
            Mechanism::Approval => "Approval Voting",
            Mechanism::Copeland => "Copeland Rule",
            Mechanism::Moderation => "Moderation Rule",
            Mechanism::Polarization => "Polarization Rule",
        }
    }
}

/// Which tally feeds the first runoff round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum RunoffVoteSource {
    /// Use the ballot's declared first-round vote when present, otherwise
    /// its top-ranked candidate.
    #[default]
    DeclaredElseTop,
    /// Always use the top-ranked candidate.
    TopRank,
}

impl RunoffVoteSource {
    pub fn token(self) -> &'static str {
        match self {
            RunoffVoteSource::DeclaredElseTop => "declared-else-top",
            RunoffVoteSource::TopRank => "top-rank",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "declared-else-top" => Some(RunoffVoteSource::DeclaredElseTop),
            "top-rank" => Some(RunoffVoteSource::TopRank),
            _ => None,
        }
    }
}

/// Which removal step the moderation rule performs first.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum ModerationStart {
    #[default]
    LeastFirst,
    MostLast,
}

impl ModerationStart {
    pub fn token(self) -> &'static str {
        match self {
            ModerationStart::LeastFirst => "least-first",
            ModerationStart::MostLast => "most-last",
        }
    }

    pub fn from_token(token: &str) -> Option<Self> {
        match token {
            "least-first" => Some(ModerationStart::LeastFirst),
            "most-last" => Some(ModerationStart::MostLast),
            _ => None,
        }
    }
}

/// Tabulation knobs shared by all mechanisms. A "majority" is always
/// strictly more than half of the total ballot weight, so an exact half
/// never short-circuits a runoff or ranked-choice round.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MechanismConfig {
    pub tie_policy: TiePolicy,
    pub runoff_vote_source: RunoffVoteSource,
    pub moderation_start: ModerationStart,
}

/// Runs one mechanism over a validated profile.
pub fn tabulate(profile: &Profile, mechanism: Mechanism, config: &MechanismConfig) -> MechanismOutcome {
    match mechanism {
        Mechanism::Plurality => plurality(profile, config),
        Mechanism::Runoff => plurality_with_runoff(profile, config),
        Mechanism::RankedChoice => ranked_choice(profile, config),
        Mechanism::Coombs => coombs(profile, config),
        Mechanism::Borda => borda(profile, config),
        Mechanism::Approval => approval(profile, config),
        Mechanism::Copeland => copeland(profile, config),
        Mechanism::Moderation => moderation(profile, config),
        Mechanism::Polarization => polarization(profile, config),
    }
}

// ---------------------------------------------------------------------------
// Shared tally helpers
// ---------------------------------------------------------------------------

fn zero_tallies<'a>(ids: impl Iterator<Item = &'a CandidateId>) -> BTreeMap<CandidateId, BigRational> {
    ids.map(|c| (c.clone(), BigRational::zero())).collect()
}

/// Weight of ballots whose most preferred *active* candidate is `c`.
fn first_place_tallies(profile: &Profile, active: &BTreeSet<CandidateId>) -> BTreeMap<CandidateId, BigRational> {
    let mut tallies = zero_tallies(active.iter());
    for ballot in &profile.ballots {
        if let Some(top) = ballot.top_among(active) {
            *tallies.get_mut(top).expect("active candidate") += ballot.weight.as_ratio();
        }
    }
    tallies
}

/// Weight of ballots whose least preferred *active* candidate is `c`.
fn last_place_tallies(profile: &Profile, active: &BTreeSet<CandidateId>) -> BTreeMap<CandidateId, BigRational> {
    let mut tallies = zero_tallies(active.iter());
    for ballot in &profile.ballots {
        if let Some(last) = ballot.last_among(active) {
            *tallies.get_mut(last).expect("active candidate") += ballot.weight.as_ratio();
        }
    }
    tallies
}

fn max_set(tallies: &BTreeMap<CandidateId, BigRational>) -> BTreeSet<CandidateId> {
    let best = tallies.values().max().cloned();
    match best {
        Some(best) => tallies
            .iter()
            .filter(|(_, v)| **v == best)
            .map(|(c, _)| c.clone())
            .collect(),
        None => BTreeSet::new(),
    }
}

fn min_set(tallies: &BTreeMap<CandidateId, BigRational>) -> BTreeSet<CandidateId> {
    let worst = tallies.values().min().cloned();
    match worst {
        Some(worst) => tallies
            .iter()
            .filter(|(_, v)| **v == worst)
            .map(|(c, _)| c.clone())
            .collect(),
        None => BTreeSet::new(),
    }
}

/// Full ranking by descending score; equal scores order by candidate id so
/// the result is deterministic.
fn descending_ranking(scores: &BTreeMap<CandidateId, BigRational>) -> Vec<(CandidateId, BigRational)> {
    let mut ranking: Vec<(CandidateId, BigRational)> =
        scores.iter().map(|(c, s)| (c.clone(), s.clone())).collect();
    ranking.sort_by(|(ca, sa), (cb, sb)| sb.cmp(sa).then_with(|| ca.cmp(cb)));
    ranking
}

/// Strict majority: `value` must exceed half of `total`.
fn exceeds_half(value: &BigRational, total: &BigRational) -> bool {
    value + value > *total
}

fn int_ratio(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

fn pick_winner(
    winner_set: &BTreeSet<CandidateId>,
    config: &MechanismConfig,
    tie_events: &mut Vec<TieEvent>,
) -> CandidateId {
    if winner_set.len() > 1 {
        tie_events.push(TieEvent {
            round: 0,
            tied: winner_set.clone(),
            rule: config.tie_policy,
            context: TieContext::Winner,
        });
    }
    break_tie(winner_set, config.tie_policy).expect("winner set is non-empty")
}

fn pick_for_elimination(
    tied: &BTreeSet<CandidateId>,
    round: usize,
    config: &MechanismConfig,
    tie_events: &mut Vec<TieEvent>,
) -> CandidateId {
    if tied.len() > 1 {
        tie_events.push(TieEvent {
            round,
            tied: tied.clone(),
            rule: config.tie_policy,
            context: TieContext::Elimination,
        });
    }
    break_tie(tied, config.tie_policy).expect("elimination set is non-empty")
}

/// Outcome for a single-pass scoring rule: no rounds, ranking by score.
fn scoring_outcome(
    mechanism: Mechanism,
    scores: BTreeMap<CandidateId, BigRational>,
    config: &MechanismConfig,
) -> MechanismOutcome {
    let ranking = descending_ranking(&scores);
    let winner_set = max_set(&scores);
    let mut tie_events = Vec::new();
    let winner = pick_winner(&winner_set, config, &mut tie_events);
    MechanismOutcome {
        mechanism,
        ranking,
        winner_set,
        winner,
        rounds: None,
        tie_events,
    }
}

/// Ranking for elimination rules: surviving candidates (best first) followed
/// by eliminated candidates in reverse elimination order, scored `|A|..1`.
fn elimination_ranking(
    survivors: Vec<CandidateId>,
    eliminated: &[CandidateId],
    num_candidates: usize,
) -> Vec<(CandidateId, BigRational)> {
    survivors
        .into_iter()
        .chain(eliminated.iter().rev().cloned())
        .enumerate()
        .map(|(idx, c)| (c, int_ratio((num_candidates - idx) as i64)))
        .collect()
}

// ---------------------------------------------------------------------------
// Single-pass scoring rules
// ---------------------------------------------------------------------------

/// Each ballot's full weight goes to its top-ranked candidate; the most
/// weight wins.
pub fn plurality(profile: &Profile, config: &MechanismConfig) -> MechanismOutcome {
    let active = profile.candidate_set();
    let scores = first_place_tallies(profile, &active);
    scoring_outcome(Mechanism::Plurality, scores, config)
}

/// Positional scoring: rank r earns `|A| - r + 1` points per unit weight.
pub fn borda(profile: &Profile, config: &MechanismConfig) -> MechanismOutcome {
    let n = profile.num_candidates();
    let mut scores = zero_tallies(profile.candidate_ids());
    for ballot in &profile.ballots {
        let weight = ballot.weight.as_ratio();
        for (pos, candidate) in ballot.ranking.iter().enumerate() {
            if let Some(entry) = scores.get_mut(candidate) {
                *entry += weight * int_ratio((n - pos) as i64);
            }
        }
    }
    scoring_outcome(Mechanism::Borda, scores, config)
}

/// A ballot approves exactly the candidates ranked within its cutoff; the
/// most approval weight wins.
pub fn approval(profile: &Profile, config: &MechanismConfig) -> MechanismOutcome {
    let mut scores = zero_tallies(profile.candidate_ids());
    for ballot in &profile.ballots {
        let weight = ballot.weight.as_ratio();
        for candidate in ballot.ranking.iter().take(ballot.cutoff) {
            if let Some(entry) = scores.get_mut(candidate) {
                *entry += weight;
            }
        }
    }
    scoring_outcome(Mechanism::Approval, scores, config)
}

/// Head-to-head victories minus defeats over the weighted pairwise matrix;
/// exact pairwise ties contribute to neither side.
pub fn copeland(profile: &Profile, config: &MechanismConfig) -> MechanismOutcome {
    let matrix = pairwise_matrix(profile);
    let scores: BTreeMap<CandidateId, BigRational> = matrix
        .roster()
        .iter()
        .map(|c| {
            let score = matrix.victories(c) as i64 - matrix.defeats(c) as i64;
            (c.clone(), int_ratio(score))
        })
        .collect();
    scoring_outcome(Mechanism::Copeland, scores, config)
}

/// Penalty scoring: for a ballot with cutoff `i`, the candidate at position
/// `j > i` loses `weight * (j - i)^2` points. Scores are never positive and
/// the least penalized candidate wins.
pub fn polarization(profile: &Profile, config: &MechanismConfig) -> MechanismOutcome {
    let n = profile.num_candidates();
    let mut scores = zero_tallies(profile.candidate_ids());
    for ballot in &profile.ballots {
        let weight = ballot.weight.as_ratio();
        let cutoff = ballot.cutoff;
        for position in (cutoff + 1)..=n {
            let Some(candidate) = ballot.ranking.get(position - 1) else {
                continue;
            };
            let distance = (position - cutoff) as i64;
            if let Some(entry) = scores.get_mut(candidate) {
                *entry -= weight * int_ratio(distance * distance);
            }
        }
    }
    scoring_outcome(Mechanism::Polarization, scores, config)
}

// ---------------------------------------------------------------------------
// Multi-round rules
// ---------------------------------------------------------------------------

/// Two-round system. Round 1 tallies one vote per ballot (declared vote or
/// top rank per `runoff_vote_source`); a strict majority wins outright.
/// Otherwise the two strongest candidates advance and every ballot's full
/// weight transfers to whichever finalist it ranks higher.
pub fn plurality_with_runoff(profile: &Profile, config: &MechanismConfig) -> MechanismOutcome {
    let total = profile.total_weight();
    let mut tie_events = Vec::new();

    let mut round1 = zero_tallies(profile.candidate_ids());
    for ballot in &profile.ballots {
        let choice = match (config.runoff_vote_source, &ballot.declared_first_vote) {
            (RunoffVoteSource::DeclaredElseTop, Some(declared)) => declared,
            _ => ballot
                .ranking
                .first()
                .expect("validated profile: complete ranking"),
        };
        if let Some(entry) = round1.get_mut(choice) {
            *entry += ballot.weight.as_ratio();
        }
    }

    // Outright majority ends the election in round 1.
    if let Some((leader, _)) = round1.iter().find(|(_, t)| exceeds_half(t, &total)) {
        let winner = leader.clone();
        let ranking = descending_ranking(&round1);
        return MechanismOutcome {
            mechanism: Mechanism::Runoff,
            ranking,
            winner_set: BTreeSet::from([winner.clone()]),
            winner,
            rounds: Some(vec![Round {
                number: 1,
                tallies: round1,
                eliminated: None,
                reason: RoundReason::MajorityReached,
            }]),
            tie_events,
        };
    }

    // Finalist selection: order by round-1 score, byte-order id on ties, and
    // log a tie event whenever the cut falls inside a tied group.
    let order = descending_ranking(&round1);
    let cut_score = &order[1].1;
    let tied_at_cut: BTreeSet<CandidateId> = order
        .iter()
        .filter(|(_, s)| s == cut_score)
        .map(|(c, _)| c.clone())
        .collect();
    let slots_at_cut = 2 - order.iter().take(2).filter(|(_, s)| s != cut_score).count();
    if tied_at_cut.len() > slots_at_cut {
        tie_events.push(TieEvent {
            round: 1,
            tied: tied_at_cut,
            rule: config.tie_policy,
            context: TieContext::Finalist,
        });
    }
    let finalists = [order[0].0.clone(), order[1].0.clone()];

    // Round 2: full ballot weight to whichever finalist the ranking prefers.
    let mut round2 = zero_tallies(finalists.iter());
    for ballot in &profile.ballots {
        let active: BTreeSet<CandidateId> = finalists.iter().cloned().collect();
        if let Some(preferred) = ballot.top_among(&active) {
            *round2.get_mut(preferred).expect("finalist") += ballot.weight.as_ratio();
        }
    }
    let winner_set = max_set(&round2);
    let winner = pick_winner(&winner_set, config, &mut tie_events);

    // Ranking: finalists first (winner on top), then the rest by round-1
    // score. Reported scores are round-1 scores; round-2 tallies live in
    // the trace.
    let loser = finalists
        .iter()
        .find(|c| **c != winner)
        .expect("two distinct finalists")
        .clone();
    let mut ranking = vec![
        (winner.clone(), round1[&winner].clone()),
        (loser.clone(), round1[&loser].clone()),
    ];
    ranking.extend(
        order
            .into_iter()
            .filter(|(c, _)| !finalists.contains(c)),
    );

    MechanismOutcome {
        mechanism: Mechanism::Runoff,
        ranking,
        winner_set,
        winner,
        rounds: Some(vec![
            Round {
                number: 1,
                tallies: round1,
                eliminated: None,
                reason: RoundReason::FinalistsSelected,
            },
            Round {
                number: 2,
                tallies: round2,
                eliminated: None,
                reason: RoundReason::RunoffTally,
            },
        ]),
        tie_events,
    }
}

/// Instant-runoff voting: repeatedly eliminate the candidate with the least
/// first-place weight until someone holds a strict majority.
pub fn ranked_choice(profile: &Profile, config: &MechanismConfig) -> MechanismOutcome {
    let total = profile.total_weight();
    let num_candidates = profile.num_candidates();
    let mut active = profile.candidate_set();
    let mut rounds = Vec::new();
    let mut tie_events = Vec::new();
    let mut eliminated = Vec::new();

    let (winner, survivors) = loop {
        let round_number = rounds.len() + 1;
        let tallies = first_place_tallies(profile, &active);

        if let Some((leader, _)) = tallies.iter().find(|(_, t)| exceeds_half(t, &total)) {
            let winner = leader.clone();
            let mut survivors: Vec<(CandidateId, BigRational)> = tallies
                .iter()
                .map(|(c, t)| (c.clone(), t.clone()))
                .collect();
            survivors.sort_by(|(ca, ta), (cb, tb)| tb.cmp(ta).then_with(|| ca.cmp(cb)));
            rounds.push(Round {
                number: round_number,
                tallies,
                eliminated: None,
                reason: RoundReason::MajorityReached,
            });
            break (winner, survivors.into_iter().map(|(c, _)| c).collect());
        }

        let weakest = min_set(&tallies);
        let out = pick_for_elimination(&weakest, round_number, config, &mut tie_events);
        active.remove(&out);
        eliminated.push(out.clone());
        rounds.push(Round {
            number: round_number,
            tallies,
            eliminated: Some(out),
            reason: RoundReason::FewestFirstPlace,
        });

        if active.len() == 1 {
            let winner = active.iter().next().expect("one survivor").clone();
            break (winner.clone(), vec![winner]);
        }
    };

    MechanismOutcome {
        mechanism: Mechanism::RankedChoice,
        ranking: elimination_ranking(survivors, &eliminated, num_candidates),
        winner_set: BTreeSet::from([winner.clone()]),
        winner,
        rounds: Some(rounds),
        tie_events,
    }
}

/// Coombs' method: repeatedly eliminate the candidate with the most
/// last-place weight until a single candidate remains. No majority
/// short-circuit; the rule always runs to one survivor.
pub fn coombs(profile: &Profile, config: &MechanismConfig) -> MechanismOutcome {
    let num_candidates = profile.num_candidates();
    let mut active = profile.candidate_set();
    let mut rounds = Vec::new();
    let mut tie_events = Vec::new();
    let mut eliminated = Vec::new();

    while active.len() > 1 {
        let round_number = rounds.len() + 1;
        let tallies = last_place_tallies(profile, &active);
        let most_disliked = max_set(&tallies);
        let out = pick_for_elimination(&most_disliked, round_number, config, &mut tie_events);
        active.remove(&out);
        eliminated.push(out.clone());
        rounds.push(Round {
            number: round_number,
            tallies,
            eliminated: Some(out),
            reason: RoundReason::MostLastPlace,
        });
    }

    let winner = active.into_iter().next().expect("one survivor");
    MechanismOutcome {
        mechanism: Mechanism::Coombs,
        ranking: elimination_ranking(vec![winner.clone()], &eliminated, num_candidates),
        winner_set: BTreeSet::from([winner.clone()]),
        winner,
        rounds: Some(rounds),
        tie_events,
    }
}

/// The alternating elimination rule: remove the candidate with the least
/// first-place weight, then the one with the most last-place weight,
/// repeating until a single candidate remains. `moderation_start` flips
/// which step runs first. No majority short-circuit.
pub fn moderation(profile: &Profile, config: &MechanismConfig) -> MechanismOutcome {
    let num_candidates = profile.num_candidates();
    let mut active = profile.candidate_set();
    let mut rounds = Vec::new();
    let mut tie_events = Vec::new();
    let mut eliminated = Vec::new();

    let steps = match config.moderation_start {
        ModerationStart::LeastFirst => [RoundReason::FewestFirstPlace, RoundReason::MostLastPlace],
        ModerationStart::MostLast => [RoundReason::MostLastPlace, RoundReason::FewestFirstPlace],
    };

    'outer: while active.len() > 1 {
        for reason in steps {
            let round_number = rounds.len() + 1;
            let (tallies, targets) = match reason {
                RoundReason::FewestFirstPlace => {
                    let tallies = first_place_tallies(profile, &active);
                    let targets = min_set(&tallies);
                    (tallies, targets)
                }
                RoundReason::MostLastPlace => {
                    let tallies = last_place_tallies(profile, &active);
                    let targets = max_set(&tallies);
                    (tallies, targets)
                }
                _ => unreachable!("moderation only eliminates"),
            };
            let out = pick_for_elimination(&targets, round_number, config, &mut tie_events);
            active.remove(&out);
            eliminated.push(out.clone());
            rounds.push(Round {
                number: round_number,
                tallies,
                eliminated: Some(out),
                reason,
            });
            if active.len() == 1 {
                break 'outer;
            }
        }
    }

    let winner = active.into_iter().next().expect("one survivor");
    MechanismOutcome {
        mechanism: Mechanism::Moderation,
        ranking: elimination_ranking(vec![winner.clone()], &eliminated, num_candidates),
        winner_set: BTreeSet::from([winner.clone()]),
        winner,
        rounds: Some(rounds),
        tie_events,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Ballot, Candidate, Weight};
    use crate::ratio::parse_ratio;

    fn cid(s: &str) -> CandidateId {
        CandidateId::new(s).unwrap()
    }

    fn roster(ids: &[&str]) -> Vec<Candidate> {
        ids.iter().map(|s| Candidate::new(cid(s), *s)).collect()
    }

    fn profile_with_cutoffs(ids: &[&str], ballots: &[(&[&str], usize)]) -> Profile {
        let ballots = ballots
            .iter()
            .enumerate()
            .map(|(i, (order, cutoff))| {
                Ballot::new(
                    format!("v{}", i + 1),
                    order.iter().map(|s| cid(s)).collect(),
                    *cutoff,
                )
            })
            .collect();
        Profile::new(roster(ids), ballots)
    }

    fn profile(ids: &[&str], rankings: &[&[&str]]) -> Profile {
        let n = ids.len();
        let with_cutoffs: Vec<(&[&str], usize)> = rankings.iter().map(|r| (*r, n)).collect();
        profile_with_cutoffs(ids, &with_cutoffs)
    }

    /// Cyclic three-ballot election used across the tie-handling tests.
    fn cyclic() -> Profile {
        profile(
            &["A", "B", "C"],
            &[&["A", "B", "C"], &["B", "C", "A"], &["C", "A", "B"]],
        )
    }

    /// Five ballots where B is the head-to-head champion but holds the
    /// fewest first places.
    fn squeezed_middle() -> Profile {
        profile(
            &["A", "B", "C"],
            &[
                &["A", "B", "C"],
                &["A", "B", "C"],
                &["C", "B", "A"],
                &["C", "B", "A"],
                &["B", "A", "C"],
            ],
        )
    }

    fn unanimous() -> Profile {
        profile(
            &["A", "B", "C"],
            &[&["A", "B", "C"], &["A", "B", "C"], &["A", "B", "C"]],
        )
    }

    fn int(n: i64) -> BigRational {
        int_ratio(n)
    }

    fn ranked_ids(outcome: &MechanismOutcome) -> Vec<&str> {
        outcome.ranking.iter().map(|(c, _)| c.as_str()).collect()
    }

    fn config() -> MechanismConfig {
        MechanismConfig::default()
    }

    #[test]
    fn plurality_unanimous() {
        let outcome = plurality(&unanimous(), &config());
        assert_eq!(outcome.winner, cid("A"));
        assert_eq!(outcome.score_of(&cid("A")), Some(&int(3)));
        assert_eq!(outcome.score_of(&cid("B")), Some(&int(0)));
        assert_eq!(outcome.rounds, None);
        assert!(outcome.tie_events.is_empty());
    }

    #[test]
    fn plurality_three_way_tie_breaks_to_byte_order() {
        let outcome = plurality(&cyclic(), &config());
        assert_eq!(outcome.winner_set.len(), 3);
        assert_eq!(outcome.winner, cid("A"));
        assert_eq!(outcome.tie_events.len(), 1);
        assert_eq!(outcome.tie_events[0].context, TieContext::Winner);
        assert_eq!(outcome.tie_events[0].round, 0);
    }

    #[test]
    fn plurality_compares_exact_weights() {
        let mut p = profile(&["A", "B"], &[&["A", "B"], &["B", "A"]]);
        p.ballots[0].weight = Weight::new(parse_ratio("2").unwrap()).unwrap();
        p.ballots[1].weight = Weight::new(parse_ratio("12/5").unwrap()).unwrap();
        let outcome = plurality(&p, &config());
        assert_eq!(outcome.winner, cid("B"));
        assert_eq!(outcome.score_of(&cid("B")), Some(&parse_ratio("12/5").unwrap()));
        assert_eq!(outcome.score_of(&cid("A")), Some(&int(2)));
    }

    #[test]
    fn borda_scores_sum_to_weight_times_position_total() {
        let outcome = borda(&squeezed_middle(), &config());
        assert_eq!(outcome.score_of(&cid("B")), Some(&int(11)));
        assert_eq!(outcome.score_of(&cid("A")), Some(&int(10)));
        assert_eq!(outcome.score_of(&cid("C")), Some(&int(9)));
        assert_eq!(outcome.winner, cid("B"));
        let total: BigRational = outcome.ranking.iter().map(|(_, s)| s.clone()).sum();
        assert_eq!(total, int(30)); // 5 ballots * (3+2+1)
    }

    #[test]
    fn borda_cyclic_symmetry_forces_equality() {
        let outcome = borda(&cyclic(), &config());
        for candidate in ["A", "B", "C"] {
            assert_eq!(outcome.score_of(&cid(candidate)), Some(&int(6)));
        }
        assert_eq!(outcome.winner_set.len(), 3);
    }

    #[test]
    fn borda_unanimous() {
        let outcome = borda(&unanimous(), &config());
        assert_eq!(outcome.score_of(&cid("A")), Some(&int(9)));
        assert_eq!(outcome.score_of(&cid("B")), Some(&int(6)));
        assert_eq!(outcome.score_of(&cid("C")), Some(&int(3)));
    }

    #[test]
    fn approval_counts_acceptable_prefixes() {
        // Two ballots approve only their top choice A, two approve only C,
        // one approves B and A.
        let p = profile_with_cutoffs(
            &["A", "B", "C"],
            &[
                (&["A", "B", "C"], 1),
                (&["A", "B", "C"], 1),
                (&["C", "B", "A"], 1),
                (&["C", "B", "A"], 1),
                (&["B", "A", "C"], 2),
            ],
        );
        let outcome = approval(&p, &config());
        assert_eq!(outcome.score_of(&cid("A")), Some(&int(3)));
        assert_eq!(outcome.score_of(&cid("C")), Some(&int(2)));
        assert_eq!(outcome.score_of(&cid("B")), Some(&int(1)));
        assert_eq!(outcome.winner, cid("A"));
    }

    #[test]
    fn approval_everyone_or_no_one() {
        let everyone = approval(&unanimous(), &config());
        assert!(everyone.ranking.iter().all(|(_, s)| *s == int(3)));
        assert_eq!(everyone.winner_set.len(), 3);

        let p = profile_with_cutoffs(
            &["A", "B", "C"],
            &[(&["A", "B", "C"], 0), (&["B", "A", "C"], 0)],
        );
        let none = approval(&p, &config());
        assert!(none.ranking.iter().all(|(_, s)| s.is_zero()));
        assert_eq!(none.winner_set.len(), 3);
    }

    #[test]
    fn copeland_squeezed_middle() {
        let outcome = copeland(&squeezed_middle(), &config());
        assert_eq!(outcome.score_of(&cid("B")), Some(&int(2)));
        assert_eq!(outcome.score_of(&cid("A")), Some(&int(0)));
        assert_eq!(outcome.score_of(&cid("C")), Some(&int(-2)));
        assert_eq!(outcome.winner, cid("B"));
    }

    #[test]
    fn copeland_cycle_scores_zero() {
        let outcome = copeland(&cyclic(), &config());
        assert!(outcome.ranking.iter().all(|(_, s)| s.is_zero()));
        assert_eq!(outcome.winner_set.len(), 3);
    }

    #[test]
    fn copeland_unanimous() {
        let outcome = copeland(&unanimous(), &config());
        assert_eq!(outcome.score_of(&cid("A")), Some(&int(2)));
        assert_eq!(outcome.score_of(&cid("B")), Some(&int(0)));
        assert_eq!(outcome.score_of(&cid("C")), Some(&int(-2)));
    }

    #[test]
    fn polarization_penalizes_beyond_cutoff() {
        // Two ballots accept everyone; one accepts only its top two,
        // leaving B one step past the cutoff.
        let p = profile_with_cutoffs(
            &["A", "B", "C"],
            &[
                (&["B", "A", "C"], 3),
                (&["B", "A", "C"], 3),
                (&["A", "C", "B"], 2),
            ],
        );
        let outcome = polarization(&p, &config());
        assert_eq!(outcome.score_of(&cid("A")), Some(&int(0)));
        assert_eq!(outcome.score_of(&cid("C")), Some(&int(0)));
        assert_eq!(outcome.score_of(&cid("B")), Some(&int(-1)));
        assert_eq!(
            outcome.winner_set,
            BTreeSet::from([cid("A"), cid("C")])
        );
        assert_eq!(outcome.winner, cid("A"));
        assert_eq!(ranked_ids(&outcome).last(), Some(&"B"));
    }

    #[test]
    fn polarization_distance_is_squared() {
        let p = profile_with_cutoffs(&["A", "B", "C"], &[(&["A", "B", "C"], 1)]);
        let outcome = polarization(&p, &config());
        assert_eq!(outcome.score_of(&cid("A")), Some(&int(0)));
        assert_eq!(outcome.score_of(&cid("B")), Some(&int(-1)));
        assert_eq!(outcome.score_of(&cid("C")), Some(&int(-4)));
    }

    #[test]
    fn polarization_all_acceptable_scores_zero() {
        let outcome = polarization(&unanimous(), &config());
        assert!(outcome.ranking.iter().all(|(_, s)| s.is_zero()));
    }

    #[test]
    fn runoff_transfers_to_the_preferred_finalist() {
        let outcome = plurality_with_runoff(&squeezed_middle(), &config());
        let rounds = outcome.rounds.as_ref().unwrap();
        assert_eq!(rounds.len(), 2);
        assert_eq!(rounds[0].tallies[&cid("A")], int(2));
        assert_eq!(rounds[0].tallies[&cid("C")], int(2));
        assert_eq!(rounds[0].tallies[&cid("B")], int(1));
        assert_eq!(rounds[1].tallies[&cid("A")], int(3));
        assert_eq!(rounds[1].tallies[&cid("C")], int(2));
        assert_eq!(outcome.winner, cid("A"));
        assert_eq!(ranked_ids(&outcome), vec!["A", "C", "B"]);
    }

    #[test]
    fn runoff_majority_short_circuits() {
        let outcome = plurality_with_runoff(&unanimous(), &config());
        let rounds = outcome.rounds.as_ref().unwrap();
        assert_eq!(rounds.len(), 1);
        assert_eq!(rounds[0].reason, RoundReason::MajorityReached);
        assert_eq!(outcome.winner, cid("A"));
    }

    #[test]
    fn runoff_uses_declared_votes_when_configured() {
        let mut p = profile(
            &["S", "T", "U"],
            &[&["T", "S", "U"], &["S", "T", "U"], &["U", "S", "T"]],
        );
        // The first voter ranks T on top but declares a vote for S.
        p.ballots[0].declared_first_vote = Some(cid("S"));
        let declared = plurality_with_runoff(&p, &config());
        let r1 = &declared.rounds.as_ref().unwrap()[0];
        assert_eq!(r1.tallies[&cid("S")], int(2));
        assert_eq!(r1.tallies[&cid("T")], int(0));
        assert_eq!(r1.reason, RoundReason::MajorityReached);

        let top_rank = plurality_with_runoff(
            &p,
            &MechanismConfig {
                runoff_vote_source: RunoffVoteSource::TopRank,
                ..config()
            },
        );
        let r1 = &top_rank.rounds.as_ref().unwrap()[0];
        assert_eq!(r1.tallies[&cid("S")], int(1));
        assert_eq!(r1.tallies[&cid("T")], int(1));
        assert_eq!(r1.tallies[&cid("U")], int(1));
    }

    #[test]
    fn runoff_logs_finalist_ties() {
        let outcome = plurality_with_runoff(&cyclic(), &config());
        // Round 1 is a 1-1-1 tie: the finalist cut is ambiguous.
        assert!(outcome
            .tie_events
            .iter()
            .any(|e| e.context == TieContext::Finalist));
        // Byte-order selection advances A and B; A beats B 2-1 head to head.
        assert_eq!(outcome.winner, cid("A"));
    }

    #[test]
    fn ranked_choice_eliminates_up_the_middle() {
        let outcome = ranked_choice(&squeezed_middle(), &config());
        let rounds = outcome.rounds.as_ref().unwrap();
        assert_eq!(rounds.len(), 2);
        assert_eq!(rounds[0].eliminated, Some(cid("B")));
        assert_eq!(rounds[0].reason, RoundReason::FewestFirstPlace);
        assert_eq!(rounds[1].reason, RoundReason::MajorityReached);
        assert_eq!(rounds[1].tallies[&cid("A")], int(3));
        assert_eq!(outcome.winner, cid("A"));
        assert_eq!(ranked_ids(&outcome), vec!["A", "C", "B"]);
    }

    #[test]
    fn ranked_choice_unanimous_majority_is_immediate() {
        let outcome = ranked_choice(&unanimous(), &config());
        assert_eq!(outcome.rounds.as_ref().unwrap().len(), 1);
        assert_eq!(outcome.winner, cid("A"));
    }

    #[test]
    fn ranked_choice_breaks_elimination_ties_by_byte_order() {
        let outcome = ranked_choice(&cyclic(), &config());
        let rounds = outcome.rounds.as_ref().unwrap();
        assert_eq!(rounds[0].eliminated, Some(cid("A")));
        assert_eq!(outcome.winner, cid("B"));
        assert_eq!(ranked_ids(&outcome), vec!["B", "C", "A"]);
        assert!(outcome
            .tie_events
            .iter()
            .any(|e| e.context == TieContext::Elimination && e.round == 1));
    }

    #[test]
    fn coombs_eliminates_most_last_places() {
        let outcome = coombs(&squeezed_middle(), &config());
        let rounds = outcome.rounds.as_ref().unwrap();
        assert_eq!(rounds[0].eliminated, Some(cid("C")));
        assert_eq!(rounds[0].tallies[&cid("C")], int(3));
        assert_eq!(rounds[1].eliminated, Some(cid("A")));
        assert_eq!(rounds[1].tallies[&cid("A")], int(3));
        assert_eq!(outcome.winner, cid("B"));
        assert_eq!(ranked_ids(&outcome), vec!["B", "A", "C"]);
    }

    #[test]
    fn coombs_unanimous_strips_from_the_bottom() {
        let outcome = coombs(&unanimous(), &config());
        let rounds = outcome.rounds.as_ref().unwrap();
        assert_eq!(rounds[0].eliminated, Some(cid("C")));
        assert_eq!(rounds[1].eliminated, Some(cid("B")));
        assert_eq!(outcome.winner, cid("A"));
    }

    #[test]
    fn coombs_cycle_resolves_through_tie_breaks() {
        // All three candidates hold one last place, so byte order eliminates
        // A; the reduced ballots (B>C, B>C, C>B) then drop C.
        let outcome = coombs(&cyclic(), &config());
        let rounds = outcome.rounds.as_ref().unwrap();
        assert_eq!(rounds[0].eliminated, Some(cid("A")));
        assert_eq!(rounds[1].eliminated, Some(cid("C")));
        assert_eq!(outcome.winner, cid("B"));
    }

    #[test]
    fn moderation_alternates_removals() {
        let outcome = moderation(&squeezed_middle(), &config());
        let rounds = outcome.rounds.as_ref().unwrap();
        assert_eq!(rounds.len(), 2);
        assert_eq!(rounds[0].eliminated, Some(cid("B")));
        assert_eq!(rounds[0].reason, RoundReason::FewestFirstPlace);
        assert_eq!(rounds[0].tallies[&cid("B")], int(1));
        assert_eq!(rounds[1].eliminated, Some(cid("C")));
        assert_eq!(rounds[1].reason, RoundReason::MostLastPlace);
        assert_eq!(rounds[1].tallies[&cid("C")], int(3));
        assert_eq!(outcome.winner, cid("A"));
        assert_eq!(ranked_ids(&outcome), vec!["A", "C", "B"]);
    }

    #[test]
    fn moderation_unanimous_trace() {
        // B and C tie at zero first places; byte order removes B, then C
        // falls as the most-disliked of the pair.
        let outcome = moderation(&unanimous(), &config());
        let rounds = outcome.rounds.as_ref().unwrap();
        assert_eq!(rounds[0].eliminated, Some(cid("B")));
        assert_eq!(rounds[1].eliminated, Some(cid("C")));
        assert_eq!(outcome.winner, cid("A"));
        assert!(outcome
            .tie_events
            .iter()
            .any(|e| e.context == TieContext::Elimination));
    }

    #[test]
    fn moderation_two_candidates() {
        let p = profile(&["A", "B"], &[&["A", "B"], &["A", "B"], &["B", "A"]]);
        let outcome = moderation(&p, &config());
        let rounds = outcome.rounds.as_ref().unwrap();
        assert_eq!(rounds.len(), 1);
        assert_eq!(rounds[0].eliminated, Some(cid("B")));
        assert_eq!(outcome.winner, cid("A"));
    }

    #[test]
    fn moderation_can_start_with_most_last() {
        let outcome = moderation(
            &squeezed_middle(),
            &MechanismConfig {
                moderation_start: ModerationStart::MostLast,
                ..config()
            },
        );
        let rounds = outcome.rounds.as_ref().unwrap();
        // C holds the most last places, so the swapped variant removes it
        // before any first-place count happens.
        assert_eq!(rounds[0].eliminated, Some(cid("C")));
        assert_eq!(rounds[0].reason, RoundReason::MostLastPlace);
    }

    #[test]
    fn dispatch_covers_every_token() {
        let p = squeezed_middle();
        for mechanism in Mechanism::ALL {
            let outcome = tabulate(&p, mechanism, &config());
            assert_eq!(outcome.mechanism, mechanism);
            assert_eq!(outcome.ranking.len(), 3);
            assert!(outcome.winner_set.contains(&outcome.winner));
            let trace_expected = matches!(
                mechanism,
                Mechanism::Runoff
                    | Mechanism::RankedChoice
                    | Mechanism::Coombs
                    | Mechanism::Moderation
            );
            assert_eq!(outcome.rounds.is_some(), trace_expected);
            assert_eq!(Mechanism::from_token(mechanism.token()), Some(mechanism));
        }
        assert_eq!(Mechanism::from_token("borda"), Some(Mechanism::Borda));
        assert_eq!(Mechanism::from_token("nonsense"), None);
    }
}
