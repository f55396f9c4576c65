//! Human-likeness measurement: move matching, the self-consistency ceiling,
//! head-to-head strength and aggregation of blind ratings.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::error::{Error, Result};
use crate::game::{Action, GameSpec, GameState, Player};
use crate::rng;
use crate::trainer::Strategy;

#[derive(Clone, Debug, PartialEq)]
pub struct MoveEntry {
    pub spec: GameSpec,
    /// Moves leading to the decision state.
    pub moves: Vec<Action>,
    pub played: Action,
    pub strength: Option<String>,
}

impl MoveEntry {
    pub fn state(&self) -> Result<GameState> {
        GameState::from_moves(self.spec, &self.moves)
    }

    /// Replays the entry and checks the recorded move.
    pub fn check(&self) -> Result<GameState> {
        let state = self.state()?;
        if state.is_terminal() {
            return Err(Error::TerminalState);
        }
        if !state.is_legal(self.played) {
            return Err(Error::IllegalMove(self.played));
        }
        Ok(state)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct MoveDataset {
    pub source: String,
    pub entries: Vec<MoveEntry>,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MatchReport {
    pub n: usize,
    pub top1: f64,
    pub topk: BTreeMap<usize, f64>,
    pub ceiling: f64,
    /// Entry index and reason for every entry left out of `n`.
    pub rejected: Vec<(usize, String)>,
}

/// Move-matching accuracy of `ranker` on `dataset`.
///
/// Each decision seed comes from the entry's content (position, recorded
/// move and how many identical entries came before it), never from its
/// index, so shuffling the dataset leaves the counts unchanged.
pub fn move_match(
    dataset: &MoveDataset,
    ranker: &mut dyn Strategy,
    ks: &[usize],
    seed: u64,
) -> Result<MatchReport> {
    if dataset.entries.is_empty() {
        return Err(Error::InvalidConfig("empty dataset"));
    }
    let mut rejected = Vec::new();
    let mut accepted = Vec::new();
    let (mut n, mut top1) = (0usize, 0usize);
    let mut hits: BTreeMap<usize, usize> = ks.iter().map(|&k| (k, 0)).collect();
    let mut repeats: BTreeMap<(u64, Action), u64> = BTreeMap::new();
    for (i, entry) in dataset.entries.iter().enumerate() {
        let state = match entry.check() {
            Ok(s) => s,
            Err(e) => {
                rejected.push((i, e.to_string()));
                continue;
            }
        };
        let key = (state.fingerprint(), entry.played);
        let seen = repeats.entry(key).or_default();
        let entry_seed = rng::derive(
            rng::derive(seed, key.0),
            (state.spec().index(key.1) as u64) << 32 | *seen,
        );
        *seen += 1;
        let ranked = ranker.rank(&state, entry_seed)?;
        n += 1;
        if ranked.first() == Some(&entry.played) {
            top1 += 1;
        }
        let pos = ranked.iter().position(|&a| a == entry.played);
        for (&k, h) in hits.iter_mut() {
            if pos.is_some_and(|p| p < k) {
                *h += 1;
            }
        }
        accepted.push(entry.clone());
    }
    let frac = |x: usize| if n == 0 { 0.0 } else { x as f64 / n as f64 };
    let ceiling = self_consistency_ceiling(&MoveDataset {
        source: dataset.source.clone(),
        entries: accepted,
    });
    Ok(MatchReport {
        n,
        top1: frac(top1),
        topk: hits.into_iter().map(|(k, h)| (k, frac(h))).collect(),
        ceiling,
        rejected,
    })
}

/// Best top-1 accuracy any deterministic policy could reach on `dataset`.
///
/// Entries are grouped by canonical position and the played move is mapped
/// through the same symmetry, so rotated duplicates count together.
/// Entries that do not replay are skipped; with none left the ceiling is 1.
pub fn self_consistency_ceiling(dataset: &MoveDataset) -> f64 {
    let mut groups: BTreeMap<(String, String), BTreeMap<Action, usize>> = BTreeMap::new();
    let mut total = 0usize;
    for entry in &dataset.entries {
        let Ok(state) = entry.check() else { continue };
        let key = (state.spec().name(), state.canonical_key());
        let a = state.canonical_action(entry.played);
        *groups.entry(key).or_default().entry(a).or_default() += 1;
        total += 1;
    }
    if total == 0 {
        return 1.0;
    }
    let best: usize = groups
        .values()
        .map(|m| m.values().copied().max().unwrap_or(0))
        .sum();
    best as f64 / total as f64
}

#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StrengthReport {
    pub games: u32,
    pub wins_a: u32,
    pub draws: u32,
    pub wins_b: u32,
    pub elo_diff: f64,
}

impl StrengthReport {
    /// A's score share, draws counting half.
    pub fn score_a(&self) -> f64 {
        if self.games == 0 {
            return 0.0;
        }
        (self.wins_a as f64 + self.draws as f64 / 2.0) / self.games as f64
    }
}

pub const ELO_CLAMP: f64 = 1000.0;

/// Rating difference of A over B from a game tally, within ±1000.
pub fn elo_diff(wins_a: u32, draws: u32, wins_b: u32) -> f64 {
    let sa = wins_a as f64 + draws as f64 / 2.0;
    let sb = wins_b as f64 + draws as f64 / 2.0;
    match (sa > 0.0, sb > 0.0) {
        (false, false) => 0.0,
        (true, false) => ELO_CLAMP,
        (false, true) => -ELO_CLAMP,
        (true, true) => (400.0 * libm::log10(sa / sb)).clamp(-ELO_CLAMP, ELO_CLAMP),
    }
}

/// Plays `games` games between `a` and `b`, alternating who starts.
///
/// Games `2p` and `2p + 1` share one seed with colours swapped, so two
/// identical deterministic strategies split every pair.
pub fn strength_match(
    a: &mut dyn Strategy,
    b: &mut dyn Strategy,
    spec: &GameSpec,
    games: u32,
    seed: u64,
) -> Result<StrengthReport> {
    if !games.is_multiple_of(2) {
        return Err(Error::InvalidConfig("game count must be even"));
    }
    let mut report = StrengthReport {
        games,
        wins_a: 0,
        draws: 0,
        wins_b: 0,
        elo_diff: 0.0,
    };
    for g in 0..games {
        let pair_seed = rng::derive(seed, (g / 2) as u64);
        let a_first = g % 2 == 0;
        let mut state = GameState::new(*spec);
        while !state.is_terminal() {
            let a_to_move = (state.to_move() == Player::P1) == a_first;
            let s = rng::derive(pair_seed, state.stone_count() as u64);
            let action = if a_to_move {
                a.choose(&state, s)?
            } else {
                b.choose(&state, s)?
            };
            state.play(action)?;
        }
        match state.outcome().winner() {
            None => report.draws += 1,
            Some(p) if (p == Player::P1) == a_first => report.wins_a += 1,
            Some(_) => report.wins_b += 1,
        }
    }
    report.elo_diff = elo_diff(report.wins_a, report.draws, report.wins_b);
    Ok(report)
}

/// Uniformly random legal moves.
#[derive(Clone, Copy, Debug, Default)]
pub struct UniformRandom;

impl Strategy for UniformRandom {
    fn choose(&mut self, state: &GameState, seed: u64) -> Result<Action> {
        Ok(self.rank(state, seed)?[0])
    }

    fn rank(&mut self, state: &GameState, seed: u64) -> Result<Vec<Action>> {
        let mut legal = state.legal_actions()?;
        legal.shuffle(&mut rng::from_seed(seed));
        Ok(legal)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Guess {
    Human,
    Agent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum Quality {
    HumanLikeness,
    Aggressiveness,
    TacticalDepth,
    Traps,
}

impl Quality {
    pub const ALL: [Quality; 4] = [
        Quality::HumanLikeness,
        Quality::Aggressiveness,
        Quality::TacticalDepth,
        Quality::Traps,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Quality::HumanLikeness => "human_likeness",
            Quality::Aggressiveness => "aggressiveness",
            Quality::TacticalDepth => "tactical_depth",
            Quality::Traps => "traps",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RatingRecord {
    pub record_id: String,
    pub rater_id: String,
    pub guess: Guess,
    pub scores: BTreeMap<Quality, u8>,
}

impl RatingRecord {
    pub fn validate(&self) -> Result<()> {
        for q in Quality::ALL {
            match self.scores.get(&q) {
                Some(1..=5) => {}
                Some(_) => return Err(Error::InvalidConfig("scores must be in 1..5")),
                None => return Err(Error::InvalidConfig("every quality needs a score")),
            }
        }
        if self.scores.len() != Quality::ALL.len() {
            return Err(Error::InvalidConfig("unknown quality"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScoreStats {
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub n: usize,
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RatingsReport {
    /// Keyed by quality, then by the record's true source.
    pub stats: BTreeMap<Quality, BTreeMap<Guess, ScoreStats>>,
    pub discrimination_accuracy: f64,
    pub n: usize,
}

pub fn aggregate_ratings(
    records: &[RatingRecord],
    truth: &BTreeMap<String, Guess>,
) -> Result<RatingsReport> {
    let mut samples: BTreeMap<(Quality, Guess), Vec<f64>> = BTreeMap::new();
    let mut correct = 0usize;
    for r in records {
        let source = *truth
            .get(&r.record_id)
            .ok_or_else(|| Error::UnknownRecord(r.record_id.clone()))?;
        r.validate()?;
        if r.guess == source {
            correct += 1;
        }
        for (&q, &v) in &r.scores {
            samples.entry((q, source)).or_default().push(v as f64);
        }
    }
    let mut stats: BTreeMap<Quality, BTreeMap<Guess, ScoreStats>> = BTreeMap::new();
    for ((q, source), xs) in samples {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n as f64;
        stats.entry(q).or_default().insert(
            source,
            ScoreStats {
                mean,
                std: libm::sqrt(var),
                n,
            },
        );
    }
    let n = records.len();
    Ok(RatingsReport {
        stats,
        discrimination_accuracy: if n == 0 {
            0.0
        } else {
            correct as f64 / n as f64
        },
        n,
    })
}

/// Replays recorded games as datasets: one entry per move.
pub fn dataset_from_games(source: &str, spec: GameSpec, games: &[Vec<Action>]) -> MoveDataset {
    let mut entries = Vec::new();
    for moves in games {
        for i in 0..moves.len() {
            entries.push(MoveEntry {
                spec,
                moves: moves[..i].to_vec(),
                played: moves[i],
                strength: None,
            });
        }
    }
    MoveDataset {
        source: source.into(),
        entries,
    }
}
