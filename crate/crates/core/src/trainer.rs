//! The dual-process agent and its expert-iteration training loop.
//!
//! [`Agent::decide`] asks the pattern policy first. A certain partition (one
//! good move) is played without searching; otherwise the search runs over
//! the good set. Only those searched positions produce training targets.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::features::{partition, FeatureSet, Partition, PartitionParams, PolicyDist};
use crate::game::{Action, GameSpec, GameState, Outcome, Player};
use crate::rng;
use crate::search::{SearchConfig, SearchResult, Searcher};

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FeatureParams {
    pub radius: u8,
    pub tau: f64,
    pub chunk_cap: usize,
    pub max_features: usize,
    /// Conjunctions added per growth round.
    pub growth_per_round: usize,
}

impl Default for FeatureParams {
    fn default() -> Self {
        FeatureParams {
            radius: 2,
            tau: 0.1,
            chunk_cap: 7,
            max_features: 2000,
            growth_per_round: 128,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct AgentConfig {
    pub preset: String,
    pub features: FeatureParams,
    pub search: SearchConfig,
}

impl AgentConfig {
    pub const PRESETS: [&'static str; 2] = ["vanilla", "human"];

    pub fn vanilla(spec: &GameSpec) -> Self {
        AgentConfig {
            preset: "vanilla".into(),
            features: FeatureParams::default(),
            search: SearchConfig::vanilla(spec),
        }
    }

    pub fn human(spec: &GameSpec) -> Self {
        AgentConfig {
            preset: "human".into(),
            features: FeatureParams::default(),
            search: SearchConfig::human(spec),
        }
    }

    pub fn preset(name: &str, spec: &GameSpec) -> Option<Self> {
        match name {
            "vanilla" => Some(AgentConfig::vanilla(spec)),
            "human" => Some(AgentConfig::human(spec)),
            _ => None,
        }
    }

    pub fn partition_params(&self) -> PartitionParams {
        PartitionParams {
            tau: self.features.tau,
            chunk_cap: self.features.chunk_cap,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !Self::PRESETS.contains(&self.preset.as_str()) {
            return Err(Error::InvalidConfig("unknown preset"));
        }
        if !(self.features.tau > 0.0 && self.features.tau <= 1.0) {
            return Err(Error::InvalidConfig("tau must be in (0, 1]"));
        }
        if self.features.chunk_cap == 0 {
            return Err(Error::InvalidConfig("chunk cap must be at least 1"));
        }
        self.search.validate()
    }

    /// Zero-weight atomic features with this config's radius and cap.
    pub fn initial_features(&self) -> Result<FeatureSet> {
        FeatureSet::init_atomic(self.features.radius, self.features.max_features)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decision {
    pub action: Action,
    pub certain: bool,
    /// Good moves, most probable first.
    pub good: Vec<Action>,
    pub policy: PolicyDist,
    /// Present exactly when the position was doubtful.
    pub search: Option<SearchResult>,
}

impl Decision {
    pub fn visits(&self) -> Option<&[(Action, u32)]> {
        self.search.as_ref().map(|s| s.visits.as_slice())
    }

    /// Every legal move, best first: the played move, then searched moves
    /// by visits (or the good set when certain), then the rest by policy.
    pub fn ranked(&self) -> Vec<Action> {
        let mut out = Vec::with_capacity(self.policy.len());
        out.push(self.action);
        let head: Vec<Action> = match &self.search {
            Some(s) => s.ranked(),
            None => self.good.clone(),
        };
        for a in head.into_iter().chain(self.policy.ranked()) {
            if !out.contains(&a) {
                out.push(a);
            }
        }
        out
    }
}

/// Something that picks moves: the dual-process agent, a baseline, a
/// recorded human.
pub trait Strategy {
    fn choose(&mut self, state: &GameState, seed: u64) -> Result<Action>;

    /// Legal moves in order of preference. The first entry is what
    /// [`Strategy::choose`] would play.
    fn rank(&mut self, state: &GameState, seed: u64) -> Result<Vec<Action>>;
}

/// Dual-process agent over a shared, read-only feature set.
pub struct Agent<'a> {
    fs: &'a FeatureSet,
    cfg: AgentConfig,
    searcher: Searcher,
}

impl<'a> Agent<'a> {
    pub fn new(fs: &'a FeatureSet, cfg: AgentConfig) -> Self {
        Agent {
            fs,
            cfg,
            searcher: Searcher::new(),
        }
    }

    pub fn config(&self) -> &AgentConfig {
        &self.cfg
    }

    pub fn features(&self) -> &FeatureSet {
        self.fs
    }

    /// How many times the search has been invoked.
    pub fn search_calls(&self) -> u64 {
        self.searcher.calls()
    }

    pub fn searcher(&self) -> &Searcher {
        &self.searcher
    }

    pub fn partition(&self, state: &GameState) -> Result<(PolicyDist, Partition)> {
        let pi = self.fs.policy(state)?;
        let part = partition(&pi, self.cfg.features.tau, self.cfg.features.chunk_cap);
        Ok((pi, part))
    }

    /// Decide with the configured search seed mixed with `seed`.
    pub fn decide(&mut self, state: &GameState, seed: u64) -> Result<Decision> {
        let search_seed = rng::derive(self.cfg.search.seed, seed);
        self.decide_with_search_seed(state, search_seed)
    }

    fn decide_with_search_seed(&mut self, state: &GameState, search_seed: u64) -> Result<Decision> {
        let (policy, part) = self.partition(state)?;
        if part.certain {
            return Ok(Decision {
                action: part.good[0],
                certain: true,
                good: part.good,
                policy,
                search: None,
            });
        }
        let cfg = SearchConfig {
            seed: search_seed,
            ..self.cfg.search.clone()
        };
        let result = self
            .searcher
            .search(state, self.fs, &cfg, &self.cfg.partition_params())?;
        Ok(Decision {
            action: result.chosen,
            certain: false,
            good: part.good,
            policy,
            search: Some(result),
        })
    }
}

impl Strategy for Agent<'_> {
    fn choose(&mut self, state: &GameState, seed: u64) -> Result<Action> {
        Ok(self.decide(state, seed)?.action)
    }

    fn rank(&mut self, state: &GameState, seed: u64) -> Result<Vec<Action>> {
        Ok(self.decide(state, seed)?.ranked())
    }
}

/// One decision with the search seed taken from `cfg` as is.
pub fn decide(state: &GameState, fs: &FeatureSet, cfg: &AgentConfig) -> Result<Decision> {
    Agent::new(fs, cfg.clone()).decide_with_search_seed(state, cfg.search.seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MoveRecord {
    pub action: Action,
    pub mover: Player,
    pub certain: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GameRecord {
    pub spec: GameSpec,
    pub moves: Vec<MoveRecord>,
    pub outcome: Outcome,
}

impl GameRecord {
    pub fn actions(&self) -> Vec<Action> {
        self.moves.iter().map(|m| m.action).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainSample {
    pub state: GameState,
    pub target: PolicyDist,
    pub iteration_born: u32,
}

/// FIFO ring of training samples.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    capacity: usize,
    items: VecDeque<TrainSample>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        ReplayBuffer {
            capacity,
            items: VecDeque::with_capacity(capacity.min(1 << 16)),
        }
    }

    pub fn push(&mut self, sample: TrainSample) {
        if self.capacity == 0 {
            return;
        }
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(sample);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Oldest first.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &TrainSample> {
        self.items.iter()
    }

    pub fn get(&self, i: usize) -> Option<&TrainSample> {
        self.items.get(i)
    }
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainConfig {
    pub iterations: u32,
    pub games_per_iter: u32,
    pub buffer_capacity: usize,
    pub batch_size: usize,
    pub epochs: u32,
    pub growth_period: u32,
    pub eta: f64,
    /// Share of fresh samples kept aside for the held-out loss.
    pub holdout_fraction: f64,
    /// Opening plies where the played move is drawn from the visit counts.
    pub explore_plies: u32,
    /// Ablation: also learn from certain positions, towards the played move.
    pub train_on_certain: bool,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            iterations: 10,
            games_per_iter: 100,
            buffer_capacity: 10_000,
            batch_size: 64,
            epochs: 2,
            growth_period: 2,
            eta: 0.05,
            holdout_fraction: 0.1,
            explore_plies: 4,
            train_on_certain: false,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.games_per_iter == 0 {
            return Err(Error::InvalidConfig(
                "iterations and games must be at least 1",
            ));
        }
        if self.batch_size == 0 || self.growth_period == 0 {
            return Err(Error::InvalidConfig(
                "batch size and growth period must be at least 1",
            ));
        }
        if !(self.eta > 0.0) {
            return Err(Error::InvalidConfig("learning rate must be positive"));
        }
        if !(0.0..1.0).contains(&self.holdout_fraction) {
            return Err(Error::InvalidConfig("holdout fraction must be in [0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SelfPlayOptions {
    pub explore_plies: u32,
    pub train_on_certain: bool,
}

impl From<&TrainConfig> for SelfPlayOptions {
    fn from(t: &TrainConfig) -> Self {
        SelfPlayOptions {
            explore_plies: t.explore_plies,
            train_on_certain: t.train_on_certain,
        }
    }
}

/// One game of the agent against itself.
///
/// Searched positions yield a sample whose target is the visit
/// distribution. Certain positions yield nothing unless the ablation flag
/// asks for one-hot targets.
pub fn self_play_game(
    agent: &mut Agent<'_>,
    spec: &GameSpec,
    seed: u64,
    opts: SelfPlayOptions,
    iteration: u32,
) -> Result<(GameRecord, Vec<TrainSample>)> {
    let mut state = GameState::new(*spec);
    let mut rng = rng::from_seed(rng::derive(seed, u64::MAX));
    let mut moves = Vec::new();
    let mut samples = Vec::new();
    while !state.is_terminal() {
        let ply = state.stone_count() as u32;
        let d = agent.decide(&state, rng::derive(seed, ply as u64))?;
        let action = match &d.search {
            Some(s) if ply < opts.explore_plies => sample_from(&s.target, &mut rng),
            _ => d.action,
        };
        match &d.search {
            Some(s) => samples.push(TrainSample {
                state: state.clone(),
                target: s.target.clone(),
                iteration_born: iteration,
            }),
            None if opts.train_on_certain => samples.push(TrainSample {
                state: state.clone(),
                target: PolicyDist::one_hot(d.policy.actions.clone(), action),
                iteration_born: iteration,
            }),
            None => {}
        }
        moves.push(MoveRecord {
            action,
            mover: state.to_move(),
            certain: d.certain,
        });
        state.play(action)?;
    }
    Ok((
        GameRecord {
            spec: *spec,
            moves,
            outcome: state.outcome(),
        },
        samples,
    ))
}

fn sample_from(p: &PolicyDist, rng: &mut rng::Rng) -> Action {
    let r = rng.gen::<f64>();
    let mut acc = 0.0;
    for (&a, &q) in p.actions.iter().zip(&p.probs) {
        acc += q;
        if r < acc {
            return a;
        }
    }
    // rounding left r above the total mass
    p.argmax().expect("non-empty distribution")
}

#[derive(Clone, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct TrainRow {
    pub iteration: u32,
    pub games: u32,
    pub decision_points: u64,
    pub samples: u64,
    pub doubtful_fraction: f64,
    pub certain_fraction: f64,
    /// Mean cross-entropy on every held-out sample collected so far.
    pub heldout_ce: f64,
    /// `ln` of the mean legal-move count over the same samples.
    pub heldout_baseline: f64,
    pub heldout_n: usize,
    pub train_loss: f64,
    pub feature_count: usize,
    pub p1_wins: u32,
    pub draws: u32,
    pub p2_wins: u32,
    pub probe_certain_fraction: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    pub rows: Vec<TrainRow>,
    /// Samples taken over the whole run that came from certain positions.
    pub samples_from_certain: u64,
}

/// Share of `states` whose partition is certain.
pub fn certain_fraction(fs: &FeatureSet, params: &PartitionParams, states: &[GameState]) -> f64 {
    if states.is_empty() {
        return 0.0;
    }
    let certain = states
        .iter()
        .filter_map(|s| fs.policy(s).ok())
        .filter(|pi| Partition::from_params(pi, params).certain)
        .count();
    certain as f64 / states.len() as f64
}

/// Non-terminal positions reached by uniformly random play.
pub fn probe_positions(spec: &GameSpec, count: usize, seed: u64) -> Vec<GameState> {
    let mut rng = rng::from_seed(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let target = rng.gen_range(0..spec.cells());
        let mut state = GameState::new(*spec);
        for _ in 0..target {
            let legal = state.legal_actions().expect("non-terminal");
            let a = legal[rng.gen_range(0..legal.len())];
            let next = state.apply(a).expect("legal");
            if next.is_terminal() {
                break;
            }
            state = next;
        }
        out.push(state);
    }
    out
}

/// Samples handed to feature growth each round.
const GROWTH_SAMPLES: usize = 256;

/// Expert iteration from zero-weight atomic features.
///
/// Each iteration plays `games_per_iter` self-play games, files their
/// samples into the buffer or the held-out set, trains for `epochs` passes
/// of minibatch steps, grows features every `growth_period` iterations and
/// hands the weights to `checkpoint`.
pub fn expert_iteration<F>(
    spec: &GameSpec,
    agent: &AgentConfig,
    train: &TrainConfig,
    probe: &[GameState],
    mut checkpoint: F,
) -> Result<(FeatureSet, TrainReport)>
where
    F: FnMut(u32, &FeatureSet),
{
    agent.validate()?;
    train.validate()?;
    let mut fs = agent.initial_features()?;
    let params = agent.partition_params();
    let mut buffer = ReplayBuffer::new(train.buffer_capacity);
    let mut heldout: Vec<TrainSample> = Vec::new();
    let mut report = TrainReport::default();
    let mut rng = rng::from_seed(rng::derive(train.seed, 0));

    for iteration in 1..=train.iterations {
        let mut row = TrainRow {
            iteration,
            games: train.games_per_iter,
            decision_points: 0,
            samples: 0,
            doubtful_fraction: 0.0,
            certain_fraction: 0.0,
            heldout_ce: 0.0,
            heldout_baseline: 0.0,
            heldout_n: 0,
            train_loss: 0.0,
            feature_count: 0,
            p1_wins: 0,
            draws: 0,
            p2_wins: 0,
            probe_certain_fraction: None,
        };
        let mut certain_points = 0u64;
        {
            let mut player = Agent::new(&fs, agent.clone());
            for g in 0..train.games_per_iter {
                let seed = rng::derive(train.seed, ((iteration as u64) << 32) | g as u64);
                let (record, samples) =
                    self_play_game(&mut player, spec, seed, train.into(), iteration)?;
                row.decision_points += record.moves.len() as u64;
                let certain = record.moves.iter().filter(|m| m.certain).count() as u64;
                certain_points += certain;
                if train.train_on_certain {
                    report.samples_from_certain += certain;
                } else {
                    row.samples += samples.len() as u64;
                }
                match record.outcome.value {
                    1 => row.p1_wins += 1,
                    -1 => row.p2_wins += 1,
                    _ => row.draws += 1,
                }
                for s in samples {
                    if rng.gen::<f64>() < train.holdout_fraction {
                        heldout.push(s);
                    } else {
                        buffer.push(s);
                    }
                }
            }
        }
        if train.train_on_certain {
            row.samples = row.decision_points - certain_points;
        }
        if row.decision_points > 0 {
            row.doubtful_fraction = row.samples as f64 / row.decision_points as f64;
            row.certain_fraction = certain_points as f64 / row.decision_points as f64;
        }

        let mut order: Vec<usize> = (0..buffer.len()).collect();
        let (mut loss_sum, mut steps) = (0.0, 0u32);
        for _ in 0..train.epochs {
            order.shuffle(&mut rng);
            for chunk in order.chunks(train.batch_size) {
                let batch = chunk.iter().map(|&i| {
                    let s = buffer.get(i).expect("index in range");
                    (&s.state, &s.target)
                });
                loss_sum += fs.grad_step(batch, train.eta)?;
                steps += 1;
            }
        }
        row.train_loss = if steps > 0 {
            loss_sum / steps as f64
        } else {
            0.0
        };

        if iteration % train.growth_period == 0 && fs.len() < fs.max_features() {
            // the worst-predicted samples in the buffer, by largest
            // per-move error; earlier buffer position breaks ties
            let mut scored: Vec<(f64, usize, PolicyDist)> = buffer
                .iter()
                .enumerate()
                .map(|(i, s)| {
                    let pi = fs.policy(&s.state)?;
                    let err = pi
                        .actions
                        .iter()
                        .zip(&pi.probs)
                        .map(|(&a, &p)| libm::fabs(p - s.target.prob_of(a)))
                        .fold(0.0, f64::max);
                    Ok((err, i, pi))
                })
                .collect::<Result<_>>()?;
            scored.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
            let recent: Vec<(GameState, PolicyDist, PolicyDist)> = scored
                .into_iter()
                .take(GROWTH_SAMPLES)
                .map(|(_, i, pi)| {
                    let s = buffer.get(i).expect("index in range");
                    (s.state.clone(), s.target.clone(), pi)
                })
                .collect();
            fs.grow_features(&recent, agent.features.growth_per_round, 2);
        }

        row.heldout_n = heldout.len();
        if !heldout.is_empty() {
            let (ce, _) = fs.loss_and_gradient(heldout.iter().map(|s| (&s.state, &s.target)))?;
            let mean_legal =
                heldout.iter().map(|s| s.target.len()).sum::<usize>() as f64 / heldout.len() as f64;
            row.heldout_ce = ce;
            row.heldout_baseline = libm::log(mean_legal);
        }
        row.feature_count = fs.len();
        if !probe.is_empty() {
            row.probe_certain_fraction = Some(certain_fraction(&fs, &params, probe));
        }
        checkpoint(iteration, &fs);
        report.rows.push(row);
    }
    Ok((fs, report))
}
