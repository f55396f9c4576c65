//! Dual-process game agent for m,n,k board games.
//!
//! A fast pattern policy built from spatial state-action features splits the
//! legal moves into a small "good" set. When exactly one move survives the
//! split the agent plays it immediately; otherwise a memory-bounded
//! Monte-Carlo tree search explores only the surviving moves. The search
//! output is fed back to the pattern policy by expert iteration.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the session
//! store, the HTTP service and the command line live in the `cogniplay`
//! companion crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

mod error;
pub mod evaluation;
pub mod features;
pub mod game;
pub mod rng;
pub mod search;
pub mod trainer;

pub use error::{Error, Result};
pub use evaluation::{
    aggregate_ratings, elo_diff, move_match, self_consistency_ceiling, strength_match, Guess,
    MatchReport, MoveDataset, MoveEntry, Quality, RatingRecord, RatingsReport, StrengthReport,
    UniformRandom,
};
pub use features::{
    partition, Constraint, Feature, FeatureId, FeatureSet, GrowthCandidate, Partition,
    PartitionParams, PolicyDist,
};
pub use game::{Action, Cell, GameSpec, GameState, Outcome, Player, Relative, Rules, Symmetry};
pub use search::{
    playout, search, Focus, NodeId, NodePool, SearchConfig, SearchResult, SearchStats, Searcher,
};
pub use trainer::{
    certain_fraction, decide, expert_iteration, probe_positions, self_play_game, Agent,
    AgentConfig, Decision, FeatureParams, GameRecord, MoveRecord, ReplayBuffer, SelfPlayOptions,
    Strategy, TrainConfig, TrainReport, TrainRow, TrainSample,
};
