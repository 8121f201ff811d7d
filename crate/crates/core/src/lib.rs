//! Solvers and analysis tools for context-ordinal games: games where each
//! player only ranks their own actions given every co-player action profile.

pub mod br;
pub mod election;
pub mod error;
pub mod experiments;
pub mod game;
pub mod io;
pub mod lp;
pub mod metrics;
pub mod rules;
pub mod solvers;
pub mod structure;
pub mod population;
pub mod preference;
pub mod strategy;

pub use error::{CogError, Result};
pub use game::{
    borda_scoring, cog_from_cardinal, induce_nfg, score_cog, vote_population, CardinalGame,
    ContextOrdinalGame, ContextVote, PreferenceGame,
};
pub use population::{Ballot, BallotKind, VotePopulation};
pub use preference::PreferenceRelation;
pub use strategy::{MixedStrategy, StrategyProfile};
