//! The generative-algorithm toolbox: string rewriting, chaos-game
//! attractors, lattice aggregation and dense pixel bars.
//!
//! Every operation here is pure given its explicit seed; rerunning with
//! the same inputs reproduces the same geometry bit for bit.

mod dla;
mod ifs;
mod lsystem;
mod pixelbar;

pub use dla::{dla_grow, DlaGrowth, DlaParams};
pub use ifs::{ifs_chaos_game, ifs_preset, load_ifs_maps, render_points, AffineMap};
pub use lsystem::{lsystem_expand, lsystem_turtle, turtle_trace, ExpandLimits, LSystem};
pub use pixelbar::{pixel_bar_chart, PixelBarChart, PixelBarSpec};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GenerativeError {
    #[error("expansion would reach {symbols} symbols, cap is {cap}")]
    ExpansionTooLarge { symbols: u128, cap: usize },
    #[error("{requested} iterations requested, cap is {cap}")]
    IterationCapExceeded { requested: usize, cap: usize },
    #[error("unbalanced brackets in turtle string")]
    UnbalancedBrackets,
    #[error("invalid l-system: {0}")]
    InvalidLSystem(String),
    #[error("invalid ifs weights: {0}")]
    InvalidWeights(String),
    #[error("lattice exhausted: {0}")]
    LatticeExhausted(String),
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("column `{0}` is not numeric")]
    NotNumeric(String),
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
}
