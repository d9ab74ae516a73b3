//! Solver laboratory for finite zero-sum stochastic games under general
//! weighted payoff evaluations.
//!
//! - [`game`]: the game model, validation, builtin games, JSON file format.
//! - [`matrix`]: one-shot matrix games (the kernel of every Shapley step).
//! - [`weights`]: finite-support weight sequences and p-impatience.
//! - [`evaluator`]: discounted, n-stage and weighted values; order estimation.
//! - [`playlab`]: Markov strategies, best responses, Monte Carlo play and the
//!   two headline scenarios.

pub mod evaluator;
pub mod game;
pub mod matrix;
pub mod playlab;
pub mod random;
pub mod strategy;
pub mod weights;

pub use evaluator::{
    decreasing_decomposition, discounted_value, n_stage_value, order_estimate, order_lower_bound,
    weighted_value, ValueVector,
};
pub use game::{builtin, Builtin, GameError, GameSpec, StochasticGame};
pub use matrix::{MatrixGame, MatrixGameSolution};
pub use strategy::{MarkovStrategy, Player};
pub use weights::{impatience, Parity, WeightExpr, WeightSequence};
