//! Strategy play: exact best responses against Markov strategies, exact
//! forward propagation of the induced Markov chain, seeded Monte Carlo, and
//! the block-weight counterexample and Big Match window scenarios.

mod best_response;
mod exact;
mod scenarios;
mod simulate;

use thiserror::Error;

use crate::evaluator::EvalError;
use crate::strategy::{Player, StrategyError};
use crate::weights::WeightError;

pub use crate::strategy::{MarkovStrategy, Plan};
pub use best_response::{best_response_value, BestResponse, Side};
pub use exact::{forward, ForwardResult, StageEvent};
pub use scenarios::{
    bigmatch_window_probe, counterexample_report, omega_event, sigma_n, CounterexampleRow,
    ReportBudget, WindowCell, WindowProbe,
};
pub use simulate::{pairwise_sum, simulate, SimulationStats};

#[derive(Debug, Error)]
pub enum PlayError {
    #[error("expected a strategy for {expected}, got one for {found}")]
    PlayerMismatch { expected: Player, found: Player },
    #[error("strategy does not fit the game: {0}")]
    StrategyShape(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("n = {n} needs {stages} stages, above the budget of {limit}")]
    Budget { n: usize, stages: usize, limit: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
}

fn check_player(strategy: &MarkovStrategy, expected: Player) -> Result<(), PlayError> {
    if strategy.player() == expected {
        Ok(())
    } else {
        Err(PlayError::PlayerMismatch { expected, found: strategy.player() })
    }
}

fn check_fits(game: &crate::game::StochasticGame, strategy: &MarkovStrategy) -> Result<(), PlayError> {
    let player = strategy.player().index();
    for r in 0..strategy.num_runs() {
        let plan = strategy.run_plan(r);
        if plan.len() != game.num_states()
            || plan.iter().enumerate().any(|(k, mix)| mix.len() != game.actions(player, k))
        {
            return Err(PlayError::StrategyShape(format!("run {r} has the wrong dimensions")));
        }
    }
    Ok(())
}
