//! Markov strategies: mixed actions indexed by stage and state, run-length
//! encoded over stages. Stationary strategies are single-run plans.

use std::fmt;

use thiserror::Error;

use crate::game::StochasticGame;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Player {
    /// Row player, maximizer.
    One,
    /// Column player, minimizer.
    Two,
}

impl Player {
    pub fn index(self) -> u8 {
        match self {
            Player::One => 1,
            Player::Two => 2,
        }
    }

    pub fn other(self) -> Player {
        match self {
            Player::One => Player::Two,
            Player::Two => Player::One,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "player {}", self.index())
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum StrategyError {
    #[error("strategy has no stage runs")]
    Empty,
    #[error("first run must start at stage 1, starts at {0}")]
    FirstStart(usize),
    #[error("run starts must increase strictly (run {0})")]
    Order(usize),
    #[error("run {run}: expected {expected} states, found {found}")]
    StateCount { run: usize, expected: usize, found: usize },
    #[error("run {run}, state {state}: expected {expected} actions, found {found}")]
    ActionCount { run: usize, state: usize, expected: usize, found: usize },
    #[error("run {run}, state {state}: not a probability vector")]
    NotDistribution { run: usize, state: usize },
}

/// Mixed action per state.
pub type Plan = Vec<Vec<f64>>;

/// A Markov strategy. Run `r` covers stages `starts[r] .. starts[r+1]-1`;
/// the last run extends to infinity.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovStrategy {
    player: Player,
    starts: Vec<usize>,
    plans: Vec<Plan>,
}

impl MarkovStrategy {
    /// Builds a strategy from `(first_stage, plan)` runs, checking every
    /// mixed action against `game`.
    pub fn new(
        game: &StochasticGame,
        player: Player,
        runs: Vec<(usize, Plan)>,
    ) -> Result<Self, StrategyError> {
        if runs.is_empty() {
            return Err(StrategyError::Empty);
        }
        if runs[0].0 != 1 {
            return Err(StrategyError::FirstStart(runs[0].0));
        }
        for (r, w) in runs.windows(2).enumerate() {
            if w[1].0 <= w[0].0 {
                return Err(StrategyError::Order(r + 1));
            }
        }
        let n = game.num_states();
        for (run, (_, plan)) in runs.iter().enumerate() {
            if plan.len() != n {
                return Err(StrategyError::StateCount { run, expected: n, found: plan.len() });
            }
            for (state, mix) in plan.iter().enumerate() {
                let expected = game.actions(player.index(), state);
                if mix.len() != expected {
                    return Err(StrategyError::ActionCount { run, state, expected, found: mix.len() });
                }
                let sum: f64 = mix.iter().sum();
                if mix.iter().any(|&p| !(p >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
                    return Err(StrategyError::NotDistribution { run, state });
                }
            }
        }
        let (starts, plans) = runs.into_iter().unzip();
        Ok(MarkovStrategy { player, starts, plans })
    }

    pub fn stationary(game: &StochasticGame, player: Player, plan: Plan) -> Result<Self, StrategyError> {
        Self::new(game, player, vec![(1, plan)])
    }

    /// Stationary strategy playing action `actions[k]` in state `k`.
    pub fn stationary_pure(
        game: &StochasticGame,
        player: Player,
        actions: &[usize],
    ) -> Result<Self, StrategyError> {
        Self::stationary(game, player, pure_plan(game, player, actions))
    }

    /// Compresses a per-stage pure plan (`actions[m-1][k]` for stage `m`)
    /// into runs. The plan for the last listed stage continues forever.
    pub fn from_pure_stages(game: &StochasticGame, player: Player, actions: &[Vec<usize>]) -> Result<Self, StrategyError> {
        let mut runs: Vec<(usize, Plan)> = Vec::new();
        let mut prev: Option<&Vec<usize>> = None;
        for (m, column) in actions.iter().enumerate() {
            if prev != Some(column) {
                runs.push((m + 1, pure_plan(game, player, column)));
                prev = Some(column);
            }
        }
        Self::new(game, player, runs)
    }

    pub fn player(&self) -> Player {
        self.player
    }

    pub fn num_runs(&self) -> usize {
        self.starts.len()
    }

    /// Run index active at stage `m >= 1`.
    pub fn run_at(&self, m: usize) -> usize {
        self.starts.partition_point(|&s| s <= m).saturating_sub(1)
    }

    /// Last stage of run `r`, `usize::MAX` for the final run.
    pub fn run_end(&self, r: usize) -> usize {
        self.starts.get(r + 1).map_or(usize::MAX, |s| s - 1)
    }

    pub fn run_start(&self, r: usize) -> usize {
        self.starts[r]
    }

    pub fn run_plan(&self, r: usize) -> &Plan {
        &self.plans[r]
    }

    /// Mixed action at stage `m` in state `k`.
    pub fn mixed(&self, m: usize, k: usize) -> &[f64] {
        &self.plans[self.run_at(m)][k]
    }
}

fn pure_plan(game: &StochasticGame, player: Player, actions: &[usize]) -> Plan {
    actions
        .iter()
        .enumerate()
        .map(|(k, &a)| {
            let mut v = vec![0.0; game.actions(player.index(), k)];
            v[a] = 1.0;
            v
        })
        .collect()
}
