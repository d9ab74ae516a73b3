use crate::game::StochasticGame;
use crate::strategy::{MarkovStrategy, Player};
use crate::weights::WeightSequence;

use super::{check_fits, check_player, PlayError};

/// Which way the responding player optimizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Player 1 responds to a player-2 strategy.
    Maximize,
    /// Player 2 responds to a player-1 strategy.
    Minimize,
}

impl Side {
    fn responder(self) -> Player {
        match self {
            Side::Maximize => Player::One,
            Side::Minimize => Player::Two,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BestResponse {
    /// Optimal payoff from the start state.
    pub value: f64,
    /// Optimal payoff from every state.
    pub values: Vec<f64>,
    /// Pure Markov best response.
    pub plan: MarkovStrategy,
}

/// Exact best response to a Markov strategy in the π-weighted game, by
/// backward induction on the MDP the opponent induces:
/// `W_N = 0`, `W_r(k) = opt_a Σ_b opp(b) [π_{r+1} g + E W_{r+1}]`.
/// Ties go to the lowest action index.
pub fn best_response_value(
    game: &StochasticGame,
    start: usize,
    pi: &WeightSequence,
    opponent: &MarkovStrategy,
    side: Side,
) -> Result<BestResponse, PlayError> {
    let responder = side.responder();
    check_player(opponent, responder.other())?;
    check_fits(game, opponent)?;
    if start >= game.num_states() {
        return Err(PlayError::Parameter(format!("start state {start} out of range")));
    }
    let n_states = game.num_states();
    let horizon = pi.support_end();
    let mut w = vec![0.0; n_states];
    let mut next = vec![0.0; n_states];
    let mut choices: Vec<Vec<usize>> = vec![Vec::new(); horizon];

    for (first, last, weight) in pi.segments().rev() {
        for m in (first..=last).rev() {
            let mut column = Vec::with_capacity(n_states);
            for k in 0..n_states {
                let opp = opponent.mixed(m, k);
                let n_own = game.actions(responder.index(), k);
                let mut best = 0;
                let mut best_val = f64::NAN;
                for a in 0..n_own {
                    let mut val = 0.0;
                    for (b, &p) in opp.iter().enumerate() {
                        if p == 0.0 {
                            continue;
                        }
                        let (i, j) = match side {
                            Side::Maximize => (a, b),
                            Side::Minimize => (b, a),
                        };
                        val += p * (weight * game.payoff(k, i, j) + game.expect(k, i, j, &w));
                    }
                    let better = match side {
                        Side::Maximize => val > best_val,
                        Side::Minimize => val < best_val,
                    };
                    if a == 0 || better {
                        best = a;
                        best_val = val;
                    }
                }
                next[k] = best_val;
                column.push(best);
            }
            std::mem::swap(&mut w, &mut next);
            choices[m - 1] = column;
        }
    }
    let plan = MarkovStrategy::from_pure_stages(game, responder, &choices)?;
    Ok(BestResponse { value: w[start], values: w, plan })
}
