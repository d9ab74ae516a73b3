use crate::game::StochasticGame;
use crate::strategy::{MarkovStrategy, Player};
use crate::weights::WeightSequence;

use super::{check_fits, check_player, PlayError};

/// The event "at every checkpoint stage the state is allowed".
#[derive(Debug, Clone, PartialEq)]
pub struct StageEvent {
    /// Strictly increasing stages.
    pub checkpoints: Vec<usize>,
    /// Indexed by state.
    pub allowed: Vec<bool>,
}

impl StageEvent {
    pub fn last_checkpoint(&self) -> usize {
        self.checkpoints.last().copied().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForwardResult {
    /// `E[Σ π_m g_m]`.
    pub payoff: f64,
    /// Probability of the event, if one was given.
    pub event_probability: Option<f64>,
    /// State distribution after the last stage played.
    pub final_distribution: Vec<f64>,
}

/// Exact evaluation of a pair of Markov strategies by propagating the state
/// distribution forward through `max(support_end, last checkpoint)` stages.
pub fn forward(
    game: &StochasticGame,
    start: usize,
    sigma: &MarkovStrategy,
    tau: &MarkovStrategy,
    pi: &WeightSequence,
    event: Option<&StageEvent>,
) -> Result<ForwardResult, PlayError> {
    check_player(sigma, Player::One)?;
    check_player(tau, Player::Two)?;
    check_fits(game, sigma)?;
    check_fits(game, tau)?;
    let n = game.num_states();
    if start >= n {
        return Err(PlayError::Parameter(format!("start state {start} out of range")));
    }
    if let Some(e) = event {
        if e.allowed.len() != n {
            return Err(PlayError::Parameter("event must list every state".into()));
        }
    }
    let horizon = pi.support_end().max(event.map_or(0, StageEvent::last_checkpoint));
    let mut dist = vec![0.0; n];
    dist[start] = 1.0;
    let mut alive = dist.clone();
    let mut checkpoint = 0;
    let mut payoff = 0.0;
    let mut next = vec![0.0; n];
    let mut next_alive = vec![0.0; n];

    for m in 1..=horizon {
        if let Some(e) = event {
            if e.checkpoints.get(checkpoint) == Some(&m) {
                for (k, a) in alive.iter_mut().enumerate() {
                    if !e.allowed[k] {
                        *a = 0.0;
                    }
                }
                checkpoint += 1;
            }
        }
        let w = pi.weight(m);
        next.iter_mut().for_each(|x| *x = 0.0);
        next_alive.iter_mut().for_each(|x| *x = 0.0);
        for k in 0..n {
            if dist[k] == 0.0 && alive[k] == 0.0 {
                continue;
            }
            let x = sigma.mixed(m, k);
            let y = tau.mixed(m, k);
            for (i, &pi_) in x.iter().enumerate() {
                if pi_ == 0.0 {
                    continue;
                }
                for (j, &pj) in y.iter().enumerate() {
                    if pj == 0.0 {
                        continue;
                    }
                    let p = pi_ * pj;
                    payoff += dist[k] * p * w * game.payoff(k, i, j);
                    for &(t, q) in game.successors(k, i, j) {
                        next[t] += dist[k] * p * q;
                        next_alive[t] += alive[k] * p * q;
                    }
                }
            }
        }
        std::mem::swap(&mut dist, &mut next);
        std::mem::swap(&mut alive, &mut next_alive);
    }
    Ok(ForwardResult {
        payoff,
        event_probability: event.map(|_| alive.iter().sum()),
        final_distribution: dist,
    })
}
