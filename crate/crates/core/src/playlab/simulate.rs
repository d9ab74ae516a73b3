use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};
use rayon::prelude::*;
use serde::Serialize;

use crate::game::StochasticGame;
use crate::strategy::{MarkovStrategy, Player};
use crate::weights::WeightSequence;

use super::exact::StageEvent;
use super::{check_fits, check_player, PlayError};

/// Aggregate of a seeded Monte Carlo run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationStats {
    pub seed: u64,
    pub reps: usize,
    pub mean: f64,
    pub stderr: f64,
    /// Weighted payoff of each replication, in replication order.
    pub payoffs: Vec<f64>,
    /// `(state, fraction of replications ending there)` for absorbing states.
    pub absorption: Vec<(usize, f64)>,
    pub event_frequency: Option<f64>,
    /// Binomial standard error of `event_frequency`.
    pub event_stderr: Option<f64>,
}

struct Outcome {
    payoff: f64,
    final_state: usize,
    event: bool,
}

/// Unbiased estimate of `E[Σ π_m g_m]` under `(sigma, tau)` from `start`.
///
/// Replication `r` draws from the ChaCha8 stream `r` of the generator seeded
/// with `seed`, so results do not depend on the thread count. Play stops at
/// `max(support_end, last checkpoint)`.
///
/// Stretches where both strategies, the stage weight and the state stay
/// fixed are sampled in one geometric draw when every staying action pair
/// pays the same; otherwise play advances one stage at a time.
pub fn simulate(
    game: &StochasticGame,
    start: usize,
    sigma: &MarkovStrategy,
    tau: &MarkovStrategy,
    pi: &WeightSequence,
    reps: usize,
    seed: u64,
    event: Option<&StageEvent>,
) -> Result<SimulationStats, PlayError> {
    check_player(sigma, Player::One)?;
    check_player(tau, Player::Two)?;
    check_fits(game, sigma)?;
    check_fits(game, tau)?;
    if reps == 0 {
        return Err(PlayError::Parameter("reps must be >= 1".into()));
    }
    if start >= game.num_states() {
        return Err(PlayError::Parameter(format!("start state {start} out of range")));
    }
    if event.is_some_and(|e| e.allowed.len() != game.num_states()) {
        return Err(PlayError::Parameter("event must list every state".into()));
    }
    let play = Replication { game, sigma, tau, pi, event, start };
    let outcomes: Vec<Outcome> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            play.run(&mut rng)
        })
        .collect();

    let payoffs: Vec<f64> = outcomes.iter().map(|o| o.payoff).collect();
    let n = reps as f64;
    let mean = pairwise_sum(&payoffs) / n;
    let stderr = if reps > 1 {
        let sq: Vec<f64> = payoffs.iter().map(|p| (p - mean).powi(2)).collect();
        (pairwise_sum(&sq) / (n - 1.0) / n).sqrt()
    } else {
        0.0
    };
    let absorption = game
        .absorbing_states()
        .into_iter()
        .map(|k| (k, outcomes.iter().filter(|o| o.final_state == k).count() as f64 / n))
        .collect();
    let (event_frequency, event_stderr) = match event {
        Some(_) => {
            let f = outcomes.iter().filter(|o| o.event).count() as f64 / n;
            (Some(f), Some((f * (1.0 - f) / n).sqrt()))
        }
        None => (None, None),
    };
    Ok(SimulationStats { seed, reps, mean, stderr, payoffs, absorption, event_frequency, event_stderr })
}

/// Sum with a fixed binary-tree shape, independent of evaluation order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

struct Replication<'a> {
    game: &'a StochasticGame,
    sigma: &'a MarkovStrategy,
    tau: &'a MarkovStrategy,
    pi: &'a WeightSequence,
    event: Option<&'a StageEvent>,
    start: usize,
}

impl Replication<'_> {
    fn run(&self, rng: &mut ChaCha8Rng) -> Outcome {
        let game = self.game;
        let segments: Vec<(usize, usize, f64)> = self.pi.segments().collect();
        let horizon = self.pi.support_end().max(self.event.map_or(0, StageEvent::last_checkpoint));
        let mut k = self.start;
        let mut m = 1;
        let mut payoff = 0.0;
        let (mut sr, mut tr, mut pr) = (0, 0, 0);
        let mut checkpoint = 0;
        let mut event_ok = true;

        // records the state at stages first..=last against the checkpoints
        let observe = |state: usize, last: usize, checkpoint: &mut usize, ok: &mut bool| {
            if let Some(e) = self.event {
                while *checkpoint < e.checkpoints.len() && e.checkpoints[*checkpoint] <= last {
                    if !e.allowed[state] {
                        *ok = false;
                    }
                    *checkpoint += 1;
                }
            }
        };

        while m <= horizon {
            while self.sigma.run_end(sr) < m {
                sr += 1;
            }
            while self.tau.run_end(tr) < m {
                tr += 1;
            }
            while pr < segments.len() && segments[pr].1 < m {
                pr += 1;
            }
            let (w, weight_end) = match segments.get(pr) {
                Some(&(first, last, w)) if first <= m => (w, last),
                Some(&(first, _, _)) => (0.0, first - 1),
                None => (0.0, horizon),
            };
            let seg_end = self.sigma.run_end(sr).min(self.tau.run_end(tr)).min(weight_end).min(horizon);
            let x = &self.sigma.run_plan(sr)[k];
            let y = &self.tau.run_plan(tr)[k];

            let (p_stay, stay_payoff) = stay_profile(game, k, x, y);
            if let (true, Some(gs)) = (p_stay > 0.0, stay_payoff) {
                let len = seg_end - m + 1;
                let stays = if p_stay >= 1.0 {
                    len
                } else {
                    let draws = Geometric::new(1.0 - p_stay).expect("valid leave probability").sample(rng);
                    usize::try_from(draws).unwrap_or(usize::MAX).min(len)
                };
                if stays > 0 {
                    observe(k, m + stays - 1, &mut checkpoint, &mut event_ok);
                    payoff += w * gs * stays as f64;
                    m += stays;
                }
                if stays == len {
                    continue;
                }
                // this stage leaves k
                observe(k, m, &mut checkpoint, &mut event_ok);
                let (i, j) = sample_leaving_pair(game, k, x, y, rng);
                payoff += w * game.payoff(k, i, j);
                k = sample_other(game.transition(k, i, j), k, rng);
                m += 1;
            } else {
                observe(k, m, &mut checkpoint, &mut event_ok);
                let i = sample(x, rng);
                let j = sample(y, rng);
                payoff += w * game.payoff(k, i, j);
                k = sample(game.transition(k, i, j), rng);
                m += 1;
            }
        }
        Outcome { payoff, final_state: k, event: event_ok }
    }
}

/// Probability of staying in `k` for one stage, and the common payoff of
/// all action pairs that can stay, if there is one.
fn stay_profile(game: &StochasticGame, k: usize, x: &[f64], y: &[f64]) -> (f64, Option<f64>) {
    let mut p_stay = 0.0;
    let mut payoff: Option<f64> = None;
    let mut uniform = true;
    for (i, &xi) in x.iter().enumerate() {
        if xi == 0.0 {
            continue;
        }
        for (j, &yj) in y.iter().enumerate() {
            if yj == 0.0 {
                continue;
            }
            let q = game.transition(k, i, j)[k];
            if q > 0.0 {
                p_stay += xi * yj * q;
                let g = game.payoff(k, i, j);
                match payoff {
                    None => payoff = Some(g),
                    Some(p) if p != g => uniform = false,
                    _ => {}
                }
            }
        }
    }
    (p_stay.min(1.0), if uniform { payoff } else { None })
}

fn sample_leaving_pair(game: &StochasticGame, k: usize, x: &[f64], y: &[f64], rng: &mut impl Rng) -> (usize, usize) {
    let mut pairs = Vec::new();
    let mut weights = Vec::new();
    for (i, &xi) in x.iter().enumerate() {
        for (j, &yj) in y.iter().enumerate() {
            let leave: f64 = game.successors(k, i, j).iter().filter(|s| s.0 != k).map(|s| s.1).sum();
            let w = xi * yj * leave;
            if w > 0.0 {
                pairs.push((i, j));
                weights.push(w);
            }
        }
    }
    pairs[sample(&weights, rng)]
}

fn sample_other(probs: &[f64], exclude: usize, rng: &mut impl Rng) -> usize {
    let masked: Vec<f64> = probs
        .iter()
        .enumerate()
        .map(|(t, &p)| if t == exclude { 0.0 } else { p })
        .collect();
    sample(&masked, rng)
}

/// Index drawn proportionally to `weights`; point masses use no randomness.
fn sample(weights: &[f64], rng: &mut impl Rng) -> usize {
    let mut positive = weights.iter().enumerate().filter(|(_, &w)| w > 0.0);
    let first = positive.next().map(|(i, _)| i).expect("distribution with positive mass");
    if positive.next().is_none() {
        return first;
    }
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    let mut last = first;
    for (i, &w) in weights.iter().enumerate() {
        if w <= 0.0 {
            continue;
        }
        if u < w {
            return i;
        }
        u -= w;
        last = i;
    }
    last
}
