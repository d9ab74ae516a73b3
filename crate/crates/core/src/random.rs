//! Seeded random games: uniform payoffs, Dirichlet(1, ..., 1) transitions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::game::{GameSpec, StochasticGame};

/// A random game with `states` states and `actions` actions per player in
/// every state. Deterministic in `seed`.
pub fn random_game(states: usize, actions: usize, seed: u64) -> StochasticGame {
    random_game_with(states, &vec![actions; states], &vec![actions; states], seed)
}

pub fn random_game_with(states: usize, actions1: &[usize], actions2: &[usize], seed: u64) -> StochasticGame {
    assert!(states >= 1 && actions1.len() == states && actions2.len() == states);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut payoff = Vec::with_capacity(states);
    let mut transition = Vec::with_capacity(states);
    for k in 0..states {
        payoff.push(
            (0..actions1[k])
                .map(|_| (0..actions2[k]).map(|_| rng.random::<f64>()).collect())
                .collect(),
        );
        transition.push(
            (0..actions1[k])
                .map(|_| (0..actions2[k]).map(|_| flat_dirichlet(&mut rng, states)).collect())
                .collect(),
        );
    }
    let spec = GameSpec {
        states: (0..states).map(|k| format!("k{k}")).collect(),
        actions1: actions1.to_vec(),
        actions2: actions2.to_vec(),
        payoff,
        transition,
    };
    StochasticGame::try_from(spec).expect("random games are well-formed")
}

/// Dirichlet(1, ..., 1) via normalized exponentials.
fn flat_dirichlet(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let draws: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|d| d / total).collect()
}
