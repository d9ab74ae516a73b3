use rayon::prelude::*;
use serde::Serialize;

use crate::evaluator::weighted_value;
use crate::game::{labels, Builtin, StochasticGame};
use crate::strategy::{MarkovStrategy, Plan, Player};
use crate::weights::{impatience, WeightSequence};

use super::best_response::{best_response_value, Side};
use super::exact::{forward, StageEvent};
use super::simulate::simulate;
use super::PlayError;

const OMEGA1: usize = 0;
const ONE_STAR: usize = 2;

/// First stage of block `l` of the `n`-th block sequence.
fn block_start(n: usize, l: usize) -> usize {
    l * (n + n.pow(5)) + 1
}

fn support_end(n: usize) -> Option<usize> {
    let gap = n.checked_pow(5)?;
    n.checked_pow(3)?.checked_mul(n + gap).map(|s| s - gap)
}

/// Player 1's strategy `σ^n` in the counterexample game. On block stages it mixes
/// `T`/`B` in `ω1` and plays `M` in `ω2`; between blocks the roles swap.
pub fn sigma_n(n: usize) -> Result<MarkovStrategy, PlayError> {
    if n < 2 {
        return Err(PlayError::Parameter(format!("sigma_n requires n >= 2, got {n}")));
    }
    let game = Builtin::Counterexample.game();
    let nf = n as f64;
    let mix = |b: f64| {
        let mut v = vec![0.0; 3];
        v[labels::T] = 1.0 - b;
        v[labels::B] = b;
        v
    };
    let pure_m = {
        let mut v = vec![0.0; 3];
        v[labels::M] = 1.0;
        v
    };
    let block: Plan = vec![mix(nf.powi(-2)), pure_m.clone(), vec![1.0], vec![1.0]];
    let gap: Plan = vec![pure_m, mix(nf.powi(-4)), vec![1.0], vec![1.0]];
    let runs = (0..n.pow(3))
        .flat_map(|l| {
            let a = block_start(n, l);
            [(a, block.clone()), (a + n, gap.clone())]
        })
        .collect();
    Ok(MarkovStrategy::new(&game, Player::One, runs)?)
}

/// The event that at the first stage of every block the state is `ω1` or `1*`.
pub fn omega_event(n: usize) -> Result<StageEvent, PlayError> {
    if n < 2 {
        return Err(PlayError::Parameter(format!("omega_event requires n >= 2, got {n}")));
    }
    let mut allowed = vec![false; 4];
    allowed[OMEGA1] = true;
    allowed[ONE_STAR] = true;
    Ok(StageEvent { checkpoints: (0..n.pow(3)).map(|l| block_start(n, l)).collect(), allowed })
}

/// Largest stage count a counterexample row may need.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ReportBudget {
    pub max_stages: usize,
}

impl Default for ReportBudget {
    /// Admits `n <= 6`.
    fn default() -> Self {
        ReportBudget { max_stages: 2_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CounterexampleRow {
    pub n: usize,
    pub support_end: usize,
    pub impatience_1: f64,
    pub impatience_inf: f64,
    /// `v_{π^n}(ω1)`.
    pub value: f64,
    /// `min_τ γ(σ^n, τ)` from `ω1`.
    pub guarantee: f64,
    pub omega_exact: f64,
    pub omega_mc: f64,
    pub omega_stderr: f64,
    pub payoff_mc: f64,
    pub payoff_stderr: f64,
    pub reps: usize,
    pub seed: u64,
}

/// One row per `n`: the value of the block evaluation, what `σ^n`
/// guarantees against its exact best response, and the probability of the
/// block-start event, exactly and by simulation.
///
/// Every `n` is checked against `budget` before any work is done.
pub fn counterexample_report(
    n_list: &[usize],
    reps: usize,
    seed: u64,
    budget: ReportBudget,
) -> Result<Vec<CounterexampleRow>, PlayError> {
    for &n in n_list {
        if n < 2 {
            return Err(PlayError::Parameter(format!("n must be >= 2, got {n}")));
        }
        let stages = support_end(n).unwrap_or(usize::MAX);
        if stages > budget.max_stages {
            return Err(PlayError::Budget { n, stages, limit: budget.max_stages });
        }
    }
    if reps == 0 {
        return Err(PlayError::Parameter("reps must be >= 1".into()));
    }
    let game = Builtin::Counterexample.game();
    n_list.iter().map(|&n| counterexample_row(&game, n, reps, seed)).collect()
}

fn counterexample_row(game: &StochasticGame, n: usize, reps: usize, seed: u64) -> Result<CounterexampleRow, PlayError> {
    let pi = WeightSequence::blocks(n)?;
    let sigma = sigma_n(n)?;
    let event = omega_event(n)?;
    let value = weighted_value(game, &pi)?[OMEGA1];
    let response = best_response_value(game, OMEGA1, &pi, &sigma, Side::Minimize)?;
    let exact = forward(game, OMEGA1, &sigma, &response.plan, &pi, Some(&event))?;
    let mc = simulate(game, OMEGA1, &sigma, &response.plan, &pi, reps, seed, Some(&event))?;
    Ok(CounterexampleRow {
        n,
        support_end: pi.support_end(),
        impatience_1: impatience(&pi, 1.0)?,
        impatience_inf: impatience(&pi, f64::INFINITY)?,
        value,
        guarantee: response.value,
        omega_exact: exact.event_probability.unwrap_or(1.0),
        omega_mc: mc.event_frequency.unwrap_or(1.0),
        omega_stderr: mc.event_stderr.unwrap_or(0.0),
        payoff_mc: mc.mean,
        payoff_stderr: mc.stderr,
        reps,
        seed,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowCell {
    pub l: usize,
    pub n: usize,
    /// `min_τ E[(1/n) Σ_{m=l+1}^{l+n} g_m]`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WindowProbe {
    pub worst: f64,
    pub worst_window: (usize, usize),
    /// In grid order, `l` outermost.
    pub cells: Vec<WindowCell>,
}

/// Worst window average a Player-1 strategy secures in the Big Match from
/// `ω`, over all windows `(l, n)` of the grid. Ties keep the first cell.
pub fn bigmatch_window_probe(sigma: &MarkovStrategy, l_grid: &[usize], n_grid: &[usize]) -> Result<WindowProbe, PlayError> {
    if l_grid.is_empty() || n_grid.is_empty() {
        return Err(PlayError::Parameter("window grids must be nonempty".into()));
    }
    if n_grid.contains(&0) {
        return Err(PlayError::Parameter("window lengths must be >= 1".into()));
    }
    let game = Builtin::BigMatch.game();
    let grid: Vec<(usize, usize)> = l_grid.iter().flat_map(|&l| n_grid.iter().map(move |&n| (l, n))).collect();
    let cells = grid
        .par_iter()
        .map(|&(l, n)| {
            let pi = WeightSequence::window(l, n)?;
            let value = best_response_value(&game, 0, &pi, sigma, Side::Minimize)?.value;
            Ok(WindowCell { l, n, value })
        })
        .collect::<Result<Vec<_>, PlayError>>()?;
    let worst = cells
        .iter()
        .fold(None::<&WindowCell>, |best, c| match best {
            Some(b) if b.value <= c.value => Some(b),
            _ => Some(c),
        })
        .expect("grid is nonempty");
    Ok(WindowProbe { worst: worst.value, worst_window: (worst.l, worst.n), cells })
}
