//! Exact values of weighted evaluations: discounted values, n-stage values,
//! general weighted values by backward Shapley recursion, the
//! decreasing-weights Cesàro decomposition, and Puiseux-order estimation.
//!
//! Absorbing states are evaluated in closed form everywhere: their value is
//! their absorbing payoff.

use std::io::{self, Write};
use std::ops::Index;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::game::StochasticGame;
use crate::matrix::{self, MatrixError, MatrixGame};
use crate::strategy::{MarkovStrategy, Plan, Player, StrategyError};
use crate::weights::{WeightError, WeightSequence};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("discounted value for lambda = {lambda} did not converge: residual {residual} after {iterations} rounds")]
    NotConverged { lambda: f64, residual: f64, iterations: usize },
    #[error("order indistinguishable from ∞ at this tolerance (largest difference {max_diff:e} <= noise floor {floor:e})")]
    OrderIndistinguishable { max_diff: f64, floor: f64 },
}

/// One value per state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValueVector(Vec<f64>);

impl ValueVector {
    pub fn new(values: Vec<f64>) -> Self {
        ValueVector(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    /// Sup-norm distance.
    pub fn distance(&self, other: &ValueVector) -> f64 {
        sup_distance(&self.0, &other.0)
    }
}

impl Index<usize> for ValueVector {
    type Output = f64;

    fn index(&self, k: usize) -> &f64 {
        &self.0[k]
    }
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// The one-shot game in state `k`: `stage_weight * g(k,i,j) + scale * E[f]`.
pub fn local_game(game: &StochasticGame, k: usize, stage_weight: f64, scale: f64, f: &[f64]) -> MatrixGame {
    let (m1, m2) = (game.actions1(k), game.actions2(k));
    let mut entries = Vec::with_capacity(m1 * m2);
    for i in 0..m1 {
        for j in 0..m2 {
            entries.push(stage_weight * game.payoff(k, i, j) + scale * game.expect(k, i, j, f));
        }
    }
    MatrixGame::new(m1, m2, entries).expect("local games of a valid game are well-formed")
}

/// Values and optimal one-shot strategies of one Shapley step.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapleyStep {
    pub values: Vec<f64>,
    pub x: Plan,
    pub y: Plan,
}

/// `Φ(λ, f)(k) = val[λ g(k,·,·) + (1-λ) E_k f]` for every state.
pub fn shapley_operator(game: &StochasticGame, lambda: f64, f: &[f64]) -> Result<ShapleyStep, EvalError> {
    check_lambda(lambda)?;
    let mut step = ShapleyStep { values: Vec::new(), x: Vec::new(), y: Vec::new() };
    for k in 0..game.num_states() {
        let sol = matrix::solve(&local_game(game, k, lambda, 1.0 - lambda, f), matrix::DEFAULT_TOL)?;
        step.values.push(sol.value);
        step.x.push(sol.x);
        step.y.push(sol.y);
    }
    Ok(step)
}

fn check_lambda(lambda: f64) -> Result<(), EvalError> {
    if lambda > 0.0 && lambda <= 1.0 {
        Ok(())
    } else {
        Err(EvalError::Parameter(format!("lambda = {lambda} not in (0, 1]")))
    }
}

/// `v_λ` with optimal stationary strategies.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscountedSolution {
    pub values: ValueVector,
    pub x: Plan,
    pub y: Plan,
    /// Final `‖Φ(v) - v‖∞`; the returned values are within
    /// `residual (1-λ)/λ` of `v_λ`.
    pub residual: f64,
    /// Shapley-operator evaluations over all continuation levels.
    pub iterations: usize,
}

const MAX_ROUNDS: usize = 2_000;
/// Above this discount factor no warm start is needed.
const CONTINUATION_START: f64 = 0.05;
const LINE_SEARCH_STEPS: usize = 30;

/// Fixed point of the Shapley operator.
///
/// Each round takes a Newton step: with both players' one-shot optimal
/// strategies at the current iterate held fixed, the induced linear system
/// is solved exactly. A backtracking line search keeps the residual
/// decreasing, and a plain Shapley step is taken when it fails. Small `λ`
/// is reached by halving from `0.05`, each level warm-started from the
/// previous one.
///
/// Stops once `‖Φ(v) - v‖∞ <= tol·λ`, or once the residual is at rounding
/// level (`64 ε`), whichever bound is larger.
pub fn discounted_value(game: &StochasticGame, lambda: f64, tol: f64) -> Result<DiscountedSolution, EvalError> {
    check_lambda(lambda)?;
    if !(tol > 0.0) {
        return Err(EvalError::Parameter(format!("tol = {tol} must be positive")));
    }
    let fixed: Vec<Option<f64>> = (0..game.num_states()).map(|k| game.absorbing_payoff(k)).collect();
    let mut levels = vec![lambda];
    while levels.last().is_some_and(|&l| l < CONTINUATION_START) {
        levels.push(levels.last().unwrap() * 2.0);
    }
    let mut v: Vec<f64> = fixed.iter().map(|g| g.unwrap_or(0.0)).collect();
    let mut iterations = 0;
    let mut solution = None;
    for &level in levels.iter().rev() {
        let sol = solve_level(game, level, tol, &fixed, v, &mut iterations)?;
        v = sol.values.0.clone();
        solution = Some(sol);
    }
    let mut sol = solution.expect("at least one level");
    sol.iterations = iterations;
    Ok(sol)
}

fn solve_level(
    game: &StochasticGame,
    lambda: f64,
    tol: f64,
    fixed: &[Option<f64>],
    mut v: Vec<f64>,
    iterations: &mut usize,
) -> Result<DiscountedSolution, EvalError> {
    let threshold = (tol * lambda).max(64.0 * f64::EPSILON);
    let mut step = shapley_restricted(game, lambda, &v, fixed)?;
    *iterations += 1;
    let mut residual = sup_distance(&step.values, &v);
    for _ in 0..MAX_ROUNDS {
        if residual <= threshold {
            return Ok(DiscountedSolution {
                values: ValueVector(step.values),
                x: step.x,
                y: step.y,
                residual,
                iterations: *iterations,
            });
        }
        let target = newton_target(game, lambda, &step, fixed).unwrap_or_else(|| step.values.clone());
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..LINE_SEARCH_STEPS {
            let trial: Vec<f64> = v.iter().zip(&target).map(|(a, b)| a + alpha * (b - a)).collect();
            let trial_step = shapley_restricted(game, lambda, &trial, fixed)?;
            *iterations += 1;
            let trial_residual = sup_distance(&trial_step.values, &trial);
            if trial_residual < residual {
                accepted = Some((trial, trial_step, trial_residual));
                break;
            }
            alpha *= 0.5;
        }
        let (next, next_step, next_residual) = match accepted {
            Some(found) => found,
            None => {
                let shapley = step.values.clone();
                let s = shapley_restricted(game, lambda, &shapley, fixed)?;
                *iterations += 1;
                let r = sup_distance(&s.values, &shapley);
                if r >= residual {
                    // rounding level: no further progress possible
                    break;
                }
                (shapley, s, r)
            }
        };
        v = next;
        step = next_step;
        residual = next_residual;
    }
    Err(EvalError::NotConverged { lambda, residual, iterations: *iterations })
}

fn shapley_restricted(
    game: &StochasticGame,
    lambda: f64,
    f: &[f64],
    fixed: &[Option<f64>],
) -> Result<ShapleyStep, EvalError> {
    let mut step = ShapleyStep { values: Vec::new(), x: Vec::new(), y: Vec::new() };
    for (k, fx) in fixed.iter().enumerate() {
        if let Some(g) = *fx {
            step.values.push(g);
            step.x.push(first_action(game.actions1(k)));
            step.y.push(first_action(game.actions2(k)));
            continue;
        }
        let sol = matrix::solve(&local_game(game, k, lambda, 1.0 - lambda, f), matrix::DEFAULT_TOL)?;
        step.values.push(sol.value);
        step.x.push(sol.x);
        step.y.push(sol.y);
    }
    Ok(step)
}

fn first_action(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[0] = 1.0;
    v
}

/// Discounted payoff of the stationary pair `(step.x, step.y)`:
/// the solution of `w = λ g(x,y) + (1-λ) Q(x,y) w` on nonabsorbing states.
fn newton_target(game: &StochasticGame, lambda: f64, step: &ShapleyStep, fixed: &[Option<f64>]) -> Option<Vec<f64>> {
    let free: Vec<usize> = (0..game.num_states()).filter(|&k| fixed[k].is_none()).collect();
    let dim = free.len();
    let mut a = DMatrix::<f64>::identity(dim, dim);
    let mut b = DVector::<f64>::zeros(dim);
    for (row, &k) in free.iter().enumerate() {
        for (i, &xi) in step.x[k].iter().enumerate() {
            for (j, &yj) in step.y[k].iter().enumerate() {
                let p = xi * yj;
                if p == 0.0 {
                    continue;
                }
                b[row] += lambda * p * game.payoff(k, i, j);
                for &(t, q) in game.successors(k, i, j) {
                    let coef = (1.0 - lambda) * p * q;
                    match fixed[t] {
                        Some(g) => b[row] += coef * g,
                        None => {
                            let col = free.binary_search(&t).expect("free state");
                            a[(row, col)] -= coef;
                        }
                    }
                }
            }
        }
    }
    let sol = a.lu().solve(&b)?;
    let mut w: Vec<f64> = fixed.iter().map(|g| g.unwrap_or(0.0)).collect();
    for (row, &k) in free.iter().enumerate() {
        w[k] = sol[row];
    }
    Some(w)
}

/// `v_n = V_n / n` with `V_0 = 0`, `V_{t+1}(k) = val[g + E_k V_t]`.
pub fn n_stage_value(game: &StochasticGame, n: usize) -> Result<ValueVector, EvalError> {
    if n < 1 {
        return Err(EvalError::Parameter("n must be >= 1".into()));
    }
    let fixed: Vec<Option<f64>> = (0..game.num_states()).map(|k| game.absorbing_payoff(k)).collect();
    let mut v = vec![0.0; game.num_states()];
    for t in 1..=n {
        let mut next = Vec::with_capacity(v.len());
        for (k, fx) in fixed.iter().enumerate() {
            next.push(match fx {
                Some(g) => t as f64 * g,
                None => matrix::solve(&local_game(game, k, 1.0, 1.0, &v), matrix::DEFAULT_TOL)?.value,
            });
        }
        v = next;
    }
    let nf = n as f64;
    Ok(ValueVector(
        fixed
            .iter()
            .zip(v)
            .map(|(fx, total)| fx.unwrap_or(total / nf))
            .collect(),
    ))
}

/// What [`weighted_value_with`] records besides the values.
#[derive(Debug, Clone, Copy, Default)]
pub struct WeightedOptions {
    pub trace: bool,
    pub strategies: bool,
}

/// One stage of the backward recursion, in normalized form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub r: usize,
    /// Tail mass `Σ_{m >= r+1} π_m`.
    pub tail: f64,
    /// `π_{r+1} / Π_r`, absent when the tail is empty.
    pub head: Option<f64>,
    /// Value of the shifted game `v_{π^r}`, absent when the tail is empty.
    pub values: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecursionTrace {
    pub records: Vec<TraceRecord>,
}

impl RecursionTrace {
    /// CSV with columns `r, Pi_r, lambda_r, v_state_0, v_state_1, ...`.
    pub fn write_csv(&self, mut out: impl Write, num_states: usize) -> io::Result<()> {
        write!(out, "r,Pi_r,lambda_r")?;
        for k in 0..num_states {
            write!(out, ",v_state_{k}")?;
        }
        writeln!(out)?;
        for rec in &self.records {
            write!(out, "{},{:?},", rec.r, rec.tail)?;
            if let Some(h) = rec.head {
                write!(out, "{h:?}")?;
            }
            for k in 0..num_states {
                write!(out, ",")?;
                if let Some(v) = &rec.values {
                    write!(out, "{:?}", v[k])?;
                }
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSolution {
    pub values: ValueVector,
    pub trace: Option<RecursionTrace>,
    /// Optimal Markov strategies for player 1 and player 2.
    pub strategies: Option<(MarkovStrategy, MarkovStrategy)>,
}

pub fn weighted_value(game: &StochasticGame, pi: &WeightSequence) -> Result<ValueVector, EvalError> {
    Ok(weighted_value_with(game, pi, WeightedOptions::default())?.values)
}

/// `v_π` by the unnormalized backward recursion
/// `u_N = 0`, `u_r(k) = val[π_{r+1} g(k,·,·) + E_k u_{r+1}]`, `N = support_end`.
///
/// `u_0` is divided by the computed total mass, which equals 1 up to
/// rounding in the weights.
pub fn weighted_value_with(
    game: &StochasticGame,
    pi: &WeightSequence,
    opts: WeightedOptions,
) -> Result<WeightedSolution, EvalError> {
    let n_states = game.num_states();
    let fixed: Vec<Option<f64>> = (0..n_states).map(|k| game.absorbing_payoff(k)).collect();
    let horizon = pi.support_end();
    let mut u = vec![0.0; n_states];
    let mut next = vec![0.0; n_states];
    let mut tail = 0.0;

    let mut raw_trace: Vec<(f64, f64, Vec<f64>)> = Vec::new();
    let mut plans: Vec<(Plan, Plan)> = Vec::new();
    if opts.trace {
        raw_trace.reserve(horizon + 1);
        raw_trace.push((0.0, 0.0, u.clone()));
    }

    for (first, last, w) in pi.segments().rev() {
        for _stage in (first..=last).rev() {
            let new_tail = tail + w;
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for (k, fx) in fixed.iter().enumerate() {
                if let Some(g) = *fx {
                    next[k] = g * new_tail;
                    if opts.strategies {
                        xs.push(first_action(game.actions1(k)));
                        ys.push(first_action(game.actions2(k)));
                    }
                    continue;
                }
                let sol = matrix::solve(&local_game(game, k, w, 1.0, &u), matrix::DEFAULT_TOL)?;
                next[k] = sol.value;
                if opts.strategies {
                    xs.push(sol.x);
                    ys.push(sol.y);
                }
            }
            std::mem::swap(&mut u, &mut next);
            tail = new_tail;
            if opts.trace {
                raw_trace.push((tail, w, u.clone()));
            }
            if opts.strategies {
                plans.push((xs, ys));
            }
        }
    }

    let mass = tail;
    let values = ValueVector(
        fixed
            .iter()
            .zip(&u)
            .map(|(fx, &total)| fx.unwrap_or(total / mass))
            .collect(),
    );

    let trace = opts.trace.then(|| {
        // raw_trace[t] holds the record for r = horizon - t
        let records = raw_trace
            .into_iter()
            .rev()
            .enumerate()
            .map(|(r, (t, w, u))| {
                let tail_r = t / mass;
                let live = t > 0.0;
                TraceRecord {
                    r,
                    tail: tail_r,
                    head: live.then(|| w / t),
                    values: live.then(|| u.iter().map(|x| x / t).collect()),
                }
            })
            .collect();
        RecursionTrace { records }
    });

    let strategies = if opts.strategies {
        plans.reverse();
        let (xs, ys): (Vec<Plan>, Vec<Plan>) = plans.into_iter().unzip();
        Some((
            MarkovStrategy::new(game, Player::One, compress(xs))?,
            MarkovStrategy::new(game, Player::Two, compress(ys))?,
        ))
    } else {
        None
    };

    Ok(WeightedSolution { values, trace, strategies })
}

/// Merges consecutive identical per-stage plans into runs.
fn compress(per_stage: Vec<Plan>) -> Vec<(usize, Plan)> {
    let mut runs: Vec<(usize, Plan)> = Vec::new();
    for (m, plan) in per_stage.into_iter().enumerate() {
        if runs.last().is_none_or(|(_, p)| *p != plan) {
            runs.push((m + 1, plan));
        }
    }
    runs
}

/// Coefficients `c_m = m (π_m - π_{m+1})`, `m = 1..=support_end`, writing a
/// nonincreasing `π` as a convex combination of Cesàro weights.
pub fn decreasing_decomposition(pi: &WeightSequence) -> Result<Vec<f64>, EvalError> {
    let dense = pi.to_dense();
    if let Some(m) = dense.windows(2).position(|w| w[1] > w[0]) {
        return Err(WeightError::NotNonincreasing { stage: m + 2 }.into());
    }
    Ok(dense
        .iter()
        .enumerate()
        .map(|(idx, &w)| {
            let following = dense.get(idx + 1).copied().unwrap_or(0.0);
            (idx + 1) as f64 * (w - following)
        })
        .collect())
}

/// Both sides of `Σ π_m g_m = Σ c_m (1/m) Σ_{l<=m} g_l` for a payoff stream
/// covering the support.
pub fn decomposition_sides(pi: &WeightSequence, coeffs: &[f64], stream: &[f64]) -> Result<(f64, f64), EvalError> {
    let n = pi.support_end();
    if stream.len() < n || coeffs.len() < n {
        return Err(EvalError::Parameter(format!(
            "stream and coefficients must cover {n} stages"
        )));
    }
    let lhs: f64 = pi.to_dense().iter().zip(stream).map(|(p, g)| p * g).sum();
    let mut running = 0.0;
    let mut rhs = 0.0;
    for m in 0..n {
        running += stream[m];
        rhs += coeffs[m] * running / (m + 1) as f64;
    }
    Ok((lhs, rhs))
}

/// One grid point of an order fit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderPoint {
    pub lambda: f64,
    pub value: f64,
    /// `|v_λ(k) - v_{λ_min}(k)|`
    pub diff: f64,
    pub used: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderEstimate {
    /// Fitted exponent.
    pub s_hat: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log-log fit.
    pub rms_residual: f64,
    pub lambda_min: f64,
    pub reference_value: f64,
    pub points: Vec<OrderPoint>,
}

/// Heuristic Puiseux-order estimate: slope of `log|v_λ(k) - v_{λ_min}(k)|`
/// against `log λ` over the grid points whose difference exceeds `10·tol`.
pub fn order_estimate(
    game: &StochasticGame,
    grid: &[f64],
    lambda_min: f64,
    state: usize,
    tol: f64,
) -> Result<OrderEstimate, EvalError> {
    if grid.len() < 5 {
        return Err(EvalError::Parameter("order estimation needs at least 5 grid points".into()));
    }
    if grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(EvalError::Parameter("lambda grid must be strictly decreasing".into()));
    }
    if grid.iter().any(|&l| !(l > 0.0 && l < 0.1)) {
        return Err(EvalError::Parameter("grid values must lie in (0, 0.1)".into()));
    }
    if !(lambda_min > 0.0 && lambda_min < grid[grid.len() - 1]) {
        return Err(EvalError::Parameter("lambda_min must be positive and below the grid".into()));
    }
    if state >= game.num_states() {
        return Err(EvalError::Parameter(format!("state {state} out of range")));
    }
    let lambdas: Vec<f64> = grid.iter().copied().chain([lambda_min]).collect();
    let values = lambdas
        .par_iter()
        .map(|&l| discounted_value(game, l, tol).map(|s| s.values[state]))
        .collect::<Result<Vec<f64>, EvalError>>()?;
    let reference = values[grid.len()];
    let floor = 10.0 * tol;
    let points: Vec<OrderPoint> = grid
        .iter()
        .zip(&values)
        .map(|(&lambda, &value)| {
            let diff = (value - reference).abs();
            OrderPoint { lambda, value, diff, used: diff > floor }
        })
        .collect();
    let used: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.used)
        .map(|p| (p.lambda.ln(), p.diff.ln()))
        .collect();
    if used.len() < 2 {
        let max_diff = points.iter().map(|p| p.diff).fold(0.0, f64::max);
        return Err(EvalError::OrderIndistinguishable { max_diff, floor });
    }
    let (slope, intercept, rms) = least_squares(&used);
    Ok(OrderEstimate {
        s_hat: slope,
        intercept,
        rms_residual: rms,
        lambda_min,
        reference_value: reference,
        points,
    })
}

/// Ordinary least squares `y = a + b x`; returns `(b, a, rms residual)`.
fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    (slope, intercept, (rss / n).sqrt())
}

/// `(|K| |I|)^{-sqrt(|K| |I|)}` with `|I|` the largest row-action count.
pub fn order_lower_bound(game: &StochasticGame) -> f64 {
    let c = (game.num_states() * game.max_actions1()) as f64;
    c.powf(-c.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Builtin;
    use crate::weights::Parity;

    #[test]
    fn big_match_discounted_is_half() {
        let g = Builtin::BigMatch.game();
        for lambda in [0.5, 0.1, 0.01] {
            let s = discounted_value(&g, lambda, 1e-10).unwrap();
            assert!((s.values[0] - 0.5).abs() < 1e-8, "{lambda}: {:?}", s.values);
            assert_eq!(s.values[1], 1.0);
            assert_eq!(s.values[2], 0.0);
        }
        assert!(discounted_value(&g, 0.0, 1e-10).is_err());
        assert!(discounted_value(&g, 1.5, 1e-10).is_err());
    }

    #[test]
    fn oscillator_small_cases() {
        let g = Builtin::Oscillator.game();
        let v = n_stage_value(&g, 2).unwrap();
        assert_eq!(v[0], 0.5);
        let odd = weighted_value(&g, &WeightSequence::parity(5, Parity::Odd).unwrap()).unwrap();
        let even = weighted_value(&g, &WeightSequence::parity(5, Parity::Even).unwrap()).unwrap();
        assert_eq!(odd[0] - even[0], 1.0);
        assert!(n_stage_value(&g, 0).is_err());
    }

    #[test]
    fn decomposition_examples() {
        let c = decreasing_decomposition(&WeightSequence::cesaro(4).unwrap()).unwrap();
        assert_eq!(c, vec![0.0, 0.0, 0.0, 1.0]);
        let pi = WeightSequence::from_dense(&[0.5, 0.25, 0.25]).unwrap();
        let c = decreasing_decomposition(&pi).unwrap();
        assert_eq!(c, vec![0.25, 0.0, 0.75]);
        let w = WeightSequence::window(1, 2).unwrap();
        assert!(matches!(
            decreasing_decomposition(&w),
            Err(EvalError::Weight(WeightError::NotNonincreasing { stage: 2 }))
        ));
    }

    #[test]
    fn lower_bound_values() {
        let z = order_lower_bound(&Builtin::Counterexample.game());
        assert!((z - 12f64.powf(-12f64.sqrt())).abs() < 1e-15);
        assert!((z - 1.82e-4).abs() < 1e-6);
        let b = order_lower_bound(&Builtin::BigMatch.game());
        assert!((b - 1.24e-2).abs() < 1e-4);
        let one = StochasticGame::try_from(crate::game::GameSpec {
            states: vec!["a".into()],
            actions1: vec![1],
            actions2: vec![1],
            payoff: vec![vec![vec![0.5]]],
            transition: vec![vec![vec![vec![1.0]]]],
        })
        .unwrap();
        assert_eq!(order_lower_bound(&one), 1.0);
    }

    #[test]
    fn trace_invariants() {
        let g = Builtin::Counterexample.game();
        let pi = WeightSequence::blocks(2).unwrap();
        let sol = weighted_value_with(&g, &pi, WeightedOptions { trace: true, strategies: true }).unwrap();
        let trace = sol.trace.unwrap();
        assert_eq!(trace.records.len(), pi.support_end() + 1);
        assert_eq!(trace.records[0].tail, 1.0);
        assert_eq!(trace.records[0].values.as_ref().unwrap()[0], sol.values[0]);
        for w in trace.records.windows(2) {
            assert!(w[1].tail <= w[0].tail);
        }
        for rec in &trace.records {
            if let Some(h) = rec.head {
                assert!((h * rec.tail - pi.weight(rec.r + 1)).abs() < 1e-12);
            }
        }
        assert!(trace.records.last().unwrap().head.is_none());
        let mut buf = Vec::new();
        trace.write_csv(&mut buf, g.num_states()).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("r,Pi_r,lambda_r,v_state_0,v_state_1,v_state_2,v_state_3\n0,1.0,"));
        let (x, y) = sol.strategies.unwrap();
        assert_eq!((x.player(), y.player()), (Player::One, Player::Two));
    }

    #[test]
    fn order_rejects_flat_values() {
        let g = Builtin::BigMatch.game();
        let grid = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4];
        let err = order_estimate(&g, &grid, 1e-6, 0, 1e-9).unwrap_err();
        assert!(matches!(err, EvalError::OrderIndistinguishable { .. }));
        assert!(err.to_string().contains("indistinguishable from ∞"));
        assert!(order_estimate(&g, &grid[..4], 1e-6, 0, 1e-9).is_err());
        assert!(order_estimate(&g, &grid, 1e-3, 0, 1e-9).is_err());
    }
}
