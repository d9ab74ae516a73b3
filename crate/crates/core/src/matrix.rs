//! Minimax value and optimal mixed strategies of a one-shot zero-sum matrix
//! game. The row player maximizes.
//!
//! The solver first looks for a pure saddle point. Otherwise it shifts the
//! matrix to be strictly positive and runs a tableau simplex with Bland's
//! rule on the column player's LP; the row player's strategy is read off the
//! dual. If the simplex fails or the resulting duality gap exceeds the
//! tolerance, games up to 5x5 fall back to square-support enumeration.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use thiserror::Error;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Largest dimension for which support enumeration is attempted.
const ENUMERATION_LIMIT: usize = 5;
const PIVOT_EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum MatrixError {
    #[error("matrix must have at least one row and one column")]
    Empty,
    #[error("expected {expected} entries for a {rows}x{cols} matrix, found {found}")]
    Shape { rows: usize, cols: usize, expected: usize, found: usize },
    #[error("ragged matrix: row {row} has {found} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },
    #[error("tolerance must be positive, got {0}")]
    Tolerance(f64),
    #[error("no solution certified within tolerance {tol} (best gap {gap})")]
    NotCertified { tol: f64, gap: f64 },
}

/// Row-major payoff matrix of a one-shot game.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGame {
    rows: usize,
    cols: usize,
    entries: Vec<f64>,
}

impl MatrixGame {
    pub fn new(rows: usize, cols: usize, entries: Vec<f64>) -> Result<Self, MatrixError> {
        if rows == 0 || cols == 0 {
            return Err(MatrixError::Empty);
        }
        if entries.len() != rows * cols {
            return Err(MatrixError::Shape { rows, cols, expected: rows * cols, found: entries.len() });
        }
        if let Some(p) = entries.iter().position(|x| !x.is_finite()) {
            return Err(MatrixError::NonFinite { row: p / cols, col: p % cols });
        }
        Ok(MatrixGame { rows, cols, entries })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, MatrixError> {
        let cols = rows.first().map_or(0, Vec::len);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(MatrixError::Ragged { row: r, expected: cols, found: row.len() });
            }
        }
        MatrixGame::new(rows.len(), cols, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.cols + j]
    }

    /// `-Aᵀ`: the same game seen from the column player.
    pub fn negated_transpose(&self) -> MatrixGame {
        let entries = (0..self.cols)
            .flat_map(|j| (0..self.rows).map(move |i| (i, j)))
            .map(|(i, j)| -self.get(i, j))
            .collect();
        MatrixGame { rows: self.cols, cols: self.rows, entries }
    }

    pub fn shifted(&self, c: f64) -> MatrixGame {
        MatrixGame { entries: self.entries.iter().map(|x| x + c).collect(), ..self.clone() }
    }

    /// `(A y)_i` for each row.
    pub fn row_payoffs(&self, y: &[f64]) -> Vec<f64> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.get(i, j) * y[j]).sum())
            .collect()
    }

    /// `(xᵀ A)_j` for each column.
    pub fn col_payoffs(&self, x: &[f64]) -> Vec<f64> {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| x[i] * self.get(i, j)).sum())
            .collect()
    }

    /// Bounds `(min_j (xᵀA)_j, max_i (A y)_i)` enclosing the value.
    pub fn certificate(&self, x: &[f64], y: &[f64]) -> (f64, f64) {
        let lo = self.col_payoffs(x).into_iter().fold(f64::INFINITY, f64::min);
        let hi = self.row_payoffs(y).into_iter().fold(f64::NEG_INFINITY, f64::max);
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MatrixGameSolution {
    pub value: f64,
    /// Row player's optimal mixed strategy.
    pub x: Vec<f64>,
    /// Column player's optimal mixed strategy.
    pub y: Vec<f64>,
    /// `max_i (A y)_i - min_j (xᵀA)_j`, never negative.
    pub gap: f64,
}

pub fn solve(game: &MatrixGame, tol: f64) -> Result<MatrixGameSolution, MatrixError> {
    if !(tol > 0.0) {
        return Err(MatrixError::Tolerance(tol));
    }
    if let Some(sol) = saddle_point(game) {
        return Ok(sol);
    }
    let mut best_gap = f64::INFINITY;
    if let Some((x, y)) = simplex_strategies(game) {
        let sol = certify(game, x, y);
        if sol.gap <= tol {
            return Ok(sol);
        }
        best_gap = sol.gap;
    }
    if game.rows <= ENUMERATION_LIMIT && game.cols <= ENUMERATION_LIMIT {
        if let Some(sol) = support_enumeration(game, tol) {
            return Ok(sol);
        }
    }
    Err(MatrixError::NotCertified { tol, gap: best_gap })
}

fn certify(game: &MatrixGame, x: Vec<f64>, y: Vec<f64>) -> MatrixGameSolution {
    let (lo, hi) = game.certificate(&x, &y);
    MatrixGameSolution { value: 0.5 * (lo + hi), x, y, gap: (hi - lo).max(0.0) }
}

fn saddle_point(game: &MatrixGame) -> Option<MatrixGameSolution> {
    let (mut best_row, mut maxmin) = (0, f64::NEG_INFINITY);
    for i in 0..game.rows {
        let m = (0..game.cols).map(|j| game.get(i, j)).fold(f64::INFINITY, f64::min);
        if m > maxmin {
            best_row = i;
            maxmin = m;
        }
    }
    let (mut best_col, mut minmax) = (0, f64::INFINITY);
    for j in 0..game.cols {
        let m = (0..game.rows).map(|i| game.get(i, j)).fold(f64::NEG_INFINITY, f64::max);
        if m < minmax {
            best_col = j;
            minmax = m;
        }
    }
    (maxmin == minmax).then(|| MatrixGameSolution {
        value: maxmin,
        x: unit(game.rows, best_row),
        y: unit(game.cols, best_col),
        gap: 0.0,
    })
}

fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[k] = 1.0;
    v
}

/// Clamps round-off negatives and rescales to a probability vector.
fn normalize(mut v: Vec<f64>) -> Option<Vec<f64>> {
    for p in &mut v {
        if *p < 0.0 {
            *p = 0.0;
        }
    }
    let s: f64 = v.iter().sum();
    if !(s > 0.0) || !s.is_finite() {
        return None;
    }
    v.iter_mut().for_each(|p| *p /= s);
    Some(v)
}

/// Solves `max 1ᵀy s.t. B y <= 1, y >= 0` for the strictly positive shift
/// `B` of the game, returning the normalized optimal strategies.
fn simplex_strategies(game: &MatrixGame) -> Option<(Vec<f64>, Vec<f64>)> {
    let (m, n) = (game.rows, game.cols);
    let min = game.entries.iter().copied().fold(f64::INFINITY, f64::min);
    let shift = 1.0 - min;
    let width = n + m + 1;
    let rhs = n + m;
    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        for j in 0..n {
            t[i * width + j] = game.get(i, j) + shift;
        }
        t[i * width + n + i] = 1.0;
        t[i * width + rhs] = 1.0;
    }
    for j in 0..n {
        t[m * width + j] = -1.0;
    }
    let mut basis: Vec<usize> = (n..n + m).collect();

    let max_iter = 50 * (m + n) + 100;
    let mut optimal = false;
    for _ in 0..max_iter {
        // Bland: lowest-index improving column
        let Some(enter) = (0..n + m).find(|&c| t[m * width + c] < -PIVOT_EPS) else {
            optimal = true;
            break;
        };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            let a = t[i * width + enter];
            if a > PIVOT_EPS {
                let ratio = t[i * width + rhs] / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((r, best)) => {
                        let tie = (ratio - best).abs() <= PIVOT_EPS * best.abs().max(1.0);
                        if (ratio < best && !tie) || (tie && basis[i] < basis[r]) {
                            Some((i, ratio))
                        } else {
                            Some((r, best))
                        }
                    }
                };
            }
        }
        let (row, _) = leave?;
        pivot(&mut t, width, m + 1, row, enter);
        basis[row] = enter;
    }
    if !optimal {
        return None;
    }
    let z = t[m * width + rhs];
    if !(z > 0.0) {
        return None;
    }
    let mut y = vec![0.0; n];
    for (i, &b) in basis.iter().enumerate() {
        if b < n {
            y[b] = t[i * width + rhs];
        }
    }
    let x: Vec<f64> = (0..m).map(|i| t[m * width + n + i]).collect();
    Some((normalize(x)?, normalize(y)?))
}

fn pivot(t: &mut [f64], width: usize, height: usize, row: usize, col: usize) {
    let p = t[row * width + col];
    for c in 0..width {
        t[row * width + c] /= p;
    }
    for r in 0..height {
        if r == row {
            continue;
        }
        let f = t[r * width + col];
        if f != 0.0 {
            for c in 0..width {
                t[r * width + c] -= f * t[row * width + c];
            }
        }
    }
}

/// Square-support enumeration: for every pair of equal-size supports, solve
/// the indifference systems and keep the first certified pair.
fn support_enumeration(game: &MatrixGame, tol: f64) -> Option<MatrixGameSolution> {
    let (m, n) = (game.rows, game.cols);
    let mut best: Option<MatrixGameSolution> = None;
    for size in 1..=m.min(n) {
        for rows in (0..m).combinations(size) {
            for cols in (0..n).combinations(size) {
                let Some(y) = indifference(size, |a, b| game.get(rows[a], cols[b]))
                    .map(|w| scatter(n, &cols, &w))
                else {
                    continue;
                };
                let Some(x) = indifference(size, |a, b| game.get(rows[b], cols[a]))
                    .map(|w| scatter(m, &rows, &w))
                else {
                    continue;
                };
                let sol = certify(game, x, y);
                if sol.gap <= tol {
                    return Some(sol);
                }
                if best.as_ref().is_none_or(|b| sol.gap < b.gap) {
                    best = Some(sol);
                }
            }
        }
    }
    best.filter(|b| b.gap <= tol)
}

/// Solves `Σ_b a(r, b) w_b = v` for every `r`, `Σ w = 1`; returns `w` if it
/// is nonnegative.
fn indifference(size: usize, a: impl Fn(usize, usize) -> f64) -> Option<Vec<f64>> {
    let dim = size + 1;
    let mut mat = DMatrix::<f64>::zeros(dim, dim);
    let mut rhs = DVector::<f64>::zeros(dim);
    for r in 0..size {
        for b in 0..size {
            mat[(r, b)] = a(r, b);
        }
        mat[(r, size)] = -1.0;
    }
    for b in 0..size {
        mat[(size, b)] = 1.0;
    }
    rhs[size] = 1.0;
    let sol = mat.lu().solve(&rhs)?;
    let w: Vec<f64> = sol.iter().take(size).copied().collect();
    if w.iter().any(|&p| p < -1e-12 || !p.is_finite()) {
        return None;
    }
    normalize(w)
}

fn scatter(len: usize, idx: &[usize], w: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; len];
    for (&i, &p) in idx.iter().zip(w) {
        v[i] = p;
    }
    v
}
