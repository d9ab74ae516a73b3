#![allow(dead_code)]

use rand::Rng;

/// Value of a matrix game by brute force over equal-size supports, with its
/// own Gaussian elimination. Independent of the crate's solver.
pub fn enumeration_value(a: &[Vec<f64>]) -> Option<f64> {
    let (m, n) = (a.len(), a[0].len());
    for k in 1..=m.min(n) {
        for rows in subsets(m, k) {
            for cols in subsets(n, k) {
                if let Some(v) = try_supports(a, &rows, &cols) {
                    return Some(v);
                }
            }
        }
    }
    None
}

fn try_supports(a: &[Vec<f64>], rows: &[usize], cols: &[usize]) -> Option<f64> {
    let k = rows.len();
    // x over rows: Σ x_i a_ij - v = 0 for j in cols, Σ x_i = 1
    let mut sys = vec![vec![0.0; k + 2]; k + 1];
    for (r, &j) in cols.iter().enumerate() {
        for (c, &i) in rows.iter().enumerate() {
            sys[r][c] = a[i][j];
        }
        sys[r][k] = -1.0;
    }
    sys[k][..k].fill(1.0);
    sys[k][k + 1] = 1.0;
    let xs = gauss(sys)?;
    let mut sys = vec![vec![0.0; k + 2]; k + 1];
    for (r, &i) in rows.iter().enumerate() {
        for (c, &j) in cols.iter().enumerate() {
            sys[r][c] = a[i][j];
        }
        sys[r][k] = -1.0;
    }
    sys[k][..k].fill(1.0);
    sys[k][k + 1] = 1.0;
    let ys = gauss(sys)?;
    let v = xs[k];
    if xs[..k].iter().chain(&ys[..k]).any(|&p| p < -1e-12) {
        return None;
    }
    let mut x = vec![0.0; a.len()];
    for (c, &i) in rows.iter().enumerate() {
        x[i] = xs[c];
    }
    let mut y = vec![0.0; a[0].len()];
    for (c, &j) in cols.iter().enumerate() {
        y[j] = ys[c];
    }
    let col_ok = (0..a[0].len()).all(|j| (0..a.len()).map(|i| x[i] * a[i][j]).sum::<f64>() >= v - 1e-9);
    let row_ok = (0..a.len()).all(|i| (0..a[0].len()).map(|j| a[i][j] * y[j]).sum::<f64>() <= v + 1e-9);
    (col_ok && row_ok).then_some(v)
}

/// Solves an augmented `n x (n+1)` system by partial pivoting.
fn gauss(mut s: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = s.len();
    for c in 0..n {
        let p = (c..n).max_by(|&a, &b| s[a][c].abs().total_cmp(&s[b][c].abs()))?;
        if s[p][c].abs() < 1e-12 {
            return None;
        }
        s.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = s[r][c] / s[c][c];
                for t in c..=n {
                    s[r][t] -= f * s[c][t];
                }
            }
        }
    }
    Some((0..n).map(|r| s[r][n] / s[r][r]).collect())
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|mask| mask.count_ones() as usize == k)
        .map(|mask| (0..n).filter(|&i| mask & (1 << i) != 0).collect())
        .collect()
}

/// `Σ_m |π_{m+1}^p - π_m^p|` over the dense sequence followed by zeros,
/// or `max π_m` for `p = ∞`.
pub fn dense_impatience(w: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return w.iter().copied().fold(0.0, f64::max);
    }
    let mut total = 0.0;
    for m in 0..w.len() {
        let next = w.get(m + 1).copied().unwrap_or(0.0);
        total += (next.powf(p) - w[m].powf(p)).abs();
    }
    total
}

/// Random probability vector of length `len` with some exact zeros and
/// repeated values, normalized to mass 1.
pub fn random_weights(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let mut w: Vec<f64> = Vec::with_capacity(len);
    while w.len() < len {
        let x = match rng.random_range(0..4) {
            0 => 0.0,
            1 if !w.is_empty() => *w.last().unwrap(),
            _ => rng.random::<f64>(),
        };
        w.push(x);
    }
    let last = w.len() - 1;
    if w[last] == 0.0 {
        w[last] = 0.5;
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

/// Random nonincreasing probability vector of length `len`.
pub fn random_nonincreasing(rng: &mut impl Rng, len: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..len).map(|_| rng.random::<f64>() + 1e-3).collect();
    w.sort_by(|a, b| b.total_cmp(a));
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}
