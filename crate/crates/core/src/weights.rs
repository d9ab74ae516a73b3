//! Finite-support probability sequences on stages `1, 2, ...`, stored as
//! runs of equal weight, together with the named weight families and the
//! p-impatience functionals.

use std::fmt;
use std::fs;
use std::str::FromStr;

use thiserror::Error;

/// Tolerance on the total mass of a sequence.
pub const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum WeightError {
    #[error("parameter out of range: {0}")]
    Parameter(String),
    #[error("run {index} has zero length")]
    EmptyRun { index: usize },
    #[error("run {index} has invalid weight {weight}")]
    BadWeight { index: usize, weight: f64 },
    #[error("sequence has no positive weight")]
    EmptySupport,
    #[error("total mass is {0}, not 1")]
    Mass(f64),
    #[error("correction weight at stage {stage} would be {weight} < 0")]
    NegativeCorrection { stage: usize, weight: f64 },
    #[error("impatience exponent must be positive, got {0}")]
    Exponent(f64),
    #[error("sequence is not nonincreasing at stage {stage}")]
    NotNonincreasing { stage: usize },
    #[error("cannot parse weight expression `{input}`: {reason}")]
    Syntax { input: String, reason: String },
    #[error("{path}: {reason}")]
    File { path: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Run {
    pub len: usize,
    pub weight: f64,
}

/// A probability distribution on stages with finite support.
///
/// Canonical form: adjacent runs of equal weight are merged and trailing
/// zero runs are dropped, so the last run always carries positive weight.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSequence {
    runs: Vec<Run>,
    /// First stage of each run (1-based).
    starts: Vec<usize>,
    support_end: usize,
}

impl WeightSequence {
    pub fn from_runs(runs: impl IntoIterator<Item = (usize, f64)>) -> Result<Self, WeightError> {
        let mut merged: Vec<Run> = Vec::new();
        for (index, (len, weight)) in runs.into_iter().enumerate() {
            if len == 0 {
                return Err(WeightError::EmptyRun { index });
            }
            if !weight.is_finite() || weight < 0.0 {
                return Err(WeightError::BadWeight { index, weight });
            }
            match merged.last_mut() {
                Some(last) if last.weight == weight => last.len += len,
                _ => merged.push(Run { len, weight }),
            }
        }
        while merged.last().is_some_and(|r| r.weight == 0.0) {
            merged.pop();
        }
        if merged.is_empty() {
            return Err(WeightError::EmptySupport);
        }
        let mass: f64 = merged.iter().map(|r| r.len as f64 * r.weight).sum();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(WeightError::Mass(mass));
        }
        let mut starts = Vec::with_capacity(merged.len());
        let mut next = 1;
        for r in &merged {
            starts.push(next);
            next += r.len;
        }
        Ok(WeightSequence { runs: merged, starts, support_end: next - 1 })
    }

    pub fn from_dense(weights: &[f64]) -> Result<Self, WeightError> {
        Self::from_runs(weights.iter().map(|&w| (1, w)))
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    /// Last stage with positive weight.
    pub fn support_end(&self) -> usize {
        self.support_end
    }

    pub fn mass(&self) -> f64 {
        self.runs.iter().map(|r| r.len as f64 * r.weight).sum()
    }

    /// Weight of stage `m` (1-based); zero outside the support.
    pub fn weight(&self, m: usize) -> f64 {
        if m == 0 || m > self.support_end {
            return 0.0;
        }
        let idx = self.starts.partition_point(|&s| s <= m) - 1;
        self.runs[idx].weight
    }

    /// Runs as `(first_stage, last_stage, weight)`.
    pub fn segments(&self) -> impl DoubleEndedIterator<Item = (usize, usize, f64)> + '_ {
        self.runs
            .iter()
            .zip(&self.starts)
            .map(|(r, &s)| (s, s + r.len - 1, r.weight))
    }

    /// Weights of stages `1..=support_end`.
    pub fn to_dense(&self) -> Vec<f64> {
        self.runs
            .iter()
            .flat_map(|r| std::iter::repeat_n(r.weight, r.len))
            .collect()
    }

    pub fn max_weight(&self) -> f64 {
        self.runs.iter().map(|r| r.weight).fold(0.0, f64::max)
    }

    pub fn is_nonincreasing(&self) -> bool {
        self.runs.windows(2).all(|w| w[1].weight <= w[0].weight)
    }

    /// Uniform on `{1, ..., n}`.
    pub fn cesaro(n: usize) -> Result<Self, WeightError> {
        if n < 1 {
            return Err(WeightError::Parameter("cesaro requires n >= 1".into()));
        }
        Self::from_runs([(n, 1.0 / n as f64)])
    }

    /// `λ(1-λ)^{m-1}` truncated at the smallest `N` with `(1-λ)^N <= eps`;
    /// the tail mass is added to stage `N`.
    pub fn discounted(lambda: f64, eps: f64) -> Result<Self, WeightError> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(WeightError::Parameter(format!("lambda = {lambda} not in (0, 1]")));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(WeightError::Parameter(format!("eps = {eps} not in (0, 1)")));
        }
        let keep = 1.0 - lambda;
        let horizon = discount_horizon(lambda, eps);
        let mut dense: Vec<f64> =
            (0..horizon).map(|m| lambda * keep.powi(m as i32)).collect();
        dense[horizon - 1] += keep.powi(horizon as i32);
        Self::from_dense(&dense)
    }

    /// Uniform on `{l+1, ..., l+n}`.
    pub fn window(l: usize, n: usize) -> Result<Self, WeightError> {
        if n < 1 {
            return Err(WeightError::Parameter("window requires n >= 1".into()));
        }
        Self::from_runs([(l, 0.0), (n, 1.0 / n as f64)].into_iter().filter(|r| r.0 > 0))
    }

    /// Uniform on the first `half` even (or odd) stages.
    pub fn parity(half: usize, side: Parity) -> Result<Self, WeightError> {
        if half < 1 {
            return Err(WeightError::Parameter("parity requires half >= 1".into()));
        }
        let w = 1.0 / half as f64;
        let pattern = match side {
            Parity::Odd => [(1, w), (1, 0.0)],
            Parity::Even => [(1, 0.0), (1, w)],
        };
        Self::from_runs(std::iter::repeat_n(pattern, half).flatten())
    }

    /// Weight `n⁻⁴` on the blocks `{l(n+n⁵)+1, ..., l(n+n⁵)+n}`,
    /// `l = 0, ..., n³-1`, zero elsewhere.
    pub fn blocks(n: usize) -> Result<Self, WeightError> {
        if n < 2 {
            return Err(WeightError::Parameter("block weights require n >= 2".into()));
        }
        let gap = n.pow(5);
        let w = (n as f64).powi(-4);
        let blocks = n.pow(3);
        Self::from_runs((0..blocks).flat_map(|_| [(n, w), (gap, 0.0)]))
    }

    /// Blocks of length `N1 = ⌊n^{2-ε}⌋` separated by `n⁵` stages,
    /// `N2 = ⌊n^{2+ε}⌋` of them, weight `n⁻⁴` on block stages. Stage `N1+1`
    /// carries the remaining mass.
    pub fn blocks_eps(n: usize, eps: f64) -> Result<Self, WeightError> {
        if n < 2 {
            return Err(WeightError::Parameter("block weights require n >= 2".into()));
        }
        if !(eps > 0.0 && eps <= 0.5) {
            return Err(WeightError::Parameter(format!("eps = {eps} not in (0, 1/2]")));
        }
        let (n1, n2) = eps_block_counts(n, eps);
        if n1 == 0 || n2 == 0 {
            return Err(WeightError::Parameter(format!("empty block structure for n = {n}, eps = {eps}")));
        }
        let gap = n.pow(5);
        let w = (n as f64).powi(-4);
        let correction = 1.0 - (n1 * n2) as f64 * w;
        if correction < 0.0 {
            return Err(WeightError::NegativeCorrection { stage: n1 + 1, weight: correction });
        }
        let mut runs = Vec::with_capacity(2 * n2 + 2);
        runs.push((n1, w));
        runs.push((1, correction));
        runs.push((gap - 1, 0.0));
        for _ in 1..n2 {
            runs.push((n1, w));
            runs.push((gap, 0.0));
        }
        Self::from_runs(runs)
    }
}

/// `(N1, N2) = (⌊n^{2-ε}⌋, ⌊n^{2+ε}⌋)`.
pub fn eps_block_counts(n: usize, eps: f64) -> (usize, usize) {
    let nf = n as f64;
    (nf.powf(2.0 - eps).floor() as usize, nf.powf(2.0 + eps).floor() as usize)
}

/// Smallest `N >= 1` with `(1-λ)^N <= eps`.
fn discount_horizon(lambda: f64, eps: f64) -> usize {
    let keep = 1.0 - lambda;
    if keep <= 0.0 {
        return 1;
    }
    let mut n = ((eps.ln() / keep.ln()).ceil() as usize).max(1);
    while n > 1 && keep.powi((n - 1) as i32) <= eps {
        n -= 1;
    }
    while keep.powi(n as i32) > eps {
        n += 1;
    }
    n
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// p-impatience. Finite `p` gives `Σ_{m>=1} |π_{m+1}^p - π_m^p|` (the
/// sequence continues with zeros past its support); `p = ∞` gives `sup π_m`.
pub fn impatience(pi: &WeightSequence, p: f64) -> Result<f64, WeightError> {
    if !(p > 0.0) {
        return Err(WeightError::Exponent(p));
    }
    if p.is_infinite() {
        return Ok(pi.max_weight());
    }
    let powers: Vec<f64> = pi.runs.iter().map(|r| r.weight.powf(p)).collect();
    let inner: f64 = powers.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    Ok(inner + powers.last().copied().unwrap_or(0.0))
}

/// Parsed form of the weight mini-language, e.g. `cesaro:n=100` or
/// `discounted:lambda=0.01,eps=1e-6`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightExpr {
    Cesaro { n: usize },
    Discounted { lambda: f64, eps: f64 },
    Window { l: usize, n: usize },
    ZBlocks { n: usize },
    ZBlocksEps { n: usize, eps: f64 },
    Parity { half: usize, side: Parity },
    /// Explicit runs, one `length weight` pair per line.
    File { path: String },
}

impl WeightExpr {
    pub fn build(&self) -> Result<WeightSequence, WeightError> {
        match *self {
            WeightExpr::Cesaro { n } => WeightSequence::cesaro(n),
            WeightExpr::Discounted { lambda, eps } => WeightSequence::discounted(lambda, eps),
            WeightExpr::Window { l, n } => WeightSequence::window(l, n),
            WeightExpr::ZBlocks { n } => WeightSequence::blocks(n),
            WeightExpr::ZBlocksEps { n, eps } => WeightSequence::blocks_eps(n, eps),
            WeightExpr::Parity { half, side } => WeightSequence::parity(half, side),
            WeightExpr::File { ref path } => read_runs_file(path),
        }
    }
}

fn read_runs_file(path: &str) -> Result<WeightSequence, WeightError> {
    let file_err = |reason: String| WeightError::File { path: path.to_string(), reason };
    let text = fs::read_to_string(path).map_err(|e| file_err(e.to_string()))?;
    let mut runs = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(len), Some(w), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(file_err(format!("line {}: expected `length weight`", no + 1)));
        };
        let len = len
            .parse::<usize>()
            .map_err(|e| file_err(format!("line {}: length: {e}", no + 1)))?;
        let w = w
            .parse::<f64>()
            .map_err(|e| file_err(format!("line {}: weight: {e}", no + 1)))?;
        runs.push((len, w));
    }
    WeightSequence::from_runs(runs)
}

impl FromStr for WeightExpr {
    type Err = WeightError;

    fn from_str(input: &str) -> Result<Self, WeightError> {
        let syntax = |reason: &str| WeightError::Syntax { input: input.to_string(), reason: reason.to_string() };
        let (family, rest) = input.split_once(':').ok_or_else(|| syntax("missing `family:`"))?;
        if family == "file" {
            if rest.is_empty() {
                return Err(syntax("missing path"));
            }
            return Ok(WeightExpr::File { path: rest.to_string() });
        }
        let mut params: Vec<(&str, &str)> = Vec::new();
        for item in rest.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| syntax("expected key=value"))?;
            params.push((k.trim(), v.trim()));
        }
        let take = |key: &str| -> Result<&str, WeightError> {
            params
                .iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| *v)
                .ok_or_else(|| syntax(&format!("missing `{key}`")))
        };
        let int = |key: &str| -> Result<usize, WeightError> {
            take(key)?.parse().map_err(|_| syntax(&format!("`{key}` must be a nonnegative integer")))
        };
        let real = |key: &str| -> Result<f64, WeightError> {
            take(key)?.parse().map_err(|_| syntax(&format!("`{key}` must be a number")))
        };
        let allowed: &[&str] = match family {
            "cesaro" | "zblocks" => &["n"],
            "discounted" => &["lambda", "eps"],
            "window" => &["l", "n"],
            "zblocks-eps" => &["n", "eps"],
            "parity" => &["half", "side"],
            _ => return Err(syntax("unknown family")),
        };
        if let Some((k, _)) = params.iter().find(|(k, _)| !allowed.contains(k)) {
            return Err(syntax(&format!("unexpected parameter `{k}`")));
        }
        Ok(match family {
            "cesaro" => WeightExpr::Cesaro { n: int("n")? },
            "zblocks" => WeightExpr::ZBlocks { n: int("n")? },
            "discounted" => WeightExpr::Discounted { lambda: real("lambda")?, eps: real("eps")? },
            "window" => WeightExpr::Window { l: int("l")?, n: int("n")? },
            "zblocks-eps" => WeightExpr::ZBlocksEps { n: int("n")?, eps: real("eps")? },
            "parity" => WeightExpr::Parity {
                half: int("half")?,
                side: match take("side")? {
                    "even" => Parity::Even,
                    "odd" => Parity::Odd,
                    _ => return Err(syntax("`side` must be even or odd")),
                },
            },
            _ => unreachable!(),
        })
    }
}

impl fmt::Display for WeightExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightExpr::Cesaro { n } => write!(f, "cesaro:n={n}"),
            WeightExpr::Discounted { lambda, eps } => write!(f, "discounted:lambda={lambda:?},eps={eps:?}"),
            WeightExpr::Window { l, n } => write!(f, "window:l={l},n={n}"),
            WeightExpr::ZBlocks { n } => write!(f, "zblocks:n={n}"),
            WeightExpr::ZBlocksEps { n, eps } => write!(f, "zblocks-eps:n={n},eps={eps:?}"),
            WeightExpr::Parity { half, side } => {
                let side = match side {
                    Parity::Even => "even",
                    Parity::Odd => "odd",
                };
                write!(f, "parity:half={half},side={side}")
            }
            WeightExpr::File { path } => write!(f, "file:{path}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "{a} vs {b}");
    }

    #[test]
    fn cesaro_and_window() {
        let c = WeightSequence::cesaro(3).unwrap();
        assert_eq!(c.to_dense(), vec![1.0 / 3.0; 3]);
        let w = WeightSequence::window(2, 2).unwrap();
        assert_eq!(w.to_dense(), vec![0.0, 0.0, 0.5, 0.5]);
        assert_eq!(w.support_end(), 4);
        assert_eq!(w.weight(3), 0.5);
        assert_eq!(w.weight(5), 0.0);
        assert_eq!(WeightSequence::window(0, 4).unwrap(), WeightSequence::cesaro(4).unwrap());
    }

    #[test]
    fn discounted_truncation() {
        let d = WeightSequence::discounted(0.5, 0.1).unwrap();
        assert_eq!(d.support_end(), 4);
        assert_eq!(d.to_dense(), vec![0.5, 0.25, 0.125, 0.125]);
        let d = WeightSequence::discounted(1.0, 0.1).unwrap();
        assert_eq!(d.to_dense(), vec![1.0]);
        let d = WeightSequence::discounted(0.01, 1e-6).unwrap();
        let n = d.support_end();
        assert!(0.99f64.powi(n as i32) <= 1e-6 && 0.99f64.powi(n as i32 - 1) > 1e-6);
        assert!(WeightSequence::discounted(0.0, 0.1).is_err());
        assert!(WeightSequence::discounted(0.5, 1.0).is_err());
    }

    #[test]
    fn parity_supports() {
        let odd = WeightSequence::parity(3, Parity::Odd).unwrap();
        assert_eq!(odd.to_dense(), vec![1. / 3., 0., 1. / 3., 0., 1. / 3.]);
        let even = WeightSequence::parity(2, Parity::Even).unwrap();
        assert_eq!(even.to_dense(), vec![0., 0.5, 0., 0.5]);
    }

    #[test]
    fn blocks_layout() {
        let z = WeightSequence::blocks(2).unwrap();
        assert_eq!(z.support_end(), 240);
        let segs: Vec<_> = z.segments().filter(|s| s.2 > 0.0).collect();
        assert_eq!(segs.len(), 8);
        for (l, &(a, b, w)) in segs.iter().enumerate() {
            assert_eq!((a, b, w), (34 * l + 1, 34 * l + 2, 1.0 / 16.0));
        }
        close(WeightSequence::blocks(3).unwrap().mass(), 1.0, 1e-12);
        for n in 2..=5 {
            let z = WeightSequence::blocks(n).unwrap();
            let nf = n as f64;
            close(impatience(&z, 1.0).unwrap(), (2.0 * nf.powi(3) - 1.0) * nf.powi(-4), 1e-12);
            assert_eq!(impatience(&z, f64::INFINITY).unwrap(), nf.powi(-4));
        }
        assert!(WeightSequence::blocks(1).is_err());
    }

    #[test]
    fn blocks_eps_layout() {
        assert_eq!(eps_block_counts(2, 0.5), (2, 5));
        let z = WeightSequence::blocks_eps(2, 0.5).unwrap();
        close(z.mass(), 1.0, 1e-12);
        let blocks = z.segments().filter(|s| s.2 == 1.0 / 16.0).count();
        assert_eq!(blocks, 5);
        let correction = z.weight(3);
        close(correction, 1.0 - 10.0 / 16.0, 1e-15);
        // up to the correction, down to the gap, then four blocks up and down
        close(impatience(&z, 1.0).unwrap(), (5.0 + 6.0 + 8.0) / 16.0, 1e-15);
        assert!(WeightSequence::blocks_eps(2, 0.7).is_err());
    }

    #[test]
    fn impatience_examples() {
        let c = WeightSequence::cesaro(4).unwrap();
        close(impatience(&c, 2.0).unwrap(), 1.0 / 16.0, 1e-15);
        for l in [1, 5, 40] {
            for s in [0.3, 1.0, 2.5] {
                let w = WeightSequence::window(l, 7).unwrap();
                close(impatience(&w, s).unwrap(), 2.0 * 7f64.powf(-s), 1e-14);
            }
        }
        assert_eq!(impatience(&c, 0.0), Err(WeightError::Exponent(0.0)));
        assert!(impatience(&c, -1.0).is_err());
    }

    #[test]
    fn rejects_bad_sequences() {
        assert_eq!(WeightSequence::from_runs([(1, 0.5)]), Err(WeightError::Mass(0.5)));
        assert_eq!(WeightSequence::from_runs([(0, 1.0)]), Err(WeightError::EmptyRun { index: 0 }));
        assert!(matches!(
            WeightSequence::from_runs([(1, -0.5), (1, 1.5)]),
            Err(WeightError::BadWeight { index: 0, .. })
        ));
        assert_eq!(WeightSequence::from_runs([(3, 0.0)]), Err(WeightError::EmptySupport));
    }

    #[test]
    fn expression_round_trip() {
        for s in [
            "cesaro:n=100",
            "discounted:lambda=0.01,eps=1e-6",
            "window:l=50,n=100",
            "zblocks:n=4",
            "zblocks-eps:n=4,eps=0.25",
            "parity:half=50,side=even",
            "file:/tmp/x.txt",
        ] {
            let e: WeightExpr = s.parse().unwrap();
            assert_eq!(e.to_string().parse::<WeightExpr>().unwrap(), e, "{s}");
        }
        assert!("cesaro".parse::<WeightExpr>().is_err());
        assert!("cesaro:m=3".parse::<WeightExpr>().is_err());
        assert!("bogus:n=3".parse::<WeightExpr>().is_err());
        assert!("parity:half=3,side=left".parse::<WeightExpr>().is_err());
    }

    #[test]
    fn runs_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.txt");
        fs::write(&path, "# two runs\n2 0.25\n1 0.5\n").unwrap();
        let e: WeightExpr = format!("file:{}", path.display()).parse().unwrap();
        assert_eq!(e.build().unwrap().to_dense(), vec![0.25, 0.25, 0.5]);
        fs::write(&path, "2 0.25 7\n").unwrap();
        assert!(matches!(e.build(), Err(WeightError::File { .. })));
    }
}
