//! Finite zero-sum stochastic games: model, validation, classification,
//! the builtin example games and the JSON game file format.
//!
//! Player 1 (rows) maximizes, Player 2 (columns) minimizes. Action sets may
//! differ from state to state.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Tolerance on transition row sums.
pub const ROW_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GameError {
    #[error("invalid game:\n{}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("{path}: parse error at line {line}, column {column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("unknown builtin game `{0}` (expected one of: oscillator, big_match, vigeral_prime, counterexample)")]
    UnknownBuiltin(String),
    #[error("unknown state `{0}`")]
    UnknownState(String),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| format!("  - {x}"))
        .collect::<Vec<_>>()
        .join("\n")
}

/// One well-formedness problem of a [`GameSpec`], with its coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoStates,
    /// Some array does not have the length implied by the state/action counts.
    Shape { location: String, expected: usize, found: usize },
    NoActions { state: String, player: u8 },
    NonFinite { location: String },
    PayoffOutOfRange { state: String, row: usize, col: usize, value: f64 },
    NegativeTransition { state: String, row: usize, col: usize, target: String, value: f64 },
    RowSum { state: String, row: usize, col: usize, sum: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoStates => write!(f, "game has no states"),
            Violation::Shape { location, expected, found } => {
                write!(f, "{location}: expected {expected} entries, found {found}")
            }
            Violation::NoActions { state, player } => {
                write!(f, "state {state}: player {player} has no actions")
            }
            Violation::NonFinite { location } => write!(f, "{location}: non-finite number"),
            Violation::PayoffOutOfRange { state, row, col, value } => {
                write!(f, "payoff[{state}][{row}][{col}] = {value} lies outside [0, 1]")
            }
            Violation::NegativeTransition { state, row, col, target, value } => write!(
                f,
                "transition[{state}][{row}][{col}][{target}] = {value} is negative"
            ),
            Violation::RowSum { state, row, col, sum } => write!(
                f,
                "transition[{state}][{row}][{col}] sums to {sum}, not 1"
            ),
        }
    }
}

/// Plain, unchecked description of a game. This is what files hold and what
/// [`validate`] inspects.
#[derive(Debug, Clone, PartialEq)]
pub struct GameSpec {
    pub states: Vec<String>,
    pub actions1: Vec<usize>,
    pub actions2: Vec<usize>,
    /// `payoff[k][i][j]`
    pub payoff: Vec<Vec<Vec<f64>>>,
    /// `transition[k][i][j][k']`
    pub transition: Vec<Vec<Vec<Vec<f64>>>>,
}

/// Returns every invariant violation of `spec`. Empty iff the game is well-formed.
pub fn validate(spec: &GameSpec) -> Vec<Violation> {
    let mut out = Vec::new();
    let n = spec.states.len();
    if n == 0 {
        out.push(Violation::NoStates);
        return out;
    }
    let name = |k: usize| spec.states[k].clone();
    for (label, len) in [
        ("actions1", spec.actions1.len()),
        ("actions2", spec.actions2.len()),
        ("payoff", spec.payoff.len()),
        ("transition", spec.transition.len()),
    ] {
        if len != n {
            out.push(Violation::Shape { location: label.to_string(), expected: n, found: len });
        }
    }
    if !out.is_empty() {
        return out;
    }
    for k in 0..n {
        let (m1, m2) = (spec.actions1[k], spec.actions2[k]);
        if m1 == 0 {
            out.push(Violation::NoActions { state: name(k), player: 1 });
        }
        if m2 == 0 {
            out.push(Violation::NoActions { state: name(k), player: 2 });
        }
        check_len(&mut out, format!("payoff[{}]", name(k)), m1, spec.payoff[k].len());
        check_len(&mut out, format!("transition[{}]", name(k)), m1, spec.transition[k].len());
        for i in 0..m1.min(spec.payoff[k].len()) {
            let row = &spec.payoff[k][i];
            check_len(&mut out, format!("payoff[{}][{i}]", name(k)), m2, row.len());
            for (j, &g) in row.iter().enumerate().take(m2) {
                if !g.is_finite() {
                    out.push(Violation::NonFinite { location: format!("payoff[{}][{i}][{j}]", name(k)) });
                } else if !(0.0..=1.0).contains(&g) {
                    out.push(Violation::PayoffOutOfRange { state: name(k), row: i, col: j, value: g });
                }
            }
        }
        for i in 0..m1.min(spec.transition[k].len()) {
            let row = &spec.transition[k][i];
            check_len(&mut out, format!("transition[{}][{i}]", name(k)), m2, row.len());
            for (j, probs) in row.iter().enumerate().take(m2) {
                let loc = format!("transition[{}][{i}][{j}]", name(k));
                if probs.len() != n {
                    out.push(Violation::Shape { location: loc, expected: n, found: probs.len() });
                    continue;
                }
                let mut finite = true;
                for (t, &p) in probs.iter().enumerate() {
                    if !p.is_finite() {
                        out.push(Violation::NonFinite { location: format!("{loc}[{}]", name(t)) });
                        finite = false;
                    } else if p < 0.0 {
                        out.push(Violation::NegativeTransition {
                            state: name(k),
                            row: i,
                            col: j,
                            target: name(t),
                            value: p,
                        });
                    }
                }
                let sum: f64 = probs.iter().sum();
                if finite && (sum - 1.0).abs() > ROW_SUM_TOL {
                    out.push(Violation::RowSum { state: name(k), row: i, col: j, sum });
                }
            }
        }
    }
    out
}

fn check_len(out: &mut Vec<Violation>, location: String, expected: usize, found: usize) {
    if expected != found {
        out.push(Violation::Shape { location, expected, found });
    }
}

/// A validated stochastic game. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticGame {
    names: Vec<String>,
    actions1: Vec<usize>,
    actions2: Vec<usize>,
    /// `payoff[k][i * actions2[k] + j]`
    payoff: Vec<Vec<f64>>,
    /// `transition[k][i * actions2[k] + j]` is a dense distribution over states.
    transition: Vec<Vec<Vec<f64>>>,
    /// Nonzero entries of each transition row.
    successors: Vec<Vec<Vec<(usize, f64)>>>,
}

impl TryFrom<GameSpec> for StochasticGame {
    type Error = GameError;

    fn try_from(spec: GameSpec) -> Result<Self, GameError> {
        let violations = validate(&spec);
        if !violations.is_empty() {
            return Err(GameError::Invalid(violations));
        }
        let GameSpec { states, actions1, actions2, payoff, transition } = spec;
        let payoff: Vec<Vec<f64>> = payoff.into_iter().map(|m| m.concat()).collect();
        let transition: Vec<Vec<Vec<f64>>> = transition.into_iter().map(|m| m.concat()).collect();
        let successors = transition
            .iter()
            .map(|cells| {
                cells
                    .iter()
                    .map(|p| p.iter().copied().enumerate().filter(|&(_, x)| x > 0.0).collect())
                    .collect()
            })
            .collect();
        Ok(StochasticGame { names: states, actions1, actions2, payoff, transition, successors })
    }
}

impl StochasticGame {
    pub fn num_states(&self) -> usize {
        self.names.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.names
    }

    pub fn state_name(&self, k: usize) -> &str {
        &self.names[k]
    }

    /// Looks a state up by name, or by its decimal index.
    pub fn state_index(&self, key: &str) -> Result<usize, GameError> {
        if let Some(k) = self.names.iter().position(|s| s == key) {
            return Ok(k);
        }
        match key.parse::<usize>() {
            Ok(k) if k < self.num_states() => Ok(k),
            _ => Err(GameError::UnknownState(key.to_string())),
        }
    }

    pub fn actions1(&self, k: usize) -> usize {
        self.actions1[k]
    }

    pub fn actions2(&self, k: usize) -> usize {
        self.actions2[k]
    }

    /// Action count of `player` (1 or 2) in state `k`.
    pub fn actions(&self, player: u8, k: usize) -> usize {
        if player == 1 {
            self.actions1[k]
        } else {
            self.actions2[k]
        }
    }

    pub fn max_actions1(&self) -> usize {
        self.actions1.iter().copied().max().unwrap_or(0)
    }

    pub fn payoff(&self, k: usize, i: usize, j: usize) -> f64 {
        self.payoff[k][i * self.actions2[k] + j]
    }

    pub fn transition(&self, k: usize, i: usize, j: usize) -> &[f64] {
        &self.transition[k][i * self.actions2[k] + j]
    }

    /// Nonzero `(state, probability)` pairs of `q(k, i, j)`.
    pub fn successors(&self, k: usize, i: usize, j: usize) -> &[(usize, f64)] {
        &self.successors[k][i * self.actions2[k] + j]
    }

    /// Expected value of `f` at the next state after `(k, i, j)`.
    pub fn expect(&self, k: usize, i: usize, j: usize, f: &[f64]) -> f64 {
        self.successors(k, i, j).iter().map(|&(t, p)| p * f[t]).sum()
    }

    /// `k` is absorbing iff every action pair keeps it with probability
    /// exactly 1 and all its payoffs are exactly equal.
    pub fn is_absorbing(&self, k: usize) -> bool {
        let first = self.payoff[k][0];
        self.payoff[k].iter().all(|&g| g == first)
            && self.transition[k].iter().all(|p| p[k] == 1.0)
    }

    /// Payoff of an absorbing state, `None` otherwise.
    pub fn absorbing_payoff(&self, k: usize) -> Option<f64> {
        self.is_absorbing(k).then(|| self.payoff[k][0])
    }

    pub fn absorbing_states(&self) -> BTreeSet<usize> {
        (0..self.num_states()).filter(|&k| self.is_absorbing(k)).collect()
    }

    /// At most one nonabsorbing state.
    pub fn is_absorbing_game(&self) -> bool {
        self.num_states() - self.absorbing_states().len() <= 1
    }

    pub fn to_spec(&self) -> GameSpec {
        let n = self.num_states();
        let payoff = (0..n)
            .map(|k| self.payoff[k].chunks(self.actions2[k]).map(<[f64]>::to_vec).collect())
            .collect();
        let transition = (0..n)
            .map(|k| {
                self.transition[k]
                    .chunks(self.actions2[k])
                    .map(<[Vec<f64>]>::to_vec)
                    .collect()
            })
            .collect();
        GameSpec {
            states: self.names.clone(),
            actions1: self.actions1.clone(),
            actions2: self.actions2.clone(),
            payoff,
            transition,
        }
    }

    /// Diagnostics for this game (always empty for a constructed game).
    pub fn validate(&self) -> Vec<Violation> {
        validate(&self.to_spec())
    }

    pub fn to_json(&self) -> String {
        let file = GameFile::from(&self.to_spec());
        let mut s = serde_json::to_string_pretty(&file).expect("game serialization cannot fail");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, origin: &str) -> Result<Self, GameError> {
        let file: GameFile = serde_json::from_str(text).map_err(|e| GameError::Parse {
            path: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        StochasticGame::try_from(GameSpec::from(file))
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GameError> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|source| GameError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GameError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| GameError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text, &path.display().to_string())
    }
}

/// A real number written as a decimal string. Uses the shortest
/// representation that parses back to the same `f64`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Decimal(f64);

impl Serialize for Decimal {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{:?}", self.0))
    }
}

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.trim()
            .parse::<f64>()
            .map(Decimal)
            .map_err(|_| de::Error::custom(format!("`{s}` is not a decimal number")))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GameFile {
    states: Vec<String>,
    actions1: Vec<usize>,
    actions2: Vec<usize>,
    payoff: Vec<Vec<Vec<Decimal>>>,
    transition: Vec<Vec<Vec<Vec<Decimal>>>>,
}

impl From<&GameSpec> for GameFile {
    fn from(g: &GameSpec) -> Self {
        let wrap = |v: &Vec<f64>| v.iter().map(|&x| Decimal(x)).collect::<Vec<_>>();
        GameFile {
            states: g.states.clone(),
            actions1: g.actions1.clone(),
            actions2: g.actions2.clone(),
            payoff: g.payoff.iter().map(|m| m.iter().map(wrap).collect()).collect(),
            transition: g
                .transition
                .iter()
                .map(|m| m.iter().map(|r| r.iter().map(wrap).collect()).collect())
                .collect(),
        }
    }
}

impl From<GameFile> for GameSpec {
    fn from(f: GameFile) -> Self {
        let unwrap = |v: Vec<Decimal>| v.into_iter().map(|x| x.0).collect::<Vec<_>>();
        GameSpec {
            states: f.states,
            actions1: f.actions1,
            actions2: f.actions2,
            payoff: f
                .payoff
                .into_iter()
                .map(|m| m.into_iter().map(unwrap).collect())
                .collect(),
            transition: f
                .transition
                .into_iter()
                .map(|m| m.into_iter().map(|r| r.into_iter().map(unwrap).collect()).collect())
                .collect(),
        }
    }
}

/// The builtin example games.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    /// Two states with payoffs 1 and 0, swapping deterministically.
    Oscillator,
    /// Gillette's Big Match.
    BigMatch,
    /// The counterexample game without the `M` row.
    VigeralPrime,
    /// The four-state game with actions `{T, M, B} x {L, R}` in `ω1`, `ω2`.
    Counterexample,
}

impl Builtin {
    pub const ALL: [Builtin; 4] =
        [Builtin::Oscillator, Builtin::BigMatch, Builtin::VigeralPrime, Builtin::Counterexample];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Oscillator => "oscillator",
            Builtin::BigMatch => "big_match",
            Builtin::VigeralPrime => "vigeral_prime",
            Builtin::Counterexample => "counterexample",
        }
    }

    pub fn game(self) -> StochasticGame {
        let spec = match self {
            Builtin::Oscillator => oscillator(),
            Builtin::BigMatch => big_match(),
            Builtin::VigeralPrime => four_state(false),
            Builtin::Counterexample => four_state(true),
        };
        StochasticGame::try_from(spec).expect("builtin games are well-formed")
    }
}

impl FromStr for Builtin {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, GameError> {
        Builtin::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| GameError::UnknownBuiltin(s.to_string()))
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn builtin(name: &str) -> Result<StochasticGame, GameError> {
    Ok(name.parse::<Builtin>()?.game())
}

/// Action indices shared by the Big Match and the counterexample games.
pub mod labels {
    pub const T: usize = 0;
    /// Only in the counterexample game.
    pub const M: usize = 1;
    /// `B` in the counterexample game; in the Big Match and `vigeral_prime` `B` is 1.
    pub const B: usize = 2;
    pub const L: usize = 0;
    pub const R: usize = 1;
}

fn point(n: usize, k: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    v[k] = 1.0;
    v
}

fn oscillator() -> GameSpec {
    GameSpec {
        states: vec!["s1".into(), "s0".into()],
        actions1: vec![1, 1],
        actions2: vec![1, 1],
        payoff: vec![vec![vec![1.0]], vec![vec![0.0]]],
        transition: vec![vec![vec![point(2, 1)]], vec![vec![point(2, 0)]]],
    }
}

fn big_match() -> GameSpec {
    const W: usize = 0;
    const ONE: usize = 1;
    const ZERO: usize = 2;
    GameSpec {
        states: vec!["ω".into(), "1*".into(), "0*".into()],
        actions1: vec![2, 1, 1],
        actions2: vec![2, 1, 1],
        payoff: vec![
            vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            vec![vec![1.0]],
            vec![vec![0.0]],
        ],
        transition: vec![
            vec![
                vec![point(3, ONE), point(3, ZERO)],
                vec![point(3, W), point(3, W)],
            ],
            vec![vec![point(3, ONE)]],
            vec![vec![point(3, ZERO)]],
        ],
    }
}

fn four_state(with_m: bool) -> GameSpec {
    const W1: usize = 0;
    const W2: usize = 1;
    const ONE: usize = 2;
    const ZERO: usize = 3;
    let p = |k| point(4, k);
    // rows T, M, B; columns L, R; entries (payoff, next state)
    let omega1 = [
        [(1.0, W1), (1.0, W2)],
        [(0.0, W1), (0.0, W1)],
        [(1.0, W2), (1.0, ONE)],
    ];
    let omega2 = [
        [(0.0, W2), (0.0, W1)],
        [(0.0, W2), (0.0, W2)],
        [(0.0, W1), (0.0, ZERO)],
    ];
    let rows: &[usize] = if with_m { &[0, 1, 2] } else { &[0, 2] };
    let pay = |t: &[[(f64, usize); 2]; 3]| -> Vec<Vec<f64>> {
        rows.iter().map(|&i| t[i].iter().map(|c| c.0).collect()).collect()
    };
    let trans = |t: &[[(f64, usize); 2]; 3]| -> Vec<Vec<Vec<f64>>> {
        rows.iter().map(|&i| t[i].iter().map(|c| p(c.1)).collect()).collect()
    };
    GameSpec {
        states: vec!["ω1".into(), "ω2".into(), "1*".into(), "0*".into()],
        actions1: vec![rows.len(), rows.len(), 1, 1],
        actions2: vec![2, 2, 1, 1],
        payoff: vec![pay(&omega1), pay(&omega2), vec![vec![1.0]], vec![vec![0.0]]],
        transition: vec![
            trans(&omega1),
            trans(&omega2),
            vec![vec![p(ONE)]],
            vec![vec![p(ZERO)]],
        ],
    }
}
