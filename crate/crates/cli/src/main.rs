mod report;

use std::fmt;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use weightlab::evaluator::{weighted_value_with, EvalError, WeightedOptions};
use weightlab::playlab::{self, PlayError, ReportBudget};
use weightlab::random::random_game;
use weightlab::{
    builtin, discounted_value, impatience, n_stage_value, order_estimate, order_lower_bound, GameError,
    MarkovStrategy, Player, StochasticGame, WeightExpr, WeightSequence,
};

use report::{Report, Table};

#[derive(Parser)]
#[command(name = "weightlab", version, about = "Stochastic games under general stage weights")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize, Deserialize, Clone, Debug)]
#[serde(tag = "command", rename_all = "kebab-case")]
enum Command {
    /// Value of a weighted evaluation in every state.
    Solve(SolveArgs),
    /// p-impatience of a weight sequence.
    Impatience(ImpatienceArgs),
    /// Log-log estimate of the order of v_λ near 0.
    Order(OrderArgs),
    /// Block-weight counterexample table for the four-state game.
    Counterexample(CounterexampleArgs),
    /// Worst window payoff of stationary Big Match strategies.
    Bigmatch(BigmatchArgs),
    /// Seeded random game file.
    GenRandom(GenRandomArgs),
    /// Re-run the configuration embedded in a JSON report.
    #[serde(skip)]
    Replay(ReplayArgs),
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Serialize, Deserialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct SolveArgs {
    /// `builtin:<name>` or a game file.
    #[arg(long)]
    game: String,
    /// Weight expression, e.g. `cesaro:n=100`.
    #[arg(long)]
    weights: String,
    /// Report only this state (name or index).
    #[arg(long)]
    start: Option<String>,
    /// Tolerance for the discounted solver.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    /// Write the backward-recursion trace as CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct ImpatienceArgs {
    #[arg(long)]
    weights: String,
    /// Exponents, comma separated; `inf` for the sup norm.
    #[arg(long, value_delimiter = ',', required = true)]
    p: Vec<Exponent>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct OrderArgs {
    #[arg(long)]
    game: String,
    /// `a:b:k` for k log-spaced points from a down to b, or a comma list.
    #[arg(long)]
    grid: Grid,
    #[arg(long)]
    state: String,
    /// Reference discount factor; defaults to the smallest grid point / 100.
    #[arg(long)]
    lambda_min: Option<f64>,
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct CounterexampleArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,3,4,5")]
    n: Vec<usize>,
    #[arg(long, default_value_t = 10_000)]
    reps: usize,
    #[arg(long)]
    seed: u64,
    /// Refuse any n whose weights extend beyond this many stages.
    #[arg(long, default_value_t = ReportBudget::default().max_stages)]
    max_stages: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct BigmatchArgs {
    /// Probabilities of T in the stationary strategies to probe.
    #[arg(long, value_delimiter = ',', default_value = "0,0.05,0.2")]
    q: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0,10,100,1000")]
    l: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "10,100")]
    n: Vec<usize>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Serialize, Deserialize, Clone, Debug)]
struct GenRandomArgs {
    #[arg(long)]
    states: usize,
    #[arg(long)]
    actions: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone, Debug)]
struct ReplayArgs {
    /// JSON report produced by another command.
    report: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A finite exponent, or `inf`.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Exponent(f64);

impl FromStr for Exponent {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let p: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number or `inf`"))?;
        if p > 0.0 {
            Ok(Exponent(p))
        } else {
            Err(format!("exponent must be positive, got {s}"))
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_infinite() {
            f.write_str("inf")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
struct Grid(Vec<f64>);

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
        let parts: Vec<&str> = s.split(':').collect();
        match parts[..] {
            [a, b, k] => {
                let (a, b) = (num(a)?, num(b)?);
                let k: usize = k.trim().parse().map_err(|_| format!("`{k}` is not a point count"))?;
                if !(a > 0.0 && b > 0.0) || k < 2 {
                    return Err("log grid needs positive endpoints and at least 2 points".into());
                }
                let (la, lb) = (a.ln(), b.ln());
                Ok(Grid(
                    (0..k)
                        .map(|i| (la + (lb - la) * i as f64 / (k - 1) as f64).exp())
                        .collect(),
                ))
            }
            [list] => list.split(',').map(num).collect::<Result<_, _>>().map(Grid),
            _ => Err(format!("`{s}` is neither a:b:k nor a comma list")),
        }
    }
}

/// Failure classes, mapped to exit codes.
enum Failure {
    /// Bad arguments, unreadable or invalid inputs.
    Input(String),
    /// A counterexample request above the stage budget.
    Budget(String),
    /// The computation itself failed.
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Runtime(_) => 1,
            Failure::Input(_) => 2,
            Failure::Budget(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Budget(m) | Failure::Runtime(m) => m,
        }
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<EvalError> for Failure {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Weight(_) | EvalError::Parameter(_) => Failure::Input(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<PlayError> for Failure {
    fn from(e: PlayError) -> Self {
        match e {
            PlayError::Budget { .. } => Failure::Budget(e.to_string()),
            PlayError::Parameter(_) | PlayError::Weight(_) => Failure::Input(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let result = match cli.command {
        Command::Replay(args) => replay(&args),
        command => execute(&command, None),
    };
    eprintln!("elapsed: {:.3} s", started.elapsed().as_secs_f64());
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

fn replay(args: &ReplayArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.report)
        .map_err(|e| Failure::Input(format!("{}: {e}", args.report.display())))?;
    #[derive(Deserialize)]
    struct Embedded {
        config: Command,
    }
    let embedded: Embedded = serde_json::from_str(&text)
        .map_err(|e| Failure::Input(format!("{}: no embedded config: {e}", args.report.display())))?;
    execute(&embedded.config, Some(args.out.as_ref()))
}

/// Runs `command`; `destination` overrides the configured output path.
fn execute(command: &Command, destination: Option<Option<&PathBuf>>) -> Result<(), Failure> {
    let (output, tables) = match command {
        Command::Solve(a) => (&a.output, solve(a)?),
        Command::Impatience(a) => (&a.output, impatience_table(a)?),
        Command::Order(a) => (&a.output, order(a)?),
        Command::Counterexample(a) => (&a.output, counterexample(a)?),
        Command::Bigmatch(a) => (&a.output, bigmatch(a)?),
        Command::GenRandom(a) => return gen_random(a, destination.unwrap_or(a.out.as_ref())),
        Command::Replay(_) => unreachable!("replay is dispatched in main"),
    };
    let report = Report { config: command, tables };
    let text = match output.format {
        Format::Csv => report.to_csv(),
        Format::Json => report.to_json(),
    };
    write_output(destination.unwrap_or(output.out.as_ref()), &text)
}

fn write_output(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_game(source: &str) -> Result<StochasticGame, Failure> {
    let game = match source.strip_prefix("builtin:") {
        Some(name) => builtin(name)?,
        None => StochasticGame::load(source)?,
    };
    Ok(game)
}

fn parse_weights(text: &str) -> Result<(WeightExpr, WeightSequence), Failure> {
    let expr: WeightExpr = text.parse().map_err(|e| Failure::Input(format!("--weights: {e}")))?;
    let pi = expr.build().map_err(|e| Failure::Input(format!("--weights: {e}")))?;
    Ok((expr, pi))
}

fn check_tol(tol: f64) -> Result<(), Failure> {
    if tol > 0.0 {
        Ok(())
    } else {
        Err(Failure::Input(format!("--tol must be positive, got {tol}")))
    }
}

fn solve(a: &SolveArgs) -> Result<Vec<Table>, Failure> {
    check_tol(a.tol)?;
    let game = load_game(&a.game)?;
    let (expr, pi) = parse_weights(&a.weights)?;
    let states: Vec<usize> = match &a.start {
        Some(s) => vec![game.state_index(s)?],
        None => (0..game.num_states()).collect(),
    };
    let sol = weighted_value_with(&game, &pi, WeightedOptions { trace: a.trace.is_some(), strategies: false })?;
    if let (Some(path), Some(trace)) = (&a.trace, &sol.trace) {
        let file = fs::File::create(path).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
        trace
            .write_csv(std::io::BufWriter::new(file), game.num_states())
            .map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))?;
    }
    let mut header = vec!["state", "v_pi"];
    let mut extra: Option<Vec<f64>> = None;
    match expr {
        WeightExpr::Discounted { lambda, .. } => {
            header.push("v_lambda");
            extra = Some(discounted_value(&game, lambda, a.tol)?.values.into_vec());
        }
        WeightExpr::Cesaro { n } => {
            header.push("v_n");
            extra = Some(n_stage_value(&game, n)?.into_vec());
        }
        _ => {}
    }
    let mut table = Table::new("values", &header);
    for k in states {
        let mut row = vec![game.state_name(k).into(), sol.values[k].into()];
        if let Some(e) = &extra {
            row.push(e[k].into());
        }
        table.push(row);
    }
    let mut meta = Table::new("solver", &["support_end", "tol"]);
    meta.push(vec![pi.support_end().into(), a.tol.into()]);
    Ok(vec![table, meta])
}

fn impatience_table(a: &ImpatienceArgs) -> Result<Vec<Table>, Failure> {
    let (_, pi) = parse_weights(&a.weights)?;
    let mut table = Table::new("impatience", &["p", "impatience"]);
    for p in &a.p {
        let value = impatience(&pi, p.0).map_err(|e| Failure::Input(e.to_string()))?;
        table.push(vec![p.to_string().into(), value.into()]);
    }
    Ok(vec![table])
}

fn order(a: &OrderArgs) -> Result<Vec<Table>, Failure> {
    check_tol(a.tol)?;
    let game = load_game(&a.game)?;
    let state = game.state_index(&a.state)?;
    let smallest = a.grid.0.iter().copied().fold(f64::INFINITY, f64::min);
    let lambda_min = a.lambda_min.unwrap_or(smallest / 100.0);
    let est = order_estimate(&game, &a.grid.0, lambda_min, state, a.tol)?;
    let mut points = Table::new("points", &["lambda", "v_lambda", "diff", "used"]);
    for p in &est.points {
        points.push(vec![p.lambda.into(), p.value.into(), p.diff.into(), p.used.into()]);
    }
    let mut fit = Table::new(
        "fit",
        &["s_hat", "intercept", "rms_residual", "lambda_min", "reference_value", "lower_bound"],
    );
    fit.push(vec![
        est.s_hat.into(),
        est.intercept.into(),
        est.rms_residual.into(),
        est.lambda_min.into(),
        est.reference_value.into(),
        order_lower_bound(&game).into(),
    ]);
    Ok(vec![fit, points])
}

fn counterexample(a: &CounterexampleArgs) -> Result<Vec<Table>, Failure> {
    let budget = ReportBudget { max_stages: a.max_stages };
    let rows = playlab::counterexample_report(&a.n, a.reps, a.seed, budget)?;
    let mut table = Table::new(
        "counterexample",
        &[
            "n",
            "support_end",
            "impatience_1",
            "impatience_inf",
            "value",
            "guarantee",
            "omega_exact",
            "omega_mc",
            "omega_stderr",
            "payoff_mc",
            "payoff_stderr",
            "reps",
            "seed",
        ],
    );
    for r in rows {
        table.push(vec![
            r.n.into(),
            r.support_end.into(),
            r.impatience_1.into(),
            r.impatience_inf.into(),
            r.value.into(),
            r.guarantee.into(),
            r.omega_exact.into(),
            r.omega_mc.into(),
            r.omega_stderr.into(),
            r.payoff_mc.into(),
            r.payoff_stderr.into(),
            r.reps.into(),
            r.seed.into(),
        ]);
    }
    Ok(vec![table])
}

fn bigmatch(a: &BigmatchArgs) -> Result<Vec<Table>, Failure> {
    let game = builtin("big_match")?;
    let mut cells = Table::new("windows", &["q", "l", "n", "value"]);
    let mut worst = Table::new("worst", &["q", "worst", "l", "n"]);
    for &q in &a.q {
        if !(0.0..=1.0).contains(&q) {
            return Err(Failure::Input(format!("--q values must lie in [0, 1], got {q}")));
        }
        let plan = vec![vec![q, 1.0 - q], vec![1.0], vec![1.0]];
        let sigma = MarkovStrategy::stationary(&game, Player::One, plan).map_err(|e| Failure::Input(e.to_string()))?;
        let probe = playlab::bigmatch_window_probe(&sigma, &a.l, &a.n)?;
        for c in &probe.cells {
            cells.push(vec![q.into(), c.l.into(), c.n.into(), c.value.into()]);
        }
        worst.push(vec![q.into(), probe.worst.into(), probe.worst_window.0.into(), probe.worst_window.1.into()]);
    }
    Ok(vec![worst, cells])
}

fn gen_random(a: &GenRandomArgs, out: Option<&PathBuf>) -> Result<(), Failure> {
    if a.states == 0 || a.actions == 0 {
        return Err(Failure::Input("--states and --actions must be positive".into()));
    }
    write_output(out, &random_game(a.states, a.actions, a.seed).to_json())
}
