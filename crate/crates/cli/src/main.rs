//! `cog`: solve, verify and analyze context-ordinal games from the shell.
//!
//! Exit codes: 0 on success, 1 on invalid input, 2 when a solver fails to
//! converge. `COG_THREADS` caps the worker pool.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cog_core::CogError;

#[derive(Parser, Debug)]
#[command(name = "cog", version, about = "Equilibria of context-ordinal games")]
pub struct Cli {
    /// Seed for every Monte Carlo draw.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Regularized FTRL (or fictitious play); one row of averaged strategies per round.
    Solve(SolveArgs),
    /// Check that a profile is a social-choice equilibrium.
    Verify(VerifyArgs),
    /// Exploitability, margins of victory, hindsight win rates, Shapley breakdowns and bounds.
    Metrics(MetricsArgs),
    /// Exploitability over a grid of 2x2 profiles.
    Landscape(LandscapeArgs),
    /// Regularized best response of one player for a range of p.
    RbrSweep(RbrSweepArgs),
    /// The four-player runoff election.
    #[command(subcommand)]
    Election(ElectionCommand),
    /// Response graph, harmonic check and sink components.
    Analyze(AnalyzeArgs),
    /// Read an agents-by-tasks performance CSV into a game file.
    Ingest(IngestArgs),
}

#[derive(Args, Debug, Clone)]
pub struct GameArg {
    /// Game JSON with `preferences` or `payoffs`.
    #[arg(long)]
    pub game: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct RegArgs {
    /// Replacement probability.
    #[arg(long, default_value_t = 0.0)]
    pub p: f64,
    /// Dirichlet smoothing scale; 0 skips the draw.
    #[arg(long, default_value_t = 0.1)]
    pub q: f64,
    /// Monte Carlo samples.
    #[arg(long = "samples", visible_alias = "M", default_value_t = 100)]
    pub samples: usize,
    /// Usurper distribution, comma separated; uniform when absent.
    #[arg(long)]
    pub mu: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct LearnArgs {
    /// One rule, or one per player, comma separated.
    #[arg(long, default_value = "borda")]
    pub rule: String,
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    #[arg(long, default_value_t = 0.1)]
    pub q: f64,
    #[arg(long = "samples", visible_alias = "M", default_value_t = 100)]
    pub samples: usize,
    /// `one_over_t` or `constant:<p>`.
    #[arg(long, default_value = "one_over_t")]
    pub schedule: String,
    /// Initial strategies and usurpers, players separated by `;`.
    #[arg(long)]
    pub mu: Option<String>,
    /// Unregularized fictitious play instead of FTRL.
    #[arg(long)]
    pub fp: bool,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    #[command(flatten)]
    pub game: GameArg,
    #[command(flatten)]
    pub learn: LearnArgs,
    /// Emit the played best responses instead of the running averages.
    #[arg(long)]
    pub last_iterate: bool,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub game: GameArg,
    /// Profile JSON: `[[...], ...]` or `{"strategies": ...}`.
    #[arg(long)]
    pub profile: PathBuf,
    #[arg(long, default_value = "borda")]
    pub rule: String,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Metric {
    Eps,
    Emd,
    Mov,
    Hindsight,
    Shapley,
    Bounds,
}

#[derive(Args, Debug)]
pub struct MetricsArgs {
    #[arg(long, value_enum)]
    pub metric: Metric,
    #[arg(long)]
    pub game: Option<PathBuf>,
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[command(flatten)]
    pub reg: RegArgs,
    /// One rule, or one per player, comma separated.
    #[arg(long, default_value = "borda")]
    pub rule: String,
    /// Comma-separated p values; one row per value (emd, bounds).
    #[arg(long)]
    pub p_sweep: Option<String>,
    /// Hindsight: rounds of the evaluated FTRL run.
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    /// Hindsight: replacement schedule of the evaluated run.
    #[arg(long, default_value = "one_over_t")]
    pub schedule: String,
    /// Shapley: player whose response is attributed.
    #[arg(long, default_value_t = 0)]
    pub i: usize,
    /// Shapley: co-player whose actions share the credit.
    #[arg(long, default_value_t = 1)]
    pub j: usize,
    /// Bounds: per-context payoff sums, comma separated.
    #[arg(long)]
    pub s: Option<String>,
    #[arg(long, default_value_t = 0.0)]
    pub d_plus: f64,
    #[arg(long, default_value_t = 1)]
    pub co_profiles: usize,
    #[arg(long = "T", default_value_t = 1)]
    pub t: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum LandscapeKind {
    Classical,
    Emd,
}

#[derive(Args, Debug)]
pub struct LandscapeArgs {
    #[command(flatten)]
    pub game: GameArg,
    #[arg(long, value_enum, default_value_t = LandscapeKind::Emd)]
    pub metric: LandscapeKind,
    #[arg(long, default_value = "borda")]
    pub rule: String,
    #[command(flatten)]
    pub reg: RegArgs,
    #[arg(long, default_value_t = 101)]
    pub grid: usize,
}

#[derive(Args, Debug)]
pub struct RbrSweepArgs {
    #[command(flatten)]
    pub game: GameArg,
    #[arg(long, default_value_t = 0)]
    pub player: usize,
    /// Profile JSON supplying the co-players; uniform when absent.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(long, default_value = "borda")]
    pub rule: String,
    /// Comma-separated p values; 0, 0.05, ..., 1 when absent.
    #[arg(long)]
    pub p_values: Option<String>,
    #[arg(long, default_value_t = 0.1)]
    pub q: f64,
    #[arg(long = "samples", visible_alias = "M", default_value_t = 1000)]
    pub samples: usize,
    #[arg(long)]
    pub mu: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum ElectionCommand {
    /// Per-election verdicts on the recorded actions.
    Verify {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value = "maximal_lottery")]
        rule: String,
    },
    /// Logit equilibrium of the Borda game plus simulated winner frequencies.
    Solve(ElectionSolveArgs),
}

#[derive(Args, Debug)]
pub struct ElectionSolveArgs {
    #[arg(long)]
    pub csv: PathBuf,
    /// Election id; the first election in the file when absent.
    #[arg(long)]
    pub election: Option<String>,
    #[arg(long, default_value_t = 10.0)]
    pub t0: f64,
    #[arg(long, default_value_t = 0.1)]
    pub min_temperature: f64,
    #[arg(long, default_value_t = 50)]
    pub steps: usize,
    #[arg(long, default_value_t = 0.5)]
    pub damping: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 20_000)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 10_000)]
    pub simulations: usize,
    /// Winner-frequency CSV; written to standard error when absent.
    #[arg(long)]
    pub winners: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GraphKind {
    Payoff,
    Preference,
}

#[derive(Args, Debug)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub game: GameArg,
    /// Defaults to `payoff` for cardinal games.
    #[arg(long, value_enum)]
    pub graph: Option<GraphKind>,
    /// Drop zero-gain deviations.
    #[arg(long)]
    pub strict: bool,
    /// Classification report JSON (CSV format only; JSON output embeds it).
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TaskBallotArg {
    Ranking,
    Grades,
}

#[derive(Args, Debug)]
pub struct IngestArgs {
    #[arg(long)]
    pub csv: PathBuf,
    #[arg(long, default_value_t = 4)]
    pub grades: usize,
    #[arg(long, value_enum, default_value_t = TaskBallotArg::Ranking)]
    pub task_ballots: TaskBallotArg,
}

fn exit_code(e: &CogError) -> u8 {
    match e {
        CogError::NonConvergence { .. } => 2,
        _ => 1,
    }
}

fn configure_threads() -> Result<(), CogError> {
    let Ok(v) = std::env::var("COG_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CogError::validation(format!("COG_THREADS={v:?} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CogError::validation(e.to_string()))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match configure_threads().and_then(|()| commands::run(&cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
