//! Command-line front end. [`run`] is the whole program minus process exit,
//! so it can be driven from tests.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::model::{MajGameSpec, PnGameSpec, ZeroLossSpec};
use crate::solvers::major::{maj_hat_residuals, maj_leader_optimal, maj_limits, maj_loss, maj_solve};
use crate::solvers::pn::{pn_limits, pn_solve};
use crate::solvers::zero_loss::{zero_loss_loss, zero_loss_residuals, zero_loss_solve};
use crate::sweep::{self, parse_grid, Table};
use crate::verify::{certify_incentive, Certifiable, CertifyOptions, Epsilons, MonteCarloConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DEGENERATE: i32 = 2;
pub const EXIT_CERTIFICATION: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "stacklab", version, about = "Solve, sweep and certify LQG Stackelberg incentive games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one game and print its coefficients, gain and residuals as JSON.
    Solve {
        #[command(flatten)]
        game: GameArgs,
        /// Which optimum to report for the major/minor game.
        #[arg(long, value_enum, default_value_t = Target::Both)]
        target: Target,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Tabulate a curve over a population grid.
    Sweep {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, value_enum, default_value_t = Curve::Gain)]
        curve: Curve,
        /// Comma-separated list (`10,100,1000`) or inclusive range (`1..50`).
        #[arg(long)]
        grid: String,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Certify the incentive equilibrium and print the report.
    Verify {
        #[command(flatten)]
        game: GameArgs,
        #[arg(long, env = "STACKLAB_SEED", default_value_t = 0)]
        seed: u64,
        /// Also cross-check the leader's cost by simulation with this many samples.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value_t = 20)]
        batches: usize,
        /// Replace the incentive gain with zero.
        #[arg(long)]
        zero_gain: bool,
        #[arg(long, default_value_t = 0.0)]
        eps_leader: f64,
        #[arg(long, default_value_t = 0.0)]
        eps_follower: f64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Print the mean-field limit of the solution.
    Limits {
        #[command(flatten)]
        game: GameArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum GameKindArg {
    Pn,
    Maj,
    ZeroLoss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Target {
    LeaderMajor,
    LeaderOptimal,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Curve {
    Gain,
    Loss,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct GameArgs {
    #[arg(long, value_enum)]
    game: GameKindArg,
    /// JSON file with the game weights (and optionally `n`).
    #[arg(long, conflicts_with_all = ["r0", "q0", "qhat0", "r", "q", "r_m", "q_m"])]
    spec: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    r0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    q0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    qhat0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    r: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    q: Option<f64>,
    #[arg(long = "rM", allow_negative_numbers = true)]
    r_m: Option<f64>,
    #[arg(long = "qM", allow_negative_numbers = true)]
    q_m: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Weights gathered from flags or a spec file, before validation.
#[derive(Debug, Default, Deserialize)]
struct Weights {
    r0: Option<f64>,
    q0: Option<f64>,
    qhat0: Option<f64>,
    r: Option<f64>,
    q: Option<f64>,
    #[serde(rename = "rM")]
    r_m: Option<f64>,
    #[serde(rename = "qM")]
    q_m: Option<f64>,
    n: Option<usize>,
}

enum Game {
    Pn(PnGameSpec),
    Maj(MajGameSpec),
    ZeroLoss(ZeroLossSpec),
}

fn require(value: Option<f64>, name: &str) -> Result<f64> {
    value.ok_or_else(|| Error::InvalidArgument(format!("missing weight {name}")))
}

impl GameArgs {
    fn weights(&self) -> Result<Weights> {
        let mut w = match &self.spec {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
                serde_json::from_str::<Weights>(&text)
                    .map_err(|e| Error::InvalidSpec(format!("{}: {e}", path.display())))?
            }
            None => Weights {
                r0: self.r0,
                q0: self.q0,
                qhat0: self.qhat0,
                r: self.r,
                q: self.q,
                r_m: self.r_m,
                q_m: self.q_m,
                n: None,
            },
        };
        if self.n.is_some() {
            w.n = self.n;
        }
        Ok(w)
    }

    /// Builds the game. `default_n` stands in when neither flags nor file give
    /// a population, which is how sweeps use it.
    fn build(&self, default_n: Option<usize>) -> Result<Game> {
        let w = self.weights()?;
        let n = w.n.or(default_n).ok_or_else(|| Error::InvalidArgument("missing population size --n".into()))?;
        Ok(match self.game {
            GameKindArg::Pn => Game::Pn(PnGameSpec::new(
                require(w.r0, "r0")?,
                require(w.q0, "q0")?,
                require(w.r, "r")?,
                require(w.q, "q")?,
                n,
            )?),
            GameKindArg::Maj => Game::Maj(MajGameSpec::new(
                require(w.r0, "r0")?,
                require(w.q0, "q0")?,
                require(w.qhat0, "qhat0")?,
                require(w.r_m, "rM")?,
                require(w.q_m, "qM")?,
                require(w.r, "r")?,
                require(w.q, "q")?,
                n,
            )?),
            GameKindArg::ZeroLoss => Game::ZeroLoss(ZeroLossSpec::new(
                require(w.r0, "r0")?,
                require(w.q0, "q0")?,
                require(w.r_m, "rM")?,
                require(w.q_m, "qM")?,
                n,
            )?),
        })
    }
}

fn spec_object<T: serde::Serialize>(game: &str, spec: &T) -> Map<String, Value> {
    let mut obj = Map::new();
    obj.insert("game".into(), Value::from(game));
    if let Value::Object(fields) = serde_json::to_value(spec).expect("specs serialize") {
        obj.extend(fields);
    }
    obj
}

fn pairs_to_object(pairs: impl IntoIterator<Item = (String, f64)>) -> Value {
    Value::Object(pairs.into_iter().map(|(k, v)| (k, Value::from(v))).collect())
}

fn solve_json(game: &Game, target: Target) -> Result<Value> {
    match game {
        Game::Pn(spec) => {
            let sol = pn_solve(spec)?.to_equilibrium(spec)?;
            let mut obj = spec_object("pn", spec);
            obj.insert("gain".into(), Value::from(sol.params["gain"]));
            obj.insert("max_residual".into(), Value::from(sol.max_residual()));
            obj.insert("params".into(), serde_json::to_value(&sol.params).expect("map serializes"));
            obj.insert("residuals".into(), serde_json::to_value(&sol.residuals).expect("map serializes"));
            Ok(Value::Object(obj))
        }
        Game::Maj(spec) => {
            let mut obj = spec_object("maj", spec);
            if target != Target::LeaderOptimal {
                let sol = maj_solve(spec)?.to_equilibrium(spec)?;
                obj.insert("gain".into(), Value::from(sol.params["gain"]));
                obj.insert("max_residual".into(), Value::from(sol.max_residual()));
                obj.insert("params".into(), serde_json::to_value(&sol.params).expect("map serializes"));
                obj.insert("residuals".into(), serde_json::to_value(&sol.residuals).expect("map serializes"));
            }
            if target != Target::LeaderMajor {
                let hat = maj_leader_optimal(spec)?;
                obj.insert("leader_optimal".into(), serde_json::to_value(hat).expect("hat serializes"));
                obj.insert("leader_optimal_residuals".into(), pairs_to_object(maj_hat_residuals(spec, &hat)?));
            }
            if target == Target::Both {
                obj.insert("loss".into(), serde_json::to_value(maj_loss(spec)?).expect("loss serializes"));
            }
            Ok(Value::Object(obj))
        }
        Game::ZeroLoss(spec) => {
            let sol = zero_loss_solve(spec)?;
            let mut obj = spec_object("zero-loss", spec);
            obj.insert("gain".into(), serde_json::to_value(sol.gain).expect("gain serializes"));
            obj.insert("params".into(), serde_json::to_value(sol).expect("solution serializes"));
            obj.insert("residuals".into(), pairs_to_object(zero_loss_residuals(spec, &sol)?));
            obj.insert("loss".into(), serde_json::to_value(zero_loss_loss(spec)?).expect("loss serializes"));
            Ok(Value::Object(obj))
        }
    }
}

fn sweep_table(game: &Game, curve: Curve, grid: &[usize]) -> Result<Table> {
    match (game, curve) {
        (Game::Pn(spec), Curve::Gain) => sweep::pn_gain_curve(spec, grid),
        (Game::Pn(_), Curve::Loss) => {
            Err(Error::InvalidArgument("the loss curve is defined for the major/minor games".into()))
        }
        (Game::Maj(spec), Curve::Gain) => sweep::maj_gain_curve(spec, grid),
        (Game::Maj(spec), Curve::Loss) => sweep::maj_loss_curve(spec, grid),
        (Game::ZeroLoss(spec), Curve::Gain) => sweep::zero_loss_gain_curve(spec, grid),
        (Game::ZeroLoss(spec), Curve::Loss) => sweep::zero_loss_loss_curve(spec, grid),
    }
}

fn limits_json(game: &Game) -> Result<Value> {
    match game {
        Game::Pn(spec) => Ok(serde_json::to_value(pn_limits(spec)?).expect("limits serialize")),
        Game::Maj(spec) => {
            let l = maj_limits(spec)?;
            let gain = l.gain.expect("limits carry a gain");
            Ok(json!({
                "theta_inf": l.theta,
                "thetaM_inf": l.theta_m,
                "beta_inf": l.beta,
                "alpha_inf": l.alpha,
                "alphaM_inf": l.alpha_m,
                "gain_inf": gain,
                "L_inf": l.l.expect("limits carry L"),
                "mean_minor_action": format!("{} * omega0 + {} * yM", l.alpha, l.alpha_m),
            }))
        }
        Game::ZeroLoss(_) => Err(Error::InvalidArgument("limits are available for --game pn and --game maj".into())),
    }
}

struct Outcome {
    text: String,
    out: Option<PathBuf>,
    code: i32,
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json renders");
    s.push('\n');
    s
}

fn execute(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Solve { game, target, output } => {
            let game = game.build(None)?;
            Ok(Outcome { text: pretty(&solve_json(&game, target)?), out: output.out, code: EXIT_OK })
        }
        Command::Sweep { game, curve, grid, format, output } => {
            let grid = parse_grid(&grid)?;
            let game = game.build(Some(grid[0]))?;
            let table = sweep_table(&game, curve, &grid)?;
            let text = match format {
                Format::Csv => table.to_csv(),
                Format::Json => pretty(&table.to_json()),
            };
            Ok(Outcome { text, out: output.out, code: EXIT_OK })
        }
        Command::Verify { game, seed, samples, batches, zero_gain, eps_leader, eps_follower, output } => {
            let game = game.build(None)?;
            let monte_carlo = samples.map(|s| MonteCarloConfig::new(s, seed, batches)).transpose()?;
            let opts = CertifyOptions { seed, gain_override: zero_gain.then_some(0.0), monte_carlo };
            let eps = Epsilons { leader: eps_leader, follower: eps_follower };
            let report = match &game {
                Game::Pn(spec) => certify_incentive(Certifiable::Pn(spec, &pn_solve(spec)?), eps, opts)?,
                Game::Maj(spec) => certify_incentive(Certifiable::Major(spec, &maj_solve(spec)?), eps, opts)?,
                Game::ZeroLoss(spec) => {
                    certify_incentive(Certifiable::ZeroLoss(spec, &zero_loss_solve(spec)?), eps, opts)?
                }
            };
            let code = if report.verdict.pass { EXIT_OK } else { EXIT_CERTIFICATION };
            let text = pretty(&serde_json::to_value(&report).expect("report serializes"));
            Ok(Outcome { text, out: output.out, code })
        }
        Command::Limits { game, output } => {
            let game = game.build(Some(1))?;
            Ok(Outcome { text: pretty(&limits_json(&game)?), out: output.out, code: EXIT_OK })
        }
    }
}

/// Runs the program on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = sink.write_all(rendered.as_bytes());
            return code;
        }
    };
    match execute(cli) {
        Ok(outcome) => {
            let written = match &outcome.out {
                Some(path) => {
                    std::fs::write(path, &outcome.text).map_err(|e| format!("cannot write {}: {e}", path.display()))
                }
                None => stdout.write_all(outcome.text.as_bytes()).map_err(|e| e.to_string()),
            };
            match written {
                Ok(()) => outcome.code,
                Err(msg) => {
                    let _ = writeln!(stderr, "error: {msg}");
                    EXIT_USAGE
                }
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if e.is_degenerate() {
                EXIT_DEGENERATE
            } else {
                EXIT_USAGE
            }
        }
    }
}
