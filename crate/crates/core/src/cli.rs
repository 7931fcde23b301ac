//! Command-line front end.
//!
//! Exit codes: 0 success / feasible / bound holds, 1 infeasible / violated,
//! 2 usage or configuration error.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::exponents;
use crate::feasibility::Requirements;
use crate::lemma::{self, LemmaParams, LemmaShape, TraceMode};
use crate::minplus::WeightVector;
use crate::rational::Rational;
use crate::report::{self, LemmaRun, Outcome, Report};
use crate::sim::{self, SimConfig};

pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "fsi-decay", about = "Exponent ledger, weight feasibility, decay-lemma lab and 1D FSI simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate α, κ, ε at a weight vector.
    Exponents(WeightsArg),
    /// Check every compiled requirement at a weight vector.
    VerifyWeights(WeightsArg),
    /// Search for weights satisfying all requirements.
    SearchWeights(SearchArgs),
    /// Decay-lemma constants, barriers, admissible λ and adversarial trace.
    Lemma(LemmaArgs),
    /// Run the 1D coupled simulator.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct WeightsArg {
    /// Six weights c_id c_T c_dt c_Tdt c_TT c_dtt (integer, p/q or decimal).
    #[arg(long, num_args = 1.., required = true, allow_negative_numbers = true)]
    pub weights: Vec<String>,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    /// Maximize the uniform slack over all analytic rows.
    #[arg(long)]
    pub maximize_margin: bool,
    #[arg(long, default_value = "1", allow_negative_numbers = true)]
    pub alpha_min: String,
    #[arg(long, default_value = "3", allow_negative_numbers = true)]
    pub kappa_min: String,
    #[arg(long, default_value = "0", allow_negative_numbers = true)]
    pub epsilon_min: String,
}

#[derive(Debug, Args)]
pub struct LemmaArgs {
    #[arg(long = "C", default_value = "1")]
    pub c: String,
    #[arg(long, default_value = "1")]
    pub gamma: String,
    #[arg(long)]
    pub alpha: String,
    #[arg(long)]
    pub beta: String,
    #[arg(long)]
    pub kappa: String,
    /// Fixed λ; searched over powers of 1/2 when omitted.
    #[arg(long)]
    pub lambda: Option<String>,
    /// Defaults to half the ε threshold.
    #[arg(long)]
    pub epsilon: Option<String>,
    /// Remainder constant; defaults to C.
    #[arg(long)]
    pub ctilde: Option<String>,
    /// Adversarial trace step and horizon. A trailing `a` scales by
    /// a = 2C/λ, e.g. `--trace 1/50a 20a`.
    #[arg(long, num_args = 2, value_names = ["DELTA", "T"])]
    pub trace: Option<Vec<String>>,
    #[arg(long, default_value = "linear")]
    pub mode: String,
    /// Write the trace as CSV (t,f,bound,ratio).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Write the energy trace as CSV (t,E_id,E_dt,E_dtt,D,Y).
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

fn rational(what: &str, s: &str) -> Result<Rational> {
    s.parse().map_err(|e: Error| Error::Config(format!("--{what}: {e}")))
}

fn weights(a: &WeightsArg) -> Result<WeightVector> {
    WeightVector::parse_list(&a.weights).map_err(|e| Error::Config(format!("--weights: {e}")))
}

/// `x` or `xa` (a multiple of `a`).
fn trace_value(s: &str, a: &Rational) -> Result<Rational> {
    match s.strip_suffix('a') {
        Some("") => Ok(a.clone()),
        Some(p) => Ok(rational("trace", p)? * a),
        None => rational("trace", s),
    }
}

fn run_lemma(args: &LemmaArgs) -> Result<(Report, Outcome, Option<String>)> {
    let c = rational("C", &args.c)?;
    let ctilde = match &args.ctilde {
        Some(s) => rational("ctilde", s)?,
        None => c.clone(),
    };
    let shape = LemmaShape::new(
        c,
        rational("gamma", &args.gamma)?,
        rational("alpha", &args.alpha)?,
        rational("beta", &args.beta)?,
        rational("kappa", &args.kappa)?,
        ctilde,
    )
    .map_err(|e| Error::Config(e.to_string()))?;
    let mode: TraceMode = args.mode.parse().map_err(|e: Error| Error::Config(e.to_string()))?;

    let (lambda, admissible) = match &args.lambda {
        Some(s) => (rational("lambda", s)?, None),
        None => match lemma::find_admissible_lambda(&shape) {
            Ok(found) => (found.lambda.clone(), Some(Ok(found))),
            Err(e) => (Rational::pow2(-(lemma::MAX_LAMBDA_EXPONENT as i64)), Some(Err(e.to_string()))),
        },
    };
    let epsilon = match &args.epsilon {
        Some(s) => rational("epsilon", s)?,
        None => lemma::epsilon_threshold(&shape.c, &shape.gamma, &lambda) / Rational::int(2),
    };
    let params = LemmaParams::new(shape, lambda, epsilon).map_err(|e| Error::Config(e.to_string()))?;

    let mut csv = None;
    let trace = match &args.trace {
        Some(v) => {
            let (a, _) = lemma::lemma_constants(&params.shape.c, &params.lambda);
            let delta = trace_value(&v[0], &a)?;
            let horizon = trace_value(&v[1], &a)?;
            let t = lemma::adversarial_trace(&params, &delta, &horizon, mode).map_err(|e| match e {
                Error::InvalidParameter(m) => Error::Config(m),
                other => other,
            })?;
            if args.csv.is_some() {
                csv = Some(t.to_csv());
            }
            Some(t.summary())
        }
        None => None,
    };
    let (rep, out) = report::lemma_report(&LemmaRun { params, admissible, trace });
    Ok((rep, out, csv))
}

fn run_command(cmd: &Command) -> Result<(Report, Outcome)> {
    match cmd {
        Command::Exponents(a) => Ok(report::exponents_report(&weights(a)?)),
        Command::VerifyWeights(a) => Ok(report::verify_weights_report(&weights(a)?)),
        Command::SearchWeights(a) => {
            let req = Requirements {
                alpha_min: rational("alpha-min", &a.alpha_min)?,
                kappa_min: rational("kappa-min", &a.kappa_min)?,
                epsilon_min: rational("epsilon-min", &a.epsilon_min)?,
                margin: false,
            };
            report::search_weights_report(&req, a.maximize_margin)
        }
        Command::Lemma(a) => {
            let (rep, out, csv) = run_lemma(a)?;
            if let (Some(path), Some(text)) = (&a.csv, csv) {
                std::fs::write(path, text)?;
            }
            Ok((rep, out))
        }
        Command::Simulate(a) => {
            let text = std::fs::read_to_string(&a.config)
                .map_err(|e| Error::Config(format!("{}: {e}", a.config.display())))?;
            let config = SimConfig::from_json(&text)?;
            let trace = sim::run(&config)?;
            if let Some(path) = &a.csv {
                std::fs::write(path, trace.to_csv())?;
            }
            let summary = sim::summarize(&config, &trace)?;
            Ok(report::simulate_report(&config, &summary))
        }
    }
}

fn exit_class(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse(_) | Error::InvalidParameter(_) | Error::Io(_) | Error::Json(_) => EXIT_USAGE,
        _ => 1,
    }
}

pub fn version_text() -> String {
    format!("{}\nledger-pin {}\nledger-hash {}", report::VERSION, exponents::LEDGER_PIN, exponents::ledger_hash())
}

/// Parse `args` (program name first), run, write the report to `out` and
/// diagnostics to `err`. Returns the process exit code.
pub fn dispatch<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let version: &'static str = Box::leak(version_text().into_boxed_str());
    let cmd = Cli::command().version(version);
    let matches = match cmd.try_get_matches_from(args) {
        Ok(m) => m,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                0
            };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return EXIT_USAGE;
        }
    };
    match run_command(&cli.command) {
        Ok((rep, outcome)) => {
            if out.write_all(rep.render().as_bytes()).is_err() {
                return 1;
            }
            outcome.exit_code()
        }
        Err(e) => {
            let code = exit_class(&e);
            let _ = writeln!(err, "error: {e}");
            if code == EXIT_USAGE {
                let _ = writeln!(err, "{}", Cli::command().render_usage());
            }
            code
        }
    }
}
