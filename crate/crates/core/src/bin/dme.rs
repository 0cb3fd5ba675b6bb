use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use dme_core::bench::{
    append_csv, format_lower_bound, format_privacy, lower_bound, privacy_report, resolve_spec, run_experiment, sweep,
    to_csv, BenchMode, ExperimentSpec, PrivacyInput, ResultRow, SpecOverrides,
};
use dme_core::ddg::DdgParams;
use dme_core::rotate::padded_dim;
use dme_core::selftest::{self, SelftestOptions};
use dme_core::Error;

#[derive(Parser)]
#[command(name = "dme", version, about = "Private distributed mean estimation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and emit a CSV row.
    Run(RunArgs),
    /// Vary one field over a list of values.
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        /// Field to vary: n, d, c, eps, delta, m, t, s or rounds.
        #[arg(long)]
        axis: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<f64>,
    },
    /// Run the compressed-sensing pipeline (requires --s).
    Sparse(RunArgs),
    /// Print the privacy guarantee of DDG parameters.
    Privacy(PrivacyArgs),
    /// Compare communication lower bounds with the scheme's cost.
    LowerBound {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        /// Report the bound for unbiased schemes.
        #[arg(long)]
        unbiased: bool,
    },
    /// Fast check of the main invariants.
    Selftest {
        /// Inject a wrong modulus into the aggregation check.
        #[arg(long, hide = true)]
        corrupt_modulus: bool,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// projected_ddg, plain_ddg, central_gaussian, plain_mean or sparse.
    #[arg(long)]
    mode: Option<String>,
    /// sphere, identical, onehot or sparse:<s>.
    #[arg(long)]
    gen: Option<String>,
    /// CSV file to append to (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat TOML file with defaults for any of the flags above.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Record wall-clock time (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
}

impl RunArgs {
    fn spec(&self) -> Result<ExperimentSpec, Error> {
        let file = self.config.as_deref().map(SpecOverrides::from_file).transpose()?;
        let cli = SpecOverrides {
            mode: self.mode.clone(),
            n: self.n,
            d: self.d,
            c: self.c,
            eps: self.eps,
            delta: self.delta,
            m: self.m,
            t: self.t,
            s: self.s,
            rounds: self.rounds,
            seed: self.seed,
            gen: self.gen.clone(),
            out: self.out.clone(),
        };
        let mut spec = resolve_spec(file.as_ref(), &cli)?;
        spec.timing = self.timing;
        Ok(spec)
    }
}

#[derive(Args)]
struct PrivacyArgs {
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    d: usize,
    /// Target ε; parameters are then selected automatically.
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[arg(long, default_value_t = 62)]
    log2_modulus: u32,
    /// Comma-separated δ values.
    #[arg(long, value_delimiter = ',', default_value = "1e-5")]
    delta: Vec<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn emit(rows: &[ResultRow], out: Option<&std::path::Path>) -> Result<(), Error> {
    for row in rows {
        for w in &row.warnings {
            eprintln!("warning: {w}");
        }
    }
    let text = to_csv(rows, true)?;
    std::io::stdout().write_all(text.as_bytes())?;
    if let Some(path) = out {
        append_csv(path, rows)?;
    }
    Ok(())
}

fn execute(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Run(args) => {
            let spec = args.spec()?;
            let row = run_experiment(&spec)?;
            emit(&[row], spec.out.as_deref())?;
        }
        Command::Sparse(args) => {
            let mut spec = args.spec()?;
            spec.mode = BenchMode::Sparse;
            if args.gen.is_none() {
                if let Some(s) = spec.s {
                    spec.gen = dme_core::DataGenerator::CoordinateSparse { s };
                }
            }
            let row = run_experiment(&spec)?;
            emit(&[row], spec.out.as_deref())?;
        }
        Command::Sweep { run, axis, values } => {
            let spec = run.spec()?;
            spec.validate()?;
            let rows = sweep(&spec, &axis, &values)?;
            emit(&rows, spec.out.as_deref())?;
        }
        Command::Privacy(a) => {
            let input = match (a.eps, a.gamma, a.sigma) {
                (Some(epsilon), None, None) => PrivacyInput::Target {
                    c: a.c,
                    n: a.n,
                    epsilon,
                    d: a.d,
                    wrap_delta: 1e-5,
                },
                (None, Some(gamma), Some(sigma)) => PrivacyInput::Explicit {
                    params: DdgParams {
                        c: a.c,
                        gamma,
                        sigma,
                        beta: a.beta,
                        modulus: 1u64.checked_shl(a.log2_modulus).unwrap_or(0),
                        dim: padded_dim(a.d),
                    },
                    n: a.n,
                },
                _ => {
                    return Err(Error::Parameter(
                        "give either --eps, or both --gamma and --sigma".into(),
                    ))
                }
            };
            if let PrivacyInput::Explicit { params, .. } = &input {
                params.validate()?;
            }
            let (params, report) = privacy_report(&input, &a.delta)?;
            print!("{}", format_privacy(&params, &report));
        }
        Command::LowerBound { d, n, eps, c, unbiased } => {
            print!("{}", format_lower_bound(&lower_bound(d, n, eps, c)?, unbiased));
        }
        Command::Selftest { corrupt_modulus } => {
            let outcomes = selftest::run(SelftestOptions { corrupt_modulus });
            print!("{}", selftest::format_table(&outcomes));
            if !selftest::all_passed(&outcomes) {
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
