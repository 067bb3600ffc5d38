use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use serde_json::json;

use roughstat::config::{key_help, parse_config, ExperimentConfig};
use roughstat::decimal::parse_rational;
use roughstat::density::{Fraction, Tau};
use roughstat::pm::{axiom_check, PartialMetricSpace, RealPoint, SpaceKind};
use roughstat::report::{run_experiment, Report};

const EXIT_FAIL: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(
    name = "roughstat",
    version,
    about = "Rough statistical convergence diagnostics in partial metric spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        /// Write report.json / report.csv here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        /// Overrides the config's `seed`.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check every theorem on its default instance.
    Suite {
        #[arg(long)]
        n: Option<u64>,
        /// Density threshold as `p/q` or a decimal.
        #[arg(long)]
        tau: Option<String>,
        /// First seed of the random instances.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of seeded random instances to add.
        #[arg(long, default_value_t = 0)]
        random: u64,
    },
    /// Check the partial metric axioms on a sample of points.
    CheckAxioms {
        /// max_rplus | shifted_euclidean
        space: String,
        /// Self-distance for shifted_euclidean.
        #[arg(long)]
        a: Option<String>,
        #[arg(long, default_value_t = 12)]
        samples: usize,
    },
}

fn config_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_CONFIG)
}

fn init_threads() -> Result<(), String> {
    if let Ok(v) = std::env::var("ROUGHSTAT_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .map_err(|_| format!("ROUGHSTAT_THREADS must be a positive integer, got `{v}`"))?;
        if n == 0 {
            return Err("ROUGHSTAT_THREADS must be a positive integer".into());
        }
        roughstat::exec::init_threads(n);
    }
    Ok(())
}

fn parse_tau(s: &str) -> Result<Tau, String> {
    let r = parse_rational(s).map_err(|e| e.to_string())?;
    if *r.numer() <= 0 {
        return Err("tau must be positive".into());
    }
    Tau::new(Fraction::new(*r.numer() as u64, *r.denom() as u64)).map_err(|e| e.to_string())
}

fn emit(report: &Report, out: Option<&Path>, format: Format) -> std::io::Result<()> {
    let json = format != Format::Csv;
    let csv = format != Format::Json;
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            if json {
                std::fs::write(dir.join("report.json"), report.json_string())?;
            }
            if csv {
                std::fs::write(dir.join("report.csv"), &report.csv)?;
            }
        }
        None => {
            if json {
                print!("{}", report.json_string());
            }
            if csv {
                if json {
                    println!();
                }
                print!("{}", report.csv);
            }
        }
    }
    Ok(())
}

fn execute(cfg: &ExperimentConfig, out: Option<&Path>, format: Format) -> ExitCode {
    let start = Instant::now();
    let report = match run_experiment(cfg) {
        Ok(r) => r,
        Err(e) => return config_error(e),
    };
    if let Err(e) = emit(&report, out, format) {
        return config_error(format!("writing report: {e}"));
    }
    eprintln!("finished in {:.2?}", start.elapsed());
    ExitCode::from(report.exit_code() as u8)
}

fn check_axioms(space: &str, a: Option<&str>, samples: usize) -> ExitCode {
    let space = match PartialMetricSpace::from_descriptor(space, a) {
        Ok(s) => s,
        Err(e) => return config_error(e),
    };
    let offset = match space.kind() {
        SpaceKind::MaxRPlus => 0.0,
        SpaceKind::ShiftedEuclidean => (samples / 2) as f64,
    };
    let sample: Vec<RealPoint> = (0..samples)
        .map(|k| RealPoint::new((k as f64 - offset) / 2.0))
        .collect::<Result<_, _>>()
        .expect("finite sample");
    let report = match axiom_check(&space, &sample) {
        Ok(r) => r,
        Err(e) => return config_error(e),
    };
    let body = json!({
        "space": space.to_string(),
        "sample": sample.iter().map(|p| p.value()).collect::<Vec<_>>(),
        "holds": report.holds(),
        "report": report,
        "version": roughstat::VERSION,
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&body).expect("serializes")
    );
    if report.holds() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAIL)
    }
}

fn main() -> ExitCode {
    let command = Cli::command().mut_subcommand("run", |c| c.after_long_help(key_help()));
    let cli = match command
        .try_get_matches()
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(e) = init_threads() {
        return config_error(e);
    }

    match cli.command {
        Command::Run {
            config,
            out,
            format,
            seed,
        } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => return config_error(format!("{}: {e}", config.display())),
            };
            let mut cfg = match parse_config(&text) {
                Ok(c) => c,
                Err(errs) => {
                    for e in errs {
                        eprintln!("{}: {e}", config.display());
                    }
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            if seed.is_some() {
                cfg.seed = seed;
            }
            execute(&cfg, out.as_deref(), format)
        }
        Command::Suite {
            n,
            tau,
            seed,
            random,
        } => {
            if n.is_some_and(|n| n < 2) {
                return config_error("--n must be at least 2");
            }
            let tau = match tau.as_deref().map(parse_tau).transpose() {
                Ok(t) => t,
                Err(e) => return config_error(format!("--tau: {e}")),
            };
            execute(
                &ExperimentConfig::suite(n, tau, seed, random),
                None,
                Format::Json,
            )
        }
        Command::CheckAxioms { space, a, samples } => check_axioms(&space, a.as_deref(), samples),
    }
}
