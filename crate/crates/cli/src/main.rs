use clap::{Parser, Subcommand};
use heis_besov_cli::commands::{self, json_bytes, write};
use heis_besov_cli::config::RunConfig;
use heis_besov_cli::verify;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "heis-besov", version, about = "Harmonic analysis and a PAM solver on the Heisenberg group")]
struct Cli {
    /// JSON run configuration; built-in desk-scale defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads; falls back to HEIS_BESOV_THREADS, then all cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Forward transform of `field`.
    Transform {
        #[arg(long)]
        json: bool,
    },
    /// Inverse transform of a spectral field onto the spatial grid.
    Inverse {
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    PlancherelCheck,
    /// Per-block norms of `field` as CSV.
    Blocks,
    BesovNorm,
    /// Heat kernel table and the semigroup applied to `field`.
    Heat,
    GreenKernel,
    /// The three paraproduct components of `field` and `second_field`.
    Paraproduct,
    NoiseSample,
    /// Monte-Carlo covariance report.
    NoiseVerify,
    PamSolve,
    /// Run the acceptance suite; exit 2 if any criterion fails.
    Verify {
        /// Run only these criteria.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u32>,
    },
    /// Print the effective configuration.
    Config,
}

fn threads(flag: Option<usize>) -> Result<Option<usize>, String> {
    if flag.is_some() {
        return Ok(flag);
    }
    match std::env::var("HEIS_BESOV_THREADS") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| format!("HEIS_BESOV_THREADS: not a thread count: {v}")),
        Err(_) => Ok(None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(p) => match RunConfig::load(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: invalid config: {e}");
                return ExitCode::from(1);
            }
        },
        None => RunConfig::default(),
    };
    if let Some(o) = cli.output {
        cfg.output = o;
    }
    let n = match threads(cli.threads) {
        Ok(Some(0)) => Err("thread count must be positive".to_string()),
        other => other,
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    match n {
        Ok(Some(n)) => builder = builder.num_threads(n),
        Ok(None) => {}
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    }
    let pool = builder.build().expect("thread pool");
    pool.install(|| run(cli.command, &cfg))
}

fn run(command: Command, cfg: &RunConfig) -> ExitCode {
    let result = match command {
        Command::Transform { json } => commands::transform(cfg, json),
        Command::Inverse { input, json } => commands::inverse(cfg, &input, json),
        Command::PlancherelCheck => commands::plancherel_check(cfg),
        Command::Blocks => commands::blocks(cfg),
        Command::BesovNorm => commands::besov_norm(cfg),
        Command::Heat => commands::heat(cfg),
        Command::GreenKernel => commands::green(cfg),
        Command::Paraproduct => commands::paraproduct(cfg),
        Command::NoiseSample => commands::noise_sample(cfg),
        Command::NoiseVerify => commands::noise_verify(cfg),
        Command::PamSolve => commands::pam_solve(cfg),
        Command::Config => match json_bytes(cfg) {
            Ok(b) => {
                print!("{}", String::from_utf8_lossy(&b));
                return ExitCode::SUCCESS;
            }
            Err(e) => Err(e),
        },
        Command::Verify { only } => {
            if let Some(bad) = only.iter().find(|&&i| i == 0 || i > verify::CRITERIA) {
                eprintln!("error: no criterion {bad}");
                return ExitCode::from(1);
            }
            return match verify::run(cfg, &only).and_then(|r| Ok((write(&cfg.output, "verify_report.json", &json_bytes(&r)?)?, r))) {
                Ok((path, report)) => {
                    for c in &report.criteria {
                        println!("{}", c.line());
                    }
                    println!("report: {}", path.display());
                    if report.all_passed {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(2)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(1)
                }
            };
        }
    };
    match result {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
