use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use conserve::Equation;
use conserve_cli::config::RunConfig;
use conserve_cli::output::write_table;
use conserve_cli::{cmd_convergence, cmd_make_reference, cmd_run, cmd_sweep, cmd_verify, CliError, VerifyRequest};

#[derive(Parser)]
#[command(name = "conserve", version, about = "Conservative finite difference schemes for BBM and NLS")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Directory for every file the command writes.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Seed of the random windows used by `verify`.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one scheme on one case.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a scheme over the grid of parameters in the `[sweep]` table.
    Sweep {
        #[arg(long)]
        config: PathBuf,
    },
    /// Check the characteristic identity of every law a scheme carries.
    Verify {
        /// Takes equation, scheme, parameters and trial count from a file.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_parser = parse_equation)]
        equation: Option<Equation>,
        #[arg(long)]
        scheme: Option<String>,
        /// Raw coefficients, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        params: Option<Vec<f64>>,
        #[arg(long)]
        trials: Option<usize>,
        /// Flip the sign of this flux term.
        #[arg(long)]
        flip_flux: Option<usize>,
        /// Flip the sign of this density term.
        #[arg(long)]
        flip_density: Option<usize>,
    },
    /// Errors at successive dyadic refinements and the fitted order.
    Convergence {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        levels: Option<usize>,
    },
    /// Regenerate the reference solution of a case.
    MakeReference {
        #[arg(long)]
        config: PathBuf,
    },
}

fn parse_equation(s: &str) -> Result<Equation, String> {
    match s.to_ascii_lowercase().as_str() {
        "bbm" => Ok(Equation::Bbm),
        "nls" => Ok(Equation::Nls),
        _ => Err(format!("unknown equation `{s}` (expected bbm or nls)")),
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let out = &cli.out;
    // A record left by an earlier failure would be misleading now.
    let _ = std::fs::remove_file(out.join("error.csv"));
    match &cli.command {
        Command::Run { config } => {
            let r = cmd_run(&RunConfig::load(config)?, out)?.report;
            println!("{} on {}: error {:?}, Err = {:?}", r.scheme, r.case.label(), r.solution_error, r.err);
        }
        Command::Sweep { config } => {
            let sweep = cmd_sweep(&RunConfig::load(config)?, out)?;
            match sweep.best() {
                Some(p) => println!("argmin at parameters {:?}", p.params),
                None => println!("no successful point with a solution error"),
            }
        }
        Command::Verify { config, equation, scheme, params, trials, flip_flux, flip_density } => {
            let file = config.as_deref().map(RunConfig::load).transpose()?;
            let missing = |what: &str| CliError::Config(format!("verify needs --{what} or a configuration file"));
            let req = VerifyRequest {
                equation: equation.or(file.as_ref().map(|c| c.equation)).ok_or_else(|| missing("equation"))?,
                scheme: scheme.clone().or(file.as_ref().map(|c| c.scheme.clone())).ok_or_else(|| missing("scheme"))?,
                params: params.clone().or(file.as_ref().map(|c| c.params.clone())).unwrap_or_default(),
                trials: trials.or(file.as_ref().and_then(|c| c.verify.as_ref()).map(|v| v.trials)).unwrap_or(100),
                seed: cli.seed,
                flip_flux: *flip_flux,
                flip_density: *flip_density,
            };
            let checks = cmd_verify(&req, out);
            if let Ok(cs) = &checks {
                for c in cs {
                    println!("{:<40} {:.3e}{}", c.law, c.max_residual, if c.trials == 0 { "  (vacuous)" } else { "" });
                }
            }
            checks?;
        }
        Command::Convergence { config, levels } => {
            let cfg = RunConfig::load(config)?;
            let levels = levels.or(cfg.convergence.as_ref().map(|c| c.levels)).unwrap_or(3);
            let study = cmd_convergence(&cfg, levels, out)?;
            match study.order {
                Some(p) => println!("{}: fitted order {p:.3}", study.scheme),
                None => println!("{}: error {:e} (one level, no order)", study.scheme, study.rows[0].2),
            }
        }
        Command::MakeReference { config } => {
            let path = cmd_make_reference(&RunConfig::load(config)?, out)?;
            println!("reference written to {}", path.display());
        }
    }
    Ok(())
}

/// `kind,message` record on stderr and, when possible, in `error.csv`.
fn report_error(out: &Path, e: &CliError) {
    let rows = vec![vec![e.kind().to_string(), e.to_string()]];
    let mut w = csv::Writer::from_writer(std::io::stderr());
    let _ = w.write_record(["kind", "message"]);
    let _ = w.write_record(&rows[0]);
    let _ = w.flush();
    if std::fs::create_dir_all(out).is_ok() {
        let _ = write_table(&out.join("error.csv"), &["kind", "message"], &rows);
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report_error(&cli.out, &e);
            ExitCode::FAILURE
        }
    }
}
