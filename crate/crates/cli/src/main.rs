//! `hankel-lab`: spectra, local distance profiles and rearrangements from the command line.

mod commands;
mod config;
mod error;
mod plot;
mod suites;
mod table;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Output;
use crate::config::RunConfig;
use crate::error::CliError;
use crate::table::Table;

#[derive(Parser, Debug)]
#[command(
    name = "hankel-lab",
    version,
    about = "Hankel operators on Fock and weighted Bergman spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// `key=value` file; flags given on the command line take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Weight model, `fock:ALPHA` or `bergman:ALPHA`
    #[arg(long, global = true)]
    space: Option<String>,
    /// Catalog symbol name or monomial `a,b` for z^a conj(z)^b
    #[arg(long, global = true)]
    symbol: Option<String>,
    /// Disk scale: local disks have radius delta * tau(z)
    #[arg(long, global = true)]
    delta: Option<String>,
    /// Lattice reach: half-side of the square (Fock) or outer ring radius (Bergman)
    #[arg(long, global = true)]
    extent: Option<String>,
    /// Number of basis vectors N kept on the domain side
    #[arg(long, global = true)]
    trunc: Option<String>,
    /// Dimension M of the holomorphic projection
    #[arg(long, global = true)]
    proj: Option<String>,
    /// Maximum polynomial degree of local holomorphic fits
    #[arg(long, global = true)]
    degree: Option<String>,
    /// Schatten / Lebesgue exponent
    #[arg(long, global = true)]
    p: Option<String>,
    /// Seed for randomized checks
    #[arg(long, global = true)]
    seed: Option<String>,
    /// Output path; standard output when omitted
    #[arg(long, global = true)]
    out: Option<String>,
}

impl Common {
    fn flags(&self) -> Vec<(&'static str, Option<String>)> {
        vec![
            ("space", self.space.clone()),
            ("symbol", self.symbol.clone()),
            ("delta", self.delta.clone()),
            ("extent", self.extent.clone()),
            ("trunc", self.trunc.clone()),
            ("proj", self.proj.clone()),
            ("degree", self.degree.clone()),
            ("p", self.p.clone()),
            ("seed", self.seed.clone()),
            ("out", self.out.clone()),
        ]
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Singular values of the truncated Hankel operator, as CSV `n,s_n`
    Spectrum {
        #[command(flatten)]
        common: Common,
    },
    /// Local distance profile over a lattice, as CSV
    Ida {
        #[command(flatten)]
        common: Common,
    },
    /// Non-increasing rearrangement of a profile column, as CSV `t,fstar`
    Rearrange {
        #[command(flatten)]
        common: Common,
        /// Profile CSV written by `ida`; computed from the configuration when omitted
        #[arg(long = "in")]
        input: Option<String>,
        /// Profile column to rearrange, `G` or `MO`
        #[arg(long)]
        column: Option<String>,
    },
    /// Decay comparison of a spectrum against a rearranged profile
    Compare {
        #[command(flatten)]
        common: Common,
        /// Spectrum CSV written by `spectrum`
        #[arg(long)]
        spectrum: Option<String>,
        /// Profile CSV written by `ida`
        #[arg(long)]
        ida: Option<String>,
        /// Index map `power:q`, sampling the rearrangement at n^q
        #[arg(long)]
        rho: Option<String>,
        /// Inclusive index window `lo,hi`
        #[arg(long)]
        window: Option<String>,
    },
    /// Structural checks; exits 0 only when every check passes
    Verify {
        #[command(flatten)]
        common: Common,
        /// One of lattice, quadrature, lemmas, rearrange
        #[arg(long)]
        suite: Option<String>,
    },
    /// Polyline SVG of a CSV file
    Plot {
        #[command(flatten)]
        common: Common,
        #[arg(long = "in")]
        input: Option<String>,
        /// Plot log10 of both axes, dropping nonpositive values
        #[arg(long)]
        loglog: bool,
    },
}

fn load(
    common: &Common,
    extra: Vec<(&'static str, Option<String>)>,
) -> Result<RunConfig, CliError> {
    let mut flags = common.flags();
    flags.extend(extra);
    RunConfig::load(common.config.as_deref(), flags)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Numerical(format!("cannot write to stdout: {e}"))),
    }
}

fn emit(cfg: &RunConfig, output: Output) -> Result<(), CliError> {
    let out = cfg.path("out");
    write_output(out.as_deref(), &output.body)?;
    if let Some(diag) = output.diagnostics {
        if out.is_some() {
            print!("{diag}");
        } else {
            eprint!("{diag}");
        }
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum { common } => {
            let cfg = load(&common, vec![])?;
            emit(&cfg, commands::cmd_spectrum(&cfg)?)
        }
        Command::Ida { common } => {
            let cfg = load(&common, vec![])?;
            emit(&cfg, commands::cmd_ida(&cfg)?)
        }
        Command::Rearrange {
            common,
            input,
            column,
        } => {
            let cfg = load(&common, vec![("in", input), ("column", column)])?;
            emit(&cfg, commands::cmd_rearrange(&cfg)?)
        }
        Command::Compare {
            common,
            spectrum,
            ida,
            rho,
            window,
        } => {
            let cfg = load(
                &common,
                vec![
                    ("spectrum", spectrum),
                    ("ida", ida),
                    ("rho", rho),
                    ("window", window),
                ],
            )?;
            emit(&cfg, commands::cmd_compare(&cfg)?)
        }
        Command::Verify { common, suite } => {
            let cfg = load(&common, vec![("suite", suite)])?;
            let checks = suites::run_suite(cfg.require_str("suite")?, cfg.seed()?)?;
            let mut report = String::new();
            for c in &checks {
                let tag = if c.pass { "PASS" } else { "FAIL" };
                report.push_str(&format!("{tag} {}: {}\n", c.name, c.detail));
            }
            emit(
                &cfg,
                Output {
                    body: report,
                    diagnostics: None,
                },
            )?;
            let failed = checks.iter().filter(|c| !c.pass).count();
            if failed > 0 {
                return Err(CliError::Numerical(format!(
                    "{failed} of {} checks failed",
                    checks.len()
                )));
            }
            Ok(())
        }
        Command::Plot {
            common,
            input,
            loglog,
        } => {
            let flag = loglog.then(|| "true".to_string());
            let cfg = load(&common, vec![("in", input), ("loglog", flag)])?;
            let table = Table::read(&cfg.require_path("in")?)?;
            let svg = plot::render_svg(&table, cfg.loglog()?)?;
            emit(
                &cfg,
                Output {
                    body: svg,
                    diagnostics: None,
                },
            )
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hankel-lab: {e}");
            if let CliError::Config(_) = e {
                eprintln!("run `hankel-lab --help` for usage");
            }
            e.exit_code()
        }
    }
}
