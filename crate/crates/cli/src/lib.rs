//! Command-line front end for the `cogrates` library.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub mod config;
pub mod exec;
pub mod io;
pub mod verify;

pub use config::RunConfig;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error("numeric: {0}")]
    Numeric(String),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Config(_) | CliError::Io(_) => 1,
            CliError::VerifyFailed(_) => 2,
            CliError::Numeric(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Config(m) | CliError::Io(m) | CliError::Numeric(m) | CliError::VerifyFailed(m) => m,
        }
    }
}

impl From<cogrates::region::RegionError> for CliError {
    fn from(e: cogrates::region::RegionError) -> Self {
        use cogrates::region::RegionError;
        match e {
            RegionError::Model(cogrates::ModelError::Spec(s)) => CliError::Config(s.to_string()),
            RegionError::Model(cogrates::ModelError::VariantUnsupported(m)) => {
                CliError::Config(format!("{m} needs an external covariance (--cov)"))
            }
            other => CliError::Numeric(other.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "cogrates", version, about = "Achievable rate regions of three-user cognitive interference channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte-Carlo region estimate; writes pareto.csv, metrics.txt, slice_R1_0.csv
    Region(Common),
    /// Print a bound catalog
    Catalog(Common),
    /// Run the oracle suites
    Verify(VerifyArgs),
    /// Print the covariance of one parameter draw as CSV
    DumpSigma(Common),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Flat key=value file; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    /// cms1, cms2, pms1 or pms2
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    draws: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Transmit power of user 1 in dB
    #[arg(long, allow_negative_numbers = true)]
    p1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    p2: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    p3: Option<f64>,
    /// Noise variance at receiver 1 (linear)
    #[arg(long)]
    q1: Option<f64>,
    #[arg(long)]
    q2: Option<f64>,
    #[arg(long)]
    q3: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    a12: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    a13: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    a21: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    a23: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    a31: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    a32: Option<f64>,
    /// Worker thread cap
    #[arg(long)]
    threads: Option<usize>,
    /// External covariance CSV (header of variable names, then rows)
    #[arg(long)]
    cov: Option<PathBuf>,
    /// Force all alpha and beta coefficients to zero
    #[arg(long)]
    zero_gp: bool,
    /// Draw index for dump-sigma
    #[arg(long)]
    draw: Option<u64>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Samples per draw for the sampling suite
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Adds a relative error to one closed-form table entry (1-based ROW,COL)
    #[arg(long, hide = true, value_name = "ROW,COL")]
    perturb_theta: Option<String>,
}

impl Common {
    fn to_config(&self) -> Result<RunConfig, CliError> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            cfg.apply_text(&text)?;
        }
        let mut set = |k: &str, v: Option<String>| v.map_or(Ok(()), |v| cfg.set(k, &v));
        set("model", self.model.clone())?;
        set("draws", self.draws.map(|v| v.to_string()))?;
        set("seed", self.seed.map(|v| v.to_string()))?;
        set("out", self.out.as_ref().map(|p| p.display().to_string()))?;
        for (k, v) in [
            ("p1", self.p1),
            ("p2", self.p2),
            ("p3", self.p3),
            ("q1", self.q1),
            ("q2", self.q2),
            ("q3", self.q3),
            ("a12", self.a12),
            ("a13", self.a13),
            ("a21", self.a21),
            ("a23", self.a23),
            ("a31", self.a31),
            ("a32", self.a32),
        ] {
            set(k, v.map(|v| v.to_string()))?;
        }
        set("threads", self.threads.map(|v| v.to_string()))?;
        set("cov", self.cov.as_ref().map(|p| p.display().to_string()))?;
        set("draw", self.draw.map(|v| v.to_string()))?;
        if self.zero_gp {
            cfg.zero_gp = true;
        }
        Ok(cfg)
    }
}

fn parse_cell(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Usage(format!("--perturb-theta expects ROW,COL with 1 <= ROW,COL <= 8, got `{s}`"));
    let (r, c) = s.split_once(',').ok_or_else(bad)?;
    let r: usize = r.trim().parse().map_err(|_| bad())?;
    let c: usize = c.trim().parse().map_err(|_| bad())?;
    if !(1..=8).contains(&r) || !(1..=8).contains(&c) {
        return Err(bad());
    }
    Ok((r, c))
}

fn dispatch(cmd: Command, stdout: &mut dyn Write) -> Result<(), CliError> {
    let out = |stdout: &mut dyn Write, s: &str| stdout.write_all(s.as_bytes()).map_err(|e| CliError::Io(e.to_string()));
    match cmd {
        Command::Region(c) => {
            let cfg = c.to_config()?;
            let summary = exec::cmd_region(&cfg)?;
            out(stdout, &summary)
        }
        Command::Catalog(c) => {
            let cfg = c.to_config()?;
            out(stdout, &cogrates::catalog::catalog_for(cfg.model).to_string())
        }
        Command::DumpSigma(c) => {
            let cfg = c.to_config()?;
            out(stdout, &exec::cmd_dump_sigma(&cfg)?)
        }
        Command::Verify(v) => {
            let cfg = v.common.to_config()?;
            let perturb = v.perturb_theta.as_deref().map(parse_cell).transpose()?;
            let opts = verify::VerifyOptions { samples: v.samples, perturb_theta: perturb, ..verify::VerifyOptions::default() };
            let reports = verify::run_all(&cfg, &opts)?;
            for r in &reports {
                out(stdout, &format!("{r}\n"))?;
            }
            let failed: Vec<&str> = reports.iter().filter(|r| !r.passed).map(|r| r.name).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::VerifyFailed(failed.join(", ")))
            }
        }
    }
}

/// Runs the command line `args` (program name first) and returns the exit
/// code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = if code == 0 { write!(stdout, "{e}") } else { write!(stderr, "{e}") };
            return code;
        }
    };
    match dispatch(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}
