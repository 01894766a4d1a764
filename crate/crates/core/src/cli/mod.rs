//! Command-line surface: `compute`, `verify` and `spline`.
//!
//! Exit codes: 0 ok, 2 validation, 3 check failure, 4 capacity.

pub mod compute;
pub mod config;
pub mod spline;
pub mod verify;

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::divdiff::SplineKind;
use crate::error::Error;
use config::{parse_orders, parse_tolerance, Grid, JobConfig, OutputFormat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_CHECK_FAILURE: i32 = 3;
pub const EXIT_CAPACITY: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "ssf", version, about = "Higher-order spectral shift functions of Hermitian matrix pairs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write η₁…η_p as exact piecewise polynomials, grid samples and masses.
    Compute(JobArgs),
    /// Run every check family on given or generated pairs and write report.json.
    Verify(JobArgs),
    /// Tabulate a basic spline or cumulative kernel.
    Spline(SplineArgs),
}

#[derive(Debug, Args)]
pub struct JobArgs {
    /// Highest order p.
    #[arg(short = 'p', long = "order")]
    pub order: Option<usize>,
    /// Matrix file for H₀.
    #[arg(long)]
    pub h0: Option<PathBuf>,
    /// Matrix file for V.
    #[arg(long)]
    pub v: Option<PathBuf>,
    /// Sampling grid MIN:MAX:N.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
    /// Seed for generated ensembles.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance override NAME=VALUE, repeatable.
    #[arg(long = "tol")]
    pub tol: Vec<String>,
    /// Generate COUNT random pairs of dimension DIM.
    #[arg(long, num_args = 2, value_names = ["COUNT", "DIM"])]
    pub random: Option<Vec<usize>>,
    /// Generate pairs whose H₀ spectrum spans [−SCALE, SCALE].
    #[arg(long = "wide-spectrum")]
    pub wide_spectrum: Option<f64>,
    /// Orders to verify, e.g. 1..5 or 1,3.
    #[arg(long)]
    pub orders: Option<String>,
}

#[derive(Debug, Args)]
pub struct SplineArgs {
    /// Comma-separated nodes.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub nodes: Vec<f64>,
    #[arg(long, value_enum, default_value_t = SplineKindArg::Basic)]
    pub kind: SplineKindArg,
    /// Sampling grid MIN:MAX:N.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<String>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SplineKindArg {
    Basic,
    Cumulative,
}

impl From<SplineKindArg> for SplineKind {
    fn from(k: SplineKindArg) -> Self {
        match k {
            SplineKindArg::Basic => SplineKind::Basic,
            SplineKindArg::Cumulative => SplineKind::Cumulative,
        }
    }
}

/// Default orders for `verify` without `--orders` or `--order`.
pub const DEFAULT_VERIFY_ORDERS: std::ops::RangeInclusive<usize> = 1..=5;

impl JobArgs {
    pub fn to_config(&self, require_order: bool) -> Result<JobConfig, Error> {
        let order = match (self.order, require_order) {
            (Some(p), _) => p,
            (None, true) => return Err(Error::Parse("--order is required".into())),
            (None, false) => *DEFAULT_VERIFY_ORDERS.end(),
        };
        let grid = self.grid.as_deref().map(str::parse::<Grid>).transpose()?;
        let mut tolerances = BTreeMap::new();
        for t in &self.tol {
            let (name, value) = parse_tolerance(t)?;
            tolerances.insert(name, value);
        }
        let random = self.random.as_ref().map(|v| (v[0], v[1]));
        let orders = match (&self.orders, self.order) {
            (Some(s), _) => parse_orders(s)?,
            (None, Some(p)) => (1..=p).collect(),
            (None, None) => DEFAULT_VERIFY_ORDERS.collect(),
        };
        let config = JobConfig {
            order,
            h0: self.h0.clone(),
            v: self.v.clone(),
            grid,
            tolerances,
            seed: self.seed,
            format: self.format,
            out: self.out.clone(),
            random,
            wide_spectrum: self.wide_spectrum,
            orders,
        };
        config.validate()?;
        Ok(config)
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity { .. } => EXIT_CAPACITY,
        _ => EXIT_VALIDATION,
    }
}

/// Runs a parsed command, printing a short summary, and returns the exit code.
pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn execute(cli: Cli) -> Result<i32, Error> {
    match cli.command {
        Command::Compute(args) => {
            let config = args.to_config(true)?;
            let out = compute::cmd_compute(&config)?;
            println!("wrote {}", out.densities.display());
            if let Some(s) = &out.samples {
                println!("wrote {}", s.display());
            }
            println!("wrote {}", out.masses.display());
            Ok(EXIT_OK)
        }
        Command::Verify(args) => {
            let config = args.to_config(false)?;
            let (report, out) = verify::cmd_verify(&config)?;
            for (name, fam) in &report.summary.families {
                println!("{:<32} {:>5}/{:<5} worst {:.3e}", name, fam.passed, fam.total, fam.worst_rel_error);
            }
            println!("{} of {} checks passed; wrote {}", report.summary.passed, report.summary.total, out.report.display());
            Ok(if report.all_passed() { EXIT_OK } else { EXIT_CHECK_FAILURE })
        }
        Command::Spline(args) => {
            let grid = args.grid.as_deref().map(str::parse::<Grid>).transpose()?;
            let (summary, written) = spline::cmd_spline(&args.nodes, args.kind.into(), grid.as_ref(), &args.out)?;
            println!("integral {}", config::fmt_num(summary.integral));
            for w in written {
                println!("wrote {}", w.display());
            }
            Ok(EXIT_OK)
        }
    }
}
