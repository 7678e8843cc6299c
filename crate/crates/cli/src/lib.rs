//! Command-line front end for the srlab rounding library.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use srlab_core::distopt::{
    optimize_table, preset_config, table_profile, EndpointTie, MopConfig, Preset, PsoConfig,
    DEFAULT_GRID_SIZE,
};
use srlab_core::experiments::{
    run_inner_product_experiment, run_sqrt_experiment, run_summation_experiment,
    validate_variance_bound, CaseId, NewtonConfig, VarBoundConfig, DEFAULT_REPETITIONS, DOT_SIZES,
    SQRT_TEST_VALUES,
};
use srlab_core::rounding::round;
use srlab_core::stats::contour_grid;
use srlab_core::{Base, RandomStream, RoundingSpec};

pub mod distfile;
pub mod modes;
pub mod report;

use distfile::DistributionFile;
use modes::{load_tables, resolve, ModeName, DEFAULT_MODES};
use report::Table;

/// Environment variable capping the worker thread count.
pub const THREADS_ENV: &str = "SRLAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "srlab",
    version,
    about = "Deterministic and stochastic rounding experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Optimize a probability table and write it as JSON.
    Optimize(OptimizeArgs),
    /// Round a single value.
    Round(RoundArgs),
    /// Run one of the experiment studies and write a CSV report.
    #[command(subcommand)]
    Experiment(Experiment),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaseArg {
    Binary,
    Decimal,
}

impl From<BaseArg> for Base {
    fn from(b: BaseArg) -> Self {
        match b {
            BaseArg::Binary => Base::Binary,
            BaseArg::Decimal => Base::Decimal,
        }
    }
}

#[derive(Debug, Args)]
pub struct PsoArgs {
    #[arg(long, default_value_t = DEFAULT_GRID_SIZE)]
    pub grid_size: usize,
    #[arg(long, default_value_t = 50)]
    pub swarm: usize,
    #[arg(long, default_value_t = 200)]
    pub iterations: usize,
    #[arg(long, default_value_t = 0.729)]
    pub inertia: f64,
    #[arg(long, default_value_t = 1.49445)]
    pub cognitive: f64,
    #[arg(long, default_value_t = 1.49445)]
    pub social: f64,
    #[arg(long, default_value_t = 0.5)]
    pub velocity_clamp: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl PsoArgs {
    fn config(&self) -> PsoConfig {
        PsoConfig {
            swarm_size: self.swarm,
            iterations: self.iterations,
            inertia: self.inertia,
            cognitive: self.cognitive,
            social: self.social,
            velocity_clamp: self.velocity_clamp,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    /// One of bias-min, var-min-floor, var-min-ceil, nearest-like, d1, d2.
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    pub preset: Option<Preset>,
    /// JSON file with `mop` settings and optional `label` and `tie`.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub pso: PsoArgs,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Objective settings read by `optimize --config`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizeConfig {
    #[serde(default = "default_label")]
    pub label: String,
    pub mop: MopConfig,
    #[serde(default = "default_tie")]
    pub tie: EndpointTie,
}

fn default_label() -> String {
    "custom".into()
}

fn default_tie() -> EndpointTie {
    EndpointTie::NearestUnbiased
}

#[derive(Debug, Args)]
pub struct RoundArgs {
    #[arg(allow_negative_numbers = true)]
    pub x: f64,
    #[arg(long, value_enum)]
    pub mode: ModeName,
    /// Number of fractional digits.
    #[arg(long, default_value_t = 0)]
    pub n: u32,
    #[arg(long, value_enum, default_value_t = BaseArg::Decimal)]
    pub base: BaseArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Draws for stochastic modes; deterministic modes print one value.
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Comma-separated mode names.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub modes: Vec<ModeName>,
    /// Distribution files to run as additional modes.
    #[arg(long)]
    pub table: Vec<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_REPETITIONS)]
    pub reps: usize,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl CommonArgs {
    fn modes(&self) -> Result<Vec<modes::NamedMode>> {
        let names = if self.modes.is_empty() {
            DEFAULT_MODES.to_vec()
        } else {
            self.modes.clone()
        };
        resolve(&names, &load_tables(&self.table)?)
    }
}

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// Repeated summation of the four input cases.
    Sum {
        /// Cases to run (I, II, III, IV); all when absent.
        #[arg(long, value_delimiter = ',')]
        case: Vec<CaseId>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Rounded Newton iteration for square roots.
    Sqrt {
        /// Radicands; the five magnitude bands when absent.
        #[arg(long, value_delimiter = ',')]
        a: Vec<f64>,
        /// Grid spacing, a power of ten or of two.
        #[arg(long, conflicts_with_all = ["n", "base"])]
        delta: Option<f64>,
        #[arg(long, default_value_t = 3)]
        n: u32,
        #[arg(long, value_enum, default_value_t = BaseArg::Decimal)]
        base: BaseArg,
        #[arg(long, default_value_t = 1.0)]
        x0: f64,
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        n_max: usize,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Inner products of sine vectors on the integer grid.
    Dot {
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Empirical stochastic-rounding variance against its bound.
    Varbound {
        #[arg(long, default_value_t = 4)]
        bits: u32,
        #[arg(long, default_value_t = 2.0)]
        x_max: f64,
        #[arg(long, default_value_t = 1e-4)]
        step: f64,
        #[arg(long, default_value_t = 10_000)]
        draws: usize,
        /// Keep every stride-th point.
        #[arg(long, default_value_t = 1)]
        stride: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Worst-case relative error of a stochastically rounded product.
    Contour {
        /// Cells per axis.
        #[arg(long, default_value_t = 200)]
        res: usize,
        #[arg(long, default_value_t = 4.0)]
        x1_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Applies `SRLAB_THREADS` to the global worker pool.
pub fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("{THREADS_ENV} must be a positive integer, got '{raw}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Optimize(args) => cmd_optimize(&args),
        Command::Round(args) => cmd_round(&args, &mut io::stdout().lock()),
        Command::Experiment(exp) => cmd_experiment(&exp),
    }
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
        None => {
            io::stdout().lock().write_all(bytes)?;
            Ok(())
        }
    }
}

pub fn cmd_optimize(args: &OptimizeArgs) -> Result<()> {
    let (mop, tie, label) = match (&args.preset, &args.config) {
        (Some(p), _) => (preset_config(*p), p.tie_break(), p.label().to_string()),
        (None, Some(path)) => {
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let cfg: OptimizeConfig = serde_json::from_str(&text)
                .with_context(|| format!("parsing {}", path.display()))?;
            (cfg.mop, cfg.tie, cfg.label)
        }
        (None, None) => bail!("one of --preset or --config is required"),
    };
    let pso = args.pso.config();
    let table = optimize_table(&mop, tie, args.pso.grid_size, &pso, label)?;
    let file = DistributionFile::new(&table, mop, pso);
    emit(args.out.as_deref(), file.to_json()?.as_bytes())?;

    let prof = table_profile(&table, mop.delta);
    let summary = format!(
        "{}: bias in [{}, {}], max |bias| {}, variance in [{}, {}]\n",
        table.label(),
        prof.min_bias,
        prof.max_bias,
        prof.max_abs_bias,
        prof.min_variance,
        prof.max_variance
    );
    // Keep standard output clean when it carries the table.
    if args.out.is_some() {
        io::stdout().lock().write_all(summary.as_bytes())?;
    } else {
        io::stderr().lock().write_all(summary.as_bytes())?;
    }
    Ok(())
}

pub fn cmd_round<W: Write>(args: &RoundArgs, out: &mut W) -> Result<()> {
    let spec = RoundingSpec::new(args.n, args.base.into())?;
    let tables = load_tables(args.table.as_slice())?;
    let resolved = resolve(&[args.mode], &tables)?;
    let mode = match resolved.as_slice() {
        [one] => &one.mode,
        _ => bail!("mode '{}' needs exactly one table", args.mode.token()),
    };
    let count = if mode.is_stochastic() { args.count } else { 1 };
    let mut rng = RandomStream::new(args.seed);
    for _ in 0..count {
        writeln!(out, "{}", round(args.x, mode, &spec, &mut rng)?)?;
    }
    Ok(())
}

/// Spec whose spacing is exactly `delta`.
pub fn spec_for_delta(delta: f64) -> Result<RoundingSpec> {
    for base in [Base::Decimal, Base::Binary] {
        for n in 0..=60 {
            if let Ok(spec) = RoundingSpec::new(n, base) {
                if spec.delta() == delta {
                    return Ok(spec);
                }
            }
        }
    }
    bail!("delta {delta} is not a power of ten or of two")
}

pub fn cmd_experiment(exp: &Experiment) -> Result<()> {
    let (table, out) = build_report(exp)?;
    let mut bytes = Vec::new();
    table.write_to(&mut bytes)?;
    emit(out, &bytes)
}

/// Runs the experiment and returns the report with its output path.
pub fn build_report(exp: &Experiment) -> Result<(Table, Option<&Path>)> {
    match exp {
        Experiment::Sum { case, common } => {
            let cases = if case.is_empty() {
                CaseId::ALL.to_vec()
            } else {
                case.clone()
            };
            let modes = common.modes()?;
            let mut t = Table::new(&report::SUM_HEADER);
            for c in cases {
                for m in &modes {
                    let r = run_summation_experiment(c, &m.mode, common.reps, common.seed)?;
                    t.push(report::sum_row(&c.to_string(), &m.name, &r));
                }
            }
            Ok((t, common.out.as_deref()))
        }
        Experiment::Sqrt {
            a,
            delta,
            n,
            base,
            x0,
            tol,
            n_max,
            common,
        } => {
            let spec = match delta {
                Some(d) => spec_for_delta(*d)?,
                None => RoundingSpec::new(*n, (*base).into())?,
            };
            let cfg = NewtonConfig {
                x0: *x0,
                tol: *tol,
                n_max: *n_max,
                spec,
            };
            cfg.validate()?;
            let values = if a.is_empty() {
                SQRT_TEST_VALUES.to_vec()
            } else {
                a.clone()
            };
            let modes = common.modes()?;
            let mut t = Table::new(&report::SQRT_HEADER);
            for &v in &values {
                for m in &modes {
                    let r = run_sqrt_experiment(v, Some(&m.mode), &cfg, common.reps, common.seed)?;
                    t.push(report::sqrt_row(v, &m.name, spec.delta(), &r));
                }
            }
            Ok((t, common.out.as_deref()))
        }
        Experiment::Dot { sizes, common } => {
            let sizes = if sizes.is_empty() {
                DOT_SIZES.to_vec()
            } else {
                sizes.clone()
            };
            if let Some(bad) = sizes.iter().find(|&&n| n < 2) {
                bail!("vector size {bad} is below 2");
            }
            let modes = common.modes()?;
            let mut t = Table::new(&report::DOT_HEADER);
            for &n in &sizes {
                for m in &modes {
                    let r = run_inner_product_experiment(n, &m.mode, common.reps, common.seed)?;
                    t.push(report::dot_row(n, &m.name, &r));
                }
            }
            Ok((t, common.out.as_deref()))
        }
        Experiment::Varbound {
            bits,
            x_max,
            step,
            draws,
            stride,
            seed,
            out,
        } => {
            let cfg = VarBoundConfig {
                n_bits: *bits,
                x_max: *x_max,
                step: *step,
                draws: *draws,
                stride: *stride,
                seed: *seed,
            };
            let mut t = Table::new(&report::VARBOUND_HEADER);
            for p in validate_variance_bound(&cfg)? {
                t.push(report::varbound_row(&p));
            }
            Ok((t, out.as_deref()))
        }
        Experiment::Contour { res, x1_max, out } => {
            let cells = contour_grid((0.0, *x1_max), (0.0, 1.0), (*res, *res))?;
            let mut t = Table::new(&report::CONTOUR_HEADER);
            for c in &cells {
                t.push(report::contour_row(c));
            }
            Ok((t, out.as_deref()))
        }
    }
}
