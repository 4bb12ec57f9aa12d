//! CLI for the empty-ball toolkit: run estimators over an experiment
//! config, query exact oracles and survival numerics, and emit reports.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use emptyball::gw;
use emptyball::limits;
use emptyball::offspring::Regime;
use emptyball::oracle::{self, LatticeStep};
use emptyball::pipeline::{
    self, config::ConfigFile, report, EstimatorKind, ExperimentConfig, OutputFormat, ReportRow,
    Verdict,
};

#[derive(Parser)]
#[command(
    name = "emptyball",
    version,
    about = "Empty-ball statistics of branching random walks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Experiment config (TOML with [offspring], [step], [experiment]).
    #[arg(long)]
    config: PathBuf,
    /// Override the config's master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's worker count.
    #[arg(long)]
    workers: Option<usize>,
    /// Output base path (extension added per format).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(clap::ValueEnum, Clone, Copy)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Direct estimator (whole Poisson fields) over the config grid.
    Simulate(CommonArgs),
    /// Factorized estimator (stratified hit integral) over the config grid.
    Factorize(CommonArgs),
    /// Run the configured estimator(s), write reports, print verdicts.
    Report(CommonArgs),
    /// Exact lattice oracle: no-hit table, empty-ball tail, log-mass.
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        /// Generation count (defaults to the largest n in the config).
        #[arg(long)]
        n: Option<u64>,
        /// Ball radius (defaults to the largest r in the config, unscaled).
        #[arg(long)]
        r: Option<f64>,
    },
    /// Survival-probability sequence and its limit constant.
    Survival {
        #[command(flatten)]
        common: CommonArgs,
        /// Iterate q_n out to this generation.
        #[arg(long, default_value_t = 1_000_000)]
        n_max: usize,
    },
    /// Closed-form theory bands for the config grid.
    Theory(CommonArgs),
}

fn load(common: &CommonArgs) -> Result<ExperimentConfig, emptyball::Error> {
    let file = ConfigFile::from_path(&common.config)?;
    let mut cfg = file.resolve()?;
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(workers) = common.workers {
        cfg.workers = Some(workers);
    }
    if let Some(out) = &common.out {
        cfg.output = Some(out.clone());
    }
    Ok(cfg)
}

fn emit_report(
    rows: &[ReportRow],
    cfg: &ExperimentConfig,
    common: &CommonArgs,
) -> Result<(), emptyball::Error> {
    match &cfg.output {
        Some(base) => {
            let written = report::write_outputs(rows, base, common.format.into())?;
            for path in written {
                eprintln!("wrote {}", path.display());
            }
        }
        None => match common.format {
            Format::Csv => print!("{}", report::csv_string(rows)),
            Format::Json => println!("{}", report::json_string(rows)?),
        },
    }
    Ok(())
}

fn run_with_estimator(
    common: &CommonArgs,
    force: Option<EstimatorKind>,
) -> Result<bool, emptyball::Error> {
    let mut cfg = load(common)?;
    if let Some(kind) = force {
        cfg.estimator = kind;
    }
    let rep = pipeline::run_experiment(&cfg)?;
    emit_report(&rep.rows, &cfg, common)?;
    for line in &rep.summaries {
        eprintln!("{line}");
    }
    Ok(rep.rows.iter().all(|r| r.verdict != Verdict::Fail))
}

fn run_oracle(common: &CommonArgs, n: Option<u64>, r: Option<f64>) -> Result<(), emptyball::Error> {
    let cfg = load(common)?;
    let n = n.unwrap_or_else(|| *cfg.n_list.last().unwrap());
    let r = r.unwrap_or_else(|| *cfg.r_list.last().unwrap());
    let step = LatticeStep::rademacher();
    let table = oracle::dp_no_hit(&cfg.law, n, r, &step)?;
    let tail = oracle::exact_tail_lattice(&cfg.law, n, r, &step)?;
    let mass = oracle::u_integral(&cfg.law, n, r, &step)?;
    let (continuum, quad_err) = oracle::exact_tail_continuum(&cfg.law, n, r, &step)?;

    let mut csv = String::from("x,h_n_x\n");
    for (x, h) in table.sites() {
        csv.push_str(&format!("{x},{h:.17e}\n"));
    }
    match &cfg.output {
        Some(base) => {
            let path = base.with_extension("csv");
            if let Some(dir) = path.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)?;
                }
            }
            std::fs::write(&path, csv)?;
            eprintln!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    eprintln!("exact lattice tail P(R_{n} >= {r}) = {tail:.12}");
    eprintln!("integrated log no-hit mass = {mass:.12}");
    eprintln!("continuum-field tail = {continuum:.12} (quadrature error {quad_err:.3e})");
    Ok(())
}

fn run_survival(common: &CommonArgs, n_max: usize) -> Result<(), emptyball::Error> {
    let cfg = load(common)?;
    let seq = gw::survival_sequence(&cfg.law, n_max);
    println!("n,q_n,scaled");
    let mut n = 1usize;
    while n <= n_max {
        let q = seq.q[n];
        let scaled = match cfg.law.regime() {
            Regime::CriticalFiniteVar => n as f64 * q,
            Regime::CriticalStable => {
                let beta = cfg.law.beta().unwrap();
                n as f64 * q.powf(beta) * cfg.law.c_coef().unwrap()
            }
            Regime::Subcritical => q / cfg.law.mean().powi(n as i32),
        };
        println!("{n},{q:.12e},{scaled:.12e}");
        n *= 4;
    }
    let constant = gw::survival_constant(&cfg.law)?;
    eprintln!(
        "regime {}: survival constant = {constant:.12}",
        cfg.law.regime()
    );
    Ok(())
}

fn run_theory(common: &CommonArgs) -> Result<(), emptyball::Error> {
    let cfg = load(common)?;
    println!("regime,d,n,r,a_n,band_lo,band_hi,band_exact,advisory_lo,advisory_hi");
    for &n in &cfg.n_list {
        let a_n = cfg.policy.a(n);
        for &r in &cfg.r_list {
            let band = limits::theory_band(&cfg.law, &cfg.step, cfg.d, r)?;
            let exact = band.exact.map(|v| format!("{v:.9e}")).unwrap_or_default();
            let (alo, ahi) = band
                .advisory
                .map(|(a, b)| (format!("{a:.9e}"), format!("{b:.9e}")))
                .unwrap_or_default();
            println!(
                "{},{},{n},{r},{a_n:.9e},{:.9e},{:.9e},{exact},{alo},{ahi}",
                band.regime, cfg.d, band.lo, band.hi
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Simulate(c) => run_with_estimator(c, Some(EstimatorKind::Direct)),
        Command::Factorize(c) => run_with_estimator(c, Some(EstimatorKind::Factorized)),
        Command::Report(c) => run_with_estimator(c, None),
        Command::Oracle { common, n, r } => run_oracle(common, *n, *r).map(|()| true),
        Command::Survival { common, n_max } => run_survival(common, *n_max).map(|()| true),
        Command::Theory(c) => run_theory(c).map(|()| true),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
