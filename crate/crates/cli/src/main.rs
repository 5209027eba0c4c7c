//! `qrough` command-line interface.
//!
//! JSON goes to stdout, diagnostics to stderr. Exit status is 0 on success,
//! 1 on runtime or validation failures and 2 on usage errors.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use qrough::appendix::{build_lambda_exact, ExactLambda};
use qrough::campaign::{run_campaign_with, RecordsWriter};
use qrough::measures::{MIXED_RESIDUAL_TOL, PURE_RESIDUAL_TOL};
use qrough::phasespace::{run_oracle, ORACLE_TOL};
use qrough::rng::derive_seed;
use qrough::states::{ginibre_random, read_state_file};
use qrough::{
    CampaignConfig, DensityState, Ensemble, Error, MeasureTuple, OverlapTable, PhaseSpaceGrid, Result, TwoQubitState,
};

const LAMBDA_TOL: f64 = 1e-12;

#[derive(Parser)]
#[command(name = "qrough", version, about = "Concurrence and phase-space Roughness of two-qubit states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print every measure of a two-qubit state as JSON.
    Measure {
        /// State file: {"dim": 4, "matrix": [[[re, im], ...], ...]}
        #[arg(long)]
        state: PathBuf,
    },
    /// Check the Roughness/concurrence relations on a state or a random batch.
    Verify(VerifyArgs),
    /// Rebuild the Roughness quadratic form from overlap integrals.
    Lambda,
    /// Compare grid-integrated Roughness with the closed form.
    Oracle {
        /// Points per axis
        #[arg(long, default_value_t = 512, value_parser = clap::value_parser!(u32).range(64..))]
        grid: u32,
        /// Integration box is [-L, L]²
        #[arg(long, default_value_t = 7.0, value_parser = positive_f64)]
        halfwidth: f64,
    },
    /// Run a sampling campaign and write histogram.csv and summary.json.
    Sample(SampleArgs),
}

#[derive(Args)]
#[command(group = clap::ArgGroup::new("input").required(true).args(["state", "random"]))]
struct VerifyArgs {
    #[arg(long)]
    state: Option<PathBuf>,
    /// Number of random states to draw
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..), requires = "rank")]
    random: Option<u64>,
    /// Rank of the random states (1 draws Haar pure states)
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=4), requires = "random")]
    rank: Option<u8>,
    #[arg(long, default_value_t = 0, requires = "random")]
    seed: u64,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long, value_parser = parse_ensemble)]
    ensemble: Ensemble,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    samples: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Bins per axis
    #[arg(long, default_value_t = 200, value_parser = clap::value_parser!(u32).range(10..))]
    bins: u32,
    /// Output directory, created if missing
    #[arg(long)]
    out: PathBuf,
    /// Also write per-sample records.csv
    #[arg(long)]
    records: bool,
    /// Worker threads; results do not depend on this
    #[arg(long, env = "QROUGH_WORKERS", value_parser = clap::value_parser!(u32).range(1..))]
    workers: Option<u32>,
}

fn positive_f64(s: &str) -> std::result::Result<f64, String> {
    let x: f64 = s.parse().map_err(|e| format!("{e}"))?;
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(format!("must be a positive number, got {s}"))
    }
}

fn parse_ensemble(s: &str) -> std::result::Result<Ensemble, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Measure { state } => measure(&state),
        Command::Verify(args) => verify(&args),
        Command::Lambda => lambda(),
        Command::Oracle { grid, halfwidth } => oracle(grid as usize, halfwidth),
        Command::Sample(args) => sample(&args),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("qrough: {e}");
            ExitCode::from(1)
        }
    }
}

fn print_json(value: &impl Serialize) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn read_two_qubit(path: &Path) -> Result<TwoQubitState> {
    match read_state_file(path)? {
        DensityState::Two(s) => Ok(s),
        DensityState::Single(_) => Err(Error::InvalidDimension { expected: "a 4x4 two-qubit state", got: 2 }),
    }
}

fn measure(path: &Path) -> Result<bool> {
    print_json(&MeasureTuple::of(&read_two_qubit(path)?)?)?;
    Ok(true)
}

#[derive(Default, Serialize)]
struct VerifyReport {
    states: u64,
    pure_states: u64,
    max_residual_mixed: f64,
    max_residual_pure: Option<f64>,
    /// max |C − √(2δ₁)| over pure states
    max_concurrence_entropy_gap: Option<f64>,
    range_violations: u64,
    tolerance_mixed: f64,
    tolerance_pure: f64,
    passed: bool,
}

impl VerifyReport {
    fn push(&mut self, m: &MeasureTuple) {
        self.states += 1;
        self.max_residual_mixed = self.max_residual_mixed.max(m.residual_mixed());
        if let Some(r) = m.residual_pure() {
            self.pure_states += 1;
            self.max_residual_pure = Some(self.max_residual_pure.unwrap_or(0.0).max(r));
            let gap = (m.c - (2.0 * m.delta1).sqrt()).abs();
            self.max_concurrence_entropy_gap = Some(self.max_concurrence_entropy_gap.unwrap_or(0.0).max(gap));
        }
        if m.check_ranges().is_err() {
            self.range_violations += 1;
        }
    }

    fn finish(mut self) -> Self {
        let within = |x: Option<f64>| x.map_or(true, |x| x <= PURE_RESIDUAL_TOL);
        self.tolerance_mixed = MIXED_RESIDUAL_TOL;
        self.tolerance_pure = PURE_RESIDUAL_TOL;
        self.passed = self.max_residual_mixed <= MIXED_RESIDUAL_TOL
            && within(self.max_residual_pure)
            && within(self.max_concurrence_entropy_gap)
            && self.range_violations == 0;
        self
    }
}

fn verify(args: &VerifyArgs) -> Result<bool> {
    let mut report = VerifyReport::default();
    if let Some(path) = &args.state {
        report.push(&MeasureTuple::of(&read_two_qubit(path)?)?);
    } else if let (Some(n), Some(rank)) = (args.random, args.rank) {
        for i in 0..n {
            report.push(&MeasureTuple::of(&ginibre_random(rank as usize, derive_seed(args.seed, i))?)?);
        }
    }
    let report = report.finish();
    print_json(&report)?;
    if !report.passed {
        eprintln!("qrough: residual tolerance exceeded");
    }
    Ok(report.passed)
}

fn lambda() -> Result<bool> {
    let exact = build_lambda_exact()?;
    let target = ExactLambda::reference();
    let (approx, approx_target) = (exact.to_f64(), target.to_f64());
    let deviation = approx.max_deviation(&approx_target);
    let strings = |l: &ExactLambda| l.entries.map(|row| row.map(|x| x.to_string()));
    let overlaps: Vec<_> = OverlapTable::shared()
        .entries()
        .map(|e| {
            json!({
                "kind": e.kind,
                "n": e.n,
                "m": e.m,
                "n_prime": e.n_prime,
                "m_prime": e.m_prime,
                "value": e.value.to_string(),
                "approx": *e.value.numer() as f64 / *e.value.denom() as f64,
            })
        })
        .collect();
    print_json(&json!({
        "entries": approx.entries,
        "target": approx_target.entries,
        "max_deviation": deviation,
        "exact": {
            "entries": strings(&exact),
            "target": strings(&target),
            "max_deviation": exact.max_deviation(&target).to_string(),
        },
        "tolerance": LAMBDA_TOL,
        "overlaps": overlaps,
    }))?;
    Ok(deviation <= LAMBDA_TOL)
}

fn oracle(points: usize, half_width: f64) -> Result<bool> {
    let grid = PhaseSpaceGrid::new(half_width, points)?;
    let rows = run_oracle(&grid)?;
    let mut out = std::io::stdout().lock();
    writeln!(out, "grid {points}x{points} on [-{half_width}, {half_width}]^2, tolerance {ORACLE_TOL:e}")?;
    writeln!(out, "{:<12} {:>24} {:>24} {:>12}  status", "state", "closed_form_R2", "numeric_R2", "abs_error")?;
    for row in &rows {
        writeln!(
            out,
            "{:<12} {:>24.16e} {:>24.16e} {:>12.3e}  {}",
            row.label,
            row.closed_form,
            row.numeric,
            row.error(),
            if row.passes() { "ok" } else { "FAIL" }
        )?;
    }
    let worst = rows.iter().map(|r| r.error()).fold(0.0, f64::max);
    let failed = rows.iter().filter(|r| !r.passes()).count();
    writeln!(out, "max error {worst:.3e}; {} of {} rows within tolerance", rows.len() - failed, rows.len())?;
    Ok(failed == 0)
}

fn sample(args: &SampleArgs) -> Result<bool> {
    let workers = match args.workers {
        Some(w) => w as usize,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let config = CampaignConfig::new(args.ensemble, args.samples, args.seed)
        .with_bins(args.bins as usize)
        .with_workers(workers);
    config.validate()?;
    fs::create_dir_all(&args.out)?;

    let mut records = match args.records {
        true => Some(RecordsWriter::new(BufWriter::new(File::create(args.out.join("records.csv"))?))?),
        false => None,
    };
    let (hist, summary) = run_campaign_with(&config, |r| match records.as_mut() {
        Some(w) => w.write(r),
        None => Ok(()),
    })?;
    if let Some(w) = records {
        w.finish()?;
    }

    let mut csv = BufWriter::new(File::create(args.out.join("histogram.csv"))?);
    hist.write_csv(&mut csv)?;
    csv.flush()?;
    fs::write(args.out.join("summary.json"), summary.to_json()?)?;
    eprintln!("qrough: {} {} samples written to {}", args.samples, args.ensemble, args.out.display());
    Ok(true)
}
