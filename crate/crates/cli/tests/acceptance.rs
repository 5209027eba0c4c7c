//! Acceptance gate: one PASS/FAIL line per criterion, non-zero exit if any fails.

use std::path::Path;
use std::process::Command;
use std::time::Instant;

use qrough::campaign::Y_RANGE;
use qrough::measures::{concurrence, r_plus_sq, ENTROPY_WEIGHT};
use qrough::phasespace::run_oracle;
use qrough::rng::derive_seed;
use qrough::states::{bell, ginibre_random, haar_random_pure, pure_from_amplitudes};
use qrough::{build_lambda, BellKind, Complex64, LambdaMatrix, MeasureTuple, PhaseSpaceGrid};

const SAMPLES: u64 = 100_000;
const BINS: usize = 200;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome { passed, detail: detail.into() }
}

fn lambda_reconstruction() -> Outcome {
    let dev = build_lambda().max_deviation(&LambdaMatrix::reference());
    outcome(dev <= 1e-12, format!("max entry deviation {dev:e} (tol 1e-12)"))
}

fn fixtures() -> Outcome {
    let basis = |k: usize| {
        let mut a = [Complex64::new(0.0, 0.0); 4];
        a[k] = Complex64::new(1.0, 0.0);
        pure_from_amplitudes(a).unwrap()
    };
    let mut worst_r = 0.0f64;
    let mut worst_c = 0.0f64;
    let mut check_r = |got: f64, want: f64| worst_r = worst_r.max((got - want).abs());
    check_r(r_plus_sq(&basis(0)).unwrap(), 1.0 / 6.0);
    check_r(r_plus_sq(&basis(3)).unwrap(), 55.0 / 108.0);
    for kind in BellKind::ALL {
        let s = bell(kind);
        check_r(r_plus_sq(&s).unwrap(), 31.0 / 432.0);
        worst_c = worst_c.max((concurrence(&s).unwrap() - 1.0).abs());
    }
    let product_c = (0..4).map(|k| concurrence(&basis(k)).unwrap()).fold(0.0, f64::max);
    outcome(
        worst_r <= 1e-12 && worst_c <= 1e-10 && product_c == 0.0,
        format!("R+^2 error {worst_r:e} (tol 1e-12), Bell C error {worst_c:e} (tol 1e-10), product C {product_c}"),
    )
}

struct Sweep {
    max_mixed: [f64; 3],
    combined: (f64, f64),
    seconds: f64,
}

fn mixed_sweep() -> Sweep {
    let start = Instant::now();
    let mut max_mixed = [0.0; 3];
    let mut combined = (f64::INFINITY, f64::NEG_INFINITY);
    for (slot, rank) in [1usize, 2, 4].into_iter().enumerate() {
        for i in 0..SAMPLES {
            let s = ginibre_random(rank, derive_seed(1000 + rank as u64, i)).unwrap();
            let m = MeasureTuple::of(&s).unwrap();
            max_mixed[slot] = f64::max(max_mixed[slot], m.residual_mixed());
            let c = m.combined_sum();
            combined = (combined.0.min(c), combined.1.max(c));
        }
    }
    Sweep { max_mixed, combined, seconds: start.elapsed().as_secs_f64() }
}

fn mixed_identity(sweep: &Sweep) -> Outcome {
    let worst = sweep.max_mixed.iter().copied().fold(0.0, f64::max);
    outcome(
        worst <= 1e-10,
        format!(
            "max residual rank1 {:e}, rank2 {:e}, rank4 {:e} (tol 1e-10; {:.1} s)",
            sweep.max_mixed[0], sweep.max_mixed[1], sweep.max_mixed[2], sweep.seconds
        ),
    )
}

fn range_bound(sweep: &Sweep) -> Outcome {
    let (lo, hi) = sweep.combined;
    let tol = 1e-10;
    outcome(
        lo >= 1.0 / 6.0 - tol && hi <= 55.0 / 108.0 + tol,
        format!("combined sum over 3x10^5 states spans [{lo}, {hi}] within [1/6, 55/108] +- {tol:e}"),
    )
}

fn pure_identity() -> Outcome {
    let mut worst = 0.0f64;
    let mut worst_gap = 0.0f64;
    for i in 0..SAMPLES {
        let m = MeasureTuple::of(&haar_random_pure(derive_seed(2000, i))).unwrap();
        worst = worst.max(m.residual_pure().unwrap_or(f64::INFINITY));
        worst_gap = worst_gap.max((m.c - (2.0 * m.delta1).sqrt()).abs());
    }
    outcome(
        worst <= 1e-9 && worst_gap <= 1e-9,
        format!("max residual {worst:e}, max |C - sqrt(2 delta1)| {worst_gap:e} (tol 1e-9)"),
    )
}

fn phase_space_oracle() -> Outcome {
    let max_error = |points| {
        let rows = run_oracle(&PhaseSpaceGrid::new(7.0, points).unwrap()).unwrap();
        rows.iter().map(|r| r.error()).fold(0.0, f64::max)
    };
    let (e128, e256, e512) = (max_error(128), max_error(256), max_error(512));
    let within = e512 <= 2e-4;
    let shrinking = e128 > e256 && e256 > e512;
    outcome(
        within && shrinking,
        format!(
            "max error at 512 {e512:e} (tol 2e-4: {}); refinement 128 -> 256 -> 512: {e128:e} -> {e256:e} -> {e512:e} ({})",
            if within { "ok" } else { "exceeded" },
            if shrinking { "shrinking" } else { "not strictly shrinking" }
        ),
    )
}

fn qrough(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_qrough")).args(args).output().expect("qrough runs");
    assert!(out.status.success(), "qrough {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn sample(dir: &Path, ensemble: &str, workers: &str, records: bool) {
    let out = dir.to_str().unwrap();
    let samples = SAMPLES.to_string();
    let mut args = vec!["sample", "--ensemble", ensemble, "--samples", &samples, "--seed", "1", "--out", out];
    args.extend(["--workers", workers]);
    if records {
        args.push("--records");
    }
    qrough(&args);
}

/// `(i, j, count, [x_lo, x_hi, y_lo, y_hi])` for every histogram row.
fn read_histogram(path: &Path) -> Vec<(usize, usize, u64, [f64; 4])> {
    let text = std::fs::read_to_string(path).unwrap();
    let bin_w = (1.0 / BINS as f64, Y_RANGE.1 / BINS as f64);
    text.lines()
        .skip(1)
        .map(|line| {
            let f: Vec<&str> = line.split(',').collect();
            let e: Vec<f64> = f[..4].iter().map(|x| x.parse().unwrap()).collect();
            let i = ((e[0] + e[1]) / 2.0 / bin_w.0) as usize;
            let j = ((e[2] + e[3]) / 2.0 / bin_w.1) as usize;
            (i, j, f[4].parse().unwrap(), [e[0], e[1], e[2], e[3]])
        })
        .collect()
}

fn histogram_shape(dir: &Path) -> Outcome {
    let pure_dir = dir.join("shape-pure");
    let rank2_dir = dir.join("shape-rank2");
    sample(&pure_dir, "pure", "8", false);
    sample(&rank2_dir, "rank2", "8", false);

    let pure = read_histogram(&pure_dir.join("histogram.csv"));
    let total: u64 = pure.iter().map(|r| r.2).sum();
    // Each occupied bin must touch the strip 1/6 <= y + (39/216)x <= 55/108.
    let tol = 1e-10;
    let stray = pure
        .iter()
        .filter(|(_, _, _, [x_lo, x_hi, y_lo, y_hi])| {
            let (lo, hi) = (y_lo + ENTROPY_WEIGHT * x_lo, y_hi + ENTROPY_WEIGHT * x_hi);
            lo > 55.0 / 108.0 + tol || hi < 1.0 / 6.0 - tol
        })
        .count();
    let tip = (BINS - 1, (31.0 / 432.0 / (Y_RANGE.1 / BINS as f64)) as usize);
    let tip_count: u64 = pure
        .iter()
        .filter(|(i, j, _, _)| i.abs_diff(tip.0) <= 1 && j.abs_diff(tip.1) <= 1)
        .map(|r| r.2)
        .sum();

    let rank2 = read_histogram(&rank2_dir.join("histogram.csv"));
    let best = rank2.iter().fold((0, 0, 0), |b, &(i, j, c, _)| if c > b.2 { (i, j, c) } else { b });
    let quartile = BINS / 4;
    let lower_left = best.0 < quartile && best.1 < quartile;

    outcome(
        total == SAMPLES && stray == 0 && tip_count > 0 && lower_left,
        format!(
            "pure: {total} samples, {stray} bins outside the blade, {tip_count} samples next to the tip bin {tip:?}; \
             rank2: argmax bin ({}, {}) with {} counts, lowest quartile is bins < {quartile} ({})",
            best.0,
            best.1,
            best.2,
            if lower_left { "inside" } else { "outside" }
        ),
    )
}

fn determinism(dir: &Path) -> Outcome {
    let mut mismatches = Vec::new();
    for ensemble in ["pure", "rank2"] {
        let runs: Vec<_> = [("1", "a"), ("8", "b"), ("8", "c")]
            .iter()
            .map(|(workers, tag)| {
                let d = dir.join(format!("det-{ensemble}-{tag}"));
                sample(&d, ensemble, workers, true);
                d
            })
            .collect();
        for file in ["histogram.csv", "summary.json", "records.csv"] {
            let bytes: Vec<Vec<u8>> = runs.iter().map(|d| std::fs::read(d.join(file)).unwrap()).collect();
            if bytes.windows(2).any(|w| w[0] != w[1]) {
                mismatches.push(format!("{ensemble}/{file}"));
            }
        }
    }
    outcome(
        mismatches.is_empty(),
        if mismatches.is_empty() {
            "histogram.csv, summary.json and records.csv identical for workers 1, 8, 8 (pure and rank2)".to_string()
        } else {
            format!("differences in {}", mismatches.join(", "))
        },
    )
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let sweep = mixed_sweep();
    let criteria: Vec<(&str, Outcome)> = vec![
        ("lambda reconstruction", lambda_reconstruction()),
        ("fixture values", fixtures()),
        ("mixed-state identity", mixed_identity(&sweep)),
        ("pure-state identity", pure_identity()),
        ("range bound", range_bound(&sweep)),
        ("phase-space oracle", phase_space_oracle()),
        ("histogram shape", histogram_shape(tmp.path())),
        ("determinism", determinism(tmp.path())),
    ];
    let failed = criteria.iter().filter(|(_, o)| !o.passed).count();
    for (name, o) in &criteria {
        println!("{} {name}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
