//! Deterministic Monte Carlo campaigns over the `(C², R₊²)` plane.
//!
//! Sample `i` is drawn from the seed `derive_seed(master_seed, i)`, so every
//! output depends only on `(ensemble, samples, master_seed, bins)`. Workers
//! evaluate fixed-size blocks of indices in parallel; each block is then
//! folded into the histogram and the summary in index order, which keeps
//! floating-point sums (and therefore the bytes written) independent of the
//! worker count.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::fmt::sig17;
use crate::measures::{MeasureTuple, ENTROPY_WEIGHT, MIXED_RESIDUAL_TOL, PURE_RESIDUAL_TOL};
use crate::rng::derive_seed;
use crate::states::{ginibre_random, haar_random_pure, matrix_to_json, TwoQubitState};
use crate::{Error, Result};

pub const DEFAULT_BINS: usize = 200;
pub const MIN_BINS: usize = 10;
pub const X_RANGE: (f64, f64) = (0.0, 1.0);
pub const Y_RANGE: (f64, f64) = (0.0, 55.0 / 108.0);

/// Largest campaign whose medians are computed exactly from a buffer.
pub const EXACT_MEDIAN_LIMIT: u64 = 1_000_000;

const BLOCK: u64 = 1 << 14;
const BLADE_RANGE: (f64, f64) = (1.0 / 6.0, 55.0 / 108.0);
const BLADE_TOL: f64 = 1e-10;

pub const HISTOGRAM_HEADER: &str = "x_lo,x_hi,y_lo,y_hi,count";
pub const RECORDS_HEADER: &str = "index,C,C2,delta1,delta2,R2_1,R2_2,Rplus2,Ne,fC,z,w,purity,residual_mixed,residual_pure";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Ensemble {
    Pure,
    Rank2,
    Rank3,
    Rank4,
}

impl Ensemble {
    pub fn rank(self) -> usize {
        match self {
            Ensemble::Pure => 1,
            Ensemble::Rank2 => 2,
            Ensemble::Rank3 => 3,
            Ensemble::Rank4 => 4,
        }
    }

    pub fn draw(self, seed: u64) -> Result<TwoQubitState> {
        match self {
            Ensemble::Pure => Ok(haar_random_pure(seed)),
            other => ginibre_random(other.rank(), seed),
        }
    }
}

impl fmt::Display for Ensemble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ensemble::Pure => "pure",
            Ensemble::Rank2 => "rank2",
            Ensemble::Rank3 => "rank3",
            Ensemble::Rank4 => "rank4",
        })
    }
}

impl FromStr for Ensemble {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure" => Ok(Ensemble::Pure),
            "rank2" => Ok(Ensemble::Rank2),
            "rank3" => Ok(Ensemble::Rank3),
            "rank4" => Ok(Ensemble::Rank4),
            _ => Err(Error::Precondition(format!("unknown ensemble {s:?}; expected pure, rank2, rank3 or rank4"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CampaignConfig {
    pub ensemble: Ensemble,
    pub samples: u64,
    pub master_seed: u64,
    pub bins_x: usize,
    pub bins_y: usize,
    /// Thread count; never affects results.
    pub workers: usize,
}

impl CampaignConfig {
    pub fn new(ensemble: Ensemble, samples: u64, master_seed: u64) -> Self {
        CampaignConfig { ensemble, samples, master_seed, bins_x: DEFAULT_BINS, bins_y: DEFAULT_BINS, workers: 1 }
    }

    pub fn with_bins(mut self, bins: usize) -> Self {
        self.bins_x = bins;
        self.bins_y = bins;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples < 1 {
            return Err(Error::Precondition("samples must be at least 1".into()));
        }
        if self.bins_x < MIN_BINS || self.bins_y < MIN_BINS {
            return Err(Error::Precondition(format!(
                "bins must be at least {MIN_BINS}, got {}x{}",
                self.bins_x, self.bins_y
            )));
        }
        if self.workers < 1 {
            return Err(Error::Precondition("workers must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SampleRecord {
    pub index: u64,
    #[serde(flatten)]
    pub measures: MeasureTuple,
    pub residual_mixed: f64,
    pub residual_pure: Option<f64>,
}

impl SampleRecord {
    /// `R₊² + (39/216)(δ₁ + δ₂)`; for pure states `δ₁ + δ₂ = C²`.
    pub fn combined_sum(&self) -> f64 {
        self.measures.combined_sum()
    }

    /// One `records.csv` row (no trailing newline).
    pub fn csv_row(&self) -> String {
        let m = &self.measures;
        let fields = [m.c, m.c2, m.delta1, m.delta2, m.r2_1, m.r2_2, m.rplus2, m.ne, m.fc, m.z, m.w, m.purity];
        let mut row = self.index.to_string();
        for x in fields.iter().chain(std::iter::once(&self.residual_mixed)) {
            row.push(',');
            row.push_str(&sig17(*x));
        }
        row.push(',');
        if let Some(r) = self.residual_pure {
            row.push_str(&sig17(r));
        }
        row
    }
}

/// Measures one sample and enforces the per-record invariants.
pub fn evaluate_sample(ensemble: Ensemble, master_seed: u64, index: u64) -> Result<SampleRecord> {
    let state = ensemble.draw(derive_seed(master_seed, index))?;
    let violation = |reason: String| Error::SampleViolation { index, reason, state: matrix_to_json(state.rho()) };
    let measures = MeasureTuple::of(&state).map_err(|e| violation(e.to_string()))?;
    measures.check_ranges().map_err(|e| violation(e.to_string()))?;
    let residual_mixed = measures.residual_mixed();
    if residual_mixed.is_nan() || residual_mixed > MIXED_RESIDUAL_TOL {
        return Err(violation(format!("mixed-state residual {residual_mixed:e} exceeds {MIXED_RESIDUAL_TOL:e}")));
    }
    let residual_pure = match ensemble {
        Ensemble::Pure => {
            let r = measures.residual_pure().ok_or_else(|| violation(format!("purity {} of a pure draw", measures.purity)))?;
            if r.is_nan() || r > PURE_RESIDUAL_TOL {
                return Err(violation(format!("pure-state residual {r:e} exceeds {PURE_RESIDUAL_TOL:e}")));
            }
            Some(r)
        }
        _ => None,
    };
    Ok(SampleRecord { index, measures, residual_mixed, residual_pure })
}

/// Counts on a regular grid over the fixed axes `x = C² ∈ [0,1]`,
/// `y = R₊² ∈ [0, 55/108]`; bins are half-open except the last.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Histogram2D {
    bins_x: usize,
    bins_y: usize,
    counts: Vec<u64>,
}

impl Histogram2D {
    pub fn new(bins_x: usize, bins_y: usize) -> Self {
        Histogram2D { bins_x, bins_y, counts: vec![0; bins_x * bins_y] }
    }

    pub fn bins(&self) -> (usize, usize) {
        (self.bins_x, self.bins_y)
    }

    fn index_of(x: f64, (lo, hi): (f64, f64), bins: usize) -> usize {
        let t = ((x - lo) / (hi - lo) * bins as f64).floor();
        // Measure invariants keep points inside the axes up to roundoff, so
        // clamping never hides a real outlier.
        if t.is_nan() || t < 0.0 {
            0
        } else {
            (t as usize).min(bins - 1)
        }
    }

    pub fn bin_of(&self, x: f64, y: f64) -> (usize, usize) {
        (Self::index_of(x, X_RANGE, self.bins_x), Self::index_of(y, Y_RANGE, self.bins_y))
    }

    pub fn add(&mut self, x: f64, y: f64) {
        let (i, j) = self.bin_of(x, y);
        self.counts[i * self.bins_y + j] += 1;
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.bins_y + j]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Elementwise addition of a histogram with the same binning.
    pub fn merge(&mut self, other: &Histogram2D) -> Result<()> {
        if self.bins() != other.bins() {
            return Err(Error::Precondition(format!("cannot merge {:?} bins into {:?}", other.bins(), self.bins())));
        }
        self.counts.iter_mut().zip(&other.counts).for_each(|(a, b)| *a += b);
        Ok(())
    }

    /// Most populated bin; ties go to the smallest `(i, j)`.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (k, &c) in self.counts.iter().enumerate() {
            if c > self.counts[best] {
                best = k;
            }
        }
        (best / self.bins_y, best % self.bins_y)
    }

    pub fn x_edges(&self) -> Vec<f64> {
        edges(X_RANGE, self.bins_x)
    }

    pub fn y_edges(&self) -> Vec<f64> {
        edges(Y_RANGE, self.bins_y)
    }

    /// Nonzero bins as `(i, j, count)`, `x` index outermost.
    pub fn occupied(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.counts.iter().enumerate().filter(|(_, &c)| c > 0).map(|(k, &c)| (k / self.bins_y, k % self.bins_y, c))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let (xe, ye) = (self.x_edges(), self.y_edges());
        writeln!(out, "{HISTOGRAM_HEADER}")?;
        for (i, j, c) in self.occupied() {
            writeln!(out, "{},{},{},{},{}", sig17(xe[i]), sig17(xe[i + 1]), sig17(ye[j]), sig17(ye[j + 1]), c)?;
        }
        Ok(())
    }
}

fn edges((lo, hi): (f64, f64), bins: usize) -> Vec<f64> {
    (0..=bins).map(|k| if k == bins { hi } else { lo + (hi - lo) * k as f64 / bins as f64 }).collect()
}

/// P² streaming quantile estimator (Jain & Chlamtac, 1985).
#[derive(Clone, Debug)]
struct P2Quantile {
    p: f64,
    heights: [f64; 5],
    positions: [f64; 5],
    desired: [f64; 5],
    increments: [f64; 5],
    seen: usize,
}

impl P2Quantile {
    fn new(p: f64) -> Self {
        P2Quantile {
            p,
            heights: [0.0; 5],
            positions: [1.0, 2.0, 3.0, 4.0, 5.0],
            desired: [1.0, 1.0 + 2.0 * p, 1.0 + 4.0 * p, 3.0 + 2.0 * p, 5.0],
            increments: [0.0, p / 2.0, p, (1.0 + p) / 2.0, 1.0],
            seen: 0,
        }
    }

    fn push(&mut self, x: f64) {
        if self.seen < 5 {
            self.heights[self.seen] = x;
            self.seen += 1;
            if self.seen == 5 {
                self.heights.sort_by(f64::total_cmp);
            }
            return;
        }
        self.seen += 1;
        let h = &mut self.heights;
        let k = if x < h[0] {
            h[0] = x;
            0
        } else if x >= h[4] {
            h[4] = x;
            3
        } else {
            (0..4).find(|&i| x < h[i + 1]).unwrap_or(3)
        };
        for pos in &mut self.positions[k + 1..] {
            *pos += 1.0;
        }
        for (d, inc) in self.desired.iter_mut().zip(self.increments) {
            *d += inc;
        }
        for i in 1..4 {
            let d = self.desired[i] - self.positions[i];
            let (np, n, nm) = (self.positions[i + 1], self.positions[i], self.positions[i - 1]);
            if (d >= 1.0 && np - n > 1.0) || (d <= -1.0 && nm - n < -1.0) {
                let s = d.signum();
                let (hp, hi, hm) = (h[i + 1], h[i], h[i - 1]);
                let parabolic =
                    hi + s / (np - nm) * ((n - nm + s) * (hp - hi) / (np - n) + (np - n - s) * (hi - hm) / (n - nm));
                h[i] = if hm < parabolic && parabolic < hp {
                    parabolic
                } else {
                    let j = if s > 0.0 { i + 1 } else { i - 1 };
                    hi + s * (h[j] - hi) / (self.positions[j] - n)
                };
                self.positions[i] += s;
            }
        }
    }

    fn estimate(&self) -> f64 {
        if self.seen >= 5 {
            return self.heights[2];
        }
        let mut v = self.heights[..self.seen].to_vec();
        v.sort_by(f64::total_cmp);
        exact_quantile(&v, self.p)
    }
}

fn exact_quantile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 || p != 0.5 {
        sorted[((n - 1) as f64 * p).round() as usize]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MedianMethod {
    /// Sort of the full buffer; the two middle values are averaged for even counts.
    Exact,
    /// P² streaming estimate.
    P2,
}

#[derive(Clone, Debug)]
enum Median {
    Exact(Vec<f64>),
    P2(P2Quantile),
}

impl Median {
    fn new(method: MedianMethod) -> Self {
        match method {
            MedianMethod::Exact => Median::Exact(Vec::new()),
            MedianMethod::P2 => Median::P2(P2Quantile::new(0.5)),
        }
    }

    fn push(&mut self, x: f64) {
        match self {
            Median::Exact(v) => v.push(x),
            Median::P2(q) => q.push(x),
        }
    }

    fn finish(self) -> f64 {
        match self {
            Median::Exact(mut v) => {
                v.sort_by(f64::total_cmp);
                exact_quantile(&v, 0.5)
            }
            Median::P2(q) => q.estimate(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
struct MinMax {
    min: f64,
    max: f64,
}

impl MinMax {
    fn push(&mut self, x: f64, first: bool) {
        if first {
            *self = MinMax { min: x, max: x };
        } else {
            self.min = self.min.min(x);
            self.max = self.max.max(x);
        }
    }
}

/// Accumulates [`SummaryStats`] one record at a time.
#[derive(Clone, Debug)]
pub struct SummaryBuilder {
    method: MedianMethod,
    count: u64,
    c2: MinMax,
    rplus2: MinMax,
    combined: MinMax,
    c2_median: Median,
    rplus2_median: Median,
    residual_mixed_sum: f64,
    residual_mixed_max: f64,
    residual_pure_sum: f64,
    residual_pure_max: f64,
    residual_pure_count: u64,
    zero_concurrence: u64,
    purity_sum: f64,
    blade_count: u64,
    blade_purity_sum: f64,
}

impl SummaryBuilder {
    pub fn new(method: MedianMethod) -> Self {
        SummaryBuilder {
            method,
            count: 0,
            c2: MinMax::default(),
            rplus2: MinMax::default(),
            combined: MinMax::default(),
            c2_median: Median::new(method),
            rplus2_median: Median::new(method),
            residual_mixed_sum: 0.0,
            residual_mixed_max: 0.0,
            residual_pure_sum: 0.0,
            residual_pure_max: 0.0,
            residual_pure_count: 0,
            zero_concurrence: 0,
            purity_sum: 0.0,
            blade_count: 0,
            blade_purity_sum: 0.0,
        }
    }

    /// Exact medians up to [`EXACT_MEDIAN_LIMIT`] samples, P² above.
    pub fn for_samples(samples: u64) -> Self {
        Self::new(if samples <= EXACT_MEDIAN_LIMIT { MedianMethod::Exact } else { MedianMethod::P2 })
    }

    pub fn push(&mut self, r: &SampleRecord) {
        let m = &r.measures;
        let first = self.count == 0;
        self.count += 1;
        self.c2.push(m.c2, first);
        self.rplus2.push(m.rplus2, first);
        self.combined.push(r.combined_sum(), first);
        self.c2_median.push(m.c2);
        self.rplus2_median.push(m.rplus2);
        self.residual_mixed_sum += r.residual_mixed;
        self.residual_mixed_max = self.residual_mixed_max.max(r.residual_mixed);
        if let Some(p) = r.residual_pure {
            self.residual_pure_sum += p;
            self.residual_pure_max = self.residual_pure_max.max(p);
            self.residual_pure_count += 1;
        }
        if m.c == 0.0 {
            self.zero_concurrence += 1;
        }
        self.purity_sum += m.purity;
        if in_blade(m.c2, m.rplus2) {
            self.blade_count += 1;
            self.blade_purity_sum += m.purity;
        }
    }

    pub fn finish(self, config: Option<&CampaignConfig>) -> Result<SummaryStats> {
        if self.count == 0 {
            return Err(Error::Precondition("summary statistics need at least one record".into()));
        }
        let n = self.count as f64;
        let outside = self.count - self.blade_count;
        let mean = |sum: f64, k: u64| (k > 0).then(|| sum / k as f64);
        Ok(SummaryStats {
            samples: self.count,
            c2_min: self.c2.min,
            c2_max: self.c2.max,
            c2_median: self.c2_median.finish(),
            rplus2_min: self.rplus2.min,
            rplus2_max: self.rplus2.max,
            rplus2_median: self.rplus2_median.finish(),
            median_method: self.method,
            combined_sum_min: self.combined.min,
            combined_sum_max: self.combined.max,
            residual_mixed_mean: self.residual_mixed_sum / n,
            residual_mixed_max: self.residual_mixed_max,
            residual_pure_mean: mean(self.residual_pure_sum, self.residual_pure_count),
            residual_pure_max: (self.residual_pure_count > 0).then_some(self.residual_pure_max),
            fraction_c_zero: self.zero_concurrence as f64 / n,
            purity_mean: self.purity_sum / n,
            blade_fraction: self.blade_count as f64 / n,
            blade_purity_mean: mean(self.blade_purity_sum, self.blade_count),
            outside_purity_mean: mean(self.purity_sum - self.blade_purity_sum, outside),
            config: config.map(ConfigEcho::from),
        })
    }
}

/// Whether `(C², R₊²)` lies in the pure-state blade `1/6 ≤ R₊² + (39/216)C² ≤ 55/108`.
pub fn in_blade(c2: f64, rplus2: f64) -> bool {
    let s = rplus2 + ENTROPY_WEIGHT * c2;
    s >= BLADE_RANGE.0 - BLADE_TOL && s <= BLADE_RANGE.1 + BLADE_TOL
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConfigEcho {
    pub ensemble: Ensemble,
    pub samples: u64,
    pub master_seed: u64,
    pub bins_x: usize,
    pub bins_y: usize,
    pub x_range: [f64; 2],
    pub y_range: [f64; 2],
}

impl From<&CampaignConfig> for ConfigEcho {
    fn from(c: &CampaignConfig) -> Self {
        ConfigEcho {
            ensemble: c.ensemble,
            samples: c.samples,
            master_seed: c.master_seed,
            bins_x: c.bins_x,
            bins_y: c.bins_y,
            x_range: [X_RANGE.0, X_RANGE.1],
            y_range: [Y_RANGE.0, Y_RANGE.1],
        }
    }
}

/// Campaign statistics. The blade fields split the samples by whether they
/// fall inside the region reachable by pure states.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryStats {
    pub samples: u64,
    pub c2_min: f64,
    pub c2_max: f64,
    pub c2_median: f64,
    pub rplus2_min: f64,
    pub rplus2_max: f64,
    pub rplus2_median: f64,
    pub median_method: MedianMethod,
    pub combined_sum_min: f64,
    pub combined_sum_max: f64,
    pub residual_mixed_mean: f64,
    pub residual_mixed_max: f64,
    pub residual_pure_mean: Option<f64>,
    pub residual_pure_max: Option<f64>,
    pub fraction_c_zero: f64,
    pub purity_mean: f64,
    pub blade_fraction: f64,
    pub blade_purity_mean: Option<f64>,
    pub outside_purity_mean: Option<f64>,
    /// Worker count is left out so the file is identical across thread counts.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub config: Option<ConfigEcho>,
}

impl SummaryStats {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }
}

/// Summary of an arbitrary record stream, with exact medians.
pub fn summary_stats(records: impl IntoIterator<Item = SampleRecord>) -> Result<SummaryStats> {
    let mut b = SummaryBuilder::new(MedianMethod::Exact);
    records.into_iter().for_each(|r| b.push(&r));
    b.finish(None)
}

pub fn run_campaign(config: &CampaignConfig) -> Result<(Histogram2D, SummaryStats)> {
    run_campaign_with(config, |_| Ok(()))
}

/// Like [`run_campaign`], handing every record to `sink` in index order.
pub fn run_campaign_with<F>(config: &CampaignConfig, mut sink: F) -> Result<(Histogram2D, SummaryStats)>
where
    F: FnMut(&SampleRecord) -> Result<()>,
{
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::Precondition(format!("cannot start {} workers: {e}", config.workers)))?;
    let mut hist = Histogram2D::new(config.bins_x, config.bins_y);
    let mut summary = SummaryBuilder::for_samples(config.samples);
    let mut start = 0;
    while start < config.samples {
        let end = (start + BLOCK).min(config.samples);
        let block: Vec<Result<SampleRecord>> = pool.install(|| {
            (start..end).into_par_iter().map(|i| evaluate_sample(config.ensemble, config.master_seed, i)).collect()
        });
        for record in block {
            let record = record?;
            hist.add(record.measures.c2, record.measures.rplus2);
            summary.push(&record);
            sink(&record)?;
        }
        start = end;
    }
    Ok((hist, summary.finish(Some(config))?))
}

/// Streams `records.csv` rows to a writer.
pub struct RecordsWriter<W: Write> {
    out: W,
}

impl<W: Write> RecordsWriter<W> {
    pub fn new(mut out: W) -> Result<Self> {
        writeln!(out, "{RECORDS_HEADER}")?;
        Ok(RecordsWriter { out })
    }

    pub fn write(&mut self, r: &SampleRecord) -> Result<()> {
        writeln!(self.out, "{}", r.csv_row())?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<W> {
        self.out.flush()?;
        Ok(self.out)
    }
}
