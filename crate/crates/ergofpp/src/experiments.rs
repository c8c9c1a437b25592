//! Monte Carlo experiments over independent environments.
//!
//! Each seed defines one environment; within a seed every `n` reuses that
//! environment. Work items run in parallel and are merged in item order, so a
//! configuration determines its output bit for bit.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geodesy::{distance_with, wandering, SearchOptions, DEFAULT_MEMORY_CAP};
use crate::lattice::{spacing, validate_alpha, Environment, Vertex};
use crate::oracle::last_corner;
use crate::padic::Level;
use crate::stats::{fit_log_log, ks_two_sample, mean, quantile_sorted, sorted, variance};

/// Header comment that versions every CSV this crate writes.
pub const CSV_VERSION_LINE: &str = "# ergofpp-csv v1";

/// Seeds needed before slope bands are asserted.
pub const MIN_ASSERTIVE_SEEDS: usize = 100;

pub const VARIANCE_SLOPE_TOLERANCE: f64 = 0.5;
pub const WANDERING_SLOPE_TOLERANCE: f64 = 0.25;
/// Largest allowed `T - |x|_1` off the axes.
pub const OFF_AXIS_EXCESS_BOUND: f64 = 30.0;
/// Largest allowed log-log slope of the mean off-axis excess against `n`.
pub const OFF_AXIS_TREND_BOUND: f64 = 0.1;
/// Floor on the median off-axis deviation divided by `n`.
pub const DEVIATION_RATIO_FLOOR: f64 = 0.02;
/// Smallest allowed log-log slope of the median off-axis deviation.
pub const DEVIATION_TREND_FLOOR: f64 = 0.9;
pub const SHAPE_DEVIATION_BOUND: f64 = 0.1;
pub const FOUR_RAY_RATE: f64 = 0.95;
pub const ANGLE_COVERAGE: f64 = 0.9;
pub const KS_SIGNIFICANCE: f64 = 1e-3;

/// `log 5 / (log 5 - log alpha)`, the on-axis fluctuation exponent.
///
/// Defined on `(0, 0.2]`; the closed end gives exactly `1/2`.
pub fn beta(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 0.2) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let l5 = 5f64.ln();
    Ok(l5 / (l5 - alpha.ln()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Variance,
    Wandering,
    Shape,
    Rays,
    CornerAngle,
    Concentration,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::Variance,
        ExperimentKind::Wandering,
        ExperimentKind::Shape,
        ExperimentKind::Rays,
        ExperimentKind::CornerAngle,
        ExperimentKind::Concentration,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Variance => "variance",
            ExperimentKind::Wandering => "wandering",
            ExperimentKind::Shape => "shape",
            ExperimentKind::Rays => "rays",
            ExperimentKind::CornerAngle => "corner-angle",
            ExperimentKind::Concentration => "concentration",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub alpha: f64,
    /// Targets are `(n, round(lambda n))`.
    pub lambda: f64,
    pub n_values: Vec<i64>,
    pub seeds: Vec<u64>,
    pub memory_cap: u64,
    /// Largest square level used by `rays` and `corner-angle`.
    pub k_max: Level,
    /// Number of first-quadrant directions used by `shape`.
    pub directions: usize,
    /// Bin width for `corner-angle` coverage.
    pub epsilon: f64,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind) -> Self {
        Self {
            experiment,
            alpha: 0.1,
            lambda: 0.0,
            n_values: vec![25, 125, 625, 3125],
            seeds: (0..100).collect(),
            memory_cap: DEFAULT_MEMORY_CAP,
            k_max: match experiment {
                ExperimentKind::CornerAngle => 20,
                _ => 2,
            },
            directions: 16,
            epsilon: std::f64::consts::PI / 40.0,
        }
    }

    /// Every problem with the configuration, in field order.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if validate_alpha(self.alpha).is_err() {
            out.push(format!("alpha must lie in (0, 0.2), got {}", self.alpha));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            out.push(format!("lambda must lie in [0, 1], got {}", self.lambda));
        }
        if self.experiment == ExperimentKind::Concentration && self.lambda != 0.0 {
            out.push("concentration requires lambda = 0".to_string());
        }
        if self.n_values.is_empty() {
            out.push("n_values must not be empty".to_string());
        }
        if self.n_values.iter().any(|&n| n < 1 || n > 1 << 40) {
            out.push("n_values must lie in 1..=2^40".to_string());
        }
        if self.n_values.windows(2).any(|w| w[0] >= w[1]) {
            out.push("n_values must be strictly ascending".to_string());
        }
        if self.seeds.is_empty() {
            out.push("seeds must not be empty".to_string());
        }
        if self.memory_cap == 0 {
            out.push("memory_cap must be positive".to_string());
        }
        if !(1..=20).contains(&self.k_max) {
            out.push(format!("k_max must lie in 1..=20, got {}", self.k_max));
        }
        if self.directions < 2 {
            out.push(format!("directions must be at least 2, got {}", self.directions));
        }
        if !(self.epsilon > 0.0 && self.epsilon <= FRAC_PI_2) {
            out.push(format!("epsilon must lie in (0, pi/2], got {}", self.epsilon));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems.join("; ")))
        }
    }

    fn options(&self) -> SearchOptions {
        SearchOptions {
            memory_cap: self.memory_cap,
        }
    }

    fn target(&self, n: i64) -> Vertex {
        Vertex::new(n, (self.lambda * n as f64).round() as i64)
    }
}

/// One CSV field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Int(i64),
    Unsigned(u64),
    Real(f64),
}

impl Cell {
    pub fn as_f64(self) -> f64 {
        match self {
            Cell::Int(v) => v as f64,
            Cell::Unsigned(v) => v as f64,
            Cell::Real(v) => v,
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Unsigned(v) => write!(f, "{v}"),
            Cell::Real(v) => write!(f, "{v}"),
        }
    }
}

/// Per-sample rows of an experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl SampleTable {
    fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[i].as_f64()).collect())
    }

    /// Versioned CSV; every line ends with a newline. All fields are numeric
    /// or plain identifiers, so no quoting is ever needed.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_VERSION_LINE);
        out.push('\n');
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let fields: Vec<String> = row.iter().map(Cell::to_string).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }
}

/// Sample statistics of one `n` (or one level `k`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerN {
    pub n: i64,
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
    pub min: f64,
    pub q10: f64,
    pub median: f64,
    pub q90: f64,
    pub max: f64,
}

impl PerN {
    pub fn of(n: i64, values: &[f64]) -> Self {
        let s = sorted(values);
        Self {
            n,
            count: values.len(),
            mean: mean(values),
            variance: variance(values),
            min: s.first().copied().unwrap_or(f64::NAN),
            q10: quantile_sorted(&s, 0.1),
            median: quantile_sorted(&s, 0.5),
            q90: quantile_sorted(&s, 0.9),
            max: s.last().copied().unwrap_or(f64::NAN),
        }
    }
}

/// Log-log slope of a per-`n` statistic with its target band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Slope {
    pub of: String,
    pub slope: f64,
    pub intercept: f64,
    /// 95% half-width; absent with fewer than three points.
    pub half_width: Option<f64>,
    pub points: usize,
    pub target: f64,
    pub tolerance: f64,
    pub within: bool,
}

/// An asserted property with the measured value and the bound it was
/// compared against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub bound: f64,
}

impl Check {
    fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: value <= bound,
            value,
            bound,
        }
    }

    fn at_least(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: value >= bound,
            value,
            bound,
        }
    }

    fn above(name: &str, value: f64, bound: f64) -> Self {
        Self {
            name: name.to_string(),
            passed: value > bound,
            value,
            bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub experiment: ExperimentKind,
    pub alpha: f64,
    pub beta: f64,
    pub lambda: f64,
    pub seeds: usize,
    /// Finite-scale stand-in for a statement about infinite rays.
    pub proxy: bool,
    /// Whether enough samples were drawn for the checks to be meaningful.
    pub assertive: bool,
    /// What `per_n` summarizes.
    pub statistic: String,
    pub per_n: Vec<PerN>,
    pub slope: Option<Slope>,
    pub statistics: BTreeMap<String, f64>,
    pub checks: Vec<Check>,
}

impl ExperimentSummary {
    fn new(config: &ExperimentConfig, statistic: &str) -> Result<Self> {
        Ok(Self {
            experiment: config.experiment,
            alpha: config.alpha,
            beta: beta(config.alpha)?,
            lambda: config.lambda,
            seeds: config.seeds.len(),
            proxy: false,
            assertive: true,
            statistic: statistic.to_string(),
            per_n: Vec::new(),
            slope: None,
            statistics: BTreeMap::new(),
            checks: Vec::new(),
        })
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// All checks hold. A non-assertive summary passes vacuously.
    pub fn passed(&self) -> bool {
        !self.assertive || self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("summary serializes");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub table: SampleTable,
    pub summary: ExperimentSummary,
}

/// Log-log slope of `ys` against `ns`, checked against `target +/- tolerance`.
fn slope_of(of: &str, ns: &[i64], ys: &[f64], target: f64, tolerance: f64) -> Option<Slope> {
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let fit = fit_log_log(&xs, ys)?;
    Some(Slope {
        of: of.to_string(),
        slope: fit.slope,
        intercept: fit.intercept,
        half_width: fit.half_width.is_finite().then_some(fit.half_width),
        points: fit.points,
        target,
        tolerance,
        within: (fit.slope - target).abs() <= tolerance,
    })
}

fn group_by_n<T>(ns: &[i64], samples: &[T], n_of: impl Fn(&T) -> i64, value: impl Fn(&T) -> f64) -> Vec<Vec<f64>> {
    ns.iter()
        .map(|&n| samples.iter().filter(|s| n_of(s) == n).map(&value).collect())
        .collect()
}

/// `T(0, x)` and the wandering of its geodesic for `x = (n, round(lambda n))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeodesicSample {
    pub seed: u64,
    pub n: i64,
    pub target: Vertex,
    pub time: f64,
    pub deviation: f64,
    pub expanded: u64,
}

impl GeodesicSample {
    pub fn excess(&self) -> f64 {
        self.time - Vertex::ORIGIN.l1(self.target) as f64
    }
}

/// One geodesic per `(seed, n)`, seed-major.
pub fn geodesic_samples(config: &ExperimentConfig) -> Result<Vec<GeodesicSample>> {
    config.validate()?;
    let items: Vec<(u64, i64)> = config
        .seeds
        .iter()
        .flat_map(|&s| config.n_values.iter().map(move |&n| (s, n)))
        .collect();
    let opts = config.options();
    items
        .par_iter()
        .map(|&(seed, n)| {
            let env = Environment::from_seed(config.alpha, seed)?;
            let target = config.target(n);
            let result = distance_with(&env, Vertex::ORIGIN, target, &opts)?;
            Ok(GeodesicSample {
                seed,
                n,
                target,
                time: result.time,
                deviation: wandering(Vertex::ORIGIN, target, &result.path),
                expanded: result.expanded,
            })
        })
        .collect()
}

fn geodesic_table(config: &ExperimentConfig, samples: &[GeodesicSample], with_deviation: bool) -> SampleTable {
    let mut table = if with_deviation {
        SampleTable::new(&["seed", "alpha", "lambda", "n", "T", "deviation"])
    } else {
        SampleTable::new(&["seed", "alpha", "lambda", "n", "T"])
    };
    for s in samples {
        let mut row = vec![
            Cell::Unsigned(s.seed),
            Cell::Real(config.alpha),
            Cell::Real(config.lambda),
            Cell::Int(s.n),
            Cell::Real(s.time),
        ];
        if with_deviation {
            row.push(Cell::Real(s.deviation));
        }
        table.rows.push(row);
    }
    table
}

/// Variance of `T(0, (n, lambda n))` across environments.
///
/// On the axis the log-log slope of the variance is checked against
/// `2 beta`. Off the axis the excess `T - |x|_1` is checked for a uniform
/// bound and for the absence of growth in `n`.
pub fn summarize_variance(config: &ExperimentConfig, samples: &[GeodesicSample]) -> Result<ExperimentSummary> {
    let mut summary = ExperimentSummary::new(config, "T")?;
    summary.assertive = config.seeds.len() >= MIN_ASSERTIVE_SEEDS;
    let times = group_by_n(&config.n_values, samples, |s| s.n, |s| s.time);
    summary.per_n = config
        .n_values
        .iter()
        .zip(&times)
        .map(|(&n, ts)| PerN::of(n, ts))
        .collect();
    let variances: Vec<f64> = summary.per_n.iter().map(|p| p.variance).collect();
    if config.lambda == 0.0 {
        summary.slope = slope_of(
            "variance",
            &config.n_values,
            &variances,
            2.0 * summary.beta,
            VARIANCE_SLOPE_TOLERANCE,
        );
        if let Some(slope) = &summary.slope {
            summary.checks.push(Check {
                name: "variance_slope".to_string(),
                passed: slope.within,
                value: slope.slope,
                bound: slope.target,
            });
        }
    } else {
        summary.slope = slope_of("variance", &config.n_values, &variances, 0.0, VARIANCE_SLOPE_TOLERANCE);
        let excess = group_by_n(&config.n_values, samples, |s| s.n, GeodesicSample::excess);
        let max_excess = excess.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max);
        let means: Vec<f64> = excess.iter().map(|e| mean(e)).collect();
        summary.statistics.insert("max_excess".to_string(), max_excess);
        summary.checks.push(Check::at_most("excess_bounded", max_excess, OFF_AXIS_EXCESS_BOUND));
        if let Some(trend) = slope_of("mean_excess", &config.n_values, &means, 0.0, OFF_AXIS_TREND_BOUND) {
            summary.statistics.insert("excess_trend".to_string(), trend.slope);
            summary.checks.push(Check::at_most("excess_no_growth", trend.slope, OFF_AXIS_TREND_BOUND));
        }
        for (&n, e) in config.n_values.iter().zip(&excess) {
            summary.statistics.insert(format!("mean_excess_n{n}"), mean(e));
        }
    }
    Ok(summary)
}

/// Wandering of the geodesic from `0` to `(n, lambda n)`.
///
/// On the axis the log-log slope of the median is checked against `beta`,
/// using only the `n` whose median is positive. Off the axis the deviation
/// is checked to be at most `10 n` and at least a fixed fraction of `n`
/// without a decreasing trend.
pub fn summarize_wandering(config: &ExperimentConfig, samples: &[GeodesicSample]) -> Result<ExperimentSummary> {
    let mut summary = ExperimentSummary::new(config, "deviation")?;
    summary.assertive = config.seeds.len() >= MIN_ASSERTIVE_SEEDS;
    let devs = group_by_n(&config.n_values, samples, |s| s.n, |s| s.deviation);
    summary.per_n = config
        .n_values
        .iter()
        .zip(&devs)
        .map(|(&n, d)| PerN::of(n, d))
        .collect();
    let medians: Vec<f64> = summary.per_n.iter().map(|p| p.median).collect();
    if config.lambda == 0.0 {
        summary.slope = slope_of(
            "median_deviation",
            &config.n_values,
            &medians,
            summary.beta,
            WANDERING_SLOPE_TOLERANCE,
        );
        if let Some(slope) = &summary.slope {
            summary.checks.push(Check {
                name: "wandering_slope".to_string(),
                passed: slope.within,
                value: slope.slope,
                bound: slope.target,
            });
        }
    } else {
        summary.slope = slope_of("median_deviation", &config.n_values, &medians, 1.0, 1.0 - DEVIATION_TREND_FLOOR);
        let worst_ratio = samples
            .iter()
            .map(|s| s.deviation / s.n as f64)
            .fold(0.0, f64::max);
        let min_median_ratio = summary
            .per_n
            .iter()
            .map(|p| p.median / p.n as f64)
            .fold(f64::INFINITY, f64::min);
        summary.statistics.insert("max_deviation_ratio".to_string(), worst_ratio);
        summary.statistics.insert("min_median_ratio".to_string(), min_median_ratio);
        summary.checks.push(Check::at_most("deviation_within_10n", worst_ratio, 10.0));
        summary.checks.push(Check::at_least("median_ratio_floor", min_median_ratio, DEVIATION_RATIO_FLOOR));
        if let Some(slope) = &summary.slope {
            summary.checks.push(Check::at_least("median_no_decrease", slope.slope, DEVIATION_TREND_FLOOR));
        }
    }
    Ok(summary)
}

/// Extremes and tail frequencies of `T(0, (n, 0))`.
///
/// Every sample must satisfy `n < T <= n + 10 n^beta`. The frequencies of
/// `T <= n + 0.01 n^beta` and `T >= n + 0.02 n^beta` are reported only.
pub fn summarize_concentration(config: &ExperimentConfig, samples: &[GeodesicSample]) -> Result<ExperimentSummary> {
    let mut summary = ExperimentSummary::new(config, "T")?;
    let b = summary.beta;
    let times = group_by_n(&config.n_values, samples, |s| s.n, |s| s.time);
    let mut min_gap = f64::INFINITY;
    let mut max_scaled = f64::NEG_INFINITY;
    for (&n, ts) in config.n_values.iter().zip(&times) {
        summary.per_n.push(PerN::of(n, ts));
        let nf = n as f64;
        let scale = nf.powf(b);
        let low = ts.iter().filter(|&&t| t <= nf + 0.01 * scale).count();
        let high = ts.iter().filter(|&&t| t >= nf + 0.02 * scale).count();
        let count = ts.len().max(1) as f64;
        summary.statistics.insert(format!("p_low_n{n}"), low as f64 / count);
        summary.statistics.insert(format!("p_high_n{n}"), high as f64 / count);
        for &t in ts {
            min_gap = min_gap.min(t - nf);
            max_scaled = max_scaled.max((t - nf) / (10.0 * scale));
        }
    }
    summary.checks.push(Check::above("lower_bound", min_gap, 0.0));
    summary.checks.push(Check::at_most("upper_bound", max_scaled, 1.0));
    Ok(summary)
}

pub fn variance_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let samples = geodesic_samples(config)?;
    Ok(ExperimentOutput {
        table: geodesic_table(config, &samples, false),
        summary: summarize_variance(config, &samples)?,
    })
}

pub fn wandering_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let samples = geodesic_samples(config)?;
    Ok(ExperimentOutput {
        table: geodesic_table(config, &samples, true),
        summary: summarize_wandering(config, &samples)?,
    })
}

pub fn concentration_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    let samples = geodesic_samples(config)?;
    Ok(ExperimentOutput {
        table: geodesic_table(config, &samples, false),
        summary: summarize_concentration(config, &samples)?,
    })
}

/// Direction `j` of `count`, from `(1, 0)` to `(0, 1)` in equal steps of
/// the first coordinate.
pub fn direction(j: usize, count: usize) -> (f64, f64) {
    let last = (count - 1) as f64;
    ((last - j as f64) / last, j as f64 / last)
}

/// `T(0, round(n d)) / |round(n d)|_1` over the first-quadrant directions.
///
/// Axis directions are checked against `n + 10 n^beta`; at the largest `n`
/// the worst relative deviation from 1 is checked against 0.1.
pub fn shape_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let mut summary = ExperimentSummary::new(config, "ratio_minus_one")?;
    let b = summary.beta;
    let dirs = config.directions;
    let items: Vec<(u64, i64, usize)> = config
        .seeds
        .iter()
        .flat_map(|&s| {
            config
                .n_values
                .iter()
                .flat_map(move |&n| (0..dirs).map(move |j| (s, n, j)))
        })
        .collect();
    let opts = config.options();
    let results: Vec<(Vertex, f64)> = items
        .par_iter()
        .map(|&(seed, n, j)| {
            let env = Environment::from_seed(config.alpha, seed)?;
            let (dx, dy) = direction(j, dirs);
            let target = Vertex::new((n as f64 * dx).round() as i64, (n as f64 * dy).round() as i64);
            Ok((target, distance_with(&env, Vertex::ORIGIN, target, &opts)?.time))
        })
        .collect::<Result<_>>()?;

    let mut table = SampleTable::new(&["seed", "alpha", "n", "direction", "x", "y", "T", "ratio"]);
    let mut axis_scaled = f64::NEG_INFINITY;
    for (&(seed, n, j), &(target, t)) in items.iter().zip(&results) {
        let l1 = Vertex::ORIGIN.l1(target) as f64;
        let ratio = t / l1;
        table.rows.push(vec![
            Cell::Unsigned(seed),
            Cell::Real(config.alpha),
            Cell::Int(n),
            Cell::Int(j as i64),
            Cell::Int(target.x),
            Cell::Int(target.y),
            Cell::Real(t),
            Cell::Real(ratio),
        ]);
        if j == 0 || j == dirs - 1 {
            let nf = n as f64;
            axis_scaled = axis_scaled.max((ratio - 1.0) / (10.0 * nf.powf(b - 1.0)));
        }
    }
    let deviations: Vec<(i64, f64)> = table
        .rows
        .iter()
        .map(|r| (r[2].as_f64() as i64, r[7].as_f64() - 1.0))
        .collect();
    for &n in &config.n_values {
        let d: Vec<f64> = deviations.iter().filter(|x| x.0 == n).map(|x| x.1).collect();
        summary.per_n.push(PerN::of(n, &d));
        let worst = d.iter().map(|x| x.abs()).fold(0.0, f64::max);
        summary.statistics.insert(format!("max_deviation_n{n}"), worst);
    }
    let largest = *config.n_values.last().expect("validated");
    let worst = summary.statistics[&format!("max_deviation_n{largest}")];
    summary.checks.push(Check::at_most("axis_bound", axis_scaled, 1.0));
    summary.checks.push(Check::at_most("max_deviation_at_largest_n", worst, SHAPE_DEVIATION_BOUND));
    Ok(ExperimentOutput { table, summary })
}

/// Outcome of the four quadrant geodesics of one environment at one level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayProbe {
    pub seed: u64,
    pub k: Level,
    /// Per quadrant: `T(0, v_i^{k+1})`.
    pub times: [f64; 4],
    /// Per quadrant: index of the last corner of `V_k(0)` on the geodesic.
    pub last_corner: [Option<usize>; 4],
    /// Per quadrant: whether the geodesic passes through `v_i^k`.
    pub coalesced: [bool; 4],
}

impl RayProbe {
    pub fn distinct_corners(&self) -> usize {
        let mut seen: Vec<usize> = self.last_corner.iter().flatten().copied().collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }
}

/// Geodesics from the origin to the corners of `V_{k+1}(0)`, probed at the
/// corners of `V_k(0)`.
pub fn probe_rays(env: &Environment, k: Level, opts: &SearchOptions) -> Result<RayProbe> {
    let inner = env.enclosing_square(Vertex::ORIGIN, k)?.corners();
    let outer = env.enclosing_square(Vertex::ORIGIN, k + 1)?.corners();
    let mut probe = RayProbe {
        seed: env.seed(),
        k,
        times: [0.0; 4],
        last_corner: [None; 4],
        coalesced: [false; 4],
    };
    for i in 0..4 {
        let result = distance_with(env, Vertex::ORIGIN, outer[i], opts)?;
        let path = result.path.vertices();
        probe.times[i] = result.time;
        probe.last_corner[i] = last_corner(path, &inner);
        probe.coalesced[i] = path.contains(&inner[i]);
    }
    Ok(probe)
}

/// Finite-scale proxy for the four geodesic rays from the origin.
///
/// For every level `k <= k_max` the four geodesics to the corners of
/// `V_{k+1}(0)` are probed. Reported: how often they pass a corner of
/// `V_k(0)`, how often quadrant `i` passes `v_i^k`, and at `k_max` how
/// often the four geodesics leave `V_k(0)` through four distinct corners.
pub fn rays_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    spacing(config.k_max + 1)?;
    let mut summary = ExperimentSummary::new(config, "T")?;
    summary.proxy = true;
    let opts = config.options();
    let items: Vec<(u64, Level)> = config
        .seeds
        .iter()
        .flat_map(|&s| (1..=config.k_max).map(move |k| (s, k)))
        .collect();
    let probes: Vec<RayProbe> = items
        .par_iter()
        .map(|&(seed, k)| probe_rays(&Environment::from_seed(config.alpha, seed)?, k, &opts))
        .collect::<Result<_>>()?;

    let mut table = SampleTable::new(&[
        "seed", "alpha", "k", "quadrant", "T", "last_corner", "coalesced",
    ]);
    for p in &probes {
        for i in 0..4 {
            table.rows.push(vec![
                Cell::Unsigned(p.seed),
                Cell::Real(config.alpha),
                Cell::Int(p.k as i64),
                Cell::Int(i as i64 + 1),
                Cell::Real(p.times[i]),
                Cell::Int(p.last_corner[i].map_or(0, |c| c as i64 + 1)),
                Cell::Int(p.coalesced[i] as i64),
            ]);
        }
    }
    let rate = |f: &dyn Fn(&RayProbe, usize) -> bool, k: Level| {
        let of_k: Vec<&RayProbe> = probes.iter().filter(|p| p.k == k).collect();
        let hits = of_k.iter().map(|p| (0..4).filter(|&i| f(p, i)).count()).sum::<usize>();
        hits as f64 / (4 * of_k.len()).max(1) as f64
    };
    for k in 1..=config.k_max {
        let times: Vec<f64> = probes.iter().filter(|p| p.k == k).flat_map(|p| p.times).collect();
        summary.per_n.push(PerN::of(k as i64, &times));
        summary.statistics.insert(
            format!("corner_passage_rate_k{k}"),
            rate(&|p, i| p.last_corner[i].is_some(), k),
        );
        summary.statistics.insert(
            format!("coalescence_rate_k{k}"),
            rate(&|p, i| p.coalesced[i], k),
        );
        summary.statistics.insert(
            format!("quadrant_match_rate_k{k}"),
            rate(&|p, i| p.last_corner[i] == Some(i), k),
        );
    }
    let top: Vec<&RayProbe> = probes.iter().filter(|p| p.k == config.k_max).collect();
    let four = top.iter().filter(|p| p.distinct_corners() == 4).count() as f64 / top.len() as f64;
    let mean_distinct = mean(&top.iter().map(|p| p.distinct_corners() as f64).collect::<Vec<_>>());
    summary.statistics.insert("four_rays_rate".to_string(), four);
    summary.statistics.insert("mean_distinct_corners".to_string(), mean_distinct);
    summary.checks.push(Check::at_least(
        "corner_passage_k1",
        summary.statistics["corner_passage_rate_k1"],
        1.0,
    ));
    summary.checks.push(Check::at_least("four_rays_rate", four, FOUR_RAY_RATE));
    Ok(ExperimentOutput { table, summary })
}

/// Argument of the upper-right corner of `V_k(0)`, in `(0, pi/2)`.
pub fn corner_angle(env: &Environment, k: Level) -> Result<f64> {
    let v1 = env.enclosing_square(Vertex::ORIGIN, k)?.corners()[0];
    Ok((v1.y as f64).atan2(v1.x as f64))
}

/// Angles of the upper-right corners of `V_1(0), ..., V_K(0)` across
/// environments: coverage of `(0, pi/2)` by bins of width `epsilon`, and a
/// two-sample comparison between the two halves of the seed list.
pub fn corner_angle_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    config.validate()?;
    let mut summary = ExperimentSummary::new(config, "theta")?;
    summary.proxy = true;
    let rows: Vec<Vec<(Level, f64)>> = config
        .seeds
        .par_iter()
        .map(|&seed| {
            let env = Environment::from_seed(config.alpha, seed)?;
            (1..=config.k_max)
                .map(|k| Ok((k, corner_angle(&env, k)?)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let mut table = SampleTable::new(&["seed", "alpha", "k", "theta"]);
    for (&seed, angles) in config.seeds.iter().zip(&rows) {
        for &(k, theta) in angles {
            table.rows.push(vec![
                Cell::Unsigned(seed),
                Cell::Real(config.alpha),
                Cell::Int(k as i64),
                Cell::Real(theta),
            ]);
        }
    }
    let thetas: Vec<f64> = rows.iter().flatten().map(|x| x.1).collect();
    for k in 1..=config.k_max {
        let of_k: Vec<f64> = rows.iter().flatten().filter(|x| x.0 == k).map(|x| x.1).collect();
        summary.per_n.push(PerN::of(k as i64, &of_k));
    }
    let bins = (FRAC_PI_2 / config.epsilon).round().max(1.0) as usize;
    let mut hit = vec![false; bins];
    for &t in &thetas {
        let b = ((t / FRAC_PI_2) * bins as f64).floor() as usize;
        hit[b.min(bins - 1)] = true;
    }
    let coverage = hit.iter().filter(|&&h| h).count() as f64 / bins as f64;
    let inside = thetas.iter().all(|&t| t > 0.0 && t < FRAC_PI_2);
    summary.statistics.insert("bins".to_string(), bins as f64);
    summary.statistics.insert("coverage".to_string(), coverage);
    summary.checks.push(Check::at_least("angles_in_open_quadrant", inside as u8 as f64, 1.0));
    summary.checks.push(Check::at_least("bin_coverage", coverage, ANGLE_COVERAGE));
    let half = rows.len() / 2;
    if half > 0 {
        let a: Vec<f64> = rows[..half].iter().flatten().map(|x| x.1).collect();
        let b: Vec<f64> = rows[half..].iter().flatten().map(|x| x.1).collect();
        let (d, p) = ks_two_sample(&a, &b);
        summary.statistics.insert("ks_statistic".to_string(), d);
        summary.statistics.insert("ks_pvalue".to_string(), p);
        summary.checks.push(Check::at_least("seed_halves_agree", p, KS_SIGNIFICANCE));
    }
    Ok(ExperimentOutput { table, summary })
}

/// Dispatch by `config.experiment`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput> {
    match config.experiment {
        ExperimentKind::Variance => variance_experiment(config),
        ExperimentKind::Wandering => wandering_experiment(config),
        ExperimentKind::Shape => shape_experiment(config),
        ExperimentKind::Rays => rays_experiment(config),
        ExperimentKind::CornerAngle => corner_angle_experiment(config),
        ExperimentKind::Concentration => concentration_experiment(config),
    }
}
