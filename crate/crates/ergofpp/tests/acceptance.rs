//! Acceptance suite: twelve criteria at their stated tolerances.
//!
//! Runs without the libtest harness so that every criterion prints exactly
//! one PASS/FAIL line, even when all of them pass. Exits nonzero if any
//! criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use ergofpp::experiments::{
    geodesic_samples, rays_experiment, run_experiment, shape_experiment, summarize_concentration,
    summarize_variance, summarize_wandering, ExperimentConfig, ExperimentKind, GeodesicSample,
};
use ergofpp::geodesy::distance;
use ergofpp::lattice::EdgeId;
use ergofpp::oracle::{brute_force_distance, check, Lemma, LemmaReport, Window};
use ergofpp::padic::{DigitSequence, DEFAULT_PRECISION};
use ergofpp::rng::CounterRng;
use ergofpp::weights::passage_time;
use ergofpp::{beta, Environment, Vertex};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let mut rng = CounterRng::new(0xACCE, 1);
    let mut worst: f64 = 0.0;
    for i in 0..500 {
        let env = Environment::from_seed(0.1, 10_000 + i).unwrap();
        let w = Window::new(rng.range_i64(-1000, 1000), rng.range_i64(-1000, 1000), 6, 6);
        let pick = |rng: &mut CounterRng| Vertex::new(w.x0 + rng.range_i64(0, 6), w.y0 + rng.range_i64(0, 6));
        let (u, v) = (pick(&mut rng), pick(&mut rng));
        let fast = distance(&env, u, v).unwrap().time;
        // Geodesics between vertices of a 6x6 window never leave it by more
        // than one step, so the expanded 8x8 window sees the global optimum.
        let slow = brute_force_distance(&env, &w.expanded(1), u, v).unwrap();
        worst = worst.max((fast - slow).abs());
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-12 && elapsed < Duration::from_secs(10),
        format!("500 instances, max |diff| {worst:e}, {:.2?}", elapsed),
    )
}

fn weight_bounds() -> Outcome {
    let start = Instant::now();
    let mut rng = CounterRng::new(0xACCE, 2);
    let mut bad = 0;
    for i in 0..100_000u64 {
        let env_seed = i % 100;
        let env = Environment::from_seed(0.1, env_seed).unwrap();
        let (x, y) = (rng.range_i64(-1 << 30, 1 << 30), rng.range_i64(-1 << 30, 1 << 30));
        let e = if rng.next_u64() & 1 == 0 {
            EdgeId::horizontal(x, y)
        } else {
            EdgeId::vertical(x, y)
        };
        let t = passage_time(&env, e).unwrap();
        if !(t.value() > 1.0 && t.value() <= 1.3) {
            bad += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        bad == 0 && elapsed < Duration::from_secs(1),
        format!("100000 edges, {bad} out of (1, 1.3], {:.2?}", elapsed),
    )
}

fn odometer_consistency() -> Outcome {
    let mut rng = CounterRng::new(0xACCE, 3);
    let mut mismatches = 0;
    for _ in 0..10_000 {
        let digits: Vec<u8> = (0..DEFAULT_PRECISION).map(|_| rng.index(5) as u8).collect();
        let w = DigitSequence::new(digits).unwrap();
        let m = rng.range_i64(-1000, 1001);
        let mut it = w.clone();
        for _ in 0..m.unsigned_abs() {
            it = if m > 0 { it.step() } else { it.step_back() };
        }
        if w.shift_level(m) != it.first_nonzero() {
            mismatches += 1;
        }
    }
    outcome(mismatches == 0, format!("10000 (omega, m) pairs, {mismatches} mismatches"))
}

/// One trial per environment, merged in seed order.
fn lemma_over_environments(lemma: Lemma, trials: u64) -> LemmaReport {
    let mut total: Option<LemmaReport> = None;
    for seed in 0..trials {
        let env = Environment::from_seed(0.1, seed).unwrap();
        let r = check(&env, lemma, 1, 1).unwrap();
        match &mut total {
            Some(t) => t.merge(&r),
            None => total = Some(r),
        }
    }
    total.unwrap()
}

fn lemma_suite() -> Outcome {
    let start = Instant::now();
    let plan = [
        (Lemma::Square, 1000),
        (Lemma::Corner, 500),
        (Lemma::Rectangle, 500),
        (Lemma::SameVertex, 200),
        (Lemma::InfGeo, 500),
    ];
    let mut passed = true;
    let mut parts = Vec::new();
    for (lemma, trials) in plan {
        let r = lemma_over_environments(lemma, trials);
        passed &= r.violations == 0;
        parts.push(format!("{} {}/{} applicable, {} violations", lemma, r.applicable, r.trials, r.violations));
    }
    let elapsed = start.elapsed();
    passed &= elapsed < Duration::from_secs(300);
    outcome(passed, format!("{}; {:.1?}", parts.join("; "), elapsed))
}

fn axis_config(n_values: Vec<i64>) -> ExperimentConfig {
    let mut c = ExperimentConfig::new(ExperimentKind::Variance);
    c.seeds = (0..200).collect();
    c.n_values = n_values;
    c
}

fn subset(samples: &[GeodesicSample], ns: &[i64]) -> Vec<GeodesicSample> {
    samples.iter().filter(|s| ns.contains(&s.n)).cloned().collect()
}

fn on_axis_bounds(samples: &[GeodesicSample], elapsed: Duration) -> Outcome {
    let mut c = axis_config(vec![5, 25, 125, 625, 3125]);
    c.experiment = ExperimentKind::Concentration;
    let s = summarize_concentration(&c, samples).unwrap();
    let lower = s.check("lower_bound").unwrap();
    let upper = s.check("upper_bound").unwrap();
    outcome(
        lower.passed && upper.passed && elapsed < Duration::from_secs(600),
        format!(
            "1000 samples, min T-n {:.4}, max (T-n)/(10 n^beta) {:.4}, {:.1?}",
            lower.value, upper.value, elapsed
        ),
    )
}

fn variance_exponent(samples: &[GeodesicSample]) -> Outcome {
    let ns = vec![25, 125, 625, 3125];
    let c = axis_config(ns.clone());
    let s = summarize_variance(&c, &subset(samples, &ns)).unwrap();
    let slope = s.slope.unwrap();
    outcome(
        slope.within && s.assertive,
        format!(
            "slope {:.3} vs 2 beta {:.3} +/- {}",
            slope.slope, slope.target, slope.tolerance
        ),
    )
}

fn wandering_exponent(samples: &[GeodesicSample]) -> Outcome {
    let ns = vec![25, 125, 625, 3125];
    let mut c = axis_config(ns.clone());
    c.experiment = ExperimentKind::Wandering;
    let s = summarize_wandering(&c, &subset(samples, &ns)).unwrap();
    let slope = s.slope.unwrap();
    let medians: Vec<String> = s.per_n.iter().map(|p| format!("{}", p.median)).collect();
    outcome(
        slope.within && s.assertive,
        format!(
            "slope {:.3} over {} positive medians [{}] vs beta {:.3} +/- {}",
            slope.slope,
            slope.points,
            medians.join(", "),
            slope.target,
            slope.tolerance
        ),
    )
}

fn off_axis_config() -> ExperimentConfig {
    let mut c = ExperimentConfig::new(ExperimentKind::Variance);
    c.lambda = 1.0;
    c.seeds = (0..100).collect();
    c
}

fn off_axis_concentration(samples: &[GeodesicSample]) -> Outcome {
    let s = summarize_variance(&off_axis_config(), samples).unwrap();
    let bound = s.check("excess_bounded").unwrap();
    let trend = s.check("excess_no_growth").unwrap();
    outcome(
        bound.passed && trend.passed,
        format!(
            "max T-2n {:.4} (bound {}), log-log trend of mean excess {:.4} (bound {})",
            bound.value, bound.bound, trend.value, trend.bound
        ),
    )
}

fn off_axis_wandering(samples: &[GeodesicSample]) -> Outcome {
    let mut c = off_axis_config();
    c.experiment = ExperimentKind::Wandering;
    let s = summarize_wandering(&c, samples).unwrap();
    let within = s.check("deviation_within_10n").unwrap();
    let floor = s.check("median_ratio_floor").unwrap();
    let trend = s.check("median_no_decrease").unwrap();
    outcome(
        within.passed && floor.passed && trend.passed,
        format!(
            "max deviation/n {:.3}, min median deviation/n {:.3}, median slope {:.3}",
            within.value, floor.value, trend.value
        ),
    )
}

fn shape() -> Outcome {
    let start = Instant::now();
    let mut c = ExperimentConfig::new(ExperimentKind::Shape);
    c.seeds = (0..20).collect();
    c.n_values = vec![3125];
    let s = shape_experiment(&c).unwrap().summary;
    let worst = s.check("max_deviation_at_largest_n").unwrap();
    let axis = s.check("axis_bound").unwrap();
    outcome(
        worst.passed && axis.passed,
        format!(
            "16 directions x 20 seeds at n=3125, max |T/|x|_1 - 1| {:.5}, {:.1?}",
            worst.value,
            start.elapsed()
        ),
    )
}

/// Largest level whose probes stay within a desk-scale time budget.
const RAYS_K_MAX: u32 = 4;

fn four_rays() -> Outcome {
    let mut c = ExperimentConfig::new(ExperimentKind::Rays);
    c.k_max = RAYS_K_MAX;
    let s = rays_experiment(&c).unwrap().summary;
    let four = s.check("four_rays_rate").unwrap();
    let k1 = s.check("corner_passage_k1").unwrap();
    outcome(
        four.passed && k1.passed,
        format!(
            "proxy at k={RAYS_K_MAX}: 4 distinct corners in {:.0}% of 100 environments, k=1 corner passage {:.0}%",
            100.0 * four.value,
            100.0 * k1.value
        ),
    )
}

fn determinism() -> Outcome {
    let mut configs = Vec::new();
    for kind in ExperimentKind::ALL {
        let mut c = ExperimentConfig::new(kind);
        c.seeds = (0..6).collect();
        c.n_values = vec![5, 25, 125];
        if kind == ExperimentKind::Wandering {
            c.lambda = 1.0;
        }
        configs.push(c);
    }
    let mut identical = 0;
    for c in &configs {
        let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let parallel = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
        let a = serial.install(|| run_experiment(c)).unwrap();
        let b = parallel.install(|| run_experiment(c)).unwrap();
        if a.table.to_csv() == b.table.to_csv() && a.summary.to_json() == b.summary.to_json() {
            identical += 1;
        }
    }
    outcome(
        identical == configs.len(),
        format!("{identical}/{} experiments byte-identical across reruns and thread counts", configs.len()),
    )
}

fn main() -> ExitCode {
    println!("acceptance suite, alpha = 0.1, beta = {:.5}", beta(0.1).unwrap());
    let mut failures = 0;
    let mut report = |id: u32, name: &str, o: Outcome| {
        let verdict = if o.passed { "PASS" } else { "FAIL" };
        println!("criterion {id:>2} {verdict} {name}: {}", o.detail);
        if !o.passed {
            failures += 1;
        }
    };

    report(1, "oracle equivalence", oracle_equivalence());
    report(2, "weight bounds", weight_bounds());
    report(3, "odometer consistency", odometer_consistency());
    report(4, "lemma suite", lemma_suite());

    let start = Instant::now();
    let axis = geodesic_samples(&axis_config(vec![5, 25, 125, 625, 3125])).unwrap();
    let axis_elapsed = start.elapsed();
    report(5, "on-axis concentration bounds", on_axis_bounds(&axis, axis_elapsed));
    report(6, "on-axis variance exponent", variance_exponent(&axis));
    report(7, "on-axis wandering exponent", wandering_exponent(&axis));

    let off_axis = geodesic_samples(&off_axis_config()).unwrap();
    report(8, "off-axis concentration", off_axis_concentration(&off_axis));
    report(9, "off-axis wandering", off_axis_wandering(&off_axis));

    report(10, "shape", shape());
    report(11, "four-ray proxy", four_rays());
    report(12, "determinism", determinism());

    if failures == 0 {
        println!("all 12 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("{failures} criteria failed");
        ExitCode::FAILURE
    }
}
