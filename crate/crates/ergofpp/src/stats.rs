//! Small statistics toolkit: moments, quantiles, log-log regression and
//! Kolmogorov-Smirnov tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance; 0 for fewer than two samples.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
}

/// Linear-interpolated quantile of already sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    let frac = pos - lo as f64;
    sorted[lo] + (sorted[hi] - sorted[lo]) * frac
}

pub fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Least-squares fit `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Half-width of the 95% confidence interval on the slope; infinite when
    /// there are fewer than three points.
    pub half_width: f64,
    pub points: usize,
}

impl LineFit {
    pub fn contains(&self, value: f64) -> bool {
        (self.slope - value).abs() <= self.half_width
    }
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let mx = mean(xs);
    let my = mean(ys);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let half_width = if n >= 3 {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (y - intercept - slope * x).powi(2))
            .sum();
        let se = (rss / (n - 2) as f64 / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, (n - 2) as f64)
            .expect("positive degrees of freedom")
            .inverse_cdf(0.975);
        // A perfect fit still gets a nonzero band.
        (t * se).max(f64::EPSILON)
    } else {
        f64::INFINITY
    };
    Some(LineFit {
        slope,
        intercept,
        half_width,
        points: n,
    })
}

/// Fit `log y` against `log x`, skipping non-positive entries.
pub fn fit_log_log(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .unzip();
    fit_line(&lx, &ly)
}

/// Asymptotic Kolmogorov distribution tail `P(K > lambda)`.
fn kolmogorov_tail(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    for j in 1..=100 {
        let j = j as f64;
        let term = 2.0 * (-1f64).powi(j as i32 - 1) * (-2.0 * j * j * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
    }
    sum.clamp(0.0, 1.0)
}

/// One-sample KS statistic against U(0,1). Sorts `u` in place.
pub fn ks_uniform_statistic(u: &mut [f64]) -> f64 {
    u.sort_by(f64::total_cmp);
    let n = u.len() as f64;
    u.iter()
        .enumerate()
        .map(|(i, &x)| {
            let lo = x - i as f64 / n;
            let hi = (i + 1) as f64 / n - x;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// p-value of the one-sample KS test against U(0,1).
pub fn ks_uniform_pvalue(u: &mut [f64]) -> f64 {
    let d = ks_uniform_statistic(u);
    let n = u.len() as f64;
    let sn = n.sqrt();
    kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d)
}

/// Two-sample KS statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let a = sorted(a);
    let b = sorted(b);
    let (n, m) = (a.len(), b.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let x = a[i].min(b[j]);
        while i < n && a[i] <= x {
            i += 1;
        }
        while j < m && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let sn = ne.sqrt();
    (d, kolmogorov_tail((sn + 0.12 + 0.11 / sn) * d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;

    #[test]
    fn moments() {
        assert_eq!(mean(&[1.0, 2.0, 3.0]), 2.0);
        assert_eq!(variance(&[1.0, 2.0, 3.0]), 1.0);
        assert_eq!(variance(&[5.0]), 0.0);
        let s = sorted(&[3.0, 1.0, 2.0, 4.0]);
        assert_eq!(quantile_sorted(&s, 0.5), 2.5);
        assert_eq!(quantile_sorted(&s, 0.0), 1.0);
        assert_eq!(quantile_sorted(&s, 1.0), 4.0);
    }

    #[test]
    fn recovers_power_law_slope_under_noise() {
        // y = c n^p with 1% multiplicative noise.
        let mut rng = CounterRng::new(3, 0);
        for p in [0.4, 0.82, 1.0, 2.0] {
            let ns: Vec<f64> = [25.0, 125.0, 625.0, 3125.0, 15625.0].to_vec();
            let ys: Vec<f64> = ns
                .iter()
                .map(|n| 3.0 * n.powf(p) * (1.0 + 0.01 * (2.0 * rng.next_f64() - 1.0)))
                .collect();
            let fit = fit_log_log(&ns, &ys).unwrap();
            assert!((fit.slope - p).abs() < 0.02, "p={p} got {}", fit.slope);
            assert!(fit.half_width > 0.0 && fit.half_width.is_finite());
        }
    }

    #[test]
    fn two_points_have_unbounded_band() {
        let fit = fit_line(&[0.0, 1.0], &[0.0, 2.0]).unwrap();
        assert_eq!(fit.slope, 2.0);
        assert!(fit.half_width.is_infinite());
        assert!(fit_line(&[1.0, 1.0], &[0.0, 2.0]).is_none());
    }

    #[test]
    fn ks_detects_non_uniform() {
        let mut rng = CounterRng::new(9, 1);
        let mut good: Vec<f64> = (0..5000).map(|_| rng.next_f64()).collect();
        assert!(ks_uniform_pvalue(&mut good) > 1e-3);
        let mut bad: Vec<f64> = (0..5000).map(|_| rng.next_f64().powi(2)).collect();
        assert!(ks_uniform_pvalue(&mut bad) < 1e-6);

        let a: Vec<f64> = (0..2000).map(|_| rng.next_f64()).collect();
        let b: Vec<f64> = (0..2000).map(|_| rng.next_f64()).collect();
        let c: Vec<f64> = (0..2000).map(|_| rng.next_f64() + 0.2).collect();
        assert!(ks_two_sample(&a, &b).1 > 1e-3);
        assert!(ks_two_sample(&a, &c).1 < 1e-6);
    }
}
