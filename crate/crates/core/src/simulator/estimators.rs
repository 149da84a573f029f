use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use super::SampleSet;
use crate::error::{Error, Result};

/// Fewest draws that must lie above the lower end of a tail-fit window.
pub const MIN_TAIL_COUNT: usize = 10_000;

const GUARD_FACTOR: f64 = 0.6;
const FIT_POINTS: usize = 100;

/// Sum by recursive halving. Deterministic for a given slice order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = pairwise_sum(xs) / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    (mean, pairwise_sum(&dev) / (n - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceEstimate {
    pub s: f64,
    pub mean: f64,
    pub stderr: f64,
}

/// Largest |s| on each side at which the sample mean of e^{sW} is still
/// trusted: 0.6 of the distance to the predicted abscissa. `None` means no
/// pole on that side.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LaplaceGuard {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
}

impl LaplaceGuard {
    pub fn new(alpha: Option<f64>, beta: Option<f64>) -> Self {
        LaplaceGuard { alpha, beta }
    }

    pub fn bounds(&self) -> (f64, f64) {
        let hi = self.alpha.map_or(f64::INFINITY, |a| GUARD_FACTOR * a);
        let lo = self.beta.map_or(f64::NEG_INFINITY, |b| -GUARD_FACTOR * b);
        (lo, hi)
    }

    pub fn check(&self, s: f64) -> Result<()> {
        let (lo, hi) = self.bounds();
        if s < lo || s > hi {
            return Err(Error::OutsideGuard { s, lo, hi });
        }
        Ok(())
    }
}

/// Sample mean and standard error of e^{sW} at each point.
pub fn empirical_laplace(values: &[f64], s_points: &[f64], guard: LaplaceGuard) -> Result<Vec<LaplaceEstimate>> {
    s_points
        .iter()
        .map(|&s| {
            guard.check(s)?;
            let e: Vec<f64> = values.iter().map(|w| (s * w).exp()).collect();
            let (mean, var) = mean_and_var(&e);
            Ok(LaplaceEstimate { s, mean, stderr: (var / values.len() as f64).sqrt() })
        })
        .collect()
}

/// Empirical against predicted transform at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub s: f64,
    pub empirical: f64,
    pub predicted: f64,
    pub stderr: f64,
}

impl IdentityCheck {
    pub fn difference(&self) -> f64 {
        self.empirical - self.predicted
    }

    /// Difference in units of the standard error.
    pub fn z_score(&self) -> f64 {
        let d = self.difference();
        if self.stderr > 0.0 {
            d / self.stderr
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY * d.signum()
        }
    }

    pub fn within(&self, k: f64) -> bool {
        self.z_score().abs() <= k
    }
}

/// Compares the mean of e^{sW} with an exact prediction.
pub fn continuous_identity_check(values: &[f64], s: f64, predicted: f64, guard: LaplaceGuard) -> Result<IdentityCheck> {
    let est = empirical_laplace(values, &[s], guard)?[0];
    Ok(IdentityCheck { s, empirical: est.mean, predicted, stderr: est.stderr })
}

/// Compares the mean of e^{sW} with p.G, where G = -varpi^T A(s)^{-1} 1 and
/// p is the empirical reset frequency. Both estimates come from the same
/// draws, so the standard error carries their covariance; at a reset W = 0,
/// which makes Cov(e^{sW}, 1{reset}) = p(1 - mean).
pub fn discrete_identity_check(samples: &SampleSet, s: f64, g: f64, guard: LaplaceGuard) -> Result<IdentityCheck> {
    let resets = samples.resets.ok_or(Error::SamplerRole("reset counts are needed"))?;
    guard.check(s)?;
    let n = samples.len() as f64;
    let p = resets as f64 / n;
    let e: Vec<f64> = samples.values.iter().map(|w| (s * w).exp()).collect();
    let (mean, var) = mean_and_var(&e);
    let combined = var + g * g * p * (1.0 - p) - 2.0 * g * p * (1.0 - mean);
    Ok(IdentityCheck { s, empirical: mean, predicted: p * g, stderr: (combined.max(0.0) / n).sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "policy")]
pub enum TailWindow {
    /// Empirical quantiles of the sample.
    Quantiles { lower: f64, upper: f64 },
    Explicit { lo: f64, hi: f64 },
}

impl Default for TailWindow {
    fn default() -> Self {
        TailWindow::Quantiles { lower: 0.95, upper: 0.9999 }
    }
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let idx = (q * (sorted.len() - 1) as f64).floor() as usize;
    sorted[idx.min(sorted.len() - 1)]
}

impl TailWindow {
    pub fn resolve(&self, sorted: &[f64]) -> [f64; 2] {
        match *self {
            TailWindow::Quantiles { lower, upper } => [quantile(sorted, lower), quantile(sorted, upper)],
            TailWindow::Explicit { lo, hi } => [lo, hi],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    pub alpha_hat: f64,
    pub d_hat: i64,
    /// Raw coefficient of log w; d_hat is one plus its rounding.
    pub log_w_coefficient: f64,
    pub window: [f64; 2],
    pub r_squared: f64,
    pub stderr_alpha: f64,
    pub stderr_log_w: f64,
    pub tail_count: usize,
}

fn count_above(sorted: &[f64], w: f64) -> usize {
    sorted.len() - sorted.partition_point(|&x| x <= w)
}

fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Weighted least squares of log S(w) on (1, w, log w) over the window.
pub fn fit_tail(values: &[f64], window: TailWindow) -> Result<TailFit> {
    if values.is_empty() {
        return Err(Error::InsufficientTailMass("empty sample".into()));
    }
    let sorted = sorted_copy(values);
    let [lo, hi] = window.resolve(&sorted);
    let tail_count = count_above(&sorted, lo);
    if tail_count < MIN_TAIL_COUNT {
        return Err(Error::InsufficientTailMass(format!(
            "{tail_count} draws above {lo}, need {MIN_TAIL_COUNT}"
        )));
    }
    if !(lo > 0.0) || !(hi > lo) {
        return Err(Error::InsufficientTailMass(format!("window [{lo}, {hi}] must be positive and nonempty")));
    }
    let n = sorted.len() as f64;
    let mut xtx = Matrix3::zeros();
    let mut xty = Vector3::zeros();
    let mut rows = Vec::with_capacity(FIT_POINTS);
    for i in 0..FIT_POINTS {
        let w = lo + (hi - lo) * i as f64 / (FIT_POINTS - 1) as f64;
        let c = count_above(&sorted, w);
        if c == 0 {
            continue;
        }
        let x = Vector3::new(1.0, w, w.ln());
        let y = (c as f64 / n).ln();
        let wt = c as f64;
        xtx += wt * x * x.transpose();
        xty += wt * y * x;
        rows.push((x, y, wt));
    }
    let inv = xtx.try_inverse().ok_or(Error::Singular)?;
    let beta = inv * xty;
    let wsum: f64 = rows.iter().map(|r| r.2).sum();
    let ybar = rows.iter().map(|r| r.2 * r.1).sum::<f64>() / wsum;
    let (mut rss, mut tss) = (0.0, 0.0);
    for (x, y, wt) in &rows {
        rss += wt * (y - beta.dot(x)).powi(2);
        tss += wt * (y - ybar).powi(2);
    }
    let dof = rows.len().saturating_sub(3).max(1) as f64;
    let sigma2 = rss / dof;
    let alpha_hat = -beta[1];
    if !(alpha_hat > 0.0) {
        return Err(Error::NegativeTailRate(alpha_hat));
    }
    Ok(TailFit {
        alpha_hat,
        d_hat: 1 + beta[2].round() as i64,
        log_w_coefficient: beta[2],
        window: [lo, hi],
        r_squared: if tss > 0.0 { 1.0 - rss / tss } else { 1.0 },
        stderr_alpha: (sigma2 * inv[(1, 1)]).sqrt(),
        stderr_log_w: (sigma2 * inv[(2, 2)]).sqrt(),
        tail_count,
    })
}

/// max/min of w^{1-d} e^{alpha w} S(w) over evenly spaced points of the window.
pub fn prefactor_ratio(values: &[f64], alpha: f64, d: u32, window: [f64; 2]) -> f64 {
    let sorted = sorted_copy(values);
    let n = sorted.len() as f64;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..FIT_POINTS {
        let w = window[0] + (window[1] - window[0]) * i as f64 / (FIT_POINTS - 1) as f64;
        let s = count_above(&sorted, w) as f64 / n;
        let v = (alpha * w + (1.0 - d as f64) * w.ln()).exp() * s;
        lo = lo.min(v);
        hi = hi.max(v);
    }
    hi / lo
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalPoint {
    pub w: f64,
    pub survival: f64,
    pub count: usize,
}

/// Empirical survival at `points` evenly spaced values from the smallest
/// to the largest draw.
pub fn survival_curve(values: &[f64], points: usize) -> Vec<SurvivalPoint> {
    if values.is_empty() || points == 0 {
        return Vec::new();
    }
    let sorted = sorted_copy(values);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    let n = sorted.len() as f64;
    (0..points)
        .map(|i| {
            let w = if points == 1 { lo } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 };
            let count = count_above(&sorted, w);
            SurvivalPoint { w, survival: count as f64 / n, count }
        })
        .collect()
}

/// Two-sample Kolmogorov-Smirnov statistic.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let (a, b) = (sorted_copy(a), sorted_copy(b));
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

/// Asymptotic critical value of the two-sample statistic at `level`.
pub fn ks_critical_value(n: usize, m: usize, level: f64) -> f64 {
    let (n, m) = (n as f64, m as f64);
    (-(level / 2.0).ln() / 2.0).sqrt() * ((n + m) / (n * m)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::sample_direct;
    use rand::Rng;
    use rand_distr::{Distribution, Exp};

    #[test]
    fn pairwise_matches_naive_on_integers() {
        let xs: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        assert_eq!(pairwise_sum(&xs), 499_500.0);
    }

    #[test]
    fn laplace_at_zero_is_exact() {
        let est = empirical_laplace(&[1.0, -3.0, 2.5], &[0.0], LaplaceGuard::default()).unwrap();
        assert_eq!(est[0].mean, 1.0);
        assert_eq!(est[0].stderr, 0.0);
    }

    #[test]
    fn guard_rejects_points_near_the_abscissa() {
        let g = LaplaceGuard::new(Some(1.0), Some(2.0));
        assert!(g.check(0.6).is_ok());
        assert!(matches!(g.check(0.61), Err(Error::OutsideGuard { .. })));
        assert!(g.check(-1.2).is_ok());
        assert!(g.check(-1.21).is_err());
    }

    #[test]
    fn constant_sample_has_no_tail() {
        let v = vec![2.0; 50_000];
        assert!(matches!(fit_tail(&v, TailWindow::default()), Err(Error::InsufficientTailMass(_))));
    }

    #[test]
    fn nonpositive_window_is_rejected() {
        let v: Vec<f64> = (0..100_000).map(|i| -(i as f64)).collect();
        assert!(fit_tail(&v, TailWindow::Quantiles { lower: 0.5, upper: 0.99 }).is_err());
    }

    #[test]
    fn exponential_recovers_rate() {
        let exp = Exp::new(2.0).unwrap();
        let s = sample_direct(1_000_000, 11, 0, "exp2", |r| exp.sample(r)).unwrap();
        let fit = fit_tail(&s.values, TailWindow::default()).unwrap();
        assert_eq!(fit.d_hat, 1);
        assert!((fit.alpha_hat - 2.0).abs() < 0.1, "{fit:?}");
    }

    #[test]
    fn erlang_two_recovers_order() {
        let exp = Exp::new(1.0).unwrap();
        let s = sample_direct(1_000_000, 12, 0, "erl2", |r| exp.sample(r) + exp.sample(r)).unwrap();
        let fit = fit_tail(&s.values, TailWindow::default()).unwrap();
        assert_eq!(fit.d_hat, 2, "{fit:?}");
        assert!((fit.alpha_hat - 1.0).abs() < 0.05, "{fit:?}");
        assert!(prefactor_ratio(&s.values, 1.0, 2, fit.window) < 10.0);
    }

    #[test]
    fn ks_same_law_is_small() {
        let a = sample_direct(20_000, 1, 0, "u", |r| r.random::<f64>()).unwrap();
        let b = sample_direct(20_000, 2, 0, "u", |r| r.random::<f64>()).unwrap();
        let d = ks_two_sample(&a.values, &b.values);
        assert!(d < ks_critical_value(20_000, 20_000, 1e-3));
        let c = sample_direct(20_000, 3, 0, "u", |r| r.random::<f64>().sqrt()).unwrap();
        assert!(ks_two_sample(&a.values, &c.values) > ks_critical_value(20_000, 20_000, 1e-3));
    }

    #[test]
    fn ks_critical_value_at_one_per_mille() {
        let c = ks_critical_value(1, 1, 1e-3) / 2f64.sqrt();
        assert!((c - 1.9495).abs() < 1e-4);
    }

    #[test]
    fn survival_curve_counts() {
        let pts = survival_curve(&[0.0, 1.0, 2.0, 3.0], 4);
        let counts: Vec<usize> = pts.iter().map(|p| p.count).collect();
        assert_eq!(counts, vec![3, 2, 1, 0]);
    }
}
