//! Tail diagnostics: power-law fits of one-sided empirical CCDFs,
//! binomial-inversion confidence bands, and order-statistics U-test
//! p-values with Dragon-King flags.
//!
//! All slopes here are CCDF tail exponents: a CCDF ~ x^s tail has
//! slope s < 0, one unit shallower than the density exponent.

use serde::{Deserialize, Serialize};

use crate::data::Side;
use crate::specfun::{self, BetaArgs};
use crate::{Error, Result};

/// Points of one empirical CCDF side retained for tail analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSelection {
    pub side: Side,
    pub threshold: f64,
    /// (magnitude, ccdf) pairs, ascending in magnitude.
    pub points: Vec<(f64, f64)>,
    pub n_total: usize,
    pub n_tail: usize,
}

/// OLS power-law fit of ln(ccdf) on ln(x), plus a Hill-style
/// maximum-likelihood exponent for cross-checking.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub hill_slope: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DragonKingFlag {
    None,
    DragonKing,
    NegativeDragonKing,
}

/// Full diagnostic bundle for one tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailReport {
    pub side: Side,
    pub threshold: f64,
    pub n_total: usize,
    pub n_tail: usize,
    pub slope: f64,
    pub intercept: f64,
    pub slope_stderr: f64,
    pub hill_slope: f64,
    /// Per selected point: (magnitude, empirical ccdf, band lower, band upper).
    pub ci_band: Vec<(f64, f64, f64, f64)>,
    /// Per-rank U-test p-values, rank 1 = largest magnitude.
    pub p_values: Vec<f64>,
    pub dragon_king_flags: Vec<DragonKingFlag>,
}

const MIN_TAIL: usize = 10;

/// Retains the CCDF points with ccdf ≤ `fraction`; the threshold is the
/// smallest retained magnitude.
pub fn select_tail(
    ccdf_points: &[(f64, f64)],
    side: Side,
    fraction: f64,
    n_total: usize,
) -> Result<TailSelection> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::Domain(format!("fraction must be in (0, 1], got {fraction}")));
    }
    let points: Vec<(f64, f64)> = ccdf_points.iter().copied().filter(|&(_, c)| c <= fraction).collect();
    // n_tail counts sample points, not distinct magnitudes.
    let n_tail = points
        .first()
        .map(|&(_, c)| (c * n_total as f64).round() as usize)
        .unwrap_or(0);
    if n_tail < MIN_TAIL {
        return Err(Error::InvalidInput(format!(
            "tail selection has {n_tail} points, need at least {MIN_TAIL}; increase the fraction"
        )));
    }
    Ok(TailSelection {
        side,
        threshold: points[0].0,
        points,
        n_total,
        n_tail,
    })
}

impl TailSelection {
    /// Builds a selection directly from raw tail magnitudes (all > 0),
    /// with ccdf values relative to `n_total`.
    pub fn from_tail_sample(side: Side, magnitudes: &[f64], n_total: usize) -> Result<Self> {
        if magnitudes.len() < MIN_TAIL {
            return Err(Error::InvalidInput(format!(
                "tail sample has {} points, need at least {MIN_TAIL}",
                magnitudes.len()
            )));
        }
        if magnitudes.iter().any(|&m| !(m > 0.0) || !m.is_finite()) {
            return Err(Error::InvalidInput("tail magnitudes must be positive finite".into()));
        }
        let mut sorted = magnitudes.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
        let m = sorted.len();
        let mut points: Vec<(f64, f64)> = Vec::with_capacity(m);
        for (i, &x) in sorted.iter().enumerate() {
            let ccdf = (m - i) as f64 / n_total as f64;
            // Keep one pair per distinct magnitude (the highest ccdf).
            if points.last().map(|&(px, _)| px == x) != Some(true) {
                points.push((x, ccdf));
            }
        }
        Ok(Self {
            side,
            threshold: sorted[0],
            points,
            n_total,
            n_tail: m,
        })
    }

    /// Descending-order tail magnitudes reconstructed from the CCDF
    /// pairs (ties expanded to their multiplicities).
    fn descending_sample(&self) -> Vec<f64> {
        let n = self.n_total as f64;
        let mut out = Vec::with_capacity(self.n_tail);
        for (i, &(x, c)) in self.points.iter().enumerate() {
            let next_c = self.points.get(i + 1).map_or(0.0, |&(_, c)| c);
            let count = ((c - next_c) * n).round().max(0.0) as usize;
            for _ in 0..count {
                out.push(x);
            }
        }
        out.reverse();
        out
    }
}

/// OLS fit of ln(ccdf) on ln(x) over the selection, with the residual
/// standard error of the slope and a Hill estimate alongside.
pub fn fit_powerlaw(selection: &TailSelection) -> Result<PowerLawFit> {
    let pts = &selection.points;
    let m = pts.len();
    if m < 2 || pts.iter().all(|&(x, _)| x == pts[0].0) {
        return Err(Error::InvalidInput("degenerate magnitude range in tail selection".into()));
    }
    let lx: Vec<f64> = pts.iter().map(|&(x, _)| x.ln()).collect();
    let ly: Vec<f64> = pts.iter().map(|&(_, c)| c.ln()).collect();
    let mf = m as f64;
    let mx = lx.iter().sum::<f64>() / mf;
    let my = ly.iter().sum::<f64>() / mf;
    let sxx: f64 = lx.iter().map(|&x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::InvalidInput("degenerate magnitude range in tail selection".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(&x, &y)| {
            let r = y - intercept - slope * x;
            r * r
        })
        .sum();
    let slope_stderr = if m > 2 { (rss / (mf - 2.0) / sxx).sqrt() } else { 0.0 };
    // Hill estimator on the reconstructed sample magnitudes.
    let sample = selection.descending_sample();
    let x_min = selection.threshold;
    let mean_log: f64 =
        sample.iter().map(|&x| (x / x_min).ln()).sum::<f64>() / sample.len() as f64;
    let hill_slope = if mean_log > 0.0 { -1.0 / mean_log } else { f64::NEG_INFINITY };
    Ok(PowerLawFit { slope, intercept, slope_stderr, hill_slope })
}

// P(K ≤ k) for K ~ Binomial(n, q), via the incomplete-beta identity.
fn binomial_cdf(n: usize, k: usize, q: f64) -> f64 {
    if k >= n {
        return 1.0;
    }
    if q <= 0.0 {
        return 1.0;
    }
    if q >= 1.0 {
        return 0.0;
    }
    let shapes = BetaArgs::new((n - k) as f64, k as f64 + 1.0).expect("positive shapes");
    specfun::reg_inc_beta(1.0 - q, shapes).unwrap_or(0.0)
}

// Smallest k with P(K ≤ k) ≥ p.
fn binomial_quantile(n: usize, q: f64, p: f64) -> usize {
    let (mut lo, mut hi) = (0usize, n);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if binomial_cdf(n, mid, q) >= p {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Per-point confidence band on the ccdf under the model: for each
/// magnitude x with model exceedance probability q = model_ccdf(x) the
/// band is [k_lo/n, k_hi/n] with k_lo, k_hi the binomial quantiles at
/// (1 ∓ level)/2 and n the total sample size. A model probability of
/// exactly 0 yields the degenerate band (0, 0).
pub fn binomial_ci_band<F: Fn(f64) -> f64>(
    selection: &TailSelection,
    model_ccdf: F,
    level: f64,
) -> Result<Vec<(f64, f64)>> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("level must be in (0, 1), got {level}")));
    }
    let n = selection.n_total;
    let p_lo = (1.0 - level) / 2.0;
    let p_hi = (1.0 + level) / 2.0;
    let mut band = Vec::with_capacity(selection.points.len());
    for &(x, _) in &selection.points {
        let q = model_ccdf(x).clamp(0.0, 1.0);
        if q == 0.0 {
            band.push((0.0, 0.0));
            continue;
        }
        let k_lo = binomial_quantile(n, q, p_lo);
        let k_hi = binomial_quantile(n, q, p_hi);
        band.push((k_lo as f64 / n as f64, k_hi as f64 / n as f64));
    }
    Ok(band)
}

// Tie-break jitter applied to tied order statistics in log-space;
// rank-proportional, seedless, deterministic.
const TIE_EPS: f64 = 1e-12;

/// Per-rank U-test p-values under a Pareto null with the given CCDF
/// `exponent` (< 0). Rank 1 is the largest magnitude. Spacings
/// Y_k = k·(ln x_(k) − ln x_(k+1)) are iid exponential under the null;
/// the rank-r statistic compares Y_r against the remaining spacings and
/// the returned p-value is exact for the resulting ratio, so the
/// exponent cancels and only enters as the documented normalization.
pub fn u_test_pvalues(selection: &TailSelection, exponent: f64) -> Result<Vec<f64>> {
    if !(exponent < 0.0) {
        return Err(Error::Domain(format!("exponent must be negative, got {exponent}")));
    }
    let mut sample = selection.descending_sample();
    let m = sample.len();
    if m < MIN_TAIL {
        return Err(Error::InvalidInput(format!("need at least {MIN_TAIL} tail points, got {m}")));
    }
    // Break ties so every log-spacing is finite: inflate rank k by
    // exp(TIE_EPS·(m−k)), preserving strict descending order.
    for (k, x) in sample.iter_mut().enumerate() {
        *x *= (TIE_EPS * (m - k) as f64).exp();
    }
    let rate = -exponent;
    let spacings: Vec<f64> = (0..m - 1)
        .map(|k| rate * (k as f64 + 1.0) * (sample[k].ln() - sample[k + 1].ln()))
        .collect();
    let total: f64 = spacings.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidInput("degenerate tail sample: all magnitudes equal".into()));
    }
    // Under the null Y_r/total ~ Beta(1, m−2), so
    // P(Y_r ≥ y) = (1 − y/total)^{m−2}.
    let power = (m - 2) as f64;
    Ok(spacings.iter().map(|&y| ((1.0 - y / total).max(0.0)).powf(power)).collect())
}

/// Flags per rank: p < 0.05 signals a Dragon-King (outlier beyond the
/// power law), p > 0.95 a negative Dragon-King.
pub fn dragon_king_flags(p_values: &[f64]) -> Vec<DragonKingFlag> {
    p_values
        .iter()
        .map(|&p| {
            if p < 0.05 {
                DragonKingFlag::DragonKing
            } else if p > 0.95 {
                DragonKingFlag::NegativeDragonKing
            } else {
                DragonKingFlag::None
            }
        })
        .collect()
}

/// Assembles the full tail report: power-law fit, band against the
/// supplied model ccdf, and U-test p-values at the fitted exponent.
pub fn tail_report<F: Fn(f64) -> f64>(
    selection: &TailSelection,
    model_ccdf: F,
    level: f64,
) -> Result<TailReport> {
    let fitted = fit_powerlaw(selection)?;
    let band = binomial_ci_band(selection, &model_ccdf, level)?;
    let ci_band = selection
        .points
        .iter()
        .zip(&band)
        .map(|(&(x, c), &(lo, hi))| (x, c, lo, hi))
        .collect();
    let p_values = u_test_pvalues(selection, fitted.slope.min(-1e-6))?;
    let dragon_king_flags = dragon_king_flags(&p_values);
    Ok(TailReport {
        side: selection.side,
        threshold: selection.threshold,
        n_total: selection.n_total,
        n_tail: selection.n_tail,
        slope: fitted.slope,
        intercept: fitted.intercept,
        slope_stderr: fitted.slope_stderr,
        hill_slope: fitted.hill_slope,
        ci_band,
        p_values,
        dragon_king_flags,
    })
}
