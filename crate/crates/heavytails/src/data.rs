//! Price-series ingestion, drift removal, and empirical statistics.
//!
//! The pipeline is: close prices S_t → log cumulative returns
//! r_t = ln(S_t/S_0) → detrended returns x_t = r_t − μ₁t with μ₁ the
//! least-squares drift slope on the trading-day index → daily (or
//! τ-day) increments dx, from which moments, the smoothed mode, the
//! gain fraction, and one-sided empirical CCDFs are computed.

use std::collections::BTreeMap;
use std::io::Read;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Which side of the return distribution an operation refers to.
/// Zero increments count as gains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Side {
    Gains,
    Losses,
}

/// Daily closing prices, strictly increasing in date.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    pub dates: Vec<NaiveDate>,
    pub close: Vec<f64>,
}

/// Detrended log-return series derived from a [`PriceSeries`].
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    /// r_t = ln(S_t/S_0)
    pub r: Vec<f64>,
    /// Least-squares daily drift slope of r on the trading-day index.
    pub mu1: f64,
    /// x_t = r_t − mu1·t
    pub x: Vec<f64>,
    /// dx_t = x_t − x_{t−1}
    pub dx: Vec<f64>,
}

/// Summary statistics of an increment sample. `m2` is the population
/// variance (denominator n).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalStats {
    pub m1: f64,
    pub m2: f64,
    pub median: f64,
    pub mode_smoothed: f64,
    pub w_g: f64,
    pub w_l: f64,
    pub n_gains: usize,
    pub n_losses: usize,
}

/// Reads a delimited file with a date column (ISO-8601) and a close
/// price column. Rows are sorted by date; duplicate dates and
/// non-positive prices are rejected with the offending line number.
pub fn load_prices<R: Read>(source: R, date_column: &str, price_column: &str) -> Result<PriceSeries> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(source);
    let headers = reader.headers().map_err(|e| Error::Parse {
        line: 1,
        message: format!("cannot read header: {e}"),
    })?;
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("missing column '{name}' (found: {})", headers.iter().collect::<Vec<_>>().join(", ")),
            })
    };
    let date_idx = find(date_column)?;
    let price_idx = find(price_column)?;

    let mut rows: Vec<(NaiveDate, f64)> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let date_str = record.get(date_idx).unwrap_or("");
        let price_str = record.get(price_idx).unwrap_or("");
        if date_str.is_empty() && price_str.is_empty() {
            continue;
        }
        let date = NaiveDate::parse_from_str(date_str, "%Y-%m-%d").map_err(|e| Error::Parse {
            line,
            message: format!("bad date '{date_str}': {e}"),
        })?;
        let price: f64 = price_str.parse().map_err(|e| Error::Parse {
            line,
            message: format!("bad price '{price_str}': {e}"),
        })?;
        if !(price > 0.0 && price.is_finite()) {
            return Err(Error::Parse {
                line,
                message: format!("non-positive price {price} on {date}"),
            });
        }
        rows.push((date, price));
    }
    if rows.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "need at least 2 price rows, got {}",
            rows.len()
        )));
    }
    rows.sort_by_key(|&(d, _)| d);
    for w in rows.windows(2) {
        if w[0].0 == w[1].0 {
            return Err(Error::InvalidInput(format!("duplicate date {}", w[0].0)));
        }
    }
    let (dates, close) = rows.into_iter().unzip();
    Ok(PriceSeries { dates, close })
}

/// Removes the linear drift from the log cumulative returns. The slope
/// is fitted on the trading-day index 0..n−1, not on calendar days.
pub fn detrend(prices: &PriceSeries) -> Result<ReturnSeries> {
    let n = prices.close.len();
    if n < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 prices to detrend, got {n}")));
    }
    let s0 = prices.close[0];
    let r: Vec<f64> = prices.close.iter().map(|&s| (s / s0).ln()).collect();
    // OLS slope through the data (with intercept); r_0 = 0 by construction.
    let nf = n as f64;
    let t_mean = (nf - 1.0) / 2.0;
    let r_mean = r.iter().sum::<f64>() / nf;
    let mut num = 0.0;
    let mut den = 0.0;
    for (t, &rt) in r.iter().enumerate() {
        let dt = t as f64 - t_mean;
        num += dt * (rt - r_mean);
        den += dt * dt;
    }
    let mu1 = if den > 0.0 { num / den } else { 0.0 };
    let x: Vec<f64> = r.iter().enumerate().map(|(t, &rt)| rt - mu1 * t as f64).collect();
    let dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(ReturnSeries { r, mu1, x, dx })
}

/// Non-overlapping τ-day sums of the daily increments; τ = 1 returns
/// the dailies themselves.
pub fn daily_increments(series: &ReturnSeries, tau: usize) -> Result<Vec<f64>> {
    if tau == 0 {
        return Err(Error::Domain("tau must be at least 1".into()));
    }
    if tau > series.dx.len() {
        return Err(Error::InvalidInput(format!(
            "tau = {tau} exceeds the {} available daily increments",
            series.dx.len()
        )));
    }
    Ok(series.dx.chunks_exact(tau).map(|c| c.iter().sum()).collect())
}

/// Silverman's rule-of-thumb bandwidth.
fn silverman_bandwidth(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    let q = |p: f64| {
        let idx = p * (sorted.len() - 1) as f64;
        let lo = idx.floor() as usize;
        let hi = idx.ceil() as usize;
        sorted[lo] + (idx - lo as f64) * (sorted[hi] - sorted[lo])
    };
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    0.9 * spread * n.powf(-0.2)
}

// Gaussian KDE evaluated from a binned representation of the sample.
struct BinnedKde {
    centers: Vec<f64>,
    weights: Vec<f64>,
    bandwidth: f64,
}

impl BinnedKde {
    const BINS: usize = 2048;

    fn new(xs: &[f64], bandwidth: f64) -> Self {
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let width = ((hi - lo) / Self::BINS as f64).max(f64::MIN_POSITIVE);
        let mut weights = vec![0.0; Self::BINS];
        for &x in xs {
            let b = (((x - lo) / width) as usize).min(Self::BINS - 1);
            weights[b] += 1.0;
        }
        let centers = (0..Self::BINS).map(|b| lo + (b as f64 + 0.5) * width).collect();
        let n = xs.len() as f64;
        for w in &mut weights {
            *w /= n;
        }
        Self { centers, weights, bandwidth }
    }

    fn density(&self, x: f64) -> f64 {
        let h = self.bandwidth;
        let mut sum = 0.0;
        for (&c, &w) in self.centers.iter().zip(&self.weights) {
            if w > 0.0 {
                let z = (x - c) / h;
                if z.abs() < 8.0 {
                    sum += w * (-0.5 * z * z).exp();
                }
            }
        }
        sum / (h * (2.0 * std::f64::consts::PI).sqrt())
    }

    fn argmax(&self) -> f64 {
        let best = self
            .centers
            .iter()
            .map(|&c| self.density(c))
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite density"))
            .map(|(i, _)| i)
            .unwrap_or(0);
        let step = if self.centers.len() > 1 {
            self.centers[1] - self.centers[0]
        } else {
            self.bandwidth
        };
        let mut a = self.centers[best] - step.max(self.bandwidth);
        let mut b = self.centers[best] + step.max(self.bandwidth);
        // Golden-section refinement of the density maximum.
        let phi = (5.0f64.sqrt() - 1.0) / 2.0;
        let mut c = b - phi * (b - a);
        let mut d = a + phi * (b - a);
        let mut fc = self.density(c);
        let mut fd = self.density(d);
        for _ in 0..120 {
            if b - a < 1e-6 * self.bandwidth {
                break;
            }
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - phi * (b - a);
                fc = self.density(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + phi * (b - a);
                fd = self.density(d);
            }
        }
        0.5 * (a + b)
    }
}

/// Summary statistics with the default (Silverman) mode bandwidth.
pub fn empirical_stats(increments: &[f64]) -> Result<EmpiricalStats> {
    empirical_stats_with_bandwidth(increments, None)
}

/// Summary statistics; `bandwidth` overrides the kernel-density
/// bandwidth used for the smoothed mode.
pub fn empirical_stats_with_bandwidth(
    increments: &[f64],
    bandwidth: Option<f64>,
) -> Result<EmpiricalStats> {
    let n = increments.len();
    if n < 30 {
        return Err(Error::InvalidInput(format!(
            "need at least 30 increments for reliable statistics, got {n}"
        )));
    }
    if increments.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite increment".into()));
    }
    let nf = n as f64;
    let m1 = increments.iter().sum::<f64>() / nf;
    let m2 = increments.iter().map(|x| (x - m1).powi(2)).sum::<f64>() / nf;
    let mut sorted = increments.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    };
    let h = match bandwidth {
        Some(h) if h > 0.0 && h.is_finite() => h,
        Some(h) => return Err(Error::Domain(format!("bandwidth must be positive finite, got {h}"))),
        None => silverman_bandwidth(increments),
    };
    let mode_smoothed = if h > 0.0 {
        BinnedKde::new(increments, h).argmax()
    } else {
        // Degenerate (constant) sample.
        increments[0]
    };
    let n_gains = increments.iter().filter(|&&x| x >= 0.0).count();
    let n_losses = n - n_gains;
    Ok(EmpiricalStats {
        m1,
        m2,
        median,
        mode_smoothed,
        w_g: n_gains as f64 / nf,
        w_l: n_losses as f64 / nf,
        n_gains,
        n_losses,
    })
}

/// One-sided empirical CCDF over positive magnitudes, normalized by the
/// total sample size. For gains the pair at magnitude x is
/// (#increments ≥ x)/n; for losses (#increments ≤ −x)/n. Pairs are
/// ascending in x, so values are nonincreasing and lie in (0, 1].
pub fn empirical_ccdf(increments: &[f64], side: Side) -> Result<Vec<(f64, f64)>> {
    let n_total = increments.len() as f64;
    let mut magnitudes: Vec<f64> = increments
        .iter()
        .filter_map(|&x| match side {
            Side::Gains if x > 0.0 => Some(x),
            Side::Losses if x < 0.0 => Some(-x),
            _ => None,
        })
        .collect();
    if magnitudes.is_empty() {
        return Err(Error::InvalidInput(format!("no points on the {side:?} side")));
    }
    magnitudes.sort_by(|a, b| a.partial_cmp(b).expect("finite sample"));
    // Collapse ties: one pair per distinct magnitude.
    let mut counts: BTreeMap<u64, (f64, usize)> = BTreeMap::new();
    for &m in &magnitudes {
        let e = counts.entry(m.to_bits()).or_insert((m, 0));
        e.1 += 1;
    }
    let mut pairs = Vec::with_capacity(counts.len());
    let mut at_least = magnitudes.len();
    for (_, (m, c)) in counts {
        pairs.push((m, at_least as f64 / n_total));
        at_least -= c;
    }
    Ok(pairs)
}
