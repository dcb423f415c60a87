//! Euler-Maruyama simulation of the return/variance SDE pair
//!
//!   dx = √v dW¹,   dv = −γ(v − θ) dt + κ v dW²,
//!
//! with independent Wiener increments. The stationary law of v is
//! Inverse Gamma with shape α/θ + 1 and scale α, where α = 2γθ/κ², and
//! returns accumulated over τ days are Student-t distributed; both serve
//! as generative oracles for the distribution module.
//!
//! Paths are independent: path i uses generator stream i of the
//! configured seed, so ensembles are bitwise reproducible and identical
//! under parallel and sequential execution.

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::exec::par_map_collect;
use crate::specfun;
use crate::{Error, Result};

/// How discretization undershoots of v are kept positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PositivityScheme {
    /// Negative proposals are clipped to (effectively) zero.
    FullTruncation,
    /// Negative proposals are reflected to their absolute value.
    Reflection,
}

/// Simulation configuration. `gamma` is the mean-reversion rate (1/day),
/// `theta` the mean variance (return²/day), `kappa` the multiplicative
/// noise amplitude (1/√day), `dt` the step in days.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SdeConfig {
    pub gamma: f64,
    pub theta: f64,
    pub kappa: f64,
    pub dt: f64,
    pub n_steps: usize,
    pub burn_in: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub positivity_scheme: PositivityScheme,
    /// Starting variance; defaults to `theta`.
    pub initial_variance: f64,
}

impl SdeConfig {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        gamma: f64,
        theta: f64,
        kappa: f64,
        dt: f64,
        n_steps: usize,
        burn_in: usize,
        n_paths: usize,
        seed: u64,
        positivity_scheme: PositivityScheme,
    ) -> Result<Self> {
        for (name, v) in [("gamma", gamma), ("theta", theta), ("kappa", kappa), ("dt", dt)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Domain(format!("{name} must be positive finite, got {v}")));
            }
        }
        if n_steps <= burn_in {
            return Err(Error::Domain(format!(
                "n_steps ({n_steps}) must exceed burn_in ({burn_in})"
            )));
        }
        if n_paths == 0 {
            return Err(Error::Domain("n_paths must be at least 1".into()));
        }
        Ok(Self {
            gamma,
            theta,
            kappa,
            dt,
            n_steps,
            burn_in,
            n_paths,
            seed,
            positivity_scheme,
            initial_variance: theta,
        })
    }

    /// Builds a config with `kappa` derived from a target composite
    /// parameter α = 2γθ/κ². The stationary law only identifies α, not
    /// γ and κ individually; γ defaults to 0.05/day elsewhere.
    pub fn with_target_alpha(
        gamma: f64,
        theta: f64,
        alpha: f64,
        dt: f64,
        n_steps: usize,
        burn_in: usize,
        n_paths: usize,
        seed: u64,
        positivity_scheme: PositivityScheme,
    ) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("alpha must be positive finite, got {alpha}")));
        }
        let kappa = (2.0 * gamma * theta / alpha).sqrt();
        Self::new(gamma, theta, kappa, dt, n_steps, burn_in, n_paths, seed, positivity_scheme)
    }

    pub fn with_initial_variance(mut self, v0: f64) -> Self {
        self.initial_variance = v0;
        self
    }

    /// Composite parameter α = 2γθ/κ² of the stationary Inverse Gamma law.
    pub fn alpha(&self) -> f64 {
        2.0 * self.gamma * self.theta / (self.kappa * self.kappa)
    }

    /// CDF of the stationary variance law IGa(α/θ + 1, scale α).
    pub fn stationary_variance_cdf(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let alpha = self.alpha();
        specfun::reg_inc_gamma_upper(alpha / self.theta + 1.0, alpha / v).unwrap_or(0.0)
    }

    /// Density of the stationary volatility law, f(σ) = 2σ · IGa(σ²; ·).
    pub fn stationary_volatility_pdf(&self, sigma: f64) -> f64 {
        if sigma <= 0.0 {
            return 0.0;
        }
        let alpha = self.alpha();
        let shape = alpha / self.theta + 1.0;
        let v = sigma * sigma;
        let ln = shape * alpha.ln() - specfun::log_gamma(shape).expect("shape > 0")
            - (shape + 1.0) * v.ln()
            - alpha / v;
        2.0 * sigma * ln.exp()
    }
}

/// Simulated ensemble: per-path per-step return increments and variance.
#[derive(Debug, Clone, PartialEq)]
pub struct PathEnsemble {
    pub returns: Vec<Vec<f64>>,
    pub variance: Vec<Vec<f64>>,
}

impl PathEnsemble {
    /// Writes the ensemble as tab-delimited columns (path, step, x, v)
    /// with x the cumulative return along the path.
    pub fn write_columnar<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "path\tstep\tx\tv")?;
        for (p, (dxs, vs)) in self.returns.iter().zip(&self.variance).enumerate() {
            let mut x = 0.0;
            for (s, (&dx, &v)) in dxs.iter().zip(vs).enumerate() {
                x += dx;
                writeln!(w, "{p}\t{s}\t{x:.12e}\t{v:.12e}")?;
            }
        }
        Ok(())
    }
}

// Variance floor: keeps stored variance strictly positive when a
// discretization undershoot is clipped.
fn variance_floor(theta: f64) -> f64 {
    theta * 1e-12
}

fn run_path<V>(config: &SdeConfig, path: usize, mut visit: V) -> Result<()>
where
    V: FnMut(usize, f64, f64),
{
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    rng.set_stream(path as u64 + 1);
    let sqrt_dt = config.dt.sqrt();
    let floor = variance_floor(config.theta);
    let mut v = config.initial_variance.max(floor);
    for step in 0..config.n_steps {
        let z1: f64 = StandardNormal.sample(&mut rng);
        let z2: f64 = StandardNormal.sample(&mut rng);
        let dx = (v * config.dt).sqrt() * z1;
        let vp = v.max(0.0);
        let proposal = v - config.gamma * (vp - config.theta) * config.dt
            + config.kappa * vp * sqrt_dt * z2;
        let vn = match config.positivity_scheme {
            PositivityScheme::FullTruncation => proposal.max(floor),
            PositivityScheme::Reflection => proposal.abs().max(floor),
        };
        if !vn.is_finite() || !dx.is_finite() {
            return Err(Error::PathExploded { path, step });
        }
        visit(step, dx, vn);
        v = vn;
    }
    Ok(())
}

/// Simulates the full ensemble, storing every step of every path.
pub fn simulate(config: &SdeConfig) -> Result<PathEnsemble> {
    let per_path = par_map_collect(config.n_paths, |p| {
        let mut dxs = Vec::with_capacity(config.n_steps);
        let mut vs = Vec::with_capacity(config.n_steps);
        run_path(config, p, |_, dx, v| {
            dxs.push(dx);
            vs.push(v);
        })
        .map(|_| (dxs, vs))
    });
    let mut returns = Vec::with_capacity(config.n_paths);
    let mut variance = Vec::with_capacity(config.n_paths);
    for r in per_path {
        let (dxs, vs) = r?;
        returns.push(dxs);
        variance.push(vs);
    }
    Ok(PathEnsemble { returns, variance })
}

/// Post-burn-in variance values, thinned to one per `thinning` steps and
/// pooled across paths (path order, then step order).
pub fn stationary_variance_sample(config: &SdeConfig, thinning: usize) -> Result<Vec<f64>> {
    if thinning == 0 {
        return Err(Error::Domain("thinning must be at least 1".into()));
    }
    let per_path = par_map_collect(config.n_paths, |p| {
        let mut out = Vec::new();
        run_path(config, p, |step, _, v| {
            if step >= config.burn_in && (step - config.burn_in) % thinning == 0 {
                out.push(v);
            }
        })
        .map(|_| out)
    });
    let mut pooled = Vec::new();
    for r in per_path {
        pooled.extend(r?);
    }
    Ok(pooled)
}

/// Non-overlapping sums of dx over `tau_days`, post burn-in, pooled
/// across paths.
pub fn accumulated_returns(config: &SdeConfig, tau_days: usize) -> Result<Vec<f64>> {
    if tau_days == 0 {
        return Err(Error::Domain("tau_days must be at least 1".into()));
    }
    let steps_per_day = (1.0 / config.dt).round() as usize;
    let chunk = tau_days * steps_per_day.max(1);
    let available = config.n_steps - config.burn_in;
    if available < chunk {
        return Err(Error::InvalidInput(format!(
            "need at least {chunk} post-burn-in steps for tau = {tau_days} days, have {available}"
        )));
    }
    let per_path = par_map_collect(config.n_paths, |p| {
        let mut sums = Vec::with_capacity(available / chunk);
        let mut acc = 0.0;
        let mut in_chunk = 0usize;
        run_path(config, p, |step, dx, _| {
            if step >= config.burn_in {
                acc += dx;
                in_chunk += 1;
                if in_chunk == chunk {
                    sums.push(acc);
                    acc = 0.0;
                    in_chunk = 0;
                }
            }
        })
        .map(|_| sums)
    });
    let mut pooled = Vec::new();
    for r in per_path {
        pooled.extend(r?);
    }
    Ok(pooled)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gof;

    fn base_config() -> SdeConfig {
        SdeConfig::with_target_alpha(
            0.05,
            1.407e-4,
            7.347e-5,
            0.01,
            60_000,
            40_000,
            8,
            1234,
            PositivityScheme::FullTruncation,
        )
        .unwrap()
    }

    #[test]
    fn config_validates() {
        assert!(SdeConfig::new(0.0, 1.0, 1.0, 0.01, 10, 0, 1, 0, PositivityScheme::Reflection).is_err());
        assert!(SdeConfig::new(0.1, 1.0, 1.0, 0.01, 10, 10, 1, 0, PositivityScheme::Reflection).is_err());
        assert!(SdeConfig::new(0.1, 1.0, 1.0, 0.01, 10, 2, 0, 0, PositivityScheme::Reflection).is_err());
        let c = base_config();
        assert!((c.alpha() - 7.347e-5).abs() < 1e-18);
    }

    #[test]
    fn seed_determinism_is_bitwise() {
        let c = SdeConfig::new(0.05, 1.4e-4, 0.4, 0.01, 500, 100, 4, 9, PositivityScheme::Reflection).unwrap();
        let a = simulate(&c).unwrap();
        let b = simulate(&c).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn variance_stays_positive_under_both_schemes() {
        for scheme in [PositivityScheme::FullTruncation, PositivityScheme::Reflection] {
            let c = SdeConfig::new(0.5, 1.4e-4, 1.5, 0.05, 4000, 0, 4, 3, scheme).unwrap();
            let e = simulate(&c).unwrap();
            assert!(e.variance.iter().flatten().all(|&v| v > 0.0));
            assert!(e.returns.iter().flatten().all(|v| v.is_finite()));
        }
    }

    #[test]
    fn small_kappa_relaxes_to_theta() {
        // Nearly deterministic relaxation from 5θ toward θ.
        let c = SdeConfig::new(0.2, 1.4e-4, 1e-6, 0.01, 4000, 0, 1, 5, PositivityScheme::FullTruncation)
            .unwrap()
            .with_initial_variance(7e-4);
        let e = simulate(&c).unwrap();
        let v = &e.variance[0];
        for w in v.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "not monotone decreasing");
        }
        assert!((v[v.len() - 1] - 1.4e-4).abs() < 1e-6);
    }

    #[test]
    fn long_run_variance_mean_is_theta() {
        let c = base_config();
        let vs = stationary_variance_sample(&c, 50).unwrap();
        let n = vs.len() as f64;
        let mean = vs.iter().sum::<f64>() / n;
        let sd = (vs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        // Correlated draws: allow 3 errors with a generous effective-n cut.
        let se = sd / (n / 40.0).sqrt();
        assert!((mean - c.theta).abs() < 3.0 * se, "mean {mean} vs theta {}", c.theta);
    }

    #[test]
    fn stationary_variance_matches_inverse_gamma() {
        let c = base_config();
        let mut vs = stationary_variance_sample(&c, 2000).unwrap();
        assert!(vs.len() > 50);
        let d = gof::ks_distance(&mut vs, |v| c.stationary_variance_cdf(v));
        assert!(d < 0.08, "KS distance {d} on {} samples", vs.len());
    }

    #[test]
    fn accumulated_returns_variance_grows_linearly() {
        let c = SdeConfig::with_target_alpha(
            0.05,
            1.407e-4,
            7.347e-5,
            0.01,
            240_000,
            40_000,
            12,
            77,
            PositivityScheme::FullTruncation,
        )
        .unwrap();
        let var_of = |xs: &[f64]| {
            let n = xs.len() as f64;
            let m = xs.iter().sum::<f64>() / n;
            xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n
        };
        let r1 = accumulated_returns(&c, 1).unwrap();
        let r4 = accumulated_returns(&c, 4).unwrap();
        let v1 = var_of(&r1);
        let v4 = var_of(&r4);
        assert!((v1 - c.theta).abs() / c.theta < 0.25, "v1 = {v1}");
        let ratio = v4 / v1;
        assert!((ratio - 4.0).abs() < 1.2, "ratio = {ratio}");
    }

    #[test]
    fn accumulated_returns_rejects_short_runs() {
        let c = SdeConfig::new(0.05, 1.4e-4, 0.4, 0.01, 150, 100, 1, 0, PositivityScheme::Reflection).unwrap();
        assert!(accumulated_returns(&c, 1).is_err());
    }

    #[test]
    fn daily_returns_are_sign_symmetric() {
        let c = SdeConfig::with_target_alpha(
            0.05,
            1.407e-4,
            7.347e-5,
            0.01,
            120_000,
            40_000,
            6,
            21,
            PositivityScheme::FullTruncation,
        )
        .unwrap();
        let xs = accumulated_returns(&c, 1).unwrap();
        let mut pos: Vec<f64> = xs.iter().map(|&x| x).collect();
        let mut neg: Vec<f64> = xs.iter().map(|&x| -x).collect();
        let p = gof::ks_two_sample(&mut pos, &mut neg);
        assert!(p > 0.01, "sign-flip KS p = {p}");
    }

    #[test]
    fn alpha_invariance_of_stationary_law() {
        // Same α through different (γ, κ); stationary samples agree.
        let mk = |gamma: f64, seed: u64| {
            SdeConfig::with_target_alpha(
                gamma,
                1.407e-4,
                7.347e-5,
                0.01,
                (40.0 / (gamma * 0.01)) as usize + 30_000,
                (20.0 / (gamma * 0.01)) as usize,
                8,
                seed,
                PositivityScheme::FullTruncation,
            )
            .unwrap()
        };
        let mut a = stationary_variance_sample(&mk(0.05, 1), 1500).unwrap();
        let mut b = stationary_variance_sample(&mk(0.10, 2), 800).unwrap();
        let p = gof::ks_two_sample(&mut a, &mut b);
        assert!(p > 0.01, "p = {p} ({} vs {} samples)", a.len(), b.len());
    }

    #[test]
    fn columnar_export_shape() {
        let c = SdeConfig::new(0.05, 1.4e-4, 0.4, 0.01, 10, 0, 2, 0, PositivityScheme::Reflection).unwrap();
        let e = simulate(&c).unwrap();
        let mut buf = Vec::new();
        e.write_columnar(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "path\tstep\tx\tv");
        assert_eq!(lines.len(), 1 + 2 * 10);
    }
}
