//! Maximum-likelihood fitting of the four return models.
//!
//! Optimization runs over unconstrained transforms (log of positive
//! parameters, identity for the location μ). The horizon τ is fixed to 1
//! and the half Student-t gain weight w_g is fixed to the empirical gain
//! fraction; neither is ever optimized. A Gaussian log-prior on the
//! transformed parameters can be added to get a MAP estimate instead.
//!
//! The likelihood surface has a ridge between θ and α, so fits run from
//! several method-of-moments starts; restarts are independent and the
//! winner is picked by a deterministic argmin.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::data;
use crate::distributions::{
    HalfStudentTParams, Mjf1Params, Mjf2Params, Model, StudentTParams,
};
use crate::exec::{chunked_sum, par_map_collect};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Optimizer {
    /// Derivative-free Nelder-Mead simplex (default).
    Simplex,
    /// BFGS with central finite-difference gradients.
    QuasiNewtonFiniteDifferences,
}

/// Independent Gaussian log-prior on the transformed parameter vector;
/// turns the fit into a MAP estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prior {
    pub mean: Vec<f64>,
    pub sd: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitConfig {
    pub model_id: String,
    /// Optional starting parameters by name; defaults to method-of-moments.
    pub initial: Option<BTreeMap<String, f64>>,
    pub optimizer: Optimizer,
    pub max_iterations: usize,
    /// Convergence tolerance on the log-likelihood change.
    pub tolerance: f64,
    pub restarts: usize,
    pub seed: u64,
    pub prior: Option<Prior>,
}

impl FitConfig {
    pub fn new(model_id: &str) -> Self {
        Self {
            model_id: model_id.to_string(),
            initial: None,
            optimizer: Optimizer::Simplex,
            max_iterations: 2000,
            tolerance: 1e-8,
            restarts: 8,
            seed: 0,
            prior: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::Domain("max_iterations must be at least 1".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::Domain(format!("tolerance must be positive, got {}", self.tolerance)));
        }
        if self.restarts == 0 {
            return Err(Error::Domain("restarts must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: Model,
    pub log_likelihood: f64,
    pub converged: bool,
    pub iterations: usize,
    pub restarts_used: usize,
    pub n_observations: usize,
    pub condition_notes: String,
}

/// One row of the model-comparison table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub model_id: String,
    pub log_likelihood: f64,
    pub n_params: usize,
    pub aic: f64,
}

/// −Σ log f(x_i) for the given model. Fails naming the first data point
/// whose log-density is non-finite.
pub fn neg_log_likelihood(model: &Model, increments: &[f64]) -> Result<f64> {
    if increments.is_empty() {
        return Err(Error::InvalidInput("empty dataset".into()));
    }
    let lp = model.log_pdf_fn();
    let total = chunked_sum(increments, |x| lp(x));
    if total.is_finite() {
        return Ok(-total);
    }
    for (i, &x) in increments.iter().enumerate() {
        if !lp(x).is_finite() {
            return Err(Error::NonFiniteLikelihood { index: i, x });
        }
    }
    Err(Error::InvalidInput("non-finite likelihood sum".into()))
}

// Unconstrained parameterization of one model family. Positive
// parameters live in log-space; μ is passed through unchanged.
struct ParamSpace {
    model_id: String,
    // Fixed from data, only used by half-student.
    w_g: f64,
    // Identity-transform coordinates (μ); everything else is log.
    identity: Vec<bool>,
}

impl ParamSpace {
    fn new(model_id: &str, w_g: f64) -> Result<Self> {
        let identity = match model_id {
            "student" => vec![false, false],
            "half-student" => vec![false, false, false, false],
            "mjf1" => vec![false, false, false, true],
            "mjf2" => vec![false, false, false, false, true],
            other => return Err(Error::InvalidInput(format!("unknown model id '{other}'"))),
        };
        Ok(Self { model_id: model_id.to_string(), w_g, identity })
    }

    fn dim(&self) -> usize {
        self.identity.len()
    }

    fn to_vec(&self, model: &Model) -> Vec<f64> {
        match model {
            Model::StudentT(p) => vec![p.theta.ln(), p.alpha.ln()],
            Model::HalfStudentT(p) => {
                vec![p.theta_g.ln(), p.theta_l.ln(), p.alpha_g.ln(), p.alpha_l.ln()]
            }
            Model::Mjf1(p) => vec![p.theta.ln(), p.alpha_g.ln(), p.alpha_l.ln(), p.mu],
            Model::Mjf2(p) => {
                vec![p.theta_g.ln(), p.theta_l.ln(), p.alpha_g.ln(), p.alpha_l.ln(), p.mu]
            }
        }
    }

    fn from_vec(&self, z: &[f64]) -> Result<Model> {
        let tau = 1.0;
        match self.model_id.as_str() {
            "student" => Ok(Model::StudentT(StudentTParams::new(z[0].exp(), z[1].exp(), tau)?)),
            "half-student" => Ok(Model::HalfStudentT(HalfStudentTParams::new(
                z[0].exp(),
                z[1].exp(),
                z[2].exp(),
                z[3].exp(),
                self.w_g,
                tau,
            )?)),
            "mjf1" => Ok(Model::Mjf1(Mjf1Params::new(
                z[0].exp(),
                z[1].exp(),
                z[2].exp(),
                z[3],
                tau,
            )?)),
            "mjf2" => Ok(Model::Mjf2(Mjf2Params::new(
                z[0].exp(),
                z[1].exp(),
                z[2].exp(),
                z[3].exp(),
                z[4],
                tau,
            )?)),
            other => Err(Error::InvalidInput(format!("unknown model id '{other}'"))),
        }
    }
}

// Method-of-moments starting model: θ from sample variances, the shape
// ratio α/θ from excess kurtosis, μ from the median.
fn moments_initial(space: &ParamSpace, xs: &[f64], stats: &data::EmpiricalStats) -> Result<Model> {
    let n = xs.len() as f64;
    let m4 = chunked_sum(xs, |x| (x - stats.m1).powi(4)) / n;
    let excess = (m4 / (stats.m2 * stats.m2) - 3.0).max(0.3);
    let nu = (4.0 + 6.0 / excess).clamp(4.3, 30.0);
    let ratio = 0.5 * nu - 1.5;
    let side_scale = |gains: bool| {
        let (s, c) = xs.iter().fold((0.0, 0usize), |(s, c), &x| {
            if (x >= 0.0) == gains {
                (s + x * x, c + 1)
            } else {
                (s, c)
            }
        });
        if c > 0 {
            s / c as f64
        } else {
            stats.m2
        }
    };
    let tau = 1.0;
    match space.model_id.as_str() {
        "student" => Ok(Model::StudentT(StudentTParams::new(stats.m2, ratio * stats.m2, tau)?)),
        "half-student" => {
            let tg = side_scale(true);
            let tl = side_scale(false);
            Ok(Model::HalfStudentT(HalfStudentTParams::new(
                tg,
                tl,
                ratio * tg,
                ratio * tl,
                space.w_g,
                tau,
            )?))
        }
        "mjf1" => Ok(Model::Mjf1(Mjf1Params::new(
            stats.m2,
            ratio * stats.m2,
            ratio * stats.m2,
            stats.median,
            tau,
        )?)),
        "mjf2" => {
            let tg = side_scale(true);
            let tl = side_scale(false);
            Ok(Model::Mjf2(Mjf2Params::new(
                tg,
                tl,
                ratio * tg,
                ratio * tl,
                stats.median,
                tau,
            )?))
        }
        other => Err(Error::InvalidInput(format!("unknown model id '{other}'"))),
    }
}

struct OptOutcome {
    z: Vec<f64>,
    value: f64,
    iterations: usize,
    converged: bool,
}

fn nelder_mead<F: Fn(&[f64]) -> f64>(
    f: &F,
    start: &[f64],
    steps: &[f64],
    max_iterations: usize,
    tolerance: f64,
) -> OptOutcome {
    let d = start.len();
    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    simplex.push((start.to_vec(), f(start)));
    for i in 0..d {
        let mut v = start.to_vec();
        v[i] += steps[i];
        let fv = f(&v);
        simplex.push((v, fv));
    }
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        iterations += 1;
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let best = simplex[0].1;
        let worst = simplex[d].1;
        if (worst - best).abs() < tolerance && best.is_finite() {
            converged = true;
            break;
        }
        let mut centroid = vec![0.0; d];
        for (v, _) in &simplex[..d] {
            for (c, &vi) in centroid.iter_mut().zip(v) {
                *c += vi / d as f64;
            }
        }
        let lerp = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[d].0)
                .map(|(&c, &w)| c + t * (c - w))
                .collect()
        };
        let reflected = lerp(1.0);
        let fr = f(&reflected);
        if fr < simplex[0].1 {
            let expanded = lerp(2.0);
            let fe = f(&expanded);
            simplex[d] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
        } else if fr < simplex[d - 1].1 {
            simplex[d] = (reflected, fr);
        } else {
            let contracted = if fr < simplex[d].1 { lerp(0.5) } else { lerp(-0.5) };
            let fc = f(&contracted);
            if fc < simplex[d].1.min(fr) {
                simplex[d] = (contracted, fc);
            } else {
                // Shrink toward the best vertex.
                let anchor = simplex[0].0.clone();
                for (v, fv) in &mut simplex[1..] {
                    for (vi, &ai) in v.iter_mut().zip(&anchor) {
                        *vi = ai + 0.5 * (*vi - ai);
                    }
                    *fv = f(v);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    OptOutcome {
        z: simplex[0].0.clone(),
        value: simplex[0].1,
        iterations,
        converged,
    }
}

fn gradient<F: Fn(&[f64]) -> f64>(f: &F, z: &[f64]) -> Option<Vec<f64>> {
    let mut g = vec![0.0; z.len()];
    for i in 0..z.len() {
        let h = 1e-5 * z[i].abs().max(1.0);
        let mut zp = z.to_vec();
        let mut zm = z.to_vec();
        zp[i] += h;
        zm[i] -= h;
        let d = (f(&zp) - f(&zm)) / (2.0 * h);
        if !d.is_finite() {
            return None;
        }
        g[i] = d;
    }
    Some(g)
}

fn bfgs<F: Fn(&[f64]) -> f64>(
    f: &F,
    start: &[f64],
    max_iterations: usize,
    tolerance: f64,
) -> OptOutcome {
    let d = start.len();
    let mut z = start.to_vec();
    let mut fz = f(&z);
    let mut h_inv: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut g = match gradient(f, &z) {
        Some(g) => g,
        None => return OptOutcome { z, value: fz, iterations: 0, converged: false },
    };
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iterations {
        iterations += 1;
        let mut dir: Vec<f64> = (0..d)
            .map(|i| -(0..d).map(|j| h_inv[i][j] * g[j]).sum::<f64>())
            .collect();
        let slope: f64 = dir.iter().zip(&g).map(|(d, g)| d * g).sum();
        if slope >= 0.0 {
            // Reset to steepest descent if the approximation degenerates.
            dir = g.iter().map(|&gi| -gi).collect();
            for (i, row) in h_inv.iter_mut().enumerate() {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = if i == j { 1.0 } else { 0.0 };
                }
            }
        }
        // Backtracking Armijo line search.
        let slope: f64 = dir.iter().zip(&g).map(|(d, g)| d * g).sum();
        let mut t = 1.0;
        let mut z_new = z.clone();
        let mut f_new = f64::INFINITY;
        for _ in 0..60 {
            for (zi, (&z0, &di)) in z_new.iter_mut().zip(z.iter().zip(&dir)) {
                *zi = z0 + t * di;
            }
            f_new = f(&z_new);
            if f_new <= fz + 1e-4 * t * slope {
                break;
            }
            t *= 0.5;
        }
        if !f_new.is_finite() || f_new >= fz {
            converged = (fz).is_finite();
            break;
        }
        let g_new = match gradient(f, &z_new) {
            Some(g) => g,
            None => break,
        };
        let s: Vec<f64> = z_new.iter().zip(&z).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-12 {
            // Standard BFGS inverse-Hessian update.
            let rho = 1.0 / sy;
            let hy: Vec<f64> = (0..d)
                .map(|i| (0..d).map(|j| h_inv[i][j] * y[j]).sum::<f64>())
                .collect();
            let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
            for i in 0..d {
                for j in 0..d {
                    h_inv[i][j] += (1.0 + rho * yhy) * rho * s[i] * s[j]
                        - rho * (s[i] * hy[j] + hy[i] * s[j]);
                }
            }
        }
        let improved = fz - f_new;
        z = z_new;
        fz = f_new;
        g = g_new;
        if improved < tolerance {
            converged = true;
            break;
        }
    }
    OptOutcome { z, value: fz, iterations, converged }
}

/// Fits one model by (penalized) maximum likelihood with multi-start.
pub fn fit_mle(config: &FitConfig, increments: &[f64]) -> Result<FitResult> {
    config.validate()?;
    let n = increments.len();
    if n < 100 {
        return Err(Error::InvalidInput(format!("need at least 100 increments to fit, got {n}")));
    }
    if increments.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("non-finite increment".into()));
    }
    let stats = data::empirical_stats(increments)?;
    if increments.iter().all(|&x| x == increments[0]) {
        return Err(Error::InvalidInput("degenerate data: all increments equal".into()));
    }
    if config.model_id == "half-student" && (stats.n_gains == 0 || stats.n_losses == 0) {
        return Err(Error::InvalidInput(
            "half-student requires both gains and losses in the data".into(),
        ));
    }
    let space = ParamSpace::new(&config.model_id, stats.w_g)?;
    if let Some(prior) = &config.prior {
        if prior.mean.len() != space.dim() || prior.sd.len() != space.dim() {
            return Err(Error::InvalidInput(format!(
                "prior dimension mismatch: model has {} free parameters",
                space.dim()
            )));
        }
        if prior.sd.iter().any(|&s| !(s > 0.0)) {
            return Err(Error::Domain("prior sd entries must be positive".into()));
        }
    }

    let z0 = match &config.initial {
        Some(kv) => space.to_vec(&Model::from_key_values(&config.model_id, kv)?),
        None => space.to_vec(&moments_initial(&space, increments, &stats)?),
    };
    let mu_jitter_scale = stats.m2.sqrt();
    let prior = config.prior.clone();
    let objective = |z: &[f64]| -> f64 {
        let model = match space.from_vec(z) {
            Ok(m) => m,
            Err(_) => return f64::INFINITY,
        };
        let mut value = match neg_log_likelihood(&model, increments) {
            Ok(v) => v,
            Err(_) => return f64::INFINITY,
        };
        if let Some(p) = &prior {
            for ((&zi, &m), &s) in z.iter().zip(&p.mean).zip(&p.sd) {
                value += 0.5 * ((zi - m) / s).powi(2);
            }
        }
        value
    };

    let outcomes = par_map_collect(config.restarts, |r| {
        let mut start = z0.clone();
        if r > 0 {
            let mut rng = ChaCha12Rng::seed_from_u64(config.seed.wrapping_add(r as u64));
            for (zi, &ident) in start.iter_mut().zip(&space.identity) {
                let u: f64 = rng.gen_range(-0.7..0.7);
                *zi += if ident { u * mu_jitter_scale } else { u };
            }
        }
        let steps: Vec<f64> = space
            .identity
            .iter()
            .map(|&ident| if ident { 0.5 * mu_jitter_scale } else { 0.25 })
            .collect();
        match config.optimizer {
            Optimizer::Simplex => {
                nelder_mead(&objective, &start, &steps, config.max_iterations, config.tolerance)
            }
            Optimizer::QuasiNewtonFiniteDifferences => {
                bfgs(&objective, &start, config.max_iterations, config.tolerance)
            }
        }
    });

    let best_idx = outcomes
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.value.partial_cmp(&b.1.value).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(i, _)| i)
        .expect("restarts >= 1");
    let best = &outcomes[best_idx];
    let model = space.from_vec(&best.z)?;
    let log_likelihood = -neg_log_likelihood(&model, increments)?;
    if !outcomes.iter().any(|o| o.converged) {
        return Err(Error::OptimizationFailed(format!(
            "no restart converged for {}; best-so-far log-likelihood {log_likelihood} at {:?}",
            config.model_id,
            model.to_key_values(),
        )));
    }
    let mut notes = vec![format!("optimizer: {:?}", config.optimizer), "tau fixed to 1".to_string()];
    if config.model_id == "half-student" {
        notes.push(format!("w_g fixed to empirical gain fraction {:.6}", stats.w_g));
    }
    if config.prior.is_some() {
        notes.push("Gaussian prior penalty applied (MAP)".to_string());
    }
    Ok(FitResult {
        model,
        log_likelihood,
        converged: best.converged,
        iterations: best.iterations,
        restarts_used: config.restarts,
        n_observations: n,
        condition_notes: notes.join("; "),
    })
}

/// Number of parameters optimized for a model id (τ and w_g excluded).
pub fn free_param_count(model_id: &str) -> usize {
    match model_id {
        "student" => 2,
        "half-student" => 4,
        "mjf1" => 4,
        "mjf2" => 5,
        _ => 0,
    }
}

/// Akaike comparison table, sorted ascending by AIC (stable: ties keep
/// input order). All results must come from the same dataset.
pub fn model_comparison(results: &[FitResult]) -> Result<Vec<ComparisonRow>> {
    if results.is_empty() {
        return Err(Error::InvalidInput("no fit results to compare".into()));
    }
    let n = results[0].n_observations;
    if results.iter().any(|r| r.n_observations != n) {
        return Err(Error::InvalidInput(
            "fit results come from datasets of different sizes".into(),
        ));
    }
    let mut rows: Vec<ComparisonRow> = results
        .iter()
        .map(|r| {
            let k = free_param_count(r.model.id());
            ComparisonRow {
                model_id: r.model.id().to_string(),
                log_likelihood: r.log_likelihood,
                n_params: k,
                aic: 2.0 * k as f64 - 2.0 * r.log_likelihood,
            }
        })
        .collect();
    rows.sort_by(|a, b| a.aic.partial_cmp(&b.aic).unwrap_or(std::cmp::Ordering::Equal));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::reference;

    #[test]
    fn nll_is_additive_under_duplication() {
        let model = Model::StudentT(reference::student_t());
        let xs = model.sample(500, 1);
        let once = neg_log_likelihood(&model, &xs).unwrap();
        let mut twice_data = xs.clone();
        twice_data.extend_from_slice(&xs);
        let twice = neg_log_likelihood(&model, &twice_data).unwrap();
        assert!((twice - 2.0 * once).abs() < 1e-8 * once.abs());
    }

    #[test]
    fn nll_single_point_at_mode_is_log_prefactor() {
        let model = Model::StudentT(reference::student_t());
        let v = neg_log_likelihood(&model, &[0.0]).unwrap();
        assert!((v + model.log_pdf(0.0)).abs() < 1e-12);
    }

    #[test]
    fn mjf1_with_equal_shapes_matches_student_objective() {
        let p = reference::student_t();
        let student = Model::StudentT(p);
        let mjf = Model::Mjf1(Mjf1Params::new(p.theta, p.alpha, p.alpha, 0.0, p.tau).unwrap());
        let xs = student.sample(2000, 3);
        let a = neg_log_likelihood(&student, &xs).unwrap();
        let b = neg_log_likelihood(&mjf, &xs).unwrap();
        assert!((a - b).abs() < 1e-7 * a.abs(), "{a} vs {b}");
    }

    #[test]
    fn transforms_roundtrip_and_stay_positive() {
        let space = ParamSpace::new("mjf2", 0.5).unwrap();
        let m = Model::Mjf2(reference::mjf2());
        let z = space.to_vec(&m);
        let back = space.from_vec(&z).unwrap();
        for ((ka, va), (kb, vb)) in m.to_key_values().iter().zip(back.to_key_values().iter()) {
            assert_eq!(ka, kb);
            assert!((va - vb).abs() <= 1e-12 * va.abs(), "{ka}: {va} vs {vb}");
        }
        // Arbitrary finite z always maps to valid parameters.
        for z in [vec![-30.0, 4.0, -9.5, 0.0, -0.3], vec![2.0, 2.0, 2.0, 2.0, 5.0]] {
            assert!(space.from_vec(&z).is_ok());
        }
    }

    #[test]
    fn recovers_student_parameters() {
        let truth = reference::student_t();
        let xs = Model::StudentT(truth).sample(100_000, 17);
        let mut config = FitConfig::new("student");
        config.restarts = 3;
        config.max_iterations = 600;
        let fit = fit_mle(&config, &xs).unwrap();
        let Model::StudentT(p) = fit.model else { panic!("wrong model") };
        assert!(fit.converged);
        assert!(
            (p.theta - truth.theta).abs() / truth.theta < 0.02,
            "theta {} vs {}",
            p.theta,
            truth.theta
        );
        assert!(
            (p.alpha - truth.alpha).abs() / truth.alpha < 0.10,
            "alpha {} vs {}",
            p.alpha,
            truth.alpha
        );
    }

    #[test]
    fn recovers_mjf1_parameters() {
        let truth = reference::mjf1();
        let xs = Model::Mjf1(truth).sample(100_000, 23);
        let mut config = FitConfig::new("mjf1");
        config.restarts = 3;
        config.max_iterations = 900;
        let fit = fit_mle(&config, &xs).unwrap();
        let Model::Mjf1(p) = fit.model else { panic!("wrong model") };
        let rg_t = truth.alpha_g / truth.theta;
        let rl_t = truth.alpha_l / truth.theta;
        let rg = p.alpha_g / p.theta;
        let rl = p.alpha_l / p.theta;
        assert!((rg - rg_t).abs() / rg_t < 0.05, "alpha_g/theta {rg} vs {rg_t}");
        assert!((rl - rl_t).abs() / rl_t < 0.05, "alpha_l/theta {rl} vs {rl_t}");
        assert!((p.mu - truth.mu).abs() < 2e-4, "mu {} vs {}", p.mu, truth.mu);
    }

    #[test]
    fn constant_data_is_rejected() {
        let xs = vec![0.01; 500];
        let config = FitConfig::new("student");
        assert!(fit_mle(&config, &xs).is_err());
    }

    #[test]
    fn fit_is_deterministic() {
        let xs = Model::StudentT(reference::student_t()).sample(5000, 9);
        let mut config = FitConfig::new("student");
        config.restarts = 2;
        config.max_iterations = 300;
        let a = fit_mle(&config, &xs).unwrap();
        let b = fit_mle(&config, &xs).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fit_is_permutation_stable() {
        let xs = Model::StudentT(reference::student_t()).sample(20_000, 31);
        let mut shuffled = xs.clone();
        shuffled.reverse();
        let mut config = FitConfig::new("student");
        config.restarts = 2;
        config.max_iterations = 500;
        let a = fit_mle(&config, &xs).unwrap();
        let b = fit_mle(&config, &shuffled).unwrap();
        let (Model::StudentT(pa), Model::StudentT(pb)) = (a.model, b.model) else {
            panic!("wrong model")
        };
        assert!((pa.theta - pb.theta).abs() / pa.theta < 1e-3);
        assert!((pa.alpha - pb.alpha).abs() / pa.alpha < 1e-2);
    }

    #[test]
    fn optimizers_agree() {
        let xs = Model::StudentT(reference::student_t()).sample(20_000, 13);
        let mut simplex = FitConfig::new("student");
        simplex.restarts = 2;
        simplex.max_iterations = 600;
        let mut quasi = simplex.clone();
        quasi.optimizer = Optimizer::QuasiNewtonFiniteDifferences;
        let a = fit_mle(&simplex, &xs).unwrap();
        let b = fit_mle(&quasi, &xs).unwrap();
        assert!(
            (a.log_likelihood - b.log_likelihood).abs() < 1e-2,
            "{} vs {}",
            a.log_likelihood,
            b.log_likelihood
        );
    }

    #[test]
    fn nesting_richer_model_fits_no_worse() {
        let xs = Model::Mjf1(reference::mjf1()).sample(30_000, 41);
        let mut cs = FitConfig::new("student");
        cs.restarts = 2;
        cs.max_iterations = 600;
        let mut cm = FitConfig::new("mjf1");
        cm.restarts = 2;
        cm.max_iterations = 900;
        let s = fit_mle(&cs, &xs).unwrap();
        let m = fit_mle(&cm, &xs).unwrap();
        assert!(m.log_likelihood >= s.log_likelihood - 1e-3, "{} vs {}", m.log_likelihood, s.log_likelihood);
        let table = model_comparison(&[s.clone(), m.clone()]).unwrap();
        assert_eq!(table[0].model_id, "mjf1");
        assert!(table[0].aic <= table[1].aic);
    }

    #[test]
    fn comparison_rejects_mismatched_datasets() {
        let xs = Model::StudentT(reference::student_t()).sample(3000, 2);
        let ys = Model::StudentT(reference::student_t()).sample(4000, 2);
        let mut config = FitConfig::new("student");
        config.restarts = 1;
        config.max_iterations = 300;
        let a = fit_mle(&config, &xs).unwrap();
        let b = fit_mle(&config, &ys).unwrap();
        assert!(model_comparison(&[a, b]).is_err());
    }

    #[test]
    fn comparison_sort_is_stable_for_ties() {
        let xs = Model::StudentT(reference::student_t()).sample(3000, 2);
        let mut config = FitConfig::new("student");
        config.restarts = 1;
        config.max_iterations = 300;
        let a = fit_mle(&config, &xs).unwrap();
        let rows = model_comparison(&[a.clone(), a]).unwrap();
        assert_eq!(rows[0], rows[1]);
    }

    #[test]
    fn prior_pulls_estimate_toward_prior_mean() {
        let xs = Model::StudentT(reference::student_t()).sample(2000, 5);
        let mut plain = FitConfig::new("student");
        plain.restarts = 1;
        plain.max_iterations = 400;
        let free = fit_mle(&plain, &xs).unwrap();
        let Model::StudentT(pf) = free.model else { panic!() };
        // Tight prior centered well above the MLE in log-theta.
        let target = (pf.theta * 4.0).ln();
        let mut map = plain.clone();
        map.prior = Some(Prior { mean: vec![target, pf.alpha.ln()], sd: vec![0.01, 10.0] });
        let fit = fit_mle(&map, &xs).unwrap();
        let Model::StudentT(pm) = fit.model else { panic!() };
        assert!(pm.theta > 2.0 * pf.theta, "{} vs {}", pm.theta, pf.theta);
    }
}
