//! End-to-end acceptance checks. Each numbered criterion prints one
//! pass/fail line; the test fails if any criterion fails. Criterion 10
//! needs a user-supplied S&P500 daily close CSV and is skipped unless
//! the SP500_CSV environment variable points at one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use heavytails::data::{self, Side};
use heavytails::distributions::{reference, Mjf1Params, Mjf2Params, Model, StudentTParams};
use heavytails::fit::{self, FitConfig};
use heavytails::sde::{self, PositivityScheme, SdeConfig};
use heavytails::specfun;
use heavytails::tails;
use heavytails::{gof, par_map_collect};

type CriterionResult = Result<String, String>;

fn mean_and_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / n;
    (m, v.sqrt())
}

// 1. Closed-form tail exponents against the published table.
fn criterion_1() -> CriterionResult {
    let cases = [
        (Model::StudentT(reference::student_t()), -3.04, -3.04),
        (Model::Mjf1(reference::mjf1()), -3.12, -2.90),
    ];
    for (m, eg, el) in cases {
        let (tg, tl) = m.tail_exponents();
        if (tg - eg).abs() > 0.01 || (tl - el).abs() > 0.01 {
            return Err(format!("{}: ({tg:.4}, {tl:.4}) vs ({eg}, {el})", m.id()));
        }
    }
    Ok("tail exponents (-3.04, -3.04) and (-3.12, -2.90) within ±0.01".into())
}

// 2. Student-t closed-form variance at reference parameters.
fn criterion_2() -> CriterionResult {
    let v = Model::StudentT(reference::student_t()).variance_closed_form();
    if (v - 1.407e-4).abs() < 5e-7 {
        Ok(format!("Student-t closed-form variance {v:.4e} matches 1.41e-4"))
    } else {
        Err(format!("variance {v:.6e} vs 1.407e-4"))
    }
}

fn pdf_integral(m: &Model) -> Result<f64, String> {
    let sc = m.scale();
    let loc = m.location();
    specfun::integrate(|t| m.pdf(loc + sc * t) * sc, f64::NEG_INFINITY, f64::INFINITY, 1e-10)
        .map(|r| r.value)
        .map_err(|e| e.to_string())
}

// 3. Normalization at reference parameters and on a random grid.
fn criterion_3() -> CriterionResult {
    let mut models = reference::all_models();
    let mut rng = ChaCha12Rng::seed_from_u64(99);
    let mut logu = |lo: f64, hi: f64| -> f64 {
        let u: f64 = rng.gen();
        (lo.ln() + u * (hi.ln() - lo.ln())).exp()
    };
    for i in 0..20 {
        let theta = logu(1e-5, 1e-3);
        let alpha = logu(1e-5, 1e-3);
        let alpha2 = logu(1e-5, 1e-3);
        let theta2 = logu(1e-5, 1e-3);
        let mu = logu(1e-5, 1e-2) - 5e-3;
        models.push(match i % 4 {
            0 => Model::StudentT(StudentTParams::new(theta, alpha, 1.0).unwrap()),
            1 => Model::HalfStudentT(
                heavytails::distributions::HalfStudentTParams::new(
                    theta, theta2, alpha, alpha2, 0.4, 1.0,
                )
                .unwrap(),
            ),
            2 => Model::Mjf1(Mjf1Params::new(theta, alpha, alpha2, mu, 1.0).unwrap()),
            _ => Model::Mjf2(Mjf2Params::new(theta, theta2, alpha, alpha2, mu, 1.0).unwrap()),
        });
    }
    for m in &models {
        let total = pdf_integral(m)?;
        if (total - 1.0).abs() > 1e-8 {
            return Err(format!("{}: integral {total}", m.id()));
        }
    }
    Ok("pdf integrates to 1 within 1e-8 for all reference and 20 random parameter sets".into())
}

// 4. Nested reductions match the Student-t pointwise.
fn criterion_4() -> CriterionResult {
    let p = reference::student_t();
    let student = Model::StudentT(p);
    let reductions = [
        Model::Mjf1(Mjf1Params::new(p.theta, p.alpha, p.alpha, 0.0, p.tau).unwrap()),
        Model::Mjf2(
            Mjf2Params::new(p.theta, p.theta, p.alpha, p.alpha, 0.0, p.tau).unwrap(),
        ),
    ];
    let sc = student.scale();
    for red in &reductions {
        for i in 0..1000 {
            let x = (-8.0 + 16.0 * i as f64 / 999.0) * sc;
            let dp = (red.pdf(x) - student.pdf(x)).abs();
            let dc = (red.cdf_gains(x) - student.cdf_gains(x)).abs();
            if dp > 1e-12 / sc || dc > 1e-12 {
                return Err(format!("{} at x = {x}: pdf gap {dp:.2e}, cdf gap {dc:.2e}", red.id()));
            }
        }
    }
    Ok("mJF1 and mJF2 reductions match Student-t pdf/cdf on a 1000-point grid".into())
}

// 5. Numeric moments vs Monte-Carlo, mode is a local max, reconcile emitted.
fn criterion_5() -> CriterionResult {
    let n = 10_000_000usize;
    for m in reference::all_models() {
        let xs = m.sample(n, 51);
        let (mc_mean, sd) = mean_and_sd(&xs);
        let mean = m.mean_numeric().map_err(|e| e.to_string())?;
        let se_mean = sd / (n as f64).sqrt();
        if (mean - mc_mean).abs() > 3.0 * se_mean {
            return Err(format!(
                "{} mean: numeric {mean:.6e} vs MC {mc_mean:.6e} (3se = {:.2e})",
                m.id(),
                3.0 * se_mean
            ));
        }
        let var = m.variance_numeric().map_err(|e| e.to_string())?;
        let sq: Vec<f64> = xs.iter().map(|&x| (x - mc_mean) * (x - mc_mean)).collect();
        let (mc_var, sd_sq) = mean_and_sd(&sq);
        let se_var = sd_sq / (n as f64).sqrt();
        if (var - mc_var).abs() > 3.0 * se_var {
            return Err(format!(
                "{} variance: numeric {var:.6e} vs MC {mc_var:.6e} (3se = {:.2e})",
                m.id(),
                3.0 * se_var
            ));
        }
        let mode = m.mode_numeric();
        let delta = 1e-4 * m.scale();
        if m.pdf(mode) < m.pdf(mode - delta) || m.pdf(mode) < m.pdf(mode + delta) {
            return Err(format!("{} mode {mode:.6e} is not a local maximum", m.id()));
        }
        // Discrepancy report: recorded for the skewed families, where the
        // printed closed-form means/modes disagree with quadrature.
        for e in m.reconcile().map_err(|e| e.to_string())? {
            println!(
                "    reconcile {} / {}: closed {:.6e}, numeric {:.6e}, gap {:.2e}",
                e.model, e.quantity, e.closed_form_value, e.numeric_value, e.relative_gap
            );
        }
    }
    Ok("numeric moments within 3 MC standard errors at 1e7 samples; modes verified".into())
}

// 6. SDE generative chain: stationary law, daily returns, tau scaling.
fn criterion_6() -> CriterionResult {
    let theta = 1.407e-4;
    let alpha = 7.347e-5;
    let config = SdeConfig::with_target_alpha(
        0.05,
        theta,
        alpha,
        0.01,
        40_000 + 3_200_000,
        40_000,
        32,
        7,
        PositivityScheme::FullTruncation,
    )
    .map_err(|e| e.to_string())?;
    let mut vs = sde::stationary_variance_sample(&config, 1000).map_err(|e| e.to_string())?;
    let n_v = vs.len();
    let ks = gof::ks_distance(&mut vs, |v| config.stationary_variance_cdf(v));
    if ks >= 0.01 {
        return Err(format!("stationary variance KS distance {ks:.4} at {n_v} samples"));
    }
    let student = Model::StudentT(StudentTParams::new(theta, alpha, 1.0).unwrap());
    let r1 = sde::accumulated_returns(&config, 1).map_err(|e| e.to_string())?;
    let v1 = mean_and_sd(&r1).1.powi(2);
    // The variance process decorrelates over 1/gamma = 20 days, so daily
    // returns are dependent and the KS null distribution does not apply to
    // the full stream. Thin to one return per 100 days before testing.
    let mut thinned: Vec<f64> = r1.iter().copied().step_by(100).collect();
    let p = gof::ks_test(&mut thinned, |x| student.cdf_gains(x));
    if p <= 0.01 {
        return Err(format!(
            "daily returns KS p = {p:.4} vs Student-t at {} thinned samples",
            thinned.len()
        ));
    }
    let r4 = sde::accumulated_returns(&config, 4).map_err(|e| e.to_string())?;
    let v4 = mean_and_sd(&r4).1.powi(2);
    let ratio = v4 / v1;
    if (ratio - 4.0).abs() > 0.5 {
        return Err(format!("variance ratio tau=4 vs tau=1: {ratio:.3}"));
    }
    Ok(format!(
        "stationary KS {ks:.4} ({n_v} samples), daily-return KS p = {p:.3}, tau scaling {ratio:.2}"
    ))
}

// 7. Sampler fidelity at 1e6 samples per model.
fn criterion_7() -> CriterionResult {
    let mut summary = Vec::new();
    for m in reference::all_models() {
        let mut xs = m.sample(1_000_000, 61);
        let p = gof::ks_test(&mut xs, |x| m.cdf_gains(x));
        if p <= 0.01 {
            return Err(format!("{}: KS p = {p}", m.id()));
        }
        summary.push(format!("{} {p:.2}", m.id()));
    }
    Ok(format!("1e6-sample KS p-values: {}", summary.join(", ")))
}

// 8. MLE recovery and nesting across five seeds.
fn criterion_8() -> CriterionResult {
    let truth = reference::mjf1();
    for seed in [101u64, 102, 103, 104, 105] {
        let xs = Model::Mjf1(truth).sample(100_000, seed);
        let mut cm = FitConfig::new("mjf1");
        cm.restarts = 3;
        cm.max_iterations = 1200;
        let m = fit::fit_mle(&cm, &xs).map_err(|e| format!("seed {seed}: {e}"))?;
        let Model::Mjf1(p) = m.model else { return Err("wrong model type".into()) };
        let rg = p.alpha_g / p.theta;
        let rl = p.alpha_l / p.theta;
        let rg_t = truth.alpha_g / truth.theta;
        let rl_t = truth.alpha_l / truth.theta;
        if (rg - rg_t).abs() / rg_t > 0.05
            || (rl - rl_t).abs() / rl_t > 0.05
            || (p.mu - truth.mu).abs() > 2e-4
        {
            return Err(format!(
                "seed {seed}: ratios ({rg:.4}, {rl:.4}) vs ({rg_t:.4}, {rl_t:.4}), mu {:.2e} vs {:.2e}",
                p.mu, truth.mu
            ));
        }
        let mut cs = FitConfig::new("student");
        cs.restarts = 3;
        cs.max_iterations = 800;
        let s = fit::fit_mle(&cs, &xs).map_err(|e| format!("seed {seed}: {e}"))?;
        if m.log_likelihood < s.log_likelihood - 1e-3 {
            return Err(format!(
                "seed {seed}: nesting violated ({} < {})",
                m.log_likelihood, s.log_likelihood
            ));
        }
    }
    Ok("mJF1 shape ratios within 5%, mu within 2e-4, nesting holds on 5 seeds".into())
}

// 9. Tail machinery: U-test calibration, band coverage, OLS slope.
fn criterion_9() -> CriterionResult {
    let pareto = |n: usize, seed: u64| -> Vec<f64> {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        (0..n).map(|_| (1.0 - rng.gen::<f64>()).powf(-1.0 / 3.0)).collect()
    };
    let m = 100usize;
    let mut p1: Vec<f64> = par_map_collect(1000, |rep| {
        let xs = pareto(m, 70_000 + rep as u64);
        let sel = tails::TailSelection::from_tail_sample(Side::Gains, &xs, 10 * m).unwrap();
        tails::u_test_pvalues(&sel, -3.0).unwrap()[0]
    });
    let ks_p = gof::ks_test(&mut p1, |x| x.clamp(0.0, 1.0));
    if ks_p <= 0.01 {
        return Err(format!("rank-1 p-values not uniform: KS p = {ks_p}"));
    }
    let counts: Vec<(usize, usize)> = par_map_collect(200, |rep| {
        let n = 2000;
        let xs = pareto(n, 80_000 + rep as u64);
        let ccdf = data::empirical_ccdf(&xs, Side::Gains).unwrap();
        let sel = tails::select_tail(&ccdf, Side::Gains, 0.2, n).unwrap();
        let band = tails::binomial_ci_band(
            &sel,
            |x| if x <= 1.0 { 1.0 } else { x.powi(-3) },
            0.95,
        )
        .unwrap();
        let hits = sel
            .points
            .iter()
            .zip(&band)
            .filter(|(&(_, c), &(lo, hi))| c >= lo && c <= hi)
            .count();
        (hits, sel.points.len())
    });
    let coverage = counts.iter().map(|&(h, _)| h).sum::<usize>() as f64
        / counts.iter().map(|&(_, t)| t).sum::<usize>() as f64;
    // The discrete quantiles make the band conservative, so pointwise
    // coverage sits at or slightly above the nominal 95%.
    if !(0.93..=0.99).contains(&coverage) {
        return Err(format!("band coverage {coverage:.4} outside 93-99%"));
    }
    let xs = Model::StudentT(reference::student_t()).sample(1_000_000, 36);
    let ccdf = data::empirical_ccdf(&xs, Side::Gains).unwrap();
    let sel = tails::select_tail(&ccdf, Side::Gains, 0.005, xs.len()).unwrap();
    let slope = tails::fit_powerlaw(&sel).unwrap().slope;
    if (slope + 3.04).abs() > 0.15 {
        return Err(format!("Student-t OLS tail slope {slope:.4} vs -3.04 ± 0.15"));
    }
    Ok(format!(
        "U-test uniform (KS p = {ks_p:.2}), coverage {:.1}%, OLS slope {slope:.3}",
        100.0 * coverage
    ))
}

// 10. Conditional reproduction from a user-supplied S&P500 file.
fn criterion_10() -> Option<CriterionResult> {
    let path = std::env::var("SP500_CSV").ok()?;
    let run = || -> Result<String, String> {
        let file = std::fs::File::open(&path).map_err(|e| e.to_string())?;
        let prices = data::load_prices(file, "date", "close").map_err(|e| e.to_string())?;
        let series = data::detrend(&prices).map_err(|e| e.to_string())?;
        let dx = data::daily_increments(&series, 1).map_err(|e| e.to_string())?;
        let stats = data::empirical_stats(&dx).map_err(|e| e.to_string())?;
        if (stats.m1 - 4.38e-5).abs() / 4.38e-5 > 0.10 {
            return Err(format!("m1 {:.4e} vs 4.38e-5 ± 10%", stats.m1));
        }
        if (stats.m2 - 1.28e-4).abs() / 1.28e-4 > 0.05 {
            return Err(format!("m2 {:.4e} vs 1.28e-4 ± 5%", stats.m2));
        }
        let mut slopes = Vec::new();
        for (side, expect) in [(Side::Gains, -3.14), (Side::Losses, -2.91)] {
            let ccdf = data::empirical_ccdf(&dx, side).map_err(|e| e.to_string())?;
            let sel =
                tails::select_tail(&ccdf, side, 0.01, dx.len()).map_err(|e| e.to_string())?;
            let slope = tails::fit_powerlaw(&sel).map_err(|e| e.to_string())?.slope;
            if (slope - expect).abs() > 0.15 {
                return Err(format!("{side:?} slope {slope:.3} vs {expect} ± 0.15"));
            }
            slopes.push(format!("{side:?} {slope:.3}"));
        }
        Ok(format!(
            "m1 {:.3e}, m2 {:.3e}, slopes {}",
            stats.m1,
            stats.m2,
            slopes.join(", ")
        ))
    };
    Some(run())
}

#[test]
fn acceptance() {
    let criteria: Vec<(usize, CriterionResult)> = vec![
        (1, criterion_1()),
        (2, criterion_2()),
        (3, criterion_3()),
        (4, criterion_4()),
        (5, criterion_5()),
        (6, criterion_6()),
        (7, criterion_7()),
        (8, criterion_8()),
        (9, criterion_9()),
    ];
    let mut failed = 0;
    for (i, r) in &criteria {
        match r {
            Ok(msg) => println!("criterion {i}: pass - {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {i}: FAIL - {msg}");
            }
        }
    }
    match criterion_10() {
        None => println!("criterion 10: skipped - set SP500_CSV to a daily close file to enable"),
        Some(Ok(msg)) => println!("criterion 10: pass - {msg}"),
        Some(Err(msg)) => {
            failed += 1;
            println!("criterion 10: FAIL - {msg}");
        }
    }
    assert_eq!(failed, 0, "{failed} acceptance criteria failed");
}
