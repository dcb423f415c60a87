//! Parameter sets for the four return models and their flat key-value
//! serialization.
//!
//! All scale and shape parameters are in daily return² units; `tau` is
//! the accumulation horizon in trading days; `mu` is a location in
//! return units. Invariants are enforced at construction so evaluation
//! code never revalidates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

fn require_positive(name: &str, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{name} must be positive finite, got {v}")))
    }
}

fn require_finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {v}")))
    }
}

/// Symmetric Student-t return model: mean stochastic variance `theta`,
/// composite vol-of-vol parameter `alpha` (= 2γθ/κ² of the variance SDE),
/// horizon `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StudentTParams {
    pub theta: f64,
    pub alpha: f64,
    pub tau: f64,
}

impl StudentTParams {
    pub fn new(theta: f64, alpha: f64, tau: f64) -> Result<Self> {
        Ok(Self {
            theta: require_positive("theta", theta)?,
            alpha: require_positive("alpha", alpha)?,
            tau: require_positive("tau", tau)?,
        })
    }
}

/// Two-piece mixture with separate Student-t halves for gains and losses.
///
/// `w_g` is the gain weight; the loss weight is 1 − w_g. It is fixed from
/// the empirical gain/loss point ratio rather than fitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfStudentTParams {
    pub theta_g: f64,
    pub theta_l: f64,
    pub alpha_g: f64,
    pub alpha_l: f64,
    pub w_g: f64,
    pub tau: f64,
}

impl HalfStudentTParams {
    pub fn new(
        theta_g: f64,
        theta_l: f64,
        alpha_g: f64,
        alpha_l: f64,
        w_g: f64,
        tau: f64,
    ) -> Result<Self> {
        if !(w_g > 0.0 && w_g < 1.0) {
            return Err(Error::Domain(format!("w_g must be in (0, 1), got {w_g}")));
        }
        Ok(Self {
            theta_g: require_positive("theta_g", theta_g)?,
            theta_l: require_positive("theta_l", theta_l)?,
            alpha_g: require_positive("alpha_g", alpha_g)?,
            alpha_l: require_positive("alpha_l", alpha_l)?,
            w_g,
            tau: require_positive("tau", tau)?,
        })
    }

    pub fn w_l(&self) -> f64 {
        1.0 - self.w_g
    }
}

/// First modified Jones-Faddy skew-t: shared mean stochastic variance
/// `theta`, separate gain/loss shape parameters, location `mu`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mjf1Params {
    pub theta: f64,
    pub alpha_g: f64,
    pub alpha_l: f64,
    pub mu: f64,
    pub tau: f64,
}

impl Mjf1Params {
    pub fn new(theta: f64, alpha_g: f64, alpha_l: f64, mu: f64, tau: f64) -> Result<Self> {
        Ok(Self {
            theta: require_positive("theta", theta)?,
            alpha_g: require_positive("alpha_g", alpha_g)?,
            alpha_l: require_positive("alpha_l", alpha_l)?,
            mu: require_finite("mu", mu)?,
            tau: require_positive("tau", tau)?,
        })
    }
}

/// Second modified Jones-Faddy skew-t: like [`Mjf1Params`] but with
/// separate mean stochastic variances for gains and losses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mjf2Params {
    pub theta_g: f64,
    pub theta_l: f64,
    pub alpha_g: f64,
    pub alpha_l: f64,
    pub mu: f64,
    pub tau: f64,
}

impl Mjf2Params {
    pub fn new(
        theta_g: f64,
        theta_l: f64,
        alpha_g: f64,
        alpha_l: f64,
        mu: f64,
        tau: f64,
    ) -> Result<Self> {
        Ok(Self {
            theta_g: require_positive("theta_g", theta_g)?,
            theta_l: require_positive("theta_l", theta_l)?,
            alpha_g: require_positive("alpha_g", alpha_g)?,
            alpha_l: require_positive("alpha_l", alpha_l)?,
            mu: require_finite("mu", mu)?,
            tau: require_positive("tau", tau)?,
        })
    }
}

use super::Model;

fn take(kv: &BTreeMap<String, f64>, key: &str, model: &str) -> Result<f64> {
    kv.get(key).copied().ok_or_else(|| {
        Error::InvalidInput(format!("model '{model}' requires key '{key}'"))
    })
}

fn reject_unknown(kv: &BTreeMap<String, f64>, allowed: &[&str], model: &str) -> Result<()> {
    for key in kv.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(Error::InvalidInput(format!(
                "model '{model}' does not accept key '{key}'"
            )));
        }
    }
    Ok(())
}

impl Model {
    /// Builds a model from its id and a flat key-value document.
    ///
    /// Key names are exactly `theta`, `theta_g`, `theta_l`, `alpha`,
    /// `alpha_g`, `alpha_l`, `mu`, `tau`, `w_g`; a missing or extraneous
    /// key for the given model id is an error.
    pub fn from_key_values(id: &str, kv: &BTreeMap<String, f64>) -> Result<Model> {
        match id {
            "student" => {
                reject_unknown(kv, &["theta", "alpha", "tau"], id)?;
                Ok(Model::StudentT(StudentTParams::new(
                    take(kv, "theta", id)?,
                    take(kv, "alpha", id)?,
                    take(kv, "tau", id)?,
                )?))
            }
            "half-student" => {
                reject_unknown(
                    kv,
                    &["theta_g", "theta_l", "alpha_g", "alpha_l", "w_g", "tau"],
                    id,
                )?;
                Ok(Model::HalfStudentT(HalfStudentTParams::new(
                    take(kv, "theta_g", id)?,
                    take(kv, "theta_l", id)?,
                    take(kv, "alpha_g", id)?,
                    take(kv, "alpha_l", id)?,
                    take(kv, "w_g", id)?,
                    take(kv, "tau", id)?,
                )?))
            }
            "mjf1" => {
                reject_unknown(kv, &["theta", "alpha_g", "alpha_l", "mu", "tau"], id)?;
                Ok(Model::Mjf1(Mjf1Params::new(
                    take(kv, "theta", id)?,
                    take(kv, "alpha_g", id)?,
                    take(kv, "alpha_l", id)?,
                    take(kv, "mu", id)?,
                    take(kv, "tau", id)?,
                )?))
            }
            "mjf2" => {
                reject_unknown(
                    kv,
                    &["theta_g", "theta_l", "alpha_g", "alpha_l", "mu", "tau"],
                    id,
                )?;
                Ok(Model::Mjf2(Mjf2Params::new(
                    take(kv, "theta_g", id)?,
                    take(kv, "theta_l", id)?,
                    take(kv, "alpha_g", id)?,
                    take(kv, "alpha_l", id)?,
                    take(kv, "mu", id)?,
                    take(kv, "tau", id)?,
                )?))
            }
            other => Err(Error::InvalidInput(format!(
                "unknown model id '{other}' (expected student, half-student, mjf1, mjf2)"
            ))),
        }
    }

    /// Flat key-value form of the parameters; inverse of
    /// [`Model::from_key_values`] together with [`Model::id`].
    pub fn to_key_values(&self) -> BTreeMap<String, f64> {
        let mut kv = BTreeMap::new();
        match self {
            Model::StudentT(p) => {
                kv.insert("theta".into(), p.theta);
                kv.insert("alpha".into(), p.alpha);
                kv.insert("tau".into(), p.tau);
            }
            Model::HalfStudentT(p) => {
                kv.insert("theta_g".into(), p.theta_g);
                kv.insert("theta_l".into(), p.theta_l);
                kv.insert("alpha_g".into(), p.alpha_g);
                kv.insert("alpha_l".into(), p.alpha_l);
                kv.insert("w_g".into(), p.w_g);
                kv.insert("tau".into(), p.tau);
            }
            Model::Mjf1(p) => {
                kv.insert("theta".into(), p.theta);
                kv.insert("alpha_g".into(), p.alpha_g);
                kv.insert("alpha_l".into(), p.alpha_l);
                kv.insert("mu".into(), p.mu);
                kv.insert("tau".into(), p.tau);
            }
            Model::Mjf2(p) => {
                kv.insert("theta_g".into(), p.theta_g);
                kv.insert("theta_l".into(), p.theta_l);
                kv.insert("alpha_g".into(), p.alpha_g);
                kv.insert("alpha_l".into(), p.alpha_l);
                kv.insert("mu".into(), p.mu);
                kv.insert("tau".into(), p.tau);
            }
        }
        kv
    }
}
