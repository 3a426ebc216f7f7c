//! Patient-type parameters and the coefficients derived from them.
//!
//! A patient type is described by the drift/diffusion of its health-score
//! dynamics in each care setting, holding-cost rates, travel time, and the
//! clinical ceiling on off-site severity. Everything downstream (workloads,
//! cost rates, thresholds) is a function of these primitives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Primitives of one patient type.
///
/// Health scores are positive reals; 0 means recovered. Scores drift downward
/// at rate `theta_r` (remote) or `theta_h` (on-site) with diffusion `sigma_r`
/// / `sigma_h`, and deteriorate at expected rate `theta_t` while traveling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatientParams {
    /// Arrival rate (patients per unit time).
    pub lambda: f64,
    /// Initial health score at admission.
    pub x: f64,
    /// One-way travel time to the hospital.
    pub travel_time: f64,
    /// Remote recovery drift (score per unit time).
    pub theta_r: f64,
    /// On-site recovery drift.
    pub theta_h: f64,
    /// Expected travel deterioration rate.
    pub theta_t: f64,
    /// Remote diffusion coefficient.
    pub sigma_r: f64,
    /// On-site diffusion coefficient.
    pub sigma_h: f64,
    /// Remote holding cost rate.
    pub h_r: f64,
    /// On-site holding cost rate.
    pub h_h: f64,
    /// Travel cost rate.
    pub h_t: f64,
    /// Maximum allowed expected off-site severity.
    pub s_bar: f64,
}

impl PatientParams {
    /// Check signs and finiteness of every field.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("lambda", self.lambda),
            ("x", self.x),
            ("theta_r", self.theta_r),
            ("theta_h", self.theta_h),
            ("theta_t", self.theta_t),
            ("sigma_r", self.sigma_r),
            ("sigma_h", self.sigma_h),
            ("h_r", self.h_r),
            ("h_h", self.h_h),
            ("h_t", self.h_t),
            ("s_bar", self.s_bar),
        ];
        for (name, v) in positive {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} is not finite")));
            }
            if v <= 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be strictly positive, got {v}"
                )));
            }
        }
        if !self.travel_time.is_finite() || self.travel_time < 0.0 {
            return Err(Error::InvalidParams(format!(
                "travel_time must be finite and nonnegative, got {}",
                self.travel_time
            )));
        }
        Ok(())
    }

    /// Clone with replaced holding-cost rates. Used for the shadow-price
    /// equivalence, where both care settings are surcharged by the same amount.
    pub fn with_holding_costs(&self, h_r: f64, h_h: f64) -> Self {
        Self { h_r, h_h, ..self.clone() }
    }

    /// Clamped maximum allowable threshold `max(0, s_bar - x - T*theta_t)`.
    pub fn a_bar(&self) -> f64 {
        (self.s_bar - self.x - self.travel_time * self.theta_t).max(0.0)
    }
}

/// Coefficients of the cost objective and workload shape, all computable
/// once per patient type.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedCoeffs {
    /// `2*theta_r / sigma_r^2`; the exponential rate of the ruin probability.
    pub rho: f64,
    /// Cost of never calling in: `h_r * x / theta_r`.
    pub alpha: f64,
    /// Extra expected cost of an immediate transfer relative to never
    /// transferring: `beta = gamma * x + eta * T`.
    pub beta: f64,
    /// Marginal cost gap between on-site and remote care:
    /// `-h_r/theta_r + h_h/theta_h`.
    pub gamma: f64,
    /// Marginal cost of travel time: `h_t + h_h * theta_t / theta_h`.
    pub eta: f64,
    /// Workload-shape boundary `rho*theta_t*T / (rho*x - 1 + exp(-rho*x))`.
    pub delta: f64,
    /// Maximum allowable threshold `max(0, s_bar - x - T*theta_t)`.
    pub a_bar: f64,
}

impl DerivedCoeffs {
    pub fn from_params(p: &PatientParams) -> Result<Self> {
        p.validate()?;
        let rho = 2.0 * p.theta_r / (p.sigma_r * p.sigma_r);
        let alpha = p.h_r * p.x / p.theta_r;
        let gamma = -p.h_r / p.theta_r + p.h_h / p.theta_h;
        let eta = p.h_t + p.h_h * p.theta_t / p.theta_h;
        let beta = gamma * p.x + eta * p.travel_time;
        // rho*x - 1 + e^{-rho*x} > 0 for rho*x > 0, so delta is well defined;
        // it vanishes only when T = 0.
        let rx = rho * p.x;
        let delta = rho * p.theta_t * p.travel_time / (rx - 1.0 + (-rx).exp());
        Ok(Self { rho, alpha, beta, gamma, eta, delta, a_bar: p.a_bar() })
    }
}

/// Coefficients of the quadratic-cost objective
/// `V(a) = vartheta + delta*a*p + phi*a^2*p + psi*p`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticCoeffs {
    pub vartheta: f64,
    pub delta: f64,
    pub phi: f64,
    pub psi: f64,
}

impl QuadraticCoeffs {
    pub fn from_params(p: &PatientParams) -> Result<Self> {
        p.validate()?;
        let c = p.x + p.travel_time * p.theta_t;
        let th3 = p.theta_h.powi(3);
        let sh2 = p.sigma_h * p.sigma_h;
        let vartheta = -2.0 * p.lambda * p.h_r * p.x / (p.theta_r * p.sigma_r * p.sigma_r);
        let delta = p.lambda * p.h_h * (sh2 / th3 + 2.0 * c / (p.theta_h * p.theta_h));
        let phi = p.lambda * p.h_h / (p.theta_h * p.theta_h);
        let psi = p.lambda
            * (2.0 * p.h_r / (p.theta_r * p.theta_r)
                + p.h_t * p.travel_time
                + p.h_h * (c * sh2 / th3 + (c / p.theta_h).powi(2)));
        Ok(Self { vartheta, delta, phi, psi })
    }

    /// Evaluate the coefficient form given the call-in probability at `a`.
    pub fn eval(&self, a: f64, p_call: f64) -> f64 {
        self.vartheta + self.delta * a * p_call + self.phi * a * a * p_call + self.psi * p_call
    }
}

/// Shape of the total workload as a function of the call-in threshold.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum WorkloadCase {
    /// `theta_h/theta_r <= 1`: strictly decreasing.
    Decreasing,
    /// `1 < theta_h/theta_r < 1 + delta`: unique interior minimum `a0`.
    Unimodal { a0: f64 },
    /// `theta_h/theta_r >= 1 + delta`: strictly increasing.
    Increasing,
}
