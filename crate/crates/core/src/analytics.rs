//! Closed-form hitting-time quantities, workloads, cost rates, and their
//! derivatives for one patient type.
//!
//! A remote episode is a two-barrier exit problem for a negative-drift
//! Brownian motion started at `x` with absorbing barriers at `0` (discharge)
//! and `x + a` (call-in); an on-site episode is the single-barrier hit of `0`.
//! All operations are pure functions of their inputs.

use serde::Serialize;

use crate::params::{DerivedCoeffs, PatientParams, QuadraticCoeffs};

/// Probability that a remote episode ends in call-in rather than discharge
/// (gambler's ruin): `p_x(a) = (1 - e^{-rho x}) / (e^{rho a} - e^{-rho x})`.
///
/// Evaluated in the factored form `e^{-rho a}(1-e^{-rho x})/(1-e^{-rho(a+x)})`
/// so that large `rho * a` underflows to zero instead of overflowing.
pub fn call_in_prob(rho: f64, x: f64, a: f64) -> f64 {
    debug_assert!(rho > 0.0 && x >= 0.0 && a >= 0.0);
    let num = -(-rho * x).exp_m1(); // 1 - e^{-rho x}
    let den = -(-rho * (a + x)).exp_m1(); // 1 - e^{-rho (a+x)}
    (-rho * a).exp() * num / den
}

/// Derivative of [`call_in_prob`] in `a`: strictly negative.
pub fn call_in_prob_deriv(rho: f64, x: f64, a: f64) -> f64 {
    let p = call_in_prob(rho, x, a);
    let den = -(-rho * (a + x)).exp_m1();
    -rho * p / den
}

/// Expected remote length of stay `((1-p)x - p a) / theta_r`.
pub fn elos_remote(rho: f64, theta_r: f64, x: f64, a: f64) -> f64 {
    let p = call_in_prob(rho, x, a);
    ((1.0 - p) * x - p * a) / theta_r
}

/// Expected on-site length of stay `(x + a + T theta_t) / theta_h`.
pub fn elos_onsite(p: &PatientParams, a: f64) -> f64 {
    (p.x + a + p.travel_time * p.theta_t) / p.theta_h
}

/// Offered workloads (arrival rate times expected LOS) by care setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Workloads {
    pub w_h: f64,
    pub w_r: f64,
    pub w_t: f64,
}

pub fn workloads(p: &PatientParams, a: f64) -> Workloads {
    let rho = 2.0 * p.theta_r / (p.sigma_r * p.sigma_r);
    let pc = call_in_prob(rho, p.x, a);
    let w_h = p.lambda * pc * (p.x + a + p.travel_time * p.theta_t) / p.theta_h;
    let w_r = p.lambda * ((1.0 - pc) * p.x - pc * a) / p.theta_r;
    Workloads { w_h, w_r, w_t: w_h + w_r }
}

/// Derivatives of the workloads in `a`. The on-site component is strictly
/// negative and the remote component strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WorkloadDerivs {
    pub w_h: f64,
    pub w_r: f64,
    pub w_t: f64,
}

pub fn workload_derivs(p: &PatientParams, a: f64) -> WorkloadDerivs {
    let rho = 2.0 * p.theta_r / (p.sigma_r * p.sigma_r);
    let pc = call_in_prob(rho, p.x, a);
    let dpc = call_in_prob_deriv(rho, p.x, a);
    let w_h = p.lambda / p.theta_h * (dpc * (p.x + a + p.travel_time * p.theta_t) + pc);
    let w_r = -p.lambda / p.theta_r * (dpc * (p.x + a) + pc);
    WorkloadDerivs { w_h, w_r, w_t: w_h + w_r }
}

/// Long-run average cost rate, coefficient form
/// `V(a) = lambda (alpha + beta p + gamma p a)`.
pub fn cost_rate(p: &PatientParams, a: f64) -> f64 {
    let c = DerivedCoeffs::from_params(p).expect("validated params");
    cost_rate_with(p, &c, a)
}

/// Same as [`cost_rate`] with precomputed coefficients.
pub fn cost_rate_with(p: &PatientParams, c: &DerivedCoeffs, a: f64) -> f64 {
    let pc = call_in_prob(c.rho, p.x, a);
    p.lambda * (c.alpha + c.beta * pc + c.gamma * pc * a)
}

/// Long-run average cost rate evaluated along the defining decomposition:
/// remote holding plus, on call-in, travel and on-site holding. Agrees with
/// [`cost_rate`] to machine precision; kept as an independent route.
pub fn cost_rate_direct(p: &PatientParams, a: f64) -> f64 {
    let rho = 2.0 * p.theta_r / (p.sigma_r * p.sigma_r);
    let pc = call_in_prob(rho, p.x, a);
    let remote = p.h_r * elos_remote(rho, p.theta_r, p.x, a);
    let onsite = p.h_t * p.travel_time + p.h_h * elos_onsite(p, a);
    p.lambda * (remote + pc * onsite)
}

/// Derivative of the cost rate in `a`:
/// `V'(a) = lambda (|p'|/rho) (gamma (1 - e^{-rho(x+a)}) - beta rho - gamma rho a)`.
pub fn cost_rate_deriv(p: &PatientParams, a: f64) -> f64 {
    let c = DerivedCoeffs::from_params(p).expect("validated params");
    cost_rate_deriv_with(p, &c, a)
}

pub fn cost_rate_deriv_with(p: &PatientParams, c: &DerivedCoeffs, a: f64) -> f64 {
    let dpc = call_in_prob_deriv(c.rho, p.x, a);
    let bracket = c.gamma * (-(-c.rho * (p.x + a)).exp_m1()) - c.beta * c.rho - c.gamma * c.rho * a;
    p.lambda * dpc.abs() / c.rho * bracket
}

/// Second moments of the episode lengths, exactly as printed in the source
/// formulas. The two-barrier expression can go negative for some parameters;
/// that is surfaced through `m2_r_negative` rather than clamped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecondMoments {
    pub m2_r: f64,
    pub m2_h: f64,
    pub m2_r_negative: bool,
}

pub fn second_moments(p: &PatientParams, a: f64) -> SecondMoments {
    let rho = 2.0 * p.theta_r / (p.sigma_r * p.sigma_r);
    let pc = call_in_prob(rho, p.x, a);
    let m2_r = 2.0 / (p.theta_r * p.theta_r) * (pc - p.theta_r * p.x / (p.sigma_r * p.sigma_r));
    let b = p.x + a + p.travel_time * p.theta_t;
    let m2_h = b / p.theta_h.powi(3) * p.sigma_h * p.sigma_h + (b / p.theta_h).powi(2);
    SecondMoments { m2_r, m2_h, m2_r_negative: m2_r < 0.0 }
}

/// Quadratic-holding-cost rate (direct form) plus the `m2_r` negativity flag.
pub fn cost_rate_quadratic(p: &PatientParams, a: f64) -> (f64, bool) {
    let rho = 2.0 * p.theta_r / (p.sigma_r * p.sigma_r);
    let pc = call_in_prob(rho, p.x, a);
    let m = second_moments(p, a);
    let v = p.lambda * (p.h_r * m.m2_r + (p.h_t * p.travel_time + p.h_h * m.m2_h) * pc);
    (v, m.m2_r_negative)
}

/// Quadratic cost rate through the `(vartheta, delta, phi, psi)` coefficient
/// form; the second route of the dual-form check.
pub fn cost_rate_quadratic_coeff(p: &PatientParams, q: &QuadraticCoeffs, a: f64) -> f64 {
    let rho = 2.0 * p.theta_r / (p.sigma_r * p.sigma_r);
    q.eval(a, call_in_prob(rho, p.x, a))
}

/// Derivative of the quadratic cost rate in `a` (used by the capacitated
/// quadratic solver for its shadow price).
pub fn cost_rate_quadratic_deriv(p: &PatientParams, q: &QuadraticCoeffs, a: f64) -> f64 {
    let rho = 2.0 * p.theta_r / (p.sigma_r * p.sigma_r);
    let pc = call_in_prob(rho, p.x, a);
    let dpc = call_in_prob_deriv(rho, p.x, a);
    q.delta * (pc + a * dpc) + q.phi * (2.0 * a * pc + a * a * dpc) + q.psi * dpc
}

/// Central finite difference with step `1e-5 * max(1, |a|)`, the validation
/// oracle for every closed-form derivative in this module.
pub fn central_diff<F: Fn(f64) -> f64>(f: F, a: f64) -> f64 {
    let h = 1e-5 * a.abs().max(1.0);
    (f(a + h) - f(a - h)) / (2.0 * h)
}
