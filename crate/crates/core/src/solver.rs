//! Single-type threshold optimization: workload-shape classification,
//! feasibility, the closed-form unconstrained optimum, travel-time structure,
//! and the capacitated optimum with its shadow price.

use serde::Serialize;

use crate::analytics::{
    call_in_prob, cost_rate_deriv_with, cost_rate_quadratic, cost_rate_quadratic_deriv,
    cost_rate_with, workload_derivs, workloads, Workloads,
};
use crate::error::{Error, Result};
use crate::params::{DerivedCoeffs, PatientParams, QuadraticCoeffs, WorkloadCase};
use crate::roots::{bisect, golden_section};

const NEG_INV_E: f64 = -0.36787944117144233;

/// Which part of the solution structure produced the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// The clinical ceiling binds: `a* = a_bar`.
    MaxAllowable,
    /// Interior stationary point of the cost rate.
    Interior,
    /// Remote hospitalization is not offered: `a* = 0`.
    ImmediateOnsite,
    /// The capacity constraint binds: `W_T(a*) = C`.
    CapacityBinding,
}

/// An optimal call-in threshold together with the quantities induced by it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdSolution {
    pub a_star: f64,
    pub regime: Regime,
    /// Shadow price of the capacity constraint; zero when non-binding.
    pub gamma_shadow: f64,
    /// Cost rate at the optimum (linear objective unless produced by
    /// [`solve_quadratic`]).
    pub cost: f64,
    pub workloads: Workloads,
    pub p_call_in: f64,
    /// Set by the quadratic solver when the printed two-barrier second-moment
    /// expression is negative at the optimum.
    pub m2_r_negative: bool,
}

/// Workload case, minimizing threshold, and minimal total workload.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilitySummary {
    pub case: WorkloadCase,
    pub a_min: f64,
    pub w_min: f64,
}

impl FeasibilitySummary {
    /// Can a capacity `c` be met by any allowable threshold?
    pub fn feasible_for(&self, c: f64) -> bool {
        self.w_min <= c
    }
}

/// Travel-time structure of the unconstrained optimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TravelProfile {
    /// Lower end of the remote-viability window (`None` when the marginal
    /// cost gap is nonnegative and no lower bound applies).
    pub t_lb: Option<f64>,
    /// Upper end of the window: `(s_bar - x)/theta_t`.
    pub t_ub: f64,
    /// Threshold-maximizing travel time, when the interior regime exists.
    pub t_hat: Option<f64>,
    pub samples: Vec<TravelSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TravelSample {
    pub t: f64,
    pub a_star: f64,
    /// Closed-form sensitivity of the optimal threshold to travel time;
    /// `None` where the theory does not state it (gamma >= 0).
    pub da_dt: Option<f64>,
}

/// Report of the shadow-price equivalence check: re-solving the
/// unconstrained problem with both holding costs raised by the shadow price
/// must reproduce the capacitated optimum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaEquivalenceReport {
    pub a_capacitated: f64,
    pub gamma_shadow: f64,
    pub a_modified: f64,
    /// Marginal-cost gap under the surcharged costs:
    /// `gamma + Gamma (1/theta_h - 1/theta_r)`.
    pub gamma_of_gamma: f64,
    pub abs_diff: f64,
}

/// Classify the shape of the total workload in the threshold.
pub fn classify_workload(p: &PatientParams) -> Result<WorkloadCase> {
    let c = DerivedCoeffs::from_params(p)?;
    let ratio = p.theta_h / p.theta_r;
    if ratio <= 1.0 {
        return Ok(WorkloadCase::Decreasing);
    }
    if ratio >= 1.0 + c.delta {
        return Ok(WorkloadCase::Increasing);
    }
    // Unique interior minimum: W_T' is negative at 0 and eventually positive.
    let dw = |a: f64| workload_derivs(p, a).w_t;
    let mut hi = 1.0;
    while dw(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Bracket("workload derivative never turns positive".into()));
        }
    }
    let a0 = bisect(dw, 0.0, hi, 1e-10)?;
    Ok(WorkloadCase::Unimodal { a0 })
}

/// Workload-minimizing threshold and the feasibility boundary it induces.
pub fn feasibility(p: &PatientParams) -> Result<FeasibilitySummary> {
    let case = classify_workload(p)?;
    let a_bar = p.a_bar();
    let a_min = match case {
        WorkloadCase::Decreasing => a_bar,
        WorkloadCase::Increasing => 0.0,
        WorkloadCase::Unimodal { a0 } => a0.min(a_bar),
    };
    let w_min = workloads(p, a_min).w_t;
    Ok(FeasibilitySummary { case, a_min, w_min })
}

fn solution_at(p: &PatientParams, c: &DerivedCoeffs, a: f64, regime: Regime) -> ThresholdSolution {
    ThresholdSolution {
        a_star: a,
        regime,
        gamma_shadow: 0.0,
        cost: cost_rate_with(p, c, a),
        workloads: workloads(p, a),
        p_call_in: call_in_prob(c.rho, p.x, a),
        m2_r_negative: false,
    }
}

/// Interior stationary point of the cost rate, from the Lambert-W closed
/// form and a short Newton polish of the first-order condition
/// `e^{-rho a} = (1 - beta rho / gamma - rho a) e^{rho x}`.
fn interior_threshold(p: &PatientParams, c: &DerivedCoeffs) -> Result<f64> {
    let mut arg = -(-c.rho * p.x + c.beta * c.rho / c.gamma - 1.0).exp();
    if arg < NEG_INV_E {
        if arg > NEG_INV_E * (1.0 + 1e-12) {
            // Floating-point slip at the boundary case: nudge onto the branch.
            arg = NEG_INV_E + 1e-15;
        } else {
            return Err(Error::Domain(format!(
                "Lambert-W argument {arg} below branch point for interior threshold"
            )));
        }
    }
    let w = crate::lambert::lambert_w(arg)?;
    let mut a = ((1.0 + w) / c.rho - c.beta / c.gamma).max(0.0);
    // Newton refinement of the first-order condition.
    let erx = (c.rho * p.x).exp();
    let foc = |a: f64| (-c.rho * a).exp() - (1.0 - c.beta * c.rho / c.gamma - c.rho * a) * erx;
    for _ in 0..4 {
        let f = foc(a);
        if f == 0.0 {
            break;
        }
        let df = -c.rho * (-c.rho * a).exp() + c.rho * erx;
        let step = f / df;
        if !step.is_finite() {
            break;
        }
        a -= step;
        if step.abs() <= 1e-16 * (1.0 + a.abs()) {
            break;
        }
    }
    Ok(a.max(0.0))
}

/// Residual of the interior first-order condition at `a`; vanishes exactly at
/// the interior optimum.
pub fn foc_residual(p: &PatientParams, a: f64) -> Result<f64> {
    let c = DerivedCoeffs::from_params(p)?;
    Ok((-c.rho * a).exp() - (1.0 - c.beta * c.rho / c.gamma - c.rho * a) * (c.rho * p.x).exp())
}

/// Optimal call-in threshold with unlimited resources.
///
/// `gamma >= 0`: remote care is always preferable and `a* = a_bar`.
/// `gamma < 0`: either immediate transfer dominates (`a* = 0`, ties at the
/// boundary of the dominance condition resolving to 0) or the optimum is the
/// interior Lambert-W point capped at `a_bar`.
pub fn solve_uncapacitated(p: &PatientParams) -> Result<ThresholdSolution> {
    let c = DerivedCoeffs::from_params(p)?;
    if c.a_bar == 0.0 {
        // Clinical constraint forces direct admission.
        return Ok(solution_at(p, &c, 0.0, Regime::ImmediateOnsite));
    }
    if c.gamma >= 0.0 {
        return Ok(solution_at(p, &c, c.a_bar, Regime::MaxAllowable));
    }
    let dominance = c.gamma * (-(-c.rho * p.x).exp_m1()) / c.rho;
    if c.beta <= dominance {
        return Ok(solution_at(p, &c, 0.0, Regime::ImmediateOnsite));
    }
    let a_tilde = interior_threshold(p, &c)?;
    if a_tilde >= c.a_bar - 1e-10 * (1.0 + c.a_bar) {
        Ok(solution_at(p, &c, c.a_bar, Regime::MaxAllowable))
    } else {
        Ok(solution_at(p, &c, a_tilde, Regime::Interior))
    }
}

/// Optimal call-in threshold under a total workload capacity.
pub fn solve_capacitated(p: &PatientParams, capacity: f64) -> Result<ThresholdSolution> {
    let coeffs = DerivedCoeffs::from_params(p)?;
    let feas = feasibility(p)?;
    if !feas.feasible_for(capacity) {
        return Err(Error::Infeasible { w_min: feas.w_min, capacity });
    }
    let uncap = solve_uncapacitated(p)?;
    if uncap.workloads.w_t <= capacity {
        return Ok(uncap);
    }
    if feas.w_min >= capacity {
        // Single feasible point; the multiplier is defined only strictly inside.
        return Ok(solution_at(p, &coeffs, feas.a_min, Regime::CapacityBinding));
    }
    // W_T is strictly monotone between a_min and the unconstrained optimum,
    // and W_T(a_min) < C < W_T(a*), so the bracket is guaranteed.
    let (lo, hi) = if feas.a_min < uncap.a_star {
        (feas.a_min, uncap.a_star)
    } else {
        (uncap.a_star, feas.a_min)
    };
    let a_c = bisect(|a| workloads(p, a).w_t - capacity, lo, hi, 0.0)?;
    let mut sol = solution_at(p, &coeffs, a_c, Regime::CapacityBinding);
    let dv = cost_rate_deriv_with(p, &coeffs, a_c);
    let dw = workload_derivs(p, a_c).w_t;
    sol.gamma_shadow = (-dv / dw).max(0.0);
    Ok(sol)
}

/// Check that the capacitated optimum equals the unconstrained optimum under
/// holding costs surcharged by the shadow price.
pub fn verify_gamma_equivalence(
    p: &PatientParams,
    capacity: f64,
) -> Result<GammaEquivalenceReport> {
    let cap = solve_capacitated(p, capacity)?;
    let gamma_shadow = cap.gamma_shadow;
    let modified =
        solve_uncapacitated(&p.with_holding_costs(p.h_r + gamma_shadow, p.h_h + gamma_shadow))?;
    let c = DerivedCoeffs::from_params(p)?;
    Ok(GammaEquivalenceReport {
        a_capacitated: cap.a_star,
        gamma_shadow,
        a_modified: modified.a_star,
        gamma_of_gamma: c.gamma + gamma_shadow * (1.0 / p.theta_h - 1.0 / p.theta_r),
        abs_diff: (cap.a_star - modified.a_star).abs(),
    })
}

/// Travel-time bounds, the threshold-maximizing travel time, and sensitivity
/// samples of the unconstrained optimum along a grid of travel times.
pub fn travel_profile(p: &PatientParams, t_grid: &[f64]) -> Result<TravelProfile> {
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams("T grid must be strictly increasing".into()));
    }
    let c = DerivedCoeffs::from_params(p)?;
    let t_ub = (p.s_bar - p.x) / p.theta_t;

    let at = |t: f64| -> Result<f64> {
        let q = PatientParams { travel_time: t, ..p.clone() };
        Ok(solve_uncapacitated(&q)?.a_star)
    };

    if c.gamma >= 0.0 {
        let mut samples = Vec::with_capacity(t_grid.len());
        for &t in t_grid {
            samples.push(TravelSample { t, a_star: at(t)?, da_dt: None });
        }
        return Ok(TravelProfile { t_lb: None, t_ub, t_hat: None, samples });
    }

    let t_lb = -(c.gamma / c.eta) * (p.x - (-(-c.rho * p.x).exp_m1()) / c.rho);
    let mut t_hat = None;
    if t_lb < t_ub {
        // The interior point grows from 0 at T_LB while the ceiling falls to
        // 0 at T_UB, so their difference crosses zero exactly once between.
        let diff = |t: f64| {
            let q = PatientParams { travel_time: t, ..p.clone() };
            let cq = DerivedCoeffs::from_params(&q).expect("validated");
            let tilde = interior_threshold(&q, &cq).unwrap_or(f64::INFINITY);
            tilde - cq.a_bar
        };
        let span = t_ub - t_lb;
        let lo = t_lb + 1e-9 * span;
        let hi = t_ub - 1e-9 * span;
        if diff(lo) < 0.0 && diff(hi) > 0.0 {
            t_hat = Some(bisect(diff, lo, hi, 0.0)?);
        }
    }

    // Differentiating the closed form for the interior point in T gives
    // da/dT = -(eta/gamma) / (1 + W(-e^{rho eta T / gamma - 1})), using
    // dW/dz = W/(z(1+W)); finite differences of the optimizer confirm it.
    let w_branch_deriv = |t: f64| -> Result<f64> {
        let arg = -(c.rho * c.eta * t / c.gamma - 1.0).exp();
        let w = crate::lambert::lambert_w(arg.max(NEG_INV_E + 1e-15))?;
        Ok(-(c.eta / c.gamma) / (1.0 + w))
    };

    let mut samples = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let a_star = at(t)?;
        let da_dt = if t <= t_lb || t >= t_ub {
            Some(0.0)
        } else if let Some(th) = t_hat {
            if t < th {
                Some(w_branch_deriv(t)?)
            } else {
                Some(-p.theta_t)
            }
        } else {
            // Degenerate window: a* is 0 throughout.
            Some(0.0)
        };
        samples.push(TravelSample { t, a_star, da_dt });
    }
    Ok(TravelProfile { t_lb: Some(t_lb), t_ub, t_hat, samples })
}

/// Minimize the quadratic-holding-cost objective over the allowable interval,
/// optionally under the same workload capacity constraint as the linear case.
pub fn solve_quadratic(p: &PatientParams, capacity: Option<f64>) -> Result<ThresholdSolution> {
    let c = DerivedCoeffs::from_params(p)?;
    let q = QuadraticCoeffs::from_params(p)?;
    let a_bar = p.a_bar();
    let objective = |a: f64| cost_rate_quadratic(p, a).0;

    let finish = |a: f64, regime: Regime, shadow: f64| -> ThresholdSolution {
        let (cost, flagged) = cost_rate_quadratic(p, a);
        ThresholdSolution {
            a_star: a,
            regime,
            gamma_shadow: shadow,
            cost,
            workloads: workloads(p, a),
            p_call_in: call_in_prob(c.rho, p.x, a),
            m2_r_negative: flagged,
        }
    };

    let a_unc = if a_bar == 0.0 { 0.0 } else { golden_section(objective, 0.0, a_bar, 1e-8) };
    let tol = 1e-8 * (1.0 + a_bar);
    let (a_unc, regime) = if a_bar == 0.0 || a_unc <= tol {
        (0.0, Regime::ImmediateOnsite)
    } else if a_unc >= a_bar - tol {
        (a_bar, Regime::MaxAllowable)
    } else {
        (a_unc, Regime::Interior)
    };

    let Some(cap) = capacity else {
        return Ok(finish(a_unc, regime, 0.0));
    };
    let feas = feasibility(p)?;
    if !feas.feasible_for(cap) {
        return Err(Error::Infeasible { w_min: feas.w_min, capacity: cap });
    }
    if workloads(p, a_unc).w_t <= cap {
        return Ok(finish(a_unc, regime, 0.0));
    }
    if feas.w_min >= cap {
        return Ok(finish(feas.a_min, Regime::CapacityBinding, 0.0));
    }
    let (lo, hi) = if feas.a_min < a_unc { (feas.a_min, a_unc) } else { (a_unc, feas.a_min) };
    let a_c = bisect(|a| workloads(p, a).w_t - cap, lo, hi, 0.0)?;
    let dv = p.lambda * cost_rate_quadratic_deriv(p, &q, a_c);
    let dw = workload_derivs(p, a_c).w_t;
    Ok(finish(a_c, Regime::CapacityBinding, (-dv / dw).max(0.0)))
}
