//! K-type resource allocation: shared capacity split across heterogeneous
//! patient types through a common shadow price, plus a brute-force oracle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{cost_rate, cost_rate_deriv, workload_derivs, workloads, Workloads};
use crate::error::{Error, Result};
use crate::params::PatientParams;
use crate::solver::{feasibility, solve_uncapacitated, FeasibilitySummary};

/// A population of patient types competing for one pool of resources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiInstance {
    pub types: Vec<PatientParams>,
    pub capacity: f64,
}

impl MultiInstance {
    pub fn validate(&self) -> Result<()> {
        if self.types.is_empty() {
            return Err(Error::InvalidParams("at least one patient type required".into()));
        }
        if !(self.capacity > 0.0) {
            return Err(Error::InvalidParams(format!(
                "capacity must be positive, got {}",
                self.capacity
            )));
        }
        for t in &self.types {
            t.validate()?;
        }
        Ok(())
    }
}

/// Per-type workload minima and the joint feasibility verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiFeasibility {
    pub per_type: Vec<FeasibilitySummary>,
    pub total_min_workload: f64,
    pub feasible: bool,
}

/// Solution of the multi-type allocation problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MultiSolution {
    pub a_star: Vec<f64>,
    /// Common shadow price; zero when the unconstrained optimum is feasible.
    pub gamma_shadow: f64,
    /// Indices whose threshold is strictly between its per-type bounds.
    pub interior_set: Vec<usize>,
    pub per_type_workloads: Vec<Workloads>,
    pub per_type_costs: Vec<f64>,
    pub total_cost: f64,
    pub total_workload: f64,
    pub constraint_active: bool,
}

/// Residuals of the optimality conditions for a proposed solution.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KktReport {
    pub pass: bool,
    /// Violation of betweenness per type (zero when inside with slack).
    pub betweenness_violation: Vec<f64>,
    /// `|sum_k W_T^k(a_k) - C|` when the constraint should be active.
    pub constraint_residual: f64,
    pub constraint_active: bool,
    /// `|Gamma + V_k'/W_T^k'|` per interior index.
    pub stationarity_residual: Vec<(usize, f64)>,
}

/// Per-type feasibility rolled up to the instance level.
pub fn multi_feasibility(inst: &MultiInstance) -> Result<MultiFeasibility> {
    inst.validate()?;
    let per_type: Vec<FeasibilitySummary> =
        inst.types.iter().map(feasibility).collect::<Result<_>>()?;
    let total: f64 = per_type.iter().map(|f| f.w_min).sum();
    Ok(MultiFeasibility { per_type, total_min_workload: total, feasible: total <= inst.capacity })
}

struct TypeBounds {
    lo: f64,
    hi: f64,
    a_min: f64,
    a_inf: f64,
}

fn per_type_bounds(inst: &MultiInstance) -> Result<Vec<TypeBounds>> {
    inst.types
        .iter()
        .map(|p| {
            let f = feasibility(p)?;
            let u = solve_uncapacitated(p)?;
            Ok(TypeBounds {
                lo: f.a_min.min(u.a_star),
                hi: f.a_min.max(u.a_star),
                a_min: f.a_min,
                a_inf: u.a_star,
            })
        })
        .collect()
}

/// Thresholds chosen by each type when both holding costs carry a common
/// surcharge, clamped into the interval between that type's workload
/// minimizer and unconstrained optimum.
fn thresholds_at_surcharge(
    inst: &MultiInstance,
    bounds: &[TypeBounds],
    g: f64,
) -> Result<Vec<f64>> {
    inst.types
        .iter()
        .zip(bounds)
        .map(|(p, b)| {
            let s = solve_uncapacitated(&p.with_holding_costs(p.h_r + g, p.h_h + g))?;
            Ok(s.a_star.clamp(b.lo, b.hi))
        })
        .collect()
}

fn assemble(inst: &MultiInstance, bounds: &[TypeBounds], a: Vec<f64>, gamma: f64) -> MultiSolution {
    let per_type_workloads: Vec<Workloads> =
        inst.types.iter().zip(&a).map(|(p, &ai)| workloads(p, ai)).collect();
    let per_type_costs: Vec<f64> =
        inst.types.iter().zip(&a).map(|(p, &ai)| cost_rate(p, ai)).collect();
    let total_workload = per_type_workloads.iter().map(|w| w.w_t).sum();
    let interior_set = a
        .iter()
        .zip(bounds)
        .enumerate()
        .filter(|(_, (&ai, b))| {
            let tol = 1e-7 * (1.0 + b.hi);
            (ai - b.a_min).abs() > tol && (ai - b.a_inf).abs() > tol
        })
        .map(|(k, _)| k)
        .collect();
    MultiSolution {
        a_star: a,
        gamma_shadow: gamma,
        interior_set,
        total_cost: per_type_costs.iter().sum(),
        per_type_workloads,
        per_type_costs,
        total_workload,
        constraint_active: gamma > 0.0,
    }
}

/// Optimal thresholds for all types under the shared capacity.
///
/// If the per-type unconstrained optima are jointly feasible they are
/// returned with a zero shadow price. Otherwise the common surcharge is
/// bisected until the summed workload meets the capacity.
pub fn solve_multitype(inst: &MultiInstance) -> Result<MultiSolution> {
    let feas = multi_feasibility(inst)?;
    if !feas.feasible {
        return Err(Error::Infeasible { w_min: feas.total_min_workload, capacity: inst.capacity });
    }
    let bounds = per_type_bounds(inst)?;

    let sum_at =
        |a: &[f64]| -> f64 { inst.types.iter().zip(a).map(|(p, &ai)| workloads(p, ai).w_t).sum() };

    let unconstrained: Vec<f64> = bounds.iter().map(|b| b.a_inf).collect();
    if sum_at(&unconstrained) <= inst.capacity {
        return Ok(assemble(inst, &bounds, unconstrained, 0.0));
    }

    // Bracket the surcharge: the workload sum starts above C at g = 0 and
    // falls toward the feasible minimum as g grows.
    let mut hi = 1.0;
    let mut found = false;
    for _ in 0..60 {
        let a = thresholds_at_surcharge(inst, &bounds, hi)?;
        if sum_at(&a) <= inst.capacity {
            found = true;
            break;
        }
        hi *= 2.0;
    }
    if !found {
        // Existence is guaranteed but the sum is not proven monotone in the
        // surcharge; fall back to the oracle at small K rather than return a
        // wrong answer.
        if inst.types.len() <= 3 {
            return brute_force_multitype(inst, 400);
        }
        return Err(Error::Bracket(
            "surcharge search failed to bracket the capacity and K > 3".into(),
        ));
    }

    let mut lo = 0.0;
    for _ in 0..crate::roots::MAX_ITER {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let a = thresholds_at_surcharge(inst, &bounds, mid)?;
        if sum_at(&a) > inst.capacity {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let gamma = hi;
    let mut a = thresholds_at_surcharge(inst, &bounds, gamma)?;

    // The bisected surcharge leaves a float-level workload residual; close it
    // by re-solving one type's threshold against the leftover capacity.
    let resid = inst.capacity - sum_at(&a);
    if resid.abs() > 1e-12 * inst.capacity {
        for (k, b) in bounds.iter().enumerate() {
            let others: f64 = a
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(j, &aj)| workloads(&inst.types[j], aj).w_t)
                .sum();
            let target = inst.capacity - others;
            let wk = |ak: f64| workloads(&inst.types[k], ak).w_t - target;
            if wk(b.lo) * wk(b.hi) <= 0.0 {
                if let Ok(root) = crate::roots::bisect(wk, b.lo, b.hi, 0.0) {
                    a[k] = root;
                    break;
                }
            }
        }
    }

    Ok(assemble(inst, &bounds, a, gamma))
}

/// Verify the structural optimality conditions of a proposed solution:
/// per-type betweenness, an active constraint when the unconstrained optimum
/// is infeasible, and a common multiplier on the interior set.
pub fn kkt_check(inst: &MultiInstance, sol: &MultiSolution) -> Result<KktReport> {
    let bounds = per_type_bounds(inst)?;
    let mut betweenness = Vec::with_capacity(bounds.len());
    for (b, &ak) in bounds.iter().zip(&sol.a_star) {
        let slack = 1e-7 * (1.0 + b.hi);
        let viol = (b.lo - ak).max(ak - b.hi).max(0.0);
        betweenness.push(if viol <= slack { 0.0 } else { viol });
    }

    let total: f64 =
        sol.a_star.iter().zip(&inst.types).map(|(&ak, p)| workloads(p, ak).w_t).sum();
    let sum_inf: f64 =
        bounds.iter().zip(&inst.types).map(|(b, p)| workloads(p, b.a_inf).w_t).sum();
    let unconstrained_feasible = sum_inf <= inst.capacity;
    let constraint_residual =
        if unconstrained_feasible { 0.0 } else { (total - inst.capacity).abs() };

    let mut stationarity = Vec::new();
    for &k in &sol.interior_set {
        let p = &inst.types[k];
        let dv = cost_rate_deriv(p, sol.a_star[k]);
        let dw = workload_derivs(p, sol.a_star[k]).w_t;
        stationarity.push((k, (sol.gamma_shadow + dv / dw).abs()));
    }

    let gamma_scale = sol.gamma_shadow.max(1e-12);
    let pass = betweenness.iter().all(|&v| v == 0.0)
        && constraint_residual <= 1e-8 * inst.capacity
        && stationarity.iter().all(|&(_, r)| r <= 1e-6 * gamma_scale);
    Ok(KktReport {
        pass,
        betweenness_violation: betweenness,
        constraint_residual,
        constraint_active: !unconstrained_feasible,
        stationarity_residual: stationarity,
    })
}

/// Exhaustive grid search over the per-type intervals between the workload
/// minimizer and the unconstrained optimum (the solution is known to lie
/// there). Verification oracle; `K <= 3` only.
pub fn brute_force_multitype(inst: &MultiInstance, grid_n: usize) -> Result<MultiSolution> {
    let feas = multi_feasibility(inst)?;
    if !feas.feasible {
        return Err(Error::Infeasible { w_min: feas.total_min_workload, capacity: inst.capacity });
    }
    let k = inst.types.len();
    if k > 3 {
        return Err(Error::Unsupported(format!("brute force supports K <= 3, got {k}")));
    }
    if grid_n < 2 {
        return Err(Error::InvalidParams("grid_n must be at least 2".into()));
    }
    let bounds = per_type_bounds(inst)?;

    // Precompute workload and cost along each axis.
    let axes: Vec<(Vec<f64>, Vec<f64>, Vec<f64>)> = inst
        .types
        .par_iter()
        .zip(&bounds)
        .map(|(p, b)| {
            let mut grid = Vec::with_capacity(grid_n);
            let mut w = Vec::with_capacity(grid_n);
            let mut v = Vec::with_capacity(grid_n);
            for i in 0..grid_n {
                let a = b.lo + (b.hi - b.lo) * i as f64 / (grid_n - 1) as f64;
                grid.push(a);
                w.push(workloads(p, a).w_t);
                v.push(cost_rate(p, a));
            }
            (grid, w, v)
        })
        .collect();

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut idx = vec![0usize; k];
    'outer: loop {
        let w: f64 = (0..k).map(|t| axes[t].1[idx[t]]).sum();
        if w <= inst.capacity {
            let v: f64 = (0..k).map(|t| axes[t].2[idx[t]]).sum();
            if best.as_ref().is_none_or(|(bv, _)| v < *bv) {
                best = Some((v, idx.clone()));
            }
        }
        // Odometer increment over the K-dimensional grid.
        for digit in idx.iter_mut() {
            *digit += 1;
            if *digit < grid_n {
                continue 'outer;
            }
            *digit = 0;
        }
        break;
    }

    let (_, best_idx) = best.ok_or_else(|| {
        Error::Bracket("no feasible grid point; grid too coarse for this instance".into())
    })?;
    let a: Vec<f64> = (0..k).map(|t| axes[t].0[best_idx[t]]).collect();
    let total_w: f64 = (0..k).map(|t| axes[t].1[best_idx[t]]).sum();
    let active = (total_w - inst.capacity).abs() < 2.0 / grid_n as f64 * inst.capacity;
    let mut sol = assemble(inst, &bounds, a, 0.0);
    sol.constraint_active = active;
    Ok(sol)
}
