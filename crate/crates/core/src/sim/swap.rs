//! Swap selection when a called-in patient finds no free on-site slot.

use serde::{Deserialize, Serialize};

use crate::analytics::call_in_prob;
use crate::params::PatientParams;

/// How to pick the on-site patient sent home to free a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Policy {
    /// Policy 1: swap the patient with the best (lowest) current score.
    BestScore,
    /// Policy 2: swap the patient with the smallest expected cost to finish
    /// treatment remotely.
    CostIndex,
}

/// Expected cost for an on-site patient to complete treatment at home:
/// remaining remote holding from the post-travel score `s_j`, the trip home,
/// and, on a repeat call-in, the trip back plus on-site holding.
///
/// `s_j` is the expected score after traveling home (current score plus
/// `theta_t * T`); `a_j` is the patient's design threshold, so the repeat
/// call-in barrier is `s_j + a_j`.
pub fn swap_index(p: &PatientParams, s_j: f64, a_j: f64) -> f64 {
    let t = p.travel_time;
    if s_j <= 0.0 {
        return p.h_t * t;
    }
    let rho = 2.0 * p.theta_r / (p.sigma_r * p.sigma_r);
    let pc = call_in_prob(rho, s_j, a_j);
    let remote = p.h_r / p.theta_r * ((1.0 - pc) * s_j - pc * a_j);
    let onsite_again = p.h_t * t + p.h_h / p.theta_h * (a_j + s_j + p.theta_t * t);
    remote + p.h_t * t + onsite_again * pc
}

/// An on-site patient eligible for a swap (never swapped before).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapCandidate {
    pub id: u64,
    pub admitted_at: f64,
    pub score: f64,
    pub cost_index: f64,
}

/// Pick the patient to send home: lowest score (Policy 1) or lowest cost
/// index (Policy 2), ties broken by earliest admission, then lowest id.
pub fn select_swap(policy: Policy, eligible: &[SwapCandidate]) -> Option<u64> {
    eligible
        .iter()
        .min_by(|a, b| {
            let key_a = match policy {
                Policy::BestScore => a.score,
                Policy::CostIndex => a.cost_index,
            };
            let key_b = match policy {
                Policy::BestScore => b.score,
                Policy::CostIndex => b.cost_index,
            };
            key_a
                .total_cmp(&key_b)
                .then(a.admitted_at.total_cmp(&b.admitted_at))
                .then(a.id.cmp(&b.id))
        })
        .map(|c| c.id)
}
