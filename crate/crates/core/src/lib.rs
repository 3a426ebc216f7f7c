//! Optimal call-in thresholds and resource allocation for hybrid
//! on-site/remote hospital wards.
//!
//! Patient health scores follow drifted Brownian motions; a remote patient is
//! called in to the hospital when their score rises by the design threshold
//! `a`. The crate provides the closed-form analytics of that model, single-
//! and multi-type threshold optimizers under a shared resource capacity, a
//! discrete-event simulator with capacity-triggered patient swaps, and
//! parameter estimation from station-level length-of-stay data.
//!
//! Validation deliberately writes `!(v > 0.0)` style comparisons so NaN is
//! rejected along with wrong signs.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod error;
pub mod estimation;
pub mod lambert;
pub mod multitype;
pub mod params;
pub(crate) mod roots;
pub mod scenarios;
pub mod sim;
pub mod solver;

pub use error::{Error, Result};
pub use params::{DerivedCoeffs, PatientParams, QuadraticCoeffs, WorkloadCase};

#[cfg(test)]
pub(crate) mod testutil {
    use crate::params::PatientParams;
    use rand::Rng;

    pub use crate::scenarios::{
        crossing_pair, falling_workload, fast_hospital_surcharge, opposite_pair,
        quadratic_study, rising_workload, slow_hospital_surcharge, travel_study,
    };

    pub fn close_rel(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-12)
    }

    /// Random valid parameters with moderate scales (keeps rho*x small enough
    /// that closed forms and finite differences stay well conditioned).
    pub fn random_params<R: Rng>(rng: &mut R) -> PatientParams {
        let x = rng.gen_range(0.5..3.0);
        let travel_time = rng.gen_range(0.2..6.0);
        let theta_t = rng.gen_range(0.05..0.2);
        PatientParams {
            lambda: rng.gen_range(0.5..2.0),
            x,
            travel_time,
            theta_r: rng.gen_range(0.1..0.8),
            theta_h: rng.gen_range(0.05..1.0),
            theta_t,
            sigma_r: rng.gen_range(0.6..1.6),
            sigma_h: rng.gen_range(0.6..1.6),
            h_r: rng.gen_range(0.5..6.0),
            h_h: rng.gen_range(0.5..6.0),
            h_t: rng.gen_range(0.5..3.0),
            s_bar: x + travel_time * theta_t + rng.gen_range(2.0..8.0),
        }
    }
}
