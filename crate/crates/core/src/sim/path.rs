//! Euler stepping of a health-score path with barrier-crossing correction.

use rand::Rng;
use rand_distr::StandardNormal;

/// Result of advancing a score by one time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub score: f64,
    pub hit_lower: bool,
    pub hit_upper: bool,
}

/// Exponents above this make the bridge hit probability smaller than
/// e^{-40}; skip the draw entirely.
const BRIDGE_EXPONENT_CUTOFF: f64 = 40.0;

/// Advance a downward-drifting score by `dt`: Euler increment
/// `-drift dt + sigma sqrt(dt) N(0,1)`, absorption at 0 and optionally at
/// `upper`. With `bridge` on and neither endpoint beyond a barrier, an
/// in-step crossing is additionally sampled with the Brownian-bridge hit
/// probability `exp(-2 (b - s)(b - s') / (sigma^2 dt))`.
pub fn step_path<R: Rng + ?Sized>(
    score: f64,
    drift: f64,
    sigma: f64,
    dt: f64,
    upper: Option<f64>,
    bridge: bool,
    rng: &mut R,
) -> StepOutcome {
    debug_assert!(dt > 0.0);
    let noise = if sigma > 0.0 {
        let z: f64 = rng.sample(StandardNormal);
        sigma * dt.sqrt() * z
    } else {
        0.0
    };
    let next = score - drift * dt + noise;

    if let Some(b) = upper {
        if next >= b {
            return StepOutcome { score: b, hit_lower: false, hit_upper: true };
        }
    }
    if next <= 0.0 {
        return StepOutcome { score: 0.0, hit_lower: true, hit_upper: false };
    }

    if bridge && sigma > 0.0 {
        let s2dt = sigma * sigma * dt;
        let q_up = upper
            .map(|b| {
                let e = 2.0 * (b - score) * (b - next) / s2dt;
                if e > BRIDGE_EXPONENT_CUTOFF {
                    0.0
                } else {
                    (-e).exp()
                }
            })
            .unwrap_or(0.0);
        let e_low = 2.0 * score * next / s2dt;
        let q_low = if e_low > BRIDGE_EXPONENT_CUTOFF { 0.0 } else { (-e_low).exp() };
        if q_up > 0.0 || q_low > 0.0 {
            let u: f64 = rng.gen();
            if u < q_up {
                return StepOutcome {
                    score: upper.unwrap(),
                    hit_lower: false,
                    hit_upper: true,
                };
            }
            if u < q_up + q_low {
                return StepOutcome { score: 0.0, hit_lower: true, hit_upper: false };
            }
        }
    }
    StepOutcome { score: next, hit_lower: false, hit_upper: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{call_in_prob, elos_remote};
    use rand::SeedableRng;

    #[test]
    fn zero_sigma_decays_deterministically() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let out = step_path(1.0, 0.25, 0.0, 0.01, Some(2.0), true, &mut rng);
        assert_eq!(out.score, 1.0 - 0.25 * 0.01);
        assert!(!out.hit_lower && !out.hit_upper);
    }

    /// Two-barrier exit statistics against the closed forms. A smaller copy
    /// of the acceptance check; 2e4 paths keeps it under a second.
    #[test]
    fn two_barrier_exit_matches_closed_forms() {
        for (seed, rho_theta, sigma, x, a) in
            [(11u64, 0.5f64, 1.0f64, 1.0f64, 1.2f64), (12, 0.9, 0.8, 0.7, 0.8)]
        {
            let theta = rho_theta;
            let rho = 2.0 * theta / (sigma * sigma);
            let n = 20_000;
            let dt = 1e-3;
            let upper = x + a;
            let mut hits = 0u64;
            let mut total_t = 0.0;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..n {
                let mut s = x;
                let mut t = 0.0;
                loop {
                    let out = step_path(s, theta, sigma, dt, Some(upper), true, &mut rng);
                    t += dt;
                    s = out.score;
                    if out.hit_upper {
                        hits += 1;
                        break;
                    }
                    if out.hit_lower {
                        break;
                    }
                }
                total_t += t;
            }
            let p_hat = hits as f64 / n as f64;
            let p = call_in_prob(rho, x, a);
            let se_p = (p * (1.0 - p) / n as f64).sqrt();
            assert!(
                (p_hat - p).abs() <= 3.0 * se_p + 2.0 * dt,
                "exit side: {p_hat} vs {p} (se {se_p})"
            );
            let mean_t = total_t / n as f64;
            let m = elos_remote(rho, theta, x, a);
            // Crude dispersion bound for the exit time suffices here.
            let se_t = m / (n as f64).sqrt() * 2.0;
            assert!(
                (mean_t - m).abs() <= 3.0 * se_t + 2.0 * dt,
                "exit time: {mean_t} vs {m}"
            );
        }
    }
}
