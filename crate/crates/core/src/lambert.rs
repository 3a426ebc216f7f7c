//! Principal-branch Lambert W function.
//!
//! Halley iteration from a branch-appropriate initial guess; converges to a
//! residual `|W e^W - z|` at machine precision for `z >= -1/e`.

use crate::error::{Error, Result};

const NEG_INV_E: f64 = -0.36787944117144233; // -1/e

/// Principal branch `W(z)` for `z >= -1/e`, so `W(z) >= -1`.
pub fn lambert_w(z: f64) -> Result<f64> {
    if !z.is_finite() {
        return Err(Error::Domain(format!("lambert_w: non-finite argument {z}")));
    }
    if z < NEG_INV_E {
        // Allow a hair of floating-point slip at the branch point.
        if z > NEG_INV_E * (1.0 + 1e-12) - 1e-300 {
            return Ok(-1.0);
        }
        return Err(Error::Domain(format!(
            "lambert_w: argument {z} below branch point -1/e"
        )));
    }
    if z == 0.0 {
        return Ok(0.0);
    }

    let mut w = initial_guess(z);
    // Halley's method on f(w) = w e^w - z.
    for _ in 0..60 {
        let ew = w.exp();
        let f = w * ew - z;
        if f.abs() <= 1e-16 * (z.abs() + (w * ew).abs()) + 1e-300 {
            break;
        }
        let w1 = w + 1.0;
        let denom = ew * w1 - (w + 2.0) * f / (2.0 * w1);
        let step = f / denom;
        let new = w - step;
        // For z in (-1/e, 0) the principal branch lives in (-1, 0).
        w = if z < 0.0 { new.clamp(-1.0, -1e-300) } else { new.max(-1.0) };
        if step.abs() <= 1e-16 * (1.0 + w.abs()) {
            break;
        }
    }
    Ok(w)
}

fn initial_guess(z: f64) -> f64 {
    if z < -0.25 {
        // Series around the branch point: W = -1 + p - p^2/3 + 11 p^3/72, with
        // p = sqrt(2 (e z + 1)).
        let p = (2.0 * (std::f64::consts::E * z + 1.0)).max(0.0).sqrt();
        -1.0 + p - p * p / 3.0 + 11.0 * p * p * p / 72.0
    } else if z < std::f64::consts::E {
        // ln(1+z) is within a few percent on this range and safely above -1.
        z.ln_1p()
    } else {
        // Asymptotic expansion for large z.
        let l1 = z.ln();
        let l2 = l1.ln();
        l1 - l2 + l2 / l1
    }
}
