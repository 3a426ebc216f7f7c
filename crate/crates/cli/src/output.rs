//! Deterministic numeric formatting and file emission.

use std::path::Path;

/// Format with 10 significant digits, '.' decimal separator, no locale.
/// The value is rounded to 10 significant digits and printed in the shortest
/// decimal form that round-trips.
pub fn sig10(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "NaN".to_string()
        } else if v > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let exp = v.abs().log10().floor() as i32;
    if exp.abs() > 200 {
        return format!("{:.9e}", v);
    }
    let scale = 10f64.powi(9 - exp);
    let rounded = (v * scale).round() / scale;
    format!("{rounded}")
}

pub fn write_text(path: Option<&Path>, text: &str) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn json_pretty<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

/// Sibling path with an extra suffix before the extension-less name,
/// e.g. `out.json` -> `out.reps.csv`.
pub fn sibling(path: &Path, suffix: &str) -> std::path::PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    path.with_file_name(format!("{stem}.{suffix}"))
}
