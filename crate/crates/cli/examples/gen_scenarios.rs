//! Regenerates the shipped scenario files under `scenarios/` from the
//! library's benchmark definitions, plus the synthetic episode CSV used by
//! the estimate example. Run from the repository root:
//!
//! ```text
//! cargo run -p hybridward-cli --example gen_scenarios
//! ```

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, InverseGaussian, Normal};
use serde_json::json;

use hybridward::scenarios;
use hybridward::sim::step_path;

fn write(path: &Path, text: String) {
    fs::create_dir_all(path.parent().unwrap()).unwrap();
    fs::write(path, text).unwrap();
    println!("wrote {}", path.display());
}

fn pretty(value: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&value).unwrap();
    s.push('\n');
    s
}

fn main() {
    let root = Path::new("scenarios");

    // Swap-policy benchmarks, groups 1-4, variants a/b/c.
    for group in 1u8..=4 {
        for variant in ['a', 'b', 'c'] {
            let sim = scenarios::swap_benchmark(group, variant);
            let cfg = json!({
                "simulation": sim,
                "policy": "both",
                "event_log": false,
            });
            write(&root.join(format!("swap_benchmark_{group}{variant}.json")), pretty(cfg));
        }
    }

    // Single solve of the travel-study family.
    write(
        &root.join("solve_example.json"),
        pretty(json!({ "types": [scenarios::travel_study(2.0, 10.0)] })),
    );

    // Travel-time sweep reproducing the threshold window and peak.
    write(
        &root.join("travel_sweep.json"),
        pretty(json!({
            "types": [scenarios::travel_study(2.0, 10.0)],
            "sweep": { "variable": "T", "start": 0.5, "stop": 130.0, "step": 0.5 },
        })),
    );

    // Capacity sweeps: rising workload (threshold falls with scarcity) and
    // falling workload (threshold rises with scarcity).
    write(
        &root.join("capacity_sweep_rising.json"),
        pretty(json!({
            "types": [scenarios::rising_workload(2.0)],
            "sweep": { "variable": "C", "start": 2.45, "stop": 4.4, "step": 0.05 },
            "capacity": null,
        })),
    );
    write(
        &root.join("capacity_sweep_falling.json"),
        pretty(json!({
            "types": [scenarios::falling_workload(2.0)],
            "sweep": { "variable": "C", "start": 18.9, "stop": 20.9, "step": 0.05 },
        })),
    );

    // Surcharge sweep on the fast-hospital side.
    write(
        &root.join("surcharge_sweep.json"),
        pretty(json!({
            "types": [scenarios::fast_hospital_surcharge(14.0)],
            "sweep": { "variable": "Gamma", "start": 0.0, "stop": 3.0, "step": 0.25 },
        })),
    );

    // Quadratic-cost travel sweep.
    write(
        &root.join("quadratic_travel_sweep.json"),
        pretty(json!({
            "types": [scenarios::quadratic_study(2.0, 10.0)],
            "sweep": { "variable": "T", "start": 1.0, "stop": 129.0, "step": 2.0 },
            "objective": "quadratic",
        })),
    );

    // Two-type capacity sweep across the threshold crossing.
    write(
        &root.join("two_type_capacity_sweep.json"),
        pretty(json!({
            "types": scenarios::crossing_pair(),
            "sweep": { "variable": "C", "start": 7.2, "stop": 12.0, "step": 0.1 },
        })),
    );

    // Synthetic episode data with known ground truth:
    // theta_h=0.5, sigma_h=1.0, theta_r=0.25, sigma_r=1.0, theta_t=0.12,
    // x=1.0, a=1.5, T=3.0.
    let mut rng = ChaCha8Rng::seed_from_u64(20240822);
    let mut csv = String::from(
        "type,station,los,called_in,score_before_travel,score_after_travel,T\n",
    );
    let ig = InverseGaussian::new(1.0 / 0.5, 1.0).unwrap(); // IG(x/theta_h, x^2/sigma_h^2)
    for _ in 0..2500 {
        let los: f64 = ig.sample(&mut rng);
        csv.push_str(&format!("0,onsite,{los:.6},,,,\n"));
    }
    let (x, a, dt) = (1.0, 1.5, 1e-3);
    for _ in 0..3000 {
        let mut s = x;
        let mut t = 0.0;
        let called = loop {
            let out = step_path(s, 0.25, 1.0, dt, Some(x + a), true, &mut rng);
            t += dt;
            s = out.score;
            if out.hit_upper {
                break 1;
            }
            if out.hit_lower {
                break 0;
            }
        };
        csv.push_str(&format!("0,remote,{t:.4},{called},,,\n"));
    }
    let noise = Normal::new(0.0, 0.25).unwrap();
    for _ in 0..1200 {
        let before = rng.gen_range(0.5..3.0);
        let after = before + 0.12 * 3.0 + noise.sample(&mut rng);
        csv.push_str(&format!("0,travel,,,{before:.6},{after:.6},3.0\n"));
    }
    write(&root.join("data/episodes.csv"), csv);

    write(
        &root.join("estimate_example.json"),
        pretty(json!({ "data": "data/episodes.csv", "x": 1.0, "a": 1.5 })),
    );
}
