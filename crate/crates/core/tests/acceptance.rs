//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with the measured numbers (run with `--nocapture` to see them).

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Distribution;
use rayon::prelude::*;

use hybridward::analytics::{
    call_in_prob, central_diff, cost_rate, cost_rate_quadratic, cost_rate_quadratic_coeff,
    elos_remote, second_moments,
};
use hybridward::estimation::{fit_onsite, fit_remote, fit_travel};
use hybridward::multitype::{brute_force_multitype, kkt_check, solve_multitype, MultiInstance};
use hybridward::params::{DerivedCoeffs, PatientParams, QuadraticCoeffs};
use hybridward::scenarios;
use hybridward::sim::{
    compare_policies, simulate, step_path, Policy, SimConfig,
};
use hybridward::solver::{
    feasibility, foc_residual, solve_capacitated, solve_quadratic, solve_uncapacitated,
    travel_profile, verify_gamma_equivalence, Regime,
};

fn pass(criterion: u32, details: String) {
    println!("criterion {criterion}: PASS - {details}");
}

/// Random parameters kept well conditioned (moderate rho*x) for closed-form
/// versus oracle comparisons.
fn draw_params(rng: &mut ChaCha8Rng) -> PatientParams {
    let x = rng.gen_range(0.5..2.5);
    let travel_time = rng.gen_range(0.2..6.0);
    let theta_t = rng.gen_range(0.05..0.2);
    PatientParams {
        lambda: rng.gen_range(0.5..2.0),
        x,
        travel_time,
        theta_r: rng.gen_range(0.1..0.5),
        theta_h: rng.gen_range(0.05..1.0),
        theta_t,
        sigma_r: rng.gen_range(0.8..1.4),
        sigma_h: rng.gen_range(0.6..1.6),
        h_r: rng.gen_range(0.5..6.0),
        h_h: rng.gen_range(0.5..6.0),
        h_t: rng.gen_range(0.5..3.0),
        s_bar: x + travel_time * theta_t + rng.gen_range(2.0..8.0),
    }
}

#[test]
fn criterion_01_closed_form_vs_monte_carlo() {
    let start = Instant::now();
    let n_paths = 100_000usize;
    let dt = 1e-3;
    let sets: Vec<(f64, f64, f64, f64)> = {
        let mut rng = ChaCha8Rng::seed_from_u64(101);
        (0..20)
            .map(|_| {
                (
                    rng.gen_range(0.3..0.9),  // theta_r
                    rng.gen_range(0.8..1.3),  // sigma_r
                    rng.gen_range(0.4..1.2),  // x
                    rng.gen_range(0.5..2.0),  // a
                )
            })
            .collect()
    };
    let worst: Vec<(f64, f64)> = sets
        .par_iter()
        .enumerate()
        .map(|(i, &(theta, sigma, x, a))| {
            let rho = 2.0 * theta / (sigma * sigma);
            let mut rng = ChaCha8Rng::seed_from_u64(7000 + i as u64);
            let upper = x + a;
            let mut hits = 0u64;
            let mut sum_t = 0.0;
            let mut sum_t2 = 0.0;
            for _ in 0..n_paths {
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
                sum_t += t;
                sum_t2 += t * t;
            }
            let n = n_paths as f64;
            let p_hat = hits as f64 / n;
            let p = call_in_prob(rho, x, a);
            let se_p = (p * (1.0 - p) / n).sqrt();
            let z_p = (p_hat - p).abs() / se_p;

            let m_hat = sum_t / n;
            let m = elos_remote(rho, theta, x, a);
            let var_t = (sum_t2 / n - m_hat * m_hat).max(1e-300);
            let se_m = (var_t / n).sqrt();
            let z_m = (m_hat - m).abs() / se_m;
            assert!(z_p <= 3.0, "set {i}: exit-side deviation {z_p:.2} se (p_hat {p_hat} vs {p})");
            assert!(z_m <= 3.0, "set {i}: exit-time deviation {z_m:.2} se (mean {m_hat} vs {m})");
            (z_p, z_m)
        })
        .collect();
    let max_zp = worst.iter().map(|w| w.0).fold(0.0, f64::max);
    let max_zm = worst.iter().map(|w| w.1).fold(0.0, f64::max);
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 120.0, "runtime {elapsed:.1}s exceeds 2 minutes");
    pass(
        1,
        format!(
            "20 sets x 1e5 paths: max |z| = {max_zp:.2} (exit side), {max_zm:.2} (exit time), {elapsed:.1}s"
        ),
    );
}

#[test]
fn criterion_02_marginal_cost_gap_value() {
    let p = scenarios::travel_study(2.0, 10.0);
    let c = DerivedCoeffs::from_params(&p).unwrap();
    let rel = (c.gamma - (-32.0)).abs() / 32.0;
    assert!(rel <= 1e-12, "gamma = {} (rel err {rel})", c.gamma);
    pass(2, format!("gamma = {} (relative error {rel:.2e})", c.gamma));
}

#[test]
fn criterion_03_workload_shape_boundary_value() {
    let p = PatientParams {
        theta_r: 0.2,
        theta_h: 0.5,
        ..scenarios::rising_workload(2.0)
    };
    let c = DerivedCoeffs::from_params(&p).unwrap();
    let ratio = p.theta_h / p.theta_r;
    assert!((ratio - 2.5).abs() < 1e-12);
    assert!((c.delta + 1.0 - 2.14).abs() <= 0.01, "delta + 1 = {}", c.delta + 1.0);
    pass(3, format!("theta_h/theta_r = {ratio}, delta + 1 = {:.4}", c.delta + 1.0));
}

#[test]
fn criterion_04_interior_first_order_condition_and_grid() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut interiors = Vec::new();
    let mut tried = 0;
    while interiors.len() < 50 && tried < 20_000 {
        tried += 1;
        let p = draw_params(&mut rng);
        if let Ok(s) = solve_uncapacitated(&p) {
            if s.regime == Regime::Interior {
                interiors.push((p, s));
            }
        }
    }
    assert_eq!(interiors.len(), 50, "could not draw 50 interior instances");
    let mut max_resid = 0.0f64;
    for (p, s) in &interiors {
        let r = foc_residual(p, s.a_star).unwrap().abs();
        assert!(r < 1e-10, "FOC residual {r} at a* = {}", s.a_star);
        max_resid = max_resid.max(r);
        let a_bar = p.a_bar();
        let mut best = f64::INFINITY;
        for i in 0..=100_000u32 {
            let a = a_bar * i as f64 / 100_000.0;
            let v = cost_rate(p, a);
            if v < best {
                best = v;
            }
        }
        assert!(
            s.cost <= best + 1e-8 * s.cost.abs(),
            "grid found cost {best} below solver's {}",
            s.cost
        );
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 60.0, "runtime {elapsed:.1}s exceeds 1 minute");
    pass(
        4,
        format!("50 interior optima: max FOC residual {max_resid:.2e}, grid never better, {elapsed:.1}s"),
    );
}

#[test]
fn criterion_05_travel_time_structure() {
    // The threshold-maximizing travel time must agree across initial scores.
    let mut hats = Vec::new();
    for x in [2.0, 4.0, 6.0] {
        let p = scenarios::travel_study(x, 10.0);
        let tp = travel_profile(&p, &[1.0, 2.0]).unwrap();
        hats.push(tp.t_hat.unwrap());
    }
    assert!((hats[0] - hats[1]).abs() < 1e-8 && (hats[0] - hats[2]).abs() < 1e-8);

    let p = scenarios::travel_study(2.0, 10.0);
    let grid: Vec<f64> = (0..=540).map(|i| 0.25 * i as f64).collect();
    let tp = travel_profile(&p, &grid).unwrap();
    let (t_lb, t_ub, t_hat) = (tp.t_lb.unwrap(), tp.t_ub, tp.t_hat.unwrap());

    // Zero outside the window; one rise then one fall inside.
    let mut fell = false;
    let mut prev: Option<f64> = None;
    for s in &tp.samples {
        if s.t <= t_lb || s.t >= t_ub {
            assert_eq!(s.a_star, 0.0, "nonzero threshold outside window at t = {}", s.t);
            continue;
        }
        if let Some(pv) = prev {
            if s.a_star < pv {
                fell = true;
            } else if s.a_star > pv {
                assert!(!fell, "threshold rose after falling at t = {}", s.t);
            }
        }
        prev = Some(s.a_star);
    }
    assert!(fell);

    // Closed-form sensitivity versus finite differences on both branches.
    let mut max_err = 0.0f64;
    for s in &tp.samples {
        if s.t <= t_lb + 0.5 || s.t >= t_ub - 0.5 || (s.t - t_hat).abs() < 0.5 {
            continue;
        }
        let fd = central_diff(
            |t| {
                let q = PatientParams { travel_time: t, ..p.clone() };
                solve_uncapacitated(&q).unwrap().a_star
            },
            s.t,
        );
        let cf = s.da_dt.unwrap();
        let err = (cf - fd).abs() / cf.abs().max(1.0);
        assert!(err <= 1e-5, "t = {}: closed {cf} vs fd {fd}", s.t);
        max_err = max_err.max(err);
    }
    pass(
        5,
        format!(
            "window ({t_lb:.4}, {t_ub}), peak at {t_hat:.6} (consistent across x to 1e-8), max sensitivity error {max_err:.2e}"
        ),
    );
}

#[test]
fn criterion_06_capacitated_solution_and_shadow_price() {
    let mut rng = ChaCha8Rng::seed_from_u64(606);
    let mut done = 0;
    let mut tried = 0;
    let mut max_w_resid = 0.0f64;
    let mut max_eq_diff = 0.0f64;
    while done < 50 && tried < 20_000 {
        tried += 1;
        let p = draw_params(&mut rng);
        let Ok(f) = feasibility(&p) else { continue };
        let Ok(u) = solve_uncapacitated(&p) else { continue };
        if (u.workloads.w_t - f.w_min).abs() < 1e-3 {
            continue;
        }
        let c = f.w_min + rng.gen_range(0.1..0.9) * (u.workloads.w_t - f.w_min);
        if c <= f.w_min || c >= u.workloads.w_t {
            continue;
        }
        let s = solve_capacitated(&p, c).unwrap();
        let w_resid = (s.workloads.w_t - c).abs();
        assert!(w_resid < 1e-8 * c, "workload residual {w_resid} at C = {c}");
        let (lo, hi) = if f.a_min < u.a_star { (f.a_min, u.a_star) } else { (u.a_star, f.a_min) };
        assert!(s.a_star > lo && s.a_star < hi, "not strictly between: {} in ({lo}, {hi})", s.a_star);
        let r = verify_gamma_equivalence(&p, c).unwrap();
        assert!(r.abs_diff < 1e-8, "surcharged re-solve differs by {}", r.abs_diff);
        max_w_resid = max_w_resid.max(w_resid / c);
        max_eq_diff = max_eq_diff.max(r.abs_diff);
        done += 1;
    }
    assert_eq!(done, 50, "only {done} binding instances in {tried} draws");
    pass(
        6,
        format!(
            "50 binding instances: max workload residual {max_w_resid:.2e} (rel), max surcharge-equivalence gap {max_eq_diff:.2e}"
        ),
    );
}

#[test]
fn criterion_07_capacity_sweep_directions() {
    // Rising-workload family: threshold falls as capacity shrinks.
    let p = scenarios::rising_workload(2.0);
    let ample = solve_capacitated(&p, 4.0).unwrap();
    assert!((ample.a_star - 4.0).abs() <= 0.2, "ample-capacity a* = {}", ample.a_star);
    let f2 = feasibility(&p).unwrap();
    assert!((f2.w_min - 2.5).abs() <= 0.1 + 1e-9, "boundary at T=2: {}", f2.w_min);
    let f8 = feasibility(&scenarios::rising_workload(8.0)).unwrap();
    assert!((f8.w_min - 3.3).abs() <= 0.1, "boundary at T=8: {}", f8.w_min);
    let mut last = ample.a_star;
    let mut c = 3.9;
    while c > f2.w_min + 0.05 {
        let s = solve_capacitated(&p, c).unwrap();
        assert!(s.a_star < last, "a* must fall as C shrinks (C = {c})");
        last = s.a_star;
        c -= 0.1;
    }

    // Falling-workload family: threshold rises as capacity shrinks.
    let q = scenarios::falling_workload(2.0);
    let unc = solve_uncapacitated(&q).unwrap();
    let fq = feasibility(&q).unwrap();
    let mut last = unc.a_star;
    let mut rises = 0;
    for i in 1..=8 {
        let c = unc.workloads.w_t - (unc.workloads.w_t - fq.w_min) * i as f64 / 9.0;
        let s = solve_capacitated(&q, c).unwrap();
        assert!(s.a_star >= last, "a* must rise as C shrinks");
        rises += (s.a_star > last) as u32;
        last = s.a_star;
    }
    assert!(rises >= 7);
    pass(
        7,
        format!(
            "rising family: a*_ample = {:.3}, boundaries {:.3}/{:.3}; falling family rises monotonically",
            ample.a_star, f2.w_min, f8.w_min
        ),
    );
}

#[test]
fn criterion_08_multi_type_oracle() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    let mut done = 0;
    let mut tried = 0;
    let mut max_gap = 0.0f64;
    while done < 20 && tried < 10_000 {
        tried += 1;
        let t1 = draw_params(&mut rng);
        let t2 = draw_params(&mut rng);
        let probe = MultiInstance { types: vec![t1, t2], capacity: 1e9 };
        let Ok(unc) = solve_multitype(&probe) else { continue };
        let Ok(f) = hybridward::multitype::multi_feasibility(&probe) else { continue };
        if unc.total_workload - f.total_min_workload < 1e-2 {
            continue;
        }
        let c = f.total_min_workload
            + rng.gen_range(0.15..0.85) * (unc.total_workload - f.total_min_workload);
        let inst = MultiInstance { capacity: c, ..probe };
        let sol = solve_multitype(&inst).unwrap();
        let report = kkt_check(&inst, &sol).unwrap();
        assert!(report.pass, "KKT failed: {report:?}");
        let bf = brute_force_multitype(&inst, 400).unwrap();
        assert!(
            sol.total_cost <= bf.total_cost + 1e-9 * bf.total_cost.abs(),
            "solver worse than grid: {} vs {}",
            sol.total_cost,
            bf.total_cost
        );
        // One grid cell of slack: local cost slope times cell width per type.
        let slack: f64 = inst
            .types
            .iter()
            .zip(bf.a_star.iter().zip(&sol.a_star))
            .map(|(p, (&ab, &asol))| {
                let cell = (ab - asol).abs().max(1e-3);
                hybridward::analytics::cost_rate_deriv(p, asol).abs() * cell
            })
            .sum::<f64>()
            .max(1e-6 * sol.total_cost.abs());
        let gap = bf.total_cost - sol.total_cost;
        assert!(gap <= 4.0 * slack, "oracle beats solver by {gap} (slack {slack})");
        max_gap = max_gap.max(gap / sol.total_cost.abs());
        done += 1;
    }
    assert_eq!(done, 20, "only {done} binding pairs in {tried} draws");
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 300.0, "runtime {elapsed:.1}s exceeds 5 minutes");
    pass(
        8,
        format!("20 binding pairs: KKT clean, max relative cost gap to 400^2 grid {max_gap:.2e}, {elapsed:.1}s"),
    );
}

#[test]
fn criterion_09_two_type_threshold_motion() {
    // Crossing pair: thresholds swap order near C = 8.8.
    let types = scenarios::crossing_pair();
    let ample = solve_multitype(&MultiInstance { types: types.clone(), capacity: 12.0 }).unwrap();
    assert!(ample.a_star[0] < ample.a_star[1]);
    let mut crossing = None;
    let mut prev_gap = ample.a_star[1] - ample.a_star[0];
    let mut c = 9.3;
    while c > 7.0 {
        let sol = solve_multitype(&MultiInstance { types: types.clone(), capacity: c }).unwrap();
        let gap = sol.a_star[1] - sol.a_star[0];
        if prev_gap > 0.0 && gap <= 0.0 {
            crossing = Some(c);
            break;
        }
        prev_gap = gap;
        c -= 0.02;
    }
    let c_cross = crossing.expect("thresholds never crossed");
    assert!((c_cross - 8.8).abs() <= 0.5, "crossing at C = {c_cross}");

    // Opposite pair: one threshold falls, the other rises, as C shrinks.
    let types = scenarios::opposite_pair();
    let f = hybridward::multitype::multi_feasibility(&MultiInstance {
        types: types.clone(),
        capacity: 1.0,
    })
    .unwrap();
    let unc = solve_multitype(&MultiInstance { types: types.clone(), capacity: 1e6 }).unwrap();
    let hi_c = unc.total_workload - 0.3;
    let lo_c = f.total_min_workload + 0.3;
    let first = solve_multitype(&MultiInstance { types: types.clone(), capacity: hi_c }).unwrap();
    let last = solve_multitype(&MultiInstance { types, capacity: lo_c }).unwrap();
    assert!(last.a_star[0] < first.a_star[0], "type 1 should fall");
    assert!(last.a_star[1] > first.a_star[1], "type 2 should rise");
    pass(
        9,
        format!(
            "crossing at C = {c_cross:.2}; opposite pair moved {:.2}->{:.2} and {:.2}->{:.2}",
            first.a_star[0], last.a_star[0], first.a_star[1], last.a_star[1]
        ),
    );
}

#[test]
fn criterion_10_renewal_reward_cross_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(1010);
    let mut max_z = 0.0f64;
    for i in 0..5 {
        // Moderate loads keep ten replications of horizon 1e4 affordable.
        let x = rng.gen_range(0.5..1.5);
        let travel_time = rng.gen_range(0.5..2.0);
        let p = PatientParams {
            lambda: rng.gen_range(0.3..0.8),
            x,
            travel_time,
            theta_r: rng.gen_range(0.2..0.6),
            theta_h: rng.gen_range(0.2..0.7),
            theta_t: rng.gen_range(0.05..0.15),
            sigma_r: rng.gen_range(0.8..1.2),
            sigma_h: rng.gen_range(0.8..1.2),
            h_r: rng.gen_range(0.5..3.0),
            h_h: rng.gen_range(0.5..3.0),
            h_t: rng.gen_range(0.5..2.0),
            s_bar: x + travel_time * 0.15 + rng.gen_range(2.0..5.0),
        };
        let a = solve_uncapacitated(&p).unwrap().a_star.max(0.3 * p.a_bar());
        let v = cost_rate(&p, a);
        let cfg = SimConfig {
            instance: MultiInstance { types: vec![p], capacity: 1e9 },
            thresholds: Some(vec![a]),
            horizon: 1e4,
            warmup_fraction: 0.1,
            dt: 0.005,
            seed: 9000 + i,
            onsite_slots: Some(1_000_000),
            bridge_correction: true,
            travel_noise_sigma: 0.0,
            replications: 10,
            dynamics_overrides: None,
        };
        let res = simulate(&cfg, Policy::CostIndex).unwrap();
        let z = (res.mean_cost - v).abs() / res.se_cost;
        assert!(
            z <= 3.0,
            "set {i}: simulated {} vs analytic {v} is {z:.2} se (se {})",
            res.mean_cost,
            res.se_cost
        );
        max_z = max_z.max(z);
    }
    pass(10, format!("5 parameter sets, 10 reps each: max |z| = {max_z:.2}"));
}

#[test]
fn criterion_11_swap_policy_benchmark_directions() {
    let mut lines = Vec::new();
    for group in 1u8..=4 {
        let mut improvements = Vec::new();
        for variant in ['a', 'b', 'c'] {
            let cfg = scenarios::swap_benchmark(group, variant);
            let cmp = compare_policies(&cfg).unwrap();
            let p1 = cmp.policy1.mean_cost;
            let p2 = cmp.policy2.mean_cost;
            assert!(
                p2 <= p1,
                "group {group}{variant}: cost-index policy lost ({p2} vs {p1})"
            );
            let imp = (p1 - p2) / p1;
            improvements.push(imp);
            lines.push(format!(
                "{group}{variant}: {:.0} vs {:.0} ({:.2}% better, swaps {:.0}, ci [{:.1}, {:.1}])",
                p1,
                p2,
                imp * 100.0,
                cmp.policy1.mean_swaps,
                cmp.ci95.0,
                cmp.ci95.1
            ));
        }
        assert!(
            improvements[1] > improvements[0],
            "group {group}: slow-recovery variant improvement {:.3}% not above design {:.3}%",
            improvements[1] * 100.0,
            improvements[0] * 100.0
        );
        assert!(
            improvements[2] > improvements[0],
            "group {group}: noisy-remote variant improvement {:.3}% not above design {:.3}%",
            improvements[2] * 100.0,
            improvements[0] * 100.0
        );
    }
    pass(11, lines.join("; "));
}

#[test]
fn criterion_12_estimation_round_trips() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1212);
    let n = 100_000usize;

    // On-site: exact single-barrier law (inverse Gaussian).
    for i in 0..5 {
        let theta = rng.gen_range(0.3..0.8);
        let sigma = rng.gen_range(0.7..1.4);
        let x = rng.gen_range(1.0..3.0);
        let ig =
            rand_distr::InverseGaussian::new(x / theta, x * x / (sigma * sigma)).unwrap();
        let mut data_rng = ChaCha8Rng::seed_from_u64(31 + i);
        let los: Vec<f64> = (0..n).map(|_| ig.sample(&mut data_rng)).collect();
        let fit = fit_onsite(&los, x, 100 + i).unwrap();
        let z_t = (fit.theta_h - theta).abs() / fit.theta_h_ci.se;
        let z_s = (fit.sigma_h - sigma).abs() / fit.sigma_h_ci.se;
        assert!(z_t <= 3.0, "on-site drift {z_t:.2} se off (truth {theta})");
        assert!(z_s <= 3.0, "on-site diffusion {z_s:.2} se off (truth {sigma})");
    }

    // Travel: noisy before/after pairs.
    for i in 0..5 {
        let theta_t = rng.gen_range(0.05..0.2);
        let t = rng.gen_range(1.0..4.0);
        let noise = rand_distr::Normal::new(0.0, 0.3).unwrap();
        let mut data_rng = ChaCha8Rng::seed_from_u64(57 + i);
        let pairs: Vec<(f64, f64)> = (0..n)
            .map(|_| {
                let s = data_rng.gen_range(0.5..3.0);
                (s, s + theta_t * t + noise.sample(&mut data_rng))
            })
            .collect();
        let fit = fit_travel(&pairs, t, 200 + i).unwrap();
        let z = (fit.theta_t - theta_t).abs() / fit.theta_t_ci.se;
        assert!(z <= 3.0, "travel rate {z:.2} se off (truth {theta_t})");
    }

    // Remote: two-barrier episodes simulated path-wise.
    let truths: Vec<(f64, f64, f64, f64)> = (0..5)
        .map(|_| {
            (
                rng.gen_range(0.25..0.5),  // theta_r
                rng.gen_range(0.8..1.2),   // sigma_r
                rng.gen_range(0.5..1.0),   // x
                rng.gen_range(0.8..1.6),   // a
            )
        })
        .collect();
    let zs: Vec<(f64, f64)> = truths
        .par_iter()
        .enumerate()
        .map(|(i, &(theta_r, sigma_r, x, a))| {
            let mut data_rng = ChaCha8Rng::seed_from_u64(91 + i as u64);
            let dt = 1e-3;
            let mut los = Vec::with_capacity(n);
            let mut flags = Vec::with_capacity(n);
            for _ in 0..n {
                let mut s = x;
                let mut t = 0.0;
                loop {
                    let out = step_path(s, theta_r, sigma_r, dt, Some(x + a), true, &mut data_rng);
                    t += dt;
                    s = out.score;
                    if out.hit_upper || out.hit_lower {
                        flags.push(out.hit_upper);
                        break;
                    }
                }
                los.push(t);
            }
            let fit = fit_remote(&los, &flags, x, a, 300 + i as u64).unwrap();
            (
                (fit.theta_r - theta_r).abs() / fit.theta_r_ci.se,
                (fit.sigma_r - sigma_r).abs() / fit.sigma_r_ci.se,
            )
        })
        .collect();
    for (i, (z_t, z_s)) in zs.iter().enumerate() {
        assert!(*z_t <= 3.0, "remote drift set {i}: {z_t:.2} se off");
        assert!(*z_s <= 3.0, "remote diffusion set {i}: {z_s:.2} se off");
    }
    let elapsed = start.elapsed().as_secs_f64();
    assert!(elapsed < 180.0, "runtime {elapsed:.1}s exceeds 3 minutes");
    pass(12, format!("all three fitters within 3 bootstrap se on 5 truths each, {elapsed:.1}s"));
}

#[test]
fn criterion_13_quadratic_costs() {
    // Dual-form agreement on the study family and random draws.
    let mut rng = ChaCha8Rng::seed_from_u64(1313);
    let mut max_rel = 0.0f64;
    for i in 0..11 {
        let p = if i == 0 {
            scenarios::quadratic_study(2.0, 10.0)
        } else {
            draw_params(&mut rng)
        };
        let q = QuadraticCoeffs::from_params(&p).unwrap();
        for j in 0..200 {
            let a = p.a_bar() * j as f64 / 199.0;
            let (direct, _) = cost_rate_quadratic(&p, a);
            let coeff = cost_rate_quadratic_coeff(&p, &q, a);
            let rel = (direct - coeff).abs() / direct.abs().max(coeff.abs()).max(1e-12);
            assert!(rel <= 1e-12, "forms disagree at a = {a}: {direct} vs {coeff}");
            max_rel = max_rel.max(rel);
        }
    }

    // Higher on-site variability gives pointwise weakly smaller thresholds.
    for i in 0..=65 {
        let t = 1.0 + 2.0 * i as f64;
        let p2 = scenarios::quadratic_study(2.0, t);
        let p8 = PatientParams { sigma_h: 8.0, ..p2.clone() };
        let a2 = solve_quadratic(&p2, None).unwrap().a_star;
        let a8 = solve_quadratic(&p8, None).unwrap().a_star;
        assert!(a8 <= a2 + 1e-6, "t = {t}: sigma_h = 8 gave {a8} > {a2}");
    }

    // Single-barrier second moment against Monte Carlo.
    let p = PatientParams {
        theta_h: 0.5,
        sigma_h: 1.0,
        ..scenarios::rising_workload(2.0)
    };
    let a = 1.0;
    let m = second_moments(&p, a);
    let b = p.x + a + p.travel_time * p.theta_t;
    let n = 30_000;
    let dt = 1e-3;
    let mut mc_rng = ChaCha8Rng::seed_from_u64(99);
    let (mut sum2, mut sum4) = (0.0, 0.0);
    for _ in 0..n {
        let mut s = b;
        let mut t = 0.0;
        loop {
            let out = step_path(s, p.theta_h, p.sigma_h, dt, None, true, &mut mc_rng);
            t += dt;
            s = out.score;
            if out.hit_lower {
                break;
            }
        }
        sum2 += t * t;
        sum4 += t.powi(4);
    }
    let m2_hat = sum2 / n as f64;
    let se = ((sum4 / n as f64 - m2_hat * m2_hat).max(0.0) / n as f64).sqrt();
    let z = (m2_hat - m.m2_h).abs() / se;
    assert!(z <= 3.0, "on-site second moment {m2_hat} vs {} is {z:.2} se", m.m2_h);

    // The printed two-barrier expression can go negative: log, don't assert.
    let anomaly = PatientParams { x: 8.0, ..scenarios::quadratic_study(2.0, 10.0) };
    let printed = second_moments(&anomaly, 5.0);
    let rho = 2.0 * anomaly.theta_r / (anomaly.sigma_r * anomaly.sigma_r);
    let mut mc2 = 0.0;
    let n2 = 20_000;
    let mut rng2 = ChaCha8Rng::seed_from_u64(77);
    for _ in 0..n2 {
        let mut s = anomaly.x;
        let mut t = 0.0;
        loop {
            let out = step_path(
                s,
                anomaly.theta_r,
                anomaly.sigma_r,
                2e-3,
                Some(anomaly.x + 5.0),
                true,
                &mut rng2,
            );
            t += 2e-3;
            s = out.score;
            if out.hit_lower || out.hit_upper {
                break;
            }
        }
        mc2 += t * t / n2 as f64;
    }
    assert!(printed.m2_r_negative, "anomaly case should flag a negative printed value");
    println!(
        "criterion 13 note: printed remote second-moment expression = {:.4} (flagged negative), Monte Carlo E[tau_R^2] = {mc2:.4} (rho = {rho:.3})",
        printed.m2_r
    );
    pass(
        13,
        format!(
            "dual forms within {max_rel:.2e}; variability lowers thresholds pointwise; on-site m2 within {z:.2} se of MC; negativity anomaly logged"
        ),
    );
}
