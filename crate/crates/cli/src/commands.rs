//! The four subcommands: solve, sweep, simulate, estimate.

use std::path::Path;

use serde::Serialize;

use hybridward::analytics;
use hybridward::multitype::{solve_multitype, MultiInstance, MultiSolution};
use hybridward::params::PatientParams;
use hybridward::sim::{
    compare_policies, simulate, simulate_rep_with_log, LogRecord, Policy, ResolvedDesign,
    SimResult,
};
use hybridward::solver::{
    solve_capacitated, solve_quadratic, solve_uncapacitated, ThresholdSolution,
};

use crate::config::{
    EstimateConfig, Objective, PolicyChoice, SimulateConfig, SolveConfig, SweepConfig,
    SweepVariable,
};
use crate::output::{json_pretty, sibling, sig10, write_text};

/// Errors carrying their process exit code.
pub enum CmdError {
    /// Exit 1: malformed or invalid input.
    Invalid(String),
    /// Exit 2: no feasible design exists.
    Infeasible(String),
    /// Exit 3: the data cannot identify the requested parameters.
    Unidentifiable(String),
}

impl CmdError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CmdError::Invalid(_) => 1,
            CmdError::Infeasible(_) => 2,
            CmdError::Unidentifiable(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CmdError::Invalid(m) | CmdError::Infeasible(m) | CmdError::Unidentifiable(m) => m,
        }
    }
}

impl From<hybridward::Error> for CmdError {
    fn from(e: hybridward::Error) -> Self {
        use hybridward::Error::*;
        match e {
            Infeasible { .. } => CmdError::Infeasible(e.to_string()),
            Unidentifiable(_) | Degenerate(_) => CmdError::Unidentifiable(e.to_string()),
            _ => CmdError::Invalid(e.to_string()),
        }
    }
}

impl From<String> for CmdError {
    fn from(m: String) -> Self {
        CmdError::Invalid(m)
    }
}

pub type CmdResult = Result<(), CmdError>;

pub fn cmd_solve(cfg: SolveConfig, out: Option<&Path>) -> CmdResult {
    if cfg.types.is_empty() {
        return Err(CmdError::Invalid("at least one patient type required".into()));
    }
    let text = if cfg.types.len() == 1 {
        let p = &cfg.types[0];
        let sol: ThresholdSolution = match (cfg.objective, cfg.capacity) {
            (Objective::Linear, None) => solve_uncapacitated(p)?,
            (Objective::Linear, Some(c)) => solve_capacitated(p, c)?,
            (Objective::Quadratic, cap) => solve_quadratic(p, cap)?,
        };
        json_pretty(&sol)
    } else {
        if cfg.objective == Objective::Quadratic {
            return Err(CmdError::Invalid(
                "quadratic objective supports a single patient type".into(),
            ));
        }
        let capacity = cfg.capacity.ok_or_else(|| {
            CmdError::Invalid("multi-type solve requires a capacity".into())
        })?;
        let sol: MultiSolution = solve_multitype(&MultiInstance { types: cfg.types, capacity })?;
        json_pretty(&sol)
    };
    write_text(out, &text)?;
    Ok(())
}

struct SweepRow {
    value: f64,
    a_star: Vec<f64>,
    p_call_in: Vec<f64>,
    w_h: f64,
    w_r: f64,
    w_t: f64,
    cost: f64,
    gamma: f64,
}

fn single_row(value: f64, sol: &ThresholdSolution, gamma: f64) -> SweepRow {
    SweepRow {
        value,
        a_star: vec![sol.a_star],
        p_call_in: vec![sol.p_call_in],
        w_h: sol.workloads.w_h,
        w_r: sol.workloads.w_r,
        w_t: sol.workloads.w_t,
        cost: sol.cost,
        gamma,
    }
}

pub fn cmd_sweep(cfg: SweepConfig, out: Option<&Path>, json: bool) -> CmdResult {
    for t in &cfg.types {
        t.validate()?;
    }
    let grid = cfg.sweep.grid()?;
    let k = cfg.types.len();
    if k == 0 {
        return Err(CmdError::Invalid("at least one patient type required".into()));
    }
    let single = k == 1;
    if !single && cfg.sweep.variable != SweepVariable::Capacity {
        return Err(CmdError::Invalid(
            "multi-type sweeps support the capacity variable only".into(),
        ));
    }
    if cfg.objective == Objective::Quadratic
        && (!single || cfg.sweep.variable == SweepVariable::Surcharge)
    {
        return Err(CmdError::Invalid(
            "quadratic sweeps support a single type and T, C, or x variables".into(),
        ));
    }
    if cfg.sweep.variable == SweepVariable::Surcharge && cfg.capacity.is_some() {
        return Err(CmdError::Invalid(
            "a surcharge sweep already encodes scarcity; capacity is not allowed".into(),
        ));
    }
    if cfg.sweep.variable == SweepVariable::Capacity && cfg.capacity.is_some() {
        return Err(CmdError::Invalid(
            "a capacity sweep takes its capacities from the grid; drop the capacity field".into(),
        ));
    }

    let solve_single =
        |p: &PatientParams, v: f64, capacity: Option<f64>| -> Result<SweepRow, hybridward::Error> {
            let sol = match cfg.objective {
                Objective::Quadratic => solve_quadratic(p, capacity)?,
                Objective::Linear => match capacity {
                    Some(c) => solve_capacitated(p, c)?,
                    None => solve_uncapacitated(p)?,
                },
            };
            let gamma = sol.gamma_shadow;
            Ok(single_row(v, &sol, gamma))
        };

    // Grid points are independent solves; evaluate them in parallel and
    // keep the output in grid order.
    use rayon::prelude::*;
    let attempts: Vec<Result<SweepRow, hybridward::Error>> = grid
        .par_iter()
        .map(|&v| match cfg.sweep.variable {
            SweepVariable::TravelTime => {
                let p = PatientParams { travel_time: v, ..cfg.types[0].clone() };
                solve_single(&p, v, cfg.capacity)
            }
            SweepVariable::InitialScore => {
                let p = PatientParams { x: v, ..cfg.types[0].clone() };
                solve_single(&p, v, cfg.capacity)
            }
            SweepVariable::Surcharge => {
                let p = &cfg.types[0];
                let q = p.with_holding_costs(p.h_r + v, p.h_h + v);
                match solve_uncapacitated(&q) {
                    Ok(sol) => Ok(single_row(v, &sol, v)),
                    Err(e) => Err(e),
                }
            }
            SweepVariable::Capacity => {
                if single {
                    solve_single(&cfg.types[0], v, Some(v))
                } else {
                    let inst = MultiInstance { types: cfg.types.clone(), capacity: v };
                    solve_multitype(&inst).map(|sol| SweepRow {
                        value: v,
                        a_star: sol.a_star.clone(),
                        p_call_in: cfg
                            .types
                            .iter()
                            .zip(&sol.a_star)
                            .map(|(p, &a)| {
                                let rho = 2.0 * p.theta_r / (p.sigma_r * p.sigma_r);
                                analytics::call_in_prob(rho, p.x, a)
                            })
                            .collect(),
                        w_h: sol.per_type_workloads.iter().map(|w| w.w_h).sum(),
                        w_r: sol.per_type_workloads.iter().map(|w| w.w_r).sum(),
                        w_t: sol.total_workload,
                        cost: sol.total_cost,
                        gamma: sol.gamma_shadow,
                    })
                }
            }
        })
        .collect();
    let mut rows = Vec::with_capacity(grid.len());
    let mut infeasible = 0usize;
    for attempt in attempts {
        match attempt {
            Ok(row) => rows.push(row),
            Err(hybridward::Error::Infeasible { .. }) => infeasible += 1,
            Err(e) => return Err(e.into()),
        }
    }
    if rows.is_empty() {
        return Err(CmdError::Infeasible(format!(
            "no feasible grid point among {}",
            grid.len()
        )));
    }
    if infeasible > 0 {
        eprintln!("note: {infeasible} infeasible grid point(s) omitted");
    }

    let text = if json { sweep_json(&rows, k) } else { sweep_csv(&rows, k) };
    write_text(out, &text)?;
    Ok(())
}

fn sweep_header(k: usize) -> String {
    let mut cols = vec!["sweep_var".to_string()];
    for i in 1..=k {
        cols.push(format!("a_star_{i}"));
    }
    for i in 1..=k {
        cols.push(format!("p_call_in_{i}"));
    }
    cols.extend(["w_h", "w_r", "w_t", "cost", "gamma"].map(String::from));
    cols.join(",")
}

fn sweep_csv(rows: &[SweepRow], k: usize) -> String {
    let mut text = sweep_header(k);
    text.push('\n');
    for r in rows {
        let mut fields = vec![sig10(r.value)];
        fields.extend(r.a_star.iter().map(|&v| sig10(v)));
        fields.extend(r.p_call_in.iter().map(|&v| sig10(v)));
        fields.extend([r.w_h, r.w_r, r.w_t, r.cost, r.gamma].map(sig10));
        text.push_str(&fields.join(","));
        text.push('\n');
    }
    text
}

fn sweep_json(rows: &[SweepRow], _k: usize) -> String {
    #[derive(Serialize)]
    struct Row<'a> {
        sweep_var: f64,
        a_star: &'a [f64],
        p_call_in: &'a [f64],
        w_h: f64,
        w_r: f64,
        w_t: f64,
        cost: f64,
        gamma: f64,
    }
    let out: Vec<Row> = rows
        .iter()
        .map(|r| Row {
            sweep_var: r.value,
            a_star: &r.a_star,
            p_call_in: &r.p_call_in,
            w_h: r.w_h,
            w_r: r.w_r,
            w_t: r.w_t,
            cost: r.cost,
            gamma: r.gamma,
        })
        .collect();
    json_pretty(&out)
}

#[derive(Serialize)]
struct DiffSummary {
    mean_diff: f64,
    se_diff: f64,
    ci95: (f64, f64),
    diffs: Vec<f64>,
}

#[derive(Serialize)]
struct SimulateReport {
    design: ResolvedDesign,
    #[serde(skip_serializing_if = "Option::is_none")]
    policy1: Option<SimResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    policy2: Option<SimResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<DiffSummary>,
}

fn reps_csv(report: &SimulateReport) -> String {
    let mut text = String::from("replication,policy1_cost,policy2_cost,diff\n");
    let n = report
        .policy1
        .as_ref()
        .or(report.policy2.as_ref())
        .map(|r| r.rep_costs.len())
        .unwrap_or(0);
    for i in 0..n {
        let p1 = report.policy1.as_ref().map(|r| sig10(r.rep_costs[i]));
        let p2 = report.policy2.as_ref().map(|r| sig10(r.rep_costs[i]));
        let d = report
            .comparison
            .as_ref()
            .map(|c| sig10(c.diffs[i]))
            .unwrap_or_default();
        text.push_str(&format!(
            "{i},{},{},{d}\n",
            p1.unwrap_or_default(),
            p2.unwrap_or_default()
        ));
    }
    text
}

fn events_csv(log: &[LogRecord]) -> String {
    let mut text = String::from("time,patient_id,type,event,score,location\n");
    for r in log {
        text.push_str(&format!(
            "{},{},{},{},{},{:?}\n",
            sig10(r.time),
            r.patient_id,
            r.type_index,
            r.event,
            sig10(r.score),
            r.location
        ));
    }
    text
}

pub fn cmd_simulate(cfg: SimulateConfig, out: Option<&Path>, seed: Option<u64>) -> CmdResult {
    let mut sim = cfg.simulation;
    if let Some(s) = seed {
        sim.seed = s;
    }
    if cfg.event_log && out.is_none() {
        return Err(CmdError::Invalid("event_log requires --out".into()));
    }
    let design = sim.resolve()?;
    let report = match cfg.policy {
        PolicyChoice::Both => {
            let cmp = compare_policies(&sim)?;
            SimulateReport {
                design,
                comparison: Some(DiffSummary {
                    mean_diff: cmp.mean_diff,
                    se_diff: cmp.se_diff,
                    ci95: cmp.ci95,
                    diffs: cmp.diffs,
                }),
                policy1: Some(cmp.policy1),
                policy2: Some(cmp.policy2),
            }
        }
        PolicyChoice::Policy1 => SimulateReport {
            design,
            policy1: Some(simulate(&sim, Policy::BestScore)?),
            policy2: None,
            comparison: None,
        },
        PolicyChoice::Policy2 => SimulateReport {
            design,
            policy1: None,
            policy2: Some(simulate(&sim, Policy::CostIndex)?),
            comparison: None,
        },
    };

    write_text(out, &json_pretty(&report))?;
    if let Some(path) = out {
        std::fs::write(sibling(path, "reps.csv"), reps_csv(&report))
            .map_err(|e| CmdError::Invalid(format!("cannot write replication csv: {e}")))?;
        if cfg.event_log {
            let pairs: &[(Policy, &str)] = match cfg.policy {
                PolicyChoice::Both => {
                    &[(Policy::BestScore, "events1.csv"), (Policy::CostIndex, "events2.csv")]
                }
                PolicyChoice::Policy1 => &[(Policy::BestScore, "events.csv")],
                PolicyChoice::Policy2 => &[(Policy::CostIndex, "events.csv")],
            };
            for (policy, suffix) in pairs {
                let (_, log) = simulate_rep_with_log(&sim, *policy, 0)?;
                std::fs::write(sibling(path, suffix), events_csv(&log))
                    .map_err(|e| CmdError::Invalid(format!("cannot write event log: {e}")))?;
            }
        }
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Station {
    Onsite,
    Remote,
    Travel,
}

struct EpisodeRows {
    onsite_los: Vec<f64>,
    remote_los: Vec<f64>,
    remote_called_in: Vec<bool>,
    travel_pairs: Vec<(f64, f64)>,
    travel_time: Option<f64>,
}

fn parse_episodes(path: &Path, type_filter: Option<u32>) -> Result<EpisodeRows, CmdError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CmdError::Invalid(format!("cannot read data {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CmdError::Invalid("episode CSV is empty".into()))?;
    let cols: Vec<&str> = header.split(',').map(str::trim).collect();
    let idx = |name: &str| -> Result<usize, CmdError> {
        cols.iter()
            .position(|c| *c == name)
            .ok_or_else(|| CmdError::Invalid(format!("episode CSV missing column '{name}'")))
    };
    let (c_type, c_station, c_los, c_called) =
        (idx("type")?, idx("station")?, idx("los")?, idx("called_in")?);
    let (c_before, c_after, c_t) =
        (idx("score_before_travel")?, idx("score_after_travel")?, idx("T")?);

    let mut rows = EpisodeRows {
        onsite_los: Vec::new(),
        remote_los: Vec::new(),
        remote_called_in: Vec::new(),
        travel_pairs: Vec::new(),
        travel_time: None,
    };
    let mut any = false;
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let get = |i: usize| -> Result<&str, CmdError> {
            fields.get(i).copied().ok_or_else(|| {
                CmdError::Invalid(format!("episode CSV line {}: too few fields", lineno + 2))
            })
        };
        let bad = |what: &str| {
            CmdError::Invalid(format!("episode CSV line {}: invalid {what}", lineno + 2))
        };
        if let Some(t) = type_filter {
            let row_type: u32 = get(c_type)?.parse().map_err(|_| bad("type"))?;
            if row_type != t {
                continue;
            }
        }
        let station = match get(c_station)? {
            "onsite" => Station::Onsite,
            "remote" => Station::Remote,
            "travel" => Station::Travel,
            other => {
                return Err(CmdError::Invalid(format!(
                    "episode CSV line {}: unknown station '{other}'",
                    lineno + 2
                )))
            }
        };
        any = true;
        match station {
            Station::Onsite => {
                rows.onsite_los.push(get(c_los)?.parse().map_err(|_| bad("los"))?);
            }
            Station::Remote => {
                rows.remote_los.push(get(c_los)?.parse().map_err(|_| bad("los"))?);
                let flag = match get(c_called)? {
                    "1" | "true" => true,
                    "0" | "false" => false,
                    _ => return Err(bad("called_in")),
                };
                rows.remote_called_in.push(flag);
            }
            Station::Travel => {
                let before: f64 = get(c_before)?.parse().map_err(|_| bad("score_before_travel"))?;
                let after: f64 = get(c_after)?.parse().map_err(|_| bad("score_after_travel"))?;
                let t: f64 = get(c_t)?.parse().map_err(|_| bad("T"))?;
                match rows.travel_time {
                    None => rows.travel_time = Some(t),
                    Some(prev) if (prev - t).abs() <= 1e-12 * prev.abs().max(1.0) => {}
                    Some(prev) => {
                        return Err(CmdError::Invalid(format!(
                            "episode CSV line {}: mixed travel times {prev} and {t}; fit one \
                             travel time per run",
                            lineno + 2
                        )))
                    }
                }
                rows.travel_pairs.push((before, after));
            }
        }
    }
    if !any {
        return Err(CmdError::Invalid("episode CSV has no usable rows".into()));
    }
    Ok(rows)
}

#[derive(Serialize)]
struct EstimateReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    onsite: Option<hybridward::estimation::OnsiteFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    travel: Option<hybridward::estimation::TravelFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    remote: Option<hybridward::estimation::RemoteFit>,
}

pub fn cmd_estimate(
    cfg: EstimateConfig,
    config_dir: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
) -> CmdResult {
    let data_path =
        if cfg.data.is_absolute() { cfg.data.clone() } else { config_dir.join(&cfg.data) };
    let rows = parse_episodes(&data_path, cfg.patient_type)?;
    let seed = seed.unwrap_or(0);

    let mut report = EstimateReport { onsite: None, travel: None, remote: None };
    if !rows.onsite_los.is_empty() {
        let x = cfg
            .x
            .ok_or_else(|| CmdError::Invalid("on-site fit requires 'x' in the config".into()))?;
        report.onsite = Some(hybridward::estimation::fit_onsite(&rows.onsite_los, x, seed)?);
    }
    if !rows.travel_pairs.is_empty() {
        let t = rows.travel_time.expect("pairs imply a travel time");
        report.travel =
            Some(hybridward::estimation::fit_travel(&rows.travel_pairs, t, seed ^ 1)?);
    }
    if !rows.remote_los.is_empty() {
        let x = cfg
            .x
            .ok_or_else(|| CmdError::Invalid("remote fit requires 'x' in the config".into()))?;
        let a = cfg
            .a
            .ok_or_else(|| CmdError::Invalid("remote fit requires 'a' in the config".into()))?;
        report.remote = Some(hybridward::estimation::fit_remote(
            &rows.remote_los,
            &rows.remote_called_in,
            x,
            a,
            seed ^ 2,
        )?);
    }
    write_text(out, &json_pretty(&report))?;
    Ok(())
}
