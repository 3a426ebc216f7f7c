//! Discrete-event Monte Carlo of the hybrid ward.
//!
//! Poisson arrivals per type, Euler health-score paths with Brownian-bridge
//! crossing correction, travel legs with deterioration, a finite set of
//! on-site slots, and capacity-triggered patient swaps. Policy comparisons
//! run under common random numbers: arrivals and per-patient path noise come
//! from named streams keyed by patient id, so both policies see the same
//! stochastic inputs by construction.

pub mod path;
pub mod rng;
pub mod swap;

pub use path::{step_path, StepOutcome};
pub use swap::{select_swap, swap_index, Policy, SwapCandidate};

use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::workloads;
use crate::error::{Error, Result};
use crate::multitype::{solve_multitype, MultiInstance};
use crate::params::PatientParams;

fn default_horizon() -> f64 {
    1e4
}
fn default_warmup() -> f64 {
    0.1
}
fn default_dt() -> f64 {
    0.01
}
fn default_true() -> bool {
    true
}
fn default_replications() -> u32 {
    10
}

/// Off-design dynamics for one type: the system is simulated with these
/// values while thresholds and slots stay at the design solution.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsOverride {
    pub theta_h: Option<f64>,
    pub sigma_r: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub instance: MultiInstance,
    /// Call-in thresholds per type; defaults to the optimal design for the
    /// instance.
    #[serde(default)]
    pub thresholds: Option<Vec<f64>>,
    #[serde(default = "default_horizon")]
    pub horizon: f64,
    #[serde(default = "default_warmup")]
    pub warmup_fraction: f64,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default)]
    pub seed: u64,
    /// On-site slots; defaults to the offered on-site load at the design,
    /// rounded (at least 1).
    #[serde(default)]
    pub onsite_slots: Option<u32>,
    #[serde(default = "default_true")]
    pub bridge_correction: bool,
    /// Scale of zero-mean travel deterioration noise (std `sigma * sqrt(T)`);
    /// zero keeps the deterministic mean `theta_t * T`.
    #[serde(default)]
    pub travel_noise_sigma: f64,
    #[serde(default = "default_replications")]
    pub replications: u32,
    /// Optional per-type off-design dynamics (same length as `types`).
    #[serde(default)]
    pub dynamics_overrides: Option<Vec<DynamicsOverride>>,
}

/// Thresholds, slot count, and simulated dynamics actually used by a run.
#[derive(Debug, Clone, Serialize)]
pub struct ResolvedDesign {
    pub thresholds: Vec<f64>,
    pub onsite_slots: u32,
    pub design_gamma_shadow: f64,
    pub sim_types: Vec<PatientParams>,
}

impl SimConfig {
    pub fn resolve(&self) -> Result<ResolvedDesign> {
        self.instance.validate()?;
        if !(self.horizon > 0.0) {
            return Err(Error::InvalidParams("horizon must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.warmup_fraction) {
            return Err(Error::InvalidParams("warmup_fraction must be in [0, 1)".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::InvalidParams("dt must be positive".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidParams("at least one replication required".into()));
        }
        if self.onsite_slots == Some(0) {
            return Err(Error::InvalidParams("onsite_slots must be at least 1".into()));
        }

        let (thresholds, design_gamma_shadow) = match &self.thresholds {
            Some(a) => {
                if a.len() != self.instance.types.len() {
                    return Err(Error::InvalidParams(format!(
                        "{} thresholds for {} types",
                        a.len(),
                        self.instance.types.len()
                    )));
                }
                for (ak, p) in a.iter().zip(&self.instance.types) {
                    let bar = p.a_bar();
                    if !ak.is_finite() || *ak < 0.0 || *ak > bar + 1e-9 {
                        return Err(Error::InvalidParams(format!(
                            "threshold {ak} outside [0, {bar}]"
                        )));
                    }
                }
                (a.clone(), 0.0)
            }
            None => {
                let sol = solve_multitype(&self.instance)?;
                (sol.a_star, sol.gamma_shadow)
            }
        };

        let onsite_slots = match self.onsite_slots {
            Some(s) => s,
            None => {
                // Little's-law offered on-site load at the chosen design.
                let w_h: f64 = self
                    .instance
                    .types
                    .iter()
                    .zip(&thresholds)
                    .map(|(p, &a)| workloads(p, a).w_h)
                    .sum();
                (w_h.round() as u32).max(1)
            }
        };

        let sim_types = match &self.dynamics_overrides {
            None => self.instance.types.clone(),
            Some(ovr) => {
                if ovr.len() != self.instance.types.len() {
                    return Err(Error::InvalidParams(
                        "dynamics_overrides length must match types".into(),
                    ));
                }
                self.instance
                    .types
                    .iter()
                    .zip(ovr)
                    .map(|(p, o)| {
                        let mut q = p.clone();
                        if let Some(th) = o.theta_h {
                            q.theta_h = th;
                        }
                        if let Some(sr) = o.sigma_r {
                            q.sigma_r = sr;
                        }
                        q.validate()?;
                        Ok(q)
                    })
                    .collect::<Result<Vec<_>>>()?
            }
        };

        Ok(ResolvedDesign { thresholds, onsite_slots, design_gamma_shadow, sim_types })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Location {
    Remote,
    TravelIn,
    Onsite,
    TravelOut,
    Buffer,
    Discharged,
}

const LOC_COUNT: usize = 5; // occupancy-tracked locations (all but Discharged)

fn loc_idx(l: Location) -> Option<usize> {
    match l {
        Location::Remote => Some(0),
        Location::TravelIn => Some(1),
        Location::Onsite => Some(2),
        Location::TravelOut => Some(3),
        Location::Buffer => Some(4),
        Location::Discharged => None,
    }
}

/// One line of the event log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogRecord {
    pub time: f64,
    pub patient_id: u64,
    pub type_index: usize,
    pub event: &'static str,
    pub score: f64,
    pub location: Location,
}

/// Mean occupancy per location over the measured interval.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct OccupancyMeans {
    pub remote: f64,
    pub travel_in: f64,
    pub onsite: f64,
    pub travel_out: f64,
    pub buffer: f64,
}

/// Outcome of a single replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RepOutcome {
    pub avg_cost: f64,
    /// Lifetime conservation counters, per type.
    pub arrivals: Vec<u64>,
    pub discharges_by_type: Vec<u64>,
    pub in_system_at_end: Vec<u64>,
    /// Post-warmup event counts.
    pub call_ins: u64,
    pub swaps: u64,
    pub discharges: u64,
    pub buffered: u64,
    pub sbar_violating_swaps: u64,
    pub occupancy: OccupancyMeans,
}

/// Replication-aggregated estimate for one policy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub policy: Policy,
    pub mean_cost: f64,
    pub se_cost: f64,
    pub rep_costs: Vec<f64>,
    pub mean_call_ins: f64,
    pub mean_swaps: f64,
    pub mean_discharges: f64,
    pub mean_buffered: f64,
    pub mean_sbar_violating_swaps: f64,
    pub occupancy: OccupancyMeans,
}

/// Paired comparison of the two swap policies under common random numbers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolicyComparison {
    pub policy1: SimResult,
    pub policy2: SimResult,
    /// Per-replication `cost(policy1) - cost(policy2)`.
    pub diffs: Vec<f64>,
    pub mean_diff: f64,
    pub se_diff: f64,
    pub ci95: (f64, f64),
}

#[derive(Debug, Clone, Copy)]
enum EventKind {
    Arrival { k: usize },
    TravelInEnd { id: u64 },
    TravelOutEnd { id: u64 },
}

struct Event {
    t: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.t == other.t && self.seq == other.seq
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    // Reversed so the max-heap pops the earliest (time, seq) first.
    fn cmp(&self, other: &Self) -> Ordering {
        other.t.total_cmp(&self.t).then(other.seq.cmp(&self.seq))
    }
}

struct Patient {
    k: usize,
    location: Location,
    score: f64,
    /// Call-in level of the current remote episode (absolute score).
    barrier: f64,
    swapped_before: bool,
    admitted_at: f64,
    synced_at: f64,
    last_accrual: f64,
    accrued: f64,
    rng: ChaCha8Rng,
}

fn travel_deterioration(
    ty: &PatientParams,
    noise_sigma: f64,
    score: f64,
    rng: &mut ChaCha8Rng,
) -> f64 {
    let mean = ty.theta_t * ty.travel_time;
    if noise_sigma == 0.0 || ty.travel_time == 0.0 {
        return mean;
    }
    let sd = noise_sigma * ty.travel_time.sqrt();
    // Truncated so the post-travel score stays positive.
    for _ in 0..64 {
        let z: f64 = rng.sample(StandardNormal);
        let d = mean + sd * z;
        if score + d > 1e-9 {
            return d;
        }
    }
    1e-9 - score
}

struct Engine<'a> {
    sim_types: &'a [PatientParams],
    thresholds: &'a [f64],
    slots: usize,
    policy: Policy,
    dt: f64,
    horizon: f64,
    t_w: f64,
    bridge: bool,
    travel_noise_sigma: f64,
    seed: u64,
    rep: u64,

    now: f64,
    last_now: f64,
    next_seq: u64,
    next_id: u64,
    events: BinaryHeap<Event>,
    patients: BTreeMap<u64, Patient>,
    buffer: VecDeque<u64>,
    slots_busy: usize,
    arrival_rngs: Vec<ChaCha8Rng>,
    arrival_exp: Vec<Exp<f64>>,

    rate_sum: f64,
    post_cost: f64,
    occ_counts: [u64; LOC_COUNT],
    occ_integrals: [f64; LOC_COUNT],

    arrivals: Vec<u64>,
    discharges_by_type: Vec<u64>,
    call_ins: u64,
    swaps: u64,
    discharges: u64,
    buffered: u64,
    sbar_violating_swaps: u64,

    log: Option<Vec<LogRecord>>,
    scratch_callins: Vec<u64>,
    scratch_discharges: Vec<u64>,
}

impl<'a> Engine<'a> {
    fn new(
        cfg: &SimConfig,
        design: &'a ResolvedDesign,
        policy: Policy,
        rep: u64,
        with_log: bool,
    ) -> Self {
        let k_count = design.sim_types.len();
        let mut engine = Engine {
            sim_types: &design.sim_types,
            thresholds: &design.thresholds,
            slots: design.onsite_slots as usize,
            policy,
            dt: cfg.dt,
            horizon: cfg.horizon,
            t_w: cfg.horizon * cfg.warmup_fraction,
            bridge: cfg.bridge_correction,
            travel_noise_sigma: cfg.travel_noise_sigma,
            seed: cfg.seed,
            rep,
            now: 0.0,
            last_now: 0.0,
            next_seq: 0,
            next_id: 0,
            events: BinaryHeap::new(),
            patients: BTreeMap::new(),
            buffer: VecDeque::new(),
            slots_busy: 0,
            arrival_rngs: (0..k_count).map(|k| rng::arrival_stream(cfg.seed, rep, k)).collect(),
            arrival_exp: design
                .sim_types
                .iter()
                .map(|p| Exp::new(p.lambda).expect("positive rate"))
                .collect(),
            rate_sum: 0.0,
            post_cost: 0.0,
            occ_counts: [0; LOC_COUNT],
            occ_integrals: [0.0; LOC_COUNT],
            arrivals: vec![0; k_count],
            discharges_by_type: vec![0; k_count],
            call_ins: 0,
            swaps: 0,
            discharges: 0,
            buffered: 0,
            sbar_violating_swaps: 0,
            log: with_log.then(Vec::new),
            scratch_callins: Vec::new(),
            scratch_discharges: Vec::new(),
        };
        for k in 0..k_count {
            engine.schedule_arrival(k);
        }
        engine
    }

    fn rate_of(&self, k: usize, loc: Location) -> f64 {
        let p = &self.sim_types[k];
        match loc {
            Location::Remote => p.h_r,
            Location::TravelIn | Location::TravelOut => p.h_t,
            Location::Onsite | Location::Buffer => p.h_h,
            Location::Discharged => 0.0,
        }
    }

    fn measured(&self) -> bool {
        self.now >= self.t_w
    }

    fn push_event(&mut self, t: f64, kind: EventKind) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.events.push(Event { t, seq, kind });
    }

    fn schedule_arrival(&mut self, k: usize) {
        let gap = self.arrival_exp[k].sample(&mut self.arrival_rngs[k]);
        let t = self.now + gap;
        self.push_event(t, EventKind::Arrival { k });
    }

    fn advance_to(&mut self, t: f64) {
        let lo = self.last_now.max(self.t_w);
        let hi = t.min(self.horizon);
        if hi > lo {
            let span = hi - lo;
            self.post_cost += self.rate_sum * span;
            for i in 0..LOC_COUNT {
                self.occ_integrals[i] += self.occ_counts[i] as f64 * span;
            }
        }
        self.last_now = t;
        self.now = t;
    }

    fn log_event(&mut self, id: u64, event: &'static str) {
        let Some(log) = self.log.as_mut() else { return };
        let p = &self.patients[&id];
        log.push(LogRecord {
            time: self.now,
            patient_id: id,
            type_index: p.k,
            event,
            score: p.score,
            location: p.location,
        });
    }

    /// Move a patient between locations, keeping the cost-rate sum, the
    /// occupancy counts, and the patient's own accrual consistent.
    fn set_location(&mut self, id: u64, new: Location) {
        let now = self.now;
        let old = {
            let p = self.patients.get_mut(&id).expect("known patient");
            let old = p.location;
            debug_assert_ne!(old, new);
            let rate = match old {
                Location::Remote => self.sim_types[p.k].h_r,
                Location::TravelIn | Location::TravelOut => self.sim_types[p.k].h_t,
                Location::Onsite | Location::Buffer => self.sim_types[p.k].h_h,
                Location::Discharged => 0.0,
            };
            p.accrued += rate * (now - p.last_accrual);
            p.last_accrual = now;
            p.location = new;
            old
        };
        let k = self.patients[&id].k;
        if let Some(i) = loc_idx(old) {
            self.occ_counts[i] -= 1;
        }
        if let Some(i) = loc_idx(new) {
            self.occ_counts[i] += 1;
        }
        self.rate_sum += self.rate_of(k, new) - self.rate_of(k, old);
    }

    fn handle(&mut self, kind: EventKind) {
        match kind {
            EventKind::Arrival { k } => {
                self.schedule_arrival(k);
                let id = self.next_id;
                self.next_id += 1;
                let ty = &self.sim_types[k];
                let a_k = self.thresholds[k];
                let remote = a_k > 0.0;
                let location = if remote { Location::Remote } else { Location::TravelIn };
                let patient = Patient {
                    k,
                    location,
                    score: ty.x,
                    barrier: ty.x + a_k,
                    swapped_before: false,
                    admitted_at: f64::NAN,
                    synced_at: self.now,
                    last_accrual: self.now,
                    accrued: 0.0,
                    rng: rng::patient_stream(self.seed, self.rep, id),
                };
                let travel_time = ty.travel_time;
                self.patients.insert(id, patient);
                if let Some(i) = loc_idx(location) {
                    self.occ_counts[i] += 1;
                }
                self.rate_sum += self.rate_of(k, location);
                self.arrivals[k] += 1;
                self.log_event(id, "arrival");
                if !remote {
                    let t_end = self.now + travel_time;
                    self.push_event(t_end, EventKind::TravelInEnd { id });
                }
            }
            EventKind::TravelInEnd { id } => self.hospital_arrival(id),
            EventKind::TravelOutEnd { id } => self.home_arrival(id),
        }
    }

    fn hospital_arrival(&mut self, id: u64) {
        let noise_sigma = self.travel_noise_sigma;
        {
            let p = self.patients.get_mut(&id).expect("traveling patient");
            let ty = &self.sim_types[p.k];
            let z = travel_deterioration(ty, noise_sigma, p.score, &mut p.rng);
            p.score += z;
        }
        if self.slots_busy < self.slots {
            self.admit(id);
            return;
        }
        // Full house: try to send an eligible on-site patient home.
        let candidates: Vec<SwapCandidate> = self
            .patients
            .iter()
            .filter(|(_, q)| q.location == Location::Onsite && !q.swapped_before)
            .map(|(&qid, q)| {
                let ty = &self.sim_types[q.k];
                let s_j = q.score + ty.theta_t * ty.travel_time;
                SwapCandidate {
                    id: qid,
                    admitted_at: q.admitted_at,
                    score: q.score,
                    cost_index: swap_index(ty, s_j, self.thresholds[q.k]),
                }
            })
            .collect();
        match select_swap(self.policy, &candidates) {
            Some(jid) => {
                self.swap_out(jid);
                self.admit(id);
            }
            None => {
                // Wait in the pre-admission buffer, accruing on-site cost
                // with the score still evolving under remote dynamics.
                self.set_location(id, Location::Buffer);
                self.patients.get_mut(&id).unwrap().synced_at = self.now;
                self.buffer.push_back(id);
                if self.measured() {
                    self.buffered += 1;
                }
                self.log_event(id, "buffered");
            }
        }
    }

    fn admit(&mut self, id: u64) {
        self.set_location(id, Location::Onsite);
        let now = self.now;
        let p = self.patients.get_mut(&id).unwrap();
        p.admitted_at = now;
        p.synced_at = now;
        self.slots_busy += 1;
        self.log_event(id, "onsite_admit");
    }

    fn swap_out(&mut self, id: u64) {
        let (k, score) = {
            let p = self.patients.get_mut(&id).expect("onsite patient");
            debug_assert!(p.location == Location::Onsite && !p.swapped_before);
            p.swapped_before = true;
            (p.k, p.score)
        };
        let ty = &self.sim_types[k];
        let travel_time = ty.travel_time;
        let s_j = score + ty.theta_t * travel_time;
        let violates = s_j + self.thresholds[k] + ty.theta_t * travel_time > ty.s_bar;
        self.set_location(id, Location::TravelOut);
        self.slots_busy -= 1;
        if self.measured() {
            self.swaps += 1;
            if violates {
                self.sbar_violating_swaps += 1;
            }
        }
        self.log_event(id, "swap_home");
        let t_end = self.now + travel_time;
        self.push_event(t_end, EventKind::TravelOutEnd { id });
    }

    fn home_arrival(&mut self, id: u64) {
        let noise_sigma = self.travel_noise_sigma;
        let (k, call_back) = {
            let p = self.patients.get_mut(&id).expect("returning patient");
            let ty = &self.sim_types[p.k];
            let z = travel_deterioration(ty, noise_sigma, p.score, &mut p.rng);
            p.score += z;
            // The resumed remote episode reuses the type's design threshold
            // relative to the post-travel score.
            p.barrier = p.score + self.thresholds[p.k];
            (p.k, p.score >= p.barrier)
        };
        if call_back {
            // Zero threshold: the returning patient is immediately recalled.
            self.start_call_in(id, k);
        } else {
            self.set_location(id, Location::Remote);
            self.patients.get_mut(&id).unwrap().synced_at = self.now;
            self.log_event(id, "resume_remote");
        }
    }

    fn start_call_in(&mut self, id: u64, k: usize) {
        if self.measured() {
            self.call_ins += 1;
        }
        self.set_location(id, Location::TravelIn);
        self.log_event(id, "call_in");
        let t = self.now + self.sim_types[k].travel_time;
        self.push_event(t, EventKind::TravelInEnd { id });
    }

    fn discharge(&mut self, id: u64) {
        let was_onsite = self.patients[&id].location == Location::Onsite;
        self.set_location(id, Location::Discharged);
        self.log_event(id, "discharge");
        if was_onsite {
            self.slots_busy -= 1;
        }
        let p = self.patients.remove(&id).unwrap();
        self.discharges_by_type[p.k] += 1;
        if self.measured() {
            self.discharges += 1;
        }
    }

    fn fill_from_buffer(&mut self) {
        while self.slots_busy < self.slots {
            let Some(id) = self.buffer.pop_front() else { break };
            // Entries discharged while waiting are skipped lazily.
            let waiting =
                matches!(self.patients.get(&id), Some(p) if p.location == Location::Buffer);
            if waiting {
                self.admit(id);
            }
        }
    }

    /// Advance every diffusing patient to the current grid time.
    fn tick(&mut self) {
        let now = self.now;
        let bridge = self.bridge;
        let mut callins = std::mem::take(&mut self.scratch_callins);
        let mut discharges = std::mem::take(&mut self.scratch_discharges);
        callins.clear();
        discharges.clear();
        for (&id, p) in self.patients.iter_mut() {
            let ty = &self.sim_types[p.k];
            let (drift, sigma, upper) = match p.location {
                Location::Remote => (ty.theta_r, ty.sigma_r, Some(p.barrier)),
                Location::Buffer => (ty.theta_r, ty.sigma_r, None),
                Location::Onsite => (ty.theta_h, ty.sigma_h, None),
                _ => continue,
            };
            let h = now - p.synced_at;
            if h <= 0.0 {
                continue;
            }
            let out = step_path(p.score, drift, sigma, h, upper, bridge, &mut p.rng);
            p.score = out.score;
            p.synced_at = now;
            if out.hit_upper {
                callins.push(id);
            } else if out.hit_lower {
                discharges.push(id);
            }
        }
        for &id in &callins {
            let k = self.patients[&id].k;
            self.start_call_in(id, k);
        }
        for &id in &discharges {
            self.discharge(id);
        }
        if !discharges.is_empty() {
            self.fill_from_buffer();
        }
        self.scratch_callins = callins;
        self.scratch_discharges = discharges;
    }

    fn run(mut self) -> (RepOutcome, Option<Vec<LogRecord>>) {
        let mut grid_k: u64 = 1;
        loop {
            let t_grid = grid_k as f64 * self.dt;
            let t_event = self.events.peek().map(|e| e.t).unwrap_or(f64::INFINITY);
            if t_event <= t_grid.min(self.horizon) {
                let ev = self.events.pop().unwrap();
                self.advance_to(ev.t);
                self.handle(ev.kind);
            } else if t_grid <= self.horizon {
                self.advance_to(t_grid);
                self.tick();
                grid_k += 1;
            } else {
                self.advance_to(self.horizon);
                break;
            }
        }

        let span = self.horizon - self.t_w;
        let mut in_system = vec![0u64; self.sim_types.len()];
        for p in self.patients.values() {
            in_system[p.k] += 1;
        }
        let occupancy = OccupancyMeans {
            remote: self.occ_integrals[0] / span,
            travel_in: self.occ_integrals[1] / span,
            onsite: self.occ_integrals[2] / span,
            travel_out: self.occ_integrals[3] / span,
            buffer: self.occ_integrals[4] / span,
        };
        let outcome = RepOutcome {
            avg_cost: self.post_cost / span,
            arrivals: self.arrivals,
            discharges_by_type: self.discharges_by_type,
            in_system_at_end: in_system,
            call_ins: self.call_ins,
            swaps: self.swaps,
            discharges: self.discharges,
            buffered: self.buffered,
            sbar_violating_swaps: self.sbar_violating_swaps,
            occupancy,
        };
        (outcome, self.log)
    }
}

/// One replication; `rep` selects the independent stream family.
pub fn simulate_rep(cfg: &SimConfig, policy: Policy, rep: u64) -> Result<RepOutcome> {
    let design = cfg.resolve()?;
    Ok(Engine::new(cfg, &design, policy, rep, false).run().0)
}

/// One replication with the full event log.
pub fn simulate_rep_with_log(
    cfg: &SimConfig,
    policy: Policy,
    rep: u64,
) -> Result<(RepOutcome, Vec<LogRecord>)> {
    let design = cfg.resolve()?;
    let (out, log) = Engine::new(cfg, &design, policy, rep, true).run();
    Ok((out, log.expect("log requested")))
}

fn aggregate(policy: Policy, outcomes: &[RepOutcome]) -> SimResult {
    let n = outcomes.len() as f64;
    let costs: Vec<f64> = outcomes.iter().map(|o| o.avg_cost).collect();
    let mean = costs.iter().sum::<f64>() / n;
    let var = if outcomes.len() > 1 {
        costs.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let mean_of = |f: &dyn Fn(&RepOutcome) -> f64| outcomes.iter().map(f).sum::<f64>() / n;
    SimResult {
        policy,
        mean_cost: mean,
        se_cost: (var / n).sqrt(),
        rep_costs: costs,
        mean_call_ins: mean_of(&|o| o.call_ins as f64),
        mean_swaps: mean_of(&|o| o.swaps as f64),
        mean_discharges: mean_of(&|o| o.discharges as f64),
        mean_buffered: mean_of(&|o| o.buffered as f64),
        mean_sbar_violating_swaps: mean_of(&|o| o.sbar_violating_swaps as f64),
        occupancy: OccupancyMeans {
            remote: mean_of(&|o| o.occupancy.remote),
            travel_in: mean_of(&|o| o.occupancy.travel_in),
            onsite: mean_of(&|o| o.occupancy.onsite),
            travel_out: mean_of(&|o| o.occupancy.travel_out),
            buffer: mean_of(&|o| o.occupancy.buffer),
        },
    }
}

/// Run all replications of one policy in parallel. The reduction collects
/// outcomes in replication order, so results do not depend on scheduling.
pub fn simulate(cfg: &SimConfig, policy: Policy) -> Result<SimResult> {
    let design = cfg.resolve()?;
    let outcomes: Vec<RepOutcome> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| Engine::new(cfg, &design, policy, rep, false).run().0)
        .collect();
    Ok(aggregate(policy, &outcomes))
}

/// Run both swap policies on common random numbers and report the paired
/// cost difference (policy 1 minus policy 2) with a 95% interval.
pub fn compare_policies(cfg: &SimConfig) -> Result<PolicyComparison> {
    let design = cfg.resolve()?;
    let pairs: Vec<(RepOutcome, RepOutcome)> = (0..cfg.replications as u64)
        .into_par_iter()
        .map(|rep| {
            let o1 = Engine::new(cfg, &design, Policy::BestScore, rep, false).run().0;
            let o2 = Engine::new(cfg, &design, Policy::CostIndex, rep, false).run().0;
            (o1, o2)
        })
        .collect();
    let (first, second): (Vec<_>, Vec<_>) = pairs.into_iter().unzip();
    let policy1 = aggregate(Policy::BestScore, &first);
    let policy2 = aggregate(Policy::CostIndex, &second);
    let diffs: Vec<f64> =
        first.iter().zip(&second).map(|(a, b)| a.avg_cost - b.avg_cost).collect();
    let n = diffs.len() as f64;
    let mean_diff = diffs.iter().sum::<f64>() / n;
    let var = if diffs.len() > 1 {
        diffs.iter().map(|d| (d - mean_diff).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    let se_diff = (var / n).sqrt();
    Ok(PolicyComparison {
        policy1,
        policy2,
        diffs,
        mean_diff,
        se_diff,
        ci95: (mean_diff - 1.96 * se_diff, mean_diff + 1.96 * se_diff),
    })
}
