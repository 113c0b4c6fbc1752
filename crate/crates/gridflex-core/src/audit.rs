//! Independent verification of emitted trajectories.
//!
//! Everything here re-derives feasibility from the constraint definitions
//! rather than calling into the solvers: [`audit_constraints`] replays the
//! box, ramping, start-up, balance, deficit-sign, and state-of-charge rules
//! over a finished trajectory; [`audit_projection`] dense-scans the feasible
//! power set of every real-time step looking for a choice the solver should
//! have made instead; and [`run_oracle_campaign`] pits the day-ahead dynamic
//! program against exhaustive enumeration on randomized small instances.

use crate::balance::{offset_power, resolve_baseline, target_power, Baseline};
use crate::catalog::{ResourceRole, ResourceSpec};
use crate::dayahead::{
    brute_force_oracle, deficit_bounds, solve_dayahead_dp, solve_dayahead_dp_faulted,
    DayaheadError, ScheduleProblem, ORACLE_MAX_LEVELS, ORACLE_MAX_STEPS,
};
use crate::realtime::RunConfig;
use crate::scenario::{NetLoadProfile, ScenarioKind};
use crate::storage::{apply_soc, soc_power_limits};
use crate::trajectory::Trajectory;
use anyhow::{bail, Result};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Default dense-scan resolution, as a fraction of rated power.
pub const PROJECTION_RESOLUTION_FRAC: f64 = 1e-6;
/// Allowed squared-offset excess, as a fraction of rated power squared.
pub const PROJECTION_TOLERANCE_FRAC: f64 = 1e-9;
/// Slack on replayed continuous constraints, as a fraction of rated power.
const CONSTRAINT_SLACK_FRAC: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub t: usize,
    pub rule: String,
    pub detail: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "step {}: {} ({})", self.t, self.rule, self.detail)
    }
}

fn su_steps(spec: &ResourceSpec, dt: u32) -> u32 {
    spec.startup_minutes.div_ceil(dt)
}

// The reachable committed-power pieces from (u_prev, p_prev), re-derived from
// the constraint formulas. Mirrors the dispatch rules on purpose; sharing
// code with the solver would defeat the audit.
struct ReplaySet {
    off_allowed: bool,
    pieces: Vec<(f64, f64)>,
}

fn replay_feasible(
    spec: &ResourceSpec,
    u_prev: bool,
    p_prev: f64,
    off_intervals: u32,
    dt: u32,
) -> ReplaySet {
    let ramp = dt as f64 * spec.ramp_mw_per_min;
    let mut pieces = Vec::new();
    let mut push = |lo: f64, hi: f64| {
        if lo <= hi {
            pieces.push((lo, hi));
        }
    };
    let off_allowed;
    if spec.role == ResourceRole::Storage {
        if u_prev {
            let (w_lo, w_hi) = (p_prev - ramp, p_prev + ramp);
            push(w_lo.max(-spec.p_max_mw), w_hi.min(-spec.p_min_mw));
            push(w_lo.max(spec.p_min_mw), w_hi.min(spec.p_max_mw));
            off_allowed = p_prev.abs() <= spec.p_min_mw + ramp;
        } else {
            off_allowed = true;
            if off_intervals >= su_steps(spec, dt) {
                let hi = spec.p_max_mw.min(spec.p_min_mw + ramp);
                push(-hi, -spec.p_min_mw);
                push(spec.p_min_mw, hi);
            }
        }
    } else if u_prev {
        push(
            spec.p_min_mw.max(p_prev - ramp),
            spec.p_max_mw.min(p_prev + ramp),
        );
        off_allowed = p_prev <= spec.p_min_mw + ramp;
    } else {
        off_allowed = true;
        if off_intervals >= su_steps(spec, dt) {
            push(spec.p_min_mw, spec.p_max_mw.min(spec.p_min_mw + ramp));
        }
    }
    ReplaySet { off_allowed, pieces }
}

/// Replay every dispatch constraint over a finished trajectory. Set
/// `deficit_bounds_enforced` for day-ahead schedules, whose deficits must
/// stay on the shaved side of the peak. Returns one entry per violated rule.
pub fn audit_constraints(
    spec: &ResourceSpec,
    profile: &NetLoadProfile,
    baseline: &Baseline,
    traj: &Trajectory,
    deficit_bounds_enforced: bool,
    soc_enforced: bool,
) -> Vec<Violation> {
    let mut violations = Vec::new();
    let mut flag = |t: usize, rule: &str, detail: String| {
        violations.push(Violation {
            t,
            rule: rule.to_string(),
            detail,
        });
    };
    if traj.steps.len() != profile.steps() || traj.dt_minutes != profile.dt_minutes {
        flag(
            0,
            "shape",
            format!(
                "trajectory {} steps @ {} min vs profile {} steps @ {} min",
                traj.steps.len(),
                traj.dt_minutes,
                profile.steps(),
                profile.dt_minutes
            ),
        );
        return violations;
    }
    let rated = spec.rated_mw();
    let slack = CONSTRAINT_SLACK_FRAC * rated;
    let dt = traj.dt_minutes;
    let ramp = dt as f64 * spec.ramp_mw_per_min;
    let su = su_steps(spec, dt);

    let mut u_prev = traj.initial_on;
    let mut p_prev = traj.initial_power_mw;
    // Offline duration recursion OFF_t = (1 - u_{t-1})(OFF_{t-1} + 1),
    // replayed in whole intervals. OFF_t is the streak ending at t-1.
    let mut off_prev: u32 = traj.initial_off_intervals;
    let mut soc = traj.initial_soc_mwh;

    for (t, step) in traj.steps.iter().enumerate() {
        let net_mw = profile.values[t] * rated;
        let p = step.power_mw;
        let u = step.on;

        // Binary commitment domain and the capacity box P_min*u <= P <= P_max*u.
        if !u && p != 0.0 {
            flag(t, "box", format!("offline but dispatching {p} MW"));
        }
        if u {
            let in_box = if spec.role == ResourceRole::Storage {
                p == 0.0 || (p.abs() >= spec.p_min_mw - slack && p.abs() <= spec.p_max_mw + slack)
            } else {
                p >= spec.p_min_mw - slack && p <= spec.p_max_mw + slack
            };
            if !in_box {
                flag(
                    t,
                    "box",
                    format!("{p} MW outside [{}, {}]", spec.p_min_mw, spec.p_max_mw),
                );
            }
        }

        // The SoC window can corner a committed store (it empties or fills
        // faster than the ramp can back off); such steps are exempt from the
        // ramp/commitment rules but must respect the physical window.
        let mut soc_cornered = false;
        if soc_enforced && spec.is_storage() {
            if let Some(s) = soc {
                let (w_lo, w_hi) = soc_power_limits(s, spec, dt).expect("storage spec");
                let rs = replay_feasible(spec, u_prev, p_prev, off_prev, dt);
                let any_candidate = rs.off_allowed
                    || rs
                        .pieces
                        .iter()
                        .any(|&(lo, hi)| lo.max(w_lo) <= hi.min(w_hi));
                if !any_candidate {
                    soc_cornered = true;
                    if p < w_lo - slack || p > w_hi + slack {
                        flag(
                            t,
                            "soc-window",
                            format!("cornered step power {p} MW outside [{w_lo}, {w_hi}]"),
                        );
                    }
                } else if p < w_lo - slack || p > w_hi + slack {
                    flag(
                        t,
                        "soc-window",
                        format!("power {p} MW outside [{w_lo}, {w_hi}]"),
                    );
                }
            }
        }

        if !soc_cornered {
            // Ramping pair (storage compares magnitudes on commitment flips,
            // signed power otherwise):
            //   p_t - p_{t-1} <= dt*r*u_t     + p_min*(u_t - u_{t-1})
            //   p_{t-1} - p_t <= dt*r*u_{t-1} + p_min*(u_{t-1} - u_t)
            let (pv, pc) = if spec.role == ResourceRole::Storage && u != u_prev {
                (p_prev.abs(), p.abs())
            } else {
                (p_prev, p)
            };
            let (uv, uc) = (f64::from(u8::from(u_prev)), f64::from(u8::from(u)));
            if pc - pv > ramp * uc + spec.p_min_mw * (uc - uv) + slack {
                flag(
                    t,
                    "ramp-up",
                    format!("{pv} -> {pc} MW exceeds {} + {}", ramp * uc, spec.p_min_mw * (uc - uv)),
                );
            }
            if pv - pc > ramp * uv + spec.p_min_mw * (uv - uc) + slack {
                flag(
                    t,
                    "ramp-down",
                    format!("{pv} -> {pc} MW exceeds {} + {}", ramp * uv, spec.p_min_mw * (uv - uc)),
                );
            }

            // Start-up gate u_t - u_{t-1} <= OFF_t / t_su, OFF_t being the
            // replayed offline streak ending at t-1.
            if u && !u_prev && su > 0 && off_prev < su {
                flag(
                    t,
                    "startup-gate",
                    format!("came online after {off_prev} of {su} required offline intervals"),
                );
            }
        }

        // Role-specific power balance.
        let expected_offset = offset_power(spec.role, baseline.at(t), net_mw, p);
        if (step.offset_mw - expected_offset).abs() > slack {
            flag(
                t,
                "balance",
                format!("offset {} MW vs balance residual {expected_offset} MW", step.offset_mw),
            );
        }
        if (step.offset_pu * rated - step.offset_mw).abs() > slack {
            flag(t, "per-unit", format!("offset_pu {} inconsistent", step.offset_pu));
        }

        if deficit_bounds_enforced {
            let (lo, hi) = deficit_bounds(spec.role, baseline.at(t), net_mw);
            if step.offset_mw < lo - slack || step.offset_mw > hi + slack {
                flag(
                    t,
                    "deficit-bounds",
                    format!("offset {} MW outside [{lo}, {hi}]", step.offset_mw),
                );
            }
        }

        // State-of-charge replay.
        if let Some(s) = soc {
            let next = apply_soc(s, p, dt, spec).expect("storage spec");
            match step.soc_mwh {
                Some(reported) if (reported - next).abs() > slack.max(1e-9 * next.abs()) => {
                    flag(t, "soc-replay", format!("reported {reported} MWh vs replayed {next} MWh"));
                }
                None => flag(t, "soc-replay", "soc column disappeared mid-trajectory".to_string()),
                _ => {}
            }
            if soc_enforced {
                let cap = spec.energy_cap_mwh.expect("storage spec");
                if next < -slack || next > cap + slack {
                    flag(t, "soc-bounds", format!("soc {next} MWh outside [0, {cap}]"));
                }
            }
            soc = Some(next);
        }

        off_prev = if u { 0 } else { off_prev + 1 };
        u_prev = u;
        p_prev = p;
    }
    violations
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionReport {
    pub steps_checked: usize,
    /// Largest amount (MW^2) by which a grid candidate beat an emitted step.
    pub worst_excess_mw2: f64,
    pub violations: Vec<Violation>,
}

impl ProjectionReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Dense grid scan over every step of a real-time trajectory: no feasible
/// power sampled at `resolution_frac * rated` may beat the emitted step's
/// squared offset by more than `tolerance_frac * rated^2`. State (previous
/// power, commitment, offline streak, store) is replayed from the trajectory
/// itself.
pub fn audit_projection(
    spec: &ResourceSpec,
    profile: &NetLoadProfile,
    cfg: &RunConfig,
    traj: &Trajectory,
    resolution_frac: f64,
    tolerance_frac: f64,
) -> Result<ProjectionReport> {
    let baseline = resolve_baseline(spec, &cfg.baseline, profile.steps())?;
    if traj.steps.len() != profile.steps() {
        bail!("trajectory/profile length mismatch");
    }
    if !cfg.initial_on {
        // A horizon pinned offline has nothing to optimize.
        return Ok(ProjectionReport {
            steps_checked: 0,
            worst_excess_mw2: 0.0,
            violations: Vec::new(),
        });
    }
    let rated = spec.rated_mw();
    let resolution = resolution_frac * rated;
    let tolerance = tolerance_frac * rated * rated;
    let dt = traj.dt_minutes;

    let mut u_prev = traj.initial_on;
    let mut p_prev = traj.initial_power_mw;
    let mut off_intervals: u32 = traj.initial_off_intervals;
    let mut soc = traj.initial_soc_mwh;

    let mut report = ProjectionReport {
        steps_checked: 0,
        worst_excess_mw2: 0.0,
        violations: Vec::new(),
    };
    for (t, step) in traj.steps.iter().enumerate() {
        let net_mw = profile.values[t] * rated;
        let target = target_power(spec.role, baseline.at(t), net_mw);
        let rs = replay_feasible(spec, u_prev, p_prev, off_intervals, dt);
        let window = match (cfg.soc_enforced, soc) {
            (true, Some(s)) => Some(soc_power_limits(s, spec, dt)?),
            _ => None,
        };

        let mut best = if rs.off_allowed {
            target * target
        } else {
            f64::INFINITY
        };
        for &(lo, hi) in &rs.pieces {
            let (lo, hi) = match window {
                Some((w_lo, w_hi)) => (lo.max(w_lo), hi.min(w_hi)),
                None => (lo, hi),
            };
            if lo > hi {
                continue;
            }
            let n = ((hi - lo) / resolution).ceil() as u64;
            let mut k = 0u64;
            while k <= n {
                let p = (lo + k as f64 * resolution).min(hi);
                let cost = (p - target) * (p - target);
                if cost < best {
                    best = cost;
                }
                k += 1;
            }
        }

        if best.is_finite() {
            report.steps_checked += 1;
            let emitted = step.offset_mw * step.offset_mw;
            let excess = emitted - best;
            if excess > report.worst_excess_mw2 {
                report.worst_excess_mw2 = excess;
            }
            if excess > tolerance {
                report.violations.push(Violation {
                    t,
                    rule: "projection".to_string(),
                    detail: format!(
                        "emitted offset^2 {emitted} MW^2, grid found {best} MW^2 (excess {excess})"
                    ),
                });
            }
        }

        if let Some(s) = soc {
            soc = Some(apply_soc(s, step.power_mw, dt, spec)?);
        }
        off_intervals = if step.on { 0 } else { off_intervals + 1 };
        u_prev = step.on;
        p_prev = step.power_mw;
    }
    Ok(report)
}

/// Randomized day-ahead equivalence campaign configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub instances: usize,
    pub max_steps: usize,
    pub max_levels: usize,
    pub max_startup_minutes: u32,
    pub seed: u64,
    /// Corrupt the dynamic program on purpose; the campaign must then fail.
    pub inject_fault: bool,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        CampaignConfig {
            instances: 100,
            max_steps: 8,
            max_levels: 7,
            max_startup_minutes: 3,
            seed: 42,
            inject_fault: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignMismatch {
    pub index: usize,
    /// Objective in MW^2, `None` when that side reported infeasibility.
    pub dp_objective: Option<f64>,
    pub oracle_objective: Option<f64>,
    pub note: String,
    /// Full instance serialization, re-runnable as-is.
    pub problem_json: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignReport {
    pub instances: usize,
    pub matches: usize,
    pub solved: usize,
    pub infeasible: usize,
    pub worst_abs_diff_mw2: f64,
    pub mismatches: Vec<CampaignMismatch>,
}

impl CampaignReport {
    pub fn is_ok(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Draw a random small scheduling instance within the campaign caps.
pub fn random_schedule_problem(rng: &mut ChaCha8Rng, cfg: &CampaignConfig) -> ScheduleProblem {
    use crate::balance::BaselinePolicy;
    let role = match rng.random_range(0..3u8) {
        0 => ResourceRole::Generator,
        1 => ResourceRole::Load,
        _ => ResourceRole::Storage,
    };
    let p_min = if rng.random_bool(0.3) {
        0.0
    } else {
        rng.random_range(0.05..0.4)
    };
    let p_max = p_min + rng.random_range(0.3..1.2);
    let spec = ResourceSpec {
        role,
        name: format!("campaign-{role}"),
        p_min_mw: p_min,
        p_max_mw: p_max,
        ramp_mw_per_min: rng.random_range(0.05..0.8),
        startup_minutes: rng.random_range(0..=cfg.max_startup_minutes),
        charge_eff: (role == ResourceRole::Storage).then(|| rng.random_range(0.7..1.0)),
        discharge_eff: (role == ResourceRole::Storage).then(|| rng.random_range(0.7..1.0)),
        energy_cap_mwh: (role == ResourceRole::Storage).then_some(1.0),
        curtailment_only: false,
        notes: Vec::new(),
    };
    let steps = rng.random_range(2..=cfg.max_steps);
    let profile = NetLoadProfile {
        kind: ScenarioKind::Custom,
        dt_minutes: 1,
        values: (0..steps).map(|_| rng.random_range(-0.6..0.6)).collect(),
    };
    let mut problem = ScheduleProblem::new(spec, profile);
    problem.power_levels = rng.random_range(2..=cfg.max_levels);
    problem.baseline_policy = match rng.random_range(0..3u8) {
        0 => BaselinePolicy::Midpoint,
        1 => BaselinePolicy::Min,
        _ => BaselinePolicy::Max,
    };
    problem
}

/// Run the randomized DP-vs-enumeration campaign: objectives must agree
/// exactly (same grid, same cost definition), infeasibility verdicts must
/// agree, and every solved schedule must pass the constraint replay.
pub fn run_oracle_campaign(cfg: &CampaignConfig) -> Result<CampaignReport> {
    if cfg.instances == 0 {
        bail!("campaign needs at least 1 instance");
    }
    if cfg.max_steps == 0 {
        bail!("degenerate cap: zero-step instances");
    }
    if cfg.max_steps > ORACLE_MAX_STEPS {
        bail!("max_steps {} exceeds the oracle cap {ORACLE_MAX_STEPS}", cfg.max_steps);
    }
    if !(2..=ORACLE_MAX_LEVELS).contains(&cfg.max_levels) {
        bail!("max_levels must lie in [2, {ORACLE_MAX_LEVELS}], got {}", cfg.max_levels);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = CampaignReport {
        instances: cfg.instances,
        matches: 0,
        solved: 0,
        infeasible: 0,
        worst_abs_diff_mw2: 0.0,
        mismatches: Vec::new(),
    };
    for index in 0..cfg.instances {
        let problem = random_schedule_problem(&mut rng, cfg);
        let dp = if cfg.inject_fault {
            solve_dayahead_dp_faulted(&problem)
        } else {
            solve_dayahead_dp(&problem)
        };
        let oracle = brute_force_oracle(&problem);
        let mismatch = |dp_obj: Option<f64>, oracle_obj: Option<f64>, note: String| {
            CampaignMismatch {
                index,
                dp_objective: dp_obj,
                oracle_objective: oracle_obj,
                note,
                problem_json: serde_json::to_string(&problem).expect("serializable instance"),
            }
        };
        match (&dp, &oracle) {
            (Ok(a), Ok(b)) => {
                let diff = (a.objective_mw2 - b.objective_mw2).abs();
                if diff > report.worst_abs_diff_mw2 {
                    report.worst_abs_diff_mw2 = diff;
                }
                if a.objective_mw2 != b.objective_mw2 {
                    report.mismatches.push(mismatch(
                        Some(a.objective_mw2),
                        Some(b.objective_mw2),
                        "objectives differ".to_string(),
                    ));
                } else {
                    let baseline = resolve_baseline(
                        &problem.spec,
                        &problem.baseline_policy,
                        problem.profile.steps(),
                    )?;
                    let violations =
                        audit_constraints(&problem.spec, &problem.profile, &baseline, a, true, false);
                    if violations.is_empty() {
                        report.matches += 1;
                        report.solved += 1;
                    } else {
                        report.mismatches.push(mismatch(
                            Some(a.objective_mw2),
                            Some(b.objective_mw2),
                            format!("constraint replay failed: {}", violations[0]),
                        ));
                    }
                }
            }
            (Err(DayaheadError::Infeasible), Err(DayaheadError::Infeasible)) => {
                report.matches += 1;
                report.infeasible += 1;
            }
            (a, b) => {
                let objective = |r: &Result<Trajectory, DayaheadError>| match r {
                    Ok(t) => Some(t.objective_mw2),
                    Err(_) => None,
                };
                report.mismatches.push(mismatch(
                    objective(a),
                    objective(b),
                    format!("verdicts differ: dp={a:?} oracle={b:?}"),
                ));
            }
        }
    }
    Ok(report)
}
