//! Real-time dispatch: every interval optimized independently.
//!
//! Each interval minimizes the squared power deficit subject to commitment,
//! capacity, ramping, and start-up constraints. Because the objective is a
//! single squared residual, the optimum is the Euclidean projection of the
//! deficit-zeroing target power onto the feasible power set; the solver is
//! exact, no iteration involved. The dispatch is myopic by construction:
//! state threads forward, but no interval looks ahead.
//!
//! Commitment semantics: a resource that is on must run inside
//! `[p_min, p_max]` (storage: signed power in the deadband set
//! `{0} ∪ ±[p_min, p_max]`), may move at most `dt * ramp` per interval, may
//! start up only to `[p_min, p_min + dt * ramp]` after being off for at least
//! its start-up time, and may shut down only from at most `p_min + dt * ramp`.

use crate::balance::{offset_power, resolve_baseline, target_power, Baseline, BaselinePolicy};
use crate::catalog::ResourceSpec;
use crate::scenario::NetLoadProfile;
use crate::storage::{apply_soc, soc_power_limits};
use crate::trajectory::{Trajectory, TrajectoryStep};
use anyhow::Result;
use serde::{Deserialize, Serialize};

/// Rolling solver state entering one interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispatchState {
    /// Interval index about to be dispatched.
    pub t: usize,
    /// Power in the previous interval, MW.
    pub p_prev_mw: f64,
    /// Status in the previous interval.
    pub u_prev: bool,
    /// Consecutive offline minutes ending at the previous interval.
    pub off_minutes: u32,
    /// State of charge entering this interval, MWh; storage only.
    pub soc_mwh: Option<f64>,
}

/// The power set reachable in one interval from a given state.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibleSet {
    /// May the resource be off (p = 0, u = 0) this interval?
    pub off_allowed: bool,
    /// Closed intervals of committed power (u = 1). At most one piece for
    /// generators and loads; up to three for storage (charging side, the
    /// zero deadband point, discharging side).
    pub on_pieces: Vec<(f64, f64)>,
}

/// Outcome of one interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepResult {
    pub p_mw: f64,
    pub on: bool,
    pub offset_mw: f64,
    pub offset_pu: f64,
    /// True when an exhausted/full store forced the power outside the normal
    /// ramp/commitment rules (physical energy limit overrides them).
    pub soc_forced: bool,
}

/// Configuration for [`run_realtime`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub baseline: BaselinePolicy,
    /// Enforce state-of-charge limits on storage power each step.
    pub soc_enforced: bool,
    /// Initial commitment status. Starting offline pins the whole horizon
    /// offline.
    pub initial_on: bool,
    /// Initial state of charge as a fraction of energy capacity.
    pub initial_soc_frac: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            baseline: BaselinePolicy::Auto,
            soc_enforced: false,
            initial_on: true,
            initial_soc_frac: 0.5,
        }
    }
}

fn push_piece(pieces: &mut Vec<(f64, f64)>, lo: f64, hi: f64) {
    if lo <= hi {
        pieces.push((lo, hi));
    }
}

/// Powers reachable from `state` in one interval of `dt_minutes`.
pub fn feasible_power_set(spec: &ResourceSpec, state: &DispatchState, dt_minutes: u32) -> FeasibleSet {
    let ramp = dt_minutes as f64 * spec.ramp_mw_per_min;
    let mut pieces = Vec::new();
    let off_allowed;
    if spec.is_storage() {
        if state.u_prev {
            // Ramp applies to the signed power; the deadband cuts the window
            // in two. Zero power is the offline state, reached by shutting
            // down, not by a committed piece.
            let (w_lo, w_hi) = (state.p_prev_mw - ramp, state.p_prev_mw + ramp);
            push_piece(&mut pieces, w_lo.max(-spec.p_max_mw), w_hi.min(-spec.p_min_mw));
            push_piece(&mut pieces, w_lo.max(spec.p_min_mw), w_hi.min(spec.p_max_mw));
            off_allowed = state.p_prev_mw.abs() <= spec.p_min_mw + ramp;
        } else {
            off_allowed = true;
            if state.off_minutes >= spec.startup_minutes {
                let hi = spec.p_max_mw.min(spec.p_min_mw + ramp);
                push_piece(&mut pieces, -hi, -spec.p_min_mw);
                push_piece(&mut pieces, spec.p_min_mw, hi);
            }
        }
    } else if state.u_prev {
        push_piece(
            &mut pieces,
            spec.p_min_mw.max(state.p_prev_mw - ramp),
            spec.p_max_mw.min(state.p_prev_mw + ramp),
        );
        off_allowed = state.p_prev_mw <= spec.p_min_mw + ramp;
    } else {
        off_allowed = true;
        if state.off_minutes >= spec.startup_minutes {
            push_piece(&mut pieces, spec.p_min_mw, spec.p_max_mw.min(spec.p_min_mw + ramp));
        }
    }
    FeasibleSet { off_allowed, on_pieces: pieces }
}

fn clamp(x: f64, lo: f64, hi: f64) -> f64 {
    x.max(lo).min(hi)
}

/// Dispatch one interval: project the deficit-zeroing target onto the
/// feasible set. Ties between equal-cost candidates resolve toward smaller
/// |p|, and staying committed is preferred over shutting down on exact ties.
/// `soc_window` (signed MW), when given, additionally bounds storage power.
pub fn step_dispatch(
    spec: &ResourceSpec,
    state: &DispatchState,
    baseline_mw: f64,
    net_mw: f64,
    dt_minutes: u32,
    soc_window: Option<(f64, f64)>,
) -> StepResult {
    let target = target_power(spec.role, baseline_mw, net_mw);
    let fs = feasible_power_set(spec, state, dt_minutes);

    let mut best_on: Option<f64> = None;
    for &(lo, hi) in &fs.on_pieces {
        let (lo, hi) = match soc_window {
            Some((s_lo, s_hi)) => (lo.max(s_lo), hi.min(s_hi)),
            None => (lo, hi),
        };
        if lo > hi {
            continue;
        }
        let cand = clamp(target, lo, hi);
        best_on = Some(match best_on {
            None => cand,
            Some(cur) => {
                let (c_cost, cur_cost) = ((cand - target).powi(2), (cur - target).powi(2));
                if c_cost < cur_cost || (c_cost == cur_cost && cand.abs() < cur.abs()) {
                    cand
                } else {
                    cur
                }
            }
        });
    }

    let (p_mw, on, soc_forced) = match best_on {
        Some(p_on) => {
            let on_cost = (p_on - target).powi(2);
            let off_cost = target * target;
            // Exact ties: storage resolves toward zero power (idle), other
            // roles stay committed to avoid spurious start-up lockouts.
            let choose_off = fs.off_allowed
                && (off_cost < on_cost || (spec.is_storage() && off_cost == on_cost));
            if choose_off {
                (0.0, false, false)
            } else {
                (p_on, true, false)
            }
        }
        None => {
            if fs.off_allowed {
                (0.0, false, false)
            } else {
                // Only reachable when a state-of-charge window squeezed every
                // piece away: the store ran out (or filled up) faster than the
                // ramp can back off. The physical limit wins.
                let (s_lo, s_hi) = soc_window.expect("pieces empty only under a soc window");
                let p = clamp(state.p_prev_mw, s_lo, s_hi);
                if p.abs() < spec.p_min_mw {
                    (0.0, false, true)
                } else {
                    (p, true, true)
                }
            }
        }
    };

    let offset_mw = offset_power(spec.role, baseline_mw, net_mw, p_mw);
    StepResult {
        p_mw,
        on,
        offset_mw,
        offset_pu: offset_mw / spec.rated_mw(),
        soc_forced,
    }
}

/// Initial state for a horizon: generators and loads start committed at the
/// baseline level; storage starts idle and ready (offline with the start-up
/// wait already served), with the store at the configured capacity fraction.
pub fn initial_state(spec: &ResourceSpec, baseline: &Baseline, cfg: &RunConfig) -> DispatchState {
    let storage = spec.is_storage();
    DispatchState {
        t: 0,
        p_prev_mw: if cfg.initial_on && !storage {
            baseline.at(0)
        } else {
            0.0
        },
        u_prev: cfg.initial_on && !storage,
        off_minutes: if storage { spec.startup_minutes } else { 0 },
        soc_mwh: spec
            .energy_cap_mwh
            .map(|cap| cfg.initial_soc_frac * cap),
    }
}

/// Dispatch a whole profile interval by interval, threading state forward.
pub fn run_realtime(
    spec: &ResourceSpec,
    profile: &NetLoadProfile,
    cfg: &RunConfig,
) -> Result<Trajectory> {
    profile.validate()?;
    let baseline = resolve_baseline(spec, &cfg.baseline, profile.steps())?;
    let rated = spec.rated_mw();
    let dt = profile.dt_minutes;
    let mut state = initial_state(spec, &baseline, cfg);
    let initial_power_mw = state.p_prev_mw;
    let initial_on = state.u_prev;
    let initial_off_intervals = state.off_minutes.div_ceil(dt.max(1));
    let initial_soc_mwh = state.soc_mwh;

    let mut steps = Vec::with_capacity(profile.steps());
    let mut objective = 0.0;
    for (t, &net_pu) in profile.values.iter().enumerate() {
        let net_mw = net_pu * rated;
        let result = if !cfg.initial_on {
            // Starting offline pins the whole horizon offline.
            let offset_mw = offset_power(spec.role, baseline.at(t), net_mw, 0.0);
            StepResult {
                p_mw: 0.0,
                on: false,
                offset_mw,
                offset_pu: offset_mw / rated,
                soc_forced: false,
            }
        } else {
            let soc_window = match (cfg.soc_enforced, state.soc_mwh) {
                (true, Some(soc)) => Some(soc_power_limits(soc, spec, dt)?),
                _ => None,
            };
            step_dispatch(spec, &state, baseline.at(t), net_mw, dt, soc_window)
        };

        if let Some(soc) = state.soc_mwh {
            state.soc_mwh = Some(apply_soc(soc, result.p_mw, dt, spec)?);
        }
        steps.push(TrajectoryStep {
            minute: t as u32 * dt,
            net_pu,
            power_mw: result.p_mw,
            on: result.on,
            offset_mw: result.offset_mw,
            offset_pu: result.offset_pu,
            soc_mwh: state.soc_mwh,
        });
        objective += result.offset_mw * result.offset_mw;

        state.t = t + 1;
        state.p_prev_mw = result.p_mw;
        state.u_prev = result.on;
        state.off_minutes = if result.on { 0 } else { state.off_minutes + dt };
    }

    Ok(Trajectory {
        dt_minutes: dt,
        rated_mw: rated,
        initial_power_mw,
        initial_on,
        initial_off_intervals,
        initial_soc_mwh,
        steps,
        objective_mw2: objective,
    })
}
