//! Day-ahead scheduling: horizon-coupled deficit minimization.
//!
//! Minimizes the sum of squared power deficits over the whole horizon subject
//! to commitment, minimum-off-time (via the offline-duration recursion
//! `OFF_t = (1 - u_{t-1})(OFF_{t-1} + 1)` and the start-up gate
//! `u_t - u_{t-1} <= OFF_t / t_su`), ramping, and per-step deficit-sign
//! bounds that confine the deficit to the side of the peak being shaved.
//!
//! The solver is an exact dynamic program over discretized power levels: the
//! state is (power level or offline streak), transitions encode the ramping
//! and start-up rules, and the per-step cost is the squared balance residual
//! (a level is infeasible at a step when its residual leaves the deficit
//! bounds). Exactness is claimed on the grid, and [`brute_force_oracle`]
//! checks it by exhaustive enumeration on small instances.

use crate::balance::{offset_power, resolve_baseline, Baseline, BaselinePolicy};
use crate::catalog::{validate_spec, ResourceRole, ResourceSpec};
use crate::scenario::NetLoadProfile;
use crate::storage::apply_soc;
use crate::trajectory::{Trajectory, TrajectoryStep};
use serde::{Deserialize, Serialize};

pub const DEFAULT_POWER_LEVELS: usize = 257;
pub const DEFAULT_SOC_LEVELS: usize = 33;

/// Size caps for [`brute_force_oracle`].
pub const ORACLE_MAX_STEPS: usize = 10;
pub const ORACLE_MAX_LEVELS: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum DayaheadError {
    /// The problem definition itself is bad (validation, grid too small).
    Invalid(String),
    /// The constraints admit no trajectory on this grid.
    Infeasible,
    /// Instance exceeds the oracle's exhaustive-enumeration caps.
    TooLarge(String),
}

impl std::fmt::Display for DayaheadError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DayaheadError::Invalid(msg) => write!(f, "invalid schedule problem: {msg}"),
            DayaheadError::Infeasible => write!(f, "no feasible trajectory on this grid"),
            DayaheadError::TooLarge(msg) => write!(f, "instance too large for the oracle: {msg}"),
        }
    }
}

impl std::error::Error for DayaheadError {}

/// A horizon-coupled scheduling instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleProblem {
    pub spec: ResourceSpec,
    pub profile: NetLoadProfile,
    pub baseline_policy: BaselinePolicy,
    /// Number of committed power levels on `[p_min, p_max]` (storage mirrors
    /// the grid on the charging side and keeps the zero deadband point).
    pub power_levels: usize,
    /// Couple the schedule to a discretized state-of-charge dimension.
    pub soc_enforced: bool,
    pub soc_levels: usize,
    pub initial_soc_frac: f64,
}

impl ScheduleProblem {
    pub fn new(spec: ResourceSpec, profile: NetLoadProfile) -> Self {
        ScheduleProblem {
            spec,
            profile,
            baseline_policy: BaselinePolicy::Auto,
            power_levels: DEFAULT_POWER_LEVELS,
            soc_enforced: false,
            soc_levels: DEFAULT_SOC_LEVELS,
            initial_soc_frac: 0.5,
        }
    }
}

/// Per-step deficit bounds: shaving may only leave a deficit on the side of
/// the residual peak, never overshoot past it.
pub fn deficit_bounds(role: ResourceRole, baseline_mw: f64, net_mw: f64) -> (f64, f64) {
    match role {
        ResourceRole::Generator => {
            let s = baseline_mw + net_mw;
            if s < 0.0 {
                (s, 0.0)
            } else {
                (0.0, s)
            }
        }
        ResourceRole::Load => {
            let s = baseline_mw - net_mw;
            if s > 0.0 {
                (-s, 0.0)
            } else {
                (0.0, -s)
            }
        }
        ResourceRole::Storage => {
            let s = net_mw;
            if s < 0.0 {
                (s, 0.0)
            } else {
                (0.0, s)
            }
        }
    }
}

/// Problem definition shared by the dynamic program and the oracle: the level
/// grid, the initial level, and the per-step cost of each level. Transition
/// logic is deliberately *not* shared; each solver derives it on its own.
struct Tables {
    levels: Vec<f64>,
    /// Generators and loads start committed at the level nearest the
    /// baseline; storage starts idle and ready (offline, wait served).
    init_on: bool,
    init_level: usize,
    /// Start-up time in whole intervals.
    su_steps: u32,
    /// Offline-streak saturation point (streak values beyond it behave alike).
    sat: usize,
    ramp_mw: f64,
    dt: u32,
    baseline: Baseline,
    net_mw: Vec<f64>,
    /// cost_off[t]: squared residual of sitting offline, or +inf.
    cost_off: Vec<f64>,
    /// cost_on[t][k]: squared residual of level k, or +inf when the residual
    /// leaves the deficit bounds.
    cost_on: Vec<Vec<f64>>,
}

fn build_tables(problem: &ScheduleProblem) -> Result<Tables, DayaheadError> {
    let spec = &problem.spec;
    let report = validate_spec(spec);
    if !report.is_ok() {
        return Err(DayaheadError::Invalid(format!("resource '{}': {report}", spec.name)));
    }
    problem
        .profile
        .validate()
        .map_err(|e| DayaheadError::Invalid(e.to_string()))?;
    let n = problem.power_levels;
    if n < 2 {
        return Err(DayaheadError::Invalid(format!(
            "need at least 2 power levels to span [{}, {}] MW, got {n}",
            spec.p_min_mw, spec.p_max_mw
        )));
    }
    if problem.soc_enforced && spec.is_storage() && problem.soc_levels < 2 {
        return Err(DayaheadError::Invalid("need at least 2 soc levels".to_string()));
    }

    let grid: Vec<f64> = (0..n)
        .map(|k| spec.p_min_mw + k as f64 * (spec.p_max_mw - spec.p_min_mw) / (n - 1) as f64)
        .collect();
    // Storage mirrors the grid on the charging side; zero power is the
    // offline state, not a committed level (unless p_min is zero, where the
    // box itself reaches zero).
    let mut levels: Vec<f64> = if spec.is_storage() {
        let mut v: Vec<f64> = grid.iter().rev().map(|p| -p).collect();
        v.extend(grid.iter().copied());
        v
    } else {
        grid
    };
    levels.dedup();
    for v in &mut levels {
        if *v == 0.0 {
            *v = 0.0; // normalize -0.0
        }
    }

    let steps = problem.profile.steps();
    let dt = problem.profile.dt_minutes;
    let baseline = resolve_baseline(spec, &problem.baseline_policy, steps)
        .map_err(|e| DayaheadError::Invalid(e.to_string()))?;
    let rated = spec.rated_mw();
    let net_mw: Vec<f64> = problem.profile.values.iter().map(|v| v * rated).collect();

    let init_on = !spec.is_storage();
    let init_level = if init_on {
        let p0 = baseline.at(0);
        levels
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| (*a - p0).abs().partial_cmp(&(*b - p0).abs()).unwrap())
            .map(|(i, _)| i)
            .unwrap()
    } else {
        0
    };

    let su_steps = spec.startup_minutes.div_ceil(dt);
    let sat = (su_steps as usize).max(1);

    let mut cost_off = Vec::with_capacity(steps);
    let mut cost_on = Vec::with_capacity(steps);
    for t in 0..steps {
        let (lo, hi) = deficit_bounds(spec.role, baseline.at(t), net_mw[t]);
        let cost_of = |p: f64| -> f64 {
            let resid = offset_power(spec.role, baseline.at(t), net_mw[t], p);
            if lo <= resid && resid <= hi {
                resid * resid
            } else {
                f64::INFINITY
            }
        };
        cost_off.push(cost_of(0.0));
        cost_on.push(levels.iter().map(|&p| cost_of(p)).collect());
    }

    Ok(Tables {
        levels,
        init_on,
        init_level,
        su_steps,
        sat,
        ramp_mw: dt as f64 * spec.ramp_mw_per_min,
        dt,
        baseline,
        net_mw,
        cost_off,
        cost_on,
    })
}

impl Tables {
    fn startup_ok(&self, spec: &ResourceSpec, p: f64) -> bool {
        // A unit coming online lands inside [p_min, p_min + ramp],
        // magnitude-wise for storage. Storage's idle zero level fails the
        // lower edge when p_min > 0: commitment changes pass through p_min.
        p.abs() >= spec.p_min_mw && p.abs() <= spec.p_min_mw + self.ramp_mw
    }

    fn shutdown_ok(&self, spec: &ResourceSpec, p: f64) -> bool {
        p.abs() >= spec.p_min_mw && p.abs() <= spec.p_min_mw + self.ramp_mw
    }

    /// Streak stored as min(actual, sat); the gate needs actual >= su_steps.
    fn gate_open(&self, stored_streak: usize) -> bool {
        self.su_steps == 0 || stored_streak >= self.su_steps as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BaseState {
    /// Offline with stored streak 1..=sat.
    Off(usize),
    On(usize),
}

/// Solve the scheduling problem exactly on its grid.
pub fn solve_dayahead_dp(problem: &ScheduleProblem) -> Result<Trajectory, DayaheadError> {
    solve_dp_inner(problem, false)
}

/// Test hook: same solver with one transition class (shutdowns) flipped
/// infeasible, so oracle comparisons must catch the corruption.
#[doc(hidden)]
pub fn solve_dayahead_dp_faulted(problem: &ScheduleProblem) -> Result<Trajectory, DayaheadError> {
    solve_dp_inner(problem, true)
}

fn solve_dp_inner(problem: &ScheduleProblem, fault: bool) -> Result<Trajectory, DayaheadError> {
    let tables = build_tables(problem)?;
    if problem.soc_enforced && problem.spec.is_storage() {
        solve_dp_soc(problem, &tables, fault)
    } else {
        solve_dp_plain(problem, &tables, fault)
    }
}

fn state_count(tables: &Tables) -> usize {
    tables.sat + tables.levels.len()
}

// State indexing: 0..sat are offline streaks 1..=sat; sat.. are on-levels.
fn idx_off(streak: usize) -> usize {
    streak - 1
}
fn idx_on(tables: &Tables, level: usize) -> usize {
    tables.sat + level
}

fn solve_dp_plain(
    problem: &ScheduleProblem,
    tables: &Tables,
    fault: bool,
) -> Result<Trajectory, DayaheadError> {
    let spec = &problem.spec;
    let steps = problem.profile.steps();
    let n_states = state_count(tables);
    let levels = &tables.levels;
    let n_levels = levels.len();
    let sat = tables.sat;

    // Time-independent transition structure.
    let on_range: Vec<(usize, usize)> = (0..n_levels)
        .map(|b| {
            let lo = levels.partition_point(|&p| p < levels[b] - tables.ramp_mw);
            let hi = levels.partition_point(|&p| p <= levels[b] + tables.ramp_mw);
            (lo, hi) // source levels with |p_a - p_b| <= ramp
        })
        .collect();
    let startup_ok: Vec<bool> = levels.iter().map(|&p| tables.startup_ok(spec, p)).collect();
    let shutdown_ok: Vec<bool> = levels
        .iter()
        .map(|&p| !fault && tables.shutdown_ok(spec, p))
        .collect();

    let mut prev = vec![f64::INFINITY; n_states];
    let mut cur = vec![f64::INFINITY; n_states];
    let mut back: Vec<Vec<u32>> = Vec::with_capacity(steps);
    if tables.init_on {
        prev[idx_on(tables, tables.init_level)] = 0.0;
    } else {
        prev[idx_off(sat)] = 0.0;
    }

    for t in 0..steps {
        cur.fill(f64::INFINITY);
        let mut bp = vec![u32::MAX; n_states];

        // Offline destinations.
        if tables.cost_off[t].is_finite() {
            // Fresh shutdown: streak 1 from any shutdownable on-level.
            let mut best = f64::INFINITY;
            let mut src = u32::MAX;
            for a in 0..n_levels {
                if shutdown_ok[a] {
                    let c = prev[idx_on(tables, a)];
                    if c < best {
                        best = c;
                        src = idx_on(tables, a) as u32;
                    }
                }
            }
            if sat == 1 && prev[idx_off(1)] < best {
                best = prev[idx_off(1)];
                src = idx_off(1) as u32;
            }
            if best.is_finite() {
                cur[idx_off(1)] = best + tables.cost_off[t];
                bp[idx_off(1)] = src;
            }
            // Growing streaks.
            for s in 2..=sat {
                let mut best = prev[idx_off(s - 1)];
                let mut src = idx_off(s - 1) as u32;
                if s == sat && prev[idx_off(sat)] < best {
                    best = prev[idx_off(sat)];
                    src = idx_off(sat) as u32;
                }
                if best.is_finite() {
                    cur[idx_off(s)] = best + tables.cost_off[t];
                    bp[idx_off(s)] = src;
                }
            }
        }

        // Committed destinations.
        for b in 0..n_levels {
            let step_cost = tables.cost_on[t][b];
            if !step_cost.is_finite() {
                continue;
            }
            let mut best = f64::INFINITY;
            let mut src = u32::MAX;
            let (a_lo, a_hi) = on_range[b];
            for a in a_lo..a_hi {
                let c = prev[idx_on(tables, a)];
                if c < best {
                    best = c;
                    src = idx_on(tables, a) as u32;
                }
            }
            if startup_ok[b] {
                for s in 1..=sat {
                    if tables.gate_open(s) && prev[idx_off(s)] < best {
                        best = prev[idx_off(s)];
                        src = idx_off(s) as u32;
                    }
                }
            }
            if best.is_finite() {
                cur[idx_on(tables, b)] = best + step_cost;
                bp[idx_on(tables, b)] = src;
            }
        }

        if cur.iter().all(|c| !c.is_finite()) {
            return Err(DayaheadError::Infeasible);
        }
        back.push(bp);
        std::mem::swap(&mut prev, &mut cur);
    }

    // Backtrack from the cheapest final state.
    let (mut state, objective) = prev
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.total_cmp(b))
        .map(|(i, c)| (i, *c))
        .ok_or(DayaheadError::Infeasible)?;
    if !objective.is_finite() {
        return Err(DayaheadError::Infeasible);
    }
    let mut chosen = vec![0usize; steps];
    for t in (0..steps).rev() {
        chosen[t] = state;
        state = back[t][state] as usize;
    }

    let moves: Vec<(f64, bool)> = chosen
        .iter()
        .map(|&s| {
            if s < sat {
                (0.0, false)
            } else {
                (levels[s - sat], true)
            }
        })
        .collect();
    Ok(build_trajectory(problem, tables, &moves, objective))
}

fn solve_dp_soc(
    problem: &ScheduleProblem,
    tables: &Tables,
    fault: bool,
) -> Result<Trajectory, DayaheadError> {
    let spec = &problem.spec;
    let steps = problem.profile.steps();
    let levels = &tables.levels;
    let n_levels = levels.len();
    let sat = tables.sat;
    let n_base = state_count(tables);
    let j_count = problem.soc_levels;
    let cap = spec.energy_cap_mwh.expect("validated storage");

    let soc_grid: Vec<f64> = (0..j_count)
        .map(|j| j as f64 * cap / (j_count - 1) as f64)
        .collect();
    let nearest_soc = |soc: f64| -> usize {
        soc_grid
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| (*a - soc).abs().partial_cmp(&(*b - soc).abs()).unwrap())
            .map(|(j, _)| j)
            .unwrap()
    };
    // next_soc[j][level] = landing soc index, or None when the move would
    // leave [0, cap].
    let next_soc: Vec<Vec<Option<usize>>> = (0..j_count)
        .map(|j| {
            levels
                .iter()
                .map(|&p| {
                    let soc = apply_soc(soc_grid[j], p, tables.dt, spec).expect("storage spec");
                    (0.0..=cap).contains(&soc).then(|| nearest_soc(soc))
                })
                .collect()
        })
        .collect();

    let startup_ok: Vec<bool> = levels.iter().map(|&p| tables.startup_ok(spec, p)).collect();
    let shutdown_ok: Vec<bool> = levels
        .iter()
        .map(|&p| !fault && tables.shutdown_ok(spec, p))
        .collect();

    let n_states = n_base * j_count;
    let sidx = |base: usize, j: usize| base * j_count + j;
    let mut prev = vec![f64::INFINITY; n_states];
    let mut cur = vec![f64::INFINITY; n_states];
    let mut back: Vec<Vec<u32>> = Vec::with_capacity(steps);
    let init_j = nearest_soc(problem.initial_soc_frac * cap);
    if tables.init_on {
        prev[sidx(idx_on(tables, tables.init_level), init_j)] = 0.0;
    } else {
        prev[sidx(idx_off(sat), init_j)] = 0.0;
    }

    for t in 0..steps {
        cur.fill(f64::INFINITY);
        let mut bp = vec![u32::MAX; n_states];
        let mut relax = |dest: usize, cand: f64, src: usize| {
            if cand < cur[dest] {
                cur[dest] = cand;
                bp[dest] = src as u32;
            }
        };
        for base in 0..n_base {
            for j in 0..j_count {
                let acc = prev[sidx(base, j)];
                if !acc.is_finite() {
                    continue;
                }
                let src = sidx(base, j);
                match if base < sat { BaseState::Off(base + 1) } else { BaseState::On(base - sat) } {
                    BaseState::Off(streak) => {
                        if tables.cost_off[t].is_finite() {
                            let s_next = (streak + 1).min(sat);
                            relax(sidx(idx_off(s_next), j), acc + tables.cost_off[t], src);
                        }
                        if tables.gate_open(streak) {
                            for b in 0..n_levels {
                                if startup_ok[b] && tables.cost_on[t][b].is_finite() {
                                    if let Some(j2) = next_soc[j][b] {
                                        relax(
                                            sidx(idx_on(tables, b), j2),
                                            acc + tables.cost_on[t][b],
                                            src,
                                        );
                                    }
                                }
                            }
                        }
                    }
                    BaseState::On(a) => {
                        if shutdown_ok[a] && tables.cost_off[t].is_finite() {
                            relax(sidx(idx_off(1), j), acc + tables.cost_off[t], src);
                        }
                        for b in 0..n_levels {
                            if (levels[b] - levels[a]).abs() <= tables.ramp_mw
                                && tables.cost_on[t][b].is_finite()
                            {
                                if let Some(j2) = next_soc[j][b] {
                                    relax(
                                        sidx(idx_on(tables, b), j2),
                                        acc + tables.cost_on[t][b],
                                        src,
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
        if cur.iter().all(|c| !c.is_finite()) {
            return Err(DayaheadError::Infeasible);
        }
        back.push(bp);
        std::mem::swap(&mut prev, &mut cur);
    }

    let (mut state, objective) = prev
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| a.total_cmp(b))
        .map(|(i, c)| (i, *c))
        .ok_or(DayaheadError::Infeasible)?;
    if !objective.is_finite() {
        return Err(DayaheadError::Infeasible);
    }
    let mut chosen = vec![0usize; steps];
    for t in (0..steps).rev() {
        chosen[t] = state;
        state = back[t][state] as usize;
    }
    let moves: Vec<(f64, bool)> = chosen
        .iter()
        .map(|&s| {
            let base = s / j_count;
            if base < sat {
                (0.0, false)
            } else {
                (levels[base - sat], true)
            }
        })
        .collect();
    Ok(build_trajectory(problem, tables, &moves, objective))
}

fn build_trajectory(
    problem: &ScheduleProblem,
    tables: &Tables,
    moves: &[(f64, bool)],
    objective: f64,
) -> Trajectory {
    let spec = &problem.spec;
    let rated = spec.rated_mw();
    let initial_soc_mwh = spec
        .energy_cap_mwh
        .map(|cap| problem.initial_soc_frac * cap);
    let mut soc = initial_soc_mwh;
    let steps = moves
        .iter()
        .enumerate()
        .map(|(t, &(p, on))| {
            let offset = offset_power(spec.role, tables.baseline.at(t), tables.net_mw[t], p);
            if let Some(s) = soc {
                soc = Some(apply_soc(s, p, tables.dt, spec).expect("storage spec"));
            }
            TrajectoryStep {
                minute: t as u32 * tables.dt,
                net_pu: problem.profile.values[t],
                power_mw: p,
                on,
                offset_mw: offset,
                offset_pu: offset / rated,
                soc_mwh: soc,
            }
        })
        .collect();
    Trajectory {
        dt_minutes: tables.dt,
        rated_mw: rated,
        initial_power_mw: if tables.init_on {
            tables.levels[tables.init_level]
        } else {
            0.0
        },
        initial_on: tables.init_on,
        initial_off_intervals: if tables.init_on { 0 } else { tables.su_steps },
        initial_soc_mwh,
        steps,
        objective_mw2: objective,
    }
}

/// Exhaustively enumerate every commitment sequence and grid power assignment
/// on a small instance, validating the full constraint set per sequence, and
/// return the exact optimum. Independent of the dynamic program: feasibility
/// is re-derived from the constraint formulas here.
pub fn brute_force_oracle(problem: &ScheduleProblem) -> Result<Trajectory, DayaheadError> {
    let steps = problem.profile.steps();
    if steps > ORACLE_MAX_STEPS {
        return Err(DayaheadError::TooLarge(format!(
            "{steps} steps exceeds the {ORACLE_MAX_STEPS}-step cap"
        )));
    }
    if problem.power_levels > ORACLE_MAX_LEVELS {
        return Err(DayaheadError::TooLarge(format!(
            "{} levels exceeds the {ORACLE_MAX_LEVELS}-level cap",
            problem.power_levels
        )));
    }
    if problem.soc_enforced && problem.spec.is_storage() {
        return Err(DayaheadError::TooLarge(
            "oracle does not enumerate the soc dimension".to_string(),
        ));
    }
    let tables = build_tables(problem)?;
    let spec = &problem.spec;
    let n_levels = tables.levels.len();

    // Candidate moves per step: offline (usize::MAX) or a level index, cheap
    // cost first so the accumulated bound prunes aggressively.
    let mut order_per_t: Vec<Vec<(usize, f64)>> = Vec::with_capacity(steps);
    for t in 0..steps {
        let mut cands: Vec<(usize, f64)> = Vec::with_capacity(n_levels + 1);
        if tables.cost_off[t].is_finite() {
            cands.push((usize::MAX, tables.cost_off[t]));
        }
        for b in 0..n_levels {
            if tables.cost_on[t][b].is_finite() {
                cands.push((b, tables.cost_on[t][b]));
            }
        }
        cands.sort_by(|a, b| a.1.total_cmp(&b.1));
        order_per_t.push(cands);
    }

    struct Search<'a> {
        tables: &'a Tables,
        spec: &'a ResourceSpec,
        order_per_t: &'a [Vec<(usize, f64)>],
        steps: usize,
        best: f64,
        best_path: Option<Vec<usize>>,
        path: Vec<usize>,
    }

    impl Search<'_> {
        // Literal constraint check for one move, written from the constraint
        // formulas rather than the DP transition tables: the start-up gate on
        // the replayed offline streak, and the ramping pair
        //   p_t - p_{t-1} <= dt*r*u_t + p_min*(u_t - u_{t-1})
        //   p_{t-1} - p_t <= dt*r*u_{t-1} + p_min*(u_{t-1} - u_t)
        // applied to |p| for storage on commitment changes.
        fn move_ok(&self, u_prev: bool, p_prev: f64, off_streak: u32, cand: usize) -> bool {
            let t = self.tables;
            let u = cand != usize::MAX;
            let p = if u { t.levels[cand] } else { 0.0 };
            if u && !u_prev {
                // Gate u_t - u_{t-1} <= OFF_t / t_su, with OFF_t the replayed
                // offline streak per OFF_t = (1 - u_{t-1})(OFF_{t-1} + 1).
                if t.su_steps > 0 && off_streak < t.su_steps {
                    return false;
                }
            }
            let (pv, pc) = if self.spec.is_storage() && (u != u_prev) {
                (p_prev.abs(), p.abs())
            } else {
                (p_prev, p)
            };
            let (uv, uc) = (f64::from(u8::from(u_prev)), f64::from(u8::from(u)));
            let up = pc - pv <= t.ramp_mw * uc + self.spec.p_min_mw * (uc - uv);
            let down = pv - pc <= t.ramp_mw * uv + self.spec.p_min_mw * (uv - uc);
            up && down
        }

        fn dfs(&mut self, step: usize, u_prev: bool, p_prev: f64, off_streak: u32, acc: f64) {
            if step == self.steps {
                if acc < self.best {
                    self.best = acc;
                    self.best_path = Some(self.path.clone());
                }
                return;
            }
            for &(cand, step_cost) in &self.order_per_t[step] {
                let total = acc + step_cost;
                if total >= self.best {
                    continue;
                }
                if !self.move_ok(u_prev, p_prev, off_streak, cand) {
                    continue;
                }
                let on = cand != usize::MAX;
                let p = if on { self.tables.levels[cand] } else { 0.0 };
                let streak = if on { 0 } else { off_streak + 1 };
                self.path.push(cand);
                self.dfs(step + 1, on, p, streak, total);
                self.path.pop();
            }
        }
    }

    let mut search = Search {
        tables: &tables,
        spec,
        order_per_t: &order_per_t,
        steps,
        best: f64::INFINITY,
        best_path: None,
        path: Vec::with_capacity(steps),
    };
    if tables.init_on {
        search.dfs(0, true, tables.levels[tables.init_level], 0, 0.0);
    } else {
        search.dfs(0, false, 0.0, tables.su_steps, 0.0);
    }

    match search.best_path {
        None => Err(DayaheadError::Infeasible),
        Some(path) => {
            let moves: Vec<(f64, bool)> = path
                .iter()
                .map(|&c| {
                    if c == usize::MAX {
                        (0.0, false)
                    } else {
                        (tables.levels[c], true)
                    }
                })
                .collect();
            Ok(build_trajectory(problem, &tables, &moves, search.best))
        }
    }
}
