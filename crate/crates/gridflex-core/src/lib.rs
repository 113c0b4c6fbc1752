//! Energy-flexibility dispatch simulation.
//!
//! Quantifies how well generators, flexible loads, and energy-storage systems
//! absorb unforeseen net-load stress. A resource is dispatched against a
//! per-unit net-load profile by one of two solvers and judged by the power
//! deficit it leaves uncovered:
//!
//! * [`realtime`] — each interval optimized independently (myopic projection
//!   onto the feasible power set), emulating a real-time response,
//! * [`dayahead`] — horizon-coupled scheduling by exact dynamic programming
//!   over discretized power levels, with commitment, start-up, ramping, and
//!   deficit-sign constraints.
//!
//! [`catalog`] ships the built-in resource parameter set, [`scenario`] builds
//! the three stress profiles (intermittency, duck-curve peak shaving, energy
//! reserve), [`metrics`] reduces trajectories to deficit statistics, and
//! [`audit`] replays every constraint independently of the solvers.

pub mod audit;
pub mod balance;
pub mod catalog;
pub mod dayahead;
pub mod metrics;
pub mod realtime;
pub mod scenario;
pub mod storage;
pub mod trajectory;

pub use balance::{Baseline, BaselinePolicy};
pub use catalog::{builtin_catalog, lookup_resource, validate_spec, ResourceRole, ResourceSpec};
pub use metrics::{compute_stats, rank_resources, DeficitStats};
pub use scenario::{
    gen_energy_reserve, gen_intermittency, gen_peak_shaving, NetLoadProfile, ScenarioKind,
};
pub use trajectory::{Trajectory, TrajectoryStep};
