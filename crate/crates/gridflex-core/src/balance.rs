//! Role-specific power balance shared by both solvers.
//!
//! Each role balances the injected net load against a scheduled counterpart:
//!
//! * generator: `p = baseline + net - offset` (baseline is the load it was
//!   scheduled to serve),
//! * load: `baseline = p + net - offset` (baseline is the generation scheduled
//!   for its forecasted consumption),
//! * storage: `p = net - offset` (prior load and generation already cancel).
//!
//! The offset is the deficit left uncovered. For every role the offset is
//! minimized by driving `p` toward a single target power, which makes the
//! per-interval problem a projection.

use crate::catalog::{ResourceRole, ResourceSpec};
use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

/// How the scheduled counterpart power is chosen when no explicit series is
/// given. `Auto` resolves to `Midpoint`, except for curtailment-only
/// generators (variable renewables), which are scheduled at full available
/// output and can only back down.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselinePolicy {
    #[default]
    Auto,
    Midpoint,
    Min,
    Max,
    Series(Vec<f64>),
}

impl BaselinePolicy {
    pub fn label(&self) -> &'static str {
        match self {
            BaselinePolicy::Auto => "auto",
            BaselinePolicy::Midpoint => "midpoint",
            BaselinePolicy::Min => "min",
            BaselinePolicy::Max => "max",
            BaselinePolicy::Series(_) => "file",
        }
    }
}

/// Per-step scheduled counterpart power, MW. Empty for storage, which
/// balances the net load on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Baseline {
    values: Vec<f64>,
}

impl Baseline {
    pub fn none() -> Self {
        Baseline { values: Vec::new() }
    }

    pub fn at(&self, t: usize) -> f64 {
        if self.values.is_empty() {
            0.0
        } else {
            self.values[t]
        }
    }

    pub fn is_none(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Resolve a policy into a concrete per-step baseline for `steps` intervals.
/// Generator and load baselines must fall inside the resource's power range.
pub fn resolve_baseline(
    spec: &ResourceSpec,
    policy: &BaselinePolicy,
    steps: usize,
) -> Result<Baseline> {
    if spec.role == ResourceRole::Storage {
        if let BaselinePolicy::Series(_) = policy {
            bail!("storage resources take no baseline series");
        }
        return Ok(Baseline::none());
    }
    let values = match policy {
        BaselinePolicy::Auto => {
            let level = if spec.curtailment_only {
                spec.p_max_mw
            } else {
                (spec.p_min_mw + spec.p_max_mw) / 2.0
            };
            vec![level; steps]
        }
        BaselinePolicy::Midpoint => vec![(spec.p_min_mw + spec.p_max_mw) / 2.0; steps],
        BaselinePolicy::Min => vec![spec.p_min_mw; steps],
        BaselinePolicy::Max => vec![spec.p_max_mw; steps],
        BaselinePolicy::Series(series) => {
            if series.len() != steps {
                bail!(
                    "baseline series has {} entries but the horizon has {steps} steps",
                    series.len()
                );
            }
            series.clone()
        }
    };
    for (t, b) in values.iter().enumerate() {
        if !(spec.p_min_mw <= *b && *b <= spec.p_max_mw) {
            bail!(
                "baseline {b} MW at step {t} lies outside [{}, {}] MW",
                spec.p_min_mw,
                spec.p_max_mw
            );
        }
    }
    Ok(Baseline { values })
}

/// The power that zeroes the deficit at one step.
pub fn target_power(role: ResourceRole, baseline_mw: f64, net_mw: f64) -> f64 {
    match role {
        ResourceRole::Generator => baseline_mw + net_mw,
        ResourceRole::Load => baseline_mw - net_mw,
        ResourceRole::Storage => net_mw,
    }
}

/// The deficit left by dispatching power `p_mw`, from the balance equation.
pub fn offset_power(role: ResourceRole, baseline_mw: f64, net_mw: f64, p_mw: f64) -> f64 {
    match role {
        ResourceRole::Generator => baseline_mw + net_mw - p_mw,
        ResourceRole::Load => p_mw + net_mw - baseline_mw,
        ResourceRole::Storage => net_mw - p_mw,
    }
}
