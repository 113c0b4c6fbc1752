//! State-of-charge dynamics and energy-capacity limits.
//!
//! Grid-side accounting: energy drawn from the grid while charging is scaled
//! by the charging efficiency on its way into the store, and energy delivered
//! to the grid while discharging costs `1/discharge_eff` of stored energy.

use crate::catalog::{ResourceRole, ResourceSpec};
use anyhow::{bail, Result};

fn storage_params(spec: &ResourceSpec) -> Result<(f64, f64, f64)> {
    if spec.role != ResourceRole::Storage {
        bail!("'{}' is not a storage resource", spec.name);
    }
    match (spec.charge_eff, spec.discharge_eff, spec.energy_cap_mwh) {
        (Some(c), Some(d), Some(cap)) => Ok((c, d, cap)),
        _ => bail!("'{}' is missing storage parameters", spec.name),
    }
}

/// Advance the state of charge by one interval at signed power `p_mw`
/// (positive discharging, negative charging). No clamping: bounds are
/// enforced ahead of time via [`soc_power_limits`].
pub fn apply_soc(soc_mwh: f64, p_mw: f64, dt_minutes: u32, spec: &ResourceSpec) -> Result<f64> {
    let (charge_eff, discharge_eff, _) = storage_params(spec)?;
    let dt_h = dt_minutes as f64 / 60.0;
    Ok(if p_mw > 0.0 {
        soc_mwh - p_mw * dt_h / discharge_eff
    } else if p_mw < 0.0 {
        soc_mwh + (-p_mw) * dt_h * charge_eff
    } else {
        soc_mwh
    })
}

/// Signed power window `[p_lo, p_hi]` that keeps the state of charge inside
/// `[0, energy_cap]` over one interval.
pub fn soc_power_limits(soc_mwh: f64, spec: &ResourceSpec, dt_minutes: u32) -> Result<(f64, f64)> {
    let (charge_eff, discharge_eff, cap) = storage_params(spec)?;
    let dt_h = dt_minutes as f64 / 60.0;
    let p_hi = spec.p_max_mw.min(soc_mwh * discharge_eff / dt_h);
    let p_lo = -spec.p_max_mw.min((cap - soc_mwh) / (dt_h * charge_eff));
    Ok((p_lo, p_hi))
}
