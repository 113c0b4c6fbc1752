//! Dispatch results.

use serde::{Deserialize, Serialize};

/// One dispatched interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryStep {
    /// Interval start, minutes from horizon start.
    pub minute: u32,
    /// Net load injected this interval, per-unit of rated power.
    pub net_pu: f64,
    /// Dispatched power, MW (signed for storage).
    pub power_mw: f64,
    /// Commitment status.
    pub on: bool,
    /// Power deficit, MW.
    pub offset_mw: f64,
    /// Power deficit, per-unit of rated power.
    pub offset_pu: f64,
    /// State of charge after this interval, MWh; storage only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub soc_mwh: Option<f64>,
}

/// Full dispatch result over one horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub dt_minutes: u32,
    pub rated_mw: f64,
    /// Commitment/power state the dispatch started from.
    pub initial_power_mw: f64,
    pub initial_on: bool,
    /// Offline intervals already served before the horizon (storage starts
    /// idle and ready; other roles start committed with zero).
    #[serde(default)]
    pub initial_off_intervals: u32,
    /// State of charge entering the horizon, MWh; storage only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_soc_mwh: Option<f64>,
    pub steps: Vec<TrajectoryStep>,
    /// Sum of squared deficits, MW^2.
    pub objective_mw2: f64,
}

impl Trajectory {
    pub fn offsets_pu(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.offset_pu)
    }

    /// Render as trajectory CSV. The state-of-charge column is present only
    /// when the dispatch tracked one.
    pub fn to_csv_string(&self) -> String {
        let with_soc = self.steps.iter().any(|s| s.soc_mwh.is_some());
        let mut out = String::from(if with_soc {
            "minute,net_pu,power_MW,status,offset_MW,offset_pu,soc_MWh\n"
        } else {
            "minute,net_pu,power_MW,status,offset_MW,offset_pu\n"
        });
        for s in &self.steps {
            out.push_str(&format!(
                "{},{},{},{},{},{}",
                s.minute,
                s.net_pu,
                s.power_mw,
                u8::from(s.on),
                s.offset_mw,
                s.offset_pu
            ));
            if with_soc {
                out.push(',');
                if let Some(soc) = s.soc_mwh {
                    out.push_str(&soc.to_string());
                }
            }
            out.push('\n');
        }
        out
    }
}
