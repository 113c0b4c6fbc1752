//! Deficit statistics and comparative rankings.

use crate::trajectory::Trajectory;
use anyhow::{bail, Result};
use serde::{Deserialize, Serialize};

/// Per-unit deficit statistics over one trajectory. All four are computed
/// over every step in the horizon, zero-net-load steps included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeficitStats {
    /// Mean of |offset|, p.u.
    pub avg_abs_pu: f64,
    /// Signed deficit energy, p.u.-hours.
    pub net_energy_signed_puh: f64,
    /// Absolute deficit energy, p.u.-hours; equals avg_abs times the horizon
    /// in hours.
    pub net_energy_abs_puh: f64,
    /// Root mean squared offset, p.u.
    pub rms_pu: f64,
}

pub fn compute_stats(traj: &Trajectory) -> Result<DeficitStats> {
    if traj.steps.is_empty() {
        bail!("cannot compute statistics of an empty trajectory");
    }
    let n = traj.steps.len() as f64;
    let dt_h = traj.dt_minutes as f64 / 60.0;
    let mut sum_abs = 0.0;
    let mut sum_signed = 0.0;
    let mut sum_sq = 0.0;
    for o in traj.offsets_pu() {
        sum_abs += o.abs();
        sum_signed += o;
        sum_sq += o * o;
    }
    Ok(DeficitStats {
        avg_abs_pu: sum_abs / n,
        net_energy_signed_puh: sum_signed * dt_h,
        net_energy_abs_puh: sum_abs * dt_h,
        rms_pu: (sum_sq / n).sqrt(),
    })
}

/// Sort resources from most to least flexible: ascending RMS deficit, then
/// ascending absolute deficit energy, then name.
pub fn rank_resources(entries: &[(String, DeficitStats)]) -> Result<Vec<(String, DeficitStats)>> {
    if entries.len() < 2 {
        bail!("ranking needs at least 2 resources, got {}", entries.len());
    }
    let mut sorted = entries.to_vec();
    sorted.sort_by(|(name_a, a), (name_b, b)| {
        a.rms_pu
            .total_cmp(&b.rms_pu)
            .then(a.net_energy_abs_puh.total_cmp(&b.net_energy_abs_puh))
            .then(name_a.cmp(name_b))
    });
    Ok(sorted)
}

/// Format with 4 significant digits, the precision used in the report tables.
pub fn sig4(x: f64) -> String {
    if x == 0.0 {
        return "0.0000".to_string();
    }
    if x.abs() < 1e-4 {
        return format!("{x:.3e}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (3 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

const STATS_COLUMNS: [&str; 5] = [
    "resource",
    "avg_abs_pu",
    "net_energy_signed_puh",
    "net_energy_abs_puh",
    "rms_pu",
];

/// Machine-readable rendering: full-precision CSV, one row per resource.
pub fn stats_csv(rows: &[(String, DeficitStats)]) -> String {
    let mut out = STATS_COLUMNS.join(",");
    out.push('\n');
    for (name, s) in rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            name, s.avg_abs_pu, s.net_energy_signed_puh, s.net_energy_abs_puh, s.rms_pu
        ));
    }
    out
}

/// Human rendering: aligned columns at 4 significant digits.
pub fn stats_table(title: &str, rows: &[(String, DeficitStats)]) -> String {
    let header = [
        "Resource",
        "Avg |Deficit| [pu]",
        "Net Deficit [pu·h]",
        "|Net| Deficit [pu·h]",
        "RMS Deficit [pu]",
    ];
    let mut cells: Vec<[String; 5]> = vec![header.map(str::to_string)];
    for (name, s) in rows {
        cells.push([
            name.clone(),
            sig4(s.avg_abs_pu),
            sig4(s.net_energy_signed_puh),
            sig4(s.net_energy_abs_puh),
            sig4(s.rms_pu),
        ]);
    }
    let widths: Vec<usize> = (0..5)
        .map(|c| cells.iter().map(|row| row[c].len()).max().unwrap())
        .collect();
    let mut out = format!("{title}\n");
    for (i, row) in cells.iter().enumerate() {
        let line: Vec<String> = row
            .iter()
            .zip(&widths)
            .map(|(cell, w)| format!("{cell:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
        if i == 0 {
            let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
            out.push_str(&rule.join("  "));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::TrajectoryStep;
    use proptest::prelude::*;

    fn traj_from_offsets(offsets_pu: &[f64], dt_minutes: u32, rated: f64) -> Trajectory {
        let steps = offsets_pu
            .iter()
            .enumerate()
            .map(|(t, &o)| TrajectoryStep {
                minute: t as u32 * dt_minutes,
                net_pu: 0.0,
                power_mw: 0.0,
                on: true,
                offset_mw: o * rated,
                offset_pu: o,
                soc_mwh: None,
            })
            .collect();
        Trajectory {
            dt_minutes,
            rated_mw: rated,
            initial_power_mw: 0.0,
            initial_on: true,
            initial_off_intervals: 0,
            initial_soc_mwh: None,
            steps,
            objective_mw2: 0.0,
        }
    }

    #[test]
    fn constant_offset_series() {
        let traj = traj_from_offsets(&[0.1; 120], 1, 10.0);
        let s = compute_stats(&traj).unwrap();
        assert!((s.avg_abs_pu - 0.1).abs() < 1e-15);
        assert!((s.net_energy_abs_puh - 0.2).abs() < 1e-15);
        assert!((s.rms_pu - 0.1).abs() < 1e-15);
        assert!((s.net_energy_signed_puh - 0.2).abs() < 1e-15);
    }

    #[test]
    fn antisymmetric_pair_cancels_signed_energy() {
        let traj = traj_from_offsets(&[0.1, -0.1], 60, 10.0);
        let s = compute_stats(&traj).unwrap();
        assert!((s.avg_abs_pu - 0.1).abs() < 1e-15);
        assert_eq!(s.net_energy_signed_puh, 0.0);
        assert!((s.net_energy_abs_puh - 0.2).abs() < 1e-15);
        assert!((s.rms_pu - 0.1).abs() < 1e-15);
    }

    #[test]
    fn zero_trajectory_zero_stats() {
        let s = compute_stats(&traj_from_offsets(&[0.0; 7], 1, 1.0)).unwrap();
        assert_eq!(
            (s.avg_abs_pu, s.net_energy_signed_puh, s.net_energy_abs_puh, s.rms_pu),
            (0.0, 0.0, 0.0, 0.0)
        );
    }

    #[test]
    fn empty_trajectory_is_rejected() {
        assert!(compute_stats(&traj_from_offsets(&[], 1, 1.0)).is_err());
    }

    fn stats(rms: f64, net_abs: f64) -> DeficitStats {
        DeficitStats {
            avg_abs_pu: 0.0,
            net_energy_signed_puh: 0.0,
            net_energy_abs_puh: net_abs,
            rms_pu: rms,
        }
    }

    #[test]
    fn ranking_sorts_by_rms_then_energy_then_name() {
        let rows = vec![
            ("A".to_string(), stats(0.2, 0.1)),
            ("B".to_string(), stats(0.1, 0.1)),
        ];
        let ranked = rank_resources(&rows).unwrap();
        assert_eq!(ranked[0].0, "B");

        let rows = vec![
            ("A".to_string(), stats(0.1, 0.3)),
            ("B".to_string(), stats(0.1, 0.2)),
        ];
        assert_eq!(rank_resources(&rows).unwrap()[0].0, "B");

        let rows = vec![
            ("B".to_string(), stats(0.1, 0.2)),
            ("A".to_string(), stats(0.1, 0.2)),
        ];
        assert_eq!(rank_resources(&rows).unwrap()[0].0, "A");
    }

    #[test]
    fn ranking_rejects_single_entry() {
        assert!(rank_resources(&[("A".to_string(), stats(0.1, 0.1))]).is_err());
    }

    #[test]
    fn four_significant_digits() {
        assert_eq!(sig4(0.16223), "0.1622");
        assert_eq!(sig4(2.0551), "2.055");
        assert_eq!(sig4(0.0001234), "0.0001234");
        assert_eq!(sig4(0.0), "0.0000");
    }

    proptest! {
        #[test]
        fn rms_dominates_avg_abs(offsets in prop::collection::vec(-1.0f64..1.0, 1..200)) {
            let traj = traj_from_offsets(&offsets, 1, 5.0);
            let s = compute_stats(&traj).unwrap();
            prop_assert!(s.rms_pu >= s.avg_abs_pu - 1e-12);
            prop_assert!(s.net_energy_signed_puh.abs() <= s.net_energy_abs_puh + 1e-12);
        }

        #[test]
        fn net_abs_equals_avg_times_horizon(offsets in prop::collection::vec(-1.0f64..1.0, 1..200), dt in 1u32..120) {
            let traj = traj_from_offsets(&offsets, dt, 5.0);
            let s = compute_stats(&traj).unwrap();
            let horizon_h = offsets.len() as f64 * dt as f64 / 60.0;
            let expected = s.avg_abs_pu * horizon_h;
            prop_assert!((s.net_energy_abs_puh - expected).abs() <= 1e-12 * expected.max(1.0));
        }
    }
}
