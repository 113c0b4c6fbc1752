//! Net-load stress profiles.
//!
//! A [`NetLoadProfile`] is a per-unit net-load series (normalized by the rated
//! power of whichever resource is being tested): positive values are extra
//! demand the resource must cover, negative values extra generation it must
//! absorb. Three built-in generators produce the stress cases used throughout:
//!
//! * [`gen_intermittency`] — 2 h of seeded, sign-alternating 5-minute blocks,
//! * [`gen_peak_shaving`] — a 24 h duck-curve day (midday generation bump,
//!   evening demand bump),
//! * [`gen_energy_reserve`] — a 20 h step profile with sustained ±0.5 p.u.
//!   blocks.

use anyhow::{bail, Context, Result};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::path::Path;

/// Magnitude cap for the built-in profiles, per-unit of rated power.
pub const MAX_MAGNITUDE_PU: f64 = 0.5;

const INTERMITTENCY_MINUTES: u32 = 120;
const INTERMITTENCY_BLOCK_MINUTES: u32 = 5;
const PEAK_SHAVING_MINUTES: u32 = 1440;
const ENERGY_RESERVE_MINUTES: u32 = 1200;

// Duck-curve shape: a raised-cosine generation bump reaching -0.5 p.u. at
// 12:00 (8 h wide) and a raised-cosine demand bump reaching +0.5 p.u. at
// 19:00 (6 h wide).
const DUCK_GEN_CENTER_MIN: f64 = 720.0;
const DUCK_GEN_WIDTH_MIN: f64 = 480.0;
const DUCK_DEMAND_CENTER_MIN: f64 = 1140.0;
const DUCK_DEMAND_WIDTH_MIN: f64 = 360.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScenarioKind {
    Intermittency,
    PeakShaving,
    EnergyReserve,
    Custom,
}

impl ScenarioKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            ScenarioKind::Intermittency => "intermittency",
            ScenarioKind::PeakShaving => "peak-shaving",
            ScenarioKind::EnergyReserve => "energy-reserve",
            ScenarioKind::Custom => "custom",
        }
    }

    /// Horizon of the built-in kinds, minutes. `None` for custom profiles.
    pub fn horizon_minutes(&self) -> Option<u32> {
        match self {
            ScenarioKind::Intermittency => Some(INTERMITTENCY_MINUTES),
            ScenarioKind::PeakShaving => Some(PEAK_SHAVING_MINUTES),
            ScenarioKind::EnergyReserve => Some(ENERGY_RESERVE_MINUTES),
            ScenarioKind::Custom => None,
        }
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ScenarioKind {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "intermittency" => Ok(ScenarioKind::Intermittency),
            "peak-shaving" | "peak_shaving" | "duck-curve" => Ok(ScenarioKind::PeakShaving),
            "energy-reserve" | "energy_reserve" => Ok(ScenarioKind::EnergyReserve),
            "custom" => Ok(ScenarioKind::Custom),
            other => bail!("unknown scenario kind '{other}'"),
        }
    }
}

/// Per-unit net-load time series at a fixed interval length.
///
/// `values[i]` is the net load on `[i*dt, (i+1)*dt)` minutes; built-in
/// profiles are sampled at the left edge of each interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetLoadProfile {
    pub kind: ScenarioKind,
    pub dt_minutes: u32,
    pub values: Vec<f64>,
}

impl NetLoadProfile {
    pub fn steps(&self) -> usize {
        self.values.len()
    }

    pub fn horizon_minutes(&self) -> u32 {
        self.dt_minutes * self.values.len() as u32
    }

    /// Check the profile invariants: finite samples, positive dt, and for the
    /// built-in kinds the fixed horizon and the 0.5 p.u. magnitude cap.
    pub fn validate(&self) -> Result<()> {
        if self.dt_minutes == 0 {
            bail!("dt must be positive");
        }
        if self.values.is_empty() {
            bail!("profile has no samples");
        }
        if let Some((i, v)) = self
            .values
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite())
        {
            bail!("sample {i} is not finite ({v})");
        }
        if let Some(h) = self.kind.horizon_minutes() {
            if self.horizon_minutes() != h {
                bail!(
                    "{} profile must span {h} minutes, found {}",
                    self.kind,
                    self.horizon_minutes()
                );
            }
            let max_abs = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            if max_abs > MAX_MAGNITUDE_PU {
                bail!("built-in profile magnitude {max_abs} exceeds {MAX_MAGNITUDE_PU} p.u.");
            }
        }
        Ok(())
    }

    /// Render as the two-column CSV format (`minute,net_load_pu`). Floats are
    /// printed in shortest round-trip form, so a load of this text is
    /// bit-exact.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("minute,net_load_pu\n");
        for (i, v) in self.values.iter().enumerate() {
            out.push_str(&format!("{},{}\n", i as u32 * self.dt_minutes, v));
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string())
            .with_context(|| format!("writing profile to {}", path.display()))
    }
}

fn check_dt(dt_minutes: u32, horizon: u32, kind: ScenarioKind) -> Result<()> {
    if dt_minutes == 0 || horizon % dt_minutes != 0 {
        bail!("dt of {dt_minutes} min does not divide the {horizon}-minute {kind} horizon");
    }
    Ok(())
}

/// Seeded 2-hour intermittency profile: piecewise-constant 5-minute blocks,
/// magnitudes uniform in [0, 0.5), consecutive blocks alternating in sign,
/// with one block forced to exactly +0.5 and one to exactly -0.5 at seeded
/// positions. Same seed, same dt — identical samples.
pub fn gen_intermittency(seed: u64, dt_minutes: u32) -> Result<NetLoadProfile> {
    check_dt(dt_minutes, INTERMITTENCY_MINUTES, ScenarioKind::Intermittency)?;
    let n_blocks = (INTERMITTENCY_MINUTES / INTERMITTENCY_BLOCK_MINUTES) as usize;
    let n_samples = (INTERMITTENCY_MINUTES / dt_minutes) as usize;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let first_positive: bool = rng.random();
    let sign = |block: usize| -> f64 {
        if (block % 2 == 0) == first_positive {
            1.0
        } else {
            -1.0
        }
    };
    let mut blocks: Vec<f64> = (0..n_blocks)
        .map(|b| sign(b) * (MAX_MAGNITUDE_PU * rng.random::<f64>()))
        .collect();

    // Plant the two exact extremes among blocks that the requested dt actually
    // samples (all 24 blocks whenever dt <= 5), keeping the alternation by
    // planting each extreme on a block of its own sign.
    let sampled = |block: usize| -> bool {
        let lo = block as u32 * INTERMITTENCY_BLOCK_MINUTES;
        let hi = lo + INTERMITTENCY_BLOCK_MINUTES;
        (0..n_samples as u32).any(|i| (lo..hi).contains(&(i * dt_minutes)))
    };
    for wanted in [1.0, -1.0] {
        let candidates: Vec<usize> =
            (0..n_blocks).filter(|&b| sign(b) == wanted && sampled(b)).collect();
        if !candidates.is_empty() {
            let pick = candidates[rng.random_range(0..candidates.len())];
            blocks[pick] = wanted * MAX_MAGNITUDE_PU;
        }
    }

    let values = (0..n_samples)
        .map(|i| blocks[(i as u32 * dt_minutes / INTERMITTENCY_BLOCK_MINUTES) as usize])
        .collect();
    Ok(NetLoadProfile {
        kind: ScenarioKind::Intermittency,
        dt_minutes,
        values,
    })
}

fn raised_cosine(t_min: f64, center_min: f64, width_min: f64, amplitude: f64) -> f64 {
    let d = t_min - center_min;
    if d.abs() <= width_min / 2.0 {
        amplitude * 0.5 * (1.0 + (2.0 * std::f64::consts::PI * d / width_min).cos())
    } else {
        0.0
    }
}

/// Deterministic 24-hour duck-curve profile; the midday generation bump and
/// evening demand bump sum where they overlap.
pub fn gen_peak_shaving(dt_minutes: u32) -> Result<NetLoadProfile> {
    check_dt(dt_minutes, PEAK_SHAVING_MINUTES, ScenarioKind::PeakShaving)?;
    let n = (PEAK_SHAVING_MINUTES / dt_minutes) as usize;
    let values = (0..n)
        .map(|i| {
            let t = (i as u32 * dt_minutes) as f64;
            raised_cosine(t, DUCK_GEN_CENTER_MIN, DUCK_GEN_WIDTH_MIN, -MAX_MAGNITUDE_PU)
                + raised_cosine(t, DUCK_DEMAND_CENTER_MIN, DUCK_DEMAND_WIDTH_MIN, MAX_MAGNITUDE_PU)
        })
        .collect();
    Ok(NetLoadProfile {
        kind: ScenarioKind::PeakShaving,
        dt_minutes,
        values,
    })
}

/// 20-hour energy-reserve step profile: +0.5 p.u. on [0 h, 6 h), zero on
/// [6 h, 12 h), -0.5 p.u. on [12 h, 18 h), zero for the last two hours.
pub fn gen_energy_reserve(dt_minutes: u32) -> Result<NetLoadProfile> {
    check_dt(dt_minutes, ENERGY_RESERVE_MINUTES, ScenarioKind::EnergyReserve)?;
    let n = (ENERGY_RESERVE_MINUTES / dt_minutes) as usize;
    let values = (0..n)
        .map(|i| {
            let t = i as u32 * dt_minutes;
            if t < 360 {
                MAX_MAGNITUDE_PU
            } else if t < 720 {
                0.0
            } else if t < 1080 {
                -MAX_MAGNITUDE_PU
            } else {
                0.0
            }
        })
        .collect();
    Ok(NetLoadProfile {
        kind: ScenarioKind::EnergyReserve,
        dt_minutes,
        values,
    })
}

/// Build a built-in profile by kind. `seed` only affects intermittency.
pub fn gen_builtin(kind: ScenarioKind, seed: u64, dt_minutes: u32) -> Result<NetLoadProfile> {
    match kind {
        ScenarioKind::Intermittency => gen_intermittency(seed, dt_minutes),
        ScenarioKind::PeakShaving => gen_peak_shaving(dt_minutes),
        ScenarioKind::EnergyReserve => gen_energy_reserve(dt_minutes),
        ScenarioKind::Custom => bail!("custom profiles are loaded from CSV, not generated"),
    }
}

/// Parse the two-column profile CSV (`minute,net_load_pu`, header required).
/// The minute column must advance in uniform steps; that spacing becomes dt.
pub fn parse_profile_csv(text: &str) -> Result<NetLoadProfile> {
    let mut lines = text.lines();
    let header = lines.next().context("empty profile file")?;
    let cols: Vec<&str> = header.split(',').map(|c| c.trim()).collect();
    if cols.len() != 2 {
        bail!("header must have 2 columns (minute, per-unit value), found {}", cols.len());
    }
    let mut minutes: Vec<i64> = Vec::new();
    let mut values: Vec<f64> = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 1; // data rows count from 1
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 2 {
            bail!("row {row}: expected 2 columns, found {}", fields.len());
        }
        let minute: i64 = fields[0]
            .trim()
            .parse()
            .with_context(|| format!("row {row}, column 1: bad minute index '{}'", fields[0]))?;
        let value: f64 = fields[1]
            .trim()
            .parse()
            .with_context(|| format!("row {row}, column 2: bad value '{}'", fields[1]))?;
        if !value.is_finite() {
            bail!("row {row}, column 2: value must be finite");
        }
        minutes.push(minute);
        values.push(value);
    }
    if values.is_empty() {
        bail!("profile file has no data rows");
    }
    if values.len() < 2 {
        bail!("need at least 2 rows to infer the interval length");
    }
    let dt = minutes[1] - minutes[0];
    if dt <= 0 {
        bail!("row 2: minute index must increase (spacing {dt})");
    }
    for (i, pair) in minutes.windows(2).enumerate() {
        let row = i + 2; // the row that breaks the spacing
        let spacing = pair[1] - pair[0];
        if spacing != dt {
            bail!("row {row}: non-uniform spacing ({spacing} min here, {dt} min before)");
        }
    }
    let profile = NetLoadProfile {
        kind: ScenarioKind::Custom,
        dt_minutes: dt as u32,
        values,
    };
    profile.validate()?;
    Ok(profile)
}

pub fn load_profile_csv(path: &Path) -> Result<NetLoadProfile> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading profile from {}", path.display()))?;
    parse_profile_csv(&text).with_context(|| format!("parsing {}", path.display()))
}
