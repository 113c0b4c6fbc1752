//! Resource catalog: physical envelopes of flexible resources.
//!
//! A [`ResourceSpec`] is the complete description the dispatch solvers need:
//! power operating range, ramping rate, start-up (or response) latency, and —
//! for storage — efficiencies and energy capacity. [`builtin_catalog`] ships
//! the surveyed parameter set for five generators, five flexible loads, and
//! four energy-storage systems.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

/// What side of the power balance a resource acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ResourceRole {
    Generator,
    Load,
    Storage,
}

impl ResourceRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            ResourceRole::Generator => "generator",
            ResourceRole::Load => "load",
            ResourceRole::Storage => "storage",
        }
    }
}

impl std::fmt::Display for ResourceRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ResourceRole {
    type Err = anyhow::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "generator" => Ok(ResourceRole::Generator),
            "load" => Ok(ResourceRole::Load),
            "storage" => Ok(ResourceRole::Storage),
            other => bail!("unknown resource role '{other}'"),
        }
    }
}

/// Physical envelope of one flexible resource.
///
/// Loads are stated in MW of consumption; storage power is signed at dispatch
/// time (positive discharging, negative charging) and `p_min_mw` acts as a
/// deadband half-width around zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceSpec {
    pub role: ResourceRole,
    pub name: String,
    /// Minimum power while committed, MW.
    pub p_min_mw: f64,
    /// Maximum power; also the rated power used for per-unit normalization, MW.
    pub p_max_mw: f64,
    /// Ramping rate, MW per minute.
    pub ramp_mw_per_min: f64,
    /// Start-up time for generators/storage, response time for loads, minutes.
    pub startup_minutes: u32,
    /// Charging efficiency in (0, 1]; storage only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub charge_eff: Option<f64>,
    /// Discharging efficiency in (0, 1]; storage only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discharge_eff: Option<f64>,
    /// Energy capacity, MWh; storage only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_cap_mwh: Option<f64>,
    /// Variable-renewable generators run at full available output and can only
    /// curtail downward; this picks their default scheduled baseline.
    #[serde(default)]
    pub curtailment_only: bool,
    /// Informational tags (technology class, survey figures); never used by
    /// the solvers.
    #[serde(default)]
    pub notes: Vec<String>,
}

impl ResourceSpec {
    /// Rated power: the per-unit normalization base.
    pub fn rated_mw(&self) -> f64 {
        self.p_max_mw
    }

    pub fn is_storage(&self) -> bool {
        self.role == ResourceRole::Storage
    }
}

/// Outcome of [`validate_spec`]: one entry per violated invariant.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<String>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_ok() {
            write!(f, "ok")
        } else {
            write!(f, "{}", self.violations.join("; "))
        }
    }
}

/// Check every [`ResourceSpec`] invariant, reporting all violations at once.
pub fn validate_spec(spec: &ResourceSpec) -> ValidationReport {
    let mut v = Vec::new();
    if spec.name.trim().is_empty() {
        v.push("name must be nonempty".to_string());
    }
    for (label, value) in [
        ("p_min_mw", spec.p_min_mw),
        ("p_max_mw", spec.p_max_mw),
        ("ramp_mw_per_min", spec.ramp_mw_per_min),
    ] {
        if !value.is_finite() {
            v.push(format!("{label} must be finite"));
        }
    }
    if spec.p_min_mw < 0.0 {
        v.push("p_min must satisfy p_min >= 0".to_string());
    }
    if !(spec.p_min_mw <= spec.p_max_mw) {
        v.push("power range must satisfy p_min <= p_max".to_string());
    }
    if !(spec.p_max_mw > 0.0) {
        v.push("p_max must be > 0".to_string());
    }
    if !(spec.ramp_mw_per_min > 0.0) {
        v.push("ramp must be > 0".to_string());
    }
    let storage_fields = [
        ("charge_eff", spec.charge_eff),
        ("discharge_eff", spec.discharge_eff),
        ("energy_cap_mwh", spec.energy_cap_mwh),
    ];
    if spec.is_storage() {
        for (label, field) in storage_fields {
            match field {
                None => v.push(format!("storage resource is missing {label}")),
                Some(x) if !x.is_finite() => v.push(format!("{label} must be finite")),
                _ => {}
            }
        }
        for (label, eff) in [("charge_eff", spec.charge_eff), ("discharge_eff", spec.discharge_eff)]
        {
            if let Some(e) = eff {
                if !(e > 0.0 && e <= 1.0) {
                    v.push(format!("{label} must lie in (0, 1]"));
                }
            }
        }
        if let Some(cap) = spec.energy_cap_mwh {
            if !(cap > 0.0) {
                v.push("energy_cap_mwh must be > 0".to_string());
            }
        }
    } else {
        for (label, field) in storage_fields {
            if field.is_some() {
                v.push(format!(
                    "{label} is a storage-only field but role is {}",
                    spec.role
                ));
            }
        }
    }
    if spec.curtailment_only && spec.role != ResourceRole::Generator {
        v.push("curtailment_only applies to generators only".to_string());
    }
    ValidationReport { violations: v }
}

fn kw(value_kw: f64) -> f64 {
    value_kw / 1000.0
}

fn generator(
    name: &str,
    p_min_mw: f64,
    p_max_mw: f64,
    ramp_mw_per_min: f64,
    startup_minutes: u32,
    curtailment_only: bool,
    notes: &[&str],
) -> ResourceSpec {
    ResourceSpec {
        role: ResourceRole::Generator,
        name: name.to_string(),
        p_min_mw,
        p_max_mw,
        ramp_mw_per_min,
        startup_minutes,
        charge_eff: None,
        discharge_eff: None,
        energy_cap_mwh: None,
        curtailment_only,
        notes: notes.iter().map(|s| s.to_string()).collect(),
    }
}

fn load(
    name: &str,
    p_min_kw: f64,
    p_max_kw: f64,
    ramp_kw_per_min: f64,
    response_minutes: u32,
    notes: &[&str],
) -> ResourceSpec {
    ResourceSpec {
        role: ResourceRole::Load,
        name: name.to_string(),
        p_min_mw: kw(p_min_kw),
        p_max_mw: kw(p_max_kw),
        ramp_mw_per_min: kw(ramp_kw_per_min),
        startup_minutes: response_minutes,
        charge_eff: None,
        discharge_eff: None,
        energy_cap_mwh: None,
        curtailment_only: false,
        notes: notes.iter().map(|s| s.to_string()).collect(),
    }
}

#[allow(clippy::too_many_arguments)]
fn storage(
    name: &str,
    p_min_mw: f64,
    p_max_mw: f64,
    energy_cap_mwh: f64,
    charge_eff: f64,
    discharge_eff: f64,
    ramp_mw_per_min: f64,
    startup_minutes: u32,
    notes: &[&str],
) -> ResourceSpec {
    ResourceSpec {
        role: ResourceRole::Storage,
        name: name.to_string(),
        p_min_mw,
        p_max_mw,
        ramp_mw_per_min,
        startup_minutes,
        charge_eff: Some(charge_eff),
        discharge_eff: Some(discharge_eff),
        energy_cap_mwh: Some(energy_cap_mwh),
        curtailment_only: false,
        notes: notes.iter().map(|s| s.to_string()).collect(),
    }
}

/// The built-in resource set: 5 generators, 5 loads, 4 energy-storage systems.
///
/// Load figures are surveyed in kW and converted to MW here. A load's response
/// time plays the start-up latency role at dispatch time, so it is stored in
/// `startup_minutes`.
pub fn builtin_catalog() -> Vec<ResourceSpec> {
    vec![
        generator(
            "CCGT",
            240.0,
            800.0,
            24.0,
            180,
            false,
            &["thermal generator", "combined-cycle gas turbine", "efficiency 0.50"],
        ),
        generator(
            "ICE",
            1.8,
            18.0,
            3.6,
            5,
            false,
            &["thermal generator", "internal combustion engine", "efficiency 0.48"],
        ),
        generator(
            "Hydropower",
            60.0,
            1900.0,
            50.0,
            1,
            false,
            &["renewable generator", "efficiency 0.90"],
        ),
        generator(
            "Solar PV",
            0.0,
            1.3,
            1000.0,
            1,
            true,
            &["renewable generator", "variable output", "efficiency 0.198"],
        ),
        generator(
            "Wind",
            0.0086,
            1.3,
            2.6,
            1,
            true,
            &["renewable generator", "variable output", "efficiency 0.1626"],
        ),
        load(
            "Refrigeration",
            180.0,
            360.0,
            180.0,
            10,
            &["thermostatically controlled load", "refrigerated warehouse", "energy intensity 31596.66 kWh/degC"],
        ),
        load(
            "HVAC",
            4.5,
            7.2,
            7.2,
            1,
            &["thermostatically controlled load", "energy intensity 2.5 kWh/degC"],
        ),
        load(
            "Cement Plant",
            138.0,
            2370.0,
            27.18,
            10,
            &["industrial process load", "energy intensity 3.58 kWh/ton"],
        ),
        load(
            "Oil Refinement",
            25_000.0,
            35_000.0,
            83.33,
            240,
            &["industrial process load", "energy intensity 0.025 kWh/kg"],
        ),
        load(
            "Data Center",
            1250.0,
            5000.0,
            333.33,
            15,
            &["IT industry load", "energy intensity 5.29e-13 Wh/cycle"],
        ),
        storage(
            "Battery",
            0.1,
            100.0,
            400.0,
            0.9,
            0.97,
            6000.0,
            0,
            &["electrochemical energy storage"],
        ),
        storage(
            "Pumped Hydro",
            100.0,
            5000.0,
            8000.0,
            0.7,
            0.85,
            50.0,
            1,
            &["mechanical energy storage"],
        ),
        storage(
            "Flywheel",
            0.0,
            1.0,
            0.25,
            0.98,
            0.98,
            15.0,
            0,
            &["mechanical energy storage"],
        ),
        storage(
            "Latent Heat",
            0.1,
            300.0,
            2500.0,
            0.75,
            0.90,
            0.48,
            60,
            &["thermal energy storage", "phase-change material"],
        ),
    ]
}

/// Case-insensitive catalog lookup, with a few common aliases.
pub fn lookup_resource(name: &str) -> Option<ResourceSpec> {
    let wanted = name.trim().to_ascii_lowercase();
    let canonical = match wanted.as_str() {
        "solar" | "solar pv system" | "solar power" => "solar pv",
        "wind turbines" | "wind power" => "wind",
        "refrigerated warehouse" => "refrigeration",
        "cement production" | "cement" => "cement plant",
        "oil refinement plant" | "oil refinery" => "oil refinement",
        "phs" => "pumped hydro",
        "lhs" => "latent heat",
        other => other,
    };
    builtin_catalog()
        .into_iter()
        .find(|spec| spec.name.to_ascii_lowercase() == canonical)
}

const CATALOG_HEADER: &str = "name,role,p_min_mw,p_max_mw,ramp_mw_per_min,startup_min,charge_eff,discharge_eff,energy_cap_mwh,curtailment_only,notes";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Render specs as the catalog text format (CSV, units in the header, one
/// record per resource; the free-text notes field is last and may contain
/// commas).
pub fn to_catalog_text(specs: &[ResourceSpec]) -> String {
    let mut out = String::from(CATALOG_HEADER);
    out.push('\n');
    for s in specs {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            s.name,
            s.role,
            s.p_min_mw,
            s.p_max_mw,
            s.ramp_mw_per_min,
            s.startup_minutes,
            opt(s.charge_eff),
            opt(s.discharge_eff),
            opt(s.energy_cap_mwh),
            s.curtailment_only,
            s.notes.join("; "),
        ));
    }
    out
}

fn parse_opt_f64(field: &str, label: &str, row: usize) -> Result<Option<f64>> {
    if field.is_empty() {
        return Ok(None);
    }
    let v: f64 = field
        .parse()
        .with_context(|| format!("row {row}: bad {label} '{field}'"))?;
    Ok(Some(v))
}

/// Parse the catalog text format back into specs. Rejects records that fail
/// [`validate_spec`].
pub fn parse_catalog_text(text: &str) -> Result<Vec<ResourceSpec>> {
    let mut lines = text.lines();
    let header = lines.next().context("empty catalog file")?;
    if header.trim() != CATALOG_HEADER {
        bail!("unexpected catalog header: '{}'", header.trim());
    }
    let mut specs = Vec::new();
    for (i, line) in lines.enumerate() {
        let row = i + 1; // data rows count from 1
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.splitn(11, ',').collect();
        if fields.len() != 11 {
            bail!("row {row}: expected 11 fields, found {}", fields.len());
        }
        let spec = ResourceSpec {
            name: fields[0].trim().to_string(),
            role: fields[1].parse().with_context(|| format!("row {row}"))?,
            p_min_mw: fields[2]
                .parse()
                .with_context(|| format!("row {row}: bad p_min_mw '{}'", fields[2]))?,
            p_max_mw: fields[3]
                .parse()
                .with_context(|| format!("row {row}: bad p_max_mw '{}'", fields[3]))?,
            ramp_mw_per_min: fields[4]
                .parse()
                .with_context(|| format!("row {row}: bad ramp_mw_per_min '{}'", fields[4]))?,
            startup_minutes: fields[5]
                .parse()
                .with_context(|| format!("row {row}: bad startup_min '{}'", fields[5]))?,
            charge_eff: parse_opt_f64(fields[6], "charge_eff", row)?,
            discharge_eff: parse_opt_f64(fields[7], "discharge_eff", row)?,
            energy_cap_mwh: parse_opt_f64(fields[8], "energy_cap_mwh", row)?,
            curtailment_only: fields[9]
                .parse()
                .with_context(|| format!("row {row}: bad curtailment_only '{}'", fields[9]))?,
            notes: if fields[10].is_empty() {
                Vec::new()
            } else {
                fields[10].split("; ").map(|s| s.to_string()).collect()
            },
        };
        let report = validate_spec(&spec);
        if !report.is_ok() {
            bail!("row {row} ('{}'): {report}", spec.name);
        }
        specs.push(spec);
    }
    Ok(specs)
}
