//! Command-line front end: catalog inspection, scenario generation,
//! single-resource dispatch runs, multi-resource comparisons, and the
//! solver-vs-oracle self-check.
//!
//! Every command is a pure function of its flags, input files, and the
//! GRIDFLEX_SEED environment variable (the --seed flag wins); machine-readable
//! outputs are byte-identical across repeated invocations.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gridflex_core::audit::{
    audit_projection, run_oracle_campaign, CampaignConfig, PROJECTION_RESOLUTION_FRAC,
    PROJECTION_TOLERANCE_FRAC,
};
use gridflex_core::balance::BaselinePolicy;
use gridflex_core::catalog::{
    builtin_catalog, lookup_resource, parse_catalog_text, to_catalog_text, validate_spec,
};
use gridflex_core::dayahead::{
    solve_dayahead_dp, DayaheadError, ScheduleProblem, DEFAULT_POWER_LEVELS,
};
use gridflex_core::metrics::{compute_stats, rank_resources, sig4, stats_csv, stats_table};
use gridflex_core::realtime::{run_realtime, RunConfig};
use gridflex_core::scenario::{gen_builtin, load_profile_csv, NetLoadProfile, ScenarioKind};
use gridflex_core::{DeficitStats, ResourceSpec, Trajectory};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const DEFAULT_SEED: u64 = 42;

// Exit codes: 0 ok, 2 validation, 3 infeasible, 4 oracle mismatch.
const EXIT_VALIDATION: u8 = 2;
const EXIT_INFEASIBLE: u8 = 3;
const EXIT_ORACLE: u8 = 4;

#[derive(Parser)]
#[command(name = "gridflex", version, about = "Energy-flexibility dispatch simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Inspect the built-in resource catalog.
    Catalog {
        #[command(subcommand)]
        action: CatalogAction,
    },
    /// Generate a net-load profile and write it as CSV.
    Scenario {
        #[command(subcommand)]
        action: ScenarioAction,
    },
    /// Dispatch one resource against one scenario; write trajectory CSV and
    /// stats JSON.
    Run(RunArgs),
    /// Dispatch several resources and rank them per scenario.
    Compare(CompareArgs),
    /// Check the day-ahead solver against exhaustive enumeration and the
    /// real-time solver against a dense projection scan.
    OracleCheck(OracleArgs),
}

#[derive(Subcommand)]
enum CatalogAction {
    /// Print every built-in resource in the catalog text format.
    List,
}

#[derive(Subcommand)]
enum ScenarioAction {
    /// Write one profile to a CSV file.
    Emit {
        #[arg(long, value_enum)]
        kind: KindArg,
        /// Interval length in minutes; must divide the scenario horizon.
        #[arg(long, default_value_t = 1)]
        dt: u32,
        /// Seed for the intermittency profile (other kinds are deterministic).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Intermittency,
    PeakShaving,
    EnergyReserve,
}

impl From<KindArg> for ScenarioKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Intermittency => ScenarioKind::Intermittency,
            KindArg::PeakShaving => ScenarioKind::PeakShaving,
            KindArg::EnergyReserve => ScenarioKind::EnergyReserve,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    Realtime,
    Dayahead,
}

impl ModeArg {
    fn label(self) -> &'static str {
        match self {
            ModeArg::Realtime => "realtime",
            ModeArg::Dayahead => "dayahead",
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BaselineArg {
    Auto,
    Midpoint,
    Min,
    Max,
}

#[derive(Args, Clone)]
struct DispatchArgs {
    #[arg(long, value_enum, default_value = "realtime")]
    mode: ModeArg,
    /// Interval length in minutes (default: 1 for realtime, 15 for dayahead).
    #[arg(long)]
    dt: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Scheduled-counterpart policy. Auto picks the midpoint, or full output
    /// for curtailment-only renewables.
    #[arg(long, value_enum, default_value = "auto")]
    baseline: BaselineArg,
    /// Per-step baseline series CSV (minute,mw), overriding --baseline.
    #[arg(long, conflicts_with = "baseline")]
    baseline_file: Option<PathBuf>,
    /// Enforce storage state-of-charge limits each step.
    #[arg(long, default_value_t = false)]
    soc_enforced: bool,
    /// Power discretization count for the day-ahead solver.
    #[arg(long, default_value_t = DEFAULT_POWER_LEVELS)]
    levels: usize,
}

#[derive(Args)]
struct RunArgs {
    /// Catalog resource name.
    #[arg(long)]
    resource: Option<String>,
    /// Resource spec file in the catalog text format (exactly one record).
    #[arg(long, conflicts_with = "resource")]
    spec_file: Option<PathBuf>,
    /// Built-in scenario kind.
    #[arg(long, value_enum)]
    scenario: Option<KindArg>,
    /// Custom profile CSV (minute,net_load_pu); dt is inferred from the file.
    #[arg(long, conflicts_with = "scenario")]
    profile: Option<PathBuf>,
    #[command(flatten)]
    dispatch: DispatchArgs,
    /// Output directory for the trajectory CSV and stats JSON.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    /// Comma-separated catalog names, or "all".
    #[arg(long, value_delimiter = ',')]
    resources: Vec<String>,
    /// Scenario kinds to compare on (default: all three built-ins).
    #[arg(long = "scenario", value_enum)]
    scenarios: Vec<KindArg>,
    /// Custom profile CSV instead of built-in scenarios.
    #[arg(long, conflicts_with = "scenarios")]
    profile: Option<PathBuf>,
    #[command(flatten)]
    dispatch: DispatchArgs,
    /// Output path prefix: writes <out>.txt and <out>.csv.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 100)]
    instances: usize,
    #[arg(long, default_value_t = 8)]
    max_steps: usize,
    #[arg(long, default_value_t = 7)]
    max_levels: usize,
    #[arg(long, default_value_t = 3)]
    max_startup: u32,
    #[arg(long)]
    seed: Option<u64>,
    /// Corrupt one solver transition class on purpose; the check must fail.
    #[arg(long, default_value_t = false, hide = true)]
    inject_fault: bool,
    /// Skip the dense projection sweep over the built-in scenarios.
    #[arg(long, default_value_t = false)]
    skip_projection: bool,
}

enum CmdError {
    Validation(anyhow::Error),
    Infeasible(anyhow::Error),
    OracleMismatch(String),
}

impl From<anyhow::Error> for CmdError {
    fn from(e: anyhow::Error) -> Self {
        CmdError::Validation(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CmdError::Validation(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_VALIDATION)
        }
        Err(CmdError::Infeasible(e)) => {
            eprintln!("infeasible: {e:#}");
            ExitCode::from(EXIT_INFEASIBLE)
        }
        Err(CmdError::OracleMismatch(msg)) => {
            eprintln!("oracle mismatch: {msg}");
            ExitCode::from(EXIT_ORACLE)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CmdError> {
    match cli.command {
        Command::Catalog { action } => match action {
            CatalogAction::List => {
                print!("{}", to_catalog_text(&builtin_catalog()));
                Ok(())
            }
        },
        Command::Scenario { action } => match action {
            ScenarioAction::Emit { kind, dt, seed, out } => {
                let profile = gen_builtin(kind.into(), effective_seed(seed)?, dt)?;
                profile.save_csv(&out)?;
                println!("wrote {}", out.display());
                Ok(())
            }
        },
        Command::Run(args) => cmd_run(args),
        Command::Compare(args) => cmd_compare(args),
        Command::OracleCheck(args) => cmd_oracle_check(args),
    }
}

/// Seed resolution: --seed flag wins, then GRIDFLEX_SEED, then the default.
fn effective_seed(flag: Option<u64>) -> Result<u64> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("GRIDFLEX_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| anyhow!("GRIDFLEX_SEED must be an integer, got '{v}'")),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn resolve_spec(resource: Option<&str>, spec_file: Option<&Path>) -> Result<ResourceSpec> {
    match (resource, spec_file) {
        (Some(name), None) => {
            lookup_resource(name).ok_or_else(|| anyhow!("unknown resource '{name}'"))
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let specs = parse_catalog_text(&text)?;
            match specs.len() {
                1 => Ok(specs.into_iter().next().unwrap()),
                n => bail!("{} must contain exactly 1 record, found {n}", path.display()),
            }
        }
        _ => bail!("give exactly one of --resource or --spec-file"),
    }
}

struct ResolvedScenario {
    label: String,
    profile: NetLoadProfile,
}

fn resolve_profile(
    scenario: Option<KindArg>,
    profile: Option<&Path>,
    mode: ModeArg,
    dt: Option<u32>,
    seed: u64,
) -> Result<ResolvedScenario> {
    match (scenario, profile) {
        (Some(kind), None) => {
            let dt = dt.unwrap_or(match mode {
                ModeArg::Realtime => 1,
                ModeArg::Dayahead => 15,
            });
            let kind: ScenarioKind = kind.into();
            Ok(ResolvedScenario {
                label: kind.as_str().to_string(),
                profile: gen_builtin(kind, seed, dt)?,
            })
        }
        (None, Some(path)) => {
            if dt.is_some() {
                bail!("--dt conflicts with --profile; the file's spacing sets dt");
            }
            Ok(ResolvedScenario {
                label: "custom".to_string(),
                profile: load_profile_csv(path)?,
            })
        }
        _ => bail!("give exactly one of --scenario or --profile"),
    }
}

fn resolve_baseline_policy(
    baseline: BaselineArg,
    baseline_file: Option<&Path>,
    profile: &NetLoadProfile,
) -> Result<BaselinePolicy> {
    if let Some(path) = baseline_file {
        let series = load_profile_csv(path)
            .with_context(|| format!("baseline series {}", path.display()))?;
        if series.dt_minutes != profile.dt_minutes || series.steps() != profile.steps() {
            bail!(
                "baseline series shape ({} steps @ {} min) does not match the profile ({} steps @ {} min)",
                series.steps(),
                series.dt_minutes,
                profile.steps(),
                profile.dt_minutes
            );
        }
        return Ok(BaselinePolicy::Series(series.values));
    }
    Ok(match baseline {
        BaselineArg::Auto => BaselinePolicy::Auto,
        BaselineArg::Midpoint => BaselinePolicy::Midpoint,
        BaselineArg::Min => BaselinePolicy::Min,
        BaselineArg::Max => BaselinePolicy::Max,
    })
}

fn solve(
    spec: &ResourceSpec,
    profile: &NetLoadProfile,
    policy: &BaselinePolicy,
    args: &DispatchArgs,
) -> Result<Trajectory, CmdError> {
    match args.mode {
        ModeArg::Realtime => {
            let cfg = RunConfig {
                baseline: policy.clone(),
                soc_enforced: args.soc_enforced,
                ..RunConfig::default()
            };
            run_realtime(spec, profile, &cfg).map_err(CmdError::Validation)
        }
        ModeArg::Dayahead => {
            let mut problem = ScheduleProblem::new(spec.clone(), profile.clone());
            problem.baseline_policy = policy.clone();
            problem.power_levels = args.levels;
            problem.soc_enforced = args.soc_enforced;
            solve_dayahead_dp(&problem).map_err(|e| match e {
                DayaheadError::Infeasible => CmdError::Infeasible(anyhow!("{e}")),
                other => CmdError::Validation(anyhow!("{other}")),
            })
        }
    }
}

/// Everything needed to reproduce a run, echoed into the stats JSON.
#[derive(Serialize)]
struct RunRecord<'a> {
    resource: &'a str,
    role: String,
    rated_mw: f64,
    scenario: &'a str,
    mode: &'a str,
    dt_minutes: u32,
    seed: u64,
    baseline_policy: &'a str,
    soc_enforced: bool,
    power_levels: usize,
    stats: &'a DeficitStats,
    objective_mw2: f64,
}

fn slug(parts: &[&str]) -> String {
    parts
        .join("_")
        .to_ascii_lowercase()
        .replace(' ', "-")
}

fn cmd_run(args: RunArgs) -> Result<(), CmdError> {
    let spec = resolve_spec(args.resource.as_deref(), args.spec_file.as_deref())?;
    let report = validate_spec(&spec);
    if !report.is_ok() {
        return Err(CmdError::Validation(anyhow!(
            "resource '{}': {report}",
            spec.name
        )));
    }
    let d = &args.dispatch;
    let seed = effective_seed(d.seed)?;
    let scenario = resolve_profile(args.scenario, args.profile.as_deref(), d.mode, d.dt, seed)?;
    let policy = resolve_baseline_policy(d.baseline, d.baseline_file.as_deref(), &scenario.profile)?;
    let traj = solve(&spec, &scenario.profile, &policy, d)?;
    let stats = compute_stats(&traj)?;

    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    let base = slug(&[&spec.name, &scenario.label, d.mode.label()]);
    let traj_path = args.out_dir.join(format!("{base}_trajectory.csv"));
    let stats_path = args.out_dir.join(format!("{base}_stats.json"));

    let record = RunRecord {
        resource: &spec.name,
        role: spec.role.to_string(),
        rated_mw: spec.rated_mw(),
        scenario: &scenario.label,
        mode: d.mode.label(),
        dt_minutes: traj.dt_minutes,
        seed,
        baseline_policy: policy.label(),
        soc_enforced: d.soc_enforced,
        power_levels: d.levels,
        stats: &stats,
        objective_mw2: traj.objective_mw2,
    };
    std::fs::write(&traj_path, traj.to_csv_string())
        .with_context(|| format!("writing {}", traj_path.display()))?;
    let mut json = serde_json::to_string_pretty(&record).context("serializing stats")?;
    json.push('\n');
    std::fs::write(&stats_path, json).with_context(|| format!("writing {}", stats_path.display()))?;

    println!(
        "{}: rms={} avg_abs={} net_abs={} net_signed={}",
        base,
        sig4(stats.rms_pu),
        sig4(stats.avg_abs_pu),
        sig4(stats.net_energy_abs_puh),
        sig4(stats.net_energy_signed_puh)
    );
    println!("wrote {}", traj_path.display());
    println!("wrote {}", stats_path.display());
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> Result<(), CmdError> {
    let names: Vec<String> = if args.resources.len() == 1 && args.resources[0] == "all" {
        builtin_catalog().into_iter().map(|s| s.name).collect()
    } else {
        args.resources.clone()
    };
    if names.len() < 2 {
        return Err(CmdError::Validation(anyhow!(
            "comparison needs at least 2 resources, got {}",
            names.len()
        )));
    }
    let specs: Vec<ResourceSpec> = names
        .iter()
        .map(|n| lookup_resource(n).ok_or_else(|| anyhow!("unknown resource '{n}'")))
        .collect::<Result<_>>()?;

    let d = &args.dispatch;
    let seed = effective_seed(d.seed)?;
    let scenarios: Vec<ResolvedScenario> = if let Some(path) = &args.profile {
        vec![resolve_profile(None, Some(path), d.mode, d.dt, seed)?]
    } else {
        let kinds = if args.scenarios.is_empty() {
            vec![KindArg::Intermittency, KindArg::PeakShaving, KindArg::EnergyReserve]
        } else {
            args.scenarios.clone()
        };
        kinds
            .into_iter()
            .map(|k| resolve_profile(Some(k), None, d.mode, d.dt, seed))
            .collect::<Result<_>>()?
    };

    let mut text = String::new();
    let mut csv = String::from("scenario,");
    csv.push_str(&stats_csv(&[])); // header only
    for scenario in &scenarios {
        let policy =
            resolve_baseline_policy(d.baseline, d.baseline_file.as_deref(), &scenario.profile)?;
        let mut rows: Vec<(String, DeficitStats)> = Vec::new();
        for spec in &specs {
            let traj = solve(spec, &scenario.profile, &policy, d)?;
            rows.push((spec.name.clone(), compute_stats(&traj)?));
        }
        let title = format!(
            "Power deficit statistics — {} scenario ({}, dt={} min)",
            scenario.label,
            d.mode.label(),
            scenario.profile.dt_minutes
        );
        text.push_str(&stats_table(&title, &rows));
        let ranked = rank_resources(&rows)?;
        let order: Vec<&str> = ranked.iter().map(|(n, _)| n.as_str()).collect();
        text.push_str(&format!("ranking (best first): {}\n\n", order.join(" > ")));
        for (name, s) in &rows {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                scenario.label, name, s.avg_abs_pu, s.net_energy_signed_puh, s.net_energy_abs_puh, s.rms_pu
            ));
        }
    }

    let txt_path = args.out.with_extension("txt");
    let csv_path = args.out.with_extension("csv");
    std::fs::write(&txt_path, &text).with_context(|| format!("writing {}", txt_path.display()))?;
    std::fs::write(&csv_path, &csv).with_context(|| format!("writing {}", csv_path.display()))?;
    print!("{text}");
    println!("wrote {}", txt_path.display());
    println!("wrote {}", csv_path.display());
    Ok(())
}

fn cmd_oracle_check(args: OracleArgs) -> Result<(), CmdError> {
    let seed = effective_seed(args.seed)?;
    let campaign_cfg = CampaignConfig {
        instances: args.instances,
        max_steps: args.max_steps,
        max_levels: args.max_levels,
        max_startup_minutes: args.max_startup,
        seed,
        inject_fault: args.inject_fault,
    };
    let report = run_oracle_campaign(&campaign_cfg)?;
    println!(
        "day-ahead campaign: {} instances, {} matched ({} solved, {} infeasible), worst |dp-oracle| = {} MW^2",
        report.instances, report.matches, report.solved, report.infeasible, report.worst_abs_diff_mw2
    );
    if !report.is_ok() {
        let m = &report.mismatches[0];
        return Err(CmdError::OracleMismatch(format!(
            "{} of {} instances disagreed; first: instance {} ({}), dp={:?}, oracle={:?}\nreplay: {}",
            report.mismatches.len(),
            report.instances,
            m.index,
            m.note,
            m.dp_objective,
            m.oracle_objective,
            m.problem_json
        )));
    }

    if !args.skip_projection {
        let mut steps_checked = 0usize;
        let mut worst = 0.0f64;
        for spec in builtin_catalog() {
            for kind in [
                ScenarioKind::Intermittency,
                ScenarioKind::PeakShaving,
                ScenarioKind::EnergyReserve,
            ] {
                let profile = gen_builtin(kind, seed, 1)?;
                let cfg = RunConfig::default();
                let traj = run_realtime(&spec, &profile, &cfg)?;
                let rep = audit_projection(
                    &spec,
                    &profile,
                    &cfg,
                    &traj,
                    PROJECTION_RESOLUTION_FRAC,
                    PROJECTION_TOLERANCE_FRAC,
                )?;
                steps_checked += rep.steps_checked;
                worst = worst.max(rep.worst_excess_mw2);
                if !rep.is_ok() {
                    return Err(CmdError::OracleMismatch(format!(
                        "projection audit failed for {} on {kind}: {}",
                        spec.name, rep.violations[0]
                    )));
                }
            }
        }
        println!(
            "projection audit: 14 resources x 3 scenarios, {steps_checked} steps, worst excess = {worst} MW^2"
        );
    }
    println!("oracle check: PASS");
    Ok(())
}
