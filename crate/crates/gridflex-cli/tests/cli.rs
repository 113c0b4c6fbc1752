//! End-to-end command tests: flag handling, exit codes, file outputs.

use std::path::Path;
use std::process::{Command, Output};

fn gridflex(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gridflex"))
        .args(args)
        .current_dir(dir)
        .env_remove("GRIDFLEX_SEED")
        .output()
        .expect("binary runs")
}

fn assert_exit(out: &Output, code: i32) {
    assert_eq!(
        out.status.code(),
        Some(code),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

#[test]
fn catalog_list_prints_all_resources() {
    let dir = tempfile::tempdir().unwrap();
    let out = gridflex(&["catalog", "list"], dir.path());
    assert_exit(&out, 0);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 15); // header + 14 records
    for name in ["CCGT", "ICE", "Battery", "Latent Heat", "Data Center"] {
        assert!(text.contains(name), "missing {name}");
    }
}

#[test]
fn run_writes_trajectory_and_stats() {
    let dir = tempfile::tempdir().unwrap();
    let out = gridflex(
        &["run", "--resource", "ICE", "--scenario", "energy-reserve", "--mode", "realtime", "--dt", "1"],
        dir.path(),
    );
    assert_exit(&out, 0);
    let traj = dir.path().join("ice_energy-reserve_realtime_trajectory.csv");
    let stats = dir.path().join("ice_energy-reserve_realtime_stats.json");
    assert!(traj.exists() && stats.exists());
    let csv = std::fs::read_to_string(&traj).unwrap();
    assert!(csv.starts_with("minute,net_pu,power_MW,status,offset_MW,offset_pu\n"));
    assert_eq!(csv.lines().count(), 1201);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&stats).unwrap()).unwrap();
    assert_eq!(json["resource"], "ICE");
    assert_eq!(json["seed"], 42);
    assert_eq!(json["dt_minutes"], 1);
    assert_eq!(json["baseline_policy"], "auto");
    assert_eq!(json["mode"], "realtime");
    assert_eq!(json["soc_enforced"], false);
    assert!(json["stats"]["rms_pu"].as_f64().unwrap() > 0.0);
}

#[test]
fn storage_trajectory_has_soc_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = gridflex(
        &["run", "--resource", "Battery", "--scenario", "intermittency"],
        dir.path(),
    );
    assert_exit(&out, 0);
    let csv = std::fs::read_to_string(dir.path().join("battery_intermittency_realtime_trajectory.csv")).unwrap();
    assert!(csv.starts_with("minute,net_pu,power_MW,status,offset_MW,offset_pu,soc_MWh\n"));
}

#[test]
fn unknown_resource_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = gridflex(
        &["run", "--resource", "Nonexistent", "--scenario", "energy-reserve"],
        dir.path(),
    );
    assert_exit(&out, 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("Nonexistent"));
}

#[test]
fn infeasible_schedule_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let out = gridflex(
        &["run", "--resource", "Oil Refinement", "--scenario", "energy-reserve", "--mode", "dayahead"],
        dir.path(),
    );
    assert_exit(&out, 3);
}

#[test]
fn identical_invocations_are_byte_identical() {
    let args = [
        "run",
        "--resource",
        "Hydropower",
        "--scenario",
        "intermittency",
        "--seed",
        "7",
    ];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_exit(&gridflex(&args, a.path()), 0);
    assert_exit(&gridflex(&args, b.path()), 0);
    for file in [
        "hydropower_intermittency_realtime_trajectory.csv",
        "hydropower_intermittency_realtime_stats.json",
    ] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        assert_eq!(x, y, "{file} differs between runs");
    }
}

#[test]
fn seed_env_var_is_a_default_and_the_flag_wins() {
    let dir = tempfile::tempdir().unwrap();
    let run = |args: &[&str], env_seed: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_gridflex"));
        cmd.args(args).current_dir(dir.path()).env_remove("GRIDFLEX_SEED");
        if let Some(s) = env_seed {
            cmd.env("GRIDFLEX_SEED", s);
        }
        cmd.output().unwrap()
    };
    let emit = |out: &str, env_seed: Option<&str>, extra: &[&str]| {
        let mut args = vec!["scenario", "emit", "--kind", "intermittency", "--out", out];
        args.extend_from_slice(extra);
        assert_exit(&run(&args, env_seed), 0);
        std::fs::read(dir.path().join(out)).unwrap()
    };
    let default = emit("default.csv", None, &[]);
    let env9 = emit("env9.csv", Some("9"), &[]);
    let env9_flag42 = emit("env9_flag42.csv", Some("9"), &["--seed", "42"]);
    let flag9 = emit("flag9.csv", None, &["--seed", "9"]);
    assert_ne!(default, env9, "env seed ignored");
    assert_eq!(env9, flag9, "env seed differs from the equivalent flag");
    assert_eq!(default, env9_flag42, "flag did not win over env");
}

#[test]
fn emitted_profile_round_trips_through_run() {
    let dir = tempfile::tempdir().unwrap();
    assert_exit(
        &gridflex(
            &["scenario", "emit", "--kind", "energy-reserve", "--dt", "1", "--out", "er.csv"],
            dir.path(),
        ),
        0,
    );
    let out = gridflex(
        &["run", "--resource", "ICE", "--profile", "er.csv"],
        dir.path(),
    );
    assert_exit(&out, 0);
    // Same dispatch as the built-in scenario.
    let built_in = gridflex(
        &["run", "--resource", "ICE", "--scenario", "energy-reserve", "--out-dir", "direct"],
        dir.path(),
    );
    assert_exit(&built_in, 0);
    let custom = std::fs::read_to_string(dir.path().join("ice_custom_realtime_trajectory.csv")).unwrap();
    let direct = std::fs::read_to_string(
        dir.path().join("direct/ice_energy-reserve_realtime_trajectory.csv"),
    )
    .unwrap();
    assert_eq!(custom, direct);
}

#[test]
fn compare_ranks_generators_on_energy_reserve() {
    let dir = tempfile::tempdir().unwrap();
    let out = gridflex(
        &[
            "compare",
            "--resources",
            "CCGT,ICE,Hydropower,Solar PV,Wind",
            "--scenario",
            "energy-reserve",
            "--out",
            "gens",
        ],
        dir.path(),
    );
    assert_exit(&out, 0);
    let text = std::fs::read_to_string(dir.path().join("gens.txt")).unwrap();
    let csv = std::fs::read_to_string(dir.path().join("gens.csv")).unwrap();
    assert_eq!(csv.lines().count(), 6); // header + 5 rows
    let ranking = text.lines().find(|l| l.starts_with("ranking")).unwrap();
    let ice = ranking.find("ICE").unwrap();
    let ccgt = ranking.find("CCGT").unwrap();
    assert!(ice < ccgt, "ICE should rank above CCGT: {ranking}");
}

#[test]
fn compare_rejects_a_single_resource() {
    let dir = tempfile::tempdir().unwrap();
    let out = gridflex(
        &["compare", "--resources", "ICE", "--scenario", "energy-reserve", "--out", "x"],
        dir.path(),
    );
    assert_exit(&out, 2);
}

#[test]
fn compare_battery_vs_flywheel_shares_the_column_set() {
    let dir = tempfile::tempdir().unwrap();
    let out = gridflex(
        &[
            "compare",
            "--resources",
            "Battery,Flywheel",
            "--scenario",
            "intermittency",
            "--out",
            "ess",
        ],
        dir.path(),
    );
    assert_exit(&out, 0);
    let csv = std::fs::read_to_string(dir.path().join("ess.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario,resource,avg_abs_pu,net_energy_signed_puh,net_energy_abs_puh,rms_pu"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().any(|r| r.contains("Battery")));
    assert!(rows.iter().any(|r| r.contains("Flywheel")));
}

#[test]
fn spec_file_runs_a_custom_resource() {
    let dir = tempfile::tempdir().unwrap();
    let spec = gridflex_core::lookup_resource("ICE").map(|mut s| {
        s.name = "Microturbine".to_string();
        s.p_min_mw = 0.4;
        s.p_max_mw = 4.0;
        s.ramp_mw_per_min = 1.0;
        s
    });
    std::fs::write(
        dir.path().join("custom.csv"),
        gridflex_core::catalog::to_catalog_text(&[spec.unwrap()]),
    )
    .unwrap();
    let out = gridflex(
        &["run", "--spec-file", "custom.csv", "--scenario", "intermittency"],
        dir.path(),
    );
    assert_exit(&out, 0);
    assert!(dir.path().join("microturbine_intermittency_realtime_trajectory.csv").exists());
}

#[test]
fn baseline_file_overrides_the_policy() {
    let dir = tempfile::tempdir().unwrap();
    // Constant 12 MW baseline for ICE over the 120-minute intermittency run.
    let mut series = String::from("minute,mw\n");
    for t in 0..120 {
        series.push_str(&format!("{t},12.0\n"));
    }
    std::fs::write(dir.path().join("base.csv"), series).unwrap();
    let out = gridflex(
        &[
            "run",
            "--resource",
            "ICE",
            "--scenario",
            "intermittency",
            "--baseline-file",
            "base.csv",
        ],
        dir.path(),
    );
    assert_exit(&out, 0);
    let json: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("ice_intermittency_realtime_stats.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(json["baseline_policy"], "file");
}

#[test]
fn oracle_check_passes_and_fault_injection_fails() {
    let dir = tempfile::tempdir().unwrap();
    let ok = gridflex(
        &["oracle-check", "--instances", "15", "--skip-projection"],
        dir.path(),
    );
    assert_exit(&ok, 0);
    assert!(String::from_utf8_lossy(&ok.stdout).contains("PASS"));

    let bad = gridflex(
        &["oracle-check", "--instances", "40", "--skip-projection", "--inject-fault"],
        dir.path(),
    );
    assert_exit(&bad, 4);
    assert!(String::from_utf8_lossy(&bad.stderr).contains("replay"));

    let degenerate = gridflex(
        &["oracle-check", "--max-steps", "0", "--skip-projection"],
        dir.path(),
    );
    assert_exit(&degenerate, 2);
}
