//! End-to-end tests of the `loraplan` binary: exit-code contract,
//! mutually-exclusive sources, config-file merging, and byte-identical
//! reruns.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_loraplan"))
}

fn scenario_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/sample_scenario.json")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn plan_feasible_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plan.json");
    let res = run(&[
        "plan",
        "--scenario",
        scenario_path().to_str().unwrap(),
        "--channel",
        "okumura_hata",
        "--rho",
        "-90",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let plan: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(plan["status"], "optimal");
    assert!(plan["objective"].as_u64().unwrap() >= 1);
    assert_eq!(plan["channel_source"], "okumura_hata");
}

#[test]
fn plan_infeasible_exit_two_but_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("plan.json");
    // a threshold above every received power is uncoverable
    let res = run(&[
        "plan",
        "--scenario",
        scenario_path().to_str().unwrap(),
        "--channel",
        "okumura_hata",
        "--rho",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2), "{}", stderr(&res));
    let plan: serde_json::Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(plan["status"], "infeasible");
    assert!(!plan["uncovered"].as_array().unwrap().is_empty());
    assert!(plan["selected"].as_array().unwrap().is_empty());
}

#[test]
fn plan_rejects_both_sources() {
    let res = run(&[
        "plan",
        "--scenario",
        scenario_path().to_str().unwrap(),
        "--channel",
        "okumura_hata",
        "--rt-dir",
        "/nonexistent",
        "--rho",
        "-90",
        "--out",
        "/tmp/unused_plan.json",
    ]);
    assert_eq!(res.status.code(), Some(1));
    assert!(
        stderr(&res).contains("mutually exclusive"),
        "{}",
        stderr(&res)
    );
}

#[test]
fn plan_unreadable_scenario_exit_one() {
    let res = run(&[
        "plan",
        "--scenario",
        "/nonexistent/scenario.json",
        "--channel",
        "okumura_hata",
        "--out",
        "/tmp/unused_plan.json",
    ]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn sweep_default_range_has_nine_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let res = run(&[
        "sweep",
        "--scenario",
        scenario_path().to_str().unwrap(),
        "--channel",
        "log_distance",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let text = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "rho_dbm,status,objective,selected");
    assert_eq!(lines.len(), 1 + 9, "default -120..-80 step 5");
    // objective column is non-decreasing over feasible rows
    let objectives: Vec<u64> = lines[1..]
        .iter()
        .filter_map(|l| l.split(',').nth(2).filter(|s| !s.is_empty()))
        .map(|s| s.parse().unwrap())
        .collect();
    assert!(
        objectives.windows(2).all(|w| w[0] <= w[1]),
        "{objectives:?}"
    );
}

#[test]
fn sweep_all_infeasible_still_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let res = run(&[
        "sweep",
        "--scenario",
        scenario_path().to_str().unwrap(),
        "--channel",
        "okumura_hata",
        "--rho-start",
        "-10",
        "--rho-end",
        "-5",
        "--rho-step",
        "5",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let text = fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.lines().skip(1).all(|l| l.contains("infeasible")));
}

#[test]
fn simulate_missing_plan_exit_one() {
    let res = run(&[
        "simulate",
        "--scenario",
        scenario_path().to_str().unwrap(),
        "--plan",
        "/nonexistent/plan.json",
        "--channel",
        "okumura_hata",
        "--out",
        "/tmp/unused_report.json",
    ]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn simulate_infeasible_plan_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    run(&[
        "plan",
        "--scenario",
        scenario_path().to_str().unwrap(),
        "--channel",
        "okumura_hata",
        "--rho",
        "0",
        "--out",
        plan.to_str().unwrap(),
    ]);
    let res = run(&[
        "simulate",
        "--scenario",
        scenario_path().to_str().unwrap(),
        "--plan",
        plan.to_str().unwrap(),
        "--channel",
        "okumura_hata",
        "--out",
        dir.path().join("report.json").to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn commands_are_idempotent_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = scenario_path();
    let scenario = scenario.to_str().unwrap();
    let plan_a = dir.path().join("plan_a.json");
    let plan_b = dir.path().join("plan_b.json");
    let alpha_a = dir.path().join("alpha_a.csv");
    let alpha_b = dir.path().join("alpha_b.csv");
    for (plan, alpha) in [(&plan_a, &alpha_a), (&plan_b, &alpha_b)] {
        let res = run(&[
            "plan",
            "--scenario",
            scenario,
            "--channel",
            "log_distance",
            "--rho",
            "-95",
            "--out",
            plan.to_str().unwrap(),
            "--alpha-out",
            alpha.to_str().unwrap(),
        ]);
        assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    }
    assert_eq!(fs::read(&plan_a).unwrap(), fs::read(&plan_b).unwrap());
    assert_eq!(fs::read(&alpha_a).unwrap(), fs::read(&alpha_b).unwrap());

    let rep_a = dir.path().join("rep_a.json");
    let rep_b = dir.path().join("rep_b.json");
    for rep in [&rep_a, &rep_b] {
        let res = run(&[
            "simulate",
            "--scenario",
            scenario,
            "--plan",
            plan_a.to_str().unwrap(),
            "--alpha",
            alpha_a.to_str().unwrap(),
            "--packets",
            "200",
            "--duration",
            "120",
            "--seed",
            "11",
            "--out",
            rep.to_str().unwrap(),
        ]);
        assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    }
    assert_eq!(fs::read(&rep_a).unwrap(), fs::read(&rep_b).unwrap());

    let out_a = dir.path().join("out_a");
    let out_b = dir.path().join("out_b");
    for out in [&out_a, &out_b] {
        let res = run(&[
            "report",
            "--alpha",
            alpha_a.to_str().unwrap(),
            "--plan",
            plan_a.to_str().unwrap(),
            "--pdr",
            rep_a.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    }
    assert_eq!(
        fs::read(out_a.join("summary.csv")).unwrap(),
        fs::read(out_b.join("summary.csv")).unwrap()
    );
    let cdfs: Vec<_> = fs::read_dir(&out_a)
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .filter(|n| n.to_string_lossy().starts_with("cdf_"))
        .collect();
    assert_eq!(cdfs.len(), 1);
    assert_eq!(
        fs::read(out_a.join(&cdfs[0])).unwrap(),
        fs::read(out_b.join(&cdfs[0])).unwrap()
    );
}

#[test]
fn config_file_supplies_defaults_and_cli_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.json");
    let out_from_file = dir.path().join("from_file.json");
    fs::write(
        &cfg_path,
        format!(
            r#"{{
  "scenario": "{}",
  "channel": {{ "model": "log_distance", "exponent": 2.0 }},
  "rho_dbm": -100,
  "out": "{}"
}}"#,
            scenario_path().display(),
            out_from_file.display()
        ),
    )
    .unwrap();

    // everything from the config file
    let res = run(&["plan", "--config", cfg_path.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let from_file: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_from_file).unwrap()).unwrap();
    assert_eq!(from_file["rho_dbm"], -100.0);

    // CLI flags override config entries (rho and out; channel stays)
    let out_cli = dir.path().join("from_cli.json");
    let res = run(&[
        "plan",
        "--config",
        cfg_path.to_str().unwrap(),
        "--rho",
        "-110",
        "--out",
        out_cli.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
    let from_cli: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&out_cli).unwrap()).unwrap();
    assert_eq!(from_cli["rho_dbm"], -110.0);
    assert_eq!(from_cli["channel_source"], "log_distance");
}

#[test]
fn config_file_with_unknown_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.json");
    fs::write(&cfg_path, r#"{ "scnario": "typo.json" }"#).unwrap();
    let res = run(&[
        "plan",
        "--config",
        cfg_path.to_str().unwrap(),
        "--channel",
        "okumura_hata",
        "--out",
        "/tmp/unused.json",
    ]);
    assert_eq!(res.status.code(), Some(1));
}

#[test]
fn ingest_rt_then_plan_from_csv_matches_direct_rt_plan() {
    use loraplan_core::channel::{ChannelConfig, ModelKind};
    use loraplan_core::rt_ingest::{synthesize_maps, RasterSpec};
    use loraplan_core::scenario::sample_scenario;

    let dir = tempfile::tempdir().unwrap();
    let maps = dir.path().join("maps");
    let scenario_obj = sample_scenario();
    let raster = RasterSpec {
        origin_x_m: 0.0,
        origin_y_m: 0.0,
        cell_size_m: 5.0,
        nx: 91,
        ny: 91,
    };
    let cfg = ChannelConfig::new(ModelKind::OkumuraHata);
    synthesize_maps(&maps, &scenario_obj, &cfg, raster, 1.4, 4.0, 9).unwrap();

    let alpha_csv = dir.path().join("alpha.csv");
    let res = run(&[
        "ingest-rt",
        "--scenario",
        scenario_path().to_str().unwrap(),
        "--rt-dir",
        maps.to_str().unwrap(),
        "--out",
        alpha_csv.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));

    let plan_rt = dir.path().join("plan_rt.json");
    let res = run(&[
        "plan",
        "--scenario",
        scenario_path().to_str().unwrap(),
        "--rt-dir",
        maps.to_str().unwrap(),
        "--rho",
        "-90",
        "--out",
        plan_rt.to_str().unwrap(),
    ]);
    assert!(
        matches!(res.status.code(), Some(0) | Some(2)),
        "{}",
        stderr(&res)
    );

    // the ingested CSV drives the simulator identically to the rt source
    if res.status.code() == Some(0) {
        let rep_csv = dir.path().join("rep_csv.json");
        let rep_rt = dir.path().join("rep_rt.json");
        for (alpha_flag, value, out) in [
            ("--alpha", alpha_csv.to_str().unwrap(), &rep_csv),
            ("--rt-dir", maps.to_str().unwrap(), &rep_rt),
        ] {
            let res = run(&[
                "simulate",
                "--scenario",
                scenario_path().to_str().unwrap(),
                "--plan",
                plan_rt.to_str().unwrap(),
                alpha_flag,
                value,
                "--packets",
                "100",
                "--duration",
                "60",
                "--seed",
                "3",
                "--out",
                out.to_str().unwrap(),
            ]);
            assert_eq!(res.status.code(), Some(0), "{}", stderr(&res));
        }
        assert_eq!(fs::read(&rep_csv).unwrap(), fs::read(&rep_rt).unwrap());
    }
}
