use std::path::Path;
use std::process::{Command, Output};

use cellwear_cli::fixtures::{reference_summaries, summary, REFERENCE_LIVES};
use cellwear_core::metrics::{RunSummary, TvdReport};
use cellwear_core::output::{
    find_summaries, read_trajectory, read_trend, write_summary, SUMMARY_FILE, TREND_FILE, TVD_REPORT_FILE,
};
use cellwear_core::params::CellParameters;
use cellwear_fit::dataset::Condition;
use cellwear_fit::pipeline::{synthesize, Protocol};

fn cellwear(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cellwear"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn store(dir: &Path, runs: &[RunSummary]) {
    for s in runs {
        let path = dir.join(&s.cell).join(&s.drive).join(&s.scenario).join(SUMMARY_FILE);
        write_summary(&path, s).unwrap();
    }
}

fn read_report(dir: &Path) -> TvdReport {
    serde_json::from_str(&std::fs::read_to_string(dir.join(TVD_REPORT_FILE)).unwrap()).unwrap()
}

#[test]
fn empty_scenario_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = cellwear(&["simulate", "--scenarios", "", "--out", out]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = cellwear(&["simulate", "--cells", "nmc999", "--out", out]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    let o = cellwear(&["simulate", "--mode", "quick", "--out", out]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn grid_writes_one_summary_per_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = cellwear(&[
        "simulate",
        "--cells",
        "nmc111,nmc622_25c,nmc622_45c",
        "--scenarios",
        "no_v2g,v2g_late",
        "--max-days",
        "15",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let found = find_summaries(dir.path()).unwrap();
    assert_eq!(found.len(), 6);
    for (path, s) in &found {
        assert_eq!(s.final_day, 15);
        let rows = read_trajectory(&path.with_file_name("trajectory.csv")).unwrap();
        assert_eq!(rows.first().unwrap().day, 0);
        assert_eq!(rows.last().unwrap().day, 15);
    }
    let table = String::from_utf8_lossy(&o.stdout);
    assert_eq!(table.lines().filter(|l| l.contains("censored")).count(), 6);
}

#[test]
fn rerun_overwrites_outputs_identically() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = [
        "simulate",
        "--cells",
        "nmc111",
        "--scenarios",
        "v2g_moderate",
        "--max-days",
        "6",
        "--out",
        out,
    ];
    let file = dir.path().join("NMC111/long/v2g_moderate/trajectory.csv");
    assert!(cellwear(&args).status.success());
    let first = std::fs::read(&file).unwrap();
    assert!(cellwear(&args).status.success());
    assert_eq!(std::fs::read(&file).unwrap(), first);
}

#[test]
fn accelerated_and_exhaustive_runs_agree() {
    let dir = tempfile::tempdir().unwrap();
    let mut retention = Vec::new();
    for mode in ["accelerated", "exhaustive"] {
        let out = dir.path().join(mode);
        let o = cellwear(&[
            "simulate",
            "--cells",
            "nmc622_45c",
            "--scenarios",
            "v2g_late",
            "--mode",
            mode,
            "--max-days",
            "80",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let (_, s) = find_summaries(&out).unwrap().pop().unwrap();
        assert_eq!(s.mode, mode);
        retention.push((s.capacity_retention, s.simulated_days));
    }
    let (acc, exh) = (retention[0], retention[1]);
    let initial_over_nominal = 1.03;
    assert!((acc.0 - exh.0).abs() * initial_over_nominal < 0.005, "{acc:?} {exh:?}");
    assert!(acc.1 < exh.1);
}

#[test]
fn reference_fixture_gives_published_ratios() {
    let dir = tempfile::tempdir().unwrap();
    store(dir.path(), &reference_summaries());
    let o = cellwear(&["tvd", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = read_report(dir.path());
    assert_eq!(report.entries.len(), 3);
    for (cell, .., expected) in REFERENCE_LIVES {
        let e = report.entries.iter().find(|e| e.cell == cell).unwrap();
        let v = e.charge.tvd.value();
        assert!((v / expected - 1.0).abs() < 0.01, "{cell}: {v}");
    }
    assert_eq!(read_trend(&dir.path().join(TREND_FILE)).unwrap().len(), 3);
}

#[test]
fn baseline_only_directory_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    store(dir.path(), &[summary("NMC111", "no_v2g", "long", 371.0, 390.3)]);
    let o = cellwear(&["tvd", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no V2G runs found"), "{}", stderr(&o));
}

#[test]
fn drive_variants_are_never_cross_paired() {
    let dir = tempfile::tempdir().unwrap();
    store(
        dir.path(),
        &[
            summary("NMC111", "no_v2g", "long", 371.0, 390.3),
            summary("NMC111", "v2g_moderate", "short", 221.0, 453.5),
        ],
    );
    let o = cellwear(&["tvd", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(!dir.path().join(TVD_REPORT_FILE).exists());

    store(dir.path(), &[summary("NMC111", "v2g_moderate", "long", 221.0, 453.5)]);
    let o = cellwear(&["tvd", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = read_report(dir.path());
    assert_eq!(report.entries.len(), 1);
    assert_eq!(report.entries[0].drive, "long");
    assert_eq!(report.unmatched.len(), 1);
    assert!(report.unmatched[0].0.contains("short"));
}

#[test]
fn fit_without_calendar_data_names_the_stage() {
    let dir = tempfile::tempdir().unwrap();
    let cell = CellParameters::bundled("nmc622_25c").unwrap();
    let protocol = Protocol {
        condition: Condition::Cycling {
            charge_c_rate: 0.5,
            discharge_c_rate: 1.0,
            dod: 0.8,
            temperature_k: cell.temperature,
        },
        days: 4,
        rpt_every: 2,
    };
    for d in synthesize(&cell.name, &cell, &[protocol], 0.0, 1).unwrap() {
        d.save(&dir.path().join(d.file_name())).unwrap();
    }
    let out = dir.path().join("fit");
    let o = cellwear(&[
        "fit",
        dir.path().to_str().unwrap(),
        "--cells",
        "nmc622_25c",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("stage1 requires calendar data"), "{}", stderr(&o));
}

#[test]
fn validate_passes_on_bundled_fixtures() {
    let o = cellwear(&["validate"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{text}\n{}", stderr(&o));
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
}
