//! The `stationcast` binary end to end: determinism, exit codes and config echo.

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use common::cli::{base_config, code, ok, run, snapshot};
use proptest::prelude::*;
use stationcast::config::RunConfig;
use stationcast::models::ModelKind;

fn pipeline(dir: &Path) -> Vec<Vec<u8>> {
    let reg = base_config("gcnn-reg-ddgf", "");
    let de = base_config("gcnn-de", "th = 2\n");
    let grid = base_config("gcnn-rec-ddgf", "d = {2:2:4}\n");
    vec![
        ok(dir, &reg, &["ingest"]),
        ok(dir, &de, &["build-graph"]),
        ok(dir, &de, &["train"]),
        ok(dir, &reg, &["train", "--seed", "3"]),
        ok(dir, &grid, &["grid", "--jobs", "2"]),
        ok(dir, &base_config("ha", ""), &["train"]),
        ok(dir, &reg, &["evaluate"]),
        ok(dir, &reg, &["analyze", "--seed", "3"]),
        ok(dir, &reg, &["export"]),
    ]
}

#[test]
fn whole_pipeline_is_byte_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let out_a = pipeline(a.path());
    let snap_a = snapshot(&a.path().join("out"));
    fs::remove_dir_all(a.path().join("out")).unwrap();
    let out_b = pipeline(a.path());
    assert_eq!(out_a, out_b);
    let snap_b = snapshot(&a.path().join("out"));
    assert_eq!(snap_a.keys().collect::<Vec<_>>(), snap_b.keys().collect::<Vec<_>>());
    for (k, v) in &snap_a {
        assert_eq!(v, &snap_b[k], "{} differs between runs", k.display());
    }
    for name in [
        "demand.scst",
        "metrics.csv",
        "analysis-ddgf.gexf",
        "analysis-communities.csv",
        "grid-gcnn-rec-ddgf.csv",
    ] {
        assert!(snap_a.contains_key(Path::new(name)), "missing {name}");
    }
    let metrics = String::from_utf8_lossy(&snap_a[Path::new("metrics.csv")]).to_string();
    assert!(metrics.starts_with("model,rmse,rmse_daytime,mae,r_squared\n"));
    assert_eq!(metrics.lines().count(), 1 + 4);

    // rerunning a command in place rewrites identical bytes
    let reg = base_config("gcnn-reg-ddgf", "");
    ok(a.path(), &reg, &["train", "--seed", "3"]);
    ok(a.path(), &reg, &["evaluate"]);
    assert_eq!(snapshot(&a.path().join("out")), snap_a);
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = Command::new(env!("CARGO_BIN_EXE_stationcast"))
        .args(["--config", "/nonexistent/run.cfg", "ingest"])
        .output()
        .unwrap();
    assert_eq!(code(&missing), 2);
    assert_eq!(
        code(&run(dir.path(), &base_config("mlp", "colour = blue\n"), &["train"])),
        2
    );
    let no_lambda: String = base_config("lasso", "")
        .lines()
        .filter(|l| !l.starts_with("lambda"))
        .map(|l| format!("{l}\n"))
        .collect();
    assert_eq!(code(&run(dir.path(), &no_lambda, &["train"])), 2);
    assert_eq!(
        code(&run(dir.path(), &base_config("mlp", "c1 = {2:2:6}\n"), &["train"])),
        2
    );
    assert_eq!(
        code(&run(dir.path(), &base_config("mlp", ""), &["ingest", "--jobs", "0"])),
        2
    );
    assert_eq!(code(&run(dir.path(), &base_config("mlp", ""), &["no-such-command"])), 2);
    let bad_log = Command::new(env!("CARGO_BIN_EXE_stationcast"))
        .args(["ingest"])
        .env("STATIONCAST_LOG", "chatty")
        .output()
        .unwrap();
    assert_eq!(code(&bad_log), 2);
    assert!(!dir.path().join("out").exists());
}

#[test]
fn data_errors_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let strict_filter = base_config("ha", "").replace("min_total_demand = 1\n", "min_total_demand = 100000\n");
    assert_eq!(code(&run(dir.path(), &strict_filter, &["ingest"])), 3);
    assert!(!dir.path().join("out/demand.scst").exists());

    let cfg = base_config("gcnn-reg-ddgf", "");
    ok(dir.path(), &cfg, &["ingest"]);
    let demand = dir.path().join("out/demand.scst");
    let mut bytes = fs::read(&demand).unwrap();
    bytes.truncate(bytes.len() - 7);
    fs::write(&demand, bytes).unwrap();
    let out = run(dir.path(), &cfg, &["train"]);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("digest"));
}

#[test]
fn divergence_exits_with_four_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = base_config("gcnn-reg-ddgf", "alpha = 1e200\n");
    ok(dir.path(), &cfg, &["ingest"]);
    let before = snapshot(&dir.path().join("out"));
    let out = run(dir.path(), &cfg, &["train"]);
    assert_eq!(code(&out), 4, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(snapshot(&dir.path().join("out")), before);
}

#[test]
fn clip_negative_never_raises_the_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = base_config("lstm", "");
    ok(dir.path(), &cfg, &["ingest"]);
    ok(dir.path(), &cfg, &["train"]);
    let parse = |bytes: Vec<u8>| -> Vec<f64> {
        let text = String::from_utf8(bytes).unwrap();
        let row = text.lines().nth(1).unwrap().to_string();
        row.split(',').skip(1).map(|v| v.parse().unwrap()).collect()
    };
    let plain = parse(ok(dir.path(), &cfg, &["evaluate"]));
    let clipped = parse(ok(dir.path(), &cfg, &["evaluate", "--clip-negative"]));
    assert!(clipped[0] <= plain[0] + 1e-12);
    assert!(clipped[2] <= plain[2] + 1e-12);
}

#[test]
fn checkpoint_config_section_echoes_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = base_config("gcnn-reg-ddgf", "");
    ok(dir.path(), &cfg, &["ingest"]);
    ok(dir.path(), &cfg, &["train"]);
    let exported = ok(
        dir.path(),
        &cfg,
        &[
            "export",
            dir.path().join("out/model-gcnn-reg-ddgf.scst").to_str().unwrap(),
        ],
    );
    assert!(!exported.is_empty());
    let echo = fs::read_to_string(dir.path().join("out/export/model-gcnn-reg-ddgf/config.txt")).unwrap();
    let parsed = RunConfig::parse(&echo).unwrap();
    assert_eq!(parsed.to_text(), echo);
    assert_eq!(parsed.out, dir.path().join("out"));
}

fn arb_config() -> impl Strategy<Value = RunConfig> {
    (
        (
            0u64..100_000,
            any::<bool>(),
            any::<bool>(),
            1usize..5000,
            1usize..500,
            1usize..500,
        ),
        (
            0usize..10,
            prop::option::of(1usize..50),
            any::<bool>(),
            any::<u64>(),
            any::<bool>(),
        ),
        (0.0f64..1.0, 0.01f64..5.0, 1usize..30, 1usize..20, 1usize..20),
        (1usize..60, prop::option::of((0.001f64..0.1, 1u32..5)), 1usize..400),
    )
        .prop_map(|(a, b, c, d)| {
            let mut cfg = RunConfig::default();
            cfg.min_total_demand = a.0;
            cfg.require_every_year = a.1;
            cfg.strict = a.2;
            (cfg.n_train, cfg.n_val, cfg.n_test) = (a.3, a.4, a.5);
            cfg.model = Some(ModelKind::ALL[b.0]);
            cfg.grid_budget = b.1;
            cfg.weekly = b.2;
            cfg.seed = b.3;
            cfg.clip_negative = b.4;
            cfg.tau = c.0;
            cfg.distance_bin = c.1;
            cfg.distance_bins = c.2;
            cfg.rank_stations = c.3;
            cfg.rank_depth = c.4;
            cfg.set("c0", &d.0.to_string()).unwrap();
            if let Some((lo, k)) = d.1 {
                cfg.set("alpha", &format!("{{{lo}:{lo}:{}}}", lo * k as f64)).unwrap();
            }
            cfg.max_epochs = d.2;
            cfg.trips = vec![PathBuf::from("data/a.csv"), PathBuf::from("data/b.csv")];
            cfg
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn config_echo_round_trips(cfg in arb_config()) {
        let text = cfg.to_text();
        let back = RunConfig::parse(&text).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.to_text(), text);
    }
}
