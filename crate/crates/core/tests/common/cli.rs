//! Helpers for driving the `stationcast` binary over the trip fixture.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use stationcast::config::required_hyper;
use stationcast::models::ModelKind;

pub fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/trips_1000.csv")
}

pub fn base_config(model: &str, extra: &str) -> String {
    let kind: ModelKind = model.parse().unwrap();
    let overridden: Vec<&str> = extra
        .lines()
        .filter_map(|l| l.split('=').next())
        .map(str::trim)
        .collect();
    let mut hyper = String::new();
    for name in required_hyper(kind) {
        let value = match *name {
            "th" => "2",
            "c0" | "t" => "4",
            "c1" => "6",
            "c2" => "0",
            "d" => "4",
            "alpha" => "0.05",
            "b" => "16",
            "s" => "3",
            _ => "0.01",
        };
        if !overridden.contains(name) {
            hyper.push_str(&format!("{name} = {value}\n"));
        }
    }
    format!(
        "trips = {}\nstart = 2016-01-04 00:00:00\nend = 2016-01-11 00:00:00\nmin_total_demand = 1\n\
         split = 128, 20, 20\nmodel = {model}\n{hyper}max_epochs = 6\ntau = 0.3\nrank_stations = 2\nrank_depth = 3\n{extra}",
        fixture().display()
    )
}

pub fn run(dir: &Path, cfg: &str, args: &[&str]) -> Output {
    let path = dir.join("run.cfg");
    fs::write(&path, cfg).unwrap();
    Command::new(env!("CARGO_BIN_EXE_stationcast"))
        .arg("--config")
        .arg(&path)
        .arg("--out")
        .arg(dir.join("out"))
        .args(args)
        .env_remove("STATIONCAST_LOG")
        .output()
        .unwrap()
}

pub fn ok(dir: &Path, cfg: &str, args: &[&str]) -> Vec<u8> {
    let out = run(dir, cfg, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

pub fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Every file under `dir`, keyed by relative path.
pub fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut files = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                files.insert(p.strip_prefix(dir).unwrap().to_path_buf(), fs::read(&p).unwrap());
            }
        }
    }
    files
}
