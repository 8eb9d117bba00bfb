#![allow(dead_code)]

use std::path::Path;
use std::process::Command;

use serde_json::{json, Value};

pub fn desk() -> Value {
    json!({
        "space": {"type": "finite", "weights": [0.5, 0.5]},
        "kernel": {"type": "matrix", "generator": [[1.0, -1.0], [-1.0, 1.0]]},
        "nonlinearity": {"type": "power", "alpha": 0.5},
        "weight": {"type": "mixture", "rate": 1.0, "ratio": 0.5, "lambda0": 0.5},
        "source": {"type": "constant", "value": 0.25},
        "time": {"T": 5.0, "nt": 200, "T0": 5.0},
        "solver": {"tol": 1e-12, "max_iter": 500, "start": "upper"},
        "certificate": {"enabled": true, "epsilon": "auto"}
    })
}

pub fn damped() -> Value {
    json!({
        "space": {"type": "finite", "weights": [1.0]},
        "kernel": {"type": "matrix", "generator": [[0.0]], "damping": 1.0},
        "nonlinearity": {"type": "power", "alpha": 0.5},
        "weight": {"type": "constant", "value": 1.0},
        "source": {"type": "duhamel", "u0": 1.0, "f": 1.0},
        "time": {"T": 2.0, "nt": 200},
        "solver": {"tol": 1e-12, "max_iter": 500, "start": "upper"},
        "certificate": {"enabled": true, "epsilon": "auto"}
    })
}

/// The three constructed failures with the entry each must trip.
pub fn failures() -> Vec<(&'static str, Value, &'static str)> {
    let mut c0 = desk();
    c0["weight"]["ratio"] = json!(0.0);
    let mut unnormalized = desk();
    unnormalized["weight"]["amplitude"] = json!(2.0);
    let mut positive = desk();
    positive["kernel"]["generator"] = json!([[1.0, 0.5], [-1.0, 1.0]]);
    vec![
        ("c = 0 envelope", c0, "envelope_ratio_limit"),
        ("unnormalized p2", unnormalized, "p2_normalized"),
        ("positive off-diagonal generator", positive, "kernel_nonnegative"),
    ]
}

pub struct Run {
    pub code: i32,
    pub summary: Value,
    pub stdout: String,
    pub stderr: String,
}

pub fn hvsolve(dir: &Path, command: &str, config: &Value, extra: &[&str]) -> Run {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, serde_json::to_string_pretty(config).unwrap()).unwrap();
    hvsolve_file(dir, command, &cfg, extra)
}

pub fn hvsolve_file(dir: &Path, command: &str, cfg: &Path, extra: &[&str]) -> Run {
    let out = dir.join("out");
    let o = Command::new(env!("CARGO_BIN_EXE_hvsolve"))
        .arg(command)
        .arg("--config")
        .arg(cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .expect("spawn hvsolve");
    let summary = std::fs::read_to_string(out.join("summary.json"))
        .ok()
        .and_then(|s| serde_json::from_str(&s).ok())
        .unwrap_or(Value::Null);
    Run {
        code: o.status.code().unwrap_or(-1),
        summary,
        stdout: String::from_utf8_lossy(&o.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&o.stderr).into_owned(),
    }
}

pub fn failing(summary: &Value) -> Vec<String> {
    summary["assumptions"]["failing"]
        .as_array()
        .map(|a| a.iter().filter_map(|v| v.as_str().map(String::from)).collect())
        .unwrap_or_default()
}

pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    (header, lines.map(|l| l.split(',').map(String::from).collect()).collect())
}
