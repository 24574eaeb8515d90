//! Acceptance run: one line per criterion, nonzero exit if any is red.

use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use curv4_cli::suite;

/// Wall-clock budget per criterion, in seconds.
const BUDGET: [u64; 11] = [10, 10, 60, 30, 10, 300, 30, 5, 300, 300, 600];

fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn line(id: u32, name: &str, pass: bool, elapsed: Duration, summary: &str) -> bool {
    let within = elapsed.as_secs_f64() <= BUDGET[id as usize - 1] as f64;
    let ok = pass && within;
    let time_note = if within {
        String::new()
    } else {
        format!(" [over budget {} s]", BUDGET[id as usize - 1])
    };
    println!(
        "criterion {id:>2} {} {name} ({:.1} s{time_note}): {summary}",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    ok
}

fn archive_adjudication(details: &serde_json::Value) -> std::io::Result<PathBuf> {
    let dir = workspace_root().join("reports");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("thm13_adjudication.json");
    let mut text = serde_json::to_string_pretty(&details["adjudication"]).expect("json");
    text.push('\n');
    std::fs::write(&path, text)?;
    Ok(path)
}

fn suite_json() -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_curv4"))
        .args(["suite", "--json", "--timestamp", "0"])
        .output()
        .expect("binary runs");
    assert!(
        matches!(out.status.code(), Some(0) | Some(1)),
        "suite crashed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

fn main() {
    let mut all = true;
    for id in 1..=10u32 {
        let start = Instant::now();
        let result = suite::run(id);
        let elapsed = start.elapsed();
        match result {
            Ok(o) => {
                let mut summary = o.summary.clone();
                if id == 10 {
                    match archive_adjudication(&o.details) {
                        Ok(p) => summary.push_str(&format!("; adjudication archived to {}", p.display())),
                        Err(e) => {
                            summary.push_str(&format!("; archiving failed: {e}"));
                            all = false;
                        }
                    }
                }
                all &= line(id, o.name, o.pass, elapsed, &summary);
            }
            Err(e) => {
                all &= line(id, suite::NAMES[id as usize - 1], false, elapsed, &format!("error: {e}"));
            }
        }
    }

    let start = Instant::now();
    let first = suite_json();
    let second = suite_json();
    let same = first == second && !first.is_empty();
    let summary = format!(
        "two `suite --json` runs, {} bytes each, {}",
        first.len(),
        if same { "byte-identical" } else { "outputs differ" }
    );
    all &= line(11, "determinism", same, start.elapsed(), &summary);

    if !all {
        std::process::exit(1);
    }
}
