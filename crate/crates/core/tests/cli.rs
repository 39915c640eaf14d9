//! End-to-end checks of the `arbiter` binary.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpStream;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use sha2::{Digest, Sha256};

const GRID_HEADER: &str =
    "policy,intent_level,autonomy_level,set_id,target_id,seed,status,steps,duration_s,mean_helpfulness,mean_friendliness";

fn arbiter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arbiter")).args(args).env("ARBITER_LOG", "warn").output().unwrap()
}

fn ok(args: &[&str]) -> Output {
    let out = arbiter(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn digests(dir: &Path) -> BTreeMap<String, String> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| {
            (p.file_name().unwrap().to_string_lossy().into_owned(), hex::encode(Sha256::digest(fs::read(&p).unwrap())))
        })
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn full_grid_has_one_row_per_trial() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("grid");
    ok(&["run-grid", "--out", s(&out), "--sets", "100"]);
    let grid = fs::read_to_string(out.join("grid.csv")).unwrap();
    let mut lines = grid.lines();
    assert_eq!(lines.next(), Some(GRID_HEADER));
    assert_eq!(lines.count(), 64_800);
    assert!(!grid.contains('\r'));

    // 36 cells per policy, 600 trials each
    let cells = fs::read_to_string(out.join("cells.csv")).unwrap();
    assert_eq!(cells.lines().count(), 1 + 3 * 36);
    let header: Vec<&str> = cells.lines().next().unwrap().split(',').collect();
    let trials = header.iter().position(|c| *c == "trials").unwrap();
    assert!(cells.lines().skip(1).all(|l| l.split(',').nth(trials) == Some("600")));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    ok(&["run-grid", "--out", s(&a), "--sets", "5", "--seed", "42"]);
    ok(&["run-grid", "--out", s(&b), "--sets", "5", "--seed", "42", "--threads", "1"]);
    let da = digests(&a);
    assert_eq!(da.keys().collect::<Vec<_>>(), ["cells.csv", "grid.csv", "manifest.json", "stats.csv"]);
    assert_eq!(da, digests(&b));

    let other = dir.path().join("c");
    ok(&["run-grid", "--out", s(&other), "--sets", "5", "--seed", "43"]);
    assert_ne!(da["grid.csv"], digests(&other)["grid.csv"]);
}

#[test]
fn manifest_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    ok(&["run-grid", "--out", s(&first), "--sets", "2", "--seed", "9"]);
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(first.join("manifest.json")).unwrap()).unwrap();
    let cfg = dir.path().join("replay.toml");
    fs::write(&cfg, manifest["config"].as_str().unwrap()).unwrap();
    let sets = manifest["sets"].to_string();
    let replay = dir.path().join("replay");
    ok(&["--config", s(&cfg), "run-grid", "--out", s(&replay), "--sets", &sets]);
    assert_eq!(digests(&first), digests(&replay));
}

#[test]
fn missing_config_exits_2_and_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.toml");
    let out = arbiter(&["--config", s(&missing), "run-grid", "--out", s(&dir.path().join("o")), "--sets", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains(s(&missing)), "{}", stderr(&out));
}

#[test]
fn unknown_config_key_is_rejected_with_its_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.toml");
    fs::write(&cfg, "[sim]\nseed = 1\nsped_a = 0.002\n").unwrap();
    let out = arbiter(&["--config", s(&cfg), "trial", "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
    let msg = stderr(&out);
    assert!(msg.contains("line 3") && msg.contains("sped_a"), "{msg}");
}

#[test]
fn bad_arguments_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("o");
    for args in [
        vec!["trial", "--out", s(&o), "--intent-level", "9"],
        vec!["trial", "--out", s(&o), "--policy", "sideways"],
        vec!["run-grid", "--out", s(&o), "--sets", "0"],
        vec!["stats", s(&o), "--out", s(&o), "--thresholds", "0.5,0.1"],
    ] {
        assert_eq!(arbiter(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn stats_recomputes_run_grid_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    ok(&["run-grid", "--out", s(&run), "--sets", "3", "--seed", "5"]);
    let again = dir.path().join("again");
    ok(&["stats", s(&run.join("grid.csv")), "--out", s(&again)]);
    for f in ["cells.csv", "stats.csv"] {
        assert_eq!(fs::read(run.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "{f}");
    }

    let strict = dir.path().join("strict");
    let loose = dir.path().join("loose");
    ok(&["stats", s(&run.join("grid.csv")), "--out", s(&strict), "--thresholds", "simulation"]);
    ok(&["stats", s(&run.join("grid.csv")), "--out", s(&loose), "--thresholds", "experiment"]);
    let rows = |dir: &Path| -> Vec<(f64, String)> {
        let mut r = csv::Reader::from_path(dir.join("stats.csv")).unwrap();
        let h = r.headers().unwrap().clone();
        let (p, sig) = (h.iter().position(|c| c == "p").unwrap(), h.iter().position(|c| c == "significance").unwrap());
        r.records().map(|rec| rec.unwrap()).map(|rec| (rec[p].parse().unwrap(), rec[sig].to_string())).collect()
    };
    let (strict, loose) = (rows(&strict), rows(&loose));
    assert_eq!(strict.len(), 2 * 3 * 36);
    for ((p, a), (q, b)) in strict.iter().zip(&loose) {
        assert_eq!(p, q);
        let expect = |high: f64, moderate: f64| {
            if *p < high {
                "high"
            } else if *p < moderate {
                "moderate"
            } else {
                "not_significant"
            }
        };
        assert_eq!((a.as_str(), b.as_str()), (expect(0.001, 0.01), expect(0.01, 0.05)));
    }
}

#[test]
fn stats_flags_empty_cells_instead_of_failing() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.csv");
    let mut text = format!("{GRID_HEADER}\n");
    for set in 0..4 {
        text += &format!("bell,0,0,{set},0,{set},success,100,5.{set},0.3,0.9\n");
        text += &format!("negative,0,0,{set},0,{set},success,90,4.{set},0.3,0.9\n");
    }
    fs::write(&grid, text).unwrap();
    let out = dir.path().join("o");
    ok(&["stats", s(&grid), "--out", s(&out)]);
    let stats = fs::read_to_string(out.join("stats.csv")).unwrap();
    let positive: Vec<&str> = stats.lines().filter(|l| l.starts_with("positive,")).collect();
    assert!(!positive.is_empty() && positive.iter().all(|l| l.contains("insufficient-n")));
    assert!(stats.lines().any(|l| l.starts_with("negative,bell,0,0,completion_time,4,4,") && l.contains(",exact,")));
}

#[test]
fn stats_schema_mismatch_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let grid = dir.path().join("grid.csv");
    fs::write(&grid, "policy,level,set\nbell,0,0\n").unwrap();
    let out = arbiter(&["stats", s(&grid), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));

    fs::write(&grid, format!("{GRID_HEADER}\nbell,0,0,0,0,1,success,abc,1,0.1,0.9\n")).unwrap();
    let out = arbiter(&["stats", s(&grid), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));

    let out = arbiter(&["stats", s(&dir.path().join("none.csv")), "--out", s(&dir.path().join("o"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn demo_summary_and_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("demo");
    ok(&["demo2d", "--out", s(&out)]);
    let summary: serde_json::Value = serde_json::from_slice(&fs::read(out.join("demo_summary.json")).unwrap()).unwrap();
    let by_policy: BTreeMap<&str, &serde_json::Value> =
        summary["policies"].as_array().unwrap().iter().map(|p| (p["policy"].as_str().unwrap(), p)).collect();
    assert_eq!(by_policy["positive"]["status"], "stuck_at_nominal");
    assert_eq!(by_policy["negative"]["status"], "success");
    assert_eq!(by_policy["bell"]["status"], "success");
    let time = |p: &str| by_policy[p]["duration_s"].as_f64().unwrap();
    assert!(time("negative") < time("bell"));
    assert_eq!(summary["samples"].as_array().unwrap().len(), 9);

    for policy in ["positive", "negative", "bell"] {
        let trace = fs::read_to_string(out.join(format!("trace_{policy}.csv"))).unwrap();
        let steps = by_policy[policy]["steps"].as_u64().unwrap() as usize;
        assert_eq!(trace.lines().count() - 1, steps + 1, "{policy}");
    }
}

#[test]
fn single_trial_writes_trace_and_outcome() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trial");
    ok(&["trial", "--out", s(&out), "--seed", "5", "--policy", "negative", "--intent-level", "2", "--target", "3"]);
    let outcome: serde_json::Value = serde_json::from_slice(&fs::read(out.join("outcome.json")).unwrap()).unwrap();
    let steps = outcome["steps"].as_u64().unwrap() as usize;
    assert_eq!(fs::read_to_string(out.join("trace.csv")).unwrap().lines().count(), steps + 2);
    let manifest: serde_json::Value = serde_json::from_slice(&fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["params"]["policy"], "negative");
    assert_eq!(manifest["seed"], 5);
}

#[test]
fn serve_answers_health_checks_and_drains_on_sigint() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_arbiter"))
        .args(["serve", "--bind", "127.0.0.1:0"])
        .env("ARBITER_LOG", "warn")
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let addr = line.trim().strip_prefix("listening on http://").unwrap_or_else(|| panic!("{line:?}")).to_string();

    let mut stream = TcpStream::connect(&addr).unwrap();
    write!(stream, "GET /healthz HTTP/1.1\r\nHost: {addr}\r\nConnection: close\r\n\r\n").unwrap();
    let mut reply = String::new();
    stream.read_to_string(&mut reply).unwrap();
    assert!(reply.starts_with("HTTP/1.1 200"), "{reply}");
    assert!(reply.ends_with("ok"), "{reply}");

    let killed = Command::new("kill").args(["-INT", &child.id().to_string()]).status().unwrap();
    assert!(killed.success());
    assert_eq!(child.wait().unwrap().code(), Some(0));
}

#[test]
fn serve_bind_failure_exits_4() {
    let taken = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = taken.local_addr().unwrap().to_string();
    let out = arbiter(&["serve", "--bind", &addr]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}
