use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cog_core::br::RegularizationParams;
use cog_core::experiments::{landscape, LandscapeMetric};
use cog_core::io::{load_game, Table};
use cog_core::rules::Rule;
use serde_json::Value;
use tempfile::TempDir;

const CHICKEN: &str = r#"{"payoffs": [[[0.75, 0.5], [1, 0]], [[0.75, 1], [0.5, 0]]]}"#;

fn cog(args: &[&str]) -> Output {
    cog_env(args, &[])
}

fn cog_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cog"));
    cmd.args(args).env_remove("COG_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = cog(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

struct Scratch {
    dir: TempDir,
}

impl Scratch {
    fn new() -> Self {
        let s = Self { dir: TempDir::new().unwrap() };
        s.write("chicken.json", CHICKEN);
        s.write("half.json", "[[0.5, 0.5], [0.5, 0.5]]");
        s
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).display().to_string()
    }

    fn write(&self, name: &str, text: &str) {
        std::fs::write(self.path(name), text).unwrap();
    }
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data").join(name).display().to_string()
}

#[test]
fn identical_seeds_give_identical_bytes() {
    let s = Scratch::new();
    let game = s.arg("chicken.json");
    let run = |seed: &str, out: &str, env: &[(&str, &str)]| {
        let o = cog_env(
            &["solve", "--game", &game, "--rule", "ml", "--iters", "25", "--samples", "40", "--seed", seed, "--out", &s.arg(out)],
            env,
        );
        assert!(o.status.success());
        std::fs::read(s.path(out)).unwrap()
    };
    let a = run("5", "a.csv", &[]);
    assert_eq!(a, run("5", "b.csv", &[]));
    assert_eq!(a, run("5", "c.csv", &[("COG_THREADS", "1")]));
    assert_ne!(a, run("6", "d.csv", &[]));
    let table = Table::read_csv(a.as_slice()).unwrap();
    assert_eq!(table.header[0], "round");
    assert_eq!(table.rows.len(), 25);
}

#[test]
fn exit_codes() {
    let s = Scratch::new();
    assert_eq!(cog(&["--help"]).status.code(), Some(0));
    assert_eq!(cog(&["no-such-command"]).status.code(), Some(1));
    assert_eq!(cog(&["solve", "--game", &s.arg("missing.json")]).status.code(), Some(1));
    let bad_rule = cog(&["solve", "--game", &s.arg("chicken.json"), "--rule", "dictator"]);
    assert_eq!(bad_rule.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&bad_rule.stderr).contains("dictator"));
    s.write("bad.json", r#"{"payoffs": [[1, 2], [3]]}"#);
    assert_eq!(cog(&["analyze", "--game", &s.arg("bad.json")]).status.code(), Some(1));
    let zero_threads = cog_env(&["landscape", "--game", &s.arg("chicken.json"), "--grid", "2"], &[("COG_THREADS", "0")]);
    assert_eq!(zero_threads.status.code(), Some(1));
    // No iterations allowed: the logit fixed point cannot be reached.
    let stuck = cog(&[
        "election", "solve", "--csv", &data("table2.csv"), "--steps", "1", "--t0", "5", "--min-temperature", "5",
        "--max-iter", "0",
    ]);
    assert_eq!(stuck.status.code(), Some(2), "{}", String::from_utf8_lossy(&stuck.stderr));
}

#[test]
fn landscape_csv_round_trips_bit_exactly() {
    let s = Scratch::new();
    let text = ok(&["landscape", "--game", &s.arg("chicken.json"), "--rule", "borda", "--grid", "7", "--samples", "30", "--seed", "2"]);
    let table = Table::read_csv(text.as_bytes()).unwrap();
    let game = load_game(s.path("chicken.json")).unwrap().to_cog();
    let metric = LandscapeMetric::Emd {
        rules: vec![Rule::Borda],
        params: RegularizationParams::new(0.0, 0.1, 30, 2),
    };
    let cells = landscape(&game, &metric, 7).unwrap();
    let eps = table.column("eps").unwrap();
    assert_eq!(eps.len(), cells.len());
    for (a, c) in eps.iter().zip(&cells) {
        assert_eq!(a.to_bits(), c.eps.to_bits());
    }
    assert_eq!(table.column("x1").unwrap()[7], 1.0 / 6.0);
}

#[test]
fn classical_landscape_vanishes_only_at_equilibria() {
    let s = Scratch::new();
    let text = ok(&["landscape", "--game", &s.arg("chicken.json"), "--metric", "classical", "--grid", "4"]);
    let t = Table::read_csv(text.as_bytes()).unwrap();
    let (x1, x2, eps) = (t.column("x1").unwrap(), t.column("x2").unwrap(), t.column("eps").unwrap());
    for k in 0..eps.len() {
        // The mixed equilibrium plus the two pure ones on the corners.
        let at_ne = [(2.0 / 3.0, 2.0 / 3.0), (0.0, 1.0), (1.0, 0.0)]
            .iter()
            .any(|&(a, b)| (x1[k] - a).abs() < 1e-12 && (x2[k] - b).abs() < 1e-12);
        assert_eq!(eps[k].abs() < 1e-12, at_ne, "({}, {}) eps {}", x1[k], x2[k], eps[k]);
    }
}

#[test]
fn verify_and_shapley_on_chicken() {
    let s = Scratch::new();
    let v: Value = serde_json::from_str(&ok(&[
        "verify", "--game", &s.arg("chicken.json"), "--profile", &s.arg("half.json"), "--rule", "ml", "--format", "json",
    ]))
    .unwrap();
    assert!(v.as_array().unwrap().iter().all(|p| p["in_best_response"] == Value::Bool(true)));
    let t = Table::read_csv(
        ok(&["metrics", "--metric", "shapley", "--game", &s.arg("chicken.json"), "--profile", &s.arg("half.json")]).as_bytes(),
    )
    .unwrap();
    assert_eq!(t.column("p1_a0").unwrap(), [-0.25, 0.75]);
    assert_eq!(t.column("p1_a1").unwrap(), [0.75, -0.25]);
}

#[test]
fn bounds_need_no_game() {
    let t = Table::read_csv(ok(&["metrics", "--metric", "bounds", "--s", "1,1", "--T", "4"]).as_bytes()).unwrap();
    // Equal payoff sums and no base distortion leave (T + 1) / (2T).
    assert_eq!(t.column("wfp_eps").unwrap(), [5.0 / 8.0, 5.0 / 8.0]);
}

#[test]
fn election_verdicts_as_json() {
    let v: Value = serde_json::from_str(&ok(&[
        "election", "verify", "--csv", &data("table1.csv"), "--rule", "maximal_lottery", "--format", "json",
    ]))
    .unwrap();
    let players = v[0]["players"].as_array().unwrap();
    let failing: Vec<&str> = players
        .iter()
        .filter(|p| p["in_best_response"] == Value::Bool(false))
        .map(|p| p["participant"].as_str().unwrap())
        .collect();
    assert_eq!(failing, ["Koala"]);
    assert_eq!(v[0]["all_pass"], Value::Bool(false));
    let v: Value =
        serde_json::from_str(&ok(&["election", "verify", "--csv", &data("table2.csv"), "--format", "json"])).unwrap();
    assert_eq!(v[0]["all_pass"], Value::Bool(true));
}

#[test]
fn analyze_reports_a_sink() {
    let s = Scratch::new();
    let edges = ok(&["analyze", "--game", &s.arg("chicken.json"), "--report", &s.arg("report.json")]);
    let t = Table::read_csv(edges.as_bytes()).unwrap();
    assert!(!t.rows.is_empty());
    let report: Value = serde_json::from_slice(&std::fs::read(s.path("report.json")).unwrap()).unwrap();
    assert_eq!(report["num_nodes"], 4);
    // Chicken's two pure equilibria are the sinks.
    assert_eq!(report["num_sinks"], 2);
    assert!(report["harmonic"]["is_harmonic"].is_boolean());
}

#[test]
fn ingest_then_solve() {
    let s = Scratch::new();
    s.write("perf.csv", "agent,t1,t2\na,1,0\nb,0,1\n");
    ok(&["ingest", "--csv", &s.arg("perf.csv"), "--grades", "4", "--out", &s.arg("perf.json")]);
    let game: Value = serde_json::from_slice(&std::fs::read(s.path("perf.json")).unwrap()).unwrap();
    assert_eq!(game["agents"], serde_json::json!(["a", "b"]));
    let t = Table::read_csv(
        ok(&["solve", "--game", &s.arg("perf.json"), "--rule", "sgf:4,borda", "--iters", "200", "--samples", "30"]).as_bytes(),
    )
    .unwrap();
    let last = t.rows.len() - 1;
    for col in ["p0_a0", "p1_a0"] {
        let v = t.column(col).unwrap()[last];
        assert!((v - 0.5).abs() < 0.1, "{col} = {v}");
    }
    s.write("ragged.csv", "1,0\n0\n");
    assert_eq!(cog(&["ingest", "--csv", &s.arg("ragged.csv")]).status.code(), Some(1));
}

#[test]
fn rbr_sweep_ends_near_mu() {
    let s = Scratch::new();
    s.write("others.json", "[[0.5, 0.5], [0.8, 0.2]]");
    let t = Table::read_csv(
        ok(&[
            "rbr-sweep", "--game", &s.arg("chicken.json"), "--profile", &s.arg("others.json"), "--p-values", "0,1",
            "--q", "0", "--samples", "2500", "--mu", "0.2,0.8",
        ])
        .as_bytes(),
    )
    .unwrap();
    let a0 = t.column("a0").unwrap();
    // Against a mostly swerving co-player, going straight wins outright.
    assert_eq!(a0[0], 0.0);
    assert!((a0[1] - 0.2).abs() <= 3.0 / 50.0, "{a0:?}");
}
