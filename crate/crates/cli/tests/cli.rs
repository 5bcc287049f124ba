use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use relaysim_cli::ScenarioFile;

fn relaysim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relaysim")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scenarios() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    files.sort();
    files
}

fn scenario(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name).display().to_string()
}

fn kv(text: &str, key: &str) -> String {
    text.lines()
        .map(str::trim)
        .find_map(|l| l.strip_prefix(key).filter(|rest| rest.starts_with(' ')).map(|rest| rest.trim().to_string()))
        .unwrap_or_else(|| panic!("no `{key}` in\n{text}"))
}

fn write_scenario(dir: &Path, text: &str) -> String {
    let path = dir.join("s.toml");
    fs::write(&path, text).unwrap();
    path.display().to_string()
}

#[test]
fn bundled_scenarios_parse_and_round_trip() {
    let files = scenarios();
    assert_eq!(files.len(), 6);
    for path in files {
        let parsed = ScenarioFile::load(&path).unwrap();
        let reparsed = ScenarioFile::parse(&parsed.to_toml(), "reserialized").unwrap();
        assert_eq!(parsed, reparsed, "{}", path.display());
        assert_eq!(parsed.resolve().unwrap(), reparsed.resolve().unwrap(), "{}", path.display());
    }
}

#[test]
fn causality_worked_example() {
    let o = relaysim(&["causality", "1.10", "4.0e8", "0.98c"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert_eq!(kv(&s, "gamma"), "5.025189");
    assert_eq!(kv(&s, "dt_prime_s"), "-1.043085");
    assert_eq!(kv(&s, "dx_prime_m"), "3.860538e8");
    assert_eq!(kv(&s, "v_info_m_per_s"), "3.636364e8");
    assert_eq!(kv(&s, "class"), "spacelike");

    let s = stdout(&relaysim(&["causality", "1", "0", "0"]));
    assert_eq!(kv(&s, "dt_prime_s"), "1");
    assert_eq!(kv(&s, "dx_prime_m"), "0");
    assert_eq!(kv(&s, "class"), "timelike");

    let s = stdout(&relaysim(&["causality", "1", "3.64e8", "0"]));
    assert_eq!(kv(&s, "v_info_m_per_s"), "3.640000e8");
    assert_eq!(kv(&s, "class"), "spacelike");

    let o = relaysim(&["causality", "-1", "-3e8", "-0.5c"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn causality_rejects_light_speed() {
    let o = relaysim(&["causality", "1", "1", "1c"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    assert_eq!(relaysim(&["causality", "1", "1"]).status.code(), Some(2));
}

#[test]
fn difficulty_outputs_and_exit_codes() {
    let o = relaysim(&["difficulty", "1903a30c"]);
    assert!(o.status.success());
    let s = stdout(&o);
    assert_eq!(kv(&s, "target"), "22829202948393929850749706076701368331072452018388575715328");
    assert_eq!(kv(&s, "target_hex"), format!("0x3a30c{}", "0".repeat(44)));
    assert_eq!(kv(&s, "target_approx"), "2.283e58");
    assert_eq!(kv(&stdout(&relaysim(&["difficulty", "03000042"])), "target"), "66");
    assert_eq!(relaysim(&["difficulty", "ff000001"]).status.code(), Some(4));
    assert_eq!(relaysim(&["difficulty", "xyz"]).status.code(), Some(2));
    assert_eq!(relaysim(&["difficulty", "1903a30c0"]).status.code(), Some(2));
}

#[test]
fn machine_formats() {
    let o = relaysim(&["--format", "csv", "difficulty", "03000042"]);
    assert!(stdout(&o).starts_with("key,value\nbits,0x03000042\n"));
    let o = relaysim(&["difficulty", "03000042", "--format", "json-lines"]);
    let lines: Vec<serde_json::Value> =
        stdout(&o).lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines.len(), 6);
    assert_eq!(lines[3]["value"], "66");
}

#[test]
fn plan_examples() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().display().to_string();

    let file = write_scenario(out.path(), "[topology]\nkind = \"satellite\"\nr1 = \"10 s\"\n");
    let s = stdout(&relaysim(&["plan", &file, "--output-dir", &dir]));
    assert_eq!(kv(&s, "rule"), "satellite");
    assert_eq!(kv(&s, "b_min_s"), "5");
    assert_eq!(kv(&s, "diameter_b_min_s"), "5");

    let file = write_scenario(
        out.path(),
        "[topology]\nkind = \"concentric\"\nradii = [\"4 ls\", \"6 ls\"]\nperiods = [\"300 s\", \"600 s\"]\n",
    );
    let s = stdout(&relaysim(&["plan", &file, "--output-dir", &dir]));
    assert_eq!(kv(&s, "b_min_s"), "5");
    let diameter: f64 = kv(&s, "diameter_b_min_s").parse().unwrap();
    assert!((diameter - 5.0).abs() < 0.05, "{diameter}");

    let file = write_scenario(out.path(), "[topology]\nkind = \"lattice\"\ndims = [4, 4, 4]\nalpha = \"100 s\"\n");
    let s = stdout(&relaysim(&["plan", &file, "--output-dir", &dir]));
    assert_eq!(kv(&s, "b_min_s"), "450");
    assert_eq!(kv(&s, "corner_arrival_s"), "900");
    assert_eq!(kv(&s, "alpha_lwh_s"), "6400");

    let doc: toml::Value = toml::from_str(&fs::read_to_string(out.path().join("plan.toml")).unwrap()).unwrap();
    assert_eq!(doc["b_min"].as_float(), Some(450.0));
    assert_eq!(doc["verdict"].as_str(), Some("single-currency"));
}

#[test]
fn plan_errors() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().display().to_string();
    let file = write_scenario(out.path(), "[topology]\nkind = \"lattice\"\ndims = [4, 4, 4]\nalfa = \"100 s\"\n");
    let o = relaysim(&["plan", &file, "--output-dir", &dir]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 4") || err.contains("alfa"), "{err}");

    let file = write_scenario(out.path(), "[topology]\nkind = \"explicit-graph\"\n[[nodes]]\nid = \"a\"\n[[nodes]]\nid = \"b\"\n");
    assert_eq!(relaysim(&["plan", &file, "--output-dir", &dir]).status.code(), Some(3));

    let file = write_scenario(
        out.path(),
        "[topology]\nkind = \"explicit-graph\"\nedges = [{ a = \"a\", b = \"a\", delay = \"1 s\" }]\n[[nodes]]\nid = \"a\"\n",
    );
    assert_eq!(relaysim(&["plan", &file, "--output-dir", &dir]).status.code(), Some(3));

    let missing = out.path().join("nope.toml").display().to_string();
    assert_eq!(relaysim(&["plan", &missing, "--output-dir", &dir]).status.code(), Some(1));
}

#[test]
fn single_node_has_no_orphans() {
    let out = tempfile::tempdir().unwrap();
    let file = write_scenario(
        out.path(),
        "[topology]\nkind = \"explicit-graph\"\n[[nodes]]\nid = \"solo\"\n[simulation]\nblocktime = \"1 min\"\nduration = \"1 d\"\n",
    );
    let dir = out.path().join("run").display().to_string();
    let o = relaysim(&["simulate", &file, "--output-dir", &dir]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(kv(&stdout(&o), "orphan_rate"), "0");
    let summary: toml::Value =
        toml::from_str(&fs::read_to_string(out.path().join("run/summary.toml")).unwrap()).unwrap();
    assert_eq!(summary["orphan_rate"].as_float(), Some(0.0));
}

#[test]
fn earth_mars_reports_both_nodes_and_matching_csv_rows() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().display().to_string();
    let o = relaysim(&["simulate", &scenario("earth_mars.toml"), "--output-dir", &dir, "--duration", "5 d"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = stdout(&o);
    assert!(s.contains("  earth  ") && s.contains("  mars  "), "{s}");

    let summary: toml::Value = toml::from_str(&fs::read_to_string(out.path().join("summary.toml")).unwrap()).unwrap();
    let total = summary["total_mined"].as_integer().unwrap() as usize;
    assert_eq!(summary["node"].as_array().unwrap().len(), 2);
    assert_eq!(summary["planner"]["b_min"].as_float(), Some(225.99));

    let blocks = fs::read_to_string(out.path().join("blocks.csv")).unwrap();
    assert_eq!(blocks.lines().next(), Some("id,parent,miner,time,height,on_main_chain"));
    assert_eq!(blocks.lines().count(), total + 1);
    let main = blocks.lines().filter(|l| l.ends_with(",true")).count();
    assert_eq!(main as i64, summary["final_height"].as_integer().unwrap());

    let txs = fs::read_to_string(out.path().join("transactions.csv")).unwrap();
    assert_eq!(txs.lines().next(), Some("id,created,confirmed,latency"));
    assert_eq!(txs.lines().count(), 3);
}

#[test]
fn csv_headers_present_when_empty() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().display().to_string();
    let o = relaysim(&["simulate", &scenario("triangle.toml"), "--output-dir", &dir, "--duration", "1 s"]);
    assert!(o.status.success());
    let blocks = fs::read_to_string(out.path().join("blocks.csv")).unwrap();
    assert_eq!(blocks, "id,parent,miner,time,height,on_main_chain\n");
}

#[test]
fn same_seed_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let file = scenario("triangle.toml");
    let run = |dir: &Path| stdout(&relaysim(&["simulate", &file, "--output-dir", &dir.display().to_string()]));
    assert_eq!(run(a.path()), run(b.path()));
    for name in ["summary.toml", "blocks.csv", "transactions.csv"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let c = tempfile::tempdir().unwrap();
    let dir = c.path().display().to_string();
    relaysim(&["simulate", &file, "--output-dir", &dir, "--seed", "77"]);
    assert_ne!(fs::read(a.path().join("blocks.csv")).unwrap(), fs::read(c.path().join("blocks.csv")).unwrap());
}

#[test]
fn sweep_writes_one_directory_per_seed() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().display().to_string();
    let file = scenario("earth_mars.toml");
    let o = relaysim(&["simulate", &file, "--output-dir", &dir, "--duration", "2 d", "--seeds", "3", "--workers", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for seed in 1..=3 {
        assert!(out.path().join(format!("seed-{seed}/blocks.csv")).exists());
    }
    assert_eq!(fs::read_to_string(out.path().join("sweep.csv")).unwrap().lines().count(), 4);

    let single = tempfile::tempdir().unwrap();
    let single_dir = single.path().display().to_string();
    relaysim(&["simulate", &file, "--output-dir", &single_dir, "--duration", "2 d", "--seed", "2"]);
    assert_eq!(
        fs::read(out.path().join("seed-2/blocks.csv")).unwrap(),
        fs::read(single.path().join("blocks.csv")).unwrap()
    );
}

#[test]
fn simulate_needs_timing() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().display().to_string();
    let file = write_scenario(out.path(), "[topology]\nkind = \"satellite\"\nr1 = \"10 s\"\n");
    assert_eq!(relaysim(&["simulate", &file, "--output-dir", &dir]).status.code(), Some(2));
    let o = relaysim(&["simulate", &file, "--output-dir", &dir, "--blocktime", "60", "--duration", "1 h"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(relaysim(&["simulate", &file, "--output-dir", &dir, "--blocktime", "0", "--duration", "1 h"]).status.code(), Some(4));
}

#[test]
fn superluminal_node_velocity_is_a_domain_error() {
    let out = tempfile::tempdir().unwrap();
    let dir = out.path().display().to_string();
    let file = write_scenario(
        out.path(),
        "[topology]\nkind = \"explicit-graph\"\n[[nodes]]\nid = \"a\"\nvelocity = \"1.5c\"\n[simulation]\nblocktime = \"1 s\"\nduration = \"1 s\"\n",
    );
    assert_eq!(relaysim(&["simulate", &file, "--output-dir", &dir]).status.code(), Some(4));
}
