use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rnatreedit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Writes a dot-bracket record with a sequence that satisfies every pair.
fn structure(dir: &Path, name: &str, db: &str) -> PathBuf {
    let mut seq = vec![b'A'; db.len()];
    let mut open = Vec::new();
    for (i, c) in db.bytes().enumerate() {
        match c {
            b'(' => open.push(i),
            b')' => {
                let j = open.pop().unwrap();
                seq[j] = b'G';
                seq[i] = b'C';
            }
            _ => {}
        }
    }
    let path = dir.join(format!("{name}.db"));
    fs::write(&path, format!(">{name}\n{}\n{db}\n", String::from_utf8(seq).unwrap())).unwrap();
    path
}

fn helix(outer: usize, inner: usize) -> String {
    format!(
        "{}..{}...{}..{}",
        "(".repeat(outer),
        "(".repeat(inner),
        ")".repeat(inner),
        ")".repeat(outer)
    )
}

fn distance(o: &Output) -> f64 {
    let line = stdout(o)
        .lines()
        .find(|l| l.starts_with("distance"))
        .unwrap()
        .to_string();
    line.split_whitespace().nth(1).unwrap().parse().unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn identical_inputs_are_at_distance_zero() {
    let dir = TempDir::new().unwrap();
    let a = structure(dir.path(), "a", "((((...))((...)).((...))))");
    let o = run(&["compare", p(&a), p(&a)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(distance(&o), 0.0);
}

#[test]
fn negative_t_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let a = structure(dir.path(), "a", "(((...)))");
    let o = run(&["compare", p(&a), p(&a), "--t=-0.5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("t must be ≥ 0"), "{}", stderr(&o));
}

#[test]
fn fusion_bound_above_three_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let a = structure(dir.path(), "a", "(((...)))");
    assert_eq!(run(&["compare", p(&a), p(&a), "--l", "4"]).status.code(), Some(3));
}

#[test]
fn malformed_input_is_a_parse_error() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.db");
    fs::write(&bad, ">x\nGGGAAACC\n(((...))\n").unwrap();
    let o = run(&["parse", p(&bad)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bad.db"));
    let pk = dir.path().join("pk.ct");
    fs::write(&pk, "4 pk\n1 G 0 2 3 1\n2 G 1 3 4 2\n3 C 2 4 1 3\n4 C 3 5 2 4\n").unwrap();
    assert_eq!(run(&["parse", p(&pk)]).status.code(), Some(2));
}

#[test]
fn missing_file_is_a_parse_error() {
    assert_eq!(run(&["parse", "/nonexistent/x.db"]).status.code(), Some(2));
}

#[test]
fn verify_defaults_pass() {
    let o = run(&["verify", "--samples", "40"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let o = run(&["verify", "--model", "unit", "--l", "2", "--samples", "20"]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
}

#[test]
fn verify_rejects_trees_beyond_the_oracle_limit() {
    assert_eq!(run(&["verify", "--max-nodes", "9"]).status.code(), Some(3));
}

#[test]
fn verify_reports_an_injected_asymmetry() {
    let o = run(&["verify", "--inject", "asymmetric-insert", "--samples", "20"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("FAILED"));
    assert!(out.contains("T1 = "), "{out}");
}

#[test]
fn json_reports_are_deterministic_and_check_out() {
    let dir = TempDir::new().unwrap();
    let a = structure(dir.path(), "a", &helix(7, 5));
    let b = structure(dir.path(), "b", "((((...))((...)).((...))))");
    let r1 = dir.path().join("r1.json");
    let r2 = dir.path().join("r2.json");
    for r in [&r1, &r2] {
        let o = run(&["compare", p(&a), p(&b), "--format", "json", "--l", "2", "--out", p(r)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(fs::read(&r1).unwrap(), fs::read(&r2).unwrap());
    let o = run(&["check", p(&r1)]);
    assert!(o.status.success(), "{}", stderr(&o));

    let text = fs::read_to_string(&r1).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["distance_units"] = serde_json::json!(v["distance_units"].as_i64().unwrap() + 1);
    let tampered = dir.path().join("tampered.json");
    fs::write(&tampered, serde_json::to_string(&v).unwrap()).unwrap();
    assert_eq!(run(&["check", p(&tampered)]).status.code(), Some(1));
    fs::write(&tampered, "{").unwrap();
    assert_eq!(run(&["check", p(&tampered)]).status.code(), Some(2));
}

#[test]
fn fusion_shortens_a_split_helix() {
    let dir = TempDir::new().unwrap();
    let a = structure(dir.path(), "a", &format!("{}...{}", "(".repeat(13), ")".repeat(13)));
    let b = structure(dir.path(), "b", &helix(7, 5));
    let plain = run(&["compare", p(&a), p(&b), "--l", "0"]);
    let fused = run(&["compare", p(&a), p(&b), "--l", "1"]);
    assert!(plain.status.success() && fused.status.success());
    assert!(
        distance(&fused) < distance(&plain),
        "{} vs {}",
        stdout(&fused),
        stdout(&plain)
    );
    assert!(stdout(&fused).contains("edge_split"), "{}", stdout(&fused));
}

#[test]
fn stats_counts_nodes_per_representation() {
    let dir = TempDir::new().unwrap();
    let a = structure(dir.path(), "a", "(((...)))");
    let o = run(&["stats", p(&a), "--format", "json"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let nodes: Vec<u64> = v["reps"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["nodes"].as_u64().unwrap())
        .collect();
    assert_eq!(nodes, [7, 3, 2, 2]);
}

#[test]
fn batch_mode_keeps_input_order() {
    let dir = TempDir::new().unwrap();
    let a = structure(dir.path(), "a", "(((...)))");
    let b = structure(dir.path(), "b", &helix(3, 2));
    let list = dir.path().join("pairs.txt");
    fs::write(&list, format!("{0} {1}\n# comment\n{1} {0}\n{0} {0}\n", p(&a), p(&b))).unwrap();
    let o = run(&["compare", "--pairs", p(&list), "--jobs", "3"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows: Vec<Vec<String>> = stdout(&o)
        .lines()
        .map(|l| l.split('\t').map(str::to_string).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[0][2], rows[1][2]);
    assert_eq!(rows[2][2], "0");
    assert!(rows[0][0].ends_with("a.db") && rows[1][0].ends_with("b.db"));
}

#[test]
fn multilevel_and_dot_outputs_render() {
    let dir = TempDir::new().unwrap();
    let a = structure(dir.path(), "a", "((((...))((...)).((...))))");
    let b = structure(dir.path(), "b", "(((...)))..((((...))))");
    let o = run(&["multilevel", p(&a), p(&b)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("coarse"));
    let o = run(&["multilevel", p(&a), p(&b), "--format", "dot"]);
    assert!(stdout(&o).starts_with("digraph"));
    let o = run(&["compare", p(&a), p(&b), "--format", "dot"]);
    assert!(stdout(&o).contains("->") || stdout(&o).contains("--"));
}

#[test]
fn model_files_and_validation() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("model.cfg");
    fs::write(
        &cfg,
        "# structural model\nmodel = structural\nt = 0.2\nsize_view = max\n",
    )
    .unwrap();
    let o = run(&["validate", "--model", p(&cfg)]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("t=0.2"));
    fs::write(&cfg, "model = elastic\n").unwrap();
    assert_eq!(run(&["validate", "--model", p(&cfg)]).status.code(), Some(3));
}
