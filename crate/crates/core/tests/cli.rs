use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(f: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(f)
}

fn colexvec(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_colexvec"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn wordlist() -> String {
    data("toy_wordlist.tsv").display().to_string()
}

#[test]
fn help_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let o = colexvec(dir.path(), &["--help"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("colexify"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&colexvec(dir.path(), &[])), 1);
    assert_eq!(code(&colexvec(dir.path(), &["frobnicate"])), 1);
    assert_eq!(code(&colexvec(dir.path(), &["colexify", "--wordlist", &wordlist()])), 1);
    let bad_type = colexvec(dir.path(), &["colexify", "--wordlist", &wordlist(), "--type", "partial", "--out", "g.tsv"]);
    assert_eq!(code(&bad_type), 1);
}

#[test]
fn missing_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = colexvec(dir.path(), &["colexify", "--wordlist", "nope.tsv", "--type", "full", "--out", "g.tsv"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("nope.tsv"));
}

#[test]
fn invalid_input_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("w.tsv"), "LANGUAGE\tFAMILY\tCONCEPT\tFORM\nx\tF\tA\t\n").unwrap();
    let o = colexvec(dir.path(), &["colexify", "--wordlist", "w.tsv", "--type", "full", "--out", "g.tsv"]);
    assert_eq!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    // ProNE rejects a non-positive dimension through its own validation
    colexvec(dir.path(), &["colexify", "--wordlist", &wordlist(), "--type", "full", "--out", "full.tsv"]);
    let o = colexvec(dir.path(), &["embed", "--graph", "full.tsv", "--method", "prone", "--dim", "0", "--seed", "1", "--out", "e.txt"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn colexify_writes_graph_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let o = colexvec(dir.path(), &["colexify", "--wordlist", &wordlist(), "--type", "affix", "--out", "affix.tsv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let graph = std::fs::read_to_string(dir.path().join("affix.tsv")).unwrap();
    assert!(graph.contains("BARK\tTREE"), "{graph}");
    let meta: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("affix.tsv.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["directed"], true);
}

#[test]
fn baseline_scores_pairs_and_marks_uncovered() {
    let dir = tempfile::tempdir().unwrap();
    colexvec(dir.path(), &["colexify", "--wordlist", &wordlist(), "--type", "full", "--out", "full.tsv"]);
    std::fs::write(dir.path().join("pairs.tsv"), "CONCEPT_A\tCONCEPT_B\nARM\tHAND\nARM\tMOON\n").unwrap();
    let o = colexvec(dir.path(), &["baseline", "--graph", "full.tsv", "--method", "ppmi", "--pairs", "pairs.tsv", "--out", "s.tsv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = std::fs::read_to_string(dir.path().join("s.tsv")).unwrap();
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "CONCEPT_A\tCONCEPT_B\tSCORE");
    assert!(lines[2].ends_with("NA"), "{out}");
}

#[test]
fn eval_reports_record_inputs() {
    let dir = tempfile::tempdir().unwrap();
    colexvec(dir.path(), &["colexify", "--wordlist", &wordlist(), "--type", "full", "--out", "full.tsv"]);
    let o = colexvec(
        dir.path(),
        &["eval-lsim", "--sim", "shortest-path:full.tsv", "--pairs", &data("toy_rated.tsv").display().to_string(), "--report", "r.json"],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["command"], "eval-lsim");
    assert_eq!(r["inputs"].as_object().unwrap().len(), 2);
    assert!(r["inputs"].as_object().unwrap().values().all(|d| d.as_str().unwrap().len() == 64));
}

#[test]
fn pipeline_prints_one_line_per_task() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let o = colexvec(
        dir.path(),
        &["pipeline", "--config", &data("toy_run.json").display().to_string(), "--report", &report.display().to_string()],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    let tasks: Vec<&str> = stdout.lines().filter_map(|l| l.split_whitespace().next()).collect();
    assert_eq!(tasks, ["lsim", "shift", "links"]);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(r["column"], "prone full/affix");
    assert_eq!(r["table"]["shift"]["runs"], 50);
}

#[test]
fn thread_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    colexvec(dir.path(), &["colexify", "--wordlist", &wordlist(), "--type", "affix", "--undirected", "--out", "affix.tsv"]);
    let mut outputs = Vec::new();
    for threads in ["1", "3"] {
        let o = Command::new(env!("CARGO_BIN_EXE_colexvec"))
            .args(["embed", "--graph", "affix.tsv", "--method", "node2vec", "--dim", "6", "--epochs", "10", "--seed", "2", "--out"])
            .arg(format!("n2v-{threads}.txt"))
            .env("COLEXVEC_THREADS", threads)
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(std::fs::read(dir.path().join(format!("n2v-{threads}.txt"))).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}
