use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use wfoeil::parse::parse_system_spec;
use wfoeil::wfa::parse_wfa;
use wfoeil::{parse_formula_file, parse_words, wfoeil_eval, Assignment, InstanceMap};

fn wfoeil(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wfoeil")).args(args).current_dir(dir).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn golden(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name);
    fs::read_to_string(path).unwrap()
}

/// A directory holding the catalog files of `id`.
fn example(id: &str) -> TempDir {
    let dir = TempDir::new().unwrap();
    let o = wfoeil(&["example", id], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    dir
}

/// Master/Slave with k_m = 2 and k_s = 3 as `ms23.wcb`.
fn master_slave_23() -> TempDir {
    let dir = example("master_slave");
    let text = fs::read_to_string(dir.path().join("master_slave.wcb")).unwrap();
    let text = text.replace("p_m = 1", "p_m = 2").replace("p_s = 1", "p_s = 3");
    fs::write(dir.path().join("ms23.wcb"), text).unwrap();
    dir
}

#[test]
fn check_accepts_catalog_entry() {
    let dir = example("master_slave");
    let o = wfoeil(&["check", "master_slave.wcb", "master_slave.wfl"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "ok: 2 component types, r=(2,2)\n");
}

#[test]
fn check_reports_proviso_violation() {
    let dir = example("master_slave");
    fs::write(dir.path().join("bad.wfl"), "wfl 1\nSumC x:master . !(true * p_m(x) * true)\n").unwrap();
    let o = wfoeil(&["check", "master_slave.wcb", "bad.wfl"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("negation"), "{}", stderr(&o));
}

#[test]
fn check_needs_instances() {
    let dir = example("master_slave");
    let text = fs::read_to_string(dir.path().join("master_slave.wcb")).unwrap();
    let text: String = text.lines().filter(|l| !l.starts_with("instances")).map(|l| format!("{l}\n")).collect();
    fs::write(dir.path().join("noinst.wcb"), text).unwrap();
    let o = wfoeil(&["check", "noinst.wcb", "master_slave.wfl"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("instances"));
    let o = wfoeil(&["check", "noinst.wcb", "master_slave.wfl", "--instances", "2,2"], dir.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn check_relaxed_mode() {
    let dir = example("request_response");
    let strict = wfoeil(&["check", "request_response.wcb", "request_response.wfl"], dir.path());
    assert_eq!(strict.status.code(), Some(1));
    let relaxed = wfoeil(&["check", "request_response.wcb", "request_response.wfl", "--relaxed"], dir.path());
    assert_eq!(relaxed.status.code(), Some(0));
}

#[test]
fn eval_master_slave_fixture() {
    let dir = master_slave_23();
    let o = wfoeil(&["eval", "ms23.wcb", "master_slave.wfl", "--words", "master_slave.words"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "36\n36\n36\n36\n");
}

#[test]
fn eval_machine_output_is_golden() {
    let dir = master_slave_23();
    let o = wfoeil(&["--format", "machine", "eval", "ms23.wcb", "master_slave.wfl", "--words", "master_slave.words"], dir.path());
    assert_eq!(stdout(&o), golden("eval_master_slave.json"));
}

#[test]
fn eval_unknown_port() {
    let dir = example("master_slave");
    let o = wfoeil(&["eval", "master_slave.wcb", "master_slave.wfl", "--word", "{p_x(1)}"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("alphabet error"));
}

#[test]
fn eval_true_on_empty_word() {
    let dir = example("master_slave");
    fs::write(dir.path().join("true.wfl"), "wfl 1\ntrue\n").unwrap();
    let o = wfoeil(&["eval", "master_slave.wcb", "true.wfl", "--word", "eps"], dir.path());
    assert_eq!(stdout(&o), "1\n");
}

#[test]
fn eval_rejects_free_variables() {
    let dir = example("master_slave");
    fs::write(dir.path().join("free.wfl"), "wfl 1\nhashw(p_m(x))\n").unwrap();
    let o = wfoeil(&["eval", "master_slave.wcb", "free.wfl", "--word", "eps"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("x"), "{}", stderr(&o));
}

#[test]
fn compile_star_matches_eval() {
    let dir = example("star");
    let o = wfoeil(&["compile", "star.wcb", "star.wfl", "--instances", "3", "-o", "star.wfa"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stderr(&o).starts_with("stats states="));
    let spec = parse_system_spec(&fs::read_to_string(dir.path().join("star.wcb")).unwrap()).unwrap();
    let view = spec.system.instantiate(&InstanceMap(vec![3])).unwrap();
    let sentence = parse_formula_file(&fs::read_to_string(dir.path().join("star.wfl")).unwrap(), &view.system).unwrap();
    let (wfa, alphabet) = parse_wfa(&fs::read_to_string(dir.path().join("star.wfa")).unwrap(), &view).unwrap();
    let words = parse_words(
        "eps\n{p(1), p(2)}\n{p(1), p(2)} {p(1), p(3)}\n{p(1), p(3)} {p(1), p(2)}\n{p(2), p(1)} {p(2), p(3)}\n\
         {p(3), p(1)} {p(3), p(2)}\n{p(3), p(2)} {p(3), p(1)}\n{p(1), p(2)} {p(1), p(2)}\n{p(1), p(2), p(3)}\n\
         {p(1)} {p(2)}\n{p(1), p(2)} {p(2), p(3)}\n{p(2), p(3)} {p(2), p(1)}\n{p(1), p(3)} {p(3), p(2)}\n\
         {p(1), p(2)} {p(1), p(3)} {p(1), p(2)}\n{p(2), p(1)}\n{p(3)}\n{p(1), p(3)}\n{p(2), p(3)} {p(1), p(3)}\n\
         {p(2), p(1)} {p(3), p(1)}\n{p(3), p(2)} {p(1), p(2)}",
        &view,
    )
    .unwrap();
    assert_eq!(words.len(), 20);
    let mut nonzero = 0;
    for w in &words {
        let direct = wfoeil_eval(&view, &Assignment::new(), w, &sentence).unwrap();
        let automaton = wfa.behavior(&alphabet.encode(w).unwrap()).unwrap();
        assert_eq!(direct, automaton, "{}", view.render_word(w));
        nonzero += usize::from(direct != view.semiring().zero());
    }
    assert!(nonzero >= 4);
}

#[test]
fn compile_budget_exceeded() {
    let dir = example("blackboard");
    let o = wfoeil(&["compile", "blackboard.wcb", "blackboard.wfl", "--budget", "10"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("in subformula"), "{}", stderr(&o));
}

#[test]
fn compile_is_deterministic() {
    let dir = example("blackboard");
    let run = |jobs: &str| {
        let o = wfoeil(&["compile", "blackboard.wcb", "blackboard.wfl", "--jobs", jobs], dir.path());
        assert!(o.status.success());
        o.stdout
    };
    let first = run("1");
    assert_eq!(first, run("1"));
    assert_eq!(first, run("4"));
}

#[test]
fn equiv_same_sentence() {
    let dir = example("star");
    let o = wfoeil(&["equiv", "star.wcb", "star.wfl", "star.wfl", "--instances", "3"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("equivalent\n"));
}

#[test]
fn equiv_weight_perturbation_machine_output_is_golden() {
    let dir = master_slave_23();
    let args = [
        "--format",
        "machine",
        "equiv",
        "ms23.wcb",
        "master_slave.wfl",
        "master_slave.wfl",
        "--right-system",
        "master_slave.wcb",
        "--semiring",
        "rational",
    ];
    let o = wfoeil(&args, dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), golden("equiv_master_slave.json"));
}

#[test]
fn equiv_tropical_needs_bound() {
    let dir = example("master_slave");
    let base = ["equiv", "master_slave.wcb", "master_slave.wfl", "master_slave.wfl", "--semiring", "min-plus"];
    let o = wfoeil(&base, dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("capability error"));
    let mut bounded = base.to_vec();
    bounded.extend(["--bounded", "3"]);
    let o = wfoeil(&bounded, dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "equivalent\nbound: 3\n");
}

#[test]
fn example_rejects_unknown_id() {
    let dir = TempDir::new().unwrap();
    let o = wfoeil(&["example", "ring"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("master_slave"));
}

#[test]
fn laws_pass() {
    let dir = TempDir::new().unwrap();
    let o = wfoeil(&["laws", "--samples", "200"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 7);
}

#[test]
fn usage_error_exit_code() {
    let dir = TempDir::new().unwrap();
    assert_eq!(wfoeil(&["bogus"], dir.path()).status.code(), Some(1));
}
