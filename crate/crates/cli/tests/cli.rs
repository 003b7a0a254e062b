use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn dynq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynq")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn rpq_script() {
    let (g, d, s) = (data("chain.graph"), data("a-star.dfa"), data("rpq.script"));
    let o = dynq(&["run", "--program", "rpq", "--graph", &g, "--dfa", &d, "--script", &s]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "2: (0,0)\n2: (0,1)\n2: (1,1)\n2: (2,2)\n2: (3,3)\n5: (0,0)\n5: (0,1)\n"
    );
}

#[test]
fn cycle_halts_with_line_number() {
    let (g, c, s) = (data("chain.graph"), data("dyck.cfg"), data("cfl.script"));
    let args = ["run", "--program", "cfl", "--graph", &g, "--grammar", &c, "--script", &s];
    let o = dynq(&args);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 5"));
    assert_eq!(stdout(&o), "3: (0,0)\n3: (0,2)\n3: (1,1)\n3: (2,2)\n3: (3,3)\n");
    assert_eq!(dynq(&args).stdout, o.stdout);
}

#[test]
fn neps_flips() {
    let (g, n, s) = (data("chain.graph"), data("grid.neps"), data("neps.script"));
    let o = dynq(&["run", "--program", "neps", "--regime", "acyclic", "--graph", &g, "--neps", &n, "--script", &s]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("6: ((0,0),(1,0))\n") && !out.contains("6: ((0,0),(0,1))"));
    assert!(out.ends_with("9: ((0,0),(0,0))\n9: ((0,0),(1,1))\n"));
}

#[test]
fn ecrpq_with_relation_file() {
    let (g, q, s) = (data("chain.graph"), data("eqlen.ecrpq"), data("ecrpq.script"));
    let o = dynq(&["run", "--program", "ecrpq", "--graph", &g, "--ecrpq", &q, "--script", &s]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "3: (0,1,0,1)\n3: (0,1,2,3)\n5: (empty)\n");
}

#[test]
fn missing_spec_is_usage_error() {
    let (g, s) = (data("chain.graph"), data("rpq.script"));
    let o = dynq(&["run", "--program", "rpq", "--graph", &g, "--script", &s]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--dfa"));
}

#[test]
fn check_reports_ok() {
    let o = dynq(&["check", "--trials", "5", "--seed", "42", "--suite", "tc", "--suite", "gf2"]);
    assert!(o.status.success());
    assert!(stdout(&o).ends_with("OK 5/5\n"));
    assert_eq!(dynq(&["check", "--suite", "nope"]).status.code(), Some(2));
}

#[test]
fn bench_writes_csv() {
    let o = dynq(&["bench", "--program", "rpq", "--trials", "1", "--max-nodes", "4"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("program,trial,step,nodes,op,incremental_us,recompute_us"));
    assert!(lines.all(|l| l.starts_with("rpq,0,")));
}
