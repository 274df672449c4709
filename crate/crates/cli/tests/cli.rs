use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qca(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qca")).args(args).output().expect("qca runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn empty_circuit_gives_empty_program() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("empty.txt");
    fs::write(&c, "# nothing here\n").unwrap();
    let o = qca(&["compile", p(&c), "--d", "2", "--N", "6", "--out", p(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("# qca compile circuit="));
    assert!(stdout(&o).contains("total cost 0"));
    let prog = fs::read_to_string(dir.path().join("program.txt")).unwrap();
    assert!(prog.contains("# cost 0"));
    let v = qca(&["verify", p(&dir.path().join("program.txt")), "--trials", "3"]);
    assert!(v.status.success(), "{}", stderr(&v));
    assert!(stdout(&v).contains("min fidelity 1.000000000000000"));
}

#[test]
fn compile_then_verify_rotation() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.txt");
    fs::write(&c, "ROT l=2 a=1 b=1 part=A angle=0.7\nENT l=1 u=1 angle=1/8*pi\n").unwrap();
    let o = qca(&["compile", p(&c), "--d", "2", "--N", "6", "--out", p(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = stdout(&o);
    assert!(report.contains("gate 0 cost"));
    assert!(report.contains("op-count l=2"));
    let prog = dir.path().join("program.txt");
    let args = ["verify", p(&prog), "--d", "2", "--N", "6", "--trials", "5", "--seed", "3", "--tol", "1e-8"];
    let a = qca(&args);
    assert_eq!(a.status.code(), Some(0), "{}", stderr(&a));
    assert!(stdout(&a).contains("PASS"));
    // Same seed, byte-identical report.
    let b = qca(&args);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn op_count_cross_check_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.txt");
    fs::write(&c, "ROT l=1 a=1 b=1 part=S angle=0.3\n").unwrap();
    let o = qca(&["compile", p(&c), "--d", "5", "--N", "8"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("formula 4(N+2)+[N/2]-2m = 42"), "{s}");
    // Without --out the program follows the report.
    assert!(s.contains("# qca program d=5 N=8"));
}

#[test]
fn malformed_line_cites_line_number() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("bad.txt");
    fs::write(&c, "ROT l=1 a=1 b=0 part=S angle=0.1\nFOO l=1\n").unwrap();
    let o = qca(&["compile", p(&c), "--d", "2", "--N", "6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 2"), "{}", stderr(&o));
}

#[test]
fn tampered_program_fails_verification() {
    let dir = tempfile::tempdir().unwrap();
    let c = dir.path().join("c.txt");
    fs::write(&c, "ROT l=1 a=1 b=0 part=S angle=0.9\n").unwrap();
    let o = qca(&["compile", p(&c), "--d", "2", "--N", "4", "--out", p(dir.path())]);
    assert!(o.status.success());
    let prog = dir.path().join("program.txt");
    let text = fs::read_to_string(&prog).unwrap();
    // Drop the final primitive and the cost footer.
    let mut lines: Vec<&str> = text.lines().filter(|l| !l.starts_with("# cost")).collect();
    lines.pop();
    fs::write(&prog, lines.join("\n")).unwrap();
    let v = qca(&["verify", p(&prog), "--trials", "4"]);
    assert_eq!(v.status.code(), Some(1), "{}", stdout(&v));
    assert!(stdout(&v).contains("FAIL"));
}

#[test]
fn memory_cap_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let prog = dir.path().join("big.txt");
    fs::write(&prog, "# qca program d=9 N=12\nT\n").unwrap();
    let v = qca(&["verify", p(&prog), "--trials", "1"]);
    assert_eq!(v.status.code(), Some(3), "{}", stderr(&v));
    assert!(stderr(&v).contains("memory cap"));
}

#[test]
fn solve_reproduces_even_chain_schedule() {
    let dir = tempfile::tempdir().unwrap();
    let o = qca(&["solve", "--N", "8", "--d", "5", "--u", "1", "--v", "1", "--l", "3", "--out", p(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let sched = fs::read_to_string(dir.path().join("schedule.txt")).unwrap();
    // u S_3 - (u+v) S_4 with u = v = 1 over Z_5.
    assert_eq!(sched, "ring=Zd:5\ns=3 eps=1\ns=4 eps=3\n");
    assert!(stdout(&o).contains("kappa 1"));
}

#[test]
fn solve_reports_unreachable_peak() {
    let o = qca(&["solve", "--N", "5", "--d", "2", "--u", "1", "--v", "1", "--l", "3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("witness"));
}

#[test]
fn cv_sweep_lists_every_metric() {
    let dir = tempfile::tempdir().unwrap();
    let o = qca(&["cv", "--alpha", "1", "--n-max", "10,100,1000", "--out", p(dir.path())]);
    assert!(o.status.success(), "{}", stderr(&o));
    let s = stdout(&o);
    assert!(s.contains("# n_max sup l2 window"));
    let rows: Vec<Vec<f64>> = s
        .lines()
        .filter(|l| !l.starts_with('#') && l.split_whitespace().count() == 4)
        .map(|l| l.split_whitespace().map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[2][3] < 0.018);
    assert!(dir.path().join("cv_coefficients.txt").exists());
    // The sup reading of the error does not reach 0.018.
    let strict = qca(&["cv", "--n-max", "1000", "--tol", "0.018"]);
    assert_eq!(strict.status.code(), Some(1));
}

#[test]
fn readout_of_basis_state_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let s = dir.path().join("state.txt");
    // |0,2,1> for d = 3: index 0*9 + 2*3 + 1 = 7.
    fs::write(&s, "# d=3 N=3 layout=single\n7 1 0\n").unwrap();
    let o = qca(&["readout", p(&s), "--l", "2", "--shots", "50", "--seed", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("2 1.000000000000 50 1.000000"), "{out}");
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(qca(&["compile"]).status.code(), Some(2));
    assert_eq!(qca(&["solve", "--N", "8", "--d", "5", "--u", "0", "--v", "0", "--l", "1"]).status.code(), Some(2));
    assert_eq!(qca(&["verify", "/nonexistent/program.txt"]).status.code(), Some(2));
}
