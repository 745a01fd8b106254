use std::path::Path;
use std::process::{Command, Output};

fn lmicert(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lmicert"))
        .current_dir(dir)
        .args(args)
        .env_remove("LMICERT_SEED")
        .env_remove("LMICERT_OUT")
        .env_remove("LMICERT_SOLVER_BIN")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn certify_then_replay() {
    let dir = tempfile::tempdir().unwrap();
    let o = lmicert(dir.path(), &["certify", "corpus:DruWo2017-2.3.2P", "--out", "d.json"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("CERTIFIED_FEASIBLE"));
    let o = lmicert(dir.path(), &["replay", "d.json", "corpus:DruWo2017-2.3.2P"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("replay ok"));
    let o = lmicert(dir.path(), &["replay", "d.json", "corpus:Gupta2013-12.3P"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn instance_files_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let inst = lmicert::sdp::corpus_entry("Helmberg2000-2.2.1P").unwrap().instance;
    std::fs::write(dir.path().join("h.sdp"), inst.serialize()).unwrap();
    let o = lmicert(dir.path(), &["certify", "h.sdp", "--rotate", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(dir.path().read_dir().unwrap().any(|f| f.unwrap().file_name().to_string_lossy().ends_with(".cert.json")));
}

#[test]
fn inconclusive_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = lmicert(dir.path(), &["certify", "corpus:PatakiCleanDim4P"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("INCONCLUSIVE"));
    // x33 = 0 forces x13 = 0, so x13 = 1 is infeasible
    std::fs::write(dir.path().join("inf.sdp"), "n 3\nm 2\nb 0 1\nA 1 3 3 1\nA 2 1 3 1/2\n").unwrap();
    let o = lmicert(dir.path(), &["certify", "inf.sdp", "--out", "inf.json"]);
    assert_eq!(o.status.code(), Some(2));
    let c = lmicert::certifier::Certificate::from_json(&std::fs::read_to_string(dir.path().join("inf.json")).unwrap()).unwrap();
    assert!(!c.is_certified());
}

#[test]
fn usage_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(lmicert(dir.path(), &["certify", "missing.sdp"]).status.code(), Some(64));
    assert_eq!(lmicert(dir.path(), &["certify", "corpus:NoSuch"]).status.code(), Some(64));
    assert_eq!(lmicert(dir.path(), &["frobnicate"]).status.code(), Some(64));
    assert_eq!(lmicert(dir.path(), &["export", "corpus:DruWo2017-2.3.2P", "--mode", "nope"]).status.code(), Some(64));
    std::fs::write(dir.path().join("bad.sdp"), "not an instance").unwrap();
    assert_eq!(lmicert(dir.path(), &["certify", "bad.sdp"]).status.code(), Some(64));
    assert_eq!(lmicert(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn chart_export_writes_every_chart() {
    let dir = tempfile::tempdir().unwrap();
    let o = lmicert(dir.path(), &["export", "corpus:DruWo2017-2.3.2P", "--mode", "charts", "--out", "c"]);
    assert_eq!(o.status.code(), Some(0));
    let mut names: Vec<String> = std::fs::read_dir(dir.path().join("c")).unwrap().map(|f| f.unwrap().file_name().to_string_lossy().into_owned()).collect();
    names.sort();
    assert_eq!(names.len(), 7);
    assert_eq!(names[0], "chart_r0.txt");
    let o = lmicert(dir.path(), &["export", "corpus:DruWo2017-2.3.2P", "--mode", "radical-script", "--out", "m"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_dir(dir.path().join("m")).unwrap().count(), 7);
}

#[test]
fn fixed_system_export_is_the_worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let o = lmicert(dir.path(), &["export", "corpus:DruWo2017-2.3.2P", "--mode", "fixed-system"]);
    assert_eq!(o.status.code(), Some(0));
    let body = std::fs::read_to_string(dir.path().join("DruWo2017-2.3.2P.fixed.txt")).unwrap();
    let mut lines = body.lines();
    assert_eq!(lines.next(), Some("x22,x23,y1,y2"));
    assert_eq!(lines.next(), Some("0"));
    let rest: String = lines.collect();
    for p in ["-x22+2*y1+1", "x22*y2+x23", "-x22*y1+2*x23*y2+y1"] {
        assert!(rest.contains(p), "{rest}");
    }
}

#[test]
fn lagrange_export_follows_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str, out: &str| {
        let o = lmicert(dir.path(), &["export", "corpus:DruWo2017-2.3.2P", "--mode", "lagrange", "--seed", seed, "--out", out]);
        assert_eq!(o.status.code(), Some(0));
        std::fs::read_to_string(dir.path().join(out).join("DruWo2017-2.3.2P.lagrange.txt")).unwrap()
    };
    let a = run("7", "a");
    assert_eq!(a, run("7", "b"));
    assert_ne!(a, run("8", "c"));
}

#[test]
fn small_bench_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = lmicert(
        dir.path(),
        &["bench", "--only", "DruWo2017-2.3.2P,Helmberg2000-2.2.1P", "--seeds", "1", "--timeout-s", "30", "--out", "r"],
    );
    assert_eq!(o.status.code(), Some(0));
    let tsv = std::fs::read_to_string(dir.path().join("r/bench.tsv")).unwrap();
    let lines: Vec<&str> = tsv.lines().collect();
    assert!(lines[0].starts_with("# lmicert bench seed=1"));
    assert_eq!(lines.len(), 2 + 4);
    for l in &lines[2..] {
        let cells: Vec<&str> = l.split('\t').collect();
        assert_eq!(cells.len(), 14);
        assert_eq!(cells[6], "CERTIFIED_FEASIBLE");
    }
    assert!(lines.iter().any(|l| l.starts_with("Helmberg2000-2.2.1P\tclean") && l.contains("PSD_FOUND\t{3}")));
    assert!(dir.path().join("r/bench.txt").exists());
}

#[test]
fn bench_timeouts_keep_the_report_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let o = lmicert(dir.path(), &["bench", "--only", "PatakiCleanDim6P", "--no-rotated", "--timeout-s", "0.01", "--out", "t"]);
    assert_eq!(o.status.code(), Some(0));
    let tsv = std::fs::read_to_string(dir.path().join("t/bench.tsv")).unwrap();
    let row: Vec<&str> = tsv.lines().nth(2).unwrap().split('\t').collect();
    assert_eq!(row.len(), 14);
    assert_eq!(row[6], "TIMEOUT");
    assert_eq!(row[11], "TIMEOUT");
}
