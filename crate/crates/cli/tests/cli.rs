use std::path::PathBuf;
use std::process::{Command, Output};

fn qnormal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qnormal"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch(name: &str, contents: &str) -> PathBuf {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn digits_window() {
    let o = qnormal(&[
        "digits",
        "--schedule",
        "thm4.1",
        "--from",
        "1",
        "--count",
        "8",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0 0 0 0 0 0 0 1\n");
}

#[test]
fn digits_wrap_at_64() {
    let o = qnormal(&[
        "digits",
        "--schedule",
        "thm4.1-scaled",
        "--from",
        "500",
        "--count",
        "130",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert_eq!(
        lines
            .iter()
            .map(|l| l.split(' ').count())
            .collect::<Vec<_>>(),
        [64, 64, 2]
    );
}

#[test]
fn digits_edge_cases() {
    let empty = qnormal(&["digits", "--count", "0"]);
    assert_eq!(empty.status.code(), Some(0));
    assert!(empty.stdout.is_empty());
    assert_eq!(qnormal(&["digits", "--from", "0"]).status.code(), Some(2));
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["discrepancy", "--schedule", "thm4.1-scaled", "--k", "2"];
    let one = qnormal(&[&["--threads", "1"][..], &args[..]].concat());
    let four = qnormal(&[&["--threads", "4"][..], &args[..]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
}

#[test]
fn discrepancy_csv() {
    let o = qnormal(&[
        "discrepancy",
        "--schedule",
        "thm4.1-scaled",
        "--k",
        "1",
        "--blocks",
        "0,1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("n,block,N,Q,ratio,abs_err,eps_prime,s_minus_q_over_s,envelope,pass")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 8);
    assert!(rows[0].starts_with("512,(0),256,"));
}

#[test]
fn discrepancy_writes_file() {
    let path = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("sweep.csv");
    let o = qnormal(&[
        "discrepancy",
        "--schedule",
        "thm4.1-scaled",
        "--k",
        "2",
        "--blocks",
        "0:1,1:1",
        "--checkpoints",
        "600,5000,118610",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(path).unwrap().lines().count(), 7);
}

#[test]
fn discrepancy_usage_errors() {
    assert_eq!(
        qnormal(&["discrepancy", "--schedule", "no-such-schedule"])
            .status
            .code(),
        Some(2)
    );
    let o = qnormal(&["discrepancy", "--schedule", "thm4.1-scaled", "--k", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("range set"));
    let wrong_len = qnormal(&[
        "discrepancy",
        "--schedule",
        "thm4.1-scaled",
        "--k",
        "2",
        "--blocks",
        "0",
    ]);
    assert_eq!(wrong_len.status.code(), Some(2));
}

#[test]
fn verify_suites() {
    let o = qnormal(&[
        "verify",
        "--suite",
        "champernowne",
        "--bmax",
        "3",
        "--wmax",
        "6",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.starts_with("suite,cases,passes,failures\nchampernowne,"));
    assert!(text.trim_end().ends_with(",0"));

    let o = qnormal(&[
        "verify",
        "--suite",
        "wgood",
        "--schedule",
        "thm4.1",
        "--imax",
        "10",
        "--k",
        "3",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "suite,cases,passes,failures\nwgood,3,3,0\n");

    assert_eq!(
        qnormal(&["verify", "--suite", "bogus"]).status.code(),
        Some(2)
    );
}

#[test]
fn verify_reports_failures_with_exit_1() {
    // The desk-scale instance does not satisfy the W-good growth conditions.
    let o = qnormal(&[
        "verify",
        "--suite",
        "wgood",
        "--schedule",
        "thm4.1-scaled",
        "--imax",
        "5",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).starts_with("suite,cases,passes,failures\nwgood,"));
}

#[test]
fn convert_examples() {
    let o = qnormal(&["convert", "--q", "const:10", "--value", "1/4", "--n", "4"]);
    assert_eq!(
        (o.status.code(), stdout(&o).as_str()),
        (Some(0), "2 5 0 0\n")
    );
    let o = qnormal(&["convert", "--q", "succ", "--value", "0", "--n", "3"]);
    assert_eq!(stdout(&o), "0 0 0\n");
    assert_eq!(
        qnormal(&["convert", "--q", "const:10", "--value", "3/2", "--n", "4"])
            .status
            .code(),
        Some(2)
    );
    let o = qnormal(&["convert", "--q", "succ", "--digits", "1 1 1"]);
    assert_eq!(stdout(&o), "value 17/24\nerror_bound 0\ntail_bound 1/24\n");
    assert_eq!(
        qnormal(&["convert", "--q", "list:2,3", "--digits", "1,3"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        qnormal(&["convert", "--q", "weird", "--value", "1/2"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn schedule_file_round_trip() {
    let text = "\
# flat test schedule
name = flat
x-rule = champernowne(2, 3)
b-rule = 2
p-rule = 2
l-rule = i
eps-rule = 2/(i+2)
k-rule = 2
k-limit = 2
i-cap = 4
";
    let path = scratch("flat.cfg", text);
    let o = qnormal(&[
        "digits",
        "--schedule",
        path.to_str().unwrap(),
        "--count",
        "12",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert_eq!(stdout(&o), "0 0 0 0 0 1 0 1 0 0 1 1\n");
}

#[test]
fn schedule_file_errors_name_the_line() {
    let path = scratch(
        "broken.cfg",
        "name = broken\nx-rule = champernowne(i, i)\nbogus-key = 1\n",
    );
    let o = qnormal(&["digits", "--schedule", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}
