use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn skatelo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skatelo"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn simulated_log(dir: &tempfile::TempDir) -> String {
    let path = dir.path().join("sim.v1");
    let p = path.to_str().unwrap().to_owned();
    let o = skatelo(&["simulate", "--seed", "11", "--series", "40", "--output", &p]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    p
}

#[test]
fn rank_reproduces_first_table_row() {
    let input = fixture("table2.v1");
    let o = skatelo(&["rank", "--input", input.to_str().unwrap(), "--k", "0.02", "--start", "800"]);
    assert!(o.status.success());
    assert_eq!(
        stdout(&o),
        "rank,player,rating,series\n1,P0,810.69,1\n2,P1,803.31,1\n3,P2,785.99,1\n"
    );
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[elo]\nk = 0.5\nstart = 1000.0\n").unwrap();
    let input = fixture("table2.v1");
    let args = ["rank", "--input", input.to_str().unwrap(), "--config", cfg.to_str().unwrap()];
    let from_file = stdout(&skatelo(&args));
    assert!(!from_file.contains("810.69"));
    let mut with_flags = args.to_vec();
    with_flags.extend(["--k", "0.02", "--start", "800"]);
    assert!(stdout(&skatelo(&with_flags)).contains("1,P0,810.69,1"));
}

#[test]
fn validate_empty_log_reports_zero_games() {
    let input = fixture("empty.v1");
    let o = skatelo(&["validate", "--input", input.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("games: 0"));
}

#[test]
fn validate_reports_skipped_lines() {
    let input = fixture("malformed.v1");
    let o = skatelo(&["validate", "--input", input.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("parsed: 7") && text.contains("skipped: 5"), "{text}");
}

#[test]
fn sweep_default_grid_has_sixteen_rows() {
    let dir = tempfile::tempdir().unwrap();
    let log = simulated_log(&dir);
    let o = skatelo(&["sweep", "--input", &log, "--grid", "default"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap().len(), 10);
    assert_eq!(rdr.records().map(Result::unwrap).count(), 16);
}

#[test]
fn same_arguments_give_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.v1");
    let b = dir.path().join("b.v1");
    for p in [&a, &b] {
        let o = skatelo(&["simulate", "--seed", "5", "--series", "20", "--output", p.to_str().unwrap()]);
        assert!(o.status.success());
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let rank = |p: &PathBuf| skatelo(&["rank", "--input", p.to_str().unwrap()]).stdout;
    assert_eq!(rank(&a), rank(&b));
}

#[test]
fn simulate_replay_prints_ranking() {
    let dir = tempfile::tempdir().unwrap();
    let log = dir.path().join("s.v1");
    let o = skatelo(&[
        "simulate", "--seed", "3", "--series", "30", "--player-count", "6",
        "--output", log.to_str().unwrap(), "--replay",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("rank,player,rating,series\n"));
    assert_eq!(text.lines().count(), 7);
    let v = skatelo(&["validate", "--input", log.to_str().unwrap()]);
    assert!(stdout(&v).contains("skipped: 0"));
}

#[test]
fn timeseries_csv_round_trips() {
    let input = fixture("table2_full.v1");
    let o = skatelo(&[
        "timeseries", "--input", input.to_str().unwrap(), "--players", "P0,P2", "--mode", "contracted",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let ts = skatelo::report::TimeSeries::parse_csv(&text).unwrap();
    assert_eq!(ts.rows.len(), 10);
    assert_eq!(ts.to_csv(), text);
}

#[test]
fn timeseries_svg_output() {
    let input = fixture("table2_full.v1");
    let o = skatelo(&["timeseries", "--input", input.to_str().unwrap(), "--format", "svg"]);
    assert!(o.status.success());
    assert!(stdout(&o).trim_start().starts_with("<svg"));
}

#[test]
fn seeger_table_is_csv() {
    let input = fixture("table2.v1");
    let o = skatelo(&["seeger", "--input", input.to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("table_id,player,wins,losses,value_sum,es\n"));
    assert_eq!(text.lines().count(), 4);
}

#[test]
fn output_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    let input = fixture("table2.v1");
    let o = skatelo(&["rank", "--input", input.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(out).unwrap().contains("P0"));
}

#[test]
fn usage_errors_exit_two() {
    let input = fixture("table2.v1");
    let i = input.to_str().unwrap();
    for args in [
        vec!["rank", "--input", i, "--bogus"],
        vec!["rank"],
        vec!["simulate", "--series", "3"],
        vec!["rank", "--input", i, "--k", "5"],
        vec!["sweep", "--input", i, "--grid", "1,1"],
        vec!["frobnicate"],
    ] {
        let o = skatelo(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty());
    }
}

#[test]
fn data_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.v1");
    let o = skatelo(&["rank", "--input", missing.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let input = fixture("table2.v1");
    let o = skatelo(&["rank", "--input", input.to_str().unwrap(), "--chance-hand"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("t01"));
}

#[test]
fn stdin_input() {
    use std::io::Write;
    use std::process::Stdio;
    let log = std::fs::read(fixture("table2.v1")).unwrap();
    let mut child = Command::new(env!("CARGO_BIN_EXE_skatelo"))
        .args(["rank", "--input", "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(&log).unwrap();
    let o = child.wait_with_output().unwrap();
    assert!(stdout(&o).contains("1,P0,810.69,1"));
}

#[test]
fn example_config_is_accepted() {
    let cfg = fixture("example.toml");
    let input = fixture("table2_full.v1");
    let o = skatelo(&["rank", "--input", input.to_str().unwrap(), "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 4);
}
