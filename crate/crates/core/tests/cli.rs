use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fused-sage"))
        .args(args)
        .current_dir(dir)
        .env("FSA_WORKERS", "2")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMALL: &str = "synth:uniform:N=500,deg=12,seed=3";

#[test]
fn bench_writes_one_row_per_variant_and_repeat() {
    let dir = tempfile::tempdir().unwrap();
    let args = [
        "bench", "--datasets", SMALL, "--fanouts", "6 4", "--batches", "32", "--steps", "3", "--warmup", "1",
        "--repeats", "3", "--d-feat", "8", "--hidden", "8", "--out", "bench.csv",
    ];
    let o = cli(&args, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("config: Bench"));
    let rows = fused_sage::bench::read_records(dir.path().join("bench.csv")).unwrap();
    assert_eq!(rows.len(), 6);
    let mut seeds: Vec<u64> = rows.iter().map(|r| r.base_seed).collect();
    seeds.sort_unstable();
    assert_eq!(seeds, [42, 42, 43, 43, 44, 44]);
    assert!(stdout(&o).contains(" → "));

    // Re-running is a no-op; a wider grid only adds the new rows.
    let o = cli(&args, dir.path());
    assert!(stdout(&o).contains("wrote 0 rows, skipped 6"));
    let mut wider = args.to_vec();
    wider[4] = "6 4";
    wider.splice(5..5, ["3"]);
    let o = cli(&wider, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fused_sage::bench::read_records(dir.path().join("bench.csv")).unwrap().len(), 12);
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["bench", "--fanouts", "15 10"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--out"));

    let o = cli(&["bench", "--out", "x.csv", "--datasets", "synth:nope:N=1"], dir.path());
    assert_eq!(o.status.code(), Some(1));

    let o = cli(&["bench", "--out", "x.csv", "--fanouts", "0 3"], dir.path());
    assert_eq!(o.status.code(), Some(1));

    let o = cli(&["verify", "--bogus"], dir.path());
    assert_eq!(o.status.code(), Some(1));

    let o = cli(&["report", "--csv", "missing.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));

    let o = cli(&["--help"], dir.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn verify_passes_and_catches_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["verify", "--trials", "25"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS (25 trials)"));

    let o = cli(&["verify", "--trials", "5", "--inject-fault"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stdout(&o).contains("counterexample: instance seed="));

    let o = cli(&["verify", "--trials", "0"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).contains("warning"));
}

#[test]
fn grad_check_modes() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["grad-check", "--eps", "1e-6", "--trials", "20"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).contains("over 20 trials"));

    let o = cli(&["grad-check", "--trials", "4", "--nosave"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("max |grad| = 0e0"));

    // A huge step makes the central difference meaningless.
    let o = cli(&["grad-check", "--trials", "3", "--eps", "1e-14"], dir.path());
    assert_eq!(o.status.code(), Some(2), "{}", stdout(&o));
}

#[test]
fn report_handles_parity_incomplete_and_malformed_rows() {
    let dir = tempfile::tempdir().unwrap();
    let header = fused_sage::bench::CSV_HEADER;
    let row = |variant: &str, ms: &str| {
        format!("{SMALL},{variant},6,4,32,0,42,30,5,32,false,8,8,16,{ms},{ms},{ms},100,1000,2026-01-01T00:00:00Z")
    };
    let quoted = |r: String| r.replacen(SMALL, &format!("\"{SMALL}\""), 1);

    std::fs::write(
        dir.path().join("eq.csv"),
        format!("{header}\n{}\n{}\n", quoted(row("baseline", "5")), quoted(row("fused", "5"))),
    )
    .unwrap();
    let o = cli(&["report", "--csv", "eq.csv", "--summary-out", "sum.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("1.00x"));
    let summary = std::fs::read_to_string(dir.path().join("sum.csv")).unwrap();
    assert!(summary.starts_with(fused_sage::bench::SUMMARY_HEADER));

    std::fs::write(dir.path().join("half.csv"), format!("{header}\n{}\n", quoted(row("baseline", "5")))).unwrap();
    let o = cli(&["report", "--csv", "half.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("incomplete config"));

    std::fs::write(
        dir.path().join("bad.csv"),
        format!("{header}\n{}\n{}\n", quoted(row("baseline", "5")), quoted(row("fused", "abc"))),
    )
    .unwrap();
    let o = cli(&["report", "--csv", "bad.csv"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("row 3"), "{}", stderr(&o));
}

#[test]
fn gen_writes_loadable_graphs() {
    let dir = tempfile::tempdir().unwrap();
    for (format, file, spec) in [("csr", "g.csr", "csr:g.csr"), ("edgelist", "g.txt", "edgelist:g.txt")] {
        let o = cli(&["gen", "--dataset", SMALL, "--out", file, "--format", format], dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        let back: fused_sage::DatasetSpec = spec.replace(file, dir.path().join(file).to_str().unwrap()).parse().unwrap();
        let want: fused_sage::DatasetSpec = SMALL.parse().unwrap();
        assert_eq!(back.load().unwrap(), want.load().unwrap());
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for w in ["1", "3"] {
        let o = Command::new(env!("CARGO_BIN_EXE_fused-sage"))
            .args(["grad-check", "--trials", "3"])
            .current_dir(dir.path())
            .env("FSA_WORKERS", w)
            .output()
            .unwrap();
        assert!(o.status.success());
        outputs.push(stdout(&o).lines().last().unwrap().to_owned());
    }
    assert_eq!(outputs[0], outputs[1]);
    let o = Command::new(env!("CARGO_BIN_EXE_fused-sage"))
        .args(["verify", "--trials", "1"])
        .env("FSA_WORKERS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
