use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hopdist(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hopdist"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("spawn hopdist")
}

fn ok(args: &[&str]) -> String {
    let out = hopdist(args);
    assert!(
        out.status.success(),
        "hopdist {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

const SMALL: [&str; 8] = ["--n", "200", "--z-pi", "4", "--bins-width", "0.01", "--d-max", "6"];

fn with_small<'a>(cmd: &'a str, rest: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec![cmd];
    v.extend_from_slice(&SMALL);
    v.extend_from_slice(rest);
    v
}

fn data_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != "simulate_run.json")
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn simulate_is_byte_identical_per_seed_and_worker_count() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let c = tmp.path().join("c");
    for (dir, workers) in [(&a, "1"), (&b, "3"), (&c, "1")] {
        let seed = if dir == &c { "8" } else { "7" };
        ok(&with_small(
            "simulate",
            &["--trials", "40", "--seed", seed, "--workers", workers, "--out", dir.to_str().unwrap()],
        ));
    }
    let fa = data_files(&a);
    assert_eq!(fa.len(), 12);
    assert_eq!(fa, data_files(&b));
    assert_ne!(fa, data_files(&c));
}

#[test]
fn rerun_from_embedded_header_reproduces_file() {
    let tmp = tempfile::tempdir().unwrap();
    let first = tmp.path().join("first");
    let second = tmp.path().join("second");
    for format in ["csv", "json"] {
        ok(&with_small(
            "simulate",
            &["--trials", "25", "--seed", "3", "--format", format, "--out", first.to_str().unwrap()],
        ));
        let header = match format {
            "csv" => first.join("simulated_density_d2.csv"),
            _ => first.join("simulated.json"),
        };
        ok(&[
            "simulate",
            "--config",
            header.to_str().unwrap(),
            "--out",
            second.to_str().unwrap(),
        ]);
        let name = header.file_name().unwrap();
        assert_eq!(fs::read(&header).unwrap(), fs::read(second.join(name)).unwrap(), "{format}");
    }
}

#[test]
fn csv_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    ok(&with_small("simulate", &["--trials", "10", "--out", out]));
    let text = fs::read_to_string(tmp.path().join("simulated_prob_d1.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("# hopdist simulate"));
    assert!(lines.next().unwrap().starts_with("# config: {\"network\":"));
    let table: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(table[0], "delta,value,count");
    assert!(table[1].starts_with("0.005000,"));
    assert_eq!(table.len(), 1 + 57);
}

#[test]
fn analytic_needs_n_prime_then_compares_to_itself_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    let failed = hopdist(&with_small("analytic", &["--out", out]));
    assert_eq!(failed.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&failed.stderr).contains("hopdist calibrate"));

    ok(&with_small("calibrate", &["--trials", "20000", "--out", out]));
    let cal: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("calibration.json")).unwrap()).unwrap();
    let n_prime = cal["result"]["n_prime"].as_u64().unwrap();
    assert!((1..=198).contains(&n_prime));

    let stdout = ok(&with_small("analytic", &["--out", out]));
    assert!(stdout.contains(&format!("n' = {n_prime}")));
    let report = ok(&with_small(
        "compare",
        &["--analytic", out, "--simulated", out, "--right-source", "analytic", "--min-count", "0", "--out", out],
    ));
    assert_eq!(report.matches("max |dev| = 0.00000").count(), 3, "{report}");
    assert!(report.trim_end().ends_with("PASS"));
}

#[test]
fn compare_rejects_mismatched_bins_and_fit_guards_low_hops() {
    let tmp = tempfile::tempdir().unwrap();
    let fine = tmp.path().join("fine");
    let coarse = tmp.path().join("coarse");
    ok(&with_small("simulate", &["--trials", "10", "--out", fine.to_str().unwrap()]));
    ok(&[
        "simulate", "--n", "200", "--z-pi", "4", "--bins-width", "0.02", "--d-max", "6", "--trials", "10",
        "--out", coarse.to_str().unwrap(),
    ]);
    let out = hopdist(&[
        "compare",
        "--analytic",
        fine.to_str().unwrap(),
        "--left-source",
        "simulated",
        "--simulated",
        coarse.to_str().unwrap(),
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bin grid mismatch") && err.contains("0.01") && err.contains("0.02"), "{err}");

    let refused = hopdist(&with_small("fit", &["--input", fine.to_str().unwrap(), "--d", "1"]));
    assert_eq!(refused.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&refused.stderr).contains("--force"));
}
