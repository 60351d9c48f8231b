use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn quadrep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadrep")).args(args).env_remove("QUADREP_THREADS").output().expect("spawn")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn write_form(dir: &Path, name: &str, gram: &str) -> String {
    let path = dir.join(name);
    let k = gram.matches('[').count() - 1;
    fs::write(&path, format!("{{\"dim\":{k},\"gram\":{gram}}}")).unwrap();
    path.to_str().unwrap().to_string()
}

const FOUR_SQUARES: &str = "[[2,0,0,0],[0,2,0,0],[0,0,2,0],[0,0,0,2]]";

// Jacobi: r_4(n) = 8 Σ_{d | n, 4 ∤ d} d.
fn jacobi_four_squares(n: u64) -> u64 {
    8 * (1..=n).filter(|d| n.is_multiple_of(*d) && d % 4 != 0).sum::<u64>()
}

#[test]
fn count_prints_r() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_form(dir.path(), "f.json", FOUR_SQUARES);
    let o = quadrep(&["count", "--form", &f, "--n", "25"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), format!("n,r\n25,{}\n", jacobi_four_squares(25)));
}

#[test]
fn pairs_table_matches_brute_force() {
    let (d, n) = (5usize, 4i64);
    let mut points = Vec::new();
    let mut x = vec![-2i64; d];
    loop {
        if x.iter().map(|c| c * c).sum::<i64>() == n {
            points.push(x.clone());
        }
        let mut i = 0;
        while i < d && x[i] == 2 {
            x[i] = -2;
            i += 1;
        }
        if i == d {
            break;
        }
        x[i] += 1;
    }
    let mut expected = std::collections::BTreeMap::new();
    for t in -n..=n {
        expected.insert(t, 0u64);
    }
    for p in &points {
        for q in &points {
            if p != q {
                *expected.get_mut(&p.iter().zip(q).map(|(a, b)| a * b).sum::<i64>()).unwrap() += 1;
            }
        }
    }
    let mut csv = String::from("t,A\n");
    for (t, a) in &expected {
        csv.push_str(&format!("{t},{a}\n"));
    }
    let o = quadrep(&["pairs", "--d", "5", "--n", "4"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(stdout(&o), csv);

    let o = quadrep(&["pairs", "--d", "5", "--n", "4", "--t", "-2"]);
    assert_eq!(stdout(&o), format!("t,A\n-2,{}\n", expected[&-2]));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = quadrep(&["count", "--bogus", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--bogus"));
}

#[test]
fn bad_values_are_usage_errors_naming_the_flag() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    let o = quadrep(&["count", "--form", missing.to_str().unwrap(), "--n", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--form"));

    let odd = write_form(dir.path(), "odd.json", "[[2,1,0],[1,2,0],[0,0,3]]");
    let o = quadrep(&["count", "--form", &odd, "--n", "3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--form"));

    let o = quadrep(&["caps", "--d", "5", "--n", "4", "--Y2", "x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--Y2"));

    let o = quadrep(&["pairs", "--d", "5", "--n", "4", "--t", "9"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--t"));

    let o = quadrep(&["verify-all", "--reduced", "--eps", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--eps"));
}

#[test]
fn thread_variable_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_quadrep"))
        .args(["pairs", "--d", "3", "--n", "2"])
        .env("QUADREP_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("QUADREP_THREADS"));

    let o = Command::new(env!("CARGO_BIN_EXE_quadrep"))
        .args(["pairs", "--d", "3", "--n", "2"])
        .env("QUADREP_THREADS", "2")
        .output()
        .unwrap();
    assert!(o.status.success());
}

#[test]
fn small_cutoff_is_a_computational_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_form(dir.path(), "f.json", FOUR_SQUARES);
    let o = quadrep(&["rho", "--form", &f, "--n", "53", "--cutoff", "50"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("cutoff"));
}

#[test]
fn rho_encloses_r_for_four_squares() {
    let dir = tempfile::tempdir().unwrap();
    let f = write_form(dir.path(), "f.json", FOUR_SQUARES);
    let o = quadrep(&["split", "--form", &f, "--n", "12"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,r,rho_lo,rho_hi,tau_lo,tau_hi"));
    for (n, line) in (1u64..).zip(lines) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells[0], n.to_string());
        let r: u64 = cells[1].parse().unwrap();
        assert_eq!(r, jacobi_four_squares(n));
        let lo: f64 = cells[2].parse().unwrap();
        let hi: f64 = cells[3].parse().unwrap();
        assert!(lo <= r as f64 && r as f64 <= hi, "n = {n}: {lo} {hi}");
    }
}

#[test]
fn ortho_reports_discriminant() {
    let o = quadrep(&["ortho", "--v", "2,4,-6"]);
    assert!(o.status.success(), "{}", stderr(&o));
    // v' = (1, 2, -3), |v'|² = 14
    assert!(stdout(&o).contains("v_primitive,1 2 -3\nD,14\n"));
}

#[test]
fn out_directory_and_json_format() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("reports");
    let o = quadrep(&["caps", "--d", "3", "--n", "9", "--Y2", "8", "--out", out.to_str().unwrap(), "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("caps_summary.json")).unwrap()).unwrap();
    // E_3(9) = 6 permutations of (±3,0,0) and 24 of (±2,±2,±1)
    assert_eq!(summary[0]["property"], "points");
    assert_eq!(summary[0]["value"], "30");
    assert!(out.join("caps.json").exists());

    let o = quadrep(&["pairs", "--d", "3", "--n", "2", "--format", "yaml"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--format"));
}

#[test]
fn family_generation_is_reproducible() {
    let args = ["generate-family", "--seed", "1", "--count", "3", "--k-min", "4", "--k-max", "4", "--height", "3"];
    let a = quadrep(&args);
    let b = quadrep(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 4);
}

#[test]
fn verify_all_reports_are_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let runs: Vec<_> = ["1", "8", "8"]
        .iter()
        .enumerate()
        .map(|(i, threads)| {
            let out = dir.path().join(format!("run{i}"));
            let o = quadrep(&["verify-all", "--reduced", "--threads", threads, "--out", out.to_str().unwrap()]);
            assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
            out
        })
        .collect();
    let mut names: Vec<_> = fs::read_dir(&runs[0]).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 10);
    for other in &runs[1..] {
        let mut other_names: Vec<_> = fs::read_dir(other).unwrap().map(|e| e.unwrap().file_name()).collect();
        other_names.sort();
        assert_eq!(names, other_names);
        for name in &names {
            assert_eq!(fs::read(runs[0].join(name)).unwrap(), fs::read(other.join(name)).unwrap(), "{name:?}");
        }
    }
}
