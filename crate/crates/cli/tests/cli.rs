use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn spiraldim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spiraldim"))
        .args(args)
        .env("SPIRALDIM_THREADS", "1")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn value(text: &str, key: &str) -> f64 {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key} = ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .parse()
        .unwrap()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(spiraldim(&["--help"]).status.code(), Some(0));
    assert_eq!(spiraldim(&["--version"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(spiraldim(&[]).status.code(), Some(1));
    assert_eq!(spiraldim(&["dim", "--bogus"]).status.code(), Some(1));
    assert_eq!(spiraldim(&["dim"]).status.code(), Some(1));
    assert_eq!(
        spiraldim(&["dim", "--spiral", "alpha=0.5", "--chirp", "alpha=0.5", "beta=1"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn invalid_parameters_exit_one_with_the_message() {
    let o = spiraldim(&["dim", "--spiral", "alpha=-1"]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.starts_with("error: "), "{err}");
    assert!(err.contains("alpha"), "{err}");
}

#[test]
fn numerical_failures_exit_two() {
    let o = spiraldim(&["dim", "--spiral", "alpha=0.5", "--budget", "2000"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn generate_writes_a_curve_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.csv");
    let o = spiraldim(&[
        "generate",
        "--family",
        "alpha=0.5",
        "gamma=1",
        "--tmax",
        "200",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().next(), Some("t,x,y,z"));
    assert!(csv.lines().count() > 1000);
    let meta = fs::read_to_string(dir.path().join("c.csv.meta")).unwrap();
    assert!(meta.contains("alpha"), "{meta}");

    let again = dir.path().join("d.csv");
    spiraldim(&[
        "generate",
        "--family",
        "alpha=0.5",
        "gamma=1",
        "--tmax",
        "200",
        "--out",
        again.to_str().unwrap(),
    ]);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());

    let est = spiraldim(&["dim", "--curve", out.to_str().unwrap(), "--scales", "14"]);
    assert!(est.status.success(), "{}", String::from_utf8_lossy(&est.stderr));
    let d = value(&stdout(&est), "value");
    assert!((1.0..=3.0).contains(&d), "{d}");
}

#[test]
fn dim_reports_estimate_and_prediction() {
    let dir = tempfile::tempdir().unwrap();
    let counts = dir.path().join("counts.csv");
    let o = spiraldim(&[
        "dim",
        "--spiral",
        "alpha=0.5",
        "--scales",
        "14",
        "--counts",
        counts.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!((value(&text, "predicted") - 4.0 / 3.0).abs() < 1e-12);
    assert!((value(&text, "value") - 4.0 / 3.0).abs() < 0.1, "{text}");
    let counts = fs::read_to_string(counts).unwrap();
    assert_eq!(counts.lines().next(), Some("epsilon,count"));
    assert_eq!(counts.lines().count(), 15);
}

#[test]
fn classify_names_the_regime() {
    let o = spiraldim(&[
        "classify",
        "--chirp-phase",
        "alpha=0.5",
        "beta=1",
        "--tmax",
        "2000",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("regime = \"spiral\""), "{}", stdout(&o));
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(tree(&p));
        } else {
            out.push((
                p.strip_prefix(dir).unwrap_or(&p).to_string_lossy().into_owned(),
                fs::read(&p).unwrap(),
            ));
        }
    }
    out.sort();
    out
}

#[test]
fn suite_runs_are_byte_identical_and_reportable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suites.toml");
    fs::write(&cfg, "[tricot]\nspiral_alphas = [0.5]\nchirp_alphas = [0.5]\n\n[poincare]\nalphas = [1.0]\nt_max = 400.0\n").unwrap();
    let mut runs = Vec::new();
    for name in ["a", "b"] {
        let out = dir.path().join(name);
        let o = spiraldim(&[
            "suite",
            "--config",
            cfg.to_str().unwrap(),
            "--only",
            "tricot,poincare",
            "--scales",
            "14",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        runs.push(tree(&out));
    }
    assert_eq!(runs[0], runs[1]);
    let names: Vec<&str> = runs[0].iter().map(|f| f.0.as_str()).collect();
    assert!(
        names.contains(&"tricot.csv") && names.contains(&"poincare.csv") && names.contains(&"summary.csv"),
        "{names:?}"
    );

    let summary = dir.path().join("again.csv");
    let o = spiraldim(&[
        "report",
        "--in",
        dir.path().join("a").to_str().unwrap(),
        "--out",
        summary.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("tricot"));
    assert_eq!(
        fs::read(summary).unwrap(),
        fs::read(dir.path().join("a/summary.csv")).unwrap()
    );
}

#[test]
fn report_on_an_empty_directory_fails() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        spiraldim(&["report", "--in", dir.path().to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}
