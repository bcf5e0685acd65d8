use std::fs;

use spiraldim::experiments::{
    emit_report, load_report, read_suite_csv, run_suite, CurveSource, SuiteConfig, SOURCE_KINDS, SUITE_IDS,
};

fn small_config() -> SuiteConfig {
    let mut cfg = SuiteConfig::default();
    cfg.poincare.alphas = vec![1.0];
    cfg.poincare.t_max = 400.0;
    cfg
}

#[test]
fn suite_rows_round_trip_and_recompute_their_flags() {
    let res = run_suite("poincare", &small_config()).unwrap();
    assert_eq!(res.rows.len(), 1);
    let row = &res.rows[0];
    assert_eq!(row.id, "poincare_a1");
    assert_eq!(row.predicted, 2.0);
    assert!(row.consistent());

    let dir = tempfile::tempdir().unwrap();
    let written = emit_report(std::slice::from_ref(&res), dir.path()).unwrap();
    let names: Vec<String> = written
        .iter()
        .map(|p| p.strip_prefix(dir.path()).unwrap().to_string_lossy().into_owned())
        .collect();
    assert_eq!(names, ["poincare.csv", "summary.csv"]);

    let back = read_suite_csv("poincare", fs::File::open(&written[0]).unwrap()).unwrap();
    assert!(back.rows.iter().all(|r| r.consistent()));
    assert_eq!(back.rows[0].estimated, row.estimated);
    assert_eq!(load_report(dir.path()).unwrap().len(), 1);
}

#[test]
fn dimension_rows_carry_counts_companions() {
    let mut cfg = SuiteConfig::default();
    cfg.tricot.spiral_alphas = vec![0.5];
    cfg.tricot.chirp_alphas = vec![];
    cfg.sampling.scale_count = 12;
    let res = run_suite("tricot", &cfg).unwrap();
    let dir = tempfile::tempdir().unwrap();
    emit_report(&[res], dir.path()).unwrap();
    let counts = fs::read_to_string(dir.path().join("tricot/spiral_a0.5.counts.csv")).unwrap();
    let mut lines = counts.lines();
    assert_eq!(lines.next(), Some("epsilon,count"));
    assert_eq!(lines.count(), 12);
}

#[test]
fn empty_report_writes_only_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let written = emit_report(&[], dir.path()).unwrap();
    assert_eq!(written, [dir.path().join("summary.csv")]);
    assert_eq!(
        fs::read_to_string(&written[0]).unwrap(),
        "suite,rows,gated,passed,failed,experimental\n"
    );
    assert!(load_report(dir.path()).is_err());
}

#[test]
fn unknown_suite_is_rejected() {
    assert!(run_suite("tricot2", &SuiteConfig::default()).is_err());
    assert_eq!(SUITE_IDS.len(), 6);
}

#[test]
fn config_file_overrides_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("suites.toml");
    fs::write(
        &path,
        "[poincare]\nalphas = [0.5]\n\n[tolerance]\nexponent = 0.2\n",
    )
    .unwrap();
    let cfg = SuiteConfig::load(&path).unwrap();
    assert_eq!(cfg.poincare.alphas, [0.5]);
    assert_eq!(cfg.tolerance.exponent, 0.2);
    assert_eq!(cfg.tolerance.planar, SuiteConfig::default().tolerance.planar);
    assert_eq!(SuiteConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);

    fs::write(&path, "[poincare]\nalphas = [-1.0]\n").unwrap();
    assert!(SuiteConfig::load(&path).is_err());
}

#[test]
fn every_source_kind_parses_with_minimal_keys() {
    let minimal: &[(&str, &[&str])] = &[
        ("spiral", &["alpha=0.5"]),
        ("chirp", &["alpha=0.5", "beta=1"]),
        ("chirp-phase", &["alpha=0.5", "beta=0.75"]),
        ("family", &["alpha=0.5", "gamma=1"]),
        ("cubic", &["alpha=0.5", "gamma=1"]),
        ("reflected", &["alpha=0.5", "gamma=1"]),
        ("hopf", &["p=3"]),
    ];
    assert_eq!(minimal.len(), SOURCE_KINDS.len());
    for (kind, args) in minimal {
        assert!(SOURCE_KINDS.contains(kind), "{kind}");
        CurveSource::parse(kind, args).unwrap_or_else(|e| panic!("{kind}: {e}"));
    }
    for bad in [
        &["alpha=0.5", "alpha=0.6"][..],
        &["alpha="],
        &["alpha=nan"],
        &["alpha=0.5", "colour=red"],
        &["alpha"],
    ] {
        assert!(CurveSource::parse("spiral", bad).is_err(), "{bad:?}");
    }
    assert!(CurveSource::parse("lissajous", &["alpha=1"]).is_err());
}
