use proptest::prelude::*;

use spiraldim::curves::{
    gen_chirp_graph, gen_phase_trajectory, gen_power_spiral, integrate_cubic_system, system_height,
    trajectory_point, ChirpSpec, PowerSpiralSpec, Sampling, Tolerances, TrajectoryFamilySpec,
};
use spiraldim::experiments::{BuildOptions, CurveSource};
use spiraldim::fractal::{box_count, fit_dimension, least_squares, WindowPolicy};
use spiraldim::phase::{poincare_sequence, project, unwrap_phase, Plane};
use spiraldim::Curve;

fn max_chord(c: &Curve) -> f64 {
    c.points()
        .zip(c.points().skip(1))
        .map(|(a, b)| a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

fn estimate(curve: &Curve, opts: &BuildOptions, src: &CurveSource) -> spiraldim::fractal::DimensionEstimate {
    let (_, plan) = src.build(opts).unwrap();
    fit_dimension(
        &box_count(curve, &plan.ladder().unwrap()).unwrap(),
        WindowPolicy::default(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn emitted_chords_respect_the_bound(alpha in 0.4f64..1.2, chord in 2e-3f64..5e-2) {
        let spiral = gen_power_spiral(&PowerSpiralSpec::new(alpha).unwrap(), 0.1, Sampling::new(chord, 2_000_000).unwrap()).unwrap();
        prop_assert!(max_chord(&spiral) <= chord * (1.0 + 1e-12));
        let chirp = gen_chirp_graph(&ChirpSpec::new(alpha.min(0.9), 1.0).unwrap(), 1.0, 1e-2, Sampling::new(chord, 2_000_000).unwrap()).unwrap();
        prop_assert!(max_chord(&chirp) <= chord * (1.0 + 1e-12));
        let family = gen_phase_trajectory(&TrajectoryFamilySpec::new(alpha.min(0.9), 1.0).unwrap(), 60.0, Sampling::new(chord, 2_000_000).unwrap()).unwrap();
        prop_assert!(max_chord(&family) <= chord * (1.0 + 1e-12));
        prop_assert!(family.params().windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn estimates_stay_within_ambient_bounds(alpha in 0.2f64..1.5) {
        let src = CurveSource::Spiral(PowerSpiralSpec::new(alpha).unwrap());
        let opts = BuildOptions { scale_count: 12, ..BuildOptions::default() };
        let (curve, plan) = src.build(&opts).unwrap();
        let counts = box_count(&curve, &plan.ladder().unwrap()).unwrap();
        prop_assert!(counts.counts.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(counts.counts[0] >= 1);
        let est = fit_dimension(&counts, WindowPolicy::default()).unwrap();
        prop_assert!((1.0..=2.0).contains(&est.value), "{}", est.value);
    }

    #[test]
    fn rescaling_preserves_the_estimate(alpha in 0.3f64..1.0, c in 0.1f64..10.0) {
        let src = CurveSource::Spiral(PowerSpiralSpec::new(alpha).unwrap());
        let opts = BuildOptions { scale_count: 12, ..BuildOptions::default() };
        let (curve, plan) = src.build(&opts).unwrap();
        let ladder = plan.ladder().unwrap();
        let base = fit_dimension(&box_count(&curve, &ladder).unwrap(), WindowPolicy::default()).unwrap();
        let scaled = fit_dimension(
            &box_count(&curve.scaled(c).unwrap(), &ladder.scaled(c).unwrap()).unwrap(),
            WindowPolicy::default(),
        ).unwrap();
        prop_assert!((scaled.value - base.value).abs() < base.band, "{} vs {}", scaled.value, base.value);
    }

    #[test]
    fn power_spiral_returns_strictly_decrease(alpha in 0.5f64..1.5, section in 0.0f64..std::f64::consts::TAU) {
        let spec = PowerSpiralSpec::new(alpha).unwrap();
        let r_min = spec.radius(spec.phi_min + 40.0 * std::f64::consts::PI);
        let curve = gen_power_spiral(&spec, r_min, Sampling::new(r_min / 20.0, 2_000_000).unwrap()).unwrap();
        let seq = poincare_sequence(&unwrap_phase(&curve).unwrap(), section).unwrap();
        prop_assert!(seq.violations.is_empty());
        prop_assert!(seq.radii.windows(2).all(|w| w[1] < w[0]));
    }
}

#[test]
fn radii_decay_like_the_amplitude() {
    for alpha in [0.25, 0.5, 0.75] {
        let spec = TrajectoryFamilySpec::new(alpha, 1.0).unwrap();
        let curve = gen_phase_trajectory(&spec, 2000.0, Sampling::new(1e-3, 5_000_000).unwrap()).unwrap();
        let profile = unwrap_phase(&project(&curve, Plane::Xy).unwrap()).unwrap();
        let tail: Vec<(f64, f64)> = profile
            .phis
            .iter()
            .zip(&profile.radii)
            .filter(|(p, _)| p.abs() > 100.0)
            .map(|(p, r)| (p.abs().ln(), r.ln()))
            .collect();
        let (xs, ys): (Vec<f64>, Vec<f64>) = tail.into_iter().unzip();
        let fit = least_squares(&xs, &ys);
        assert!(
            (fit.slope + alpha).abs() < 0.03,
            "alpha {alpha}: slope {}",
            fit.slope
        );
    }
}

#[test]
fn trajectory_phase_turns_clockwise_with_time() {
    let spec = TrajectoryFamilySpec::new(0.5, 1.0).unwrap();
    let curve = gen_phase_trajectory(&spec, 200.0, Sampling::new(1e-3, 5_000_000).unwrap()).unwrap();
    let profile = unwrap_phase(&project(&curve, Plane::Xy).unwrap()).unwrap();
    let tau = std::f64::consts::TAU;
    for (phi, t) in profile.phis.iter().zip(curve.params()).skip(curve.len() / 2) {
        // The radial factor adds a phase lag that vanishes like 1/t.
        let d = (phi + t - tau / 4.0).rem_euclid(tau);
        let d = if d > tau / 2.0 { d - tau } else { d };
        assert!(d.abs() < 0.05, "t = {t}: drift {d}");
    }
    assert!(profile.turns() < -25.0);
}

#[test]
fn integrated_projection_matches_closed_form_estimate() {
    let spec = TrajectoryFamilySpec::new(0.5, 1.0).unwrap();
    let opts = BuildOptions {
        end: Some(400.0),
        ..BuildOptions::default()
    };
    let family = CurveSource::Family(spec);
    let (closed, _) = family.build(&opts).unwrap();
    let p = trajectory_point(&spec, spec.t0).unwrap();
    let integrated = integrate_cubic_system(
        &spec,
        [p[0], p[1], system_height(&spec, spec.t0)],
        (spec.t0, 400.0),
        Tolerances::new(1e-10, 1e-13).unwrap(),
        Sampling::new(closed.max_chord(), 5_000_000).unwrap(),
    )
    .unwrap();
    let a = estimate(&project(&closed, Plane::Xy).unwrap(), &opts, &family);
    let b = estimate(&project(&integrated, Plane::Xy).unwrap(), &opts, &family);
    assert!(
        (a.value - b.value).abs() < a.band.max(b.band),
        "{} vs {}",
        a.value,
        b.value
    );
}

#[test]
fn halving_the_chord_keeps_estimates_within_band() {
    for src in [
        CurveSource::Spiral(PowerSpiralSpec::new(0.5).unwrap()),
        CurveSource::Family(TrajectoryFamilySpec::new(0.5, 0.5).unwrap()),
    ] {
        let opts = BuildOptions::default();
        let (coarse, plan) = src.build(&opts).unwrap();
        let fine_opts = BuildOptions {
            max_chord: Some(plan.chord() / 2.0),
            budget: 2 * opts.budget,
            ..opts
        };
        let (fine, _) = src.build(&fine_opts).unwrap();
        let a = estimate(&coarse, &opts, &src);
        let b = estimate(&fine, &opts, &src);
        assert!(
            (a.value - b.value).abs() < a.band.max(b.band),
            "{} vs {}",
            a.value,
            b.value
        );
    }
}

#[test]
fn generation_is_deterministic() {
    let src = CurveSource::parse("family", &["alpha=0.5", "gamma=0.25"]).unwrap();
    let opts = BuildOptions {
        end: Some(300.0),
        ..BuildOptions::default()
    };
    let (a, _) = src.build(&opts).unwrap();
    let (b, _) = src.build(&opts).unwrap();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    a.write_csv(&mut x).unwrap();
    b.write_csv(&mut y).unwrap();
    assert_eq!(x, y);
    assert_eq!(a.sidecar(), b.sidecar());
}
