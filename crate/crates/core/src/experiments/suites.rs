use std::time::Instant;

use rayon::prelude::*;

use super::config::SuiteConfig;
use super::plan::{chirp_plan, family_plan, hopf_initial, hopf_plan, spiral_plan, Plan};
use super::report::{Row, SuiteResult};
use crate::curve::Curve;
use crate::curves::{
    gen_chirp_graph, gen_phase_trajectory, gen_power_spiral, gen_reflected_graph, integrate_cubic_system,
    integrate_normal_form, system_height, trajectory_point, ChirpSpec, Focus, NormalFormSpec,
    PowerSpiralSpec, Sampling, Tolerances, TrajectoryFamilySpec,
};
use crate::error::{Error, Result};
use crate::fractal::{
    box_count, content_profile, epsilon_measure, fit_dimension, ContentVerdict, ScaleCounts, ScaleLadder,
    WindowPolicy,
};
use crate::phase::{
    arc_length_profile, fit_return_exponent, poincare_sequence, project, unwrap_phase, Plane, Rectifiability,
};

type Job<'a> = Box<dyn FnOnce() -> Vec<Row> + Send + 'a>;

fn run_jobs(suite_id: &str, jobs: Vec<Job<'_>>) -> SuiteResult {
    let start = Instant::now();
    let rows = jobs.into_par_iter().map(|job| job()).collect::<Vec<_>>().concat();
    SuiteResult {
        suite_id: suite_id.to_string(),
        rows,
        runtime: start.elapsed(),
    }
}

/// Runs one suite by identifier.
pub fn run_suite(id: &str, cfg: &SuiteConfig) -> Result<SuiteResult> {
    cfg.validate()?;
    Ok(match id {
        "tricot" => suite_tricot_baselines(cfg),
        "theorem_phase" => suite_theorem_phase(cfg),
        "projections" => suite_projections(cfg),
        "poincare" => suite_poincare(cfg),
        "hopf" => suite_hopf(cfg),
        "content" => suite_degenerate_content(cfg),
        _ => {
            return Err(Error::invalid(
                "suite",
                format!("{id:?} is not one of {}", super::SUITE_IDS.join(", ")),
            ))
        }
    })
}

fn sampling(plan: &Plan, cfg: &SuiteConfig) -> Result<Sampling> {
    Sampling::new(plan.chord(), cfg.sampling.budget)
}

fn tolerances(cfg: &SuiteConfig) -> Result<Tolerances> {
    Tolerances::new(cfg.sampling.rel_tol, cfg.sampling.abs_tol)
}

fn reject_truncated(curve: Curve) -> Result<Curve> {
    match &curve.provenance().truncated {
        Some(reason) => Err(Error::invalid("curve", format!("truncated: {reason}"))),
        None => Ok(curve),
    }
}

/// Box counts of `curve` on `ladder`, turned into a dimension row.
fn dimension_row(
    id: String,
    spec: String,
    predicted: f64,
    tolerance: f64,
    counts: Result<(ScaleCounts, usize)>,
) -> (Row, Option<f64>) {
    let fitted = counts.and_then(|(c, n)| Ok((fit_dimension(&c, WindowPolicy::default())?, c, n)));
    match fitted {
        Ok((est, _, _)) if est.sub_resolved => (
            Row::failed(id, "dimension", spec, predicted, tolerance, &Error::SubResolved),
            None,
        ),
        Ok((est, counts, n)) => {
            let note = format!("samples={n} raw_slope={:.6}", est.raw_slope);
            let row = Row::new(id, "dimension", spec, predicted, est.value, est.band, tolerance)
                .with_note(note)
                .with_counts(counts);
            (row, Some(est.band))
        }
        Err(e) => (Row::failed(id, "dimension", spec, predicted, tolerance, &e), None),
    }
}

fn counts_on(curve: &Curve, ladder: &ScaleLadder) -> Result<(ScaleCounts, usize)> {
    Ok((box_count(curve, ladder)?, curve.len()))
}

fn spiral_curve(spec: &PowerSpiralSpec, count: usize, fill: f64, cfg: &SuiteConfig) -> Result<(Curve, Plan)> {
    let (plan, r_min) = spiral_plan(spec, count, fill)?;
    let curve = gen_power_spiral(spec, r_min, sampling(&plan, cfg)?)?;
    Ok((reject_truncated(curve)?, plan))
}

/// Integrated spatial trajectory from `t0` to the fill cut-off (or `t_min_end`, if later).
fn family_curve(spec: &TrajectoryFamilySpec, t_min_end: f64, cfg: &SuiteConfig) -> Result<(Curve, Plan)> {
    let (plan, t_end) = family_plan(spec, cfg.sampling.scale_count, cfg.sampling.fill)?;
    let p = trajectory_point(spec, spec.t0)?;
    let init = [p[0], p[1], system_height(spec, spec.t0)];
    let curve = integrate_cubic_system(
        spec,
        init,
        (spec.t0, t_end.max(t_min_end)),
        tolerances(cfg)?,
        sampling(&plan, cfg)?,
    )?;
    Ok((reject_truncated(curve)?, plan))
}

fn fmt_pair(alpha: f64, gamma: f64) -> String {
    format!("a{alpha}_g{gamma}")
}

/// Planar spirals `r = φ^(−α)` and `(α, β)`-chirp graphs with known dimensions.
pub fn suite_tricot_baselines(cfg: &SuiteConfig) -> SuiteResult {
    let tol = cfg.tolerance.planar;
    let count = cfg.sampling.scale_count;
    let mut jobs: Vec<Job> = Vec::new();
    for &alpha in &cfg.tricot.spiral_alphas {
        jobs.push(Box::new(move || {
            let id = format!("spiral_a{alpha}");
            let spec_str = format!("alpha={alpha}");
            let predicted = 2.0 / (1.0 + alpha.min(1.0));
            let counts = PowerSpiralSpec::new(alpha)
                .and_then(|spec| spiral_curve(&spec, count, cfg.sampling.fill, cfg))
                .and_then(|(curve, plan)| counts_on(&curve, &plan.ladder()?));
            vec![dimension_row(id, spec_str, predicted, tol, counts).0]
        }));
    }
    let beta = cfg.tricot.chirp_beta;
    for &alpha in &cfg.tricot.chirp_alphas {
        jobs.push(Box::new(move || {
            let id = format!("chirp_a{alpha}_b{beta}");
            let spec_str = format!("alpha={alpha} beta={beta}");
            let counts = ChirpSpec::new(alpha, beta).and_then(|spec| {
                let (plan, tau_min) = chirp_plan(&spec, 1.0, count, cfg.sampling.fill)?;
                let curve = reject_truncated(gen_chirp_graph(&spec, 1.0, tau_min, sampling(&plan, cfg)?)?)?;
                counts_on(&curve, &plan.ladder()?)
            });
            let predicted = 2.0 - (alpha + beta) / (1.0 + beta);
            vec![dimension_row(id, spec_str, predicted, tol, counts).0]
        }));
    }
    run_jobs("tricot", jobs)
}

/// Estimate and band of the spatial trajectory for one `(α, γ)` pair.
fn trajectory_estimate(alpha: f64, gamma: f64, cfg: &SuiteConfig) -> (Row, Option<f64>) {
    let id = format!("trajectory_{}", fmt_pair(alpha, gamma));
    let spec_str = format!("alpha={alpha} gamma={gamma}");
    let spec = TrajectoryFamilySpec::new(alpha, gamma);
    let predicted = spec.as_ref().map(|s| s.predicted_dimension()).unwrap_or(f64::NAN);
    let counts = spec
        .and_then(|s| family_curve(&s, s.t0, cfg))
        .and_then(|(curve, plan)| counts_on(&curve, &plan.ladder()?));
    dimension_row(id, spec_str, predicted, cfg.tolerance.spatial, counts)
}

/// Spatial trajectories of the `(α, γ)` family: dimension rows, the envelope
/// `2/(1+α) ≤ dim < 2−α`, continuity across `γ = α`, and rectifiability for `α > 1`.
pub fn suite_theorem_phase(cfg: &SuiteConfig) -> SuiteResult {
    let mut jobs: Vec<Job> = Vec::new();
    let tol = cfg.tolerance.spatial;
    for &[alpha, gamma] in &cfg.theorem_phase.grid {
        if alpha > 1.0 {
            jobs.push(Box::new(move || rectifiable_rows(alpha, gamma, cfg)));
            continue;
        }
        jobs.push(Box::new(move || {
            let (row, _) = trajectory_estimate(alpha, gamma, cfg);
            let mut rows = vec![];
            if alpha > 0.0 && alpha < 1.0 {
                let (lo, hi) = (2.0 / (1.0 + alpha), 2.0 - alpha);
                let inside = row.estimated + tol >= lo && row.estimated - tol < hi;
                rows.push(
                    Row::new(
                        format!("envelope_{}", fmt_pair(alpha, gamma)),
                        "envelope",
                        format!("alpha={alpha} gamma={gamma}"),
                        1.0,
                        if inside { 1.0 } else { 0.0 },
                        0.0,
                        0.0,
                    )
                    .with_note(format!("[{lo:.6}, {hi:.6}) with slack {tol}")),
                );
            }
            rows.insert(0, row);
            rows
        }));
    }
    let off = cfg.theorem_phase.continuity_offset;
    let mut diagonal: Vec<f64> = cfg
        .theorem_phase
        .grid
        .iter()
        .filter(|[a, g]| a == g && *a < 1.0)
        .map(|[a, _]| *a)
        .collect();
    diagonal.dedup();
    for alpha in diagonal {
        jobs.push(Box::new(move || {
            let spec_str = format!("alpha={alpha} offset={off}");
            let below = 2.0 - 2.0 * alpha / (1.0 + alpha);
            let above = 2.0 / (1.0 + alpha);
            let mut rows = vec![Row::new(
                format!("continuity_a{alpha}_prediction"),
                "continuity",
                spec_str.clone(),
                above,
                below,
                0.0,
                1e-12,
            )];
            let (hi_row, hi_band) = trajectory_estimate(alpha, alpha * (1.0 + off), cfg);
            let (lo_row, lo_band) = trajectory_estimate(alpha, alpha * (1.0 - off), cfg);
            let id = format!("continuity_a{alpha}_estimates");
            rows.push(match (hi_band, lo_band) {
                (Some(b1), Some(b2)) => Row::new(
                    id,
                    "continuity",
                    spec_str,
                    0.0,
                    (hi_row.estimated - lo_row.estimated).abs(),
                    2.0 * b1.max(b2),
                    0.0,
                )
                .with_note(format!(
                    "above={:.6} below={:.6}",
                    hi_row.estimated, lo_row.estimated
                )),
                _ => Row::new(id, "continuity", spec_str, 0.0, f64::NAN, 0.0, 0.0)
                    .with_note(format!("{} | {}", hi_row.note, lo_row.note)),
            });
            rows
        }));
    }
    run_jobs("theorem_phase", jobs)
}

fn rectifiable_rows(alpha: f64, gamma: f64, cfg: &SuiteConfig) -> Vec<Row> {
    let id = fmt_pair(alpha, gamma);
    let spec_str = format!("alpha={alpha} gamma={gamma}");
    let curve = TrajectoryFamilySpec::new(alpha, gamma)
        .and_then(|s| family_curve(&s, cfg.theorem_phase.rectifiable_t_max, cfg));
    match curve {
        Ok((curve, plan)) => {
            let counts = plan.ladder().and_then(|l| counts_on(&curve, &l));
            let dim = dimension_row(
                format!("trajectory_{id}"),
                spec_str.clone(),
                1.0,
                cfg.tolerance.spatial,
                counts,
            )
            .0;
            let verdict = match arc_length_profile(&curve) {
                Ok(rep) => Row::verdict(
                    format!("rectifiability_{id}"),
                    spec_str,
                    Rectifiability::Rectifiable.code(),
                    rep.verdict.code(),
                )
                .with_note(format!(
                    "{} tail_slope={:.6} length={:.9}",
                    rep.verdict.as_str(),
                    rep.tail_slope,
                    rep.total
                )),
                Err(e) => Row::failed(format!("rectifiability_{id}"), "verdict", spec_str, 0.0, 0.0, &e),
            };
            vec![dim, verdict]
        }
        Err(e) => vec![
            Row::failed(
                format!("trajectory_{id}"),
                "dimension",
                spec_str.clone(),
                1.0,
                cfg.tolerance.spatial,
                &e,
            ),
            Row::failed(format!("rectifiability_{id}"), "verdict", spec_str, 0.0, 0.0, &e),
        ],
    }
}

/// Coordinate-plane projections `G_xz`, `G_yz` and the reflected oscillatory graph.
pub fn suite_projections(cfg: &SuiteConfig) -> SuiteResult {
    let tol = cfg.tolerance.planar;
    let mut jobs: Vec<Job> = Vec::new();
    for &[alpha, gamma] in &cfg.projections.grid {
        jobs.push(Box::new(move || {
            let spec_str = format!("alpha={alpha} gamma={gamma}");
            let spec = TrajectoryFamilySpec::new(alpha, gamma);
            let predicted = 2.0 - (alpha + gamma) / (1.0 + gamma);
            let curve = spec.and_then(|s| family_curve(&s, s.t0, cfg));
            [Plane::Xz, Plane::Yz]
                .iter()
                .map(|&plane| {
                    let id = format!("{}_{}", plane.as_str(), fmt_pair(alpha, gamma));
                    let counts = match &curve {
                        Ok((c, plan)) => project(c, plane).and_then(|p| counts_on(&p, &plan.ladder()?)),
                        Err(e) => Err(Error::invalid("curve", e.to_string())),
                    };
                    dimension_row(id, spec_str.clone(), predicted, tol, counts).0
                })
                .collect()
        }));
    }
    for &alpha in &cfg.projections.oscillatory_alphas {
        jobs.push(Box::new(move || {
            let id = format!("oscillatory_a{alpha}");
            let spec_str = format!("alpha={alpha} gamma=1");
            let counts = TrajectoryFamilySpec::new(alpha, 1.0).and_then(|spec| {
                // The reflected graph is an (α, 1)-chirp on τ ∈ (0, 1/t0].
                let chirp = ChirpSpec::new(alpha, 1.0)?;
                let (plan, tau_min) =
                    chirp_plan(&chirp, 1.0 / spec.t0, cfg.sampling.scale_count, cfg.sampling.fill)?;
                let curve = gen_reflected_graph(&spec, 1.0 / tau_min, sampling(&plan, cfg)?)?;
                counts_on(&curve, &plan.ladder()?)
            });
            vec![dimension_row(id, spec_str, (3.0 - alpha) / 2.0, tol, counts).0]
        }));
    }
    run_jobs("projections", jobs)
}

/// Return-map exponent `−d(r) ≃ r^(1/α+1)` on the planar trajectory `(x, ẋ)`.
pub fn suite_poincare(cfg: &SuiteConfig) -> SuiteResult {
    let pc = &cfg.poincare;
    let tol = cfg.tolerance.exponent;
    let jobs: Vec<Job> = pc
        .alphas
        .iter()
        .map(|&alpha| -> Job {
            Box::new(move || {
                let id = format!("poincare_a{alpha}");
                let spec_str = format!(
                    "alpha={alpha} t0={} t_max={} section={}",
                    pc.t0, pc.t_max, pc.section_angle
                );
                let predicted = 1.0 / alpha + 1.0;
                let result = (|| {
                    let spec = TrajectoryFamilySpec::new(alpha, 1.0)?.with_t0(pc.t0)?;
                    let chord = 1e-4 * spec.t0.powf(-alpha);
                    let curve =
                        gen_phase_trajectory(&spec, pc.t_max, Sampling::new(chord, cfg.sampling.budget)?)?;
                    let profile = unwrap_phase(&project(&curve, Plane::Xy)?)?;
                    let seq = poincare_sequence(&profile, pc.section_angle)?;
                    Ok::<_, Error>((fit_return_exponent(&seq)?, seq))
                })();
                let row = match result {
                    Ok((est, seq)) => {
                        Row::new(id, "exponent", spec_str, predicted, est.exponent, est.band, tol).with_note(
                            format!(
                                "returns={} interpolation_error={:.3e}",
                                est.returns, seq.interpolation_error
                            ),
                        )
                    }
                    Err(e) => Row::failed(id, "exponent", spec_str, predicted, tol, &e),
                };
                vec![row]
            })
        })
        .collect();
    run_jobs("poincare", jobs)
}

fn hopf_row(l: u32, p: usize, cfg: &SuiteConfig) -> Row {
    let hc = &cfg.hopf;
    let id = format!("hopf_l{l}_p{p}");
    let spec_str = format!("l={l} p={p} b_p={} t_offset={}", hc.b_p, hc.t_offset);
    let spec = NormalFormSpec::reduced(l, p, hc.b_p).map(|s| s.with_focus(Focus::Attracting));
    let predicted = spec
        .as_ref()
        .ok()
        .and_then(|s| s.predicted_dimension())
        .unwrap_or(f64::NAN);
    let counts = spec.and_then(|spec| {
        let init = hopf_initial(&spec, hc.t_offset)?;
        let (plan, t_end) = hopf_plan(&spec, hc.t_offset, cfg.sampling.scale_count, cfg.sampling.fill)?;
        let curve =
            integrate_normal_form(&spec, init, (0.0, t_end), tolerances(cfg)?, sampling(&plan, cfg)?)?;
        counts_on(&reject_truncated(curve)?, &plan.ladder()?)
    });
    dimension_row(id, spec_str, predicted, cfg.tolerance.spatial, counts).0
}

/// Reduced normal form with an attracting focus: dimension near the origin for
/// `l = 1`, plus experimental `l = 2` rows.
pub fn suite_hopf(cfg: &SuiteConfig) -> SuiteResult {
    let mut jobs: Vec<Job> = Vec::new();
    for &p in &cfg.hopf.ps {
        jobs.push(Box::new(move || vec![hopf_row(1, p, cfg)]));
    }
    for &p in &cfg.hopf.experimental_l2_ps {
        jobs.push(Box::new(move || vec![hopf_row(2, p, cfg).experimental()]));
    }
    run_jobs("hopf", jobs)
}

/// Spirals `r = φ^(−α)(log φ)^β`: same dimension for every `β`, but the
/// Minkowski content degenerates once `β > 0`.
pub fn suite_degenerate_content(cfg: &SuiteConfig) -> SuiteResult {
    let cc = &cfg.content;
    let jobs: Vec<Job> = cc
        .log_exponents
        .iter()
        .map(|&beta| -> Job {
            Box::new(move || {
                let spec_str = format!("alpha={} beta={beta}", cc.alpha);
                let predicted = 2.0 / (1.0 + cc.alpha);
                let spec = PowerSpiralSpec::new(cc.alpha).and_then(|mut s| {
                    s.log_exponent = beta;
                    s.phi_min = s.phi_min.max(s.decreasing_from());
                    s.validate()?;
                    Ok(s)
                });
                let curve = spec.and_then(|s| spiral_curve(&s, cc.scale_count, cc.fill, cfg));
                let counts = curve
                    .as_ref()
                    .map_err(|e| Error::invalid("curve", e.to_string()))
                    .and_then(|(c, plan)| counts_on(c, &plan.ladder()?));
                let dim = dimension_row(
                    format!("content_b{beta}_dimension"),
                    spec_str.clone(),
                    predicted,
                    cfg.tolerance.planar,
                    counts,
                )
                .0;
                let expected = if beta == 0.0 {
                    ContentVerdict::Nondegenerate
                } else {
                    ContentVerdict::DegenerateDrift
                };
                let vid = format!("content_b{beta}_verdict");
                let verdict = curve
                    .and_then(|(c, plan)| {
                        let ladder = plan.ladder()?;
                        let measure = epsilon_measure(&c, &ladder, cc.raster_fraction * ladder.eps_min())?;
                        content_profile(&measure, predicted)
                    })
                    .map(|prof| {
                        Row::verdict(
                            vid.clone(),
                            spec_str.clone(),
                            expected.code(),
                            prof.verdict.code(),
                        )
                        .with_note(format!(
                            "{} spread={:.4} monotone={}",
                            prof.verdict.as_str(),
                            prof.spread,
                            prof.monotone
                        ))
                    })
                    .unwrap_or_else(|e| {
                        Row::failed(vid, "verdict", spec_str, expected.code() as f64, 0.0, &e)
                    });
                vec![dim, verdict]
            })
        })
        .collect();
    run_jobs("content", jobs)
}

/// Every suite in the standard order.
pub fn run_all(cfg: &SuiteConfig) -> Result<Vec<SuiteResult>> {
    super::SUITE_IDS.iter().map(|id| run_suite(id, cfg)).collect()
}
