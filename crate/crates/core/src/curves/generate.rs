use std::f64::consts::PI;

use super::family::{jet_unchecked, phase_pair, trajectory_point};
use super::sampler::{sample_path, PathSpec, Sampling};
use super::spec::{ChirpSpec, PowerSpiralSpec, TrajectoryFamilySpec};
use crate::curve::{fmt_num, Asymptote, Curve};
use crate::error::{Error, Result};

/// Smallest budget any generator accepts.
pub const MIN_BUDGET: usize = 1000;

fn check_budget(sampling: &Sampling) -> Result<()> {
    sampling.validate()?;
    if sampling.budget < MIN_BUDGET {
        return Err(Error::invalid(
            "budget",
            format!("{} is below the minimum of {MIN_BUDGET}", sampling.budget),
        ));
    }
    Ok(())
}

/// Samples needed for the first full oscillation, refused when over budget.
fn check_first_oscillation<F, G>(spec: &PathSpec<F, G>, s0: f64, s1: f64, sampling: Sampling) -> Result<()>
where
    F: Fn(f64) -> [f64; 3],
    G: Fn(f64) -> f64,
{
    let probe = sample_path(
        spec,
        s0,
        s1,
        Sampling {
            budget: usize::MAX,
            ..sampling
        },
    );
    if probe.params.len() > sampling.budget {
        return Err(Error::BudgetTooSmall {
            budget: sampling.budget,
            required: probe.params.len(),
        });
    }
    Ok(())
}

/// Graph `(τ, X(τ))` of a chirp for `τ` from `tau_max` down toward 0.
///
/// With `tau_min = 0` sampling continues until the budget is spent; otherwise it
/// stops at `tau_min` and the curve is flagged truncated if the budget runs out first.
pub fn gen_chirp_graph(spec: &ChirpSpec, tau_max: f64, tau_min: f64, sampling: Sampling) -> Result<Curve> {
    spec.validate()?;
    check_budget(&sampling)?;
    if !(tau_max > 0.0 && tau_max <= 1.0) {
        return Err(Error::invalid("tau_max", format!("{tau_max} must lie in (0, 1]")));
    }
    if !(tau_min >= 0.0 && tau_min < tau_max) {
        return Err(Error::invalid(
            "tau_min",
            format!("{tau_min} must lie in [0, tau_max)"),
        ));
    }
    let path = PathSpec {
        dim: 2,
        point: |tau: f64| [tau, spec.value(tau), 0.0],
        phase: |tau: f64| tau.powf(-spec.beta),
        polar_limit: false,
    };
    let tau_one = (tau_max.powf(-spec.beta) + 2.0 * PI).powf(-1.0 / spec.beta);
    check_first_oscillation(&path, tau_max, tau_one, sampling)?;
    let out = sample_path(&path, tau_max, tau_min, sampling);
    let reached = *out.params.last().unwrap();
    let provenance = spec
        .provenance("chirp_graph", Asymptote::ParamToZero)
        .with("tau_max", tau_max)
        .with("tau_min", tau_min)
        .with("tau_end", fmt_num(reached))
        .with("max_chord_target", sampling.max_chord);
    let curve = Curve::new(2, out.params, out.coords, provenance)?;
    Ok(if !out.complete && tau_min > 0.0 {
        curve.with_truncation(format!("budget exhausted at tau = {reached:e}"))
    } else {
        curve
    })
}

/// Angle at which the spiral radius first drops to `r_min` on its decreasing branch.
pub fn spiral_end_angle(spec: &PowerSpiralSpec, r_min: f64) -> f64 {
    let start = spec.decreasing_from();
    if spec.radius(start) <= r_min {
        return start;
    }
    let mut hi = start * 2.0;
    while spec.radius(hi) > r_min {
        hi *= 2.0;
    }
    let mut lo = hi / 2.0;
    lo = lo.max(start);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if spec.radius(mid) > r_min {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    hi
}

/// Polar spiral `r = φ^(−α)(log φ)^β` from `phi_min` until the radius reaches `r_min`.
pub fn gen_power_spiral(spec: &PowerSpiralSpec, r_min: f64, sampling: Sampling) -> Result<Curve> {
    spec.validate()?;
    check_budget(&sampling)?;
    if !(r_min > 0.0 && r_min < spec.radius(spec.phi_min)) {
        return Err(Error::invalid(
            "r_min",
            format!(
                "{r_min} must lie in (0, r(phi_min) = {})",
                spec.radius(spec.phi_min)
            ),
        ));
    }
    let phi_end = spiral_end_angle(spec, r_min);
    let sign = if spec.mirror { -1.0 } else { 1.0 };
    let path = PathSpec {
        dim: 2,
        point: |phi: f64| {
            let r = spec.radius(phi);
            let (s, c) = phi.sin_cos();
            [r * c, sign * r * s, 0.0]
        },
        phase: |phi: f64| phi,
        polar_limit: true,
    };
    let out = sample_path(&path, spec.phi_min, phi_end, sampling);
    if !out.complete {
        return Err(Error::PartialCurve {
            budget: sampling.budget,
            reached_radius: spec.radius(*out.params.last().unwrap()),
            r_min,
        });
    }
    let provenance = spec
        .provenance()
        .with("r_min", r_min)
        .with("phi_end", fmt_num(phi_end))
        .with("max_chord_target", sampling.max_chord);
    Curve::new(2, out.params, out.coords, provenance)
}

/// Closed-form spatial trajectory `(x, ẋ, (t − C3)^(−γ))` for `t ∈ [t0, t_max]`.
pub fn gen_phase_trajectory(spec: &TrajectoryFamilySpec, t_max: f64, sampling: Sampling) -> Result<Curve> {
    spec.validate()?;
    check_budget(&sampling)?;
    if !(t_max > spec.t0) {
        return Err(Error::invalid(
            "t_max",
            format!("{t_max} must exceed t0 = {}", spec.t0),
        ));
    }
    let path = PathSpec {
        dim: 3,
        point: |t: f64| trajectory_point(spec, t).expect("t within [t0, t_max]"),
        phase: |t: f64| jet_unchecked(spec, t, 0).q[0],
        polar_limit: true,
    };
    let t_one = one_turn_later(spec, spec.t0).min(t_max);
    check_first_oscillation(&path, spec.t0, t_one, sampling)?;
    let out = sample_path(&path, spec.t0, t_max, sampling);
    if !out.complete {
        return Err(Error::BudgetExhausted {
            budget: sampling.budget,
            reached: *out.params.last().unwrap(),
            target: t_max,
        });
    }
    let provenance = spec
        .provenance("phase_trajectory")
        .with("t_max", t_max)
        .with("max_chord_target", sampling.max_chord);
    Curve::new(3, out.params, out.coords, provenance)
}

/// Graph `(τ, x(1/τ))` of the reflected solution for `τ ∈ [1/t_max, 1/t0]`.
pub fn gen_reflected_graph(spec: &TrajectoryFamilySpec, t_max: f64, sampling: Sampling) -> Result<Curve> {
    spec.validate()?;
    check_budget(&sampling)?;
    if !(t_max > spec.t0) {
        return Err(Error::invalid(
            "t_max",
            format!("{t_max} must exceed t0 = {}", spec.t0),
        ));
    }
    let path = PathSpec {
        dim: 2,
        point: |tau: f64| {
            let jet = jet_unchecked(spec, 1.0 / tau, 1);
            [tau, phase_pair(spec, &jet).0, 0.0]
        },
        phase: |tau: f64| jet_unchecked(spec, 1.0 / tau, 0).q[0],
        polar_limit: false,
    };
    let tau_max = 1.0 / spec.t0;
    let tau_one = 1.0 / one_turn_later(spec, spec.t0).min(t_max);
    check_first_oscillation(&path, tau_max, tau_one, sampling)?;
    let out = sample_path(&path, tau_max, 1.0 / t_max, sampling);
    if !out.complete {
        return Err(Error::BudgetExhausted {
            budget: sampling.budget,
            reached: 1.0 / *out.params.last().unwrap(),
            target: t_max,
        });
    }
    let mut provenance = spec
        .provenance("reflected_graph")
        .with("t_max", t_max)
        .with("max_chord_target", sampling.max_chord);
    provenance.asymptote = Asymptote::ParamToZero;
    Curve::new(2, out.params, out.coords, provenance)
}

/// Phase curve `(x(t), ẋ(t))` of `x(t) = X(1/t)` for a chirp `X`, `t ∈ [t0, t_max]`.
pub fn gen_chirp_phase_curve(spec: &ChirpSpec, t0: f64, t_max: f64, sampling: Sampling) -> Result<Curve> {
    spec.validate()?;
    check_budget(&sampling)?;
    if !(t0 > 0.0 && t_max > t0) {
        return Err(Error::invalid(
            "t_max",
            format!("need 0 < t0 < t_max, got {t0}, {t_max}"),
        ));
    }
    let (a, b) = (spec.alpha, spec.beta);
    let path = PathSpec {
        dim: 2,
        point: |t: f64| {
            let u = t.powf(b) + spec.phase_shift;
            let amp = t.powf(-a);
            let x = amp * spec.trig.eval(u);
            let dx = -a * amp / t * spec.trig.eval(u) + amp * spec.trig.deriv(u) * b * t.powf(b - 1.0);
            [x, dx, 0.0]
        },
        phase: |t: f64| t.powf(b),
        polar_limit: true,
    };
    let t_one = (t0.powf(b) + 2.0 * PI).powf(1.0 / b).min(t_max);
    check_first_oscillation(&path, t0, t_one, sampling)?;
    let out = sample_path(&path, t0, t_max, sampling);
    if !out.complete {
        return Err(Error::BudgetExhausted {
            budget: sampling.budget,
            reached: *out.params.last().unwrap(),
            target: t_max,
        });
    }
    let provenance = spec
        .provenance("chirp_phase_curve", Asymptote::ParamToInfinity)
        .with("t0", t0)
        .with("t_max", t_max)
        .with("max_chord_target", sampling.max_chord);
    Curve::new(2, out.params, out.coords, provenance)
}

/// Time at which `q` has advanced by one full turn from `t`.
pub fn one_turn_later(spec: &TrajectoryFamilySpec, t: f64) -> f64 {
    let q0 = jet_unchecked(spec, t, 0).q[0];
    let target = q0 + 2.0 * PI;
    let mut lo = t;
    let mut hi = t + 2.0 * PI / jet_unchecked(spec, t, 1).q[1].max(1e-300);
    while jet_unchecked(spec, hi, 0).q[0] < target {
        hi = t + 2.0 * (hi - t);
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if jet_unchecked(spec, mid, 0).q[0] < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}
