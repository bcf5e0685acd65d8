//! Sampling plans: chord bound from the finest scale, cut-off from the fill rule.

use std::f64::consts::PI;

use crate::curves::{
    one_turn_later, trajectory_point, ChirpSpec, NormalFormSpec, PowerSpiralSpec, TrajectoryFamilySpec,
};
use crate::error::{Error, Result};
use crate::fractal::ScaleLadder;

/// Ladder and chord bound for a curve of known (approximate) diameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Plan {
    pub diameter: f64,
    pub count: usize,
    pub fill: f64,
}

impl Plan {
    pub fn new(diameter: f64, count: usize, fill: f64) -> Result<Self> {
        if !(diameter > 0.0 && diameter.is_finite()) {
            return Err(Error::invalid("diameter", format!("{diameter} must be positive")));
        }
        if !(fill > 0.0 && fill <= 1.0) {
            return Err(Error::invalid("fill", format!("{fill} must lie in (0, 1]")));
        }
        Ok(Plan {
            diameter,
            count,
            fill,
        })
    }

    pub fn ladder(&self) -> Result<ScaleLadder> {
        ScaleLadder::geometric(self.diameter / 4.0, ScaleLadder::DEFAULT_RATIO, self.count)
    }

    pub fn eps_min(&self) -> f64 {
        ScaleLadder::planned_eps_min(self.diameter, self.count)
    }

    /// A quarter of the finest scale.
    pub fn chord(&self) -> f64 {
        self.eps_min() / 4.0
    }

    /// Gap between neighbouring turns at which generation stops.
    pub fn cutoff_gap(&self) -> f64 {
        self.fill * self.eps_min()
    }
}

/// Smallest `t ≥ start` with `gap(t) ≤ target`, for a gap decreasing in `t`.
pub fn solve_gap(gap: impl Fn(f64) -> f64, start: f64, target: f64) -> Result<f64> {
    if gap(start) <= target {
        return Ok(start);
    }
    let mut hi = start * 2.0 + 1.0;
    while gap(hi) > target {
        hi *= 2.0;
        if hi > 1e15 {
            return Err(Error::invalid("fill", "turn gap never reaches the cut-off"));
        }
    }
    let mut lo = start;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Plan and end angle for a power spiral starting at its decreasing branch.
pub fn spiral_plan(spec: &PowerSpiralSpec, count: usize, fill: f64) -> Result<(Plan, f64)> {
    let phi0 = spec.phi_min.max(spec.decreasing_from());
    let plan = Plan::new(2.0 * spec.radius(phi0), count, fill)?;
    let gap = |phi: f64| (spec.radius(phi) - spec.radius(phi + 2.0 * PI)).abs();
    let phi_end = solve_gap(gap, phi0, plan.cutoff_gap())?;
    Ok((plan, spec.radius(phi_end)))
}

/// Plan and `τ_min` for a chirp graph over `τ ∈ (0, tau_max]`: the cut-off
/// is where the half-period `π τ^(β+1)/β` reaches the fill gap.
pub fn chirp_plan(spec: &ChirpSpec, tau_max: f64, count: usize, fill: f64) -> Result<(Plan, f64)> {
    let plan = Plan::new(tau_max.hypot(2.0 * tau_max.powf(spec.alpha)), count, fill)?;
    let tau_min = (spec.beta * plan.cutoff_gap() / PI).powf(1.0 / (spec.beta + 1.0));
    Ok((plan, tau_min.min(0.5 * tau_max)))
}

/// Spacing between consecutive turns of the closed-form trajectory at time `t`.
pub fn family_turn_gap(spec: &TrajectoryFamilySpec, t: f64) -> f64 {
    let t1 = one_turn_later(spec, t);
    let amp = spec.amplitude();
    let p = |t: f64| {
        crate::curves::eval_family(spec, t, 0)
            .map(|j| j.p[0])
            .unwrap_or(0.0)
    };
    let z = |t: f64| (t - spec.c3).powf(-spec.gamma);
    (amp * (p(t) - p(t1))).hypot(z(t) - z(t1))
}

/// Bounding-box diagonal of the trajectory over its first `span` time units.
pub fn family_diameter(spec: &TrajectoryFamilySpec, span: f64) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for i in 0..=4000 {
        let t = spec.t0 + span * i as f64 / 4000.0;
        if let Ok(p) = trajectory_point(spec, t) {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
    }
    (0..3).map(|k| (hi[k] - lo[k]).powi(2)).sum::<f64>().sqrt()
}

/// Plan and end time for a spatial trajectory of the family.
pub fn family_plan(spec: &TrajectoryFamilySpec, count: usize, fill: f64) -> Result<(Plan, f64)> {
    let plan = Plan::new(family_diameter(spec, 50.0), count, fill)?;
    let t_end = solve_gap(|t| family_turn_gap(spec, t), spec.t0, plan.cutoff_gap())?;
    Ok((plan, t_end.max(one_turn_later(spec, spec.t0))))
}

/// Start of the attracted branch of the reduced normal form: `(r0, z0)` on the
/// exact solutions `r = (2l(t + T0))^(−1/(2l))`, `z = ((p − 1)|b_p|(t + T0))^(−1/(p−1))`.
pub fn hopf_initial(spec: &NormalFormSpec, t_offset: f64) -> Result<[f64; 3]> {
    let p = spec
        .p_index()
        .ok_or_else(|| Error::invalid("b", "needs a nonzero coefficient"))?;
    let b = spec.b[p - 2].abs();
    let l = spec.l as f64;
    let r0 = (2.0 * l * t_offset).powf(-1.0 / (2.0 * l));
    let z0 = ((p as f64 - 1.0) * b * t_offset).powf(-1.0 / (p as f64 - 1.0));
    Ok([r0, 0.0, z0])
}

/// Plan and end time for a reduced normal-form trajectory started by [`hopf_initial`].
pub fn hopf_plan(spec: &NormalFormSpec, t_offset: f64, count: usize, fill: f64) -> Result<(Plan, f64)> {
    let [r0, _, z0] = hopf_initial(spec, t_offset)?;
    let p = spec.p_index().unwrap() as f64;
    let b = spec.b[p as usize - 2].abs();
    let l = spec.l as f64;
    let r = |t: f64| (2.0 * l * (t + t_offset)).powf(-1.0 / (2.0 * l));
    let z = |t: f64| ((p - 1.0) * b * (t + t_offset)).powf(-1.0 / (p - 1.0));
    let period = 2.0 * PI / spec.omega.abs();
    let plan = Plan::new((8.0 * r0 * r0 + z0 * z0).sqrt(), count, fill)?;
    let gap = |t: f64| (r(t) - r(t + period)).hypot(z(t) - z(t + period));
    let t_end = solve_gap(gap, 0.0, plan.cutoff_gap())?;
    Ok((plan, t_end))
}
