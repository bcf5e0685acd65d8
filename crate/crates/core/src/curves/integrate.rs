use super::family::{jet_unchecked, uv_from_jet};
use super::ode::{integrate, Step, Tolerances};
use super::sampler::{Sampling, MAX_PHASE_STEP, MAX_POLAR_STEP};
use super::spec::{NormalFormSpec, TrajectoryFamilySpec};
use crate::curve::{dist, fmt_num, Curve};
use crate::error::{Error, Result};

/// Collects dense-output samples with bounded chord, phase and polar steps.
struct Emitter {
    sampling: Sampling,
    params: Vec<f64>,
    coords: Vec<f64>,
    last: [f64; 3],
    last_phase: f64,
}

impl Emitter {
    fn new(sampling: Sampling, t0: f64, p0: [f64; 3], phase0: f64) -> Self {
        Emitter {
            sampling,
            params: vec![t0],
            coords: p0.to_vec(),
            last: p0,
            last_phase: phase0,
        }
    }

    fn full(&self) -> bool {
        self.params.len() >= self.sampling.budget
    }

    fn fits(&self, p: &[f64; 3], phase: f64) -> bool {
        dist(p, &self.last) <= self.sampling.max_chord
            && (phase - self.last_phase).abs() <= MAX_PHASE_STEP
            && polar_step(&self.last, p) <= MAX_POLAR_STEP
    }

    fn push(&mut self, t: f64, p: [f64; 3], phase: f64) {
        self.params.push(t);
        self.coords.extend_from_slice(&p);
        self.last = p;
        self.last_phase = phase;
    }

    /// Emits samples covering one solver step, ending at its right endpoint.
    fn cover<const N: usize>(&mut self, step: &Step<N>, map: &impl Fn(f64, &[f64; N]) -> ([f64; 3], f64)) {
        let mut a = step.t0;
        while a != step.t1 && !self.full() {
            let mut b = step.t1;
            let (mut p, mut ph) = map(b, &step.y1);
            let mut depth = 0;
            while !self.fits(&p, ph) && depth < 60 {
                b = a + 0.5 * (b - a);
                (p, ph) = map(b, &step.interpolate(b));
                depth += 1;
            }
            self.push(b, p, ph);
            a = b;
        }
    }
}

fn polar_step(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let cross = a[0] * b[1] - a[1] * b[0];
    let dot = a[0] * b[0] + a[1] * b[1];
    cross.abs().atan2(dot)
}

/// Integrates the cubic system `ẋ = y`, `ẏ = −U(z)x + V(z)y`, `ż = −z^δ` over `t_range`.
///
/// The height is carried through the family time `T = γ z^(−1/γ)`, which advances
/// at unit rate, so `z = (γ/T)^γ` is exact and only `(x, y)` is integrated. `U` and
/// `V` come from [`super::family::eval_family`] at `T`. The curve is truncated (and
/// flagged) if `T` would leave the family domain or the budget runs out.
pub fn integrate_cubic_system(
    spec: &TrajectoryFamilySpec,
    init: [f64; 3],
    t_range: (f64, f64),
    tol: Tolerances,
    output: Sampling,
) -> Result<Curve> {
    spec.validate()?;
    output.validate()?;
    let z0 = (spec.gamma / spec.t0).powf(spec.gamma);
    if !(init[2] > 0.0 && init[2] <= z0 * (1.0 + 1e-12)) {
        return Err(Error::invalid(
            "init.z",
            format!("{} must lie in (0, z0 = {z0}]", init[2]),
        ));
    }
    let (s0, s1) = t_range;
    if !(s0.is_finite() && s1.is_finite() && s0 != s1) {
        return Err(Error::invalid("t_range", "needs two distinct finite times"));
    }
    let big_t0 = (spec.gamma * init[2].powf(-1.0 / spec.gamma)).max(spec.t0);
    let family_time = |s: f64| big_t0 + (s - s0);
    let s_floor = s0 + (spec.t0 - big_t0);
    let (s_end, floor_hit) = if s1 < s_floor {
        (s_floor, true)
    } else {
        (s1, false)
    };

    let rhs = |s: f64, y: &[f64; 2]| -> [f64; 2] {
        let (u, v) = uv_from_jet(&jet_unchecked(spec, family_time(s), 2));
        [y[1], -u * y[0] + v * y[1]]
    };
    let height = |s: f64| (spec.gamma / family_time(s)).powf(spec.gamma);
    let phase = |s: f64| jet_unchecked(spec, family_time(s), 0).q[0];

    let mut em = Emitter::new(output, s0, [init[0], init[1], height(s0)], phase(s0));
    let mut steps = 0usize;
    integrate(rhs, s0, [init[0], init[1]], s_end, tol, f64::INFINITY, |step| {
        steps += 1;
        em.cover(step, &|s, y| ([y[0], y[1], height(s)], phase(s)));
        !em.full()
    })?;
    let reached = *em.params.last().unwrap();
    let mut provenance = spec
        .provenance("cubic_system")
        .with("t_start", s0)
        .with("t_end", s1)
        .with("rel_tol", tol.rel)
        .with("abs_tol", tol.abs)
        .with("solver_steps", steps)
        .with("max_chord_target", output.max_chord);
    if s1 < s0 {
        provenance.asymptote = crate::curve::Asymptote::None;
    }
    let curve = Curve::new(3, em.params, em.coords, provenance)?;
    Ok(if reached != s1 {
        let reason = if floor_hit {
            format!("family time reached t0 at t = {}", fmt_num(reached))
        } else {
            format!("sample budget exhausted at t = {}", fmt_num(reached))
        };
        curve.with_truncation(reason)
    } else {
        curve
    })
}

/// Radius below which the normal-form integration stops with a truncation flag.
pub const MIN_RADIUS: f64 = 1e-150;

/// Integrates the reduced normal form and returns `(r cos φ, r sin φ, z)`.
pub fn integrate_normal_form(
    spec: &NormalFormSpec,
    init: [f64; 3],
    t_range: (f64, f64),
    tol: Tolerances,
    output: Sampling,
) -> Result<Curve> {
    spec.validate()?;
    output.validate()?;
    if !(init[0] > 0.0 && init[0].is_finite()) {
        return Err(Error::invalid("init.r", format!("{} must be positive", init[0])));
    }
    let (s0, s1) = t_range;
    if !(s0.is_finite() && s1.is_finite() && s0 != s1) {
        return Err(Error::invalid("t_range", "needs two distinct finite times"));
    }
    let rhs =
        |_: f64, y: &[f64; 3]| -> [f64; 3] { [spec.radial_rate(y[0]), spec.omega, spec.vertical_rate(y[2])] };
    let cart = |_: f64, y: &[f64; 3]| {
        let (s, c) = y[1].sin_cos();
        ([y[0] * c, y[0] * s, y[2]], y[1])
    };
    let (p0, ph0) = cart(s0, &init);
    let mut em = Emitter::new(output, s0, p0, ph0);
    let mut collapsed = false;
    let mut steps = 0usize;
    integrate(rhs, s0, init, s1, tol, 0.5, |step| {
        steps += 1;
        if step.y1[0] < MIN_RADIUS || !step.y1[0].is_finite() {
            collapsed = true;
            return false;
        }
        em.cover(step, &cart);
        !em.full()
    })?;
    let reached = *em.params.last().unwrap();
    let mut provenance = spec
        .provenance()
        .with("t_start", s0)
        .with("t_end", s1)
        .with("rel_tol", tol.rel)
        .with("abs_tol", tol.abs)
        .with("solver_steps", steps)
        .with("max_chord_target", output.max_chord);
    provenance.spec.insert("r0".into(), init[0].to_string());
    provenance.spec.insert("z0".into(), init[2].to_string());
    let curve = Curve::new(3, em.params, em.coords, provenance)?;
    Ok(if collapsed {
        curve.with_truncation(format!(
            "radius fell below {MIN_RADIUS:e} at t = {}",
            fmt_num(reached)
        ))
    } else if reached != s1 {
        curve.with_truncation(format!("sample budget exhausted at t = {}", fmt_num(reached)))
    } else {
        curve
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curves::family::{system_height, trajectory_point};
    use crate::curves::spec::Focus;

    fn output(chord: f64) -> Sampling {
        Sampling::new(chord, 5_000_000).unwrap()
    }

    fn closed_form(spec: &TrajectoryFamilySpec, t: f64) -> [f64; 3] {
        let p = trajectory_point(spec, t).unwrap();
        [p[0], p[1], system_height(spec, t)]
    }

    #[test]
    fn cubic_system_tracks_closed_form() {
        let tol = Tolerances::new(1e-10, 1e-13).unwrap();
        for (alpha, gamma) in [(0.5, 1.0), (0.25, 0.25), (1.0, 2.0)] {
            let spec = TrajectoryFamilySpec::new(alpha, gamma)
                .unwrap()
                .with_t0(20.0)
                .unwrap();
            let init = closed_form(&spec, 20.0);
            let c = integrate_cubic_system(&spec, init, (20.0, 200.0), tol, output(1e-3)).unwrap();
            assert!(!c.is_truncated());
            let diam = c.diameter();
            let worst = c
                .params()
                .iter()
                .zip(c.points())
                .map(|(&t, p)| dist(p, &closed_form(&spec, t)))
                .fold(0.0, f64::max);
            assert!(
                worst < 10.0 * tol.rel * diam,
                "({alpha},{gamma}): {worst:e} vs diam {diam}"
            );
        }
    }

    #[test]
    fn height_solves_quadratic_decay_for_unit_gamma() {
        let spec = TrajectoryFamilySpec::new(0.5, 1.0).unwrap().with_t0(5.0).unwrap();
        let tol = Tolerances::new(1e-9, 1e-12).unwrap();
        let c =
            integrate_cubic_system(&spec, closed_form(&spec, 5.0), (5.0, 50.0), tol, output(1e-2)).unwrap();
        // ż = −z² with z(5) = 1/5 is solved by z = 1/t.
        for (t, p) in c.params().iter().zip(c.points()) {
            assert!((p[2] * t - 1.0).abs() < 1e-13, "t = {t}");
        }
    }

    #[test]
    fn cubic_system_rejects_z_above_z0() {
        let spec = TrajectoryFamilySpec::new(0.5, 1.0)
            .unwrap()
            .with_t0(20.0)
            .unwrap();
        let tol = Tolerances::new(1e-8, 1e-10).unwrap();
        assert!(integrate_cubic_system(&spec, [0.1, 0.0, 0.5], (0.0, 1.0), tol, output(1e-2)).is_err());
    }

    #[test]
    fn backward_run_stops_at_family_start() {
        let spec = TrajectoryFamilySpec::new(0.5, 1.0)
            .unwrap()
            .with_t0(20.0)
            .unwrap();
        let tol = Tolerances::new(1e-8, 1e-10).unwrap();
        let c =
            integrate_cubic_system(&spec, closed_form(&spec, 30.0), (30.0, 0.0), tol, output(1e-2)).unwrap();
        assert!(c.is_truncated());
        assert!((c.params().last().unwrap() - 20.0).abs() < 1e-9);
    }

    fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
        let n = xs.len() as f64;
        let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
        let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
        let mx = lx.iter().sum::<f64>() / n;
        let my = ly.iter().sum::<f64>() / n;
        let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
        sxy / sxx
    }

    #[test]
    fn backward_time_radius_decay() {
        let spec = NormalFormSpec::reduced(1, 2, -1.0).unwrap();
        let tol = Tolerances::new(1e-10, 1e-14).unwrap();
        let c = integrate_normal_form(&spec, [0.5, 0.0, 0.0], (0.0, -2000.0), tol, output(1e-2)).unwrap();
        let (ts, rs): (Vec<f64>, Vec<f64>) = c
            .params()
            .iter()
            .zip(c.points())
            .filter(|(t, _)| **t < -200.0)
            .map(|(t, p)| (-t, p[0].hypot(p[1])))
            .unzip();
        let slope = loglog_slope(&ts, &rs);
        assert!((slope + 0.5).abs() < 0.02, "{slope}");
    }

    #[test]
    fn separable_height() {
        let spec = NormalFormSpec::reduced(1, 2, -1.0).unwrap();
        let tol = Tolerances::new(1e-10, 1e-14).unwrap();
        let c = integrate_normal_form(&spec, [0.1, 0.0, 0.5], (0.0, 20.0), tol, output(1e-2)).unwrap();
        // z(t) = 1/(t + 2)
        for (t, p) in c.params().iter().zip(c.points()) {
            assert!((p[2] - 1.0 / (t + 2.0)).abs() < 1e-9);
        }
    }

    #[test]
    fn attracted_branch_height_radius_relation() {
        for p in [2usize, 3, 4, 6] {
            let spec = NormalFormSpec::reduced(1, p, -1.0)
                .unwrap()
                .with_focus(Focus::Attracting);
            let tol = Tolerances::new(1e-10, 1e-14).unwrap();
            let z0 = ((p as f64 - 1.0) * 1.0).powf(-1.0 / (p as f64 - 1.0));
            let c = integrate_normal_form(&spec, [0.5f64.sqrt(), 0.0, z0], (1.0, 4000.0), tol, output(1e-2))
                .unwrap();
            let (rs, zs): (Vec<f64>, Vec<f64>) = c
                .params()
                .iter()
                .zip(c.points())
                .filter(|(t, _)| **t > 100.0)
                .map(|(_, q)| (q[0].hypot(q[1]), q[2]))
                .unzip();
            let slope = loglog_slope(&rs, &zs);
            let expected = 2.0 / (p as f64 - 1.0);
            assert!((slope - expected).abs() < 0.05, "p = {p}: {slope}");
        }
    }

    #[test]
    fn normal_form_chords_and_turns() {
        let spec = NormalFormSpec::reduced(1, 3, -1.0)
            .unwrap()
            .with_focus(Focus::Attracting);
        let tol = Tolerances::new(1e-9, 1e-13).unwrap();
        let c = integrate_normal_form(&spec, [0.5, 0.0, 0.3], (0.0, 100.0), tol, output(5e-3)).unwrap();
        assert!(c.max_chord() <= 5e-3);
        for w in c.params().windows(2) {
            assert!(w[1] - w[0] <= MAX_PHASE_STEP + 1e-12);
        }
    }
}
