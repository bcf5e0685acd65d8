use super::spec::TrajectoryFamilySpec;
use crate::error::{Error, Result};

/// Values and derivatives `p, p', p'', p'''` and `q, q', q'', q'''` at one time.
///
/// Entries beyond the requested order are NaN.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FamilyJet {
    pub p: [f64; 4],
    pub q: [f64; 4],
}

/// Closed-form `p(t) = t^(−α) log^k t` and `q(t) = K t log^l t` with derivatives
/// up to `order` (at most 3).
pub fn eval_family(spec: &TrajectoryFamilySpec, t: f64, order: usize) -> Result<FamilyJet> {
    if order > 3 {
        return Err(Error::invalid("derivative_order", format!("{order} exceeds 3")));
    }
    if !(t >= spec.t0) {
        return Err(Error::Domain { t, t0: spec.t0 });
    }
    Ok(jet_unchecked(spec, t, order))
}

pub(crate) fn jet_unchecked(spec: &TrajectoryFamilySpec, t: f64, order: usize) -> FamilyJet {
    let mut q = power_log_jet(t, 1.0, spec.log_q_exponent, order);
    for v in q.iter_mut() {
        *v *= spec.k_slope;
    }
    FamilyJet {
        p: power_log_jet(t, -spec.alpha, spec.log_p_exponent, order),
        q,
    }
}

/// Derivatives of `t^m (log t)^k`.
///
/// The j-th derivative is `t^(m−j) P_j(log t)` with `P_0 = L^k` and
/// `P_{j+1} = (m − j) P_j + P_j'`, so every order is an exact closed form.
fn power_log_jet(t: f64, m: f64, k: u32, order: usize) -> [f64; 4] {
    let k = k as usize;
    let mut poly = vec![0.0; k + 1];
    poly[k] = 1.0;
    let log_t = t.ln();
    let mut out = [f64::NAN; 4];
    for (j, slot) in out.iter_mut().enumerate().take(order + 1) {
        let mut acc = 0.0;
        for &c in poly.iter().rev() {
            acc = acc * log_t + c;
        }
        *slot = t.powf(m - j as f64) * acc;
        let shift = m - j as f64;
        let next: Vec<f64> = (0..=k)
            .map(|i| shift * poly[i] + if i < k { (i + 1) as f64 * poly[i + 1] } else { 0.0 })
            .collect();
        poly = next;
    }
    out
}

/// Coefficients `(U, V)` of the linear part of the cubic system, evaluated at
/// the family time `T = γ z^(−1/γ)`.
pub fn coefficients_uv(spec: &TrajectoryFamilySpec, z: f64) -> Result<(f64, f64)> {
    let t = spec.gamma * z.powf(-1.0 / spec.gamma);
    let jet = eval_family(spec, t, 2)?;
    Ok(uv_from_jet(&jet))
}

pub(crate) fn uv_from_jet(jet: &FamilyJet) -> (f64, f64) {
    let [p, dp, ddp, _] = jet.p;
    let [_, dq, ddq, _] = jet.q;
    let u = dq * dq + 2.0 * dp * dp / (p * p) - ddp / p + dp * ddq / (p * dq);
    let v = 2.0 * dp / p + ddq / dq;
    (u, v)
}

/// Closed-form trajectory point `(x, ẋ, (t − C3)^(−γ))` with amplitude/phase constants folded in.
pub fn trajectory_point(spec: &TrajectoryFamilySpec, t: f64) -> Result<[f64; 3]> {
    let jet = eval_family(spec, t, 1)?;
    let (x, y) = phase_pair(spec, &jet);
    Ok([x, y, (t - spec.c3).powf(-spec.gamma)])
}

/// `(x, ẋ)` for `x = A p sin(q + θ)`.
pub(crate) fn phase_pair(spec: &TrajectoryFamilySpec, jet: &FamilyJet) -> (f64, f64) {
    let amp = spec.amplitude();
    let arg = jet.q[0] + spec.phase();
    let (s, c) = arg.sin_cos();
    (amp * jet.p[0] * s, amp * (jet.p[1] * s + jet.p[0] * jet.q[1] * c))
}

/// Height along solutions of the cubic system: `z = (γ/(t − C3))^γ`, which solves `ż = −z^δ`.
pub fn system_height(spec: &TrajectoryFamilySpec, t: f64) -> f64 {
    (spec.gamma / (t - spec.c3)).powf(spec.gamma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::{E, PI};

    fn central_diff(f: impl Fn(f64) -> f64, t: f64) -> f64 {
        // Five-point stencil.
        let h = 1e-3 * t;
        (-f(t + 2.0 * h) + 8.0 * f(t + h) - 8.0 * f(t - h) + f(t - 2.0 * h)) / (12.0 * h)
    }

    #[test]
    fn direct_values() {
        let s = TrajectoryFamilySpec::new(0.5, 1.0).unwrap();
        let j = eval_family(&s, 4.0, 0).unwrap();
        assert_eq!(j.p[0], 0.5);
        assert_eq!(j.q[0], 4.0);
        assert!(j.p[1].is_nan());
        let s1 = TrajectoryFamilySpec::new(1.0, 1.0).unwrap();
        let j = eval_family(&s1, 10.0, 1).unwrap();
        assert!((j.p[1] + 0.01).abs() < 1e-17);
    }

    #[test]
    fn domain_and_order_errors() {
        let s = TrajectoryFamilySpec::new(0.5, 1.0).unwrap();
        assert!(matches!(eval_family(&s, 0.5, 0), Err(Error::Domain { .. })));
        assert!(eval_family(&s, 2.0, 4).is_err());
    }

    #[test]
    fn log_factor_derivative_matches_difference_oracle() {
        let s = TrajectoryFamilySpec::new(0.5, 1.0)
            .unwrap()
            .with_logs(1, 0)
            .unwrap();
        let t = E * E;
        let j = eval_family(&s, t, 1).unwrap();
        let p = |t: f64| t.powf(-0.5) * t.ln();
        let oracle = central_diff(p, t);
        // p'(e²) vanishes analytically; compare on the absolute scale of p/t.
        assert!((j.p[1] - oracle).abs() < 1e-8 * p(t) / t);
        let t = 30.0;
        let j = eval_family(&s, t, 1).unwrap();
        let oracle = central_diff(p, t);
        assert!(((j.p[1] - oracle) / oracle).abs() < 1e-8);
    }

    #[test]
    fn comparability_ratios() {
        let s = TrajectoryFamilySpec::new(0.37, 1.0).unwrap();
        for t in [1.0, 3.7, 100.0, 1e5] {
            let j = eval_family(&s, t, 0).unwrap();
            assert!((j.p[0] * t.powf(0.37) - 1.0).abs() < 4.0 * f64::EPSILON);
            assert_eq!(j.q[0] / t, 1.0);
        }
        let s = TrajectoryFamilySpec {
            log_p_exponent: 2,
            log_q_exponent: 1,
            t0: 1e4,
            ..s
        };
        s.validate().unwrap();
        for t in [1e4, 3e5, 1e8] {
            let j = eval_family(&s, t, 0).unwrap();
            assert_eq!(j.p[0] / (t.powf(-0.37) * t.ln().powi(2)), 1.0);
            assert_eq!(j.q[0] / (t * t.ln()), 1.0);
        }
    }

    #[test]
    fn v_coefficient_pure_power() {
        let s = TrajectoryFamilySpec::new(0.5, 1.0).unwrap();
        for z in [0.5, 0.1, 0.01] {
            let (_, v) = coefficients_uv(&s, z).unwrap();
            assert!((v + z).abs() < 1e-15);
        }
    }

    #[test]
    fn trajectory_point_examples() {
        let s = TrajectoryFamilySpec::new(0.5, 1.0).unwrap();
        let p = trajectory_point(&s, PI).unwrap();
        assert!(p[0].abs() < 1e-15);
        assert!((p[2] - 1.0 / PI).abs() < 1e-16);
        let p = trajectory_point(&s, PI / 2.0).unwrap();
        assert!((p[1] + 0.5 * (PI / 2.0).powf(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn amplitude_phase_form_matches_constants() {
        let mut s = TrajectoryFamilySpec::new(0.5, 1.0).unwrap();
        s.c1 = -0.3;
        s.c2 = 1.7;
        for t in [1.0, 2.5, 40.0] {
            let j = eval_family(&s, t, 1).unwrap();
            let (x, _) = phase_pair(&s, &j);
            let direct = s.c1 * j.p[0] * j.q[0].sin() + s.c2 * j.p[0] * j.q[0].cos();
            assert!((x - direct).abs() < 1e-14);
        }
    }

    proptest! {
        #[test]
        fn derivatives_match_difference_oracle(
            alpha in 0.1f64..2.5,
            k in 0u32..3,
            l in 0u32..3,
            kslope in 0.2f64..3.0,
            u in 0.0f64..1.0,
        ) {
            let base = TrajectoryFamilySpec { k_slope: kslope, ..TrajectoryFamilySpec::new(alpha, 1.0).unwrap() };
            let t0 = if k + l > 0 { (2.0 * k as f64 / alpha).exp().max(E * E) } else { 1.0 };
            let s = TrajectoryFamilySpec { log_p_exponent: k, log_q_exponent: l, t0, ..base };
            prop_assume!(s.validate().is_ok());
            let t = t0 * 2.0 * 1e3f64.powf(u);
            let j = eval_family(&s, t, 3).unwrap();
            let pj = |t: f64, d: usize| jet_unchecked(&s, t, 3).p[d];
            let qj = |t: f64, d: usize| jet_unchecked(&s, t, 3).q[d];
            for d in 0..3 {
                let dp = central_diff(|t| pj(t, d), t);
                let dq = central_diff(|t| qj(t, d), t);
                let scale_p = j.p[d + 1].abs().max(pj(t, d).abs() / t);
                let scale_q = j.q[d + 1].abs().max(qj(t, d).abs() / t);
                prop_assert!((j.p[d + 1] - dp).abs() <= 1e-6 * scale_p, "p order {}", d + 1);
                prop_assert!((j.q[d + 1] - dq).abs() <= 1e-6 * scale_q, "q order {}", d + 1);
            }
        }
    }
}
