//! Dormand–Prince 5(4) with dense output.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerances {
    pub fn new(rel: f64, abs: f64) -> Result<Self> {
        if !(rel > 0.0 && rel <= 1e-3) {
            return Err(Error::invalid("rel_tol", format!("{rel} must lie in (0, 1e-3]")));
        }
        if !(abs > 0.0 && abs <= 1e-3) {
            return Err(Error::invalid("abs_tol", format!("{abs} must lie in (0, 1e-3]")));
        }
        Ok(Tolerances { rel, abs })
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step with its continuous extension.
pub struct Step<const N: usize> {
    pub t0: f64,
    pub t1: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    pub f0: [f64; N],
    pub f1: [f64; N],
    cont: [[f64; N]; 5],
}

impl<const N: usize> Step<N> {
    /// Fourth-order interpolant at `t ∈ [t0, t1]`.
    pub fn interpolate(&self, t: f64) -> [f64; N] {
        let th = (t - self.t0) / (self.t1 - self.t0);
        let th1 = 1.0 - th;
        let [r1, r2, r3, r4, r5] = &self.cont;
        std::array::from_fn(|i| r1[i] + th * (r2[i] + th1 * (r3[i] + th * (r4[i] + th1 * r5[i]))))
    }
}

/// Integrates `y' = f(t, y)` from `t0` to `t1` (either direction), calling `on_step`
/// after every accepted step. `on_step` returns `false` to stop early.
///
/// `max_step` caps the step length. Steps shrinking below `1e-14·max(|t|, 1)`
/// raise [`Error::Stiffness`].
pub fn integrate<const N: usize, F, S>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    tol: Tolerances,
    max_step: f64,
    mut on_step: S,
) -> Result<()>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    S: FnMut(&Step<N>) -> bool,
{
    let dir = if t1 >= t0 { 1.0 } else { -1.0 };
    let span = (t1 - t0).abs();
    if span == 0.0 {
        return Ok(());
    }
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut h = initial_step(&f, t, &y, &k1, dir, tol).min(max_step).min(span);
    let mut err_prev: f64 = 1e-4;
    let mut rejected = false;
    loop {
        let h_min = 1e-14 * t.abs().max(1.0);
        if h < h_min {
            return Err(Error::Stiffness { t, h });
        }
        let last = (t1 - t).abs() <= h * (1.0 + 1e-12);
        let hs = if last { (t1 - t).abs() } else { h } * dir;
        let add = |coef: &[(f64, &[f64; N])]| -> [f64; N] {
            std::array::from_fn(|i| y[i] + hs * coef.iter().map(|(c, k)| c * k[i]).sum::<f64>())
        };
        let k2 = f(t + C2 * hs, &add(&[(A21, &k1)]));
        let k3 = f(t + C3 * hs, &add(&[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * hs, &add(&[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * hs,
            &add(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + hs,
            &add(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = add(&[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let t_new = if last { t1 } else { t + hs };
        let k7 = f(t_new, &y_new);
        let mut err = 0.0;
        for i in 0..N {
            let e = hs * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = tol.abs + tol.rel * y[i].abs().max(y_new[i].abs());
            err += (e / sc) * (e / sc);
        }
        let err = (err / N as f64).sqrt();
        if !err.is_finite() {
            h *= 0.25;
            rejected = true;
            continue;
        }
        if err <= 1.0 {
            let cont = {
                let r1 = y;
                let r2: [f64; N] = std::array::from_fn(|i| y_new[i] - y[i]);
                let r3: [f64; N] = std::array::from_fn(|i| hs * k1[i] - r2[i]);
                let r4: [f64; N] = std::array::from_fn(|i| r2[i] - hs * k7[i] - r3[i]);
                let r5: [f64; N] = std::array::from_fn(|i| {
                    hs * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i])
                });
                [r1, r2, r3, r4, r5]
            };
            let step = Step {
                t0: t,
                t1: t_new,
                y0: y,
                y1: y_new,
                f0: k1,
                f1: k7,
                cont,
            };
            let keep_going = on_step(&step);
            t = t_new;
            y = y_new;
            k1 = k7;
            if last || !keep_going {
                return Ok(());
            }
            // PI step-size controller.
            let mut fac = 0.9 * err.max(1e-10).powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            fac = fac.clamp(0.2, 5.0);
            if rejected {
                fac = fac.min(1.0);
            }
            h = (h * fac).min(max_step);
            err_prev = err.max(1e-4);
            rejected = false;
        } else {
            h *= (0.9 * err.powf(-0.2)).max(0.2);
            rejected = true;
        }
    }
}

fn initial_step<const N: usize, F>(
    f: &F,
    t: f64,
    y: &[f64; N],
    k1: &[f64; N],
    dir: f64,
    tol: Tolerances,
) -> f64
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
{
    let sc: [f64; N] = std::array::from_fn(|i| tol.abs + tol.rel * y[i].abs());
    let norm =
        |v: &[f64; N]| (v.iter().zip(&sc).map(|(a, s)| (a / s) * (a / s)).sum::<f64>() / N as f64).sqrt();
    let d0 = norm(y);
    let d1 = norm(k1);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1: [f64; N] = std::array::from_fn(|i| y[i] + dir * h0 * k1[i]);
    let k2 = f(t + dir * h0, &y1);
    let diff: [f64; N] = std::array::from_fn(|i| k2[i] - k1[i]);
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_long_run() {
        let tol = Tolerances::new(1e-10, 1e-12).unwrap();
        let mut end = [0.0; 2];
        integrate(
            |_, y| [y[1], -y[0]],
            0.0,
            [0.0, 1.0],
            100.0,
            tol,
            f64::INFINITY,
            |s| {
                end = s.y1;
                true
            },
        )
        .unwrap();
        assert!((end[0] - 100f64.sin()).abs() < 1e-7);
        assert!((end[1] - 100f64.cos()).abs() < 1e-7);
    }

    #[test]
    fn dense_output_is_fourth_order_accurate() {
        let tol = Tolerances::new(1e-9, 1e-12).unwrap();
        let mut worst: f64 = 0.0;
        integrate(
            |_, y| [-y[0]],
            0.0,
            [1.0],
            5.0,
            tol,
            0.5,
            |s| {
                for j in 1..10 {
                    let t = s.t0 + (s.t1 - s.t0) * j as f64 / 10.0;
                    worst = worst.max((s.interpolate(t)[0] - (-t).exp()).abs());
                }
                true
            },
        )
        .unwrap();
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn backward_integration() {
        let tol = Tolerances::new(1e-10, 1e-14).unwrap();
        let mut end = [0.0; 1];
        // r' = r³ with r(1) = 1 has r(t) = (3 − 2t)^(−1/2).
        integrate(
            |_, y| [y[0].powi(3)],
            1.0,
            [1.0],
            -10.0,
            tol,
            f64::INFINITY,
            |s| {
                end = s.y1;
                true
            },
        )
        .unwrap();
        assert!((end[0] - 23f64.powf(-0.5)).abs() < 1e-9);
    }

    #[test]
    fn blow_up_reports_stiffness() {
        let tol = Tolerances::new(1e-8, 1e-10).unwrap();
        let res = integrate(
            |_, y| [y[0] * y[0]],
            0.0,
            [1.0],
            2.0,
            tol,
            f64::INFINITY,
            |_| true,
        );
        assert!(matches!(res, Err(Error::Stiffness { .. })));
    }

    #[test]
    fn tolerance_bounds() {
        assert!(Tolerances::new(1e-2, 1e-6).is_err());
        assert!(Tolerances::new(1e-6, 0.0).is_err());
    }
}
