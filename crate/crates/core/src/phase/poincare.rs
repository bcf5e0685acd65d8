use std::f64::consts::PI;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::polar::PolarProfile;
use crate::curve::fmt_num;
use crate::error::{Error, Result};
use crate::fractal::least_squares;

/// Crossings needed for a return sequence.
pub const MIN_CROSSINGS: usize = 10;

/// Radii at successive crossings of the ray at `section_angle`, outermost first.
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnSequence {
    pub section_angle: f64,
    pub radii: Vec<f64>,
    /// Unwrapped angle of each crossing, in the same order as `radii`.
    pub crossing_phis: Vec<f64>,
    /// Largest per-crossing interpolation error estimate.
    pub interpolation_error: f64,
    /// Indices `n` with `r_{n+1} ≥ r_n`.
    pub violations: Vec<usize>,
}

impl ReturnSequence {
    /// `d_n = r_{n+1} − r_n`.
    pub fn differences(&self) -> Vec<f64> {
        self.radii.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,r,d")?;
        let d = self.differences();
        for (n, r) in self.radii.iter().enumerate() {
            match d.get(n) {
                Some(d) => writeln!(w, "{n},{},{}", fmt_num(*r), fmt_num(*d))?,
                None => writeln!(w, "{n},{},", fmt_num(*r))?,
            }
        }
        Ok(())
    }
}

/// First-return radii on the ray at `section_angle`.
///
/// Crossings are located where the unwrapped angle passes `section_angle + 2kπ`
/// in either direction. Each radius comes from a monotone cubic Hermite
/// interpolant of `r(φ)` whose node slopes are taken from the cubic through
/// four neighbouring samples; the error estimate is the fourth divided
/// difference times the fourth power of the five-sample span.
pub fn poincare_sequence(profile: &PolarProfile, section_angle: f64) -> Result<ReturnSequence> {
    let phis = &profile.phis;
    let radii = &profile.radii;
    let n = phis.len();
    let level = |phi: f64| ((phi - section_angle) / (2.0 * PI)).floor();
    let mut found: Vec<(f64, f64, f64)> = Vec::new();
    for i in 0..n.saturating_sub(1) {
        let (l0, l1) = (level(phis[i]), level(phis[i + 1]));
        if l0 == l1 {
            continue;
        }
        let target = section_angle + 2.0 * PI * l0.max(l1);
        let (r, err) = interpolate_crossing(phis, radii, i, target);
        found.push((target, r, err));
    }
    if found.len() < MIN_CROSSINGS {
        return Err(Error::InsufficientTurns {
            found: found.len(),
            required: MIN_CROSSINGS,
        });
    }
    if found[0].1 < found[found.len() - 1].1 {
        found.reverse();
    }
    let radii: Vec<f64> = found.iter().map(|f| f.1).collect();
    let violations = radii
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] >= w[0])
        .map(|(k, _)| k)
        .collect();
    Ok(ReturnSequence {
        section_angle,
        crossing_phis: found.iter().map(|f| f.0).collect(),
        interpolation_error: found.iter().map(|f| f.2).fold(0.0, f64::max),
        radii,
        violations,
    })
}

/// Radius at `target ∈ [φ_i, φ_{i+1}]` and its error estimate.
fn interpolate_crossing(phis: &[f64], radii: &[f64], i: usize, target: f64) -> (f64, f64) {
    let n = phis.len();
    let (x0, x1) = (phis[i], phis[i + 1]);
    let (y0, y1) = (radii[i], radii[i + 1]);
    let h = x1 - x0;
    let s = (target - x0) / h;
    if n < 5 {
        return (y0 + s * (y1 - y0), (y1 - y0).abs());
    }
    // Four-point stencil around the interval, kept inside the array.
    let a = i.saturating_sub(1).min(n - 4);
    let xs = &phis[a..a + 4];
    let ys = &radii[a..a + 4];
    let secant = (y1 - y0) / h;
    let limit = |d: f64, other: f64| {
        // Fritsch–Carlson: no overshoot, matching sign.
        if secant == 0.0 || d.signum() != secant.signum() || other.signum() != secant.signum() {
            0.0
        } else {
            d.clamp(-3.0 * secant.abs(), 3.0 * secant.abs())
        }
    };
    let d0 = limit(lagrange_slope(xs, ys, x0), secant);
    let d1 = limit(lagrange_slope(xs, ys, x1), secant);
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    let r = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;

    let b = i.saturating_sub(2).min(n - 5);
    let span = (phis[b + 4] - phis[b]).abs();
    let dd4 = divided_difference(&phis[b..b + 5], &radii[b..b + 5]);
    let err = dd4.abs() * span.powi(4) + 4.0 * f64::EPSILON * r.abs();
    (r, err)
}

/// Slope at `x` of the cubic through four points.
fn lagrange_slope(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut total = 0.0;
    for j in 0..4 {
        let mut denom = 1.0;
        for m in 0..4 {
            if m != j {
                denom *= xs[j] - xs[m];
            }
        }
        let mut num = 0.0;
        for skip in 0..4 {
            if skip == j {
                continue;
            }
            let mut prod = 1.0;
            for (m, xm) in xs.iter().enumerate() {
                if m != j && m != skip {
                    prod *= x - xm;
                }
            }
            num += prod;
        }
        total += ys[j] * num / denom;
    }
    total
}

fn divided_difference(xs: &[f64], ys: &[f64]) -> f64 {
    let mut table = ys.to_vec();
    for level in 1..xs.len() {
        for j in 0..xs.len() - level {
            table[j] = (table[j + 1] - table[j]) / (xs[j + level] - xs[j]);
        }
    }
    table[0]
}

/// Power-law fit `−d(r) ≈ c r^κ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExponentEstimate {
    pub exponent: f64,
    pub band: f64,
    pub intercept: f64,
    pub returns: usize,
}

/// Slope of `log(−d(r_n))` against `log r_n`.
pub fn fit_return_exponent(seq: &ReturnSequence) -> Result<ExponentEstimate> {
    let d = seq.differences();
    if d.len() < MIN_CROSSINGS {
        return Err(Error::InsufficientTurns {
            found: seq.radii.len(),
            required: MIN_CROSSINGS + 1,
        });
    }
    if let Some((index, &value)) = d.iter().enumerate().find(|(_, v)| **v >= 0.0) {
        return Err(Error::MixedSign { index, value });
    }
    let xs: Vec<f64> = seq.radii[..d.len()].iter().map(|r| r.ln()).collect();
    let ys: Vec<f64> = d.iter().map(|v| (-v).ln()).collect();
    let line = least_squares(&xs, &ys);
    Ok(ExponentEstimate {
        exponent: line.slope,
        band: (2.0 * line.slope_se).max(crate::fractal::MIN_BAND),
        intercept: line.intercept,
        returns: d.len(),
    })
}
