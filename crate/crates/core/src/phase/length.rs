use serde::Serialize;

use crate::curve::{dist, Asymptote, Curve};
use crate::error::{Error, Result};
use crate::fractal::{least_squares, MIN_BAND};

/// Samples required by [`arc_length_profile`].
pub const MIN_SAMPLES: usize = 10_000;

/// Fraction of the asymptotic-time range used by the tail fit.
pub const TAIL_FRACTION: f64 = 0.3;

/// Geometric windows in the tail.
pub const TAIL_WINDOWS: usize = 8;

/// Largest relative disagreement between limit extrapolations.
pub const STABILITY_TOLERANCE: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Rectifiability {
    Rectifiable,
    Nonrectifiable,
    Borderline,
}

impl Rectifiability {
    pub fn as_str(&self) -> &'static str {
        match self {
            Rectifiability::Rectifiable => "rectifiable",
            Rectifiability::Nonrectifiable => "nonrectifiable",
            Rectifiability::Borderline => "borderline",
        }
    }

    pub fn code(&self) -> u8 {
        match self {
            Rectifiability::Rectifiable => 0,
            Rectifiability::Nonrectifiable => 1,
            Rectifiability::Borderline => 2,
        }
    }
}

/// Cumulative length and its behaviour as the curve approaches its limit point.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArcLengthReport {
    /// Asymptotic time `T` at each sample (`|t|`, or `1/t` for curves accumulating as `t → 0`).
    #[serde(skip)]
    pub times: Vec<f64>,
    /// Cumulative chordal length at each sample.
    #[serde(skip)]
    pub lengths: Vec<f64>,
    pub total: f64,
    pub verdict: Rectifiability,
    /// Slope of the window increments against `log T`: `−η` for a converging
    /// length, the growth exponent of `L(T)` for a diverging one.
    pub tail_slope: f64,
    pub band: f64,
    /// `η` when the verdict is rectifiable.
    pub tail_exponent: Option<f64>,
    /// Extrapolated total length when the verdict is rectifiable.
    pub limit: Option<f64>,
    /// Relative disagreement between the two limit extrapolations.
    pub limit_spread: Option<f64>,
}

/// Chordal length profile with a rectifiability verdict.
///
/// The last [`TAIL_FRACTION`] of the `T` range is cut into [`TAIL_WINDOWS`]
/// geometric windows. If `L(∞) − L(T) ≈ c T^(−η)`, the window increments scale as
/// `T_k^(−η)`; if `L(T) ≈ c T^κ` they scale as `T_k^κ`. A negative slope
/// (beyond its band) suggests convergence, confirmed only if the limits
/// extrapolated from the full tail and from its last half agree to within
/// [`STABILITY_TOLERANCE`].
pub fn arc_length_profile(curve: &Curve) -> Result<ArcLengthReport> {
    if curve.len() < MIN_SAMPLES {
        return Err(Error::invalid(
            "curve",
            format!("{} samples; at least {MIN_SAMPLES} are required", curve.len()),
        ));
    }
    let mut lengths = Vec::with_capacity(curve.len());
    let mut acc = 0.0;
    lengths.push(0.0);
    for w in curve
        .coords()
        .chunks_exact(curve.dim())
        .collect::<Vec<_>>()
        .windows(2)
    {
        acc += dist(w[0], w[1]);
        lengths.push(acc);
    }
    let asymptote = curve.provenance().asymptote;
    let times: Vec<f64> = match asymptote {
        Asymptote::ParamToInfinity | Asymptote::None => curve.params().iter().map(|t| t.abs()).collect(),
        Asymptote::ParamToZero => curve.params().iter().map(|t| 1.0 / t).collect(),
    };
    let mut report = ArcLengthReport {
        total: acc,
        verdict: Rectifiability::Rectifiable,
        tail_slope: 0.0,
        band: MIN_BAND,
        tail_exponent: None,
        limit: Some(acc),
        limit_spread: Some(0.0),
        times,
        lengths,
    };
    if asymptote == Asymptote::None {
        return Ok(report);
    }

    let (t_first, t_last) = (report.times[0], report.times[report.times.len() - 1]);
    if !(t_last > t_first && t_first > 0.0) {
        return Err(Error::invalid(
            "curve",
            "asymptotic time must increase along the curve",
        ));
    }
    let t_start = t_first + (1.0 - TAIL_FRACTION) * (t_last - t_first);
    let bounds: Vec<f64> = (0..=TAIL_WINDOWS)
        .map(|k| t_start * (t_last / t_start).powf(k as f64 / TAIL_WINDOWS as f64))
        .collect();
    let at = |t: f64| length_at(&report.times, &report.lengths, t);
    let increments: Vec<f64> = bounds.windows(2).map(|w| at(w[1]) - at(w[0])).collect();
    if increments.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::invalid(
            "curve",
            "tail windows need positive length increments",
        ));
    }
    let xs: Vec<f64> = bounds[..TAIL_WINDOWS].iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = increments.iter().map(|d| d.ln()).collect();
    let line = least_squares(&xs, &ys);
    report.tail_slope = line.slope;
    report.band = (2.0 * line.slope_se).max(MIN_BAND);
    report.limit = None;
    report.limit_spread = None;

    if line.slope > report.band {
        report.verdict = Rectifiability::Nonrectifiable;
        return Ok(report);
    }
    if line.slope >= -report.band {
        report.verdict = Rectifiability::Borderline;
        return Ok(report);
    }
    let ratio = (t_last / t_start).powf(1.0 / TAIL_WINDOWS as f64);
    let full = extrapolate(&xs, &ys, ratio, acc);
    let half = extrapolate(&xs[TAIL_WINDOWS / 2..], &ys[TAIL_WINDOWS / 2..], ratio, acc);
    let spread = match (full, half) {
        (Some(a), Some(b)) => (a - b).abs() / a.max(b),
        _ => f64::INFINITY,
    };
    report.tail_exponent = Some(-line.slope);
    report.limit = full;
    report.limit_spread = Some(spread);
    report.verdict = if spread < STABILITY_TOLERANCE {
        Rectifiability::Rectifiable
    } else {
        Rectifiability::Borderline
    };
    Ok(report)
}

/// Total length plus the geometric remainder implied by a power-law fit of the increments.
fn extrapolate(xs: &[f64], ys: &[f64], ratio: f64, total: f64) -> Option<f64> {
    let line = least_squares(xs, ys);
    if line.slope >= 0.0 {
        return None;
    }
    let q = ratio.powf(line.slope);
    let last_x = xs[xs.len() - 1] + ratio.ln();
    let next = (line.intercept + line.slope * last_x).exp();
    Some(total + next / (1.0 - q))
}

fn length_at(times: &[f64], lengths: &[f64], t: f64) -> f64 {
    let j = times.partition_point(|&v| v < t);
    if j == 0 {
        return lengths[0];
    }
    if j >= times.len() {
        return lengths[lengths.len() - 1];
    }
    let w = (t - times[j - 1]) / (times[j] - times[j - 1]);
    lengths[j - 1] + w * (lengths[j] - lengths[j - 1])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::Provenance;

    fn polar(params: Vec<f64>, r: impl Fn(f64) -> f64) -> Curve {
        let coords = params
            .iter()
            .flat_map(|&p| [r(p) * p.cos(), r(p) * p.sin()])
            .collect();
        Curve::new(
            2,
            params,
            coords,
            Provenance::new("t", Asymptote::ParamToInfinity),
        )
        .unwrap()
    }

    #[test]
    fn segment_is_exact() {
        let n = 20_001;
        let coords = (0..n).flat_map(|i| {
            let s = i as f64 / (n - 1) as f64;
            [3.0 * s, 4.0 * s]
        });
        let c = Curve::new(
            2,
            (0..n).map(|i| i as f64).collect(),
            coords.collect(),
            Provenance::new("t", Asymptote::None),
        )
        .unwrap();
        let rep = arc_length_profile(&c).unwrap();
        assert_eq!(rep.verdict, Rectifiability::Rectifiable);
        assert!((rep.total - 5.0).abs() < 1e-12);
    }

    #[test]
    fn slow_spiral_diverges_like_square_root() {
        let params: Vec<f64> = (0..200_000).map(|i| 1.0 + 0.01 * i as f64).collect();
        let rep = arc_length_profile(&polar(params, |p| p.powf(-0.5))).unwrap();
        assert_eq!(rep.verdict, Rectifiability::Nonrectifiable);
        assert!((rep.tail_slope - 0.5).abs() < 0.1, "{}", rep.tail_slope);
    }

    #[test]
    fn fast_spiral_converges() {
        // r = φ^(−2): length remainder ∫ φ^(−2) dφ = 1/φ.
        let params: Vec<f64> = (0..200_000).map(|i| 1.0 + 0.01 * i as f64).collect();
        let end = params[params.len() - 1];
        let rep = arc_length_profile(&polar(params, |p| p.powf(-2.0))).unwrap();
        assert_eq!(rep.verdict, Rectifiability::Rectifiable, "{rep:?}");
        assert!((rep.tail_exponent.unwrap() - 1.0).abs() < 0.2);
        let limit = rep.limit.unwrap();
        assert!(
            (limit - rep.total - 1.0 / end).abs() < 0.1 / end,
            "{limit} {}",
            rep.total
        );
    }

    #[test]
    fn too_short() {
        let params: Vec<f64> = (0..100).map(|i| 1.0 + 0.01 * i as f64).collect();
        assert!(arc_length_profile(&polar(params, |p| 1.0 / p)).is_err());
    }
}
