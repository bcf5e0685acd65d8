use serde::{Deserialize, Serialize};

use super::boxcount::ScaleCounts;
use crate::error::{Error, Result};

/// Which ladder scales enter the regression.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WindowPolicy {
    /// Drop `coarse` scales from the top and `fine` from the bottom.
    Trim { coarse: usize, fine: usize },
    /// Half-open index range `start..end`.
    Explicit { start: usize, end: usize },
}

impl Default for WindowPolicy {
    fn default() -> Self {
        WindowPolicy::Trim { coarse: 2, fine: 2 }
    }
}

impl WindowPolicy {
    pub const MIN_LEN: usize = 5;

    pub fn resolve(&self, count: usize) -> Result<(usize, usize)> {
        let (start, end) = match *self {
            WindowPolicy::Trim { coarse, fine } => (coarse, count.saturating_sub(fine)),
            WindowPolicy::Explicit { start, end } => (start, end),
        };
        if end > count || end < start + Self::MIN_LEN {
            return Err(Error::invalid(
                "window",
                format!(
                    "{start}..{end} of {count} scales; need at least {} scales",
                    Self::MIN_LEN
                ),
            ));
        }
        Ok((start, end))
    }
}

/// Finite-scale box-dimension estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    /// Slope clamped to `[1, ambient]`.
    pub value: f64,
    pub raw_slope: f64,
    pub intercept: f64,
    /// Half-open index range of the ladder.
    pub window: [usize; 2],
    /// Largest absolute residual of the fit.
    pub slope_residual: f64,
    /// Twice the standard error of the slope.
    pub band: f64,
    /// Set when every count in the window is equal.
    pub sub_resolved: bool,
    pub ambient: usize,
}

/// Smallest reported band, so that `band > 0` even for exact fits.
pub const MIN_BAND: f64 = 1e-9;

impl DimensionEstimate {
    /// `key = value` block.
    pub fn to_kv(&self) -> String {
        toml::to_string(self).expect("plain numeric fields serialize")
    }

    pub fn from_kv(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Whether `target` lies within `tol` of the estimate.
    pub fn within(&self, target: f64, tol: f64) -> bool {
        (self.value - target).abs() <= tol
    }
}

/// Least-squares slope of `ln N` against `ln(1/ε)` over the selected window.
pub fn fit_dimension(counts: &ScaleCounts, policy: WindowPolicy) -> Result<DimensionEstimate> {
    let eps = counts.ladder.epsilons();
    if eps.len() < super::ScaleLadder::MIN_COUNT {
        return Err(Error::invalid(
            "ladder",
            format!("{} scales; at least 8 are required", eps.len()),
        ));
    }
    let (start, end) = policy.resolve(eps.len())?;
    let xs: Vec<f64> = eps[start..end].iter().map(|e| -e.ln()).collect();
    let ys: Vec<f64> = counts.counts[start..end]
        .iter()
        .map(|&n| (n as f64).ln())
        .collect();
    let line = least_squares(&xs, &ys);
    let sub_resolved = counts.counts[start..end].windows(2).all(|w| w[0] == w[1]);
    let ambient = counts.ambient as f64;
    Ok(DimensionEstimate {
        value: line.slope.clamp(1.0, ambient),
        raw_slope: line.slope,
        intercept: line.intercept,
        window: [start, end],
        slope_residual: line.max_residual,
        band: (2.0 * line.slope_se).max(MIN_BAND),
        sub_resolved,
        ambient: counts.ambient,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub slope_se: f64,
    pub max_residual: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`; needs at least three points.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> LineFit {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = xs.iter().zip(ys).map(|(x, y)| y - (slope * x + intercept));
    let (ss, max_residual) = residuals.fold((0.0, 0.0f64), |(ss, m), r| (ss + r * r, m.max(r.abs())));
    let slope_se = (ss / (n - 2.0) / sxx).sqrt();
    LineFit {
        slope,
        intercept,
        slope_se,
        max_residual,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fractal::ScaleLadder;

    fn synthetic(dim: f64, count: usize) -> ScaleCounts {
        let ladder = ScaleLadder::geometric(1.0, 0.5, count).unwrap();
        let counts = ladder
            .epsilons()
            .iter()
            .map(|e| (3.0 * e.powf(-dim)).round() as u64)
            .collect();
        ScaleCounts {
            ladder,
            counts,
            ambient: 2,
        }
    }

    #[test]
    fn exact_power_law() {
        let est = fit_dimension(&synthetic(1.5, 16), WindowPolicy::default()).unwrap();
        assert!((est.value - 1.5).abs() < 1e-3);
        assert_eq!(est.window, [2, 14]);
        assert!(est.band > 0.0 && est.band < 1e-2);
    }

    #[test]
    fn clamping_and_sub_resolved() {
        let ladder = ScaleLadder::geometric(1.0, 0.5, 10).unwrap();
        let flat = ScaleCounts {
            ladder: ladder.clone(),
            counts: vec![7; 10],
            ambient: 2,
        };
        let est = fit_dimension(&flat, WindowPolicy::default()).unwrap();
        assert!(est.sub_resolved);
        assert_eq!(est.raw_slope, 0.0);
        assert_eq!(est.value, 1.0);
        assert_eq!(est.band, MIN_BAND);

        let steep = synthetic(2.6, 10);
        assert_eq!(fit_dimension(&steep, WindowPolicy::default()).unwrap().value, 2.0);
    }

    #[test]
    fn window_validation() {
        let c = synthetic(1.2, 10);
        assert!(fit_dimension(&c, WindowPolicy::Trim { coarse: 3, fine: 3 }).is_err());
        let est = fit_dimension(&c, WindowPolicy::Explicit { start: 0, end: 10 }).unwrap();
        assert_eq!(est.window, [0, 10]);
        assert!(fit_dimension(&c, WindowPolicy::Explicit { start: 4, end: 11 }).is_err());
    }

    #[test]
    fn kv_round_trip() {
        let est = fit_dimension(&synthetic(1.25, 12), WindowPolicy::default()).unwrap();
        let text = est.to_kv();
        assert!(text.contains("value = "));
        assert_eq!(DimensionEstimate::from_kv(&text).unwrap(), est);
    }
}
