use std::f64::consts::PI;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::polar::{unwrap_phase, PolarProfile};
use crate::curve::Curve;
use crate::error::{Error, Result};
use crate::fractal::{least_squares, LineFit};

/// Surface `z = c·r^β` with `|g'(r)| ≤ D r^(β−1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceSpec {
    pub beta: f64,
    pub coefficient: f64,
    pub derivative_bound: f64,
}

impl SurfaceSpec {
    /// Surface with the tightest derivative bound `D = cβ`.
    pub fn new(beta: f64, coefficient: f64) -> Result<Self> {
        let s = SurfaceSpec {
            beta,
            coefficient,
            derivative_bound: coefficient * beta,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("beta", self.beta),
            ("coefficient", self.coefficient),
            ("D", self.derivative_bound),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("{v} must be positive")));
            }
        }
        if self.coefficient * self.beta > self.derivative_bound * (1.0 + 1e-12) {
            return Err(Error::invalid(
                "D",
                format!(
                    "{} is below |g'(r)| r^(1−β) = {}",
                    self.derivative_bound,
                    self.coefficient * self.beta
                ),
            ));
        }
        Ok(())
    }

    pub fn height(&self, r: f64) -> f64 {
        self.coefficient * r.powf(self.beta)
    }
}

/// Adds `z = g(r)` to every sample of a planar profile.
pub fn lift_to_surface(profile: &PolarProfile, surface: &SurfaceSpec) -> Result<Curve> {
    surface.validate()?;
    let coords = profile
        .phis
        .iter()
        .zip(&profile.radii)
        .flat_map(|(&p, &r)| [r * p.cos(), r * p.sin(), surface.height(r)])
        .collect();
    let provenance = profile
        .provenance
        .clone()
        .with("surface_beta", surface.beta)
        .with("surface_coefficient", surface.coefficient);
    Curve::new(3, profile.params.clone(), coords, provenance)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Plane {
    Xy,
    Xz,
    Yz,
}

impl Plane {
    fn axes(self) -> [usize; 2] {
        match self {
            Plane::Xy => [0, 1],
            Plane::Xz => [0, 2],
            Plane::Yz => [1, 2],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Plane::Xy => "xy",
            Plane::Xz => "xz",
            Plane::Yz => "yz",
        }
    }
}

impl FromStr for Plane {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "xy" => Ok(Plane::Xy),
            "xz" => Ok(Plane::Xz),
            "yz" => Ok(Plane::Yz),
            _ => Err(Error::invalid("plane", format!("{s:?} is not one of xy, xz, yz"))),
        }
    }
}

/// Drops one coordinate of a spatial curve.
pub fn project(curve: &Curve, plane: Plane) -> Result<Curve> {
    if curve.dim() != 3 {
        return Err(Error::invalid("curve", "projection needs a spatial curve"));
    }
    let [a, b] = plane.axes();
    let coords = curve.points().flat_map(|p| [p[a], p[b]]).collect();
    let provenance = curve.provenance().clone().with("projection", plane.as_str());
    let out = Curve::new(2, curve.params().to_vec(), coords, provenance)?;
    Ok(match &curve.provenance().truncated {
        Some(reason) => out.with_truncation(reason.clone()),
        None => out,
    })
}

/// Angular separation classes of the ratio scan.
pub const NEAR_MAX: f64 = PI / 3.0;
pub const FAR_MIN: f64 = 2.0 * PI + PI / 3.0;
/// Upper end of the sampled far separations.
pub const FAR_MAX: f64 = FAR_MIN + 6.0 * PI;

/// Trend thresholds of the ratio scan.
pub const TREND_LEVELS: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioScan {
    pub max_ratio: f64,
    pub near_max: f64,
    pub mid_max: f64,
    pub far_max: f64,
    /// `(T, max ratio over pairs whose smaller parameter lies in [T, T_next))`,
    /// on log-spaced windows covering the parameter range.
    pub trend: Vec<(f64, f64)>,
    pub pairs: usize,
}

impl RatioScan {
    /// Whether the tail maxima shrink as `T` grows.
    pub fn decreasing(&self) -> bool {
        let v: Vec<f64> = self.trend.iter().map(|t| t.1).filter(|v| v.is_finite()).collect();
        v.len() >= 2 && v.windows(2).all(|w| w[1] <= w[0])
    }

    /// Whether the tail maxima grow as `T` grows.
    pub fn increasing(&self) -> bool {
        let v: Vec<f64> = self.trend.iter().map(|t| t.1).filter(|v| v.is_finite()).collect();
        v.len() >= 2 && v.windows(2).all(|w| w[1] >= w[0]) && v[v.len() - 1] > v[0]
    }
}

/// Samples pairs of a spatial curve and records `|Δz| / |Δ(x, y)|`.
///
/// Pairs are split evenly between angular separations `|Δφ| ≤ π/3`,
/// `π/3 < |Δφ| < 2π + π/3` and `|Δφ| ≥ 2π + π/3`. Sampling is seeded.
pub fn bilipschitz_ratio_scan(curve: &Curve, pairs_budget: usize, seed: u64) -> Result<RatioScan> {
    if curve.dim() != 3 {
        return Err(Error::invalid("curve", "the ratio scan needs a spatial curve"));
    }
    if pairs_budget < 3 {
        return Err(Error::invalid(
            "pairs_budget",
            "needs at least one pair per class",
        ));
    }
    let planar = project(curve, Plane::Xy)?;
    let profile = unwrap_phase(&planar)?;
    let sign = profile.turns().signum();
    let progress: Vec<f64> = profile
        .phis
        .iter()
        .map(|p| sign * (p - profile.phis[0]))
        .collect();
    let params = curve.params();
    let n = curve.len();
    let (t_first, t_last) = (params[0].abs(), params[n - 1].abs());
    let levels: Vec<f64> = (0..=TREND_LEVELS)
        .map(|m| t_first * (t_last / t_first).powf(m as f64 / TREND_LEVELS as f64))
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut class_max = [0.0f64; 3];
    let mut trend_max = vec![f64::NEG_INFINITY; TREND_LEVELS];
    let mut pairs = 0;
    for k in 0..pairs_budget {
        let class = k % 3;
        let sep = match class {
            0 => rng.gen_range(0.0..NEAR_MAX),
            1 => rng.gen_range(NEAR_MAX..FAR_MIN),
            _ => rng.gen_range(FAR_MIN..FAR_MAX),
        };
        let i = rng.gen_range(0..n);
        let target = progress[i] + sep;
        let j = progress.partition_point(|&v| v < target);
        if j >= n || j == i {
            continue;
        }
        let (a, b) = (curve.point(i), curve.point(j));
        let planar_dist = (a[0] - b[0]).hypot(a[1] - b[1]);
        if planar_dist == 0.0 {
            continue;
        }
        let ratio = (a[2] - b[2]).abs() / planar_dist;
        pairs += 1;
        class_max[class] = class_max[class].max(ratio);
        let t_min = params[i].abs().min(params[j].abs());
        let m = levels
            .partition_point(|&l| l <= t_min)
            .saturating_sub(1)
            .min(TREND_LEVELS - 1);
        trend_max[m] = trend_max[m].max(ratio);
    }
    Ok(RatioScan {
        max_ratio: class_max.iter().copied().fold(0.0, f64::max),
        near_max: class_max[0],
        mid_max: class_max[1],
        far_max: class_max[2],
        trend: levels.into_iter().zip(trend_max).collect(),
        pairs,
    })
}

/// Power-law fit of an oscillation envelope: per-oscillation peak `|v|` of the
/// ordinate against the abscissa `|u|`, with oscillations delimited by sign
/// changes of the ordinate.
pub fn envelope_exponent(curve: &Curve, abscissa: usize, ordinate: usize) -> Result<LineFit> {
    if abscissa >= curve.dim() || ordinate >= curve.dim() {
        return Err(Error::invalid("axis", "out of range for the curve"));
    }
    let mut peaks: Vec<(f64, f64)> = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    let mut prev_sign = 0.0;
    for p in curve.points() {
        let (u, v) = (p[abscissa].abs(), p[ordinate]);
        let s = v.signum();
        if s != prev_sign && prev_sign != 0.0 {
            if let Some(b) = best.take() {
                peaks.push(b);
            }
        }
        prev_sign = s;
        if best.is_none_or(|b| v.abs() > b.1) {
            best = Some((u, v.abs()));
        }
    }
    // The first and last oscillations are incomplete.
    if peaks.len() < 4 {
        return Err(Error::InsufficientTurns {
            found: peaks.len(),
            required: 4,
        });
    }
    let inner = &peaks[1..];
    let xs: Vec<f64> = inner.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = inner.iter().map(|p| p.1.ln()).collect();
    Ok(least_squares(&xs, &ys))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{Asymptote, Provenance};
    use crate::phase::{arc_length_profile, Rectifiability};

    fn spiral(alpha: f64, phi_end: f64, step: f64) -> PolarProfile {
        let n = ((phi_end - 1.0) / step) as usize;
        let params: Vec<f64> = (0..=n).map(|i| 1.0 + step * i as f64).collect();
        let coords = params
            .iter()
            .flat_map(|&p| [p.powf(-alpha) * p.cos(), p.powf(-alpha) * p.sin()])
            .collect();
        let c = Curve::new(
            2,
            params,
            coords,
            Provenance::new("t", Asymptote::ParamToInfinity),
        )
        .unwrap();
        unwrap_phase(&c).unwrap()
    }

    #[test]
    fn surface_validation() {
        assert!(SurfaceSpec::new(0.25, 1.0).is_ok());
        let s = SurfaceSpec {
            beta: 0.5,
            coefficient: 2.0,
            derivative_bound: 0.5,
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn lifted_fast_spiral_is_rectifiable() {
        let prof = spiral(2.0, 2000.0, 0.01);
        for beta in [0.25, 0.125] {
            let lifted = lift_to_surface(&prof, &SurfaceSpec::new(beta, 1.0).unwrap()).unwrap();
            let rep = arc_length_profile(&lifted).unwrap();
            assert_eq!(rep.verdict, Rectifiability::Rectifiable, "beta {beta}: {rep:?}");
        }
    }

    #[test]
    fn lipschitz_lift_at_most_doubles_length() {
        let prof = spiral(2.0, 2000.0, 0.01);
        let planar = Curve::new(
            2,
            prof.params.clone(),
            prof.rewrap().concat(),
            Provenance::new("t", Asymptote::ParamToInfinity),
        )
        .unwrap();
        let flat = arc_length_profile(&planar).unwrap();
        let lifted =
            arc_length_profile(&lift_to_surface(&prof, &SurfaceSpec::new(1.0, 1.0).unwrap()).unwrap())
                .unwrap();
        assert_eq!(lifted.verdict, Rectifiability::Rectifiable);
        assert!(lifted.total <= 2.0 * flat.total && lifted.total >= flat.total);
    }

    #[test]
    fn flat_surface_ratio_is_zero() {
        let prof = spiral(0.5, 400.0, 0.05);
        let coords: Vec<f64> = prof.rewrap().iter().flat_map(|p| [p[0], p[1], 0.0]).collect();
        let c = Curve::new(
            3,
            prof.params.clone(),
            coords,
            Provenance::new("t", Asymptote::ParamToInfinity),
        )
        .unwrap();
        let scan = bilipschitz_ratio_scan(&c, 3000, 7).unwrap();
        assert_eq!(scan.max_ratio, 0.0);
        assert!(scan.pairs > 2000);
    }

    #[test]
    fn projection_drops_axes() {
        let c = Curve::new(
            3,
            vec![0.0, 1.0],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0],
            Provenance::new("t", Asymptote::None),
        )
        .unwrap();
        assert_eq!(project(&c, Plane::Xz).unwrap().coords(), &[1.0, 3.0, 4.0, 6.0]);
        assert_eq!(project(&c, Plane::Yz).unwrap().coords(), &[2.0, 3.0, 5.0, 6.0]);
        assert_eq!("xy".parse::<Plane>().unwrap(), Plane::Xy);
        assert!("zx".parse::<Plane>().is_err());
    }

    #[test]
    fn envelope_of_a_chirp_graph() {
        let n = 200_000;
        let params: Vec<f64> = (0..n).map(|i| 0.01 + 0.99 * i as f64 / n as f64).collect();
        let coords = params
            .iter()
            .flat_map(|&t| [t, t.powf(0.7) * (1.0 / t).sin()])
            .collect();
        let c = Curve::new(2, params, coords, Provenance::new("t", Asymptote::ParamToZero)).unwrap();
        let fit = envelope_exponent(&c, 0, 1).unwrap();
        assert!((fit.slope - 0.7).abs() < 0.02, "{fit:?}");
    }
}
