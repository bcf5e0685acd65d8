use crate::curve::Curve;
use crate::error::{Error, Result};

/// Geometric sequence of box sizes, coarsest first.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleLadder {
    epsilons: Vec<f64>,
    ratio: f64,
}

impl ScaleLadder {
    pub const DEFAULT_RATIO: f64 = std::f64::consts::FRAC_1_SQRT_2;
    pub const DEFAULT_COUNT: usize = 20;
    pub const MIN_COUNT: usize = 8;

    pub fn geometric(eps_max: f64, ratio: f64, count: usize) -> Result<Self> {
        if !(eps_max > 0.0 && eps_max.is_finite()) {
            return Err(Error::invalid("eps_max", format!("{eps_max} must be positive")));
        }
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::invalid("ratio", format!("{ratio} must lie in (0, 1)")));
        }
        if count < Self::MIN_COUNT {
            return Err(Error::invalid(
                "count",
                format!("{count} scales; at least {} are required", Self::MIN_COUNT),
            ));
        }
        let epsilons = (0..count).map(|k| eps_max * ratio.powi(k as i32)).collect();
        Ok(ScaleLadder { epsilons, ratio })
    }

    /// Default ladder for a curve: `count` scales from a quarter of its diameter.
    pub fn for_curve(curve: &Curve, count: usize) -> Result<Self> {
        let ladder = Self::geometric(curve.diameter() / 4.0, Self::DEFAULT_RATIO, count)?;
        ladder.check_curve(curve)?;
        Ok(ladder)
    }

    /// Smallest scale of a default ladder with `count` scales over a set of diameter `diameter`.
    pub fn planned_eps_min(diameter: f64, count: usize) -> f64 {
        diameter / 4.0 * Self::DEFAULT_RATIO.powi(count as i32 - 1)
    }

    /// Refuses ladders whose finest scale is below twice the curve's chord bound.
    pub fn check_curve(&self, curve: &Curve) -> Result<()> {
        let min_admissible = 2.0 * curve.max_chord();
        if self.eps_min() < min_admissible {
            return Err(Error::ScaleBelowChord {
                eps_min: self.eps_min(),
                min_admissible,
            });
        }
        Ok(())
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn count(&self) -> usize {
        self.epsilons.len()
    }

    pub fn eps_max(&self) -> f64 {
        self.epsilons[0]
    }

    pub fn eps_min(&self) -> f64 {
        *self.epsilons.last().unwrap()
    }

    /// Same ladder with every scale multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::geometric(self.eps_max() * c, self.ratio, self.count())
    }
}
