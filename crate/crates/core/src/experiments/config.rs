use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Suite identifiers in run order.
pub const SUITE_IDS: [&str; 6] = [
    "tricot",
    "theorem_phase",
    "projections",
    "poincare",
    "hopf",
    "content",
];

/// Everything a suite run reads, loadable from TOML. Missing keys take defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteConfig {
    pub out_dir: PathBuf,
    pub sampling: SamplingConfig,
    pub tolerance: ToleranceConfig,
    pub tricot: TricotConfig,
    pub theorem_phase: TheoremPhaseConfig,
    pub projections: ProjectionsConfig,
    pub poincare: PoincareConfig,
    pub hopf: HopfConfig,
    pub content: ContentConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingConfig {
    /// Sample budget per curve.
    pub budget: usize,
    pub scale_count: usize,
    /// Turn gap at the cut-off, in units of the finest scale.
    pub fill: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    pub planar: f64,
    pub spatial: f64,
    pub exponent: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TricotConfig {
    pub spiral_alphas: Vec<f64>,
    pub chirp_alphas: Vec<f64>,
    pub chirp_beta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TheoremPhaseConfig {
    /// `(α, γ)` pairs.
    pub grid: Vec<[f64; 2]>,
    /// Relative offset of `γ` on either side of `α` for the continuity check.
    pub continuity_offset: f64,
    /// End time for rows with `α > 1`.
    pub rectifiable_t_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProjectionsConfig {
    pub grid: Vec<[f64; 2]>,
    /// `α` values for the reflected oscillatory graph.
    pub oscillatory_alphas: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PoincareConfig {
    pub alphas: Vec<f64>,
    pub t0: f64,
    pub t_max: f64,
    pub section_angle: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HopfConfig {
    pub ps: Vec<usize>,
    pub b_p: f64,
    /// Time offset `T0` placing the start on the attracted branch.
    pub t_offset: f64,
    /// `p` values run with `l = 2`; reported but not gated.
    pub experimental_l2_ps: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContentConfig {
    pub alpha: f64,
    pub log_exponents: Vec<f64>,
    pub scale_count: usize,
    /// Cut-off gap for the content spirals, in units of the finest scale; the
    /// ε-neighbourhood area needs the inner turns that box counts can skip.
    pub fill: f64,
    /// Raster cell as a fraction of the finest scale.
    pub raster_fraction: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            out_dir: PathBuf::from("results"),
            sampling: SamplingConfig::default(),
            tolerance: ToleranceConfig::default(),
            tricot: TricotConfig::default(),
            theorem_phase: TheoremPhaseConfig::default(),
            projections: ProjectionsConfig::default(),
            poincare: PoincareConfig::default(),
            hopf: HopfConfig::default(),
            content: ContentConfig::default(),
        }
    }
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            budget: 20_000_000,
            scale_count: 20,
            fill: crate::fractal::DEFAULT_FILL,
            rel_tol: 1e-10,
            abs_tol: 1e-13,
        }
    }
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            planar: 0.06,
            spatial: 0.08,
            exponent: 0.15,
        }
    }
}

impl Default for TricotConfig {
    fn default() -> Self {
        TricotConfig {
            spiral_alphas: vec![0.25, 0.5, 0.75, 1.0],
            chirp_alphas: vec![0.25, 0.5, 0.75],
            chirp_beta: 1.0,
        }
    }
}

impl Default for TheoremPhaseConfig {
    fn default() -> Self {
        TheoremPhaseConfig {
            grid: vec![
                [0.5, 1.0],
                [0.5, 0.5],
                [0.25, 1.0],
                [0.5, 0.25],
                [0.75, 0.25],
                [2.0, 1.0],
            ],
            continuity_offset: 0.05,
            rectifiable_t_max: 2000.0,
        }
    }
}

impl Default for ProjectionsConfig {
    fn default() -> Self {
        ProjectionsConfig {
            grid: vec![[0.5, 1.0], [0.25, 0.5]],
            oscillatory_alphas: vec![0.5],
        }
    }
}

impl Default for PoincareConfig {
    fn default() -> Self {
        PoincareConfig {
            alphas: vec![0.5, 0.75, 1.0],
            t0: 10.0,
            t_max: 2000.0,
            section_angle: 0.0,
        }
    }
}

impl Default for HopfConfig {
    fn default() -> Self {
        HopfConfig {
            ps: vec![2, 3, 4, 6],
            b_p: -1.0,
            t_offset: 1.0,
            experimental_l2_ps: vec![2, 4],
        }
    }
}

impl Default for ContentConfig {
    fn default() -> Self {
        ContentConfig {
            alpha: 0.5,
            log_exponents: vec![0.0, 1.0, 2.0],
            scale_count: 14,
            fill: 0.01,
            raster_fraction: 0.125,
        }
    }
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SuiteConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.sampling;
        if s.budget < crate::curves::MIN_BUDGET {
            return Err(Error::invalid(
                "sampling.budget",
                format!("{} is too small", s.budget),
            ));
        }
        if s.scale_count < crate::fractal::ScaleLadder::MIN_COUNT {
            return Err(Error::invalid(
                "sampling.scale_count",
                format!("{} is too small", s.scale_count),
            ));
        }
        if self.content.scale_count < crate::fractal::ScaleLadder::MIN_COUNT {
            return Err(Error::invalid(
                "content.scale_count",
                format!("{} is too small", self.content.scale_count),
            ));
        }
        if !(s.fill > 0.0 && s.fill <= 1.0) {
            return Err(Error::invalid(
                "sampling.fill",
                format!("{} must lie in (0, 1]", s.fill),
            ));
        }
        if !(s.rel_tol > 0.0 && s.abs_tol > 0.0) {
            return Err(Error::invalid("sampling.rel_tol/abs_tol", "must be positive"));
        }
        let t = &self.tolerance;
        for (name, v) in [
            ("tolerance.planar", t.planar),
            ("tolerance.spatial", t.spatial),
            ("tolerance.exponent", t.exponent),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::invalid(name, format!("{v} must be non-negative")));
            }
        }
        if !(self.content.fill > 0.0 && self.content.fill <= 1.0) {
            return Err(Error::invalid(
                "content.fill",
                format!("{} must lie in (0, 1]", self.content.fill),
            ));
        }
        if !(self.content.raster_fraction > 0.0 && self.content.raster_fraction <= 0.125) {
            return Err(Error::invalid("content.raster_fraction", "must lie in (0, 1/8]"));
        }
        let grid_values = |g: &[[f64; 2]]| g.iter().flatten().copied().collect::<Vec<_>>();
        let exponents: [(&str, Vec<f64>); 7] = [
            ("tricot.spiral_alphas", self.tricot.spiral_alphas.clone()),
            (
                "tricot.chirp_alphas",
                [&self.tricot.chirp_alphas[..], &[self.tricot.chirp_beta]].concat(),
            ),
            ("theorem_phase.grid", grid_values(&self.theorem_phase.grid)),
            ("projections.grid", grid_values(&self.projections.grid)),
            (
                "projections.oscillatory_alphas",
                self.projections.oscillatory_alphas.clone(),
            ),
            ("poincare.alphas", self.poincare.alphas.clone()),
            ("content.alpha", vec![self.content.alpha]),
        ];
        for (name, values) in exponents {
            if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
                return Err(Error::invalid(name, format!("{v} must be positive")));
            }
        }
        if self
            .content
            .log_exponents
            .iter()
            .any(|b| !(*b >= 0.0 && b.is_finite()))
        {
            return Err(Error::invalid("content.log_exponents", "must be non-negative"));
        }
        let p = &self.poincare;
        if !(p.t0 > 0.0 && p.t_max > p.t0) {
            return Err(Error::invalid("poincare.t0/t_max", "need 0 < t0 < t_max"));
        }
        if !(self.hopf.t_offset > 0.0 && self.hopf.b_p < 0.0) {
            return Err(Error::invalid("hopf", "need t_offset > 0 and b_p < 0"));
        }
        if self
            .hopf
            .ps
            .iter()
            .chain(&self.hopf.experimental_l2_ps)
            .any(|&p| p < 2)
        {
            return Err(Error::invalid("hopf.ps", "every p must be at least 2"));
        }
        Ok(())
    }
}
