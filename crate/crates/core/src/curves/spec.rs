use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::curve::Provenance;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trig {
    Sin,
    Cos,
}

impl Trig {
    pub fn eval(self, u: f64) -> f64 {
        match self {
            Trig::Sin => u.sin(),
            Trig::Cos => u.cos(),
        }
    }

    /// Derivative of [`Trig::eval`] with respect to its argument.
    pub fn deriv(self, u: f64) -> f64 {
        match self {
            Trig::Sin => u.cos(),
            Trig::Cos => -u.sin(),
        }
    }
}

/// `X(τ) = τ^α · trig(τ^(−β) + phase_shift)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChirpSpec {
    pub alpha: f64,
    pub beta: f64,
    pub phase_shift: f64,
    pub trig: Trig,
}

impl ChirpSpec {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        let s = ChirpSpec {
            alpha,
            beta,
            phase_shift: 0.0,
            trig: Trig::Sin,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        positive("alpha", self.alpha)?;
        positive("beta", self.beta)?;
        finite("phase_shift", self.phase_shift)
    }

    pub fn value(&self, tau: f64) -> f64 {
        tau.powf(self.alpha) * self.trig.eval(tau.powf(-self.beta) + self.phase_shift)
    }

    /// Box dimension of the graph for `0 < α < β`.
    pub fn predicted_dimension(&self) -> f64 {
        2.0 - (self.alpha + 1.0) / (self.beta + 1.0)
    }

    pub fn provenance(&self, generator: &str, asymptote: crate::curve::Asymptote) -> Provenance {
        Provenance::new(generator, asymptote)
            .with("alpha", self.alpha)
            .with("beta", self.beta)
            .with("phase_shift", self.phase_shift)
            .with("trig", format!("{:?}", self.trig).to_lowercase())
    }
}

/// Polar spiral `r = φ^(−α) (log φ)^β`, optionally mirrored across the x-axis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerSpiralSpec {
    pub alpha: f64,
    pub log_exponent: f64,
    pub phi_min: f64,
    pub mirror: bool,
}

impl PowerSpiralSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        let s = PowerSpiralSpec {
            alpha,
            log_exponent: 0.0,
            phi_min: 1.01,
            mirror: false,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        positive("alpha", self.alpha)?;
        finite("log_exponent", self.log_exponent)?;
        if !(self.phi_min > 1.0 && self.phi_min.is_finite()) {
            return Err(Error::invalid(
                "phi_min",
                format!("{} must exceed 1", self.phi_min),
            ));
        }
        Ok(())
    }

    pub fn radius(&self, phi: f64) -> f64 {
        let r = phi.powf(-self.alpha);
        if self.log_exponent == 0.0 {
            r
        } else {
            r * phi.ln().powf(self.log_exponent)
        }
    }

    pub fn radius_deriv(&self, phi: f64) -> f64 {
        self.radius(phi) * (self.log_exponent / (phi * phi.ln()) - self.alpha / phi)
    }

    /// Angle beyond which the radius decreases monotonically.
    pub fn decreasing_from(&self) -> f64 {
        if self.log_exponent > 0.0 {
            self.phi_min.max((self.log_exponent / self.alpha).exp())
        } else {
            self.phi_min
        }
    }

    pub fn predicted_dimension(&self) -> f64 {
        if self.alpha <= 1.0 {
            2.0 / (1.0 + self.alpha)
        } else {
            1.0
        }
    }

    pub fn provenance(&self) -> Provenance {
        Provenance::new("power_spiral", crate::curve::Asymptote::ParamToInfinity)
            .with("alpha", self.alpha)
            .with("log_exponent", self.log_exponent)
            .with("phi_min", self.phi_min)
            .with("mirror", self.mirror)
    }
}

/// The `(α, γ, K)` family: `p(t) = t^(−α) log^k t`, `q(t) = K t log^l t`,
/// solution `x = C1 p sin q + C2 p cos q`, height `z = (t − C3)^(−γ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryFamilySpec {
    pub alpha: f64,
    pub gamma: f64,
    pub k_slope: f64,
    pub log_p_exponent: u32,
    pub log_q_exponent: u32,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub t0: f64,
}

impl TrajectoryFamilySpec {
    /// Pure-power family with `K = 1`, `C1 = 1`, `C2 = C3 = 0` and the default start time.
    pub fn new(alpha: f64, gamma: f64) -> Result<Self> {
        let s = TrajectoryFamilySpec {
            alpha,
            gamma,
            k_slope: 1.0,
            log_p_exponent: 0,
            log_q_exponent: 0,
            c1: 1.0,
            c2: 0.0,
            c3: 0.0,
            t0: 1.0,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn has_log_factors(&self) -> bool {
        self.log_p_exponent > 0 || self.log_q_exponent > 0
    }

    /// Default start time: 1 for pure powers, `e²` with log factors.
    pub fn default_t0(&self) -> f64 {
        if self.has_log_factors() {
            E * E
        } else {
            1.0
        }
    }

    pub fn with_logs(mut self, k: u32, l: u32) -> Result<Self> {
        let reset = self.t0 == self.default_t0();
        self.log_p_exponent = k;
        self.log_q_exponent = l;
        if reset {
            self.t0 = self.default_t0();
        }
        self.validate()?;
        Ok(self)
    }

    pub fn with_t0(mut self, t0: f64) -> Result<Self> {
        self.t0 = t0;
        self.validate()?;
        Ok(self)
    }

    /// `δ = (γ + 1)/γ`.
    pub fn delta(&self) -> f64 {
        (self.gamma + 1.0) / self.gamma
    }

    pub fn amplitude(&self) -> f64 {
        self.c1.hypot(self.c2)
    }

    pub fn phase(&self) -> f64 {
        self.c2.atan2(self.c1)
    }

    pub fn validate(&self) -> Result<()> {
        positive("alpha", self.alpha)?;
        positive("gamma", self.gamma)?;
        positive("K", self.k_slope)?;
        finite("C1", self.c1)?;
        finite("C2", self.c2)?;
        finite("C3", self.c3)?;
        if self.c1 == 0.0 && self.c2 == 0.0 {
            return Err(Error::invalid("C1, C2", "must not both be zero"));
        }
        if !(self.t0 > 0.0 && self.t0.is_finite() && self.t0 > self.c3) {
            return Err(Error::invalid(
                "t0",
                format!("{} must be positive and exceed C3", self.t0),
            ));
        }
        if self.has_log_factors() && self.t0 <= E {
            return Err(Error::invalid(
                "t0",
                format!("{} must exceed e when log factors are on", self.t0),
            ));
        }
        // Sign conditions on a log-spaced sample of [t0, 1e6 t0].
        for i in 0..=60 {
            let t = self.t0 * 10f64.powf(i as f64 / 10.0);
            let jet = super::family::jet_unchecked(self, t, 1);
            if !(jet.p[0] > 0.0 && jet.p[1] * t <= 1e-9 * jet.p[0] && jet.q[0] > 0.0 && jet.q[1] > 0.0) {
                return Err(Error::invalid(
                    "t0",
                    format!(
                        "{} too small: need p > 0, p' <= 0, q' > 0 on [t0, inf); fails at t = {t:.4}",
                        self.t0
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Box dimension of the spatial trajectory for `α ∈ (0, 1)`.
    pub fn predicted_dimension(&self) -> f64 {
        if self.alpha > 1.0 {
            1.0
        } else if self.gamma >= self.alpha {
            2.0 / (1.0 + self.alpha)
        } else {
            2.0 - (self.alpha + self.gamma) / (1.0 + self.gamma)
        }
    }

    /// Box dimension of the `xz` and `yz` projections.
    pub fn predicted_projection_dimension(&self) -> f64 {
        2.0 - (self.alpha + self.gamma) / (1.0 + self.gamma)
    }

    pub fn provenance(&self, generator: &str) -> Provenance {
        Provenance::new(generator, crate::curve::Asymptote::ParamToInfinity)
            .with("alpha", self.alpha)
            .with("gamma", self.gamma)
            .with("K", self.k_slope)
            .with("log_p_exponent", self.log_p_exponent)
            .with("log_q_exponent", self.log_q_exponent)
            .with("C1", self.c1)
            .with("C2", self.c2)
            .with("C3", self.c3)
            .with("t0", self.t0)
    }
}

/// Radial direction of the planar part of the normal form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Focus {
    /// `ṙ = r(r^{2l} + Σ a_i r^{2i})` as written.
    Repelling,
    /// The time-reversed planar part `ṙ = −r(r^{2l} + Σ a_i r^{2i})`.
    Attracting,
}

/// Reduced normal form in cylindrical coordinates:
/// `ṙ = ±r(r^{2l} + Σ_{i<l} a_i r^{2i})`, `φ̇ = ω`, `ż = Σ_{i≥2} b_i z^i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalFormSpec {
    pub l: u32,
    /// `a_0 .. a_{l−1}`.
    pub a: Vec<f64>,
    /// `b_2 .. b_n`.
    pub b: Vec<f64>,
    pub omega: f64,
    pub focus: Focus,
}

impl NormalFormSpec {
    /// `l`-th order focus with all `a_i = 0` and `ż = b_p z^p`.
    pub fn reduced(l: u32, p: usize, b_p: f64) -> Result<Self> {
        if p < 2 {
            return Err(Error::invalid("p", format!("{p} must be at least 2")));
        }
        let mut b = vec![0.0; p - 1];
        b[p - 2] = b_p;
        let s = NormalFormSpec {
            l,
            a: vec![0.0; l as usize],
            b,
            omega: 1.0,
            focus: Focus::Repelling,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn with_focus(mut self, focus: Focus) -> Self {
        self.focus = focus;
        self
    }

    /// Smallest `p` with `b_p ≠ 0`.
    pub fn p_index(&self) -> Option<usize> {
        self.b.iter().position(|&v| v != 0.0).map(|i| i + 2)
    }

    pub fn validate(&self) -> Result<()> {
        if self.l == 0 {
            return Err(Error::invalid("l", "must be positive"));
        }
        if self.a.len() != self.l as usize {
            return Err(Error::invalid(
                "a",
                format!("expected {} coefficients a_0..a_(l-1)", self.l),
            ));
        }
        for &v in self.a.iter().chain(&self.b) {
            finite("a/b coefficient", v)?;
        }
        positive("omega", self.omega)
    }

    /// Checks the hypotheses of the limit-cycle dimension result: `l = 1`, `a_0 = 0`, `b_p < 0`.
    pub fn validate_limit_cycle_case(&self) -> Result<()> {
        self.validate()?;
        if self.l != 1 || self.a[0] != 0.0 {
            return Err(Error::invalid("l, a", "need l = 1 and a_0 = 0"));
        }
        match self.p_index() {
            Some(p) if self.b[p - 2] < 0.0 => Ok(()),
            Some(_) => Err(Error::invalid(
                "b_p",
                "first nonzero b coefficient must be negative",
            )),
            None => Err(Error::invalid("b", "needs a nonzero coefficient")),
        }
    }

    pub fn radial_rate(&self, r: f64) -> f64 {
        let r2 = r * r;
        let mut poly = r2.powi(self.l as i32);
        let mut rp = 1.0;
        for &a in &self.a {
            poly += a * rp;
            rp *= r2;
        }
        let v = r * poly;
        match self.focus {
            Focus::Repelling => v,
            Focus::Attracting => -v,
        }
    }

    pub fn vertical_rate(&self, z: f64) -> f64 {
        let mut zi = z * z;
        let mut acc = 0.0;
        for &b in &self.b {
            acc += b * zi;
            zi *= z;
        }
        acc
    }

    /// Predicted dimension for `l = 1`.
    pub fn predicted_dimension(&self) -> Option<f64> {
        let p = self.p_index()? as f64;
        let l = self.l as f64;
        if self.l == 1 {
            Some(if p <= 3.0 {
                4.0 / 3.0
            } else {
                1.5 - 1.0 / (2.0 * p)
            })
        } else {
            Some(((4.0 * l - 1.0) * p - 2.0 * l + 1.0) / (2.0 * l * p))
        }
    }

    pub fn provenance(&self) -> Provenance {
        let join = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        Provenance::new("normal_form", crate::curve::Asymptote::ParamToInfinity)
            .with("l", self.l)
            .with("a", join(&self.a))
            .with("b", join(&self.b))
            .with("omega", self.omega)
            .with("focus", format!("{:?}", self.focus).to_lowercase())
    }
}

pub(crate) fn positive(name: &'static str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{v} must be positive and finite")))
    }
}

pub(crate) fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(name, format!("{v} must be finite")))
    }
}
