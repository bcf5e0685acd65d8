use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::curve::{fmt_num, Curve, Provenance};
use crate::error::{Error, Result};

/// Wrapped angular steps at or above this are treated as aliased.
pub const UNDER_SAMPLED_STEP: f64 = 0.9 * PI;

/// Unwrapped polar coordinates of a planar curve, in sample order.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarProfile {
    pub phis: Vec<f64>,
    pub radii: Vec<f64>,
    /// Parameters of the source curve.
    pub params: Vec<f64>,
    pub provenance: Provenance,
}

impl PolarProfile {
    pub fn len(&self) -> usize {
        self.phis.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phis.is_empty()
    }

    /// Net number of turns, signed by orientation.
    pub fn turns(&self) -> f64 {
        (self.phis[self.len() - 1] - self.phis[0]) / (2.0 * PI)
    }

    /// Points rebuilt from `(φ, r)`.
    pub fn rewrap(&self) -> Vec<[f64; 2]> {
        self.phis
            .iter()
            .zip(&self.radii)
            .map(|(&p, &r)| [r * p.cos(), r * p.sin()])
            .collect()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "phi,r")?;
        for (p, r) in self.phis.iter().zip(&self.radii) {
            writeln!(w, "{},{}", fmt_num(*p), fmt_num(*r))?;
        }
        Ok(())
    }
}

/// Continuous polar angle and radius of a planar curve.
pub fn unwrap_phase(curve: &Curve) -> Result<PolarProfile> {
    if curve.dim() != 2 {
        return Err(Error::invalid(
            "curve",
            format!("needs a planar curve, got dimension {}", curve.dim()),
        ));
    }
    let mut phis = Vec::with_capacity(curve.len());
    let mut radii = Vec::with_capacity(curve.len());
    let mut prev_raw = 0.0;
    for (i, p) in curve.points().enumerate() {
        let r = p[0].hypot(p[1]);
        if r == 0.0 {
            return Err(Error::AtOrigin { index: i });
        }
        let raw = p[1].atan2(p[0]);
        let phi = if i == 0 {
            raw
        } else {
            let mut step = raw - prev_raw;
            step -= 2.0 * PI * (step / (2.0 * PI)).round();
            if step.abs() >= UNDER_SAMPLED_STEP {
                return Err(Error::UnderSampled { index: i, step });
            }
            phis[i - 1] + step
        };
        prev_raw = raw;
        phis.push(phi);
        radii.push(r);
    }
    Ok(PolarProfile {
        phis,
        radii,
        params: curve.params().to_vec(),
        provenance: curve.provenance().clone(),
    })
}

/// Relative radial rise that counts as a wave.
pub const WAVE_THRESHOLD: f64 = 1e-2;

/// Base angles per turn for the cross-turn comparison.
pub const BASE_ANGLES: usize = 512;

/// Local radial increases along a profile.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WavyReport {
    /// Runs along the curve on which the radius grows by more than
    /// [`WAVE_THRESHOLD`] of its starting value.
    pub violation_count: usize,
    pub violation_intervals: Vec<(f64, f64)>,
    /// Largest relative rise over any run.
    pub max_rise: f64,
    /// Base-angle pairs `(θ + 2kπ, θ + 2(k+1)π)` with `f` larger on the inner turn.
    pub cross_turn_violations: usize,
    pub threshold: f64,
}

impl WavyReport {
    pub fn is_wavy(&self) -> bool {
        self.violation_count > 0
    }
}

/// Scans a profile for waves (local radius increases towards the end of the
/// curve) and for turn-to-turn increases of `f(φ + 2kπ)`.
pub fn check_radially_decreasing(profile: &PolarProfile) -> Result<WavyReport> {
    let turns = profile.turns().abs();
    if turns < 3.0 {
        return Err(Error::InsufficientTurns {
            found: turns.floor() as usize,
            required: 3,
        });
    }
    let r = &profile.radii;
    let mut violation_intervals = Vec::new();
    let mut max_rise: f64 = 0.0;
    let mut i = 0;
    while i + 1 < r.len() {
        if r[i + 1] > r[i] {
            let start = i;
            while i + 1 < r.len() && r[i + 1] > r[i] {
                i += 1;
            }
            let rise = (r[i] - r[start]) / r[start];
            max_rise = max_rise.max(rise);
            if rise > WAVE_THRESHOLD {
                violation_intervals.push((profile.phis[start], profile.phis[i]));
            }
        } else {
            i += 1;
        }
    }
    Ok(WavyReport {
        violation_count: violation_intervals.len(),
        violation_intervals,
        max_rise,
        cross_turn_violations: cross_turn_violations(profile),
        threshold: WAVE_THRESHOLD,
    })
}

/// `f(φ)` on a monotone stretch of the profile, by linear interpolation.
fn radius_at(progress: &[f64], radii: &[f64], s: f64) -> Option<f64> {
    let j = progress.partition_point(|&v| v < s);
    if j == 0 || j >= progress.len() {
        return None;
    }
    let (a, b) = (progress[j - 1], progress[j]);
    let w = if b > a { (s - a) / (b - a) } else { 0.0 };
    Some(radii[j - 1] + w * (radii[j] - radii[j - 1]))
}

fn cross_turn_violations(profile: &PolarProfile) -> usize {
    let sign = profile.turns().signum();
    let progress: Vec<f64> = profile
        .phis
        .iter()
        .map(|p| sign * (p - profile.phis[0]))
        .collect();
    if progress.windows(2).any(|w| w[1] < w[0]) {
        // Not a polar graph; the comparison is undefined.
        return 0;
    }
    let mut count = 0;
    for j in 0..BASE_ANGLES {
        let theta = 2.0 * PI * j as f64 / BASE_ANGLES as f64;
        let mut prev = radius_at(&progress, &profile.radii, theta);
        let mut k = 1;
        while let Some(outer) = prev {
            let inner = radius_at(&progress, &profile.radii, theta + 2.0 * PI * k as f64);
            if let Some(v) = inner {
                if v > outer {
                    count += 1;
                }
            }
            prev = inner;
            k += 1;
        }
    }
    count
}

/// Regime of a chirp phase curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    NonAccumulating,
    WavySpiral,
    Spiral,
    Inconclusive,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::NonAccumulating => "non-accumulating",
            Regime::WavySpiral => "wavy-spiral",
            Regime::Spiral => "spiral",
            Regime::Inconclusive => "inconclusive",
        }
    }

    pub fn code(&self) -> u8 {
        match self {
            Regime::NonAccumulating => 0,
            Regime::WavySpiral => 1,
            Regime::Spiral => 2,
            Regime::Inconclusive => 3,
        }
    }
}

/// Turns needed before a regime is decided.
pub const CLASSIFY_MIN_TURNS: usize = 20;

/// Turns at the end of the curve whose peak radii must decrease for accumulation.
pub const CLASSIFY_TAIL_TURNS: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Classification {
    pub regime: Regime,
    pub alpha: f64,
    pub beta: f64,
    pub turns: f64,
    /// Largest radius on each of the final turns, outermost first.
    pub tail_peaks: Vec<f64>,
    pub wavy: Option<WavyReport>,
}

/// Sorts a chirp phase curve `(x, ẋ)` into one of the three regimes.
///
/// The curve accumulates when the per-turn peak radius decreases over the
/// final [`CLASSIFY_TAIL_TURNS`] turns; an accumulating curve is wavy when
/// [`check_radially_decreasing`] finds waves.
pub fn classify_curve(curve: &Curve, alpha: f64, beta: f64) -> Result<Classification> {
    let profile = unwrap_phase(curve)?;
    let turns = profile.turns().abs();
    let mut out = Classification {
        regime: Regime::Inconclusive,
        alpha,
        beta,
        turns,
        tail_peaks: Vec::new(),
        wavy: None,
    };
    if turns < CLASSIFY_MIN_TURNS as f64 {
        return Ok(out);
    }
    let peaks = turn_peaks(&profile);
    let tail = &peaks[peaks.len() - CLASSIFY_TAIL_TURNS..];
    out.tail_peaks = tail.to_vec();
    if !tail.windows(2).all(|w| w[1] < w[0]) {
        out.regime = Regime::NonAccumulating;
        return Ok(out);
    }
    let wavy = check_radially_decreasing(&profile)?;
    out.regime = if wavy.is_wavy() {
        Regime::WavySpiral
    } else {
        Regime::Spiral
    };
    out.wavy = Some(wavy);
    Ok(out)
}

/// Peak radius on each complete turn.
fn turn_peaks(profile: &PolarProfile) -> Vec<f64> {
    let start = profile.phis[0];
    let mut peaks = Vec::new();
    let mut current = 0usize;
    let mut peak: f64 = 0.0;
    for (p, r) in profile.phis.iter().zip(&profile.radii) {
        let k = ((p - start).abs() / (2.0 * PI)).floor() as usize;
        if k != current {
            peaks.push(peak);
            peak = 0.0;
            current = k;
        }
        peak = peak.max(*r);
    }
    peaks
}
