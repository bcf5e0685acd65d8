use std::f64::consts::PI;

use crate::curve::dist;
use crate::error::{Error, Result};

/// Samples per full turn of the oscillation phase.
pub const SAMPLES_PER_TURN: f64 = 32.0;

/// Largest phase increment between consecutive samples.
pub const MAX_PHASE_STEP: f64 = 2.0 * PI / SAMPLES_PER_TURN;

/// Largest angle subtended at the origin by consecutive planar samples.
pub const MAX_POLAR_STEP: f64 = PI / 8.0;

/// Chord bound and sample budget shared by every generator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sampling {
    pub max_chord: f64,
    pub budget: usize,
}

impl Sampling {
    pub fn new(max_chord: f64, budget: usize) -> Result<Self> {
        let s = Sampling { max_chord, budget };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.max_chord > 0.0 && self.max_chord.is_finite()) {
            return Err(Error::invalid(
                "max_chord",
                format!("{} must be positive", self.max_chord),
            ));
        }
        if self.budget < 2 {
            return Err(Error::invalid("budget", "must allow at least 2 samples"));
        }
        Ok(())
    }
}

pub(crate) struct Path {
    pub params: Vec<f64>,
    pub coords: Vec<f64>,
    /// False when the budget ran out before `s1`.
    pub complete: bool,
}

pub(crate) struct PathSpec<F, G> {
    pub dim: usize,
    pub point: F,
    pub phase: G,
    pub polar_limit: bool,
}

/// Walks from `s0` to `s1` (either direction), choosing each step so the phase
/// advances at most [`MAX_PHASE_STEP`], the chord stays within `max_chord` and,
/// when `polar_limit` is set, the planar angle around the origin advances at
/// most [`MAX_POLAR_STEP`].
pub(crate) fn sample_path<F, G>(spec: &PathSpec<F, G>, s0: f64, s1: f64, sampling: Sampling) -> Path
where
    F: Fn(f64) -> [f64; 3],
    G: Fn(f64) -> f64,
{
    let dim = spec.dim;
    let dir = if s1 >= s0 { 1.0 } else { -1.0 };
    let mut params = vec![s0];
    let mut coords = Vec::with_capacity(dim * 1024);
    let mut cur = (spec.point)(s0);
    coords.extend_from_slice(&cur[..dim]);
    let mut cur_phase = (spec.phase)(s0);
    let mut s = s0;
    let mut h = (s1 - s0).abs() * 1e-6;
    let min_h = s.abs().max(1.0) * 1e-15;
    while (s1 - s) * dir > 0.0 {
        if params.len() >= sampling.budget {
            return Path {
                params,
                coords,
                complete: false,
            };
        }
        h = h.max(min_h);
        let (next_s, next, next_phase) = loop {
            let step = h.min((s1 - s).abs());
            let cand_s = if step == (s1 - s).abs() {
                s1
            } else {
                s + dir * step
            };
            let cand = (spec.point)(cand_s);
            let cand_phase = (spec.phase)(cand_s);
            let ok = (cand_phase - cur_phase).abs() <= MAX_PHASE_STEP
                && dist(&cand[..dim], &cur[..dim]) <= sampling.max_chord
                && (!spec.polar_limit || polar_step(&cur, &cand) <= MAX_POLAR_STEP);
            if ok || step <= min_h {
                break (cand_s, cand, cand_phase);
            }
            h = step * 0.5;
        };
        params.push(next_s);
        coords.extend_from_slice(&next[..dim]);
        s = next_s;
        cur = next;
        cur_phase = next_phase;
        h *= 1.5;
    }
    Path {
        params,
        coords,
        complete: true,
    }
}

fn polar_step(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let cross = a[0] * b[1] - a[1] * b[0];
    let dot = a[0] * b[0] + a[1] * b[1];
    cross.abs().atan2(dot)
}
