use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::fit::WindowPolicy;
use super::ladder::ScaleLadder;
use crate::curve::{fmt_num, Curve};
use crate::error::{Error, Result};

/// Default working-memory cap for [`epsilon_measure`].
pub const DEFAULT_MEMORY_BUDGET: usize = 1 << 30;

/// `|A_ε|` per ladder scale.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasureProfile {
    pub ladder: ScaleLadder,
    pub measures: Vec<f64>,
    pub raster_cell: f64,
    pub ambient: usize,
}

impl MeasureProfile {
    /// Relative discretization error bound `√N · h / ε` at scale `k`.
    pub fn relative_error_bound(&self, k: usize) -> f64 {
        (self.ambient as f64).sqrt() * self.raster_cell / self.ladder.epsilons()[k]
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "epsilon,measure")?;
        for (eps, m) in self.ladder.epsilons().iter().zip(&self.measures) {
            writeln!(w, "{},{}", fmt_num(*eps), fmt_num(*m))?;
        }
        Ok(())
    }
}

/// Measure of the ε-neighbourhood of the curve at every ladder scale.
///
/// The polyline is rasterized on a grid of mesh `raster_cell` (chords are
/// subdivided so that no cell along the way is skipped), one exact squared
/// Euclidean distance transform is run, and `|A_ε|` is the measure of the cells
/// whose centre lies within `ε` of an occupied centre. The error is bounded by
/// [`MeasureProfile::relative_error_bound`].
pub fn epsilon_measure(curve: &Curve, ladder: &ScaleLadder, raster_cell: f64) -> Result<MeasureProfile> {
    epsilon_measure_with_budget(curve, ladder, raster_cell, DEFAULT_MEMORY_BUDGET)
}

pub fn epsilon_measure_with_budget(
    curve: &Curve,
    ladder: &ScaleLadder,
    raster_cell: f64,
    budget_bytes: usize,
) -> Result<MeasureProfile> {
    ladder.check_curve(curve)?;
    let h = raster_cell;
    if !(h > 0.0 && h <= ladder.eps_min() / 8.0 * (1.0 + 1e-12)) {
        return Err(Error::invalid(
            "raster_cell",
            format!(
                "{h} must be positive and at most eps_min/8 = {}",
                ladder.eps_min() / 8.0
            ),
        ));
    }
    let dim = curve.dim();
    let (lo, hi) = curve.bbox();
    let pad = (ladder.eps_max() / h).ceil() as i64 + 2;
    let mut origin = [0i64; 3];
    let mut shape = [1usize; 3];
    for k in 0..dim {
        origin[k] = (lo[k] / h).floor() as i64 - pad;
        shape[k] = ((hi[k] / h).floor() as i64 + pad - origin[k] + 1) as usize;
    }
    let cells: f64 = shape[..dim].iter().map(|&n| n as f64).product();
    // Two f32 grids plus per-line scratch.
    let required = cells * 8.0 + 64.0 * shape.iter().copied().max().unwrap() as f64;
    if required > budget_bytes as f64 {
        let suggested_cell = h * (required / budget_bytes as f64).powf(1.0 / dim as f64) * 1.05;
        return Err(Error::MemoryBudget {
            required_bytes: required as u64,
            budget_bytes: budget_bytes as u64,
            suggested_cell,
        });
    }

    let mut grid = vec![f32::INFINITY; cells as usize];
    let index = |c: [i64; 3]| -> usize {
        let mut idx = 0usize;
        for k in (0..dim).rev() {
            idx = idx * shape[k] + (c[k] - origin[k]) as usize;
        }
        idx
    };
    let mut mark = |p: &[f64]| {
        let mut c = [0i64; 3];
        for k in 0..dim {
            c[k] = (p[k] / h).floor() as i64;
        }
        grid[index(c)] = 0.0;
    };
    let pts: Vec<&[f64]> = curve.points().collect();
    mark(pts[0]);
    for w in pts.windows(2) {
        let len = crate::curve::dist(w[0], w[1]);
        let pieces = (2.0 * len / h).ceil().max(1.0) as usize;
        for j in 1..=pieces {
            let s = j as f64 / pieces as f64;
            let mut p = [0.0; 3];
            for k in 0..dim {
                p[k] = w[0][k] + s * (w[1][k] - w[0][k]);
            }
            mark(&p[..dim]);
        }
    }

    let d2 = squared_edt(grid, &shape[..dim]);
    let limit = (ladder.eps_max() / h).powi(2) as f32 * 1.001;
    let mut near: Vec<f32> = d2.into_par_iter().filter(|&v| v < limit).collect();
    near.par_sort_unstable_by(f32::total_cmp);
    let cell_measure = h.powi(dim as i32);
    let measures = ladder
        .epsilons()
        .iter()
        .map(|eps| {
            let r2 = ((eps / h) * (eps / h)) as f32;
            near.partition_point(|&v| v < r2) as f64 * cell_measure
        })
        .collect();
    Ok(MeasureProfile {
        ladder: ladder.clone(),
        measures,
        raster_cell: h,
        ambient: dim,
    })
}

/// Separable exact squared distance transform (in cell units) of a row-major grid
/// whose zero entries are sites. The result is returned in row-major order.
fn squared_edt(mut grid: Vec<f32>, shape: &[usize]) -> Vec<f32> {
    let mut shape = shape.to_vec();
    for _ in 0..shape.len() {
        let n = shape[0];
        grid.par_chunks_mut(n).for_each_init(
            || (vec![0usize; n], vec![0f64; n + 1], vec![0f32; n]),
            |(v, z, out), line| {
                lower_envelope(line, v, z, out);
                line.copy_from_slice(out);
            },
        );
        // Rotate axes so the next one becomes contiguous.
        if shape.len() > 1 {
            let rest: usize = shape[1..].iter().product();
            let mut rotated = vec![0f32; grid.len()];
            rotated.par_chunks_mut(rest).enumerate().for_each(|(i, chunk)| {
                for (r, slot) in chunk.iter_mut().enumerate() {
                    *slot = grid[i + n * r];
                }
            });
            grid = rotated;
            shape.rotate_left(1);
        }
    }
    grid
}

/// One-dimensional lower envelope of parabolas rooted at finite entries of `f`.
fn lower_envelope(f: &[f32], v: &mut [usize], z: &mut [f64], out: &mut [f32]) {
    let n = f.len();
    let mut k: isize = -1;
    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        let fq = f[q] as f64 + (q * q) as f64;
        loop {
            if k < 0 {
                k = 0;
                v[0] = q;
                z[0] = f64::NEG_INFINITY;
                break;
            }
            let p = v[k as usize];
            let fp = f[p] as f64 + (p * p) as f64;
            let s = (fq - fp) / (2.0 * (q as f64 - p as f64));
            if s <= z[k as usize] {
                k -= 1;
            } else {
                k += 1;
                v[k as usize] = q;
                z[k as usize] = s;
                break;
            }
        }
    }
    if k < 0 {
        out.fill(f32::INFINITY);
        return;
    }
    z[k as usize + 1] = f64::INFINITY;
    let mut j = 0;
    for (q, slot) in out.iter_mut().enumerate() {
        while z[j + 1] < q as f64 {
            j += 1;
        }
        let p = v[j];
        let d = q as f64 - p as f64;
        *slot = (d * d + f[p] as f64) as f32;
    }
}

/// Outcome of a content scan.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ContentVerdict {
    Nondegenerate,
    DegenerateDrift,
    /// Spread above the factor but not monotone.
    Irregular,
}

impl ContentVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            ContentVerdict::Nondegenerate => "nondegenerate",
            ContentVerdict::DegenerateDrift => "degenerate-drift",
            ContentVerdict::Irregular => "irregular",
        }
    }

    pub fn code(&self) -> u8 {
        match self {
            ContentVerdict::Nondegenerate => 0,
            ContentVerdict::DegenerateDrift => 1,
            ContentVerdict::Irregular => 2,
        }
    }
}

/// Content quotients `|A_ε| / ε^(N−s)` with a degeneracy verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ContentProfile {
    pub s: f64,
    pub ambient: usize,
    /// `(ε, quotient)` for every ladder scale.
    pub quotients: Vec<(f64, f64)>,
    pub window: [usize; 2],
    /// max/min quotient over the window.
    pub spread: f64,
    pub monotone: bool,
    pub verdict: ContentVerdict,
    pub spread_threshold: f64,
}

/// Spread factor separating bounded from drifting quotients.
pub const SPREAD_THRESHOLD: f64 = 4.0;

pub fn content_profile(profile: &MeasureProfile, s: f64) -> Result<ContentProfile> {
    content_profile_windowed(profile, s, WindowPolicy::default())
}

pub fn content_profile_windowed(
    profile: &MeasureProfile,
    s: f64,
    policy: WindowPolicy,
) -> Result<ContentProfile> {
    let n = profile.ambient as f64;
    if !(s > 0.0 && s <= n) {
        return Err(Error::invalid("s", format!("{s} must lie in (0, {n}]")));
    }
    let eps = profile.ladder.epsilons();
    let [start, end] = {
        let (a, b) = policy.resolve(eps.len())?;
        [a, b]
    };
    let quotients: Vec<(f64, f64)> = eps
        .iter()
        .zip(&profile.measures)
        .map(|(&e, &m)| (e, m / e.powf(n - s)))
        .collect();
    let win: Vec<f64> = quotients[start..end].iter().map(|q| q.1).collect();
    let max = win.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = win.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = max / min;
    let monotone = win.windows(2).all(|w| w[1] >= w[0]) || win.windows(2).all(|w| w[1] <= w[0]);
    let verdict = if spread <= SPREAD_THRESHOLD {
        ContentVerdict::Nondegenerate
    } else if monotone {
        ContentVerdict::DegenerateDrift
    } else {
        ContentVerdict::Irregular
    };
    Ok(ContentProfile {
        s,
        ambient: profile.ambient,
        quotients,
        window: [start, end],
        spread,
        monotone,
        verdict,
        spread_threshold: SPREAD_THRESHOLD,
    })
}
