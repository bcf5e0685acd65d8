use std::io::Write;

use rayon::prelude::*;

use super::ladder::ScaleLadder;
use crate::curve::{fmt_num, Curve};
use crate::error::{Error, Result};

/// Occupied-cell counts per ladder scale.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaleCounts {
    pub ladder: ScaleLadder,
    pub counts: Vec<u64>,
    pub ambient: usize,
}

impl ScaleCounts {
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "epsilon,count")?;
        for (eps, n) in self.ladder.epsilons().iter().zip(&self.counts) {
            writeln!(w, "{},{n}", fmt_num(*eps))?;
        }
        Ok(())
    }
}

/// Counts grid cells of mesh `ε` (anchored at the origin) holding at least one sample.
pub fn box_count(curve: &Curve, ladder: &ScaleLadder) -> Result<ScaleCounts> {
    box_count_anchored(curve, ladder, &[0.0; 3])
}

/// [`box_count`] with the grid anchored at `anchor` instead of the origin.
pub fn box_count_anchored(curve: &Curve, ladder: &ScaleLadder, anchor: &[f64]) -> Result<ScaleCounts> {
    ladder.check_curve(curve)?;
    if anchor.len() < curve.dim() {
        return Err(Error::invalid("anchor", "needs one coordinate per axis"));
    }
    let counts = ladder
        .epsilons()
        .par_iter()
        .map(|&eps| count_cells(curve, eps, &anchor[..curve.dim()]))
        .collect();
    Ok(ScaleCounts {
        ladder: ladder.clone(),
        counts,
        ambient: curve.dim(),
    })
}

fn count_cells(curve: &Curve, eps: f64, anchor: &[f64]) -> u64 {
    let dim = curve.dim();
    let (lo, hi) = curve.bbox();
    let cell = |v: f64, k: usize| ((v - anchor[k]) / eps).floor() as i64;
    let mut base = [0i64; 3];
    let mut shift = [0u32; 3];
    let mut bits_total = 0u32;
    for k in 0..dim {
        base[k] = cell(lo[k], k) - 1;
        let span = (cell(hi[k], k) + 1 - base[k]) as u64 + 1;
        shift[k] = bits_total;
        bits_total += 64 - span.leading_zeros();
    }
    if bits_total > 64 {
        return count_cells_wide(curve, eps, anchor);
    }
    let mut keys: Vec<u64> = Vec::new();
    let mut prev = u64::MAX;
    for p in curve.points() {
        let mut key = 0u64;
        for k in 0..dim {
            key |= ((cell(p[k], k) - base[k]) as u64) << shift[k];
        }
        if key != prev {
            keys.push(key);
            prev = key;
        }
    }
    keys.sort_unstable();
    keys.dedup();
    keys.len() as u64
}

fn count_cells_wide(curve: &Curve, eps: f64, anchor: &[f64]) -> u64 {
    let dim = curve.dim();
    let mut keys: Vec<[i64; 3]> = Vec::new();
    for p in curve.points() {
        let mut key = [0i64; 3];
        for k in 0..dim {
            key[k] = ((p[k] - anchor[k]) / eps).floor() as i64;
        }
        if keys.last() != Some(&key) {
            keys.push(key);
        }
    }
    keys.sort_unstable();
    keys.dedup();
    keys.len() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curve::{Asymptote, Provenance};
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn brute_force(curve: &Curve, eps: f64) -> u64 {
        let cells: HashSet<Vec<i64>> = curve
            .points()
            .map(|p| p.iter().map(|v| (v / eps).floor() as i64).collect())
            .collect();
        cells.len() as u64
    }

    fn polyline(dim: usize, coords: Vec<f64>) -> Curve {
        let n = coords.len() / dim;
        Curve::new(
            dim,
            (0..n).map(|i| i as f64).collect(),
            coords,
            Provenance::new("test", Asymptote::None),
        )
        .unwrap()
    }

    #[test]
    fn unit_segment_quarter_cells() {
        let n = 4001;
        let coords = (0..n).flat_map(|i| [i as f64 / (n - 1) as f64, 0.0]).collect();
        let c = polyline(2, coords);
        let ladder = ScaleLadder::geometric(0.25, 0.5, 8).unwrap();
        let counts = box_count(&c, &ladder).unwrap();
        assert_eq!(counts.counts[0], brute_force(&c, 0.25));
        // x = 1 sits on the boundary of a fifth cell.
        assert_eq!(counts.counts[0], 5);
    }

    #[test]
    fn single_point_and_refusal() {
        let c = polyline(2, vec![0.3, 0.7, 0.3, 0.7]);
        let ladder = ScaleLadder::geometric(1.0, 0.5, 10).unwrap();
        assert!(box_count(&c, &ladder).unwrap().counts.iter().all(|&n| n == 1));

        let c = polyline(2, vec![0.0, 0.0, 0.1, 0.0]);
        match box_count(&c, &ladder).unwrap_err() {
            Error::ScaleBelowChord { min_admissible, .. } => assert!((min_admissible - 0.2).abs() < 1e-15),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn wide_keys_agree_with_packed() {
        let coords = (0..5000)
            .flat_map(|i| {
                let t = i as f64 * 1e-3;
                [t.cos() * t, t.sin() * t, -0.3 * t]
            })
            .collect();
        let c = polyline(3, coords);
        let anchor = [0.013, -0.2, 0.7];
        for eps in [0.5, 0.05, 0.01] {
            assert_eq!(count_cells(&c, eps, &anchor), count_cells_wide(&c, eps, &anchor));
        }
    }

    proptest! {
        #[test]
        fn matches_brute_force_and_halving_is_monotone(
            dim in 2usize..4,
            seed_pts in proptest::collection::vec(-1.0f64..1.0, 30..300),
            step in 1e-4f64..2e-3,
        ) {
            // Random walk with bounded steps.
            let mut coords = Vec::new();
            let mut cur = vec![0.0; dim];
            for chunk in seed_pts.chunks_exact(dim) {
                for k in 0..dim {
                    cur[k] += chunk[k] * step;
                }
                coords.extend_from_slice(&cur);
            }
            prop_assume!(coords.len() >= 2 * dim);
            let c = polyline(dim, coords);
            let ladder = ScaleLadder::geometric(0.5, ScaleLadder::DEFAULT_RATIO, 12).unwrap();
            prop_assume!(ladder.check_curve(&c).is_ok());
            let counts = box_count(&c, &ladder).unwrap();
            for (eps, n) in ladder.epsilons().iter().zip(&counts.counts) {
                prop_assert_eq!(*n, brute_force(&c, *eps));
            }
            // Halving nests the grids, so counts cannot drop.
            let halving = ScaleLadder::geometric(2.0, 0.5, 8).unwrap();
            prop_assume!(halving.check_curve(&c).is_ok());
            let nested = box_count(&c, &halving).unwrap();
            for w in nested.counts.windows(2) {
                prop_assert!(w[1] >= w[0]);
            }
        }
    }
}
