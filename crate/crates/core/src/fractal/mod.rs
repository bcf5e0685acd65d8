//! Box counting, ε-neighbourhood measures and scaling-exponent fits.

mod boxcount;
mod fit;
mod ladder;
mod measure;

pub use boxcount::{box_count, box_count_anchored, ScaleCounts};
pub use fit::{fit_dimension, least_squares, DimensionEstimate, LineFit, WindowPolicy, MIN_BAND};
pub use ladder::ScaleLadder;
pub use measure::{
    content_profile, content_profile_windowed, epsilon_measure, epsilon_measure_with_budget, ContentProfile,
    ContentVerdict, MeasureProfile, DEFAULT_MEMORY_BUDGET, SPREAD_THRESHOLD,
};

use std::f64::consts::PI;

use crate::curves::{gen_chirp_graph, ChirpSpec, Sampling};
use crate::error::Result;

/// Gap between neighbouring oscillations at the generation cut-off, in units of
/// the finest ladder scale.
pub const DEFAULT_FILL: f64 = 0.1;

/// Box dimension of a chirp graph over `τ ∈ (0, 1]` with the default ladder.
///
/// The graph is cut where the half-period `π τ^(β+1)/β` shrinks to
/// [`DEFAULT_FILL`] times the finest scale, so every ladder scale sees a filled region.
pub fn graph_dimension(chirp: &ChirpSpec, budget: usize) -> Result<DimensionEstimate> {
    chirp.validate()?;
    let count = ScaleLadder::DEFAULT_COUNT;
    let eps_min = ScaleLadder::planned_eps_min(5f64.sqrt(), count);
    let beta = chirp.beta;
    let tau_min = (beta * DEFAULT_FILL * eps_min / PI).powf(1.0 / (beta + 1.0));
    let curve = gen_chirp_graph(chirp, 1.0, tau_min, Sampling::new(eps_min / 4.0, budget)?)?;
    let ladder = ScaleLadder::for_curve(&curve, count)?;
    fit_dimension(&box_count(&curve, &ladder)?, WindowPolicy::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectifiable_chirp_graph() {
        let c = ChirpSpec::new(1.5, 1.0).unwrap();
        let est = graph_dimension(&c, 2_000_000).unwrap();
        assert!(est.within(1.0, 0.03), "{est:?}");
    }

    #[test]
    fn standard_chirp_graphs() {
        for (a, b) in [(0.5, 1.0), (0.5, 0.75)] {
            let c = ChirpSpec::new(a, b).unwrap();
            let est = graph_dimension(&c, 4_000_000).unwrap();
            println!("({a},{b}) -> {} ± {}", est.value, est.band);
            assert!(est.within(c.predicted_dimension(), 0.05), "({a},{b}): {est:?}");
        }
    }
}
