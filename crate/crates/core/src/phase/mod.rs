//! Polar geometry of planar curves: unwrapping, waves, return maps, length,
//! projections and lifts.

mod length;
mod poincare;
mod polar;
mod surface;

pub use length::{
    arc_length_profile, ArcLengthReport, Rectifiability, MIN_SAMPLES, STABILITY_TOLERANCE, TAIL_FRACTION,
    TAIL_WINDOWS,
};
pub use poincare::{fit_return_exponent, poincare_sequence, ExponentEstimate, ReturnSequence, MIN_CROSSINGS};
pub use polar::{
    check_radially_decreasing, classify_curve, unwrap_phase, Classification, PolarProfile, Regime,
    WavyReport, BASE_ANGLES, CLASSIFY_MIN_TURNS, CLASSIFY_TAIL_TURNS, UNDER_SAMPLED_STEP, WAVE_THRESHOLD,
};
pub use surface::{
    bilipschitz_ratio_scan, envelope_exponent, lift_to_surface, project, Plane, RatioScan, SurfaceSpec,
    FAR_MAX, FAR_MIN, NEAR_MAX, TREND_LEVELS,
};
