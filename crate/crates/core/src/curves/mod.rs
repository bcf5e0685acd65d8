//! Curve families: closed forms, adaptive sampling and ODE integration.

mod family;
mod generate;
mod integrate;
pub mod ode;
mod sampler;
mod spec;

pub use family::{coefficients_uv, eval_family, system_height, trajectory_point, FamilyJet};
pub use generate::{
    gen_chirp_graph, gen_chirp_phase_curve, gen_phase_trajectory, gen_power_spiral, gen_reflected_graph,
    one_turn_later, spiral_end_angle, MIN_BUDGET,
};
pub use integrate::{integrate_cubic_system, integrate_normal_form, MIN_RADIUS};
pub use ode::Tolerances;
pub use sampler::{Sampling, MAX_PHASE_STEP, MAX_POLAR_STEP, SAMPLES_PER_TURN};
pub use spec::{ChirpSpec, Focus, NormalFormSpec, PowerSpiralSpec, TrajectoryFamilySpec, Trig};
