use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by generators, estimators and suites.
///
/// Validation errors mean an input broke a precondition; numerical errors mean
/// the computation itself could not reach the requested accuracy.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("t = {t} lies below the family start time t0 = {t0}")]
    Domain { t: f64, t0: f64 },

    #[error("sample budget {budget} cannot resolve one oscillation; at least {required} samples are needed")]
    BudgetTooSmall { budget: usize, required: usize },

    #[error(
        "sample budget {budget} exhausted at radius {reached_radius:e} before reaching r_min = {r_min:e}"
    )]
    PartialCurve {
        budget: usize,
        reached_radius: f64,
        r_min: f64,
    },

    #[error("sample budget {budget} exhausted at parameter {reached} before reaching {target}")]
    BudgetExhausted {
        budget: usize,
        reached: f64,
        target: f64,
    },

    #[error("finest scale {eps_min:e} is below twice the maximal chord; smallest admissible epsilon is {min_admissible:e}")]
    ScaleBelowChord { eps_min: f64, min_admissible: f64 },

    #[error(
        "raster needs {required_bytes} bytes (budget {budget_bytes}); use raster_cell >= {suggested_cell:e}"
    )]
    MemoryBudget {
        required_bytes: u64,
        budget_bytes: u64,
        suggested_cell: f64,
    },

    #[error("angular step of {step:.3} rad at sample {index} is too large to unwrap (under-sampled)")]
    UnderSampled { index: usize, step: f64 },

    #[error("sample {index} lies at the origin; its angle is undefined")]
    AtOrigin { index: usize },

    #[error("found {found} section crossings, at least {required} are needed")]
    InsufficientTurns { found: usize, required: usize },

    #[error("return difference d(r_{index}) = {value:e} is not negative (mixed-sign returns)")]
    MixedSign { index: usize, value: f64 },

    #[error("step size underflow at t = {t}: h = {h:e}")]
    Stiffness { t: f64, h: f64 },

    #[error("all counts in the regression window are equal (sub-resolved)")]
    SubResolved,

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Stiffness { .. }
                | Error::SubResolved
                | Error::UnderSampled { .. }
                | Error::MixedSign { .. }
                | Error::PartialCurve { .. }
                | Error::BudgetExhausted { .. }
                | Error::InsufficientTurns { .. }
        )
    }

    pub fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
