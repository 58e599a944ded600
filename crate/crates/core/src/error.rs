use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid cone parameters (n={n}, p={p}): {reason}")]
    InvalidParams { n: i64, p: i64, reason: String },

    #[error("{name} is not a unit vector (|{name}| = {norm})")]
    NotUnit { name: &'static str, norm: f64 },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("band endpoint {endpoint} is within {distance:e} of an indicial root real part")]
    BandCollision { endpoint: f64, distance: f64 },

    #[error("grid too coarse: {points} points per circle, mode needs at least {required}")]
    GridTooCoarse { points: usize, required: usize },

    #[error("near resonance: |lambda - mu| = {0:e}")]
    Resonance(f64),

    #[error("weight collision: |delta + Re({which})| = {distance:e}")]
    WeightCollision { which: &'static str, distance: f64 },

    #[error("orbit did not converge: {0}")]
    NonConvergence(String),

    #[error("graph amplitude bound violated at t = {t} (g = {g})")]
    AmplitudeBound { t: f64, g: f64 },

    #[error("log-radius t is not strictly increasing at sample {index}")]
    NonMonotone { index: usize },

    #[error("insufficient fit window: {0}")]
    InsufficientWindow(String),

    #[error("radius {radius} is beyond the curve coverage (max {max})")]
    RadiusBeyondCoverage { radius: f64, max: f64 },

    #[error("degenerate frame at theta = {theta}, phi = {phi}")]
    DegenerateFrame { theta: f64, phi: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures caused by numerics rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonConvergence(_)
                | Error::Resonance(_)
                | Error::WeightCollision { .. }
                | Error::AmplitudeBound { .. }
                | Error::NonMonotone { .. }
                | Error::InsufficientWindow(_)
                | Error::DegenerateFrame { .. }
        )
    }
}
