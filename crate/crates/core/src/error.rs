use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point lies outside the closure of the domain.
    #[error("point {x} lies outside the domain closure")]
    Domain { x: f64 },

    /// The distance function is not differentiable at this point
    /// (interval midpoint or disk center). Callers exclude such points.
    #[error("distance function is not differentiable at {x}")]
    NondifferentiablePoint { x: f64 },

    #[error("singular value at {x}: {what}")]
    Singularity { x: f64, what: &'static str },

    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    #[error("inadmissible constants: {inequality}")]
    InadmissibleConstants { inequality: String },

    #[error("barrier time t = {t} coincides with the singular time s/alpha1")]
    SingularTime { t: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("non-finite sample {value} at x = {x}, t = {t}")]
    NonFinite { x: f64, t: f64, value: f64 },

    #[error("explicit step dt = {dt} exceeds the stability bound {bound}")]
    Cfl { dt: f64, bound: f64 },

    #[error("tridiagonal system is singular at row {row}")]
    SingularSystem { row: usize },

    #[error("solution blew up at t = {time}")]
    BlowUp { time: f64 },

    #[error("telescoping schedule did not reach zero within {cap} rungs")]
    ScheduleCap { cap: u64 },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            reason: reason.into(),
        }
    }
}
