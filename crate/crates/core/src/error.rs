use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("non-finite value {value} at {location}")]
    NonFinite { location: String, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid dimension {n}: {reason}")]
    InvalidDimension { n: usize, reason: &'static str },

    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("tensor is not trace-free (max |trace| = {max_trace:e})")]
    NotTraceFree { max_trace: f64 },

    #[error("rotated plane is vertical: slope {slope} hits the pole (cos + slope*sin = {denominator:e})")]
    VerticalPlane { slope: f64, denominator: f64 },

    #[error("node {index:?} is {margin} node(s) from the boundary, need {required}")]
    Boundary {
        index: Vec<usize>,
        margin: usize,
        required: usize,
    },

    #[error("field input: {0}")]
    Field(String),

    #[error("jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_finite(values: &[f64], what: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite {
            location: format!("{what}[{i}]"),
            value: values[i],
        }),
        None => Ok(()),
    }
}
