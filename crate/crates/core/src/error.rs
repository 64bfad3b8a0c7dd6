use thiserror::Error;

/// Errors raised by the sensing toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// A numeric argument violated its precondition (non-positive range, empty sequence, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A configuration parameter is out of its allowed set.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid Zadoff-Chu root {root} for length {length}: gcd(root, length) must be 1 and 0 < root < length")]
    InvalidRoot { length: usize, root: usize },

    /// Inputs that make the geometric problem undefined (coincident centers, collinear anchors).
    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("bearings are parallel; the rays do not intersect")]
    NoIntersection,

    #[error("intersection lies behind the origin of ray {ray}")]
    BehindRay { ray: usize },

    #[error("inconsistent path measurement: recovered distance {value_m} m is negative")]
    InconsistentMeasurement { value_m: f64 },

    #[error("not supported: {0}")]
    NotSupported(String),

    #[error("no feasible association under tolerance {tol_m} m (best max residual {best_residual_m} m)")]
    Infeasible { tol_m: f64, best_residual_m: f64 },

    #[error("scene generation failed: {0}")]
    Generation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
