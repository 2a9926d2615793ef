//! Crate-wide error type.

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("logarithmic residue unsupported")]
    LogResidue,

    #[error("coefficient at {wanted} outside truncation window [{lo}, {hi}]")]
    Window { wanted: i64, lo: i64, hi: i64 },

    #[error("not semi-simple: {0}")]
    NotSemisimple(String),

    #[error("degenerate Hessian at critical point {0}")]
    DegenerateHessian(usize),

    #[error("v does not generate")]
    NotGenerator,

    #[error("spectral condition violated at pair ({0}, {1})")]
    SpectralCondition(usize, usize),

    #[error("path too close to the discriminant (distance {dist:.3e} < {min:.3e})")]
    PathNearDiscriminant { dist: f64, min: f64 },

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("{0}")]
    Other(String),
}

impl Error {
    pub fn msg(s: impl Into<String>) -> Self {
        Error::Other(s.into())
    }

    pub fn internal(s: impl Into<String>) -> Self {
        Error::Internal(s.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
