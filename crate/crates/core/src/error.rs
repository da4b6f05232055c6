use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is rank deficient (sigma_min = {sigma_min:e}, sigma_max = {sigma_max:e})")]
    RankDeficient { sigma_min: f64, sigma_max: f64 },

    /// The normalized singular triple (1, alpha, beta) has a repeated entry.
    #[error("singular values are not distinct (alpha = {alpha}, beta = {beta})")]
    DegenerateSpectrum { alpha: f64, beta: f64 },

    #[error("extreme Gram eigenvalue is not simple (gaps {gap_low:e}, {gap_high:e})")]
    NonSmooth { gap_low: f64, gap_high: f64 },

    #[error("t(lambda) has a pole at lambda = {lambda}")]
    Pole { lambda: f64 },

    #[error("crossing quadratic is degenerate (leading coefficient {leading:e})")]
    DegenerateGeometry { leading: f64 },

    #[error("crossing roots inconsistent: {0}")]
    CrossingConsistency(String),

    #[error("certificate failed at t = {t}: {reason}")]
    Certificate { t: f64, reason: String },

    #[error("sampled image is degenerate: {0}")]
    DegenerateImage(String),

    #[error("invalid energy specification: {0}")]
    InvalidEnergy(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
