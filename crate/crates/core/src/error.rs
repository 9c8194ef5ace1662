/// Errors raised by the library.
///
/// The CLI maps [`Error::ResourceGuard`] to exit code 3 and everything else to 2.
#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("enumeration refused: {0}")]
    ResourceGuard(String),
    #[error("degenerate lattice basis: {0}")]
    Degenerate(String),
    #[error("integer overflow in {0}")]
    Overflow(&'static str),
    #[error("point lies outside the affine chart (vanishing top minor)")]
    OutsideChart,
    #[error("quadrature did not converge: {0}")]
    NoConvergence(String),
    #[error("model anomaly: {0}")]
    ModelAnomaly(String),
}

impl Error {
    pub fn is_resource_guard(&self) -> bool {
        matches!(self, Error::ResourceGuard(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
