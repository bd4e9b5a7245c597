use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("outside the tunneling regime: {0}")]
    Regime(String),

    #[error("branch point: {0}")]
    Boundary(String),

    #[error("{what} overflows double precision")]
    Overflow { what: &'static str },

    #[error("invalid oracle configuration: {0}")]
    Config(String),

    #[error(
        "quadrature did not converge on [{lower}, {upper}]: estimate {estimate:e}, \
         error {error:e} after {intervals} intervals"
    )]
    Quadrature {
        lower: f64,
        upper: f64,
        estimate: f64,
        error: f64,
        intervals: usize,
    },

    #[error("analysis failed: {0}")]
    Analysis(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }
}
