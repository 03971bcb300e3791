use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{what} = {value} is outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("digit {digit} is not in the alphabet {{0..={max}}}")]
    DigitOutOfRange { digit: u8, max: u8 },

    #[error("unsupported beta: {0}")]
    Unsupported(String),

    #[error("point is not in the feasible polytope D(m={m}, a={a})")]
    Infeasible { m: usize, a: f64 },

    #[error("point is not strictly interior: {0}")]
    NotInterior(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn check_range(
    what: &'static str,
    value: f64,
    lo: f64,
    hi: f64,
    domain: &'static str,
) -> Result<()> {
    if value.is_finite() && value >= lo && value <= hi {
        Ok(())
    } else {
        Err(Error::Domain {
            what,
            value,
            domain,
        })
    }
}
