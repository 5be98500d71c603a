use core::fmt;

use crate::circuit::BitSituation;

pub type Result<T> = core::result::Result<T, Error>;

/// Everything that can go wrong in the simulation core.
///
/// All variants are precondition violations; the numerical paths themselves
/// are total once their inputs are validated.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A physical quantity that must be strictly positive and finite was not.
    NotPositive { name: &'static str, value: f64 },
    /// A coefficient that must be finite was NaN or infinite.
    NotFinite { name: &'static str, value: f64 },
    /// A sample count of zero was requested.
    ZeroSamples { name: &'static str },
    /// Two traces that must be paired have different lengths.
    LengthMismatch { left: usize, right: usize },
    /// An operation that needs at least one sample received none.
    EmptyTrace,
    /// `r_h > r_l` does not hold.
    ResistorOrder { r_h: f64, r_l: f64 },
    /// HH and LL are discarded by the protocol and carry no key bit.
    InsecureSituation(BitSituation),
    /// The case label does not describe the given coefficients.
    CaseMismatch {
        label: &'static str,
        b: f64,
        c: f64,
    },
    /// An empty outcome list was passed to key extraction.
    NoOutcomes,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NotPositive { name, value } => {
                write!(f, "{name} must be positive and finite, got {value}")
            }
            Error::NotFinite { name, value } => write!(f, "{name} must be finite, got {value}"),
            Error::ZeroSamples { name } => write!(f, "{name} must be at least 1"),
            Error::LengthMismatch { left, right } => {
                write!(f, "trace lengths differ: {left} vs {right}")
            }
            Error::EmptyTrace => f.write_str("trace is empty"),
            Error::ResistorOrder { r_h, r_l } => {
                write!(f, "need r_h > r_l > 0, got r_h={r_h}, r_l={r_l}")
            }
            Error::InsecureSituation(s) => {
                write!(f, "bit situation {s} is insecure and discarded by the protocol")
            }
            Error::CaseMismatch { label, b, c } => {
                write!(f, "case {label} is inconsistent with coefficients b={b}, c={c}")
            }
            Error::NoOutcomes => f.write_str("no bit-exchange outcomes to extract a key from"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::NotPositive { name, value })
    }
}

pub(crate) fn check_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::NotFinite { name, value })
    }
}
