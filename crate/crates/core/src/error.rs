use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown security level {0} (expected 2, 3 or 5)")]
    UnknownLevel(u32),

    #[error("coefficient {value} at index {index} exceeds the PSPM bound {bound}")]
    CoefficientOutOfBound {
        index: usize,
        value: i32,
        bound: i32,
    },

    #[error("coefficient {value} does not fit the {width}-bit encoding")]
    Encode { value: i32, width: u32 },

    #[error("hint weight {weight} exceeds omega = {omega}")]
    HintWeight { weight: usize, omega: usize },

    #[error("malformed {what}: {reason}")]
    Decode { what: &'static str, reason: String },
}

impl Error {
    pub(crate) fn decode(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Decode {
            what,
            reason: reason.into(),
        }
    }
}
