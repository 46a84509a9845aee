use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A scalar argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Two objects that must agree in length or shape do not.
    #[error("shape mismatch in {context}: expected {expected}, found {found}")]
    Shape {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    /// Input data is malformed (non-finite values, missing ground truth, ...).
    #[error("data error: {0}")]
    Data(String),
    /// A result needed a converged optimization certificate and did not get one.
    #[error("certificate error: duality gap {gap:e} exceeds tolerance {tol:e}")]
    Certificate { gap: f64, tol: f64 },
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub(crate) fn check_len(context: &'static str, expected: usize, found: usize) -> Result<()> {
        if expected == found {
            Ok(())
        } else {
            Err(Error::Shape {
                context,
                expected,
                found,
            })
        }
    }
}
