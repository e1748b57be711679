use std::fmt;

/// Failure category shared by every fallible operation in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorKind {
    ShapeMismatch,
    FieldMismatch,
    Singular,
    NotSpd,
    DomainViolation,
    Parse,
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ErrorKind::ShapeMismatch => "shape mismatch",
            ErrorKind::FieldMismatch => "field mismatch",
            ErrorKind::Singular => "singular matrix",
            ErrorKind::NotSpd => "matrix is not symmetric positive definite",
            ErrorKind::DomainViolation => "domain violation",
            ErrorKind::Parse => "parse error",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{kind}: {detail}")]
pub struct FieldError {
    pub kind: ErrorKind,
    pub detail: String,
}

impl FieldError {
    pub fn new(kind: ErrorKind, detail: impl Into<String>) -> Self {
        Self {
            kind,
            detail: detail.into(),
        }
    }

    pub fn shape(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::ShapeMismatch, detail)
    }

    pub fn field(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::FieldMismatch, detail)
    }

    pub fn singular(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::Singular, detail)
    }

    pub fn not_spd(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::NotSpd, detail)
    }

    pub fn domain(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::DomainViolation, detail)
    }

    pub fn parse(detail: impl Into<String>) -> Self {
        Self::new(ErrorKind::Parse, detail)
    }
}

pub type Result<T> = std::result::Result<T, FieldError>;
