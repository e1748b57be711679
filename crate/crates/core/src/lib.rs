//! Coordinate-free automatic differentiation over dense real and complex
//! matrices.
//!
//! Derivatives are linear maps between matrix spaces. Forward mode pushes
//! tangents through a [`Program`] as [`Dual`] pairs, reverse mode records a
//! [`Tape`] and pulls cotangents back through adjoint rules, and gradients
//! are taken with respect to a chosen [`InnerProduct`]. Matrix functions
//! such as `exp` are evaluated by truncated power series, with their
//! Fréchet derivatives obtained from a block-matrix evaluation.
//!
//! ```
//! use matcalc::forward::jvp_program;
//! use matcalc::{inner, Field, InnerProduct, Mat, MatrixFunction, OpKind, Program, Tape};
//!
//! # fn main() -> matcalc::Result<()> {
//! // f(X) = tr(exp(X^{-1}))
//! let f = Program::chain(&[
//!     OpKind::Inverse,
//!     OpKind::MatFunc(MatrixFunction::Exp),
//!     OpKind::Trace,
//! ])?;
//! let x = Mat::random_well_conditioned(4, Field::Real, 1);
//!
//! let grad = Tape::record(&f, &[x.clone()])?.backprop()?;
//! let v = Mat::random(4, 4, Field::Real, 2);
//! let df_v = jvp_program(&f, &[x], &[v.clone()])?.tangent.re(0, 0);
//! let rep = inner(&grad.gradients[0], &v, &InnerProduct::Canonical)?;
//! assert!((rep - df_v).abs() < 1e-10 * (1.0 + df_v.abs()));
//! # Ok(())
//! # }
//! ```

pub mod demo;
pub mod error;
pub mod forward;
pub mod gradcheck;
pub mod matfunc;
pub mod matrix;
pub mod program;
pub mod reverse;

pub use error::{ErrorKind, FieldError, Result};
pub use forward::Dual;
pub use gradcheck::{CheckReport, FdConfig};
pub use matfunc::MatrixFunction;
pub use matrix::{inner, Field, InnerProduct, Lu, Mat, Scalar, Spd};
pub use program::{OpKind, Operand, Program, ProgramBuilder};
pub use reverse::{GradientReport, Tape};
