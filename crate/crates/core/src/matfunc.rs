//! Matrix functions `f(A) = sum_k c_k A^k` and their Fréchet derivatives.
//!
//! Two independent routes compute the derivative `(df)_A(E)`:
//!
//! * [`frechet_series`] differentiates the series term by term,
//!   `sum_k c_k sum_{i<k} A^i E A^{k-1-i}`;
//! * [`frechet_block`] evaluates `f` on the `2n x 2n` block matrix
//!   `[[A, E], [0, A]]` and reads off the top-right block.
//!
//! Both truncate at the same index, so they agree as an exact polynomial
//! identity up to rounding.

use std::fmt;

use crate::error::{FieldError, Result};
use crate::matrix::{Field, Mat};

/// Hard cap on the number of series terms.
pub const K_MAX: usize = 200;
/// Stop once two consecutive terms fall below this fraction of the partial sum.
pub const TERM_TOLERANCE: f64 = 1e-16;
/// Fraction of a finite convergence radius the spectral-radius estimate may reach.
pub const DOMAIN_SAFETY: f64 = 0.95;
/// Power-iteration steps used for the domain check.
pub const RADIUS_ITERATIONS: usize = 200;

/// Diagonal blocks of the block evaluation must match `f(A)` this closely.
const BLOCK_CONSISTENCY: f64 = 1e-12;

/// An analytic function given by its Taylor series at zero.
#[derive(Debug, Clone, PartialEq)]
pub enum MatrixFunction {
    Exp,
    /// `log(I + A)`, radius of convergence 1.
    Log1p,
    Sin,
    Cos,
    /// Finite polynomial `sum_k coeffs[k] A^k`.
    Poly(Vec<f64>),
}

impl MatrixFunction {
    /// Series coefficients `c_0 .. c_{n-1}`.
    pub fn coefficients(&self, n: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(n);
        // running 1/k!
        let mut inv_fact = 1.0;
        for k in 0..n {
            if k > 0 {
                inv_fact /= k as f64;
            }
            let c = match self {
                MatrixFunction::Exp => inv_fact,
                MatrixFunction::Log1p => {
                    if k == 0 {
                        0.0
                    } else if k % 2 == 1 {
                        1.0 / k as f64
                    } else {
                        -1.0 / k as f64
                    }
                }
                MatrixFunction::Sin => match k % 4 {
                    1 => inv_fact,
                    3 => -inv_fact,
                    _ => 0.0,
                },
                MatrixFunction::Cos => match k % 4 {
                    0 => inv_fact,
                    2 => -inv_fact,
                    _ => 0.0,
                },
                MatrixFunction::Poly(c) => c.get(k).copied().unwrap_or(0.0),
            };
            out.push(c);
        }
        out
    }

    pub fn domain_radius(&self) -> f64 {
        match self {
            MatrixFunction::Log1p => 1.0,
            _ => f64::INFINITY,
        }
    }

    pub fn name(&self) -> String {
        match self {
            MatrixFunction::Exp => "exp".into(),
            MatrixFunction::Log1p => "log1p".into(),
            MatrixFunction::Sin => "sin".into(),
            MatrixFunction::Cos => "cos".into(),
            MatrixFunction::Poly(c) => {
                let cs: Vec<String> = c.iter().map(|x| x.to_string()).collect();
                format!("poly:{}", cs.join(","))
            }
        }
    }

    /// Parses `exp`, `log1p`, `sin`, `cos` or `poly:c0,c1,...`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "exp" => Ok(MatrixFunction::Exp),
            "log1p" => Ok(MatrixFunction::Log1p),
            "sin" => Ok(MatrixFunction::Sin),
            "cos" => Ok(MatrixFunction::Cos),
            other => {
                let coeffs = other.strip_prefix("poly:").ok_or_else(|| {
                    FieldError::parse(format!("unknown matrix function {other:?}"))
                })?;
                coeffs
                    .split(',')
                    .map(|c| {
                        c.trim()
                            .parse::<f64>()
                            .ok()
                            .filter(|x| x.is_finite())
                            .ok_or_else(|| FieldError::parse(format!("bad coefficient {c:?}")))
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(MatrixFunction::Poly)
            }
        }
    }

    fn check_domain(&self, a: &Mat) -> Result<()> {
        a.require_square("matrix function")?;
        let radius = self.domain_radius();
        if radius.is_finite() {
            let est = a.spectral_radius_estimate(RADIUS_ITERATIONS)?;
            if est >= radius * DOMAIN_SAFETY {
                return Err(FieldError::domain(format!(
                    "{}: estimated spectral radius {est:.4} is not below {:.4}",
                    self.name(),
                    radius * DOMAIN_SAFETY
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for MatrixFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeriesResult {
    pub value: Mat,
    /// Number of series indices summed, `k = 0 .. terms_used - 1`.
    pub terms_used: usize,
    /// `||last term||_F / ||partial sum||_F`.
    pub truncation_residual: f64,
}

fn relative(term: f64, sum: f64) -> f64 {
    if sum == 0.0 {
        if term == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        term / sum
    }
}

/// Sums the series of `f` at `m` until the stopping rule fires.
fn truncated(f: &MatrixFunction, m: &Mat) -> Result<SeriesResult> {
    if let MatrixFunction::Poly(c) = f {
        return sum_fixed(f, m, c.len().max(1));
    }
    let n = m.rows();
    let coeffs = f.coefficients(K_MAX);
    let mut sum = Mat::zeros(n, n, m.field());
    let mut power = Mat::identity(n, m.field());
    let mut prev_small = false;
    for (k, &c) in coeffs.iter().enumerate() {
        let term = power.scale(c);
        sum = sum.add(&term)?;
        let (tn, sn) = (term.frobenius_norm(), sum.frobenius_norm());
        let small = tn <= TERM_TOLERANCE * sn;
        if k >= 1 && small && prev_small {
            return Ok(SeriesResult {
                value: sum,
                terms_used: k + 1,
                truncation_residual: relative(tn, sn),
            });
        }
        prev_small = small;
        power = power.matmul(m)?;
    }
    Err(FieldError::domain(format!(
        "{} series did not converge within {K_MAX} terms",
        f.name()
    )))
}

/// Sums exactly `terms` series indices.
fn sum_fixed(f: &MatrixFunction, m: &Mat, terms: usize) -> Result<SeriesResult> {
    if terms > K_MAX {
        return Err(FieldError::domain(format!(
            "{} needs {terms} terms, more than {K_MAX}",
            f.name()
        )));
    }
    let n = m.rows();
    let mut sum = Mat::zeros(n, n, m.field());
    let mut power = Mat::identity(n, m.field());
    let mut last = 0.0;
    for (k, c) in f.coefficients(terms).into_iter().enumerate() {
        if k > 0 {
            power = power.matmul(m)?;
        }
        let term = power.scale(c);
        last = term.frobenius_norm();
        sum = sum.add(&term)?;
    }
    let sn = sum.frobenius_norm();
    Ok(SeriesResult {
        value: sum,
        terms_used: terms,
        truncation_residual: relative(last, sn),
    })
}

/// Evaluates `f(A)` by its truncated Taylor series.
pub fn apply(f: &MatrixFunction, a: &Mat) -> Result<SeriesResult> {
    f.check_domain(a)?;
    truncated(f, a)
}

fn check_direction(a: &Mat, e: &Mat) -> Result<()> {
    a.require_square("matrix function")?;
    if a.shape() != e.shape() {
        return Err(FieldError::shape(format!(
            "direction is {}x{}, expected {}x{}",
            e.rows(),
            e.cols(),
            a.rows(),
            a.cols()
        )));
    }
    if a.field() != e.field() {
        return Err(FieldError::field(
            "direction field differs from the base point",
        ));
    }
    Ok(())
}

fn block_matrix(a: &Mat, e: &Mat) -> Result<Mat> {
    let z = Mat::zeros(a.rows(), a.cols(), a.field());
    Mat::from_blocks(a, e, &z, a)
}

/// Number of series terms shared by both Fréchet routes at `(A, E)`.
///
/// The stopping rule runs on the block matrix `[[A, E], [0, A]]`, so the
/// cut-off accounts for the derivative terms as well as the powers of `A`
/// (a nilpotent `A` makes `A^k` vanish long before `sum A^i E A^{k-1-i}`).
pub fn shared_terms(f: &MatrixFunction, a: &Mat, e: &Mat) -> Result<usize> {
    check_direction(a, e)?;
    f.check_domain(a)?;
    Ok(truncated(f, &block_matrix(a, e)?)?.terms_used)
}

/// Term-by-term derivative `sum_k c_k sum_{i=0}^{k-1} A^i E A^{k-1-i}`.
pub fn frechet_series(f: &MatrixFunction, a: &Mat, e: &Mat) -> Result<Mat> {
    let terms = shared_terms(f, a, e)?;
    frechet_series_terms(f, a, e, terms)
}

fn frechet_series_terms(f: &MatrixFunction, a: &Mat, e: &Mat, terms: usize) -> Result<Mat> {
    let n = a.rows();
    let mut powers = vec![Mat::identity(n, a.field())];
    for k in 1..terms {
        let next = powers[k - 1].matmul(a)?;
        powers.push(next);
    }
    let mut out = Mat::zeros(n, n, a.field());
    for (k, c) in f.coefficients(terms).into_iter().enumerate() {
        if c == 0.0 || k == 0 {
            continue;
        }
        let mut inner = Mat::zeros(n, n, a.field());
        for i in 0..k {
            let t = powers[i].matmul(e)?.matmul(&powers[k - 1 - i])?;
            inner = inner.add(&t)?;
        }
        out = out.add(&inner.scale(c))?;
    }
    Ok(out)
}

/// All four blocks of `f([[A, E], [0, A]])`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockEvaluation {
    pub top_left: Mat,
    pub derivative: Mat,
    pub bottom_left: Mat,
    pub bottom_right: Mat,
    pub terms_used: usize,
}

/// Evaluates `f` on the block matrix and splits the result.
pub fn block_evaluation(f: &MatrixFunction, a: &Mat, e: &Mat) -> Result<BlockEvaluation> {
    check_direction(a, e)?;
    f.check_domain(a)?;
    let n = a.rows();
    let big = truncated(f, &block_matrix(a, e)?)?;
    Ok(BlockEvaluation {
        top_left: big.value.block(0, 0, n, n)?,
        derivative: big.value.block(0, n, n, n)?,
        bottom_left: big.value.block(n, 0, n, n)?,
        bottom_right: big.value.block(n, n, n, n)?,
        terms_used: big.terms_used,
    })
}

/// Fréchet derivative via the block identity, with its internal
/// consistency checks enforced.
pub fn frechet_block(f: &MatrixFunction, a: &Mat, e: &Mat) -> Result<Mat> {
    let parts = block_evaluation(f, a, e)?;
    if parts
        .bottom_left
        .data()
        .iter()
        .any(|z| z.re != 0.0 || z.im != 0.0)
    {
        return Err(FieldError::domain(
            "block evaluation produced a nonzero bottom-left block",
        ));
    }
    let fa = truncated(f, a)?.value;
    let tol = BLOCK_CONSISTENCY * (1.0 + fa.frobenius_norm());
    for diag in [&parts.top_left, &parts.bottom_right] {
        let err = diag.sub(&fa)?.frobenius_norm();
        if err > tol {
            return Err(FieldError::domain(format!(
                "block diagonal differs from f(A) by {err:e}"
            )));
        }
    }
    Ok(parts.derivative)
}

/// Adjoint of `E -> (df)_A(E)` under the canonical product: the derivative
/// at `A^T` (real) or `A^H` (complex). Valid because every coefficient is real.
pub fn adjoint_frechet(f: &MatrixFunction, a: &Mat, g: &Mat) -> Result<Mat> {
    let at = match a.field() {
        Field::Real => a.transpose(),
        Field::Complex => a.conj_transpose(),
    };
    frechet_block(f, &at, g)
}
