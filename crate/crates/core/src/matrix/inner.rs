use super::decomp::{cholesky, cholesky_solve};
use super::{re_inner, Field, Mat};
use crate::error::{FieldError, Result};

/// A symmetric positive definite weight, verified by Cholesky at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Spd {
    h: Mat,
    factor: Mat,
}

impl Spd {
    pub fn new(h: Mat) -> Result<Self> {
        let factor = cholesky(&h)?;
        Ok(Self { h, factor })
    }

    pub fn matrix(&self) -> &Mat {
        &self.h
    }

    pub fn dim(&self) -> usize {
        self.h.rows()
    }

    /// `H B`.
    pub fn apply(&self, b: &Mat) -> Result<Mat> {
        self.h.matmul(b)
    }

    /// `H^{-1} B`.
    pub fn solve(&self, b: &Mat) -> Result<Mat> {
        cholesky_solve(&self.factor, b)
    }
}

/// Real inner product on a matrix space.
///
/// * `Canonical`: `tr(A^T B)` on real matrices.
/// * `Weighted(H)`: `tr(A^T H B)` on real matrices with `H` SPD.
/// * `ComplexCanonical`: `Re tr(A^H B)`, the canonical product of `M_C(m,n)`
///   viewed as a real vector space. On real matrices it equals `Canonical`.
#[derive(Debug, Clone, PartialEq)]
pub enum InnerProduct {
    Canonical,
    Weighted(Spd),
    ComplexCanonical,
}

impl InnerProduct {
    pub fn weighted(h: Mat) -> Result<Self> {
        Ok(InnerProduct::Weighted(Spd::new(h)?))
    }

    /// The canonical product for matrices over `field`.
    pub fn canonical_for(field: Field) -> Self {
        match field {
            Field::Real => InnerProduct::Canonical,
            Field::Complex => InnerProduct::ComplexCanonical,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InnerProduct::Canonical => "canonical",
            InnerProduct::Weighted(_) => "weighted",
            InnerProduct::ComplexCanonical => "complex-canonical",
        }
    }

    /// Riesz map back to the canonical representer: `H G` for weighted
    /// products, the identity otherwise.
    pub fn to_canonical(&self, g: &Mat) -> Result<Mat> {
        match self {
            InnerProduct::Weighted(h) => {
                check_weight(h, g)?;
                h.apply(g)
            }
            _ => Ok(g.clone()),
        }
    }

    /// Representer of the canonical gradient `g` under this product:
    /// `H^{-1} g` for weighted products, `g` otherwise.
    pub fn from_canonical(&self, g: &Mat) -> Result<Mat> {
        match self {
            InnerProduct::Weighted(h) => {
                check_weight(h, g)?;
                h.solve(g)
            }
            _ => Ok(g.clone()),
        }
    }
}

fn check_weight(h: &Spd, a: &Mat) -> Result<()> {
    a.require_real("weighted inner product")?;
    if h.dim() != a.rows() {
        return Err(FieldError::shape(format!(
            "weight is {0}x{0} but operand has {1} rows",
            h.dim(),
            a.rows()
        )));
    }
    Ok(())
}

pub fn inner(a: &Mat, b: &Mat, product: &InnerProduct) -> Result<f64> {
    if a.shape() != b.shape() {
        return Err(FieldError::shape(format!(
            "inner product of {}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if a.field() != b.field() {
        return Err(FieldError::field("inner product operands differ in field"));
    }
    match product {
        InnerProduct::Canonical => {
            a.require_real("canonical real inner product")?;
            Ok(re_inner(a, b))
        }
        InnerProduct::ComplexCanonical => Ok(re_inner(a, b)),
        InnerProduct::Weighted(h) => {
            check_weight(h, a)?;
            Ok(re_inner(a, &h.apply(b)?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ErrorKind;

    fn products() -> Vec<(InnerProduct, Field)> {
        vec![
            (InnerProduct::Canonical, Field::Real),
            (
                InnerProduct::weighted(Mat::random_spd(4, 3)).unwrap(),
                Field::Real,
            ),
            (InnerProduct::ComplexCanonical, Field::Complex),
        ]
    }

    #[test]
    fn coordinate_sum_example() {
        let x = Mat::col(&[1.0, 0.0, 2.0]);
        let y = Mat::col(&[3.0, 1.0, 1.0]);
        let oracle: f64 = [1.0 * 3.0, 0.0 * 1.0, 2.0 * 1.0].iter().sum();
        assert_eq!(inner(&x, &y, &InnerProduct::Canonical).unwrap(), oracle);
    }

    #[test]
    fn complex_unit_example() {
        let i = Mat::complex_rows(&[[(0.0, 1.0)]]);
        assert_eq!(inner(&i, &i, &InnerProduct::ComplexCanonical).unwrap(), 1.0);
    }

    #[test]
    fn symmetric_bilinear_positive() {
        for (p, field) in products() {
            for seed in 0..10u64 {
                let a = Mat::random(4, 3, field, seed);
                let b = Mat::random(4, 3, field, seed + 100);
                let c = Mat::random(4, 3, field, seed + 200);
                let ab = inner(&a, &b, &p).unwrap();
                let ba = inner(&b, &a, &p).unwrap();
                assert!((ab - ba).abs() < 1e-13);
                let t = 0.7 - seed as f64 * 0.3;
                let lin = inner(&a.scale(t).add(&c).unwrap(), &b, &p).unwrap();
                let split = t * ab + inner(&c, &b, &p).unwrap();
                assert!((lin - split).abs() < 1e-12);
                assert!(inner(&a, &a, &p).unwrap() > 0.0);
            }
        }
    }

    #[test]
    fn norm_squared() {
        let a = Mat::random(3, 3, Field::Real, 5);
        let n = a.frobenius_norm();
        assert!((inner(&a, &a, &InnerProduct::Canonical).unwrap() - n * n).abs() < 1e-14);
    }

    #[test]
    fn errors() {
        let a = Mat::random(2, 2, Field::Real, 1);
        let b = Mat::random(2, 3, Field::Real, 1);
        let c = Mat::random(2, 2, Field::Complex, 1);
        assert_eq!(
            inner(&a, &b, &InnerProduct::Canonical).unwrap_err().kind,
            ErrorKind::ShapeMismatch
        );
        assert_eq!(
            inner(&a, &c, &InnerProduct::ComplexCanonical)
                .unwrap_err()
                .kind,
            ErrorKind::FieldMismatch
        );
        assert_eq!(
            InnerProduct::weighted(Mat::diag(&[1.0, 0.0]))
                .unwrap_err()
                .kind,
            ErrorKind::NotSpd
        );
        let w = InnerProduct::weighted(Mat::random_spd(3, 1)).unwrap();
        assert_eq!(
            inner(&a, &a, &w).unwrap_err().kind,
            ErrorKind::ShapeMismatch
        );
        let w2 = InnerProduct::weighted(Mat::random_spd(2, 1)).unwrap();
        assert_eq!(
            inner(&c, &c, &w2).unwrap_err().kind,
            ErrorKind::FieldMismatch
        );
    }
}
