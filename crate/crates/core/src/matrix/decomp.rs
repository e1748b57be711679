use super::{Field, Mat, Scalar};
use crate::error::{FieldError, Result};

/// Relative pivot threshold below which a matrix is reported singular.
pub const PIVOT_TOLERANCE: f64 = 1e-12;

/// LU factorization with partial pivoting, `P A = L U`.
///
/// `L` has a unit diagonal and is stored below the diagonal of `lu`;
/// `U` occupies the diagonal and above.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    field: Field,
    lu: Vec<Scalar>,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &Mat) -> Result<Self> {
        a.require_square("LU factorization")?;
        let n = a.rows();
        let scale = a.max_abs();
        let threshold = PIVOT_TOLERANCE * scale;
        let mut lu = a.data().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, mag) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if scale == 0.0 || mag < threshold {
                return Err(FieldError::singular(format!(
                    "pivot {mag:e} at column {k} is below {threshold:e}"
                )));
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                for j in k + 1..n {
                    let u = lu[k * n + j];
                    lu[i * n + j] -= factor * u;
                }
            }
        }
        Ok(Self {
            n,
            field: a.field(),
            lu,
            perm,
        })
    }

    fn check_rhs(&self, b: &Mat) -> Result<()> {
        if b.rows() != self.n {
            return Err(FieldError::shape(format!(
                "right-hand side has {} rows, expected {}",
                b.rows(),
                self.n
            )));
        }
        if b.field() != self.field {
            return Err(FieldError::field(
                "right-hand side field differs from the factored matrix",
            ));
        }
        Ok(())
    }

    /// `A^{-1} B`.
    pub fn solve(&self, b: &Mat) -> Result<Mat> {
        self.check_rhs(b)?;
        let n = self.n;
        let mut out = Vec::with_capacity(n * b.cols());
        let mut x = vec![Scalar::new(0.0, 0.0); n];
        let mut cols = Vec::with_capacity(b.cols());
        for c in 0..b.cols() {
            for (i, xi) in x.iter_mut().enumerate() {
                *xi = b.get(self.perm[i], c);
            }
            for i in 0..n {
                for k in 0..i {
                    let l = self.lu[i * n + k];
                    x[i] = x[i] - l * x[k];
                }
            }
            for i in (0..n).rev() {
                for k in i + 1..n {
                    let u = self.lu[i * n + k];
                    x[i] = x[i] - u * x[k];
                }
                x[i] /= self.lu[i * n + i];
            }
            cols.push(x.clone());
        }
        for i in 0..n {
            for col in &cols {
                out.push(col[i]);
            }
        }
        Mat::new(n, b.cols(), self.field, out)
    }

    /// `A^{-T} B`, from the same factors: `A^T = U^T L^T P`.
    pub fn solve_transpose(&self, b: &Mat) -> Result<Mat> {
        self.check_rhs(b)?;
        let n = self.n;
        let mut cols = Vec::with_capacity(b.cols());
        for c in 0..b.cols() {
            let mut y: Vec<Scalar> = (0..n).map(|i| b.get(i, c)).collect();
            // U^T y' = b  (lower triangular)
            for i in 0..n {
                for k in 0..i {
                    let u = self.lu[k * n + i];
                    y[i] = y[i] - u * y[k];
                }
                y[i] /= self.lu[i * n + i];
            }
            // L^T z = y'  (unit upper triangular)
            for i in (0..n).rev() {
                for k in i + 1..n {
                    let l = self.lu[k * n + i];
                    y[i] = y[i] - l * y[k];
                }
            }
            // x = P^T z
            let mut x = vec![Scalar::new(0.0, 0.0); n];
            for i in 0..n {
                x[self.perm[i]] = y[i];
            }
            cols.push(x);
        }
        Ok(Mat::from_fn(n, b.cols(), self.field, |i, j| cols[j][i]))
    }

    /// `B A^{-1}`.
    pub fn solve_right(&self, b: &Mat) -> Result<Mat> {
        if b.cols() != self.n {
            return Err(FieldError::shape(format!(
                "left operand has {} columns, expected {}",
                b.cols(),
                self.n
            )));
        }
        Ok(self.solve_transpose(&b.transpose())?.transpose())
    }

    pub fn inverse(&self) -> Result<Mat> {
        self.solve(&Mat::identity(self.n, self.field))
    }
}

/// Lower-triangular Cholesky factor `L` with `H = L L^T`.
///
/// Fails with `NotSpd` when `H` is not symmetric or a pivot is not positive.
pub fn cholesky(h: &Mat) -> Result<Mat> {
    h.require_square("Cholesky factorization")?;
    h.require_real("Cholesky factorization")?;
    let n = h.rows();
    let scale = h.max_abs();
    for i in 0..n {
        for j in 0..i {
            if (h.re(i, j) - h.re(j, i)).abs() > 1e-12 * scale {
                return Err(FieldError::not_spd(format!("not symmetric at ({i}, {j})")));
            }
        }
    }
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = h.re(j, j);
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(FieldError::not_spd(format!(
                "non-positive pivot {d:e} at column {j}"
            )));
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in j + 1..n {
            let mut s = h.re(i, j);
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Mat::from_real(n, n, l)
}

/// Solves `L L^T X = B` given the Cholesky factor `L`.
pub(crate) fn cholesky_solve(l: &Mat, b: &Mat) -> Result<Mat> {
    let n = l.rows();
    if b.rows() != n {
        return Err(FieldError::shape(format!(
            "right-hand side has {} rows, expected {n}",
            b.rows()
        )));
    }
    b.require_real("SPD solve")?;
    let mut cols = Vec::with_capacity(b.cols());
    for c in 0..b.cols() {
        let mut y: Vec<f64> = (0..n).map(|i| b.re(i, c)).collect();
        for i in 0..n {
            for k in 0..i {
                y[i] -= l.re(i, k) * y[k];
            }
            y[i] /= l.re(i, i);
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                y[i] -= l.re(k, i) * y[k];
            }
            y[i] /= l.re(i, i);
        }
        cols.push(y);
    }
    Ok(Mat::from_fn(n, b.cols(), Field::Real, |i, j| {
        Scalar::new(cols[j][i], 0.0)
    }))
}

/// Solves `H X = B` for symmetric positive definite `H`.
pub fn solve_spd(h: &Mat, b: &Mat) -> Result<Mat> {
    let l = cholesky(h)?;
    cholesky_solve(&l, b)
}
