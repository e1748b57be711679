//! Dense real and complex matrices.
//!
//! Every entry is stored as a [`Scalar`] (a pair of `f64`). The [`Field`] tag
//! records whether the matrix lives in the real space `M(m,n)` or the complex
//! space `M_C(m,n)`; a real-tagged matrix always has zero imaginary parts, so
//! every rule in the crate is written once and works for both fields.
//!
//! Column vectors are `n x 1` matrices.

mod decomp;
mod inner;
mod io;

pub use decomp::{cholesky, solve_spd, Lu};
pub use inner::{inner, InnerProduct, Spd};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{FieldError, Result};

pub type Scalar = Complex64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Field {
    Real,
    Complex,
}

impl Field {
    pub fn tag(self) -> char {
        match self {
            Field::Real => 'R',
            Field::Complex => 'C',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    field: Field,
    data: Vec<Scalar>,
}

impl Mat {
    /// Builds a matrix from row-major data, validating shape, finiteness and
    /// the real-field invariant.
    pub fn new(rows: usize, cols: usize, field: Field, data: Vec<Scalar>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(FieldError::shape(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        if data.len() != rows * cols {
            return Err(FieldError::shape(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(z) = data.iter().find(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(FieldError::domain(format!("non-finite entry {z}")));
        }
        if field == Field::Real && data.iter().any(|z| z.im != 0.0) {
            return Err(FieldError::field(
                "real-field matrix has a nonzero imaginary part",
            ));
        }
        Ok(Self {
            rows,
            cols,
            field,
            data,
        })
    }

    pub fn from_real(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        Self::new(
            rows,
            cols,
            Field::Real,
            data.into_iter().map(|x| Scalar::new(x, 0.0)).collect(),
        )
    }

    /// Real matrix from nested rows.
    ///
    /// Panics on ragged or empty input; intended for literals.
    pub fn real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.as_ref().len());
        assert!(
            rows.iter().all(|r| r.as_ref().len() == m),
            "ragged matrix literal"
        );
        let data = rows.iter().flat_map(|r| r.as_ref().to_vec()).collect();
        Self::from_real(n, m, data).expect("invalid matrix literal")
    }

    /// Complex matrix from nested rows of `(re, im)` pairs. Panics like [`Mat::real_rows`].
    pub fn complex_rows<R: AsRef<[(f64, f64)]>>(rows: &[R]) -> Self {
        let n = rows.len();
        let m = rows.first().map_or(0, |r| r.as_ref().len());
        assert!(
            rows.iter().all(|r| r.as_ref().len() == m),
            "ragged matrix literal"
        );
        let data = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().map(|&(re, im)| Scalar::new(re, im)))
            .collect();
        Self::new(n, m, Field::Complex, data).expect("invalid matrix literal")
    }

    /// Real column vector.
    pub fn col(values: &[f64]) -> Self {
        Self::from_real(values.len(), 1, values.to_vec()).expect("empty column vector")
    }

    /// Builds a matrix entrywise. On the real field the imaginary part of
    /// `f` is discarded.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        field: Field,
        mut f: impl FnMut(usize, usize) -> Scalar,
    ) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                let z = f(i, j);
                data.push(match field {
                    Field::Real => Scalar::new(z.re, 0.0),
                    Field::Complex => z,
                });
            }
        }
        Self {
            rows,
            cols,
            field,
            data,
        }
    }

    pub fn zeros(rows: usize, cols: usize, field: Field) -> Self {
        Self::from_fn(rows, cols, field, |_, _| Scalar::new(0.0, 0.0))
    }

    pub fn identity(n: usize, field: Field) -> Self {
        Self::from_fn(n, n, field, |i, j| {
            Scalar::new(if i == j { 1.0 } else { 0.0 }, 0.0)
        })
    }

    pub fn diag(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, Field::Real, |i, j| {
            Scalar::new(if i == j { values[i] } else { 0.0 }, 0.0)
        })
    }

    pub fn complex_diag(values: &[Scalar]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, Field::Complex, |i, j| {
            if i == j {
                values[i]
            } else {
                Scalar::new(0.0, 0.0)
            }
        })
    }

    /// 1x1 real matrix.
    pub fn scalar(x: f64) -> Self {
        Self::from_real(1, 1, vec![x]).expect("finite scalar")
    }

    /// Seeded random matrix with entries uniform in `[-1, 1)`.
    ///
    /// The generator is ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`),
    /// filled row-major; on the complex field each entry draws the real part
    /// and then the imaginary part.
    pub fn random(rows: usize, cols: usize, field: Field, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_fn(rows, cols, field, |_, _| {
            let re = rng.gen_range(-1.0..1.0);
            let im = match field {
                Field::Real => 0.0,
                Field::Complex => rng.gen_range(-1.0..1.0),
            };
            Scalar::new(re, im)
        })
    }

    /// Random strictly diagonally dominant matrix: `random + n I`.
    pub fn random_well_conditioned(n: usize, field: Field, seed: u64) -> Self {
        let r = Self::random(n, n, field, seed);
        let shift = Self::identity(n, field)
            .scale(n as f64 * if field == Field::Complex { 1.5 } else { 1.0 });
        r.add(&shift).expect("same shape")
    }

    /// Random symmetric positive definite real matrix `B^T B + I`.
    pub fn random_spd(n: usize, seed: u64) -> Self {
        let b = Self::random(n, n, Field::Real, seed);
        b.transpose()
            .matmul(&b)
            .and_then(|g| g.add(&Self::identity(n, Field::Real)))
            .expect("square")
    }

    /// Random matrix rescaled to a given Frobenius norm. The Frobenius norm
    /// bounds the spectral radius.
    pub fn random_with_norm(n: usize, field: Field, norm: f64, seed: u64) -> Self {
        let r = Self::random(n, n, field, seed);
        let f = r.frobenius_norm();
        r.scale(norm / f)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Scalar] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.data[i * self.cols + j]
    }

    /// Real part of entry `(i, j)`.
    pub fn re(&self, i: usize, j: usize) -> f64 {
        self.get(i, j).re
    }

    /// Copy with entry `(i, j)` replaced. On the real field the imaginary
    /// part of `z` is dropped.
    pub fn with_entry(&self, i: usize, j: usize, z: Scalar) -> Self {
        let mut out = self.clone();
        out.data[i * self.cols + j] = match self.field {
            Field::Real => Scalar::new(z.re, 0.0),
            Field::Complex => z,
        };
        out
    }

    fn same_shape(&self, other: &Mat, what: &str) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(FieldError::shape(format!(
                "{what}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        self.same_field(other, what)
    }

    fn same_field(&self, other: &Mat, what: &str) -> Result<()> {
        if self.field != other.field {
            return Err(FieldError::field(format!(
                "{what}: {:?} vs {:?}",
                self.field, other.field
            )));
        }
        Ok(())
    }

    pub fn require_square(&self, what: &str) -> Result<()> {
        if !self.is_square() {
            return Err(FieldError::shape(format!(
                "{what} needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(())
    }

    pub fn require_real(&self, what: &str) -> Result<()> {
        if self.field != Field::Real {
            return Err(FieldError::field(format!(
                "{what} is defined on the real field only"
            )));
        }
        Ok(())
    }

    fn zip_with(
        &self,
        other: &Mat,
        what: &str,
        f: impl Fn(Scalar, Scalar) -> Scalar,
    ) -> Result<Mat> {
        self.same_shape(other, what)?;
        Ok(Mat {
            rows: self.rows,
            cols: self.cols,
            field: self.field,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Mat) -> Result<Mat> {
        self.zip_with(other, "add", |a, b| a + b)
    }

    pub fn sub(&self, other: &Mat) -> Result<Mat> {
        self.zip_with(other, "sub", |a, b| a - b)
    }

    /// Entrywise product.
    pub fn hadamard(&self, other: &Mat) -> Result<Mat> {
        self.zip_with(other, "hadamard", |a, b| a * b)
    }

    /// Entrywise map that keeps the field tag.
    pub fn map(&self, f: impl Fn(Scalar) -> Scalar) -> Mat {
        Mat::from_fn(self.rows, self.cols, self.field, |i, j| f(self.get(i, j)))
    }

    pub fn scale(&self, c: f64) -> Mat {
        self.map(|z| z * c)
    }

    /// Multiplication by a complex scalar. The result is always complex.
    pub fn scale_complex(&self, c: Scalar) -> Mat {
        self.to_complex().map(|z| z * c)
    }

    pub fn neg(&self) -> Mat {
        self.map(|z| -z)
    }

    pub fn matmul(&self, other: &Mat) -> Result<Mat> {
        self.same_field(other, "matmul")?;
        if self.cols != other.rows {
            return Err(FieldError::shape(format!(
                "matmul: {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let (m, n, p) = (self.rows, self.cols, other.cols);
        let mut data = vec![Scalar::new(0.0, 0.0); m * p];
        for i in 0..m {
            let out = &mut data[i * p..(i + 1) * p];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Scalar::new(0.0, 0.0) {
                    continue;
                }
                let row = &other.data[k * p..(k + 1) * p];
                for (o, &b) in out.iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        Ok(Mat {
            rows: m,
            cols: p,
            field: self.field,
            data,
        })
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, self.field, |i, j| self.get(j, i))
    }

    pub fn conj(&self) -> Mat {
        self.map(|z| z.conj())
    }

    /// `A^H`; equal to [`Mat::transpose`] on the real field.
    pub fn conj_transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, self.field, |i, j| {
            self.get(j, i).conj()
        })
    }

    pub fn trace(&self) -> Result<Scalar> {
        self.require_square("trace")?;
        Ok((0..self.rows).map(|i| self.get(i, i)).sum())
    }

    pub fn inverse(&self) -> Result<Mat> {
        Lu::factor(self)?.inverse()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &Mat) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// `||self - other||_F / (1 + ||other||_F)`.
    pub fn rel_diff(&self, other: &Mat) -> Result<f64> {
        Ok(self.sub(other)?.frobenius_norm() / (1.0 + other.frobenius_norm()))
    }

    /// Copy tagged as complex.
    pub fn to_complex(&self) -> Mat {
        Mat {
            field: Field::Complex,
            ..self.clone()
        }
    }

    /// Real part, as a real-field matrix.
    pub fn re_part(&self) -> Mat {
        Mat::from_fn(self.rows, self.cols, Field::Real, |i, j| {
            Scalar::new(self.get(i, j).re, 0.0)
        })
    }

    /// Imaginary part, as a real-field matrix.
    pub fn im_part(&self) -> Mat {
        Mat::from_fn(self.rows, self.cols, Field::Real, |i, j| {
            Scalar::new(self.get(i, j).im, 0.0)
        })
    }

    pub fn column(&self, j: usize) -> Mat {
        Mat::from_fn(self.rows, 1, self.field, |i, _| self.get(i, j))
    }

    /// Horizontally stacks column vectors of equal height.
    pub fn from_columns(cols: &[Mat]) -> Result<Mat> {
        let first = cols
            .first()
            .ok_or_else(|| FieldError::shape("no columns to stack"))?;
        for c in cols {
            if c.cols != 1 || c.rows != first.rows {
                return Err(FieldError::shape("columns must be equal-height vectors"));
            }
            first.same_field(c, "from_columns")?;
        }
        Ok(Mat::from_fn(first.rows, cols.len(), first.field, |i, j| {
            cols[j].get(i, 0)
        }))
    }

    /// Sum of each row: the `m x 1` vector `A 1`.
    pub fn row_sums(&self) -> Mat {
        Mat::from_fn(self.rows, 1, self.field, |i, _| {
            (0..self.cols).map(|j| self.get(i, j)).sum()
        })
    }

    /// `self + b 1^T` for an `m x 1` vector `b`.
    pub fn add_column_broadcast(&self, b: &Mat) -> Result<Mat> {
        self.same_field(b, "bias")?;
        if b.cols != 1 || b.rows != self.rows {
            return Err(FieldError::shape(format!(
                "bias must be {}x1, got {}x{}",
                self.rows, b.rows, b.cols
            )));
        }
        Ok(Mat::from_fn(self.rows, self.cols, self.field, |i, j| {
            self.get(i, j) + b.get(i, 0)
        }))
    }

    /// Sub-block of `rows x cols` starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Result<Mat> {
        if r0 + rows > self.rows || c0 + cols > self.cols {
            return Err(FieldError::shape("block out of range"));
        }
        Ok(Mat::from_fn(rows, cols, self.field, |i, j| {
            self.get(r0 + i, c0 + j)
        }))
    }

    /// Assembles `[[a, b], [c, d]]`.
    pub fn from_blocks(a: &Mat, b: &Mat, c: &Mat, d: &Mat) -> Result<Mat> {
        if a.rows != b.rows || c.rows != d.rows || a.cols != c.cols || b.cols != d.cols {
            return Err(FieldError::shape("incompatible block shapes"));
        }
        a.same_field(b, "from_blocks")?;
        a.same_field(c, "from_blocks")?;
        a.same_field(d, "from_blocks")?;
        let (r, k) = (a.rows, a.cols);
        Ok(Mat::from_fn(
            r + c.rows,
            k + b.cols,
            a.field,
            |i, j| match (i < r, j < k) {
                (true, true) => a.get(i, j),
                (true, false) => b.get(i, j - k),
                (false, true) => c.get(i - r, j),
                (false, false) => d.get(i - r, j - k),
            },
        ))
    }

    /// Power-iteration estimate of the spectral radius, inflated by 1.1.
    ///
    /// Starts from the fixed vector `v_j = 1 + 1/(j + 2)`, normalizes after
    /// every step, and averages the log growth rate over the second half of
    /// the iterations so that oscillating dominant pairs (complex conjugate
    /// eigenvalues of a real matrix) still yield their modulus.
    pub fn spectral_radius_estimate(&self, iters: usize) -> Result<f64> {
        self.require_square("spectral radius")?;
        let n = self.rows;
        let iters = iters.max(2);
        let mut v = Mat::from_fn(n, 1, self.field, |i, _| {
            Scalar::new(1.0 + 1.0 / (i as f64 + 2.0), 0.0)
        });
        let nv = v.frobenius_norm();
        v = v.scale(1.0 / nv);
        let burn_in = iters / 2;
        let mut log_growth = 0.0;
        for step in 0..iters {
            let w = self.matmul(&v)?;
            let growth = w.frobenius_norm();
            if growth <= f64::MIN_POSITIVE {
                return Ok(0.0);
            }
            if step >= burn_in {
                log_growth += growth.ln();
            }
            v = w.scale(1.0 / growth);
        }
        let counted = (iters - burn_in) as f64;
        Ok((log_growth / counted).exp() * 1.1)
    }

    /// Entrywise real inner product; dispatches to [`inner`].
    pub fn inner(&self, other: &Mat, product: &InnerProduct) -> Result<f64> {
        inner(self, other, product)
    }
}

/// Canonical real inner product `Re tr(A^H B)` with only shape checks.
pub(crate) fn re_inner(a: &Mat, b: &Mat) -> f64 {
    a.data
        .iter()
        .zip(&b.data)
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_matmul(a: &Mat, b: &Mat) -> Mat {
        Mat::from_fn(a.rows(), b.cols(), a.field(), |i, j| {
            let mut s = Scalar::new(0.0, 0.0);
            for k in 0..a.cols() {
                s += a.get(i, k) * b.get(k, j);
            }
            s
        })
    }

    #[test]
    fn matmul_examples() {
        let a = Mat::real_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        let p = Mat::real_rows(&[[0.0, 1.0], [1.0, 0.0]]);
        let expected = naive_matmul(&a, &p);
        assert_eq!(expected, Mat::real_rows(&[[2.0, 1.0], [4.0, 3.0]]));
        assert_eq!(a.matmul(&p).unwrap(), expected);

        let r = Mat::random(3, 3, Field::Complex, 4);
        assert_eq!(Mat::identity(3, Field::Complex).matmul(&r).unwrap(), r);
        assert_eq!(
            Mat::scalar(3.0).matmul(&Mat::scalar(-2.5)).unwrap(),
            Mat::scalar(-7.5)
        );
    }

    #[test]
    fn matmul_errors() {
        let a = Mat::random(2, 3, Field::Real, 1);
        assert_eq!(
            a.matmul(&a).unwrap_err().kind,
            crate::ErrorKind::ShapeMismatch
        );
        let c = Mat::random(3, 2, Field::Complex, 1);
        assert_eq!(
            a.matmul(&c).unwrap_err().kind,
            crate::ErrorKind::FieldMismatch
        );
    }

    #[test]
    fn random_matmul_matches_triple_loop() {
        for seed in 0..5 {
            let a = Mat::random(4, 5, Field::Complex, seed);
            let b = Mat::random(5, 3, Field::Complex, seed + 100);
            assert!(
                a.matmul(&b)
                    .unwrap()
                    .max_abs_diff(&naive_matmul(&a, &b))
                    .unwrap()
                    < 1e-15
            );
        }
    }

    #[test]
    fn transposes() {
        let a = Mat::random(4, 3, Field::Complex, 2);
        assert_eq!(a.transpose().transpose(), a);
        let i = Mat::complex_rows(&[[(0.0, 1.0)]]);
        assert_eq!(i.conj_transpose(), Mat::complex_rows(&[[(0.0, -1.0)]]));
        let r = Mat::random(4, 3, Field::Real, 9);
        let ct = r.conj_transpose();
        for i in 0..3 {
            for j in 0..4 {
                assert_eq!(ct.get(i, j), r.get(j, i));
            }
        }
        assert_eq!(ct, r.transpose());
    }

    #[test]
    fn trace_examples() {
        assert_eq!(Mat::identity(5, Field::Real).trace().unwrap().re, 5.0);
        assert_eq!(
            Mat::real_rows(&[[1.0, 2.0], [3.0, 4.0]])
                .trace()
                .unwrap()
                .re,
            1.0 + 4.0
        );
        let a = Mat::random(5, 5, Field::Real, 1);
        let b = Mat::random(5, 5, Field::Real, 2);
        let lhs = a.add(&b).unwrap().trace().unwrap();
        let rhs = a.trace().unwrap() + b.trace().unwrap();
        assert!((lhs - rhs).norm() < 1e-14);
        assert!(Mat::random(2, 3, Field::Real, 0).trace().is_err());
    }

    #[test]
    fn trace_of_product_commutes() {
        for seed in 0..10 {
            let a = Mat::random(3, 5, Field::Complex, seed);
            let b = Mat::random(5, 3, Field::Complex, seed + 50);
            let ab = a.matmul(&b).unwrap().trace().unwrap();
            let ba = b.matmul(&a).unwrap().trace().unwrap();
            assert!((ab - ba).norm() < 1e-13);
        }
    }

    #[test]
    fn conj_transpose_reverses_products() {
        for seed in 0..10 {
            let a = Mat::random(3, 4, Field::Complex, seed);
            let b = Mat::random(4, 2, Field::Complex, seed + 7);
            let lhs = a.matmul(&b).unwrap().conj_transpose();
            let rhs = b.conj_transpose().matmul(&a.conj_transpose()).unwrap();
            assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-15);
        }
    }

    #[test]
    fn new_validates() {
        assert!(Mat::new(2, 2, Field::Real, vec![Scalar::new(0.0, 0.0); 3]).is_err());
        assert!(Mat::new(0, 2, Field::Real, vec![]).is_err());
        assert!(Mat::from_real(1, 1, vec![f64::NAN]).is_err());
        assert_eq!(
            Mat::new(1, 1, Field::Real, vec![Scalar::new(1.0, 1.0)])
                .unwrap_err()
                .kind,
            crate::ErrorKind::FieldMismatch
        );
    }

    #[test]
    fn random_is_reproducible() {
        assert_eq!(
            Mat::random(3, 4, Field::Complex, 11),
            Mat::random(3, 4, Field::Complex, 11)
        );
        assert_ne!(
            Mat::random(3, 4, Field::Real, 11),
            Mat::random(3, 4, Field::Real, 12)
        );
        let r = Mat::random(6, 6, Field::Complex, 3);
        assert!(r
            .data()
            .iter()
            .all(|z| (-1.0..1.0).contains(&z.re) && (-1.0..1.0).contains(&z.im)));
    }

    #[test]
    fn spectral_radius_on_diagonal() {
        let est = Mat::diag(&[0.3, 0.1])
            .spectral_radius_estimate(100)
            .unwrap();
        assert!((est - 0.33).abs() < 1e-9, "{est}");
        assert_eq!(
            Mat::zeros(3, 3, Field::Real)
                .spectral_radius_estimate(50)
                .unwrap(),
            0.0
        );
    }

    #[test]
    fn spectral_radius_on_rotation() {
        // eigenvalues 0.5 e^{+-i theta}; plain power iteration oscillates here
        let (c, s) = (0.5 * 0.7f64.cos(), 0.5 * 0.7f64.sin());
        let r = Mat::real_rows(&[[c, -s], [s, c]]);
        let est = r.spectral_radius_estimate(200).unwrap();
        assert!((est - 0.55).abs() < 1e-9, "{est}");
    }

    #[test]
    fn frobenius_and_blocks() {
        assert_eq!(Mat::zeros(3, 2, Field::Real).frobenius_norm(), 0.0);
        let a = Mat::random(2, 2, Field::Real, 1);
        let e = Mat::random(2, 2, Field::Real, 2);
        let z = Mat::zeros(2, 2, Field::Real);
        let big = Mat::from_blocks(&a, &e, &z, &a).unwrap();
        assert_eq!(big.block(0, 2, 2, 2).unwrap(), e);
        assert_eq!(big.block(2, 2, 2, 2).unwrap(), a);
    }

    #[test]
    fn bias_broadcast_and_row_sums() {
        let x = Mat::real_rows(&[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]]);
        let b = Mat::col(&[10.0, 20.0]);
        let y = x.add_column_broadcast(&b).unwrap();
        assert_eq!(y, Mat::real_rows(&[[11.0, 12.0, 13.0], [24.0, 25.0, 26.0]]));
        assert_eq!(x.row_sums(), Mat::col(&[6.0, 15.0]));
    }
}
