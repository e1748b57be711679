//! Finite-difference verification of the forward and reverse engines.

mod report;
mod suite;
mod svd;

pub use report::{Case, CheckReport};
pub use suite::{adjoint_suite, primitive_instances, Instance};
pub use svd::{numerical_rank, singular_values};

use crate::error::{FieldError, Result};
use crate::forward::{jvp, Dual};
use crate::matrix::{inner, Field, InnerProduct, Mat, Scalar};
use crate::program::{OpKind, Program};
use crate::reverse::{vjp, Tape};

/// Adjoint-identity tolerance, relative to `1 + |<w, JVP(v)>|`.
pub const DOT_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Scheme {
    #[default]
    Central,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdConfig {
    /// Fixed step; `None` means `cbrt(eps) * (1 + ||x||_F)`.
    pub step: Option<f64>,
    pub scheme: Scheme,
    pub atol: f64,
    pub rtol: f64,
    pub seeds: Vec<u64>,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self {
            step: None,
            scheme: Scheme::Central,
            atol: 0.01,
            rtol: 1e-4,
            seeds: (0..10).collect(),
        }
    }
}

impl FdConfig {
    pub fn with_atol(mut self, atol: f64) -> Self {
        self.atol = atol;
        self
    }

    pub fn with_rtol(mut self, rtol: f64) -> Self {
        self.rtol = rtol;
        self
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.step = Some(h);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(h) = self.step {
            if !(h > 0.0 && h.is_finite()) {
                return Err(FieldError::domain(format!(
                    "step must be positive, got {h}"
                )));
            }
        }
        if !(self.atol >= 0.0 && self.rtol >= 0.0) || self.atol + self.rtol == 0.0 {
            return Err(FieldError::domain(
                "atol and rtol must be nonnegative and not both zero",
            ));
        }
        Ok(())
    }

    /// Step used at a point of Frobenius norm `norm`.
    pub fn step_at(&self, norm: f64) -> f64 {
        self.step
            .unwrap_or_else(|| f64::EPSILON.cbrt() * (1.0 + norm))
    }
}

/// `(f(x + h v) - f(x - h v)) / 2h` for a matrix-valued `f`.
pub fn central_difference(
    f: impl Fn(&Mat) -> Result<Mat>,
    x: &Mat,
    v: &Mat,
    h: f64,
) -> Result<Mat> {
    let plus = f(&x.add(&v.scale(h))?)?;
    let minus = f(&x.sub(&v.scale(h))?)?;
    Ok(plus.sub(&minus)?.scale(0.5 / h))
}

fn total_norm(ms: &[Mat]) -> f64 {
    ms.iter()
        .map(|m| m.frobenius_norm().powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Central difference of a program along one direction per leaf.
///
/// For complex leaves the direction is a complex matrix; the two real
/// directions of an entry are covered by passing `v` and `i v`.
pub fn directional_fd(
    program: &Program,
    leaves: &[Mat],
    directions: &[Mat],
    cfg: &FdConfig,
) -> Result<Mat> {
    cfg.validate()?;
    if directions.len() != leaves.len() {
        return Err(FieldError::shape("one direction per leaf is required"));
    }
    let h = cfg.step_at(total_norm(leaves));
    let shifted = |sign: f64| -> Result<Vec<Mat>> {
        leaves
            .iter()
            .zip(directions)
            .map(|(x, v)| x.add(&v.scale(sign * h)))
            .collect()
    };
    let plus = program.eval(&shifted(1.0)?)?;
    let minus = program.eval(&shifted(-1.0)?)?;
    Ok(plus.sub(&minus)?.scale(0.5 / h))
}

fn product_for(p: &InnerProduct, field: Field) -> InnerProduct {
    match p {
        InnerProduct::Weighted(_) => p.clone(),
        _ => InnerProduct::canonical_for(field),
    }
}

/// Compares `<w, JVP(x; v)>` with `sum_i <VJP_i(x; w), v_i>` under `product`.
///
/// Canonical products adapt to each space's field, so mixed ops such as
/// `Re` are tested with the complex product on the input and the real one
/// on the output. A weighted product applies the same `H` to every space.
pub fn dot_test(op: &OpKind, x: &[Mat], v: &[Mat], w: &Mat, product: &InnerProduct) -> CheckReport {
    let mut report = CheckReport::new(format!("dot:{}", op.name()));
    match dot_sides(op, x, v, w, product) {
        Ok((lhs, rhs)) => {
            let pass = (lhs - rhs).abs() <= DOT_TOLERANCE * (1.0 + lhs.abs());
            report.push("adjoint-identity", rhs, lhs, pass);
        }
        Err(e) => report.push_error("dot test", e),
    }
    report
}

fn dot_sides(
    op: &OpKind,
    x: &[Mat],
    v: &[Mat],
    w: &Mat,
    product: &InnerProduct,
) -> Result<(f64, f64)> {
    if x.len() != v.len() {
        return Err(FieldError::shape("one direction per input is required"));
    }
    let duals: Vec<Dual> = x
        .iter()
        .zip(v)
        .map(|(a, b)| Dual::new(a.clone(), b.clone()))
        .collect::<Result<_>>()?;
    let out = jvp(op, &duals)?;
    let out_p = product_for(product, out.tangent.field());
    let lhs = inner(w, &out.tangent, &out_p)?;
    let w_can = out_p.to_canonical(w)?;
    let inputs: Vec<&Mat> = x.iter().collect();
    let cots = vjp(op, &inputs, &out.primal, &w_can)?;
    let mut rhs = 0.0;
    for (c, vi) in cots.iter().zip(v) {
        let p = product_for(product, vi.field());
        let rep = p.from_canonical(c)?;
        rhs += inner(&rep, vi, &p)?;
    }
    Ok((lhs, rhs))
}

/// Unit direction at `(i, j)`, scaled by `z`.
fn unit(like: &Mat, i: usize, j: usize, z: Scalar) -> Mat {
    Mat::zeros(like.rows(), like.cols(), like.field()).with_entry(i, j, z)
}

/// Compares reverse-mode gradients with entrywise central differences.
pub fn gradcheck(program: &Program, leaves: &[Mat], cfg: &FdConfig) -> CheckReport {
    let mut report = CheckReport::new("gradcheck");
    if let Err(e) = cfg.validate() {
        report.push_error("config", e);
        return report;
    }
    let grads = match Tape::record(program, leaves).and_then(|t| t.backprop()) {
        Ok(g) => g,
        Err(e) => {
            report.push_error("backprop", e);
            return report;
        }
    };
    let zeros: Vec<Mat> = leaves
        .iter()
        .map(|l| Mat::zeros(l.rows(), l.cols(), l.field()))
        .collect();
    for (li, leaf) in leaves.iter().enumerate() {
        let name = &program.leaf_names()[li];
        let g = &grads.gradients[li];
        let mut parts = vec![(Scalar::new(1.0, 0.0), "")];
        if leaf.field() == Field::Complex {
            parts.push((Scalar::new(0.0, 1.0), ".im"));
        }
        for i in 0..leaf.rows() {
            for j in 0..leaf.cols() {
                for &(z, suffix) in &parts {
                    let mut dirs = zeros.clone();
                    dirs[li] = unit(leaf, i, j, z);
                    let label = format!("{name}[{i},{j}]{suffix}");
                    let analytic = if suffix.is_empty() {
                        g.get(i, j).re
                    } else {
                        g.get(i, j).im
                    };
                    match directional_fd(program, leaves, &dirs, cfg) {
                        Ok(fd) => {
                            report.push_banded(label, analytic, fd.re(0, 0), cfg.atol, cfg.rtol)
                        }
                        Err(e) => report.push_error(label, e),
                    }
                }
            }
        }
    }
    report
}
