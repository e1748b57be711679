//! Forward mode: push `(primal, tangent)` pairs through differential rules.
//!
//! Every rule is R-linear in the tangent and identical on both fields; the
//! complex case only changes which transposes are conjugated.

use crate::error::{FieldError, Result};
use crate::matfunc;
use crate::matrix::{Lu, Mat};
use crate::program::{check_arity, powers, sigmoid, OpKind, Operand, Program};

/// A point together with a direction, `(x, v)` in `(df)_x(v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dual {
    pub primal: Mat,
    pub tangent: Mat,
}

impl Dual {
    pub fn new(primal: Mat, tangent: Mat) -> Result<Self> {
        if primal.shape() != tangent.shape() {
            return Err(FieldError::shape(format!(
                "tangent is {}x{}, primal is {}x{}",
                tangent.rows(),
                tangent.cols(),
                primal.rows(),
                primal.cols()
            )));
        }
        if primal.field() != tangent.field() {
            return Err(FieldError::field("tangent field differs from primal"));
        }
        Ok(Self { primal, tangent })
    }

    /// A constant: zero tangent.
    pub fn constant(primal: Mat) -> Self {
        let tangent = Mat::zeros(primal.rows(), primal.cols(), primal.field());
        Self { primal, tangent }
    }
}

/// Tangent rule for R-linear unary maps: `(T(x), T(v))`.
pub fn jvp_linear(op: &OpKind, d: &Dual) -> Result<Dual> {
    if !op.is_linear() || op.arity() != 1 {
        return Err(FieldError::domain(format!(
            "{} is not a unary R-linear map",
            op.name()
        )));
    }
    Ok(Dual {
        primal: op.eval(&[&d.primal])?,
        tangent: op.eval(&[&d.tangent])?,
    })
}

/// Leibniz rule: `d(AB) = E_A B + A E_B`.
pub fn jvp_matmul(a: &Dual, b: &Dual) -> Result<Dual> {
    let primal = a.primal.matmul(&b.primal)?;
    let tangent = a
        .tangent
        .matmul(&b.primal)?
        .add(&a.primal.matmul(&b.tangent)?)?;
    Ok(Dual { primal, tangent })
}

fn power_tangent(pows: &[Mat], e: &Mat) -> Result<Mat> {
    let k = pows.len();
    let mut out = Mat::zeros(e.rows(), e.cols(), e.field());
    for i in 0..k {
        let t = pows[i].matmul(e)?.matmul(&pows[k - 1 - i])?;
        out = out.add(&t)?;
    }
    Ok(out)
}

/// `sum_{i=0}^{k-1} A^i E A^{k-1-i}`, using cached powers.
pub fn jvp_power(a: &Mat, e: &Mat, k: u32) -> Result<Mat> {
    if a.shape() != e.shape() {
        return Err(FieldError::shape("power tangent must match the base point"));
    }
    let pows = powers(a, k)?;
    power_tangent(&pows, e)
}

/// `-A^{-1} E A^{-1}` with a single LU factorization of `A`.
pub fn jvp_inverse(a: &Mat, e: &Mat) -> Result<Mat> {
    let lu = Lu::factor(a)?;
    inverse_tangent(&lu, e)
}

fn inverse_tangent(lu: &Lu, e: &Mat) -> Result<Mat> {
    Ok(lu.solve_right(&lu.solve(e)?)?.neg())
}

/// Entrywise primitives used by the feed-forward demo.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Elementwise {
    Sigmoid,
    /// `sum (x - y)^2` against a constant target `y`.
    SquaredLoss,
}

pub fn jvp_elementwise(kind: Elementwise, d: &Dual, aux: Option<&Mat>) -> Result<Dual> {
    match kind {
        Elementwise::Sigmoid => jvp(&OpKind::Sigmoid, std::slice::from_ref(d)),
        Elementwise::SquaredLoss => {
            let target =
                aux.ok_or_else(|| FieldError::shape("squared loss needs a target matrix"))?;
            jvp(
                &OpKind::SquaredLoss,
                &[d.clone(), Dual::constant(target.clone())],
            )
        }
    }
}

/// Tangent rule for any primitive.
pub fn jvp(op: &OpKind, inputs: &[Dual]) -> Result<Dual> {
    check_arity(op, inputs.len())?;
    let a = &inputs[0];
    if op.is_linear() {
        let primals: Vec<&Mat> = inputs.iter().map(|d| &d.primal).collect();
        let tangents: Vec<&Mat> = inputs.iter().map(|d| &d.tangent).collect();
        return Ok(Dual {
            primal: op.eval(&primals)?,
            tangent: op.eval(&tangents)?,
        });
    }
    match op {
        OpKind::MatMul => jvp_matmul(a, &inputs[1]),
        OpKind::Inverse => {
            let lu = Lu::factor(&a.primal)?;
            Ok(Dual {
                primal: lu.inverse()?,
                tangent: inverse_tangent(&lu, &a.tangent)?,
            })
        }
        OpKind::Power(k) => {
            let pows = powers(&a.primal, *k)?;
            let primal = pows[pows.len() - 1].matmul(&a.primal)?;
            Ok(Dual {
                primal,
                tangent: power_tangent(&pows, &a.tangent)?,
            })
        }
        OpKind::MatFunc(f) => Ok(Dual {
            primal: matfunc::apply(f, &a.primal)?.value,
            tangent: matfunc::frechet_block(f, &a.primal, &a.tangent)?,
        }),
        OpKind::Sigmoid => {
            a.primal.require_real("sigmoid")?;
            let s = sigmoid(&a.primal);
            let slope = s.map(|z| z * (1.0 - z.re));
            let tangent = slope.hadamard(&a.tangent)?;
            Ok(Dual { primal: s, tangent })
        }
        OpKind::SquaredLoss => {
            let b = &inputs[1];
            a.primal.require_real("squared loss")?;
            let r = a.primal.sub(&b.primal)?;
            let dr = a.tangent.sub(&b.tangent)?;
            let primal = Mat::scalar(r.frobenius_norm().powi(2));
            let tangent = Mat::scalar(2.0 * crate::matrix::re_inner(&r, &dr));
            Ok(Dual { primal, tangent })
        }
        _ => unreachable!("linear kinds handled above"),
    }
}

/// Pushes `(x, v)` through a unary pipeline, left to right.
pub fn jvp_chain(stages: &[OpKind], x: &Mat, v: &Mat) -> Result<Mat> {
    let mut d = Dual::new(x.clone(), v.clone())?;
    for s in stages {
        check_arity(s, 1)?;
        d = jvp(s, std::slice::from_ref(&d))?;
    }
    Ok(d.tangent)
}

/// Forward mode over a whole program: one tangent per leaf.
pub fn jvp_program(program: &Program, leaves: &[Mat], tangents: &[Mat]) -> Result<Dual> {
    program.check_leaves(leaves)?;
    if tangents.len() != leaves.len() {
        return Err(FieldError::shape("one tangent per leaf is required"));
    }
    let seeds: Vec<Dual> = leaves
        .iter()
        .zip(tangents)
        .map(|(x, v)| Dual::new(x.clone(), v.clone()))
        .collect::<Result<_>>()?;
    let mut nodes: Vec<Dual> = Vec::with_capacity(program.instrs().len());
    for ins in program.instrs() {
        let args: Vec<Dual> = ins
            .args
            .iter()
            .map(|a| match *a {
                Operand::Leaf(i) => seeds[i].clone(),
                Operand::Node(i) => nodes[i].clone(),
            })
            .collect();
        let d = jvp(&ins.op, &args)?;
        nodes.push(d);
    }
    Ok(match program.output() {
        Operand::Leaf(i) => seeds[i].clone(),
        Operand::Node(i) => nodes.swap_remove(i),
    })
}
