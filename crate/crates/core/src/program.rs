//! Straight-line programs over matrix primitives.
//!
//! A [`Program`] is a topologically ordered list of primitive applications
//! over named leaves. The same program drives plain evaluation, forward
//! mode ([`crate::forward`]), tape recording ([`crate::reverse`]) and finite
//! differences ([`crate::gradcheck`]).

use std::fmt;

use crate::error::{FieldError, Result};
use crate::matfunc::{self, MatrixFunction};
use crate::matrix::{Field, Mat, Scalar};

/// The catalog of differentiable primitives.
///
/// Each kind has exactly one tangent rule ([`crate::forward::jvp`]) and one
/// adjoint rule ([`crate::reverse::vjp`]).
#[derive(Debug, Clone, PartialEq)]
pub enum OpKind {
    /// `(A, B) -> A B`.
    MatMul,
    /// `A -> X A` for a constant `X`.
    LeftMul(Mat),
    /// `A -> A X` for a constant `X`.
    RightMul(Mat),
    Transpose,
    ConjTranspose,
    /// `A -> tr(A)` as a 1x1 matrix.
    Trace,
    Inverse,
    /// `A -> A^k`, `k >= 1`.
    Power(u32),
    MatFunc(MatrixFunction),
    /// `(A, B) -> A + B`.
    Add,
    /// `A -> c A` for real `c`.
    Scale(f64),
    /// Entrywise real part; the result is a real matrix.
    Re,
    /// Entrywise imaginary part; the result is a real matrix.
    Im,
    /// Entrywise logistic function (real field only).
    Sigmoid,
    /// `(X, b) -> X + b 1^T`: adds a column vector to every column.
    AddBias,
    /// `(X, Y) -> sum (X - Y)^2` as a 1x1 real matrix (real field only).
    SquaredLoss,
}

impl OpKind {
    pub fn arity(&self) -> usize {
        match self {
            OpKind::MatMul | OpKind::Add | OpKind::AddBias | OpKind::SquaredLoss => 2,
            _ => 1,
        }
    }

    /// Whether the map is R-linear in its inputs, so its tangent rule is the
    /// map itself.
    pub fn is_linear(&self) -> bool {
        matches!(
            self,
            OpKind::LeftMul(_)
                | OpKind::RightMul(_)
                | OpKind::Transpose
                | OpKind::ConjTranspose
                | OpKind::Trace
                | OpKind::Add
                | OpKind::Scale(_)
                | OpKind::Re
                | OpKind::Im
                | OpKind::AddBias
        )
    }

    pub fn name(&self) -> String {
        match self {
            OpKind::MatMul => "matmul".into(),
            OpKind::LeftMul(_) => "left-mul".into(),
            OpKind::RightMul(_) => "right-mul".into(),
            OpKind::Transpose => "transpose".into(),
            OpKind::ConjTranspose => "conj-transpose".into(),
            OpKind::Trace => "trace".into(),
            OpKind::Inverse => "inverse".into(),
            OpKind::Power(k) => format!("power:{k}"),
            OpKind::MatFunc(f) => f.name(),
            OpKind::Add => "add".into(),
            OpKind::Scale(c) => format!("scale:{c}"),
            OpKind::Re => "re".into(),
            OpKind::Im => "im".into(),
            OpKind::Sigmoid => "sigmoid".into(),
            OpKind::AddBias => "add-bias".into(),
            OpKind::SquaredLoss => "squared-loss".into(),
        }
    }

    /// Parses a unary stage name as printed by [`OpKind::name`]
    /// (`power:3`, `scale:0.5`, `exp`, `trace`, ...).
    pub fn parse_stage(name: &str) -> Result<Self> {
        let op = match name {
            "transpose" => OpKind::Transpose,
            "conj-transpose" => OpKind::ConjTranspose,
            "trace" => OpKind::Trace,
            "inverse" => OpKind::Inverse,
            "re" => OpKind::Re,
            "im" => OpKind::Im,
            "sigmoid" => OpKind::Sigmoid,
            "exp" | "log1p" | "sin" | "cos" => OpKind::MatFunc(MatrixFunction::from_name(name)?),
            other => {
                if let Some(k) = other.strip_prefix("power:") {
                    let k = k
                        .parse::<u32>()
                        .ok()
                        .filter(|&k| k >= 1)
                        .ok_or_else(|| FieldError::parse(format!("bad power {k:?}")))?;
                    OpKind::Power(k)
                } else if let Some(c) = other.strip_prefix("scale:") {
                    let c = c
                        .parse::<f64>()
                        .ok()
                        .filter(|c| c.is_finite())
                        .ok_or_else(|| FieldError::parse(format!("bad scale {c:?}")))?;
                    OpKind::Scale(c)
                } else if other.starts_with("poly:") {
                    OpKind::MatFunc(MatrixFunction::from_name(other)?)
                } else {
                    return Err(FieldError::parse(format!("unknown stage {other:?}")));
                }
            }
        };
        Ok(op)
    }

    /// Primal evaluation.
    pub fn eval(&self, inputs: &[&Mat]) -> Result<Mat> {
        check_arity(self, inputs.len())?;
        let a = inputs[0];
        match self {
            OpKind::MatMul => a.matmul(inputs[1]),
            OpKind::LeftMul(x) => x.matmul(a),
            OpKind::RightMul(x) => a.matmul(x),
            OpKind::Transpose => Ok(a.transpose()),
            OpKind::ConjTranspose => Ok(a.conj_transpose()),
            OpKind::Trace => {
                let t = a.trace()?;
                Ok(Mat::from_fn(1, 1, a.field(), |_, _| t))
            }
            OpKind::Inverse => a.inverse(),
            OpKind::Power(k) => power(a, *k),
            OpKind::MatFunc(f) => Ok(matfunc::apply(f, a)?.value),
            OpKind::Add => a.add(inputs[1]),
            OpKind::Scale(c) => Ok(a.scale(*c)),
            OpKind::Re => Ok(a.re_part()),
            OpKind::Im => Ok(a.im_part()),
            OpKind::Sigmoid => {
                a.require_real("sigmoid")?;
                Ok(sigmoid(a))
            }
            OpKind::AddBias => a.add_column_broadcast(inputs[1]),
            OpKind::SquaredLoss => {
                a.require_real("squared loss")?;
                let r = a.sub(inputs[1])?;
                Ok(Mat::scalar(r.frobenius_norm().powi(2)))
            }
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

pub(crate) fn check_arity(op: &OpKind, got: usize) -> Result<()> {
    if op.arity() != got {
        return Err(FieldError::shape(format!(
            "{} takes {} inputs, got {got}",
            op.name(),
            op.arity()
        )));
    }
    Ok(())
}

pub(crate) fn sigmoid(a: &Mat) -> Mat {
    a.map(|z| Scalar::new(1.0 / (1.0 + (-z.re).exp()), 0.0))
}

/// `A^k` by repeated multiplication, `k >= 1`.
pub(crate) fn power(a: &Mat, k: u32) -> Result<Mat> {
    powers(a, k)?.pop().expect("k >= 1").matmul(a)
}

/// `[A^0, A^1, ..., A^{k-1}]`.
pub(crate) fn powers(a: &Mat, k: u32) -> Result<Vec<Mat>> {
    a.require_square("matrix power")?;
    if k == 0 {
        return Err(FieldError::domain("matrix power needs k >= 1"));
    }
    let mut out = vec![Mat::identity(a.rows(), a.field())];
    for i in 1..k as usize {
        let next = out[i - 1].matmul(a)?;
        out.push(next);
    }
    Ok(out)
}

/// Reference to a value inside a program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operand {
    Leaf(usize),
    Node(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instr {
    pub op: OpKind,
    pub args: Vec<Operand>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    leaf_names: Vec<String>,
    instrs: Vec<Instr>,
    output: Operand,
}

#[derive(Debug, Default)]
pub struct ProgramBuilder {
    leaf_names: Vec<String>,
    instrs: Vec<Instr>,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn leaf(&mut self, name: impl Into<String>) -> Operand {
        self.leaf_names.push(name.into());
        Operand::Leaf(self.leaf_names.len() - 1)
    }

    /// Appends `op(args)`.
    ///
    /// Panics if the arity is wrong or an operand does not exist yet.
    pub fn apply(&mut self, op: OpKind, args: &[Operand]) -> Operand {
        assert_eq!(op.arity(), args.len(), "{} arity", op.name());
        for a in args {
            assert!(self.defined(*a), "operand {a:?} used before definition");
        }
        self.instrs.push(Instr {
            op,
            args: args.to_vec(),
        });
        Operand::Node(self.instrs.len() - 1)
    }

    pub fn unary(&mut self, op: OpKind, arg: Operand) -> Operand {
        self.apply(op, &[arg])
    }

    pub fn binary(&mut self, op: OpKind, a: Operand, b: Operand) -> Operand {
        self.apply(op, &[a, b])
    }

    fn defined(&self, a: Operand) -> bool {
        match a {
            Operand::Leaf(i) => i < self.leaf_names.len(),
            Operand::Node(i) => i < self.instrs.len(),
        }
    }

    pub fn finish(self, output: Operand) -> Program {
        assert!(self.defined(output), "output {output:?} is undefined");
        Program {
            leaf_names: self.leaf_names,
            instrs: self.instrs,
            output,
        }
    }
}

impl Program {
    /// Single-leaf pipeline `x -> stage_n(... stage_1(x))`. Every stage
    /// must be unary.
    pub fn chain(stages: &[OpKind]) -> Result<Program> {
        let mut b = ProgramBuilder::new();
        let mut cur = b.leaf("x");
        for s in stages {
            check_arity(s, 1)?;
            cur = b.unary(s.clone(), cur);
        }
        Ok(b.finish(cur))
    }

    pub fn leaf_names(&self) -> &[String] {
        &self.leaf_names
    }

    pub fn num_leaves(&self) -> usize {
        self.leaf_names.len()
    }

    pub fn instrs(&self) -> &[Instr] {
        &self.instrs
    }

    pub fn output(&self) -> Operand {
        self.output
    }

    pub(crate) fn check_leaves(&self, leaves: &[Mat]) -> Result<()> {
        if leaves.len() != self.leaf_names.len() {
            return Err(FieldError::shape(format!(
                "program has {} leaves, got {} values",
                self.leaf_names.len(),
                leaves.len()
            )));
        }
        Ok(())
    }

    /// Value of every interior node, in order.
    pub fn eval_nodes(&self, leaves: &[Mat]) -> Result<Vec<Mat>> {
        self.check_leaves(leaves)?;
        let mut nodes: Vec<Mat> = Vec::with_capacity(self.instrs.len());
        for ins in &self.instrs {
            let args: Vec<&Mat> = ins
                .args
                .iter()
                .map(|a| match *a {
                    Operand::Leaf(i) => &leaves[i],
                    Operand::Node(i) => &nodes[i],
                })
                .collect();
            let v = ins.op.eval(&args)?;
            nodes.push(v);
        }
        Ok(nodes)
    }

    pub fn eval(&self, leaves: &[Mat]) -> Result<Mat> {
        let mut nodes = self.eval_nodes(leaves)?;
        Ok(match self.output {
            Operand::Leaf(i) => leaves[i].clone(),
            Operand::Node(i) => nodes.swap_remove(i),
        })
    }

    /// Evaluates a program whose output is a 1x1 real matrix.
    pub fn eval_scalar(&self, leaves: &[Mat]) -> Result<f64> {
        let out = self.eval(leaves)?;
        if out.shape() != (1, 1) || out.field() != Field::Real {
            return Err(FieldError::shape(format!(
                "program output is {}x{} {:?}, expected a real scalar",
                out.rows(),
                out.cols(),
                out.field()
            )));
        }
        Ok(out.re(0, 0))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn chain_rejects_binary_stage() {
        assert!(Program::chain(&[OpKind::Trace]).is_ok());
        assert!(Program::chain(&[OpKind::MatMul]).is_err());
    }

    #[test]
    fn stage_names_round_trip() {
        for op in [
            OpKind::Transpose,
            OpKind::ConjTranspose,
            OpKind::Trace,
            OpKind::Inverse,
            OpKind::Power(4),
            OpKind::MatFunc(MatrixFunction::Log1p),
            OpKind::Scale(0.5),
            OpKind::Re,
            OpKind::Im,
            OpKind::Sigmoid,
        ] {
            assert_eq!(OpKind::parse_stage(&op.name()).unwrap(), op);
        }
        assert!(OpKind::parse_stage("power:0").is_err());
        assert!(OpKind::parse_stage("frobnicate").is_err());
    }

    #[test]
    fn eval_simple_program() {
        let mut b = ProgramBuilder::new();
        let a = b.leaf("A");
        let sq = b.binary(OpKind::MatMul, a, a);
        let t = b.unary(OpKind::Trace, sq);
        let p = b.finish(t);
        let m = Mat::real_rows(&[[1.0, 2.0], [3.0, 4.0]]);
        // tr(A^2) = 1 + 6 + 6 + 16
        assert_eq!(p.eval_scalar(&[m]).unwrap(), 29.0);
    }

    #[test]
    fn powers_and_sigmoid() {
        let a = Mat::real_rows(&[[1.0, 1.0], [0.0, 1.0]]);
        assert_eq!(
            power(&a, 3).unwrap(),
            Mat::real_rows(&[[1.0, 3.0], [0.0, 1.0]])
        );
        assert!(power(&a, 0).is_err());
        assert_eq!(sigmoid(&Mat::scalar(0.0)), Mat::scalar(0.5));
    }

    #[test]
    fn eval_field_guards() {
        let c = Mat::random(2, 2, Field::Complex, 0);
        assert!(OpKind::Sigmoid.eval(&[&c]).is_err());
        assert!(OpKind::SquaredLoss.eval(&[&c, &c]).is_err());
        assert!(OpKind::MatMul.eval(&[&c]).is_err());
    }
}
