//! Reverse mode: record a tape, then pull the seed cotangent back through
//! the adjoint of each primitive's differential.
//!
//! Adjoints are taken with respect to the canonical real inner product of
//! each space (`tr(A^T B)` or `Re tr(A^H B)`); gradients under a weighted
//! product are recovered afterwards with [`gradient_in_product`].

use crate::error::{FieldError, Result};
use crate::matfunc;
use crate::matrix::{Field, InnerProduct, Mat, Scalar, Spd};
use crate::program::{check_arity, powers, OpKind, Operand, Program};

/// Per-node context saved during recording.
#[derive(Debug, Clone, PartialEq)]
pub enum Saved {
    None,
    /// `A^0 .. A^{k-1}` for `Power(k)`.
    Powers(Vec<Mat>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: usize,
    pub op: OpKind,
    pub inputs: Vec<Operand>,
    pub primal: Mat,
    pub saved: Saved,
}

/// A recorded evaluation with a real scalar output.
#[derive(Debug, Clone)]
pub struct Tape {
    leaf_names: Vec<String>,
    leaves: Vec<Mat>,
    nodes: Vec<Node>,
    output: Operand,
}

/// Gradient of the tape output with respect to every leaf.
#[derive(Debug, Clone)]
pub struct GradientReport {
    pub names: Vec<String>,
    pub gradients: Vec<Mat>,
    pub product: InnerProduct,
}

impl GradientReport {
    pub fn get(&self, name: &str) -> Option<&Mat> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.gradients[i])
    }
}

impl Tape {
    pub fn record(program: &Program, leaves: &[Mat]) -> Result<Tape> {
        program.check_leaves(leaves)?;
        let mut nodes: Vec<Node> = Vec::with_capacity(program.instrs().len());
        for (id, ins) in program.instrs().iter().enumerate() {
            let args: Vec<&Mat> = ins
                .args
                .iter()
                .map(|a| match *a {
                    Operand::Leaf(i) => &leaves[i],
                    Operand::Node(i) => &nodes[i].primal,
                })
                .collect();
            let (primal, saved) = match &ins.op {
                OpKind::Power(k) => {
                    let pows = powers(args[0], *k)?;
                    let p = pows[pows.len() - 1].matmul(args[0])?;
                    (p, Saved::Powers(pows))
                }
                op => (op.eval(&args)?, Saved::None),
            };
            nodes.push(Node {
                id,
                op: ins.op.clone(),
                inputs: ins.args.clone(),
                primal,
                saved,
            });
        }
        let tape = Tape {
            leaf_names: program.leaf_names().to_vec(),
            leaves: leaves.to_vec(),
            nodes,
            output: program.output(),
        };
        let out = tape.value(tape.output);
        if out.shape() != (1, 1) {
            return Err(FieldError::shape(format!(
                "tape output must be 1x1, got {}x{}",
                out.rows(),
                out.cols()
            )));
        }
        if out.field() != Field::Real {
            return Err(FieldError::field(
                "tape output must be real; append `re` or `im`",
            ));
        }
        Ok(tape)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn leaves(&self) -> &[Mat] {
        &self.leaves
    }

    pub fn leaf_names(&self) -> &[String] {
        &self.leaf_names
    }

    pub fn output_value(&self) -> f64 {
        self.value(self.output).re(0, 0)
    }

    fn value(&self, a: Operand) -> &Mat {
        match a {
            Operand::Leaf(i) => &self.leaves[i],
            Operand::Node(i) => &self.nodes[i].primal,
        }
    }

    /// Adjoint of node `id`'s differential applied to `cotangent`.
    pub fn vjp(&self, id: usize, cotangent: &Mat) -> Result<Vec<Mat>> {
        let node = &self.nodes[id];
        let inputs: Vec<&Mat> = node.inputs.iter().map(|a| self.value(*a)).collect();
        vjp_with(&node.op, &inputs, &node.primal, &node.saved, cotangent)
    }

    /// Gradients of the output for every leaf under the canonical products.
    pub fn backprop(&self) -> Result<GradientReport> {
        self.backprop_in_products(&[])
    }

    /// Backprop in which the cotangent of node `j` is carried as its
    /// representer under `weights[j]` (when given), `H^{-1} g`, and every
    /// adjoint is the weighted one `H_in^{-1} T* H_out`. Leaves always use
    /// canonical products, so the result equals [`Tape::backprop`] in exact
    /// arithmetic.
    pub fn backprop_in_products(&self, weights: &[Option<Spd>]) -> Result<GradientReport> {
        let weight = |id: usize| weights.get(id).and_then(|w| w.as_ref());
        let mut leaf_cot: Vec<Option<Mat>> = vec![None; self.leaves.len()];
        let mut node_cot: Vec<Option<Mat>> = vec![None; self.nodes.len()];
        let seed = Mat::scalar(1.0);
        match self.output {
            Operand::Leaf(i) => leaf_cot[i] = Some(seed),
            Operand::Node(i) => {
                node_cot[i] = Some(match weight(i) {
                    Some(h) => h.solve(&seed)?,
                    None => seed,
                })
            }
        }
        for id in (0..self.nodes.len()).rev() {
            let Some(rep) = node_cot[id].take() else {
                continue;
            };
            let g = match weight(id) {
                Some(h) => h.apply(&rep)?,
                None => rep,
            };
            let grads = self.vjp(id, &g)?;
            for (arg, c) in self.nodes[id].inputs.iter().zip(grads) {
                let (slot, c) = match *arg {
                    Operand::Leaf(i) => (&mut leaf_cot[i], c),
                    Operand::Node(i) => {
                        let c = match weight(i) {
                            Some(h) => h.solve(&c)?,
                            None => c,
                        };
                        (&mut node_cot[i], c)
                    }
                };
                *slot = Some(match slot.take() {
                    Some(acc) => acc.add(&c)?,
                    None => c,
                });
            }
        }
        let gradients = leaf_cot
            .into_iter()
            .zip(&self.leaves)
            .map(|(c, leaf)| {
                c.unwrap_or_else(|| Mat::zeros(leaf.rows(), leaf.cols(), leaf.field()))
            })
            .collect();
        let product = match self.leaves.iter().any(|l| l.field() == Field::Complex) {
            true => InnerProduct::ComplexCanonical,
            false => InnerProduct::Canonical,
        };
        Ok(GradientReport {
            names: self.leaf_names.clone(),
            gradients,
            product,
        })
    }
}

/// Adjoint rule for one primitive under the canonical products, returning
/// one cotangent per input.
pub fn vjp(op: &OpKind, inputs: &[&Mat], output: &Mat, cotangent: &Mat) -> Result<Vec<Mat>> {
    check_arity(op, inputs.len())?;
    let saved = match op {
        OpKind::Power(k) => Saved::Powers(powers(inputs[0], *k)?),
        _ => Saved::None,
    };
    vjp_with(op, inputs, output, &saved, cotangent)
}

fn vjp_with(
    op: &OpKind,
    inputs: &[&Mat],
    output: &Mat,
    saved: &Saved,
    g: &Mat,
) -> Result<Vec<Mat>> {
    check_arity(op, inputs.len())?;
    if g.shape() != output.shape() {
        return Err(FieldError::shape(format!(
            "cotangent is {}x{}, output is {}x{}",
            g.rows(),
            g.cols(),
            output.rows(),
            output.cols()
        )));
    }
    if g.field() != output.field() {
        return Err(FieldError::field("cotangent field differs from the output"));
    }
    let a = inputs[0];
    let out = match op {
        OpKind::MatMul => vec![
            g.matmul(&inputs[1].conj_transpose())?,
            a.conj_transpose().matmul(g)?,
        ],
        OpKind::LeftMul(x) => vec![x.conj_transpose().matmul(g)?],
        OpKind::RightMul(x) => vec![g.matmul(&x.conj_transpose())?],
        OpKind::Transpose => vec![g.transpose()],
        OpKind::ConjTranspose => vec![g.conj_transpose()],
        OpKind::Trace => {
            let s = g.get(0, 0);
            vec![Mat::identity(a.rows(), a.field()).map(|z| z * s)]
        }
        OpKind::Inverse => {
            let inv_h = output.conj_transpose();
            vec![inv_h.matmul(g)?.matmul(&inv_h)?.neg()]
        }
        OpKind::Power(k) => {
            let owned;
            let pows = match saved {
                Saved::Powers(p) => p,
                Saved::None => {
                    owned = powers(a, *k)?;
                    &owned
                }
            };
            let adj: Vec<Mat> = pows.iter().map(Mat::conj_transpose).collect();
            let n = adj.len();
            let mut acc = Mat::zeros(a.rows(), a.cols(), a.field());
            for i in 0..n {
                acc = acc.add(&adj[i].matmul(g)?.matmul(&adj[n - 1 - i])?)?;
            }
            vec![acc]
        }
        OpKind::MatFunc(f) => vec![matfunc::adjoint_frechet(f, a, g)?],
        OpKind::Add => vec![g.clone(), g.clone()],
        OpKind::Scale(c) => vec![g.scale(*c)],
        OpKind::Re => match a.field() {
            Field::Complex => vec![g.to_complex()],
            Field::Real => vec![g.clone()],
        },
        OpKind::Im => match a.field() {
            Field::Complex => vec![g.scale_complex(Scalar::new(0.0, 1.0))],
            Field::Real => vec![Mat::zeros(a.rows(), a.cols(), Field::Real)],
        },
        OpKind::Sigmoid => {
            let slope = output.map(|s| s * (1.0 - s.re));
            vec![slope.hadamard(g)?]
        }
        OpKind::AddBias => vec![g.clone(), g.row_sums()],
        OpKind::SquaredLoss => {
            let r = a.sub(inputs[1])?.scale(2.0 * g.re(0, 0));
            let neg = r.neg();
            vec![r, neg]
        }
    };
    Ok(out)
}

/// Representer of the gradient under `product`, given the canonical one:
/// `H^{-1} g` for `Weighted(H)`, unchanged otherwise.
pub fn gradient_in_product(g_canonical: &Mat, product: &InnerProduct) -> Result<Mat> {
    product.from_canonical(g_canonical)
}

/// Adjoint of `A -> X A` when both spaces carry `<., .>_H`:
/// `L_X^* = L_{H^{-1} X^T H}`.
pub fn adjoint_weighted_left_mul(x: &Mat, g: &Mat, h: &Spd) -> Result<Mat> {
    x.require_real("weighted adjoint")?;
    let xt_h_g = x.transpose().matmul(&h.apply(g)?)?;
    h.solve(&xt_h_g)
}

/// Adjoint of `A -> A X` when both spaces carry `<., .>_H`; the weight acts
/// on rows, so this is `R_{X^T}` as in the canonical case.
pub fn adjoint_weighted_right_mul(x: &Mat, g: &Mat, h: &Spd) -> Result<Mat> {
    x.require_real("weighted adjoint")?;
    if h.dim() != g.rows() {
        return Err(FieldError::shape(
            "weight does not match the cotangent rows",
        ));
    }
    g.matmul(&x.transpose())
}
