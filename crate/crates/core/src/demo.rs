//! Feed-forward network reference programs.
//!
//! A depth-`d` network with sigmoid activations and a squared loss,
//!
//! ```text
//! h_0 = X,  h_l = sigmoid(A_l h_{l-1} + b_l 1^T),  L = (1/r) sum (h_d - Y)^2
//! ```
//!
//! where the `r` samples are the columns of `X` and `Y`. Gradients come
//! either from the tape engine or from a hand-written reverse pass.
//!
//! Parameters are initialized from a seed: `A_l` and `b_l` are uniform in
//! `[-1, 1)` scaled by `1/sqrt(fan_in)`, each drawn by [`Mat::random`] with
//! a per-matrix seed derived from the base seed.

use crate::error::{FieldError, Result};
use crate::gradcheck::{numerical_rank, CheckReport};
use crate::matrix::{Field, Mat};
use crate::program::{sigmoid, OpKind, Program, ProgramBuilder};
use crate::reverse::Tape;

/// Rank threshold for the rank-one check.
pub const RANK_TOLERANCE: f64 = 1e-10;
/// Relative agreement required between mathematically equal gradients.
pub const EXACT_TOLERANCE: f64 = 1e-12;

fn derive_seed(seed: u64, k: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        .wrapping_add(k.wrapping_mul(0xBF58_476D_1CE4_E5B9))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub a: Mat,
    pub b: Mat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FfnParams {
    pub layers: Vec<Layer>,
}

impl FfnParams {
    pub fn new(layers: Vec<Layer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(FieldError::shape("network needs at least one layer"));
        }
        for (l, layer) in layers.iter().enumerate() {
            layer.a.require_real("network weights")?;
            layer.b.require_real("network biases")?;
            if layer.b.shape() != (layer.a.rows(), 1) {
                return Err(FieldError::shape(format!(
                    "layer {}: bias must be {}x1",
                    l + 1,
                    layer.a.rows()
                )));
            }
            if l > 0 && layers[l - 1].a.rows() != layer.a.cols() {
                return Err(FieldError::shape(format!(
                    "layer {} expects {} inputs but layer {} has {} outputs",
                    l + 1,
                    layer.a.cols(),
                    l,
                    layers[l - 1].a.rows()
                )));
            }
        }
        Ok(Self { layers })
    }

    /// Seeded parameters for widths `(m_0, m_1, ..., m_d)`.
    pub fn init(widths: &[usize], seed: u64) -> Result<Self> {
        if widths.len() < 2 || widths.contains(&0) {
            return Err(FieldError::shape(
                "widths need at least two positive entries",
            ));
        }
        let layers = widths
            .windows(2)
            .enumerate()
            .map(|(l, w)| {
                let (fan_in, fan_out) = (w[0], w[1]);
                let scale = 1.0 / (fan_in as f64).sqrt();
                Layer {
                    a: Mat::random(
                        fan_out,
                        fan_in,
                        Field::Real,
                        derive_seed(seed, 2 * l as u64),
                    )
                    .scale(scale),
                    b: Mat::random(fan_out, 1, Field::Real, derive_seed(seed, 2 * l as u64 + 1))
                        .scale(scale),
                }
            })
            .collect();
        Self::new(layers)
    }

    pub fn widths(&self) -> Vec<usize> {
        let mut w = vec![self.layers[0].a.cols()];
        w.extend(self.layers.iter().map(|l| l.a.rows()));
        w
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }
}

/// Samples as columns: `x` is `n x r`, `y` is `out x r`.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub x: Mat,
    pub y: Mat,
}

impl Batch {
    pub fn new(x: Mat, y: Mat) -> Result<Self> {
        if x.cols() != y.cols() {
            return Err(FieldError::shape(format!(
                "batch has {} inputs but {} targets",
                x.cols(),
                y.cols()
            )));
        }
        x.require_real("batch inputs")?;
        y.require_real("batch targets")?;
        Ok(Self { x, y })
    }

    /// Inputs and targets uniform in `[0, 1)`.
    pub fn random(inputs: usize, outputs: usize, samples: usize, seed: u64) -> Self {
        let unit = |m: Mat| m.map(|z| (z + 1.0) * 0.5);
        Self {
            x: unit(Mat::random(
                inputs,
                samples,
                Field::Real,
                derive_seed(seed, 1001),
            )),
            y: unit(Mat::random(
                outputs,
                samples,
                Field::Real,
                derive_seed(seed, 1002),
            )),
        }
    }

    pub fn size(&self) -> usize {
        self.x.cols()
    }

    pub fn sample(&self, j: usize) -> Batch {
        Batch {
            x: self.x.column(j),
            y: self.y.column(j),
        }
    }

    fn check(&self, params: &FfnParams) -> Result<()> {
        let w = params.widths();
        if self.x.rows() != w[0] || self.y.rows() != w[w.len() - 1] {
            return Err(FieldError::shape(format!(
                "batch is {}->{} but the network is {}->{}",
                self.x.rows(),
                self.y.rows(),
                w[0],
                w[w.len() - 1]
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FfnGradients {
    pub a: Vec<Mat>,
    pub b: Vec<Mat>,
}

impl FfnGradients {
    fn matrices(&self) -> impl Iterator<Item = (String, &Mat)> {
        let a = self
            .a
            .iter()
            .enumerate()
            .map(|(l, m)| (format!("A{}", l + 1), m));
        let b = self
            .b
            .iter()
            .enumerate()
            .map(|(l, m)| (format!("b{}", l + 1), m));
        a.zip(b).flat_map(|(x, y)| [x, y])
    }

    /// Largest per-matrix relative distance `||G - H||_F / ||H||_F`.
    pub fn max_rel_diff(&self, other: &FfnGradients) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for ((_, g), (_, h)) in self.matrices().zip(other.matrices()) {
            worst = worst.max(rel(g, h)?);
        }
        Ok(worst)
    }
}

fn rel(g: &Mat, h: &Mat) -> Result<f64> {
    let d = g.sub(h)?.frobenius_norm();
    if d == 0.0 {
        return Ok(0.0);
    }
    Ok(d / h.frobenius_norm().max(g.frobenius_norm()))
}

fn forward_pass(params: &FfnParams, batch: &Batch) -> Result<Vec<Mat>> {
    batch.check(params)?;
    let mut acts = vec![batch.x.clone()];
    for layer in &params.layers {
        let z = layer
            .a
            .matmul(acts.last().expect("nonempty"))?
            .add_column_broadcast(&layer.b)?;
        acts.push(sigmoid(&z));
    }
    Ok(acts)
}

/// Mean squared loss of the network over the batch.
pub fn ffn_loss(params: &FfnParams, batch: &Batch) -> Result<f64> {
    let acts = forward_pass(params, batch)?;
    let r = acts.last().expect("nonempty").sub(&batch.y)?;
    Ok(r.frobenius_norm().powi(2) / batch.size() as f64)
}

/// The loss as a tape program over leaves `x, y, A1, b1, A2, b2, ...`.
pub fn ffn_program(params: &FfnParams, batch: &Batch) -> Result<(Program, Vec<Mat>)> {
    batch.check(params)?;
    let mut b = ProgramBuilder::new();
    let x = b.leaf("x");
    let y = b.leaf("y");
    let mut leaves = vec![batch.x.clone(), batch.y.clone()];
    let mut h = x;
    for (l, layer) in params.layers.iter().enumerate() {
        let a = b.leaf(format!("A{}", l + 1));
        let bias = b.leaf(format!("b{}", l + 1));
        leaves.push(layer.a.clone());
        leaves.push(layer.b.clone());
        let z = b.binary(OpKind::MatMul, a, h);
        let z = b.binary(OpKind::AddBias, z, bias);
        h = b.unary(OpKind::Sigmoid, z);
    }
    let mut loss = b.binary(OpKind::SquaredLoss, h, y);
    if batch.size() > 1 {
        loss = b.unary(OpKind::Scale(1.0 / batch.size() as f64), loss);
    }
    Ok((b.finish(loss), leaves))
}

/// Gradients of the mean loss from the tape engine.
pub fn engine_gradients(params: &FfnParams, batch: &Batch) -> Result<FfnGradients> {
    let (program, leaves) = ffn_program(params, batch)?;
    let report = Tape::record(&program, &leaves)?.backprop()?;
    let d = params.depth();
    Ok(FfnGradients {
        a: (0..d)
            .map(|l| report.gradients[2 + 2 * l].clone())
            .collect(),
        b: (0..d)
            .map(|l| report.gradients[3 + 2 * l].clone())
            .collect(),
    })
}

/// Result of the hand-written reverse pass.
#[derive(Debug, Clone, PartialEq)]
pub struct ManualBackward {
    pub loss: f64,
    pub grads: FfnGradients,
    /// Input activation `h_{l-1}` of every layer.
    pub inputs: Vec<Mat>,
    /// Cotangent of every pre-activation `z_l`.
    pub deltas: Vec<Mat>,
}

/// Reverse pass written out by hand, without a tape.
pub fn ffn_backward_manual(params: &FfnParams, batch: &Batch) -> Result<ManualBackward> {
    let acts = forward_pass(params, batch)?;
    let d = params.depth();
    let r = batch.size() as f64;
    let out = &acts[d];
    let residual = out.sub(&batch.y)?;
    let loss = residual.frobenius_norm().powi(2) / r;
    let mut scale = 2.0;
    if batch.size() > 1 {
        scale *= 1.0 / r;
    }
    let mut cot = residual.scale(scale);
    let mut ga = vec![Mat::scalar(0.0); d];
    let mut gb = vec![Mat::scalar(0.0); d];
    let mut deltas = vec![Mat::scalar(0.0); d];
    for l in (0..d).rev() {
        let h = &acts[l + 1];
        let slope = h.map(|s| s * (1.0 - s.re));
        let delta = slope.hadamard(&cot)?;
        ga[l] = delta.matmul(&acts[l].transpose())?;
        gb[l] = delta.row_sums();
        cot = params.layers[l].a.transpose().matmul(&delta)?;
        deltas[l] = delta;
    }
    Ok(ManualBackward {
        loss,
        grads: FfnGradients { a: ga, b: gb },
        inputs: acts[..d].to_vec(),
        deltas,
    })
}

/// Numerical rank of the gradient of every layer matrix.
pub fn gradient_ranks(params: &FfnParams, batch: &Batch) -> Result<Vec<usize>> {
    engine_gradients(params, batch)?
        .a
        .iter()
        .map(|g| numerical_rank(g, RANK_TOLERANCE))
        .collect()
}

/// Single-sample gradients of every layer matrix are rank one and factor as
/// `u v^T`, with `v` the layer input and `u` the pre-activation cotangent.
pub fn rank1_check(params: &FfnParams, x: &Mat, y: &Mat) -> CheckReport {
    let mut report = CheckReport::new("rank1");
    if x.cols() != 1 || y.cols() != 1 {
        report.push_error("input", "rank-one check needs a single sample");
        return report;
    }
    let run = || -> Result<(FfnGradients, ManualBackward)> {
        let batch = Batch::new(x.clone(), y.clone())?;
        Ok((
            engine_gradients(params, &batch)?,
            ffn_backward_manual(params, &batch)?,
        ))
    };
    let (engine, manual) = match run() {
        Ok(v) => v,
        Err(e) => {
            report.push_error("backprop", e);
            return report;
        }
    };
    for (l, g) in engine.a.iter().enumerate() {
        match numerical_rank(g, RANK_TOLERANCE) {
            Ok(rank) => report.push(format!("A{}.rank", l + 1), rank as f64, 1.0, rank == 1),
            Err(e) => report.push_error(format!("A{}.rank", l + 1), e),
        }
        let outer = manual.deltas[l].matmul(&manual.inputs[l].transpose());
        match outer.and_then(|uv| rel(&uv, g)) {
            Ok(err) => report.push(
                format!("A{}.factorization", l + 1),
                err,
                0.0,
                err <= EXACT_TOLERANCE,
            ),
            Err(e) => report.push_error(format!("A{}.factorization", l + 1), e),
        }
    }
    report
}

/// The gradient of the mean loss equals the mean of per-sample gradients.
pub fn batched_gradient_decomposition(params: &FfnParams, batch: &Batch) -> CheckReport {
    let mut report = CheckReport::new("batch-decomposition");
    if batch.size() < 2 {
        report.push_error("input", "decomposition check needs at least two samples");
        return report;
    }
    let run = || -> Result<(FfnGradients, FfnGradients)> {
        let full = engine_gradients(params, batch)?;
        let r = batch.size() as f64;
        let mut acc: Option<FfnGradients> = None;
        for j in 0..batch.size() {
            let g = engine_gradients(params, &batch.sample(j))?;
            acc = Some(match acc {
                None => g,
                Some(s) => FfnGradients {
                    a: s.a
                        .iter()
                        .zip(&g.a)
                        .map(|(p, q)| p.add(q))
                        .collect::<Result<_>>()?,
                    b: s.b
                        .iter()
                        .zip(&g.b)
                        .map(|(p, q)| p.add(q))
                        .collect::<Result<_>>()?,
                },
            });
        }
        let sum = acc.expect("at least two samples");
        let mean = FfnGradients {
            a: sum.a.iter().map(|m| m.scale(1.0 / r)).collect(),
            b: sum.b.iter().map(|m| m.scale(1.0 / r)).collect(),
        };
        Ok((full, mean))
    };
    match run() {
        Ok((full, mean)) => {
            for ((name, g), (_, m)) in full.matrices().zip(mean.matrices()) {
                match rel(g, m) {
                    Ok(err) => report.push(name, err, 0.0, err <= EXACT_TOLERANCE),
                    Err(e) => report.push_error(name, e),
                }
            }
        }
        Err(e) => report.push_error("backprop", e),
    }
    report
}

/// Plain gradient descent; returns the final parameters and the loss before
/// every step followed by the final loss.
pub fn gradient_descent(
    params: &FfnParams,
    batch: &Batch,
    learning_rate: f64,
    steps: usize,
) -> Result<(FfnParams, Vec<f64>)> {
    let mut p = params.clone();
    let mut losses = Vec::with_capacity(steps + 1);
    for _ in 0..steps {
        let m = ffn_backward_manual(&p, batch)?;
        losses.push(m.loss);
        for (layer, (ga, gb)) in p.layers.iter_mut().zip(m.grads.a.iter().zip(&m.grads.b)) {
            layer.a = layer.a.sub(&ga.scale(learning_rate))?;
            layer.b = layer.b.sub(&gb.scale(learning_rate))?;
        }
    }
    losses.push(ffn_loss(&p, batch)?);
    Ok((p, losses))
}

/// Straight-line scalar reimplementation of the loss, for cross-checking.
#[cfg(test)]
fn scalar_loss(params: &FfnParams, batch: &Batch) -> f64 {
    let mut total = 0.0;
    for s in 0..batch.size() {
        let mut h: Vec<f64> = (0..batch.x.rows()).map(|i| batch.x.re(i, s)).collect();
        for layer in &params.layers {
            let mut next = Vec::with_capacity(layer.a.rows());
            for i in 0..layer.a.rows() {
                let mut z = layer.b.re(i, 0);
                for (j, hj) in h.iter().enumerate() {
                    z += layer.a.re(i, j) * hj;
                }
                next.push(1.0 / (1.0 + (-z).exp()));
            }
            h = next;
        }
        for (i, hi) in h.iter().enumerate() {
            let d = hi - batch.y.re(i, s);
            total += d * d;
        }
    }
    total / batch.size() as f64
}
