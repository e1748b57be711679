use super::{dot_test, CheckReport};
use crate::matfunc::MatrixFunction;
use crate::matrix::{Field, InnerProduct, Mat};
use crate::program::OpKind;

/// One random dot-test instance: inputs `x`, input directions `v` and an
/// output cotangent `w`.
#[derive(Debug, Clone)]
pub struct Instance {
    pub op: OpKind,
    pub x: Vec<Mat>,
    pub v: Vec<Mat>,
    pub w: Mat,
}

fn mix(seed: u64, k: u64) -> u64 {
    seed.wrapping_mul(6_364_136_223_846_793_005)
        .wrapping_add(k.wrapping_mul(1_442_695_040_888_963_407))
}

/// A seeded instance of every primitive defined on `field` at size `n`.
///
/// Inputs are drawn where each op is well behaved: `inverse` gets a
/// diagonally shifted matrix and matrix functions get `||A||_F = 0.45`.
pub fn primitive_instances(n: usize, field: Field, seed: u64) -> Vec<Instance> {
    let r = |rows, cols, k| Mat::random(rows, cols, field, mix(seed, k));
    let mut out = Vec::new();
    let mut push = |op: OpKind, x: Vec<Mat>| {
        let k = out.len() as u64;
        let v = x
            .iter()
            .enumerate()
            .map(|(j, m)| {
                Mat::random(
                    m.rows(),
                    m.cols(),
                    m.field(),
                    mix(seed, 1000 + 10 * k + j as u64),
                )
            })
            .collect();
        let y = op
            .eval(&x.iter().collect::<Vec<_>>())
            .expect("instances are well formed");
        let w = Mat::random(y.rows(), y.cols(), y.field(), mix(seed, 2000 + k));
        out.push(Instance { op, x, v, w });
    };
    push(OpKind::MatMul, vec![r(n, n, 1), r(n, n + 1, 2)]);
    push(OpKind::LeftMul(r(n + 1, n, 3)), vec![r(n, n, 4)]);
    push(OpKind::RightMul(r(n, n + 1, 5)), vec![r(n, n, 6)]);
    push(OpKind::Transpose, vec![r(n, n + 1, 7)]);
    push(OpKind::ConjTranspose, vec![r(n, n + 1, 8)]);
    push(OpKind::Trace, vec![r(n, n, 9)]);
    push(
        OpKind::Inverse,
        vec![Mat::random_well_conditioned(n, field, mix(seed, 10))],
    );
    for k in [1, 2, 3] {
        push(
            OpKind::Power(k),
            vec![r(n, n, 10 + k as u64).scale(1.0 / n as f64)],
        );
    }
    let functions = [
        MatrixFunction::Exp,
        MatrixFunction::Log1p,
        MatrixFunction::Sin,
        MatrixFunction::Cos,
    ];
    for (k, f) in functions.into_iter().enumerate() {
        let a = Mat::random_with_norm(n, field, 0.45, mix(seed, 20 + k as u64));
        push(OpKind::MatFunc(f), vec![a]);
    }
    push(OpKind::Add, vec![r(n, n + 1, 30), r(n, n + 1, 31)]);
    push(OpKind::Scale(-1.7), vec![r(n, n + 1, 32)]);
    push(OpKind::Re, vec![r(n, n, 33)]);
    push(OpKind::Im, vec![r(n, n, 34)]);
    push(OpKind::AddBias, vec![r(n, n + 1, 35), r(n, 1, 36)]);
    if field == Field::Real {
        push(OpKind::Sigmoid, vec![r(n, n, 37).scale(3.0)]);
        push(OpKind::SquaredLoss, vec![r(n, n, 38), r(n, n, 39)]);
    }
    out
}

/// Dot test of every primitive under the canonical products.
pub fn adjoint_suite(n: usize, field: Field, seed: u64) -> CheckReport {
    let mut report = CheckReport::new(format!("adjoint-suite:{}:n={n}", field.tag()));
    for inst in primitive_instances(n, field, seed) {
        let r = dot_test(
            &inst.op,
            &inst.x,
            &inst.v,
            &inst.w,
            &InnerProduct::Canonical,
        );
        report.absorb(r);
    }
    report
}
