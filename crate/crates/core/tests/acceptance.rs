//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use matcalc::demo::{
    batched_gradient_decomposition, engine_gradients, ffn_backward_manual, ffn_program,
    gradient_descent, rank1_check, Batch, FfnParams,
};
use matcalc::forward::{jvp, jvp_program};
use matcalc::gradcheck::{dot_test, gradcheck, DOT_TOLERANCE};
use matcalc::matfunc::{apply, block_evaluation, frechet_series};
use matcalc::reverse::{
    adjoint_weighted_left_mul, adjoint_weighted_right_mul, gradient_in_product,
};
use matcalc::{
    inner, CheckReport, Dual, FdConfig, Field, InnerProduct, Mat, MatrixFunction, OpKind, Program,
    ProgramBuilder, Result, Scalar, Spd, Tape,
};

const FIELDS: [Field; 2] = [Field::Real, Field::Complex];
const SEEDS: u64 = 10;
const WIDTHS: [usize; 3] = [32, 16, 8];

fn functions() -> [MatrixFunction; 4] {
    [
        MatrixFunction::Exp,
        MatrixFunction::Log1p,
        MatrixFunction::Sin,
        MatrixFunction::Cos,
    ]
}

fn seed(parts: &[u64]) -> u64 {
    parts.iter().fold(0xA5A5_0000u64, |acc, p| {
        acc.wrapping_mul(1_000_003).wrapping_add(*p)
    })
}

/// Running record of one criterion: every case contributes `err / tol`.
struct Tally {
    cases: usize,
    worst: f64,
    failures: Vec<String>,
}

impl Tally {
    fn new() -> Self {
        Self {
            cases: 0,
            worst: 0.0,
            failures: Vec::new(),
        }
    }

    fn within(&mut self, label: impl Into<String>, err: f64, tol: f64) {
        self.cases += 1;
        let ratio = err / tol;
        if ratio.is_nan() || ratio > 1.0 {
            self.failures
                .push(format!("{}: {err:.3e} > {tol:.3e}", label.into()));
        }
        if ratio.is_finite() {
            self.worst = self.worst.max(ratio);
        }
    }

    fn flag(&mut self, label: impl Into<String>, ok: bool) {
        self.cases += 1;
        if !ok {
            self.failures.push(label.into());
        }
    }

    fn report(&mut self, label: &str, r: &CheckReport) {
        self.cases += 1;
        if !r.pass {
            let detail = r
                .failures()
                .next()
                .map(|c| c.label.clone())
                .or_else(|| r.errors.first().cloned())
                .unwrap_or_default();
            self.failures.push(format!("{label}: {detail}"));
        }
    }

    fn dot(&mut self, label: &str, r: &CheckReport) {
        self.report(label, r);
        for c in &r.cases {
            let tol = DOT_TOLERANCE * (1.0 + c.reference.abs());
            self.worst = self.worst.max(c.abs_error / tol);
        }
    }

    fn result<T>(&mut self, label: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.cases += 1;
                self.failures.push(format!("{label}: {e}"));
                None
            }
        }
    }
}

fn run(id: u32, name: &str, limit: Option<Duration>, body: impl FnOnce(&mut Tally)) -> bool {
    let start = Instant::now();
    let mut t = Tally::new();
    body(&mut t);
    let elapsed = start.elapsed();
    let slow = limit.is_some_and(|l| elapsed > l);
    let pass = t.failures.is_empty() && !slow && t.cases > 0;
    let limit_text = limit
        .map(|l| format!(" limit {:.0}s", l.as_secs_f64()))
        .unwrap_or_default();
    println!(
        "criterion {id:>2} {name}: {} ({} cases, worst {:.2e} of tolerance, {:.2}s{limit_text})",
        if pass { "PASS" } else { "FAIL" },
        t.cases,
        t.worst,
        elapsed.as_secs_f64(),
    );
    for f in t.failures.iter().take(5) {
        println!("    {f}");
    }
    if slow {
        println!("    runtime exceeded");
    }
    pass
}

fn rand(rows: usize, cols: usize, field: Field, s: u64) -> Mat {
    Mat::random(rows, cols, field, s)
}

/// Inputs for one random instance of `op`, or `None` when the op is not
/// defined on `field`.
fn instance(op: &OpKind, field: Field, n: usize, s: u64) -> Option<Vec<Mat>> {
    let r = |rows, cols, k| rand(rows, cols, field, seed(&[s, k]));
    Some(match op {
        OpKind::MatMul => vec![r(n, n, 1), r(n, n + 1, 2)],
        OpKind::LeftMul(_) | OpKind::RightMul(_) | OpKind::Trace | OpKind::Re | OpKind::Im => {
            vec![r(n, n, 1)]
        }
        OpKind::Scale(_) | OpKind::Transpose | OpKind::ConjTranspose => vec![r(n, n + 1, 1)],
        OpKind::Inverse => vec![Mat::random_well_conditioned(n, field, seed(&[s, 1]))],
        OpKind::Power(_) => vec![r(n, n, 1).scale(1.0 / n as f64)],
        OpKind::MatFunc(_) => vec![Mat::random_with_norm(n, field, 0.45, seed(&[s, 1]))],
        OpKind::Add => vec![r(n, n + 1, 1), r(n, n + 1, 2)],
        OpKind::AddBias => vec![r(n, n + 1, 1), r(n, 1, 2)],
        OpKind::Sigmoid if field == Field::Real => vec![r(n, n, 1).scale(3.0)],
        OpKind::SquaredLoss if field == Field::Real => vec![r(n, n, 1), r(n, n, 2)],
        OpKind::Sigmoid | OpKind::SquaredLoss => return None,
    })
}

/// Every primitive, with constants drawn for the given field and size.
fn primitives(field: Field, n: usize, s: u64) -> Vec<OpKind> {
    let mut ops = vec![
        OpKind::MatMul,
        OpKind::LeftMul(rand(n + 1, n, field, seed(&[s, 11]))),
        OpKind::RightMul(rand(n, n + 1, field, seed(&[s, 12]))),
        OpKind::Transpose,
        OpKind::ConjTranspose,
        OpKind::Trace,
        OpKind::Inverse,
        OpKind::Power(1),
        OpKind::Power(2),
        OpKind::Power(3),
        OpKind::Add,
        OpKind::Scale(-1.7),
        OpKind::Re,
        OpKind::Im,
        OpKind::Sigmoid,
        OpKind::AddBias,
        OpKind::SquaredLoss,
    ];
    ops.extend(functions().map(OpKind::MatFunc));
    ops
}

fn directions(xs: &[Mat], s: u64) -> Vec<Mat> {
    xs.iter()
        .enumerate()
        .map(|(k, x)| rand(x.rows(), x.cols(), x.field(), seed(&[s, 100 + k as u64])))
        .collect()
}

fn duals(xs: &[Mat], vs: &[Mat]) -> Result<Vec<Dual>> {
    xs.iter()
        .zip(vs)
        .map(|(x, v)| Dual::new(x.clone(), v.clone()))
        .collect()
}

fn adjoint_identity(t: &mut Tally) {
    for &field in &FIELDS {
        for n in [2, 3, 5, 8] {
            for s in 0..SEEDS {
                let base = seed(&[n as u64, s, field as u64]);
                for op in primitives(field, n, base) {
                    let Some(xs) = instance(&op, field, n, base) else {
                        continue;
                    };
                    let label = format!("{op} {} n={n} seed={s}", field.tag());
                    let refs: Vec<&Mat> = xs.iter().collect();
                    let Some(out) = t.result(&label, op.eval(&refs)) else {
                        continue;
                    };
                    let vs = directions(&xs, base);
                    let w = rand(out.rows(), out.cols(), out.field(), seed(&[base, 200]));
                    t.dot(
                        &label,
                        &dot_test(&op, &xs, &vs, &w, &InnerProduct::Canonical),
                    );
                }
            }
        }
    }
}

fn block_vs_series(t: &mut Tally) {
    for &field in &FIELDS {
        for f in functions() {
            for n in [2, 3, 4] {
                for s in 0..SEEDS {
                    let base = seed(&[n as u64, s, field as u64, 7]);
                    let label = format!("{f} {} n={n} seed={s}", field.tag());
                    let a = Mat::random_with_norm(n, field, 0.45, base);
                    let e = rand(n, n, field, seed(&[base, 1]));
                    if let Some(radius) = t.result(&label, a.spectral_radius_estimate(200)) {
                        t.flag(format!("{label}: radius {radius}"), radius < 0.5);
                    }
                    let evaluated = (|| -> Result<_> {
                        Ok((
                            block_evaluation(&f, &a, &e)?,
                            frechet_series(&f, &a, &e)?,
                            apply(&f, &a)?.value,
                        ))
                    })();
                    let Some((block, series, fa)) = t.result(&label, evaluated) else {
                        continue;
                    };
                    let diff = block.derivative.sub(&series).unwrap().frobenius_norm();
                    t.within(
                        format!("{label} block vs series"),
                        diff,
                        1e-10 * (1.0 + series.frobenius_norm()),
                    );
                    t.within(
                        format!("{label} top-left"),
                        block.top_left.max_abs_diff(&fa).unwrap(),
                        1e-12,
                    );
                    t.within(
                        format!("{label} bottom-right"),
                        block.bottom_right.max_abs_diff(&fa).unwrap(),
                        1e-12,
                    );
                    t.flag(
                        format!("{label} bottom-left nonzero"),
                        block.bottom_left.max_abs() == 0.0,
                    );
                }
            }
        }
    }
}

fn fd_tangent(op: &OpKind, xs: &[Mat], vs: &[Mat]) -> Result<Mat> {
    let norm = xs
        .iter()
        .map(|x| x.frobenius_norm().powi(2))
        .sum::<f64>()
        .sqrt();
    let h = FdConfig::default().step_at(norm);
    let shifted = |sign: f64| -> Result<Mat> {
        let ys: Vec<Mat> = xs
            .iter()
            .zip(vs)
            .map(|(x, v)| x.add(&v.scale(sign * h)))
            .collect::<Result<_>>()?;
        op.eval(&ys.iter().collect::<Vec<_>>())
    };
    Ok(shifted(1.0)?.sub(&shifted(-1.0)?)?.scale(0.5 / h))
}

fn forward_vs_fd(t: &mut Tally) {
    let n = 4;
    for &field in &FIELDS {
        for s in 0..SEEDS {
            let base = seed(&[s, field as u64, 3]);
            let mut ops = vec![
                OpKind::Power(1),
                OpKind::Power(2),
                OpKind::Power(4),
                OpKind::Power(7),
                OpKind::Inverse,
                OpKind::MatMul,
                OpKind::Trace,
                OpKind::Transpose,
                OpKind::Sigmoid,
                OpKind::SquaredLoss,
            ];
            ops.extend(functions().map(OpKind::MatFunc));
            for op in ops {
                let Some(xs) = instance(&op, field, n, base) else {
                    continue;
                };
                let label = format!("{op} {} seed={s}", field.tag());
                let vs = directions(&xs, base);
                let pair = (|| -> Result<_> {
                    let d = duals(&xs, &vs)?;
                    Ok((jvp(&op, &d)?.tangent, fd_tangent(&op, &xs, &vs)?))
                })();
                let Some((exact, fd)) = t.result(&label, pair) else {
                    continue;
                };
                let err = exact.max_abs_diff(&fd).unwrap();
                t.within(label, err, f64::max(1e-6, 1e-4 * exact.max_abs()));
            }
        }
    }
}

fn reference_network_gradcheck(t: &mut Tally) {
    let loose = FdConfig::default().with_atol(0.01);
    let tight = FdConfig::default().with_atol(1e-6).with_rtol(0.0);
    for s in 0..SEEDS {
        let params = FfnParams::init(&WIDTHS, s).unwrap();
        let batch = Batch::random(32, 8, 1, s);
        let (prog, leaves) = ffn_program(&params, &batch).unwrap();
        t.report(
            &format!("seed={s} atol 0.01"),
            &gradcheck(&prog, &leaves, &loose),
        );
        let r = gradcheck(&prog, &leaves, &tight);
        t.report(&format!("seed={s} atol 1e-6"), &r);
        t.worst = t.worst.max(r.max_abs_error / 1e-6);
        let manual = ffn_backward_manual(&params, &batch).unwrap();
        let engine = engine_gradients(&params, &batch).unwrap();
        t.within(
            format!("seed={s} manual vs engine"),
            manual.grads.max_rel_diff(&engine).unwrap(),
            1e-12,
        );
    }
}

fn rank_one(t: &mut Tally) {
    let nets: [&[usize]; 3] = [&[32, 16, 8], &[32, 16, 12, 8], &[32, 16, 12, 10, 8]];
    for widths in nets {
        for s in 0..SEEDS {
            let params = FfnParams::init(widths, s).unwrap();
            let batch = Batch::random(32, 8, 1, s + 100);
            let r = rank1_check(&params, &batch.x, &batch.y);
            t.report(&format!("depth {} seed={s}", widths.len() - 1), &r);
            for c in r
                .cases
                .iter()
                .filter(|c| c.label.ends_with("factorization"))
            {
                t.worst = t.worst.max(c.computed / 1e-12);
            }
        }
    }
}

fn batch_decomposition(t: &mut Tally) {
    for r in [2, 8, 32] {
        for s in 0..SEEDS {
            let params = FfnParams::init(&WIDTHS, s).unwrap();
            let rep = batched_gradient_decomposition(&params, &Batch::random(32, 8, r, s));
            t.report(&format!("r={r} seed={s}"), &rep);
            for c in &rep.cases {
                t.worst = t.worst.max(c.computed / 1e-12);
            }
        }
    }
}

fn weighted_laws(t: &mut Tally) {
    let (n, m) = (4, 3);
    for s in 0..SEEDS {
        let label = format!("seed={s}");
        let h = Spd::new(Mat::random_spd(n, seed(&[s, 70]))).unwrap();
        let p = InnerProduct::Weighted(h.clone());
        let mat = rand(n, n, Field::Real, seed(&[s, 71]));
        let x = rand(n, m, Field::Real, seed(&[s, 72]));
        let y = rand(n, m, Field::Real, seed(&[s, 73]));
        let v = rand(n, m, Field::Real, seed(&[s, 74]));
        let w = rand(n, m, Field::Real, seed(&[s, 75]));

        let mut b = ProgramBuilder::new();
        let xl = b.leaf("x");
        let yl = b.leaf("y");
        let z = b.unary(OpKind::LeftMul(mat.clone()), xl);
        let z = b.unary(OpKind::Sigmoid, z);
        let out = b.binary(OpKind::SquaredLoss, z, yl);
        let prog = b.finish(out);
        let leaves = [x.clone(), y.clone()];
        let checked = (|| -> Result<(f64, f64)> {
            let g = Tape::record(&prog, &leaves)?.backprop()?.gradients[0].clone();
            let grad_h = gradient_in_product(&g, &p)?;
            let zero = Mat::zeros(n, m, Field::Real);
            let df = jvp_program(&prog, &leaves, &[v.clone(), zero])?
                .tangent
                .re(0, 0);
            Ok((inner(&grad_h, &v, &p)?, df))
        })();
        if let Some((lhs, df)) = t.result(&label, checked) {
            t.within(
                format!("{label} gradient identity"),
                (lhs - df).abs(),
                1e-10,
            );
        }

        let adjoint = (|| -> Result<(f64, f64, f64, f64)> {
            let lhs = inner(&w, &mat.matmul(&v)?, &p)?;
            let rhs = inner(&adjoint_weighted_left_mul(&mat, &w, &h)?, &v, &p)?;
            let xr = rand(m, m, Field::Real, seed(&[s, 76]));
            let lhs_r = inner(&w, &v.matmul(&xr)?, &p)?;
            let rhs_r = inner(&adjoint_weighted_right_mul(&xr, &w, &h)?, &v, &p)?;
            Ok((lhs, rhs, lhs_r, rhs_r))
        })();
        if let Some((lhs, rhs, lhs_r, rhs_r)) = t.result(&label, adjoint) {
            t.within(
                format!("{label} left-mul adjoint"),
                (lhs - rhs).abs(),
                1e-10 * (1.0 + lhs.abs()),
            );
            t.within(
                format!("{label} right-mul adjoint"),
                (lhs_r - rhs_r).abs(),
                1e-10 * (1.0 + lhs_r.abs()),
            );
        }
        t.dot(
            &format!("{label} weighted dot test"),
            &dot_test(&OpKind::LeftMul(mat), &[x], &[v], &w, &p),
        );
    }
}

fn complex_calculus(t: &mut Tally) {
    let i = Scalar::new(0.0, 1.0);
    for s in 0..SEEDS {
        let label = format!("seed={s}");
        let n = 5;
        let g = rand(n, 1, Field::Complex, seed(&[s, 80]));
        let x = rand(n, 1, Field::Complex, seed(&[s, 81]));
        let prog = Program::chain(&[OpKind::LeftMul(g.transpose()), OpKind::Re]).unwrap();
        if let Some(r) = t.result(
            &label,
            Tape::record(&prog, std::slice::from_ref(&x)).and_then(|t| t.backprop()),
        ) {
            t.within(
                format!("{label} grad Re(g^T x)"),
                r.gradients[0].max_abs_diff(&g.conj()).unwrap(),
                4.0 * f64::EPSILON * g.max_abs(),
            );
        }

        for f in functions() {
            for n in [2, 3, 4] {
                let base = seed(&[s, n as u64, 82]);
                let a = Mat::random_with_norm(n, Field::Complex, 0.45, base);
                let v = rand(n, n, Field::Complex, seed(&[base, 1]));
                let w = rand(n, n, Field::Complex, seed(&[base, 2]));
                t.dot(
                    &format!("{label} {f} n={n} adjoint"),
                    &dot_test(
                        &OpKind::MatFunc(f.clone()),
                        &[a],
                        &[v],
                        &w,
                        &InnerProduct::ComplexCanonical,
                    ),
                );
            }
        }

        let x = rand(3, 3, Field::Complex, seed(&[s, 83]));
        let v = rand(3, 3, Field::Complex, seed(&[s, 84]));
        let w = rand(3, 3, Field::Complex, seed(&[s, 85]));
        let (alpha, beta) = (0.7, -1.3);
        let im = |d: &Mat| -> Result<Mat> {
            Ok(jvp(&OpKind::Im, &[Dual::new(x.clone(), d.clone())?])?.tangent)
        };
        let lin = (|| -> Result<(f64, f64, f64)> {
            let jv = im(&v)?;
            let jiv = im(&v.scale_complex(i))?;
            let c_gap = jiv.to_complex().sub(&jv.scale_complex(i))?.frobenius_norm();
            let combo = im(&v.scale(alpha).add(&w.scale(beta))?)?;
            let sum = jv.scale(alpha).add(&im(&w)?.scale(beta))?;
            Ok((
                c_gap,
                combo.sub(&sum)?.frobenius_norm(),
                sum.frobenius_norm(),
            ))
        })();
        if let Some((c_gap, r_gap, scale)) = t.result(&label, lin) {
            t.flag(
                format!("{label} Im is not C-linear (gap {c_gap:.3e})"),
                c_gap > 1e-3,
            );
            t.within(
                format!("{label} Im is R-linear"),
                r_gap,
                1e-12 * (1.0 + scale),
            );
        }
    }
}

fn composites(n: usize, s: u64) -> Vec<(Program, Vec<Mat>)> {
    let a = Mat::random_with_norm(n, Field::Real, 0.6, seed(&[s, 90]));
    let power_exp_trace = Program::chain(&[
        OpKind::Power(2),
        OpKind::MatFunc(MatrixFunction::Exp),
        OpKind::Trace,
    ])
    .unwrap();
    let mut b = ProgramBuilder::new();
    let x = b.leaf("x");
    let y = b.leaf("y");
    let z = b.unary(OpKind::LeftMul(rand(n, n, Field::Real, seed(&[s, 91]))), x);
    let z = b.unary(OpKind::Sigmoid, z);
    let out = b.binary(OpKind::SquaredLoss, z, y);
    let layer = b.finish(out);
    vec![
        (power_exp_trace, vec![a]),
        (
            layer,
            vec![
                rand(n, 3, Field::Real, seed(&[s, 92])),
                rand(n, 3, Field::Real, seed(&[s, 93])),
            ],
        ),
    ]
}

fn intermediate_invariance(t: &mut Tally) {
    let n = 4;
    for s in 0..5 {
        for (k, (prog, leaves)) in composites(n, s).into_iter().enumerate() {
            let label = format!("composite {k} seed={s}");
            let weights = vec![
                Some(Spd::new(Mat::random_spd(n, seed(&[s, 94]))).unwrap()),
                Some(Spd::new(Mat::random_spd(n, seed(&[s, 95]))).unwrap()),
                Some(Spd::new(Mat::scalar(2.5)).unwrap()),
            ];
            let both = (|| -> Result<_> {
                let tape = Tape::record(&prog, &leaves)?;
                Ok((tape.backprop()?, tape.backprop_in_products(&weights)?))
            })();
            let Some((plain, weighted)) = t.result(&label, both) else {
                continue;
            };
            for (g, h) in plain.gradients.iter().zip(&weighted.gradients) {
                let err = g.max_abs_diff(h).unwrap() / g.max_abs().max(f64::MIN_POSITIVE);
                t.within(&label, err, 1e-12);
            }
        }
    }
}

fn descent_smoke(t: &mut Tally, suite_start: Instant) {
    let params = FfnParams::init(&WIDTHS, 0).unwrap();
    let batch = Batch::random(32, 8, 8, 0);
    if let Some((_, losses)) = t.result("descent", gradient_descent(&params, &batch, 0.5, 50)) {
        t.flag(
            format!("{} losses recorded", losses.len()),
            losses.len() == 51,
        );
        for (k, w) in losses.windows(2).enumerate() {
            t.flag(format!("step {k}: {} -> {}", w[0], w[1]), w[1] < w[0]);
        }
    }
    let total = suite_start.elapsed();
    t.flag(
        format!("suite took {:.1}s", total.as_secs_f64()),
        total < Duration::from_secs(60),
    );
}

fn main() -> ExitCode {
    let start = Instant::now();
    let secs = Duration::from_secs;
    let results = [
        run(1, "adjoint identity", Some(secs(5)), adjoint_identity),
        run(
            2,
            "block vs series Frechet derivative",
            Some(secs(10)),
            block_vs_series,
        ),
        run(
            3,
            "forward mode vs finite differences",
            Some(secs(10)),
            forward_vs_fd,
        ),
        run(
            4,
            "(32,16,8) network gradcheck",
            None,
            reference_network_gradcheck,
        ),
        run(5, "rank-one layer gradients", None, rank_one),
        run(
            6,
            "batched gradient decomposition",
            None,
            batch_decomposition,
        ),
        run(7, "weighted inner-product laws", None, weighted_laws),
        run(8, "complex calculus", None, complex_calculus),
        run(
            9,
            "intermediate inner-product invariance",
            None,
            intermediate_invariance,
        ),
        run(10, "gradient descent smoke", Some(secs(60)), |t| {
            descent_smoke(t, start)
        }),
    ];
    let passed = results.iter().filter(|&&p| p).count();
    println!("acceptance: {passed}/{} criteria passed", results.len());
    if passed == results.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
