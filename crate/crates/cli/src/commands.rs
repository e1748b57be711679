use std::path::Path;

use matcalc::demo::{
    batched_gradient_decomposition, engine_gradients, ffn_backward_manual, ffn_loss, ffn_program,
    rank1_check, Batch, FfnParams, EXACT_TOLERANCE,
};
use matcalc::gradcheck::{adjoint_suite, gradcheck, FdConfig, Scheme};
use matcalc::matfunc::{apply, frechet_block, frechet_series, TERM_TOLERANCE};
use matcalc::{CheckReport, Field, FieldError, Mat, MatrixFunction, OpKind, Program, Tape};

use crate::{
    Cli, CliError, Command, DotTestArgs, FdArgs, FfnArgs, GradcheckArgs, MatfuncArgs, SchemeArg,
};

pub struct Outcome {
    pub report: CheckReport,
    /// Extra lines shown in text format only.
    pub notes: Vec<String>,
    /// Matrices requested on stdout, printed before the report.
    pub stdout: String,
}

impl Outcome {
    fn new(report: CheckReport) -> Self {
        Self {
            report,
            notes: Vec::new(),
            stdout: String::new(),
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::DotTest(a) => dot_test(a, cli.seed),
        Command::Gradcheck(a) => grad_check(a, cli.seed),
        Command::Matfunc(a) => matfunc(a),
        Command::FfnDemo(a) => ffn_demo(a, cli.seed),
    }
}

fn fd_config(a: &FdArgs) -> Result<FdConfig, CliError> {
    let mut cfg = FdConfig::default().with_atol(a.atol).with_rtol(a.rtol);
    if let Some(h) = a.step {
        cfg = cfg.with_step(h);
    }
    cfg.scheme = match a.scheme {
        SchemeArg::Central => Scheme::Central,
    };
    cfg.validate().map_err(|e| CliError::Usage(e.detail))?;
    Ok(cfg)
}

fn read_matrix(path: &Path) -> Result<Mat, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    text.parse::<Mat>().map_err(|e| {
        CliError::Field(FieldError::new(
            e.kind,
            format!("{}: {}", path.display(), e.detail),
        ))
    })
}

fn emit(m: &Mat, path: Option<&Path>, stdout: &mut String) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, m.to_text()).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            stdout.push_str(&m.to_text());
            Ok(())
        }
    }
}

fn dot_test(a: &DotTestArgs, seed: u64) -> Result<Outcome, CliError> {
    let fields = match a.field {
        Some(f) => vec![f.into()],
        None => vec![Field::Real, Field::Complex],
    };
    let mut out = Outcome::new(CheckReport::new("dot-test"));
    for f in fields {
        let suite = adjoint_suite(a.size as usize, f, seed);
        out.notes.push(format!(
            "{}: {} primitives\n",
            suite.name,
            suite.cases.len()
        ));
        out.report.absorb(suite);
    }
    Ok(out)
}

fn with_real_output(mut stages: Vec<OpKind>, field: Field) -> Vec<OpKind> {
    if field == Field::Complex {
        stages.push(OpKind::Re);
    }
    stages
}

fn builtin(name: &str, n: usize, field: Field, seed: u64) -> Result<(Program, Vec<Mat>), CliError> {
    let trace_of = |op: OpKind, x: Mat| -> Result<(Program, Vec<Mat>), CliError> {
        let prog = Program::chain(&with_real_output(vec![op, OpKind::Trace], field))?;
        Ok((prog, vec![x]))
    };
    match name {
        "trace-inverse" => trace_of(OpKind::Inverse, Mat::random_well_conditioned(n, field, seed)),
        "trace-exp" => trace_of(
            OpKind::MatFunc(MatrixFunction::Exp),
            Mat::random_with_norm(n, field, 0.45, seed),
        ),
        "trace-log1p" => trace_of(
            OpKind::MatFunc(MatrixFunction::Log1p),
            Mat::random_with_norm(n, field, 0.45, seed),
        ),
        "trace-cube" => trace_of(OpKind::Power(3), Mat::random(n, n, field, seed)),
        "ffn" => {
            if field != Field::Real {
                return Err(FieldError::field("the ffn program is real only").into());
            }
            let params = FfnParams::init(&[32, 16, 8], seed)?;
            Ok(ffn_program(&params, &Batch::random(32, 8, 1, seed))?)
        }
        other => Err(CliError::Usage(format!(
            "unknown program {other:?}; expected trace-inverse, trace-exp, trace-log1p, trace-cube or ffn"
        ))),
    }
}

fn grad_check(a: &GradcheckArgs, seed: u64) -> Result<Outcome, CliError> {
    let cfg = fd_config(&a.fd)?;
    let (prog, leaves) = match (&a.program, &a.input, &a.pipeline) {
        (Some(name), _, _) => builtin(name, a.size as usize, a.field.into(), seed)?,
        (None, Some(path), Some(stages)) => {
            let x = read_matrix(path)?;
            let stages = stages
                .split(',')
                .map(|s| OpKind::parse_stage(s.trim()))
                .collect::<Result<Vec<_>, _>>()?;
            (Program::chain(&stages)?, vec![x])
        }
        _ => {
            return Err(CliError::Usage(
                "give --program, or --input with --pipeline".into(),
            ))
        }
    };
    let value = Tape::record(&prog, &leaves)?.output_value();
    let mut out = Outcome::new(gradcheck(&prog, &leaves, &cfg));
    out.notes.push(format!("value: {value:.16e}\n"));
    Ok(out)
}

fn matfunc(a: &MatfuncArgs) -> Result<Outcome, CliError> {
    let f = MatrixFunction::from_name(&a.function)?;
    let x = read_matrix(&a.input)?;
    let series = apply(&f, &x)?;
    let mut out = Outcome::new(CheckReport::new(format!("matfunc:{f}")));
    if !matches!(f, MatrixFunction::Poly(_)) {
        let r = series.truncation_residual;
        out.report
            .push("truncation-residual", r, 0.0, r <= TERM_TOLERANCE);
    }
    out.notes.push(format!("terms: {}\n", series.terms_used));
    emit(&series.value, a.output.as_deref(), &mut out.stdout)?;
    if let Some(dir) = &a.direction {
        let e = read_matrix(dir)?;
        let block = frechet_block(&f, &x, &e)?;
        let reference = frechet_series(&f, &x, &e)?;
        let diff = block.sub(&reference)?.frobenius_norm();
        let tol = 1e-10 * (1.0 + reference.frobenius_norm());
        out.report.push("block-vs-series", diff, 0.0, diff <= tol);
        emit(&block, a.frechet_output.as_deref(), &mut out.stdout)?;
    }
    Ok(out)
}

fn ffn_demo(a: &FfnArgs, seed: u64) -> Result<Outcome, CliError> {
    let cfg = fd_config(&a.fd)?;
    let params = FfnParams::init(&a.widths, seed)?;
    let (inputs, outputs) = (a.widths[0], a.widths[a.widths.len() - 1]);
    let one = Batch::random(inputs, outputs, 1, seed);
    let batch = Batch::random(inputs, outputs, a.batch as usize, seed);
    let mut out = Outcome::new(CheckReport::new("ffn-demo"));
    out.notes.push(format!("widths: {:?}\n", a.widths));
    out.notes.push(format!(
        "loss (1 sample): {:.16e}\n",
        ffn_loss(&params, &one)?
    ));
    out.notes.push(format!(
        "loss ({} samples): {:.16e}\n",
        batch.size(),
        ffn_loss(&params, &batch)?
    ));

    let (prog, leaves) = ffn_program(&params, &one)?;
    out.report.absorb(gradcheck(&prog, &leaves, &cfg));

    let mut backward = CheckReport::new("backward");
    let manual = ffn_backward_manual(&params, &batch)?;
    let engine = engine_gradients(&params, &batch)?;
    let rel = manual.grads.max_rel_diff(&engine)?;
    backward.push("manual-vs-engine", rel, 0.0, rel <= EXACT_TOLERANCE);
    out.report.absorb(backward);

    let rank = rank1_check(&params, &one.x, &one.y);
    for c in rank.cases.iter().filter(|c| c.label.ends_with(".rank")) {
        out.notes.push(format!("{}: {}\n", c.label, c.computed));
    }
    out.report.absorb(rank);
    out.report
        .absorb(batched_gradient_decomposition(&params, &batch));
    Ok(out)
}
