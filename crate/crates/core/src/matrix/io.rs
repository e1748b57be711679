//! Plain-text matrix format.
//!
//! ```text
//! rows cols field        # field is R or C
//! a11 a12 ...            # one line per row, whitespace separated
//! ```
//!
//! Complex entries are written `re,im` with no spaces. Values are printed
//! with 17 significant digits, which round-trips every `f64` exactly.

use std::fmt;
use std::str::FromStr;

use super::{Field, Mat, Scalar};
use crate::error::{FieldError, Result};

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn parse_f64(tok: &str, line: usize) -> Result<f64> {
    let x = f64::from_str(tok)
        .map_err(|_| FieldError::parse(format!("line {line}: bad number {tok:?}")))?;
    if !x.is_finite() {
        return Err(FieldError::parse(format!(
            "line {line}: non-finite entry {tok:?}"
        )));
    }
    Ok(x)
}

impl Mat {
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.rows, self.cols, self.field.tag());
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| {
                    let z = self.get(i, j);
                    match self.field {
                        Field::Real => fmt_f64(z.re),
                        Field::Complex => format!("{},{}", fmt_f64(z.re), fmt_f64(z.im)),
                    }
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Mat> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| FieldError::parse("empty matrix file"))?;
        let head: Vec<&str> = header.split_whitespace().collect();
        if head.len() != 3 {
            return Err(FieldError::parse(format!(
                "header must be `rows cols field`, got {header:?}"
            )));
        }
        let dim = |s: &str| {
            s.parse::<usize>()
                .ok()
                .filter(|&d| d > 0)
                .ok_or_else(|| FieldError::parse(format!("bad dimension {s:?}")))
        };
        let (rows, cols) = (dim(head[0])?, dim(head[1])?);
        let field = match head[2] {
            "R" => Field::Real,
            "C" => Field::Complex,
            other => return Err(FieldError::parse(format!("unknown field {other:?}"))),
        };
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let (no, line) = lines
                .next()
                .ok_or_else(|| FieldError::parse(format!("expected {rows} rows, got {r}")))?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != cols {
                return Err(FieldError::parse(format!(
                    "line {no}: expected {cols} entries, got {}",
                    toks.len()
                )));
            }
            for tok in toks {
                let z = match field {
                    Field::Real => {
                        if tok.contains(',') {
                            return Err(FieldError::parse(format!(
                                "line {no}: complex entry {tok:?} in a real matrix"
                            )));
                        }
                        Scalar::new(parse_f64(tok, no)?, 0.0)
                    }
                    Field::Complex => {
                        let (re, im) = tok.split_once(',').ok_or_else(|| {
                            FieldError::parse(format!("line {no}: complex entry must be re,im"))
                        })?;
                        Scalar::new(parse_f64(re, no)?, parse_f64(im, no)?)
                    }
                };
                data.push(z);
            }
        }
        if let Some((no, _)) = lines.next() {
            return Err(FieldError::parse(format!("line {no}: trailing data")));
        }
        Mat::new(rows, cols, field, data).map_err(|e| FieldError::parse(e.detail))
    }
}

impl fmt::Display for Mat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl FromStr for Mat {
    type Err = FieldError;

    fn from_str(s: &str) -> Result<Self> {
        Mat::from_text(s)
    }
}
