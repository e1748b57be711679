//! Check reports and their two output formats.
//!
//! The machine format is line oriented and versioned:
//!
//! ```text
//! schema: 1
//! report: <name>
//! pass: <true|false>
//! max_abs_error: <float>
//! max_rel_error: <float>
//! cases: <count>
//! case: <label>\t<computed>\t<reference>\t<abs_error>\t<rel_error>\t<pass>
//! error: <message>
//! end: <name>
//! ```
//!
//! Floats use 17 significant digits so identical inputs give byte-identical
//! reports.

use std::fmt::Write;

#[derive(Debug, Clone, PartialEq)]
pub struct Case {
    pub label: String,
    pub computed: f64,
    pub reference: f64,
    pub abs_error: f64,
    pub rel_error: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    pub pass: bool,
    pub cases: Vec<Case>,
    /// Evaluation failures; any entry fails the report.
    pub errors: Vec<String>,
}

pub(crate) fn rel_error(abs: f64, reference: f64) -> f64 {
    if abs == 0.0 {
        0.0
    } else if reference == 0.0 {
        f64::INFINITY
    } else {
        abs / reference.abs()
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

impl CheckReport {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            max_abs_error: 0.0,
            max_rel_error: 0.0,
            pass: true,
            cases: Vec::new(),
            errors: Vec::new(),
        }
    }

    /// Records a comparison; `pass` is decided by the caller's tolerance rule.
    pub fn push(&mut self, label: impl Into<String>, computed: f64, reference: f64, pass: bool) {
        let abs_error = (computed - reference).abs();
        let rel = rel_error(abs_error, reference);
        self.max_abs_error = self.max_abs_error.max(abs_error);
        if rel.is_finite() {
            self.max_rel_error = self.max_rel_error.max(rel);
        }
        self.pass &= pass && abs_error.is_finite();
        self.cases.push(Case {
            label: label.into(),
            computed,
            reference,
            abs_error,
            rel_error: rel,
            pass,
        });
    }

    /// Records a comparison that passes when `|computed - reference| <= atol`
    /// or `<= rtol |reference|`.
    pub fn push_banded(
        &mut self,
        label: impl Into<String>,
        computed: f64,
        reference: f64,
        atol: f64,
        rtol: f64,
    ) {
        let abs = (computed - reference).abs();
        let pass = abs <= atol || abs <= rtol * reference.abs();
        self.push(label, computed, reference, pass);
    }

    /// Records a boolean property.
    pub fn push_flag(&mut self, label: impl Into<String>, ok: bool) {
        let v = if ok { 1.0 } else { 0.0 };
        self.push(label, v, 1.0, ok);
    }

    pub fn push_error(&mut self, context: impl AsRef<str>, err: impl std::fmt::Display) {
        self.errors.push(format!("{}: {err}", context.as_ref()));
        self.pass = false;
    }

    /// Folds another report's cases into this one, prefixing labels.
    pub fn absorb(&mut self, other: CheckReport) {
        for c in other.cases {
            let label = format!("{}/{}", other.name, c.label);
            self.push(label, c.computed, c.reference, c.pass);
        }
        for e in other.errors {
            self.push_error(&other.name, e);
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Case> {
        self.cases.iter().filter(|c| !c.pass)
    }

    /// Human-readable `key: value` summary. Lists up to 20 failing cases.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "report: {}", self.name);
        let _ = writeln!(s, "pass: {}", self.pass);
        let _ = writeln!(s, "cases: {}", self.cases.len());
        let _ = writeln!(s, "max_abs_error: {:.3e}", self.max_abs_error);
        let _ = writeln!(s, "max_rel_error: {:.3e}", self.max_rel_error);
        for c in self.failures().take(20) {
            let _ = writeln!(
                s,
                "failed: {} computed={:.6e} reference={:.6e} abs={:.3e}",
                c.label, c.computed, c.reference, c.abs_error
            );
        }
        for e in &self.errors {
            let _ = writeln!(s, "error: {e}");
        }
        s
    }

    pub fn to_machine(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "schema: 1");
        self.write_machine_body(&mut s);
        s
    }

    /// Machine body without the schema header, for multi-report files.
    pub fn write_machine_body(&self, s: &mut String) {
        let _ = writeln!(s, "report: {}", self.name);
        let _ = writeln!(s, "pass: {}", self.pass);
        let _ = writeln!(s, "max_abs_error: {}", num(self.max_abs_error));
        let _ = writeln!(s, "max_rel_error: {}", num(self.max_rel_error));
        let _ = writeln!(s, "cases: {}", self.cases.len());
        for c in &self.cases {
            let _ = writeln!(
                s,
                "case: {}\t{}\t{}\t{}\t{}\t{}",
                c.label,
                num(c.computed),
                num(c.reference),
                num(c.abs_error),
                num(c.rel_error),
                c.pass
            );
        }
        for e in &self.errors {
            let _ = writeln!(s, "error: {}", e.replace('\n', " "));
        }
        let _ = writeln!(s, "end: {}", self.name);
    }
}
