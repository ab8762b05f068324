//! Report documents and their text rendering.
//!
//! The JSON form is the serialized [`Report`]; `schema_version` changes
//! whenever a field is renamed or removed.

use std::fmt::Write as _;

use selflink::bundles::RegularityReport;
use selflink::linking::InvariantResult;
use selflink::selflinking::IntersectionRecord;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// Settings a run used, defaults included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Settings {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub methods: Vec<String>,
    pub grid: usize,
    pub seeds: usize,
    /// Largest distance from an integer that is still rounded.
    pub tol: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
}

/// One method's value or the error it stopped with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<InvariantResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub seconds: f64,
}

impl MethodOutcome {
    pub fn value(&self) -> Option<i64> {
        self.result.as_ref().map(|r| r.value)
    }
}

/// One cell of the published example table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub curve: String,
    pub a: f64,
    pub bundle: String,
    pub expected: i64,
    pub outcomes: Vec<MethodOutcome>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Body {
    Check {
        report: RegularityReport,
    },
    Invariant {
        outcomes: Vec<MethodOutcome>,
        /// Whether every method that ran produced the same integer.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        agreement: Option<bool>,
    },
    Table {
        rows: Vec<TableRow>,
        diff: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub inputs: Vec<String>,
    pub settings: Settings,
    pub body: Body,
    pub pass: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let s = &self.settings;
        let _ = writeln!(out, "{} {}", self.command, self.inputs.join(" "));
        let mut line = format!("  grid {}  seeds {}  tol {}", s.grid, s.seeds, s.tol);
        if let Some(b) = &s.bundle {
            line = format!("  bundle {b}{line}");
        }
        if let Some(k) = s.k {
            let _ = write!(line, "  k {k}");
        }
        if !s.methods.is_empty() {
            let _ = write!(line, "  methods {}", s.methods.join(","));
        }
        let _ = writeln!(out, "{line}");
        match &self.body {
            Body::Check { report } => render_check(&mut out, report),
            Body::Invariant {
                outcomes,
                agreement,
            } => {
                for o in outcomes {
                    render_outcome(&mut out, o);
                }
                match agreement {
                    Some(true) => out.push_str("methods agree\n"),
                    Some(false) => out.push_str("METHODS DISAGREE\n"),
                    None => {}
                }
            }
            Body::Table { rows, diff } => render_table(&mut out, rows, diff),
        }
        let _ = writeln!(out, "{}", if self.pass { "PASS" } else { "FAIL" });
        out
    }
}

fn render_check(out: &mut String, r: &RegularityReport) {
    let _ = writeln!(out, "order k = {}, grid {}", r.k, r.grid);
    let _ = writeln!(
        out,
        "  chord fiber component   {:.3e} at (t, s) = ({:.6}, {:.6})",
        r.condition1_margin, r.condition1_location.0, r.condition1_location.1
    );
    let _ = writeln!(
        out,
        "  derivative independence {:.3e} at t = {:.6}",
        r.condition2a_margin, r.condition2a_location
    );
    let _ = writeln!(
        out,
        "  low-order projection    {:.3e} at t = {:.6}",
        r.condition2b_max_projection, r.condition2b_location
    );
    let _ = writeln!(
        out,
        "  push-off wedge          {:.3e} at t = {:.6}",
        r.condition2c_margin, r.condition2c_location
    );
    for f in &r.failures {
        let _ = writeln!(out, "  fails: {f}");
    }
}

fn render_outcome(out: &mut String, o: &MethodOutcome) {
    match (&o.result, &o.error) {
        (Some(r), _) => {
            let _ = writeln!(
                out,
                "{:<13} {:>3}  raw {:+.12}  residual {:.1e}  ({:.1}s)",
                o.method, r.value, r.raw, r.residual, o.seconds
            );
            let d = &r.diagnostics;
            if let Some(c) = d.cross_check {
                let _ = writeln!(out, "  cross-check raw {c:+.12}");
            }
            if let Some(b) = d.diagonal_term {
                let _ = writeln!(out, "  diagonal term {b:+.12}");
            }
            for (delta, raw) in &d.pushoffs {
                let _ = writeln!(out, "  push-off {delta:.0e}: raw {raw:+.12}");
            }
            if !d.intersections.is_empty() {
                render_intersections(out, &d.intersections);
            }
        }
        (None, Some(e)) => {
            let _ = writeln!(out, "{:<13} error: {e}", o.method);
        }
        (None, None) => {
            let _ = writeln!(out, "{:<13} (not run)", o.method);
        }
    }
}

fn render_intersections(out: &mut String, rows: &[IntersectionRecord]) {
    let _ = writeln!(
        out,
        "  {:>10} {:>10}  {:<28} {:>4} {:>5} {:>6}",
        "t", "s", "fiber coords", "sign", "index", "contr"
    );
    for r in rows {
        let coords: Vec<String> = r.fiber_coords.iter().map(|x| format!("{x:+.4}")).collect();
        let index = r.index.map_or("-".to_string(), |i| format!("{i:+}"));
        let _ = writeln!(
            out,
            "  {:>10.6} {:>10.6}  {:<28} {:>+4} {:>5} {:>+6.1}",
            r.t,
            r.s,
            coords.join(" "),
            r.sign_factor,
            index,
            r.contribution
        );
    }
}

fn render_table(out: &mut String, rows: &[TableRow], diff: &[String]) {
    let methods: Vec<&str> = rows
        .first()
        .map(|r| r.outcomes.iter().map(|o| o.method.as_str()).collect())
        .unwrap_or_default();
    let _ = write!(
        out,
        "{:<9} {:>4} {:<11} {:>8}",
        "curve", "A", "bundle", "expected"
    );
    for m in &methods {
        let _ = write!(out, " {m:>12}");
    }
    out.push_str("  status\n");
    for r in rows {
        let _ = write!(
            out,
            "{:<9} {:>4} {:<11} {:>8}",
            r.curve, r.a, r.bundle, r.expected
        );
        for o in &r.outcomes {
            let cell = match o.value() {
                Some(v) => v.to_string(),
                None => "error".to_string(),
            };
            let _ = write!(out, " {cell:>12}");
        }
        let _ = writeln!(out, "  {}", if r.pass { "ok" } else { "MISMATCH" });
    }
    for d in diff {
        let _ = writeln!(out, "- {d}");
    }
}
