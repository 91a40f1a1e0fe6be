//! Human and JSON renderings of command results.

use std::fmt::Write;

use jetlift::ideal::DetEquation;
use jetlift::prolong::LiftedMapping;
use jetlift::{format_atom, format_expr, Expr, JetContext, Problem, Report};
use serde_json::{json, Map, Value};

use crate::Common;

/// Echo of the effective options, in insertion order for the human form.
pub struct Options {
    entries: Vec<(String, Value)>,
}

impl Options {
    pub fn new(command: &str, common: &Common) -> Self {
        let mut o = Options {
            entries: Vec::new(),
        };
        o.set("command", command);
        o.set("file", common.file.display().to_string());
        o.set("seed", common.seed);
        o
    }

    pub fn set(&mut self, key: &str, value: impl Into<Value>) {
        self.entries.push((key.to_string(), value.into()));
    }

    fn to_json(&self) -> Value {
        Value::Object(self.entries.iter().cloned().collect::<Map<_, _>>())
    }

    fn human(&self) -> String {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|(k, v)| match v {
                Value::String(s) => format!("{k}={s}"),
                other => format!("{k}={other}"),
            })
            .collect();
        format!("options: {}\n", parts.join(" "))
    }
}

pub struct Outcome {
    pub code: u8,
    pub human: String,
    pub json: Value,
}

pub fn report(report: &Report, problem: &Problem, opts: Options) -> Outcome {
    let ctx = &problem.context;
    let residuals: Vec<(String, String)> = report
        .residuals
        .iter()
        .map(|r| (r.label.clone(), format_expr(&r.normal_form, ctx)))
        .collect();
    let spot_checks: Vec<Value> = report
        .spot_checks
        .iter()
        .map(|s| {
            let assignment: Map<String, Value> = s
                .assignment
                .iter()
                .map(|(a, v)| (format_atom(a, ctx), Value::String(v.to_string())))
                .collect();
            let values: Vec<Value> = s
                .values
                .iter()
                .map(|v| Value::String(v.to_string()))
                .collect();
            json!({ "assignment": assignment, "value": values })
        })
        .collect();
    let json = json!({
        "verdict": report.verdict.as_str(),
        "residuals": residuals
            .iter()
            .map(|(eq, nf)| json!({ "equation": eq, "normal_form": nf }))
            .collect::<Vec<_>>(),
        "spot_checks": spot_checks,
        "notes": report.notes,
        "options": opts.to_json(),
    });

    let mut h = String::new();
    h.push_str(&opts.human());
    for (eq, nf) in &residuals {
        let _ = writeln!(h, "residual {eq}\n  {nf}");
    }
    for (i, s) in report.spot_checks.iter().enumerate() {
        let point: Vec<String> = s
            .assignment
            .iter()
            .map(|(a, v)| format!("{}={v}", format_atom(a, ctx)))
            .collect();
        let values: Vec<String> = s.values.iter().map(ToString::to_string).collect();
        let at = if point.is_empty() {
            "(constant)".to_string()
        } else {
            point.join(" ")
        };
        let _ = writeln!(h, "spot check {}: [{}] at {at}", i + 1, values.join(", "));
    }
    for n in &report.notes {
        let _ = writeln!(h, "note: {n}");
    }
    let _ = writeln!(h, "verdict: {}", report.verdict.as_str());
    Outcome {
        code: if report.is_verified() { 0 } else { 1 },
        human: h,
        json,
    }
}

pub fn reduced(e: &Expr, steps: usize, problem: &Problem, opts: Options) -> Outcome {
    let nf = format_expr(e, &problem.context);
    let json = json!({ "normal_form": nf, "steps": steps, "options": opts.to_json() });
    let human = format!("{}steps: {steps}\n{nf}\n", opts.human());
    Outcome {
        code: 0,
        human,
        json,
    }
}

pub fn prolongation(lifted: &LiftedMapping, opts: Options) -> Outcome {
    let base = lifted.base();
    let (source, target) = (&base.source, &base.target);
    let mut rows = Vec::new();
    for (i, f) in base.f.iter().enumerate() {
        rows.push((target.independents()[i].clone(), format_expr(f, source)));
    }
    for (j, alpha, e) in lifted.components() {
        let atom = jetlift::Atom::Dependent {
            var: j,
            alpha: alpha.clone(),
        };
        rows.push((format_atom(&atom, target), format_expr(e, source)));
    }
    let det = format_expr(lifted.df_det(), source);
    let json = json!({
        "components": rows.iter().map(|(a, e)| json!({ "atom": a, "expr": e })).collect::<Vec<_>>(),
        "det": det,
        "options": opts.to_json(),
    });
    let mut h = opts.human();
    for (a, e) in &rows {
        let _ = writeln!(h, "{a} = {e}");
    }
    let _ = writeln!(h, "det(Df) = {det}");
    Outcome {
        code: 0,
        human: h,
        json,
    }
}

fn monomial(m: &[(jetlift::Atom, u32)], ctx: &JetContext) -> String {
    if m.is_empty() {
        return "1".into();
    }
    let parts: Vec<String> = m
        .iter()
        .map(|(a, e)| match e {
            1 => format_atom(a, ctx),
            _ => format!("{}^{e}", format_atom(a, ctx)),
        })
        .collect();
    parts.join("*")
}

pub fn det_equations(eqs: &[DetEquation], problem: &Problem, opts: Options) -> Outcome {
    let ctx = &problem.context;
    let rows: Vec<(usize, String, String)> = eqs
        .iter()
        .map(|d| {
            (
                d.equation + 1,
                monomial(&d.monomial, ctx),
                format_expr(&d.coefficient, ctx),
            )
        })
        .collect();
    let json = json!({
        "equations": rows
            .iter()
            .map(|(i, m, c)| json!({ "equation": i, "monomial": m, "coefficient": c }))
            .collect::<Vec<_>>(),
        "options": opts.to_json(),
    });
    let mut h = opts.human();
    for (i, m, c) in &rows {
        let _ = writeln!(h, "[{i}] {m}: {c} = 0");
    }
    let _ = writeln!(h, "{} equations", rows.len());
    Outcome {
        code: 0,
        human: h,
        json,
    }
}
