//! `jetlift`: verify contact mappings between PDE systems from problem files.

mod render;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use jetlift::ideal::{determining_equations, jet_order, verify_solution_map, Reducer};
use jetlift::series::{
    initial_values, ode_residual, param_verify, verify_h_condition, ParamMapping,
};
use jetlift::{
    format_expr, lift, normalize, parse_expr, parse_problem, simplify, Atom, Error, Expr, Mapping,
    ParseError, Problem, Report,
};
use serde_json::json;

use render::{Options, Outcome};

#[derive(Parser)]
#[command(
    name = "jetlift",
    version,
    about = "Exact verification of contact mappings between PDE systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Problem file.
    file: PathBuf,
    /// Emit a machine-readable JSON report.
    #[arg(long)]
    json: bool,
    /// Seed for the numeric spot checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Check that the [mapping] carries solutions of the source system to the target system.
    VerifyMap {
        #[command(flatten)]
        common: Common,
        /// Prolongation order; defaults to the highest order in the target system.
        #[arg(long)]
        order: Option<u32>,
    },
    /// Reduce an expression modulo the source system.
    Reduce {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        expr: String,
    },
    /// List the lifted components of the [mapping].
    Prolong {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        order: Option<u32>,
    },
    /// Collect the reduced target residuals by monomials in the given atoms.
    DetEqs {
        #[command(flatten)]
        common: Common,
        /// Comma-separated atoms, e.g. "u[x,x,x],u[x,x],u[x],u".
        #[arg(long)]
        top: Option<String>,
        #[arg(long)]
        order: Option<u32>,
    },
    /// Check the [param-mapping] as a symmetry of the source system, order by order in its parameter.
    ParamVerify {
        #[command(flatten)]
        common: Common,
        /// Truncation order of the parameter series.
        #[arg(long)]
        trunc: Option<u32>,
    },
}

const DEFAULT_TRUNC: u32 = 4;

/// A failure that ends the run with exit code 2.
enum Failure {
    Io(String),
    Parse {
        origin: String,
        text: String,
        err: ParseError,
    },
    Usage(String),
    Engine(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Engine(e)
    }
}

impl Failure {
    fn message(&self) -> String {
        match self {
            Failure::Io(m) | Failure::Usage(m) => m.clone(),
            Failure::Parse { origin, err, .. } => match err.position() {
                Some(_) => format!("{origin}:{err}"),
                None => format!("{origin}: {err}"),
            },
            Failure::Engine(e) => e.to_string(),
        }
    }

    /// Source line with a caret under the offending column.
    fn excerpt(&self) -> Option<String> {
        let Failure::Parse { text, err, .. } = self else {
            return None;
        };
        let (line, column) = err.position()?;
        let src = text.lines().nth(line.checked_sub(1)?)?;
        Some(format!(
            "  {src}\n  {}^",
            " ".repeat(column.saturating_sub(1))
        ))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (json, common) = match &cli.command {
        Command::VerifyMap { common, .. }
        | Command::Reduce { common, .. }
        | Command::Prolong { common, .. }
        | Command::DetEqs { common, .. }
        | Command::ParamVerify { common, .. } => (common.json, common.clone()),
    };
    let start = Instant::now();
    match run(&cli.command, &common) {
        Ok(outcome) => {
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&outcome.json).expect("serializable")
                );
            } else {
                print!("{}", outcome.human);
                println!("elapsed: {:.1} ms", start.elapsed().as_secs_f64() * 1e3);
            }
            ExitCode::from(outcome.code)
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            if let Some(ex) = failure.excerpt() {
                eprintln!("{ex}");
            }
            if json {
                let report = json!({ "verdict": "ERROR", "error": failure.message() });
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("serializable")
                );
            }
            ExitCode::from(2)
        }
    }
}

fn load(common: &Common) -> Result<Problem, Failure> {
    let path = common.file.display().to_string();
    let text =
        std::fs::read_to_string(&common.file).map_err(|e| Failure::Io(format!("{path}: {e}")))?;
    parse_problem(&text).map_err(|err| Failure::Parse {
        origin: path,
        text,
        err,
    })
}

fn run(command: &Command, common: &Common) -> Result<Outcome, Failure> {
    let problem = load(common)?;
    let mut opts = Options::new(command_name(command), common);
    match command {
        Command::VerifyMap { order, .. } => {
            let mapping = require_mapping(&problem)?;
            let q = order_for(&problem, *order)?;
            opts.set("order", q);
            let source = problem.oriented_source()?;
            let report =
                verify_solution_map(&source, &problem.target_system, mapping, q, common.seed)?;
            Ok(render::report(&report, &problem, opts))
        }
        Command::Reduce { expr, .. } => {
            opts.set("expr", expr.as_str());
            let e = parse_expr(expr, &problem.context).map_err(|err| Failure::Parse {
                origin: "--expr".into(),
                text: expr.clone(),
                err,
            })?;
            let source = problem.oriented_source()?;
            let mut reducer = Reducer::new(&source);
            let reduced = simplify(&reducer.reduce(&e)?)?;
            Ok(render::reduced(&reduced, reducer.steps(), &problem, opts))
        }
        Command::Prolong { order, .. } => {
            let mapping = require_mapping(&problem)?;
            let q = order_for(&problem, *order)?;
            opts.set("order", q);
            let lifted = lift(mapping, q)?;
            Ok(render::prolongation(&lifted, opts))
        }
        Command::DetEqs { top, order, .. } => {
            let mapping = require_mapping(&problem)?;
            let q = order_for(&problem, *order)?;
            opts.set("order", q);
            let top = match top {
                Some(csv) => {
                    opts.set("top", csv.as_str());
                    Some(parse_top(csv, &problem)?)
                }
                None => None,
            };
            let source = problem.oriented_source()?;
            let eqs =
                determining_equations(&source, &problem.target_system, mapping, q, top.as_deref())?;
            Ok(render::det_equations(&eqs, &problem, opts))
        }
        Command::ParamVerify { trunc, .. } => {
            let spec = problem.param_mapping.as_ref().ok_or_else(|| {
                Failure::Usage("param-verify needs a [param-mapping] section".into())
            })?;
            let n = match trunc {
                Some(n) => *n,
                None => problem
                    .option_u32("trunc")
                    .map_err(Failure::Usage)?
                    .unwrap_or(DEFAULT_TRUNC),
            };
            opts.set("trunc", n);
            let source = problem.oriented_source()?;
            let mut notes = Vec::new();
            let mut reports = Vec::new();
            if let Some(h) = &spec.h {
                let hr = verify_h_condition(h, &source, common.seed)?;
                let holds = hr.is_verified();
                reports.push(hr);
                if !holds {
                    notes.push("series check skipped".to_string());
                    return Ok(render::report(
                        &merge(reports, notes, common.seed)?,
                        &problem,
                        opts,
                    ));
                }
            }
            let map = ParamMapping::from_spec(&problem.context, spec, n as usize)?;
            reports.push(param_verify(&source, &map, common.seed)?);
            notes.extend(series_notes(&map, &problem)?);
            Ok(render::report(
                &merge(reports, notes, common.seed)?,
                &problem,
                opts,
            ))
        }
    }
}

fn command_name(command: &Command) -> &'static str {
    match command {
        Command::VerifyMap { .. } => "verify-map",
        Command::Reduce { .. } => "reduce",
        Command::Prolong { .. } => "prolong",
        Command::DetEqs { .. } => "det-eqs",
        Command::ParamVerify { .. } => "param-verify",
    }
}

fn require_mapping(problem: &Problem) -> Result<&Mapping, Failure> {
    problem
        .mapping
        .as_ref()
        .ok_or_else(|| Failure::Usage("this command needs a [mapping] section".into()))
}

/// Flag, then `order` option, then the highest order in the target system.
fn order_for(problem: &Problem, flag: Option<u32>) -> Result<u32, Failure> {
    if let Some(q) = flag {
        return Ok(q);
    }
    if let Some(q) = problem.option_u32("order").map_err(Failure::Usage)? {
        return Ok(q);
    }
    let target = problem
        .target_system
        .iter()
        .map(|e| jet_order(&e.residual()))
        .max()
        .unwrap_or(0);
    Ok(target.max(1))
}

/// Splits at commas outside brackets and parentheses.
fn split_top_level(text: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in text.char_indices() {
        match c {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            ',' if depth == 0 => {
                out.push(&text[start..i]);
                start = i + 1;
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}

fn parse_top(csv: &str, problem: &Problem) -> Result<Vec<Atom>, Failure> {
    let mut out = Vec::new();
    for item in split_top_level(csv)
        .into_iter()
        .map(str::trim)
        .filter(|s| !s.is_empty())
    {
        let e = parse_expr(item, &problem.context).map_err(|err| Failure::Parse {
            origin: "--top".into(),
            text: item.to_string(),
            err,
        })?;
        match e {
            Expr::Atomic(a) => out.push(a),
            _ => return Err(Failure::Usage(format!("--top entry {item} is not an atom"))),
        }
    }
    Ok(out)
}

/// One report over the residuals of all `reports`, with fresh spot checks.
fn merge(reports: Vec<Report>, notes: Vec<String>, seed: u64) -> Result<Report, Failure> {
    let mut residuals = Vec::new();
    let mut all_notes = Vec::new();
    for r in reports {
        residuals.extend(r.residuals.into_iter().map(|r| (r.label, r.normal_form)));
        all_notes.extend(r.notes);
    }
    let mut out = Report::from_residuals(residuals, seed)?;
    all_notes.extend(notes);
    out.notes = all_notes;
    Ok(out)
}

/// Initial values of the first barred dependent and the group-parameter ODE
/// `(a ubar + 1) ubar_aa - 2 ubar_a (a ubar_a - ubar)`.
fn series_notes(map: &ParamMapping, problem: &Problem) -> Result<Vec<String>, Failure> {
    let ctx = &problem.context;
    let ubar = map.ubar(0);
    let name = &ctx.dependents()[0];
    let a = map.param();
    let mut notes = vec![format!(
        "{name}bar|{a}=0 = {}",
        format_expr(&simplify(&ubar.coeff(0))?, ctx)
    )];
    if map.trunc() >= 1 {
        let (_, slope) = initial_values(ubar)?;
        notes.push(format!(
            "d{name}bar/d{a}|{a}=0 = {}",
            format_expr(&simplify(&slope)?, ctx)
        ));
    }
    if map.trunc() < 2 {
        notes.push(format!("ode in {a}: skipped, truncation below 2"));
    } else {
        let r = ode_residual(ubar)?;
        let mut holds = true;
        for c in r.coeffs() {
            holds &= normalize(c)?.is_zero();
        }
        let upto = r.trunc();
        notes.push(format!(
            "ode (a*ubar + 1)*ubar_aa - 2*ubar_a*(a*ubar_a - ubar) through {a}^{upto}: {}",
            if holds { "holds" } else { "does not hold" }
        ));
    }
    Ok(notes)
}
